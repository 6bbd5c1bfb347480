//! Two-stage neighborhood channel-list generation.
//!
//! Stage one matches the outdated CSI `ĝ` against every database entry with
//! the closeness metric `|ĝ^H h|² / (‖ĝ‖²‖h‖²)`. Stage two widens every match
//! `m` to the chronological window `m-k ..= m+k` (clipped at the database
//! ends) and takes the union.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::CsiDatabase;
use crate::numerics::{inner_slices, CVector};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeighborhoodError {
    #[error("closeness is undefined for a zero-norm channel vector")]
    ZeroNorm,
    #[error("dimension mismatch: query has {query}, database has {database}")]
    DimensionMismatch { query: usize, database: usize },
    #[error("no database entry passed the initial match ({0}); lower the threshold or use top-T selection")]
    EmptyMatch(String),
    #[error("invalid neighborhood parameters: {0}")]
    InvalidParams(String),
    #[error("initial index {index} out of range for a database of {len} records")]
    IndexOutOfRange { index: usize, len: usize },
}

/// What a numeric threshold `γ` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMetric {
    /// `c_i > γ`, with `c_i` the squared normalized correlation.
    #[default]
    Squared,
    /// `√c_i > γ`, i.e. thresholding `|cos θ|`.
    Unsquared,
}

impl ThresholdMetric {
    /// Threshold equivalent to a maximum angle between `ĝ` and `h_i`.
    pub fn gamma_for_angle_deg(self, degrees: f64) -> f64 {
        let c = degrees.to_radians().cos();
        match self {
            ThresholdMetric::Squared => c * c,
            ThresholdMetric::Unsquared => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Selection {
    /// Every entry whose metric strictly exceeds `gamma`.
    Threshold {
        gamma: f64,
        #[serde(default)]
        metric: ThresholdMetric,
    },
    /// The `count` entries with largest closeness; ties go to the older entry.
    TopT { count: usize },
}

impl Selection {
    pub fn threshold(gamma: f64) -> Self {
        Selection::Threshold {
            gamma,
            metric: ThresholdMetric::Squared,
        }
    }

    pub fn max_angle_deg(degrees: f64, metric: ThresholdMetric) -> Self {
        Selection::Threshold {
            gamma: metric.gamma_for_angle_deg(degrees),
            metric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodParams {
    pub selection: Selection,
    /// Local half-window `k`.
    pub k: usize,
    /// Skip the most recent record (the source of `ĝ`) during matching.
    #[serde(default)]
    pub exclude_query: bool,
}

impl NeighborhoodParams {
    pub fn top_t(count: usize, k: usize) -> Self {
        Self {
            selection: Selection::TopT { count },
            k,
            exclude_query: false,
        }
    }

    pub fn threshold(gamma: f64, k: usize) -> Self {
        Self {
            selection: Selection::threshold(gamma),
            k,
            exclude_query: false,
        }
    }

    pub fn validate(&self) -> Result<(), NeighborhoodError> {
        match self.selection {
            Selection::Threshold { gamma, .. } if !(gamma > 0.0 && gamma <= 1.0) => Err(
                NeighborhoodError::InvalidParams(format!("threshold {gamma} must lie in (0, 1]")),
            ),
            Selection::TopT { count: 0 } => Err(NeighborhoodError::InvalidParams(
                "top-T selection needs T >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Selected neighborhood: sorted unique database indices and their channels.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodList<T> {
    pub members: Vec<usize>,
    pub channels: Vec<CVector<T>>,
    /// Initial-match indices the list was expanded from.
    pub initial: Vec<usize>,
}

impl<T> NeighborhoodList<T> {
    /// Number of channels `K`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Squared normalized correlation `|g^H h|² / (‖g‖²‖h‖²)`, in `[0, 1]`.
pub fn closeness<T: Scalar>(g: &CVector<T>, h: &CVector<T>) -> Result<T, NeighborhoodError> {
    if g.dim() != h.dim() {
        return Err(NeighborhoodError::DimensionMismatch {
            query: g.dim(),
            database: h.dim(),
        });
    }
    let (gg, hh) = (g.squared_norm(), h.squared_norm());
    if !(gg > T::zero() && hh > T::zero()) {
        return Err(NeighborhoodError::ZeroNorm);
    }
    let c = inner_slices(g.as_slice(), h.as_slice()).norm_sqr() / (gg * hh);
    Ok(c.min(T::one()))
}

/// Closeness of `g` to every database record, in index order.
pub fn closeness_profile<T: Scalar>(
    db: &CsiDatabase<T>,
    g: &CVector<T>,
) -> Result<Vec<T>, NeighborhoodError> {
    if g.dim() != db.dim() {
        return Err(NeighborhoodError::DimensionMismatch {
            query: g.dim(),
            database: db.dim(),
        });
    }
    let gg = g.squared_norm();
    if !(gg > T::zero()) {
        return Err(NeighborhoodError::ZeroNorm);
    }
    db.records()
        .iter()
        .map(|r| {
            let hh = r.h.squared_norm();
            if !(hh > T::zero()) {
                return Err(NeighborhoodError::ZeroNorm);
            }
            Ok((inner_slices(g.as_slice(), r.h.as_slice()).norm_sqr() / (gg * hh)).min(T::one()))
        })
        .collect()
}

/// Initial matches in chronological order.
pub fn match_initial<T: Scalar>(
    db: &CsiDatabase<T>,
    g: &CVector<T>,
    params: &NeighborhoodParams,
) -> Result<Vec<usize>, NeighborhoodError> {
    params.validate()?;
    let profile = closeness_profile(db, g)?;
    let limit = if params.exclude_query {
        db.len() - 1
    } else {
        db.len()
    };
    let candidates = &profile[..limit];

    let matched: Vec<usize> = match params.selection {
        Selection::Threshold { gamma, metric } => candidates
            .iter()
            .enumerate()
            .filter(|(_, &c)| {
                let value = match metric {
                    ThresholdMetric::Squared => c.as_f64(),
                    ThresholdMetric::Unsquared => c.as_f64().sqrt(),
                };
                value > gamma
            })
            .map(|(i, _)| i)
            .collect(),
        Selection::TopT { count } => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.sort_by(|&a, &b| {
                candidates[b]
                    .partial_cmp(&candidates[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            order.truncate(count);
            order.sort_unstable();
            order
        }
    };

    if matched.is_empty() {
        let what = match params.selection {
            Selection::Threshold { gamma, .. } => format!("threshold {gamma}"),
            Selection::TopT { count } => format!("top-{count} over an empty candidate set"),
        };
        return Err(NeighborhoodError::EmptyMatch(what));
    }
    Ok(matched)
}

/// Union of the windows `m-k ..= m+k` over all initial indices, clipped to
/// `[0, db.len())`, deduplicated by index and sorted.
pub fn expand_local<T: Scalar>(
    db: &CsiDatabase<T>,
    initial: &[usize],
    k: usize,
) -> Result<NeighborhoodList<T>, NeighborhoodError> {
    let len = db.len();
    let mut members = BTreeSet::new();
    for &m in initial {
        if m >= len {
            return Err(NeighborhoodError::IndexOutOfRange { index: m, len });
        }
        let lo = m.saturating_sub(k);
        let hi = (m + k).min(len - 1);
        members.extend(lo..=hi);
    }
    let members: Vec<usize> = members.into_iter().collect();
    let channels = members.iter().map(|&i| db.channel(i).clone()).collect();
    let mut initial = initial.to_vec();
    initial.sort_unstable();
    initial.dedup();
    Ok(NeighborhoodList {
        members,
        channels,
        initial,
    })
}

pub fn build_neighborhood<T: Scalar>(
    db: &CsiDatabase<T>,
    g: &CVector<T>,
    params: &NeighborhoodParams,
) -> Result<NeighborhoodList<T>, NeighborhoodError> {
    let initial = match_initial(db, g, params)?;
    expand_local(db, &initial, params.k)
}

/// Query identification in a neighborhood export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryRef {
    Index { query_index: usize },
    Vector { query_vector: ComplexParts },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexParts {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexParts {
    pub fn from_vector<T: Scalar>(v: &CVector<T>) -> Self {
        Self {
            re: v.iter().map(|z| z.re.as_f64()).collect(),
            im: v.iter().map(|z| z.im.as_f64()).collect(),
        }
    }

    pub fn to_vector<T: Scalar>(&self) -> Result<CVector<T>, crate::numerics::NumericsError> {
        let re: Vec<T> = self.re.iter().map(|&v| T::lit(v)).collect();
        let im: Vec<T> = self.im.iter().map(|&v| T::lit(v)).collect();
        CVector::from_parts(&re, &im)
    }
}

/// Audit record of one neighborhood build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodExport {
    #[serde(flatten)]
    pub query: QueryRef,
    pub params: NeighborhoodParams,
    pub initial_indices: Vec<usize>,
    pub member_indices: Vec<usize>,
}

impl NeighborhoodExport {
    pub fn new<T>(query: QueryRef, params: NeighborhoodParams, list: &NeighborhoodList<T>) -> Self {
        Self {
            query,
            params,
            initial_indices: list.initial.clone(),
            member_indices: list.members.clone(),
        }
    }
}
