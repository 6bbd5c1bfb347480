use serde::{Deserialize, Serialize};

use super::{OptimizerError, SolverReport};
use crate::neighborhood::ComplexParts;
use crate::numerics::{inner_slices, CVector};
use crate::Scalar;

/// Slack allowed on `‖f_ℓ‖² ≤ P`: `max(1e-9, 64·ε·P)`.
pub fn feasibility_tolerance<T: Scalar>(power: T) -> T {
    T::lit(1e-9).max(T::lit(64.0) * T::epsilon() * power)
}

/// `10·log₁₀(gain)`; `-inf` for zero gain.
pub fn gain_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// `L` beamforming vectors of a common dimension within a power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    vectors: Vec<CVector<T>>,
    power: T,
}

impl<T: Scalar> Codebook<T> {
    pub fn new(vectors: Vec<CVector<T>>, power: T) -> Result<Self, OptimizerError> {
        if !(power.is_finite() && power > T::zero()) {
            return Err(OptimizerError::InvalidConfig(format!(
                "power budget must be positive, got {power}"
            )));
        }
        let Some(first) = vectors.first() else {
            return Err(OptimizerError::InvalidConfig(
                "a codebook needs at least one vector".into(),
            ));
        };
        let dim = first.dim();
        let tol = feasibility_tolerance(power);
        for (index, v) in vectors.iter().enumerate() {
            if v.dim() != dim {
                return Err(OptimizerError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            let sq = v.squared_norm();
            if sq > power + tol {
                return Err(OptimizerError::PowerViolation {
                    index,
                    squared_norm: sq.as_f64(),
                    power: power.as_f64(),
                });
            }
        }
        Ok(Self { vectors, power })
    }

    pub fn vectors(&self) -> &[CVector<T>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<CVector<T>> {
        self.vectors
    }

    pub fn power(&self) -> T {
        self.power
    }

    /// Codebook size `L`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Antenna count `M`.
    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn cast<U: Scalar>(&self) -> Codebook<U> {
        Codebook {
            vectors: self.vectors.iter().map(CVector::cast).collect(),
            power: U::lit(self.power.as_f64()),
        }
    }
}

/// Rejects empty lists, zero channels and dimension mismatches against `dim`.
pub(crate) fn check_channels<T: Scalar>(
    channels: &[CVector<T>],
    dim: usize,
) -> Result<(), OptimizerError> {
    if channels.is_empty() {
        return Err(OptimizerError::EmptyNeighborhood);
    }
    for (index, h) in channels.iter().enumerate() {
        if h.dim() != dim {
            return Err(OptimizerError::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        if !(h.squared_norm() > T::zero()) {
            return Err(OptimizerError::ZeroNormChannel { index });
        }
    }
    Ok(())
}

/// Summed normalized gain `Σ_ℓ |h_i^H f_ℓ|² / ‖h_i‖²` for every channel.
pub fn sum_gains<T: Scalar>(
    cb: &Codebook<T>,
    channels: &[CVector<T>],
) -> Result<Vec<T>, OptimizerError> {
    check_channels(channels, cb.dim())?;
    Ok(channels
        .iter()
        .map(|h| {
            let total = cb
                .vectors
                .iter()
                .map(|f| inner_slices(h.as_slice(), f.as_slice()).norm_sqr())
                .fold(T::zero(), |a, b| a + b);
            total / h.squared_norm()
        })
        .collect())
}

/// The max-min-sum objective: the smallest summed gain over the channels.
pub fn min_sum_gain<T: Scalar>(
    cb: &Codebook<T>,
    channels: &[CVector<T>],
) -> Result<T, OptimizerError> {
    Ok(sum_gains(cb, channels)?
        .into_iter()
        .fold(T::infinity(), |a, b| a.min(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    /// Neighborhood size the gain was evaluated on.
    #[serde(rename = "K")]
    pub k: usize,
    pub min_sum_gain: f64,
    pub min_sum_gain_db: f64,
}

impl GainSummary {
    pub fn evaluate<T: Scalar>(
        cb: &Codebook<T>,
        channels: &[CVector<T>],
    ) -> Result<Self, OptimizerError> {
        let g = min_sum_gain(cb, channels)?.as_f64();
        Ok(Self {
            k: channels.len(),
            min_sum_gain: g,
            min_sum_gain_db: gain_db(g),
        })
    }
}

/// JSON form of a designed codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookExport {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "P")]
    pub power: f64,
    pub vectors: Vec<ComplexParts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<GainSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SolverReport>,
}

impl CodebookExport {
    pub fn new<T: Scalar>(
        cb: &Codebook<T>,
        metrics: Option<GainSummary>,
        report: Option<SolverReport>,
    ) -> Self {
        Self {
            m: cb.dim(),
            l: cb.len(),
            power: cb.power.as_f64(),
            vectors: cb.vectors.iter().map(ComplexParts::from_vector).collect(),
            metrics,
            report,
        }
    }

    /// Rebuilds the codebook, re-checking dimensions and the power budget.
    pub fn to_codebook<T: Scalar>(&self) -> Result<Codebook<T>, OptimizerError> {
        let vectors = self
            .vectors
            .iter()
            .map(|p| p.to_vector())
            .collect::<Result<Vec<CVector<T>>, _>>()?;
        if vectors.len() != self.l {
            return Err(OptimizerError::DimensionMismatch {
                expected: self.l,
                found: vectors.len(),
            });
        }
        let cb = Codebook::new(vectors, T::lit(self.power))?;
        if cb.dim() != self.m {
            return Err(OptimizerError::DimensionMismatch {
                expected: self.m,
                found: cb.dim(),
            });
        }
        Ok(cb)
    }
}
