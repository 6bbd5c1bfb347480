//! Experiment configuration: a single JSON document whose every field has a
//! default matching the large-room scenario.

use std::path::Path;

use robustbf::channel::{EnvironmentConfig, TrajectorySpec};
use robustbf::neighborhood::{NeighborhoodParams, ThresholdMetric};
use robustbf::optimizer::SolverConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::HarnessError;

/// The experiment axis and its values (ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Initial-list size `T` with top-`T` matching.
    Neighbors { values: Vec<usize> },
    /// Closeness threshold `γ`.
    Threshold {
        values: Vec<f64>,
        #[serde(default)]
        metric: ThresholdMetric,
    },
    /// Maximum angle in degrees, mapped to a threshold through `metric`.
    Angle {
        values: Vec<f64>,
        #[serde(default)]
        metric: ThresholdMetric,
    },
    /// Codebook size `L`.
    CodebookSize { values: Vec<usize> },
}

impl SweepSpec {
    pub fn len(&self) -> usize {
        match self {
            SweepSpec::Neighbors { values } | SweepSpec::CodebookSize { values } => values.len(),
            SweepSpec::Threshold { values, .. } | SweepSpec::Angle { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sweep values as floats, for the CSV column.
    pub fn values_f64(&self) -> Vec<f64> {
        match self {
            SweepSpec::Neighbors { values } | SweepSpec::CodebookSize { values } => {
                values.iter().map(|&v| v as f64).collect()
            }
            SweepSpec::Threshold { values, .. } | SweepSpec::Angle { values, .. } => values.clone(),
        }
    }

    pub fn axis_name(&self) -> &'static str {
        match self {
            SweepSpec::Neighbors { .. } => "neighbors",
            SweepSpec::Threshold { .. } => "threshold",
            SweepSpec::Angle { .. } => "angle",
            SweepSpec::CodebookSize { .. } => "codebook_size",
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let values = self.values_f64();
        if values.is_empty() {
            return Err(HarnessError::Validation("sweep value list is empty".into()));
        }
        if values
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(HarnessError::Validation(format!(
                "sweep values must be strictly increasing, got {values:?}"
            )));
        }
        match self {
            SweepSpec::Neighbors { values } | SweepSpec::CodebookSize { values }
                if values[0] == 0 =>
            {
                Err(HarnessError::Validation(format!(
                    "{} values must be >= 1",
                    self.axis_name()
                )))
            }
            SweepSpec::Threshold { values, .. }
                if values.iter().any(|&g| !(g > 0.0 && g <= 1.0)) =>
            {
                Err(HarnessError::Validation(
                    "thresholds must lie in (0, 1]".into(),
                ))
            }
            SweepSpec::Angle { values, .. }
                if values.iter().any(|&a| !(0.0..90.0).contains(&a)) =>
            {
                Err(HarnessError::Validation(
                    "angles must lie in [0, 90) degrees".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentConfig,
    pub trajectory: TrajectorySpec,
    /// Seconds between database records; `None` leaves timestamps null.
    pub sample_period: Option<f64>,
    pub neighborhood: NeighborhoodParams,
    pub solver: SolverConfig,
    /// Per-vector power budget in dBW.
    pub power_dbw: f64,
    /// Codebook size `L` (overridden per point by a codebook-size sweep).
    pub codebook_size: usize,
    pub sweep: SweepSpec,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: EnvironmentConfig::default(),
            trajectory: TrajectorySpec::circular_default(),
            sample_period: None,
            neighborhood: NeighborhoodParams::top_t(5, 5),
            solver: SolverConfig::default(),
            power_dbw: 0.0,
            codebook_size: 1,
            sweep: SweepSpec::Neighbors {
                values: vec![1, 3, 5, 8],
            },
            trials: 20,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn power_watts(&self) -> f64 {
        10f64.powf(self.power_dbw / 10.0)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Validation(
                "trial count must be at least 1".into(),
            ));
        }
        if self.codebook_size == 0 {
            return Err(HarnessError::Validation(
                "codebook size must be at least 1".into(),
            ));
        }
        if !self.power_dbw.is_finite() {
            return Err(HarnessError::Validation("power must be finite".into()));
        }
        if self.trajectory.points() == 0 {
            return Err(HarnessError::Validation(
                "trajectory needs at least one point (N >= 1)".into(),
            ));
        }
        if let Some(dt) = self.sample_period {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(HarnessError::Validation(
                    "sample period must be positive".into(),
                ));
            }
        }
        self.neighborhood.validate()?;
        self.solver.validate()?;
        self.sweep.validate()
    }

    /// Parses a configuration document. A metadata file written by the
    /// harness is accepted too: its `config` member is used.
    pub fn from_json_value(value: Value) -> Result<Self, HarnessError> {
        let value = match value {
            Value::Object(mut map)
                if map.contains_key("config") && map.contains_key("generator") =>
            {
                map.remove("config").unwrap_or(Value::Null)
            }
            other => other,
        };
        serde_json::from_value(value).map_err(|e| HarnessError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json_value(read_json_file(path)?)
    }

    /// `self` with every field present in `overlay` replaced, recursively.
    pub fn overlaid(&self, overlay: Value) -> Result<Self, HarnessError> {
        let mut base =
            serde_json::to_value(self).map_err(|e| HarnessError::Validation(e.to_string()))?;
        let overlay = match overlay {
            Value::Object(mut map)
                if map.contains_key("config") && map.contains_key("generator") =>
            {
                map.remove("config").unwrap_or(Value::Null)
            }
            other => other,
        };
        merge(&mut base, overlay);
        Self::from_json_value(base)
    }
}

pub fn read_json_file(path: &Path) -> Result<Value, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Validation(format!("{}: {e}", path.display())))
}

/// Deep merge; tagged enums are replaced wholesale when their tag changes.
fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            let tag_changed = ["kind", "axis", "mode"]
                .iter()
                .any(|t| matches!((b.get(*t), o.get(*t)), (Some(x), Some(y)) if x != y));
            if tag_changed {
                *b = o;
                return;
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
