use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use num_complex::Complex;

use super::codebook::check_channels;
use super::{
    ebf_codebook, min_sum_gain, mrt_codebook, solve_subproblem, Codebook, CodebookExport,
    OptimizerError, SubproblemDiagnostics,
};
use crate::numerics::{CVector, NumericsError};
use crate::Scalar;

/// Starting codebook for the SCA iterations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum InitStrategy {
    /// `L` copies of MRT on the reference channel.
    Mrt,
    Ebf,
    /// Whichever of MRT and EBF has the larger min-sum gain (MRT on ties).
    #[default]
    BestBaseline,
    /// Independent isotropic directions at full power.
    Random {
        seed: u64,
    },
    Given {
        codebook: CodebookExport,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_outer: usize,
    /// Stop once `|t⁽ⁿ⁾ − t⁽ⁿ⁻¹⁾| ≤ eps_outer · max(1, |t⁽ⁿ⁾|)`.
    pub eps_outer: f64,
    /// Certified optimality gap of every convex step.
    pub eps_inner: f64,
    pub init: InitStrategy,
    /// Additional runs from random starts; the best final codebook wins.
    pub restarts: usize,
    /// Seed of the first random restart; later ones use derived seeds.
    pub restart_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer: 200,
            eps_outer: 1e-6,
            eps_inner: 1e-8,
            init: InitStrategy::BestBaseline,
            restarts: 0,
            restart_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.max_outer == 0 {
            return Err(OptimizerError::InvalidConfig(
                "max_outer must be at least 1".into(),
            ));
        }
        for (name, v) in [("eps_outer", self.eps_outer), ("eps_inner", self.eps_inner)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(OptimizerError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Seed of random restart `r`.
    pub fn restart_seed_for(&self, r: usize) -> u64 {
        // splitmix64 finalizer keeps neighboring seeds decorrelated
        let mut z = self
            .restart_seed
            .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub label: String,
    pub final_gain: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Trace of the winning run, plus a summary of every start tried.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverReport {
    /// Label of the start that produced the returned codebook.
    pub init: String,
    /// `t⁽⁰⁾…t⁽ⁿ⁾`; `t⁽⁰⁾` is the true objective of the start.
    pub objective_trace: Vec<f64>,
    /// True min-sum gain of every iterate.
    pub gain_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub subproblems: Vec<SubproblemDiagnostics>,
    #[serde(default)]
    pub starts: Vec<StartSummary>,
}

impl SolverReport {
    pub fn final_gain(&self) -> f64 {
        self.gain_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// [`sca_design_with_reference`] with the most recent channel of the list as
/// the MRT reference.
pub fn sca_design<T: Scalar>(
    channels: &[CVector<T>],
    power: T,
    size: usize,
    config: &SolverConfig,
) -> Result<(Codebook<T>, SolverReport), OptimizerError> {
    sca_design_with_reference(channels, None, power, size, config)
}

/// Max-min-sum codebook of `size` vectors by successive convex approximation.
///
/// `reference` is the outdated CSI used by the MRT start; it defaults to the
/// last channel of the list.
pub fn sca_design_with_reference<T: Scalar>(
    channels: &[CVector<T>],
    reference: Option<&CVector<T>>,
    power: T,
    size: usize,
    config: &SolverConfig,
) -> Result<(Codebook<T>, SolverReport), OptimizerError> {
    config.validate()?;
    if size == 0 {
        return Err(OptimizerError::InvalidConfig(
            "codebook size must be at least 1".into(),
        ));
    }
    if !(power.is_finite() && power > T::zero()) {
        return Err(OptimizerError::InvalidConfig(format!(
            "power budget must be positive, got {power}"
        )));
    }
    let Some(last) = channels.last() else {
        return Err(OptimizerError::EmptyNeighborhood);
    };
    check_channels(channels, last.dim())?;
    let reference = reference.unwrap_or(last);
    if reference.dim() != last.dim() {
        return Err(OptimizerError::DimensionMismatch {
            expected: last.dim(),
            found: reference.dim(),
        });
    }

    let (label, start) = initial_codebook(&config.init, channels, reference, power, size)?;
    let mut best = run(channels, start, &label, config)?;
    let mut starts = vec![summary(&best.1)];
    for r in 0..config.restarts {
        let seed = config.restart_seed_for(r);
        let start = random_codebook(last.dim(), power, size, seed)?;
        let candidate = run(channels, start, &format!("random(seed={seed})"), config)?;
        starts.push(summary(&candidate.1));
        if candidate.1.final_gain() > best.1.final_gain() {
            best = candidate;
        }
    }
    best.1.starts = starts;
    Ok(best)
}

fn summary(report: &SolverReport) -> StartSummary {
    StartSummary {
        label: report.init.clone(),
        final_gain: report.final_gain(),
        iterations: report.iterations,
        converged: report.converged,
    }
}

fn initial_codebook<T: Scalar>(
    init: &InitStrategy,
    channels: &[CVector<T>],
    reference: &CVector<T>,
    power: T,
    size: usize,
) -> Result<(String, Codebook<T>), OptimizerError> {
    let dim = reference.dim();
    match init {
        InitStrategy::Mrt => Ok(("mrt".into(), mrt_codebook(reference, power, size)?)),
        InitStrategy::Ebf => Ok(("ebf".into(), ebf_codebook(channels, power, size)?)),
        InitStrategy::BestBaseline => {
            let mrt = mrt_codebook(reference, power, size)?;
            match ebf_codebook(channels, power, size) {
                Ok(ebf) if min_sum_gain(&ebf, channels)? > min_sum_gain(&mrt, channels)? => {
                    Ok(("ebf".into(), ebf))
                }
                Ok(_) => Ok(("mrt".into(), mrt)),
                // more beams than antennas: EBF is undefined, MRT remains
                Err(OptimizerError::Numerics(NumericsError::RankTooLarge { .. })) => {
                    Ok(("mrt".into(), mrt))
                }
                Err(e) => Err(e),
            }
        }
        InitStrategy::Random { seed } => Ok((
            format!("random(seed={seed})"),
            random_codebook(dim, power, size, *seed)?,
        )),
        InitStrategy::Given { codebook } => {
            let cb: Codebook<T> = codebook.to_codebook()?;
            if cb.dim() != dim || cb.len() != size {
                return Err(OptimizerError::InvalidConfig(format!(
                    "given start is {}×{}, expected {dim}×{size}",
                    cb.dim(),
                    cb.len()
                )));
            }
            if cb.power() != power {
                return Err(OptimizerError::InvalidConfig(
                    "given start uses a different power budget".into(),
                ));
            }
            Ok(("given".into(), cb))
        }
    }
}

/// `size` independent circularly-symmetric Gaussian directions scaled to `√P`.
fn random_codebook<T: Scalar>(
    dim: usize,
    power: T,
    size: usize,
    seed: u64,
) -> Result<Codebook<T>, OptimizerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(size);
    for _ in 0..size {
        let v = loop {
            let entries: Vec<Complex<T>> = (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex::new(T::lit(re), T::lit(im))
                })
                .collect();
            let v = CVector::new(entries)?;
            if v.norm() > T::zero() {
                break v;
            }
        };
        vectors.push(v.scale_real(power.sqrt() / v.norm()));
    }
    Codebook::new(vectors, power)
}

fn run<T: Scalar>(
    channels: &[CVector<T>],
    start: Codebook<T>,
    label: &str,
    config: &SolverConfig,
) -> Result<(Codebook<T>, SolverReport), OptimizerError> {
    let power = start.power();
    let eps_inner = T::lit(config.eps_inner);
    let gain0 = min_sum_gain(&start, channels)?.as_f64();
    let mut report = SolverReport {
        init: label.to_string(),
        objective_trace: vec![gain0],
        gain_trace: vec![gain0],
        ..SolverReport::default()
    };
    let mut current = start;
    let mut previous_t = gain0;
    for _ in 0..config.max_outer {
        let step = match solve_subproblem(channels, current.vectors(), power, eps_inner) {
            Ok(s) => s,
            Err(e) => {
                return Err(OptimizerError::Aborted {
                    source: Box::new(e),
                    report: Box::new(report),
                })
            }
        };
        current = Codebook::new(step.vectors, power)?;
        let t = step.t.as_f64();
        report.iterations += 1;
        report.objective_trace.push(t);
        report
            .gain_trace
            .push(min_sum_gain(&current, channels)?.as_f64());
        report.subproblems.push(step.diagnostics);
        if (t - previous_t).abs() <= config.eps_outer * t.abs().max(1.0) {
            report.converged = true;
            break;
        }
        previous_t = t;
    }
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighborhood::closeness;
    use crate::optimizer::{brute_force_oracle, mrt_baseline_gain};
    use rand::Rng;

    fn random(rng: &mut ChaCha8Rng, m: usize) -> CVector<f64> {
        CVector::new(
            (0..m)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_channel_converges_to_mrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random(&mut rng, 6);
        for l in 1..=3 {
            let (cb, report) =
                sca_design(std::slice::from_ref(&h), 2.0, l, &SolverConfig::default()).unwrap();
            let g = min_sum_gain(&cb, std::slice::from_ref(&h)).unwrap();
            assert!((g - 2.0 * l as f64).abs() <= 1e-6 * 2.0 * l as f64);
            for f in cb.vectors() {
                assert!(closeness(f, &h).unwrap() >= 0.999);
            }
            assert!(report.converged);
        }
    }

    #[test]
    fn random_start_single_channel_still_reaches_mrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random(&mut rng, 4);
        let cfg = SolverConfig {
            init: InitStrategy::Random { seed: 11 },
            ..SolverConfig::default()
        };
        let (cb, _) = sca_design(std::slice::from_ref(&h), 1.0, 1, &cfg).unwrap();
        assert!((min_sum_gain(&cb, &[h]).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ascent_and_baseline_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = rng.gen_range(2..=8);
            let k = rng.gen_range(2..=10);
            let l = rng.gen_range(1..=3).min(m);
            let chans: Vec<_> = (0..k).map(|_| random(&mut rng, m)).collect();
            let g = random(&mut rng, m);
            let (cb, report) =
                sca_design_with_reference(&chans, Some(&g), 1.0, l, &SolverConfig::default())
                    .unwrap();
            for w in report.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-8, "{:?}", report.objective_trace);
            }
            for w in report.gain_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-8);
            }
            let mms = min_sum_gain(&cb, &chans).unwrap();
            let mrt = mrt_baseline_gain(&g, 1.0, l, &chans).unwrap();
            let ebf = min_sum_gain(&ebf_codebook(&chans, 1.0, l).unwrap(), &chans).unwrap();
            assert!(mms >= mrt.max(ebf) - 1e-8);
        }
    }

    #[test]
    fn two_antenna_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = SolverConfig {
            restarts: 8,
            restart_seed: 99,
            ..SolverConfig::default()
        };
        for _ in 0..5 {
            let k = rng.gen_range(2..=4);
            let chans: Vec<_> = (0..k).map(|_| random(&mut rng, 2)).collect();
            let (cb, report) = sca_design(&chans, 1.0, 1, &cfg).unwrap();
            assert_eq!(report.starts.len(), 9);
            let oracle = brute_force_oracle(&chans, 1.0, 1, 256).unwrap();
            assert!(min_sum_gain(&cb, &chans).unwrap() >= 0.98 * oracle);
        }
    }

    #[test]
    fn config_validation_and_errors() {
        let h = CVector::<f64>::basis(2, 0);
        let bad = SolverConfig {
            max_outer: 0,
            ..SolverConfig::default()
        };
        assert!(sca_design(std::slice::from_ref(&h), 1.0, 1, &bad).is_err());
        assert_eq!(
            sca_design::<f64>(&[], 1.0, 1, &SolverConfig::default()).unwrap_err(),
            OptimizerError::EmptyNeighborhood
        );
        // more beams than antennas falls back to MRT for the start
        let (cb, _) =
            sca_design(std::slice::from_ref(&h), 1.0, 3, &SolverConfig::default()).unwrap();
        assert_eq!(cb.len(), 3);
    }

    #[test]
    fn config_serde_round_trip() {
        let cfg = SolverConfig {
            init: InitStrategy::Random { seed: 3 },
            restarts: 2,
            ..SolverConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SolverConfig>(&json).unwrap(), cfg);
        let partial: SolverConfig = serde_json::from_str(r#"{"max_outer": 5}"#).unwrap();
        assert_eq!(partial.max_outer, 5);
        assert_eq!(partial.init, InitStrategy::BestBaseline);
    }
}
