//! Built-in property and oracle suite behind the `verify` subcommand.
//!
//! Every check draws its instances from a seeded stream, so a report is
//! reproducible. The minorant check takes the minorant as a parameter so a
//! deliberately broken one can be fed in to confirm the check has teeth.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use robustbf::neighborhood::closeness;
use robustbf::optimizer::{
    brute_force_oracle, ebf_codebook, min_sum_gain, sca_design, taylor_minorant, InitStrategy,
    OptimizerError, SolverConfig,
};
use robustbf::CVector64;
use serde::{Deserialize, Serialize};

/// Signature of [`taylor_minorant`] at double precision.
pub type MinorantFn = fn(&CVector64, &CVector64, &CVector64) -> Result<f64, OptimizerError>;

/// Instance counts and seed of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub minorant_samples: usize,
    pub ascent_instances: usize,
    pub exact_csi_instances: usize,
    pub oracle_instances: usize,
    pub oracle_restarts: usize,
    pub oracle_resolution: usize,
    pub monotonicity_pairs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            minorant_samples: 10_000,
            ascent_instances: 50,
            exact_csi_instances: 20,
            oracle_instances: 20,
            oracle_restarts: 8,
            oracle_resolution: 512,
            monotonicity_pairs: 20,
        }
    }
}

/// Outcome of one named check: the worst observed value of its metric
/// against the pinned tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    pub metric: String,
    pub worst: f64,
    pub tolerance: f64,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const MINORANT_BOUND_TOL: f64 = 1e-10;
pub const MINORANT_TANGENCY_TOL: f64 = 1e-12;
pub const ASCENT_TOL: f64 = 1e-8;
pub const EXACT_CSI_GAIN_TOL: f64 = 1e-6;
pub const EXACT_CSI_CLOSENESS: f64 = 0.999;
pub const ORACLE_RATIO: f64 = 0.98;
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// Circularly-symmetric standard complex Gaussian vector.
pub fn random_cvector(rng: &mut impl Rng, dim: usize) -> CVector64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let entries = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re * s, im * s)
        })
        .collect();
    CVector64::new(entries).expect("dimension is positive")
}

fn random_channels(rng: &mut impl Rng, dim: usize, count: usize) -> Vec<CVector64> {
    (0..count).map(|_| random_cvector(rng, dim)).collect()
}

struct Tracker {
    name: &'static str,
    metric: &'static str,
    tolerance: f64,
    worst: f64,
    instances: usize,
    failure: Option<String>,
    start: Instant,
}

impl Tracker {
    fn new(name: &'static str, metric: &'static str, tolerance: f64, worst: f64) -> Self {
        Self {
            name,
            metric,
            tolerance,
            worst,
            instances: 0,
            failure: None,
            start: Instant::now(),
        }
    }

    fn fail(&mut self, message: String) {
        self.failure.get_or_insert(message);
    }

    fn finish(self, passed: bool) -> CheckResult {
        CheckResult {
            name: self.name.into(),
            passed: passed && self.failure.is_none(),
            instances: self.instances,
            metric: self.metric.into(),
            worst: self.worst,
            tolerance: self.tolerance,
            seconds: self.start.elapsed().as_secs_f64(),
            failure: self.failure,
        }
    }
}

fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Lower bound `m(f; w) ≤ |h^H f|²` and tangency `m(w; w) = |h^H w|²`.
pub fn check_minorant(opts: &VerifyOptions, minorant: MinorantFn) -> CheckResult {
    let mut rng = sub_rng(opts.seed, 1);
    let mut t = Tracker::new(
        "minorant",
        "max excess over |h^H f|^2 and tangency error",
        MINORANT_BOUND_TOL,
        0.0,
    );
    let mut worst_tangency: f64 = 0.0;
    for _ in 0..opts.minorant_samples {
        let m = rng.gen_range(2..=16);
        let (h, f, w) = (
            random_cvector(&mut rng, m),
            random_cvector(&mut rng, m),
            random_cvector(&mut rng, m),
        );
        let gain = h.inner(&f).expect("same dimension").norm_sqr();
        let at_w = h.inner(&w).expect("same dimension").norm_sqr();
        match (minorant(&h, &f, &w), minorant(&h, &w, &w)) {
            (Ok(below), Ok(tangent)) => {
                let excess = below - gain;
                t.worst = t.worst.max(excess);
                worst_tangency = worst_tangency.max((tangent - at_w).abs());
                if excess > MINORANT_BOUND_TOL {
                    t.fail(format!("M = {m}: minorant exceeds the gain by {excess:e}"));
                }
                if (tangent - at_w).abs() > MINORANT_TANGENCY_TOL {
                    t.fail(format!(
                        "M = {m}: tangency error {:e}",
                        (tangent - at_w).abs()
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => t.fail(e.to_string()),
        }
        t.instances += 1;
    }
    t.worst = t.worst.max(worst_tangency);
    t.finish(true)
}

/// Non-decreasing objective and gain traces of the SCA iterations.
pub fn check_ascent(opts: &VerifyOptions) -> CheckResult {
    let mut rng = sub_rng(opts.seed, 2);
    let mut t = Tracker::new(
        "ascent",
        "largest decrease between outer iterations",
        ASCENT_TOL,
        0.0,
    );
    for i in 0..opts.ascent_instances {
        let m = rng.gen_range(2..=16);
        let k = rng.gen_range(1..=30);
        let l = rng.gen_range(1..=3);
        let channels = random_channels(&mut rng, m, k);
        let config = SolverConfig {
            eps_inner: ASCENT_TOL,
            init: if i % 2 == 0 {
                InitStrategy::BestBaseline
            } else {
                InitStrategy::Random { seed: rng.gen() }
            },
            ..SolverConfig::default()
        };
        match sca_design(&channels, 1.0, l, &config) {
            Ok((_, report)) => {
                for trace in [&report.objective_trace, &report.gain_trace] {
                    for pair in trace.windows(2) {
                        let drop = pair[0] - pair[1];
                        t.worst = t.worst.max(drop);
                        if drop > ASCENT_TOL {
                            t.fail(format!(
                                "M = {m}, K = {k}, L = {l}: trace decreased by {drop:e}"
                            ));
                        }
                    }
                }
            }
            Err(e) => t.fail(format!("M = {m}, K = {k}, L = {l}: {e}")),
        }
        t.instances += 1;
    }
    t.finish(true)
}

/// With a single channel every scheme collapses onto MRT: MMS reaches
/// `L·P` with every vector aligned to the channel, and the dominant EBF
/// vector is the MRT direction.
pub fn check_exact_csi(opts: &VerifyOptions) -> CheckResult {
    let mut rng = sub_rng(opts.seed, 3);
    let mut t = Tracker::new(
        "exact_csi",
        "max relative deviation of the K = 1 gain from L·P",
        EXACT_CSI_GAIN_TOL,
        0.0,
    );
    for _ in 0..opts.exact_csi_instances {
        let m = rng.gen_range(2..=16);
        let l = rng.gen_range(1..=3);
        let power = 10f64.powf(rng.gen_range(-1.0..1.0));
        let h = random_cvector(&mut rng, m);
        let channels = std::slice::from_ref(&h);
        let target = l as f64 * power;
        let record = |label: &str, gain: f64, t: &mut Tracker, target: f64| {
            let rel = (gain - target).abs() / target;
            t.worst = t.worst.max(rel);
            if rel > EXACT_CSI_GAIN_TOL {
                t.fail(format!(
                    "{label}, M = {m}, L = {l}: gain {gain} vs {target}"
                ));
            }
        };
        match sca_design(channels, power, l, &SolverConfig::default()) {
            Ok((cb, _)) => {
                record(
                    "MMS",
                    min_sum_gain(&cb, channels).unwrap_or(f64::NAN),
                    &mut t,
                    target,
                );
                for f in cb.vectors() {
                    let c = closeness(f, &h).unwrap_or(0.0);
                    if c < EXACT_CSI_CLOSENESS {
                        t.fail(format!(
                            "MMS vector closeness {c} below {EXACT_CSI_CLOSENESS}"
                        ));
                    }
                }
            }
            Err(e) => t.fail(format!("MMS, M = {m}, L = {l}: {e}")),
        }
        // a rank-one covariance yields one useful EBF vector: compare at L = 1
        match ebf_codebook(channels, power, 1) {
            Ok(cb) => {
                record(
                    "EBF",
                    min_sum_gain(&cb, channels).unwrap_or(f64::NAN),
                    &mut t,
                    power,
                );
                let c = closeness(&cb.vectors()[0], &h).unwrap_or(0.0);
                if c < EXACT_CSI_CLOSENESS {
                    t.fail(format!(
                        "EBF vector closeness {c} below {EXACT_CSI_CLOSENESS}"
                    ));
                }
            }
            Err(e) => t.fail(format!("EBF, M = {m}: {e}")),
        }
        t.instances += 1;
    }
    t.finish(true)
}

/// SCA with random restarts against the exhaustive grid on `M = 2`.
pub fn check_oracle(opts: &VerifyOptions) -> CheckResult {
    let mut rng = sub_rng(opts.seed, 4);
    let mut t = Tracker::new(
        "oracle",
        "max relative shortfall of MMS below the grid optimum",
        1.0 - ORACLE_RATIO,
        0.0,
    );
    for _ in 0..opts.oracle_instances {
        let k = rng.gen_range(2..=4);
        let channels = random_channels(&mut rng, 2, k);
        let config = SolverConfig {
            restarts: opts.oracle_restarts,
            restart_seed: rng.gen(),
            ..SolverConfig::default()
        };
        let outcome = sca_design(&channels, 1.0, 1, &config)
            .and_then(|(cb, _)| min_sum_gain(&cb, &channels))
            .and_then(|mms| {
                Ok((
                    mms,
                    brute_force_oracle(&channels, 1.0, 1, opts.oracle_resolution)?,
                ))
            });
        match outcome {
            Ok((mms, oracle)) => {
                let shortfall = (1.0 - mms / oracle).max(0.0);
                t.worst = t.worst.max(shortfall);
                if mms < ORACLE_RATIO * oracle {
                    t.fail(format!(
                        "K = {k}: MMS {mms} below {ORACLE_RATIO} × oracle {oracle}"
                    ));
                }
            }
            Err(e) => t.fail(format!("K = {k}: {e}")),
        }
        t.instances += 1;
    }
    t.finish(true)
}

/// Growing the channel set never raises the optimal min gain.
pub fn check_monotonicity(opts: &VerifyOptions) -> CheckResult {
    let mut rng = sub_rng(opts.seed, 5);
    let mut t = Tracker::new(
        "monotonicity",
        "max increase of the grid optimum when channels are added",
        MONOTONICITY_TOL,
        f64::NEG_INFINITY,
    );
    for _ in 0..opts.monotonicity_pairs {
        let small = rng.gen_range(1..=3);
        let extra = rng.gen_range(1..=3);
        let large = random_channels(&mut rng, 2, small + extra);
        let outcome =
            brute_force_oracle(&large[..small], 1.0, 1, opts.oracle_resolution).and_then(|s| {
                Ok((
                    s,
                    brute_force_oracle(&large, 1.0, 1, opts.oracle_resolution)?,
                ))
            });
        match outcome {
            Ok((s, l)) => {
                t.worst = t.worst.max(l - s);
                if l > s + MONOTONICITY_TOL {
                    t.fail(format!(
                        "|S| = {small} → {}: optimum rose from {s} to {l}",
                        small + extra
                    ));
                }
            }
            Err(e) => t.fail(e.to_string()),
        }
        t.instances += 1;
    }
    t.finish(true)
}

/// Runs the whole suite with the library's minorant.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    run_verify_with(opts, taylor_minorant::<f64>)
}

pub fn run_verify_with(opts: &VerifyOptions, minorant: MinorantFn) -> VerifyReport {
    let checks = vec![
        check_minorant(opts, minorant),
        check_ascent(opts),
        check_exact_csi(opts),
        check_oracle(opts),
        check_monotonicity(opts),
    ];
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
