//! Max-min-sum codebook design.
//!
//! The design problem is
//!
//! ```text
//! maximize   min_i  Σ_ℓ |h_i^H f_ℓ|² / ‖h_i‖²
//! subject to ‖f_ℓ‖² ≤ P,  ℓ = 1…L
//! ```
//!
//! which is nonconvex because each summed gain is a convex quadratic in the
//! beamformers. [`sca_design`] replaces every quadratic by its tangent
//! minorant at the current codebook and solves the resulting second-order
//! cone program ([`solve_subproblem`]), repeating until the objective settles.
//! Each step can only increase the true objective, so the iterates ascend
//! from whatever feasible codebook they start at.
//!
//! [`mrt_beamformer`] and [`ebf_codebook`] are the two reference schemes and
//! [`brute_force_oracle`] is a grid search for two-antenna instances used to
//! check the SCA result.

mod baselines;
mod codebook;
mod dense;
mod oracle;
mod sca;
pub mod socp;
mod subproblem;

use thiserror::Error;

use crate::numerics::NumericsError;

pub use baselines::{ebf_codebook, mrt_baseline_gain, mrt_beamformer, mrt_codebook};
pub use codebook::{
    feasibility_tolerance, gain_db, min_sum_gain, sum_gains, Codebook, CodebookExport, GainSummary,
};
pub use dense::RealMatrix;
pub use oracle::{brute_force_oracle, brute_force_search, OracleResult, DEFAULT_ORACLE_RESOLUTION};
pub use sca::{
    sca_design, sca_design_with_reference, InitStrategy, SolverConfig, SolverReport, StartSummary,
};
pub use subproblem::{
    solve_subproblem, taylor_minorant, SubproblemDiagnostics, SubproblemSolution,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("the neighborhood channel list is empty")]
    EmptyNeighborhood,
    #[error("channel {index} has zero norm")]
    ZeroNormChannel { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("beamformer {index} has squared norm {squared_norm} above the power budget {power}")]
    PowerViolation {
        index: usize,
        squared_norm: f64,
        power: f64,
    },
    #[error(
        "subproblem solver stopped after {iterations} iterations without certificate \
         (gap {gap:.3e}, primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}): {reason}"
    )]
    SubproblemFailed {
        iterations: usize,
        gap: f64,
        primal_residual: f64,
        dual_residual: f64,
        reason: String,
    },
    #[error("design aborted at outer iteration {}: {source}", report.iterations)]
    Aborted {
        source: Box<OptimizerError>,
        /// Progress made before the failing step.
        report: Box<SolverReport>,
    },
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
