//! Robust downlink beamforming codebooks designed from a historical CSI database.
//!
//! The pipeline is: synthesize indoor multipath channels along a UE trajectory
//! ([`channel`]), select a neighborhood of channel vectors around an outdated
//! CSI estimate ([`neighborhood`]), then maximize the minimum sum beamforming
//! gain over that neighborhood by successive convex approximation
//! ([`optimizer`]). MRT and eigen-beamforming baselines are included.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

// `!(x > 0)` is used deliberately so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense kernels read more clearly with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod neighborhood;
pub mod numerics;
pub mod optimizer;
mod scalar;

pub use scalar::Scalar;

pub type CVector64 = numerics::CVector<f64>;
pub type CMatrix64 = numerics::CMatrix<f64>;
pub type HermitianMatrix64 = numerics::HermitianMatrix<f64>;
pub type Codebook64 = optimizer::Codebook<f64>;
