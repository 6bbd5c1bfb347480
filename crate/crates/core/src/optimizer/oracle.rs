//! Exhaustive grid search over single two-antenna beamformers.

use num_complex::Complex;

use super::codebook::check_channels;
use super::OptimizerError;
use crate::numerics::CVector;
use crate::Scalar;

pub const DEFAULT_ORACLE_RESOLUTION: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub theta: T,
    pub phi: T,
}

/// Maximum over the grid of `min_i |h_i^H f|² / ‖h_i‖²` (`M = 2`, `L = 1`).
pub fn brute_force_oracle<T: Scalar>(
    channels: &[CVector<T>],
    power: T,
    size: usize,
    resolution: usize,
) -> Result<T, OptimizerError> {
    brute_force_search(channels, power, size, resolution).map(|r| r.value)
}

/// Grid search over `f = √P (cos θ, sin θ e^{jφ})` with `θ` on `resolution`
/// points spanning `[0, π/2]` inclusive and `φ = 2πj/resolution`.
pub fn brute_force_search<T: Scalar>(
    channels: &[CVector<T>],
    power: T,
    size: usize,
    resolution: usize,
) -> Result<OracleResult<T>, OptimizerError> {
    if size != 1 {
        return Err(OptimizerError::Unsupported(format!(
            "the oracle handles L = 1 only, got L = {size}"
        )));
    }
    let Some(first) = channels.first() else {
        return Err(OptimizerError::EmptyNeighborhood);
    };
    if first.dim() != 2 {
        return Err(OptimizerError::Unsupported(format!(
            "the oracle handles M = 2 only, got M = {}",
            first.dim()
        )));
    }
    check_channels(channels, 2)?;
    if resolution < 2 {
        return Err(OptimizerError::InvalidConfig(
            "oracle resolution must be at least 2".into(),
        ));
    }
    if !(power.is_finite() && power > T::zero()) {
        return Err(OptimizerError::InvalidConfig(format!(
            "power budget must be positive, got {power}"
        )));
    }

    // conj(ĥ) so that ĥ^H f = Σ conj(ĥ_i) f_i
    let hc: Vec<[Complex<T>; 2]> = channels
        .iter()
        .map(|h| {
            let n = h.norm();
            [h[0].conj() / n, h[1].conj() / n]
        })
        .collect();
    let phases: Vec<Complex<T>> = (0..resolution)
        .map(|j| {
            Complex::from_polar(
                T::one(),
                (T::PI() + T::PI()) * T::of_usize(j) / T::of_usize(resolution),
            )
        })
        .collect();

    let mut best = OracleResult {
        value: T::neg_infinity(),
        theta: T::zero(),
        phi: T::zero(),
    };
    for i in 0..resolution {
        let theta = T::FRAC_PI_2() * T::of_usize(i) / T::of_usize(resolution - 1);
        let (s, c) = theta.sin_cos();
        for (j, e) in phases.iter().enumerate() {
            let f1 = *e * s;
            let mut worst = T::infinity();
            for h in &hc {
                let g = (h[0] * c + h[1] * f1).norm_sqr();
                if g < worst {
                    worst = g;
                    if worst <= best.value / power {
                        break;
                    }
                }
            }
            let value = worst * power;
            if value > best.value {
                best = OracleResult {
                    value,
                    theta,
                    phi: (T::PI() + T::PI()) * T::of_usize(j) / T::of_usize(resolution),
                };
            }
        }
    }
    Ok(best)
}
