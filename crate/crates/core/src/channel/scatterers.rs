use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Poisson, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::geometry::Vec3;
use super::sources::{propagation_phase, ImageSource};
use super::ChannelError;
use crate::numerics::CVector;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid<T> {
    pub center: Vec3<T>,
    pub semi_axes: Vec3<T>,
}

impl<T: Scalar> Ellipsoid<T> {
    pub fn volume(&self) -> T {
        T::lit(4.0 / 3.0) * T::PI() * self.semi_axes.x * self.semi_axes.y * self.semi_axes.z
    }

    /// `Σ ((p_i − c_i)/a_i)²`; equals one on the surface.
    pub fn level(&self, p: &Vec3<T>) -> T {
        let q = |v: T, c: T, a: T| {
            let u = (v - c) / a;
            u * u
        };
        q(p.x, self.center.x, self.semi_axes.x)
            + q(p.y, self.center.y, self.semi_axes.y)
            + q(p.z, self.center.z, self.semi_axes.z)
    }
}

/// Log-normal RCS distribution parameterized by the mean and variance of the
/// variate itself (m² and m⁴).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsDistribution {
    pub mean: f64,
    pub variance: f64,
}

impl RcsDistribution {
    /// Underlying normal `(μ, σ)` of `ln σ_rcs`.
    pub fn log_params(&self) -> (f64, f64) {
        let v = (1.0 + self.variance / (self.mean * self.mean)).ln();
        (self.mean.ln() - v / 2.0, v.sqrt())
    }
}

/// Point scatterers: positions, radar cross sections (m²) and phases (rad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererField<T> {
    pub ellipsoid: Ellipsoid<T>,
    pub positions: Vec<Vec3<T>>,
    pub rcs: Vec<T>,
    pub phases: Vec<T>,
}

impl<T: Scalar> ScattererField<T> {
    pub fn empty(ellipsoid: Ellipsoid<T>) -> Self {
        Self {
            ellipsoid,
            positions: Vec::new(),
            rcs: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// The Poisson-drawn scatterer count `N_sc`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Diagonal entries of `Σ_sc`: `√σ_i · exp(jφ_i)`.
    pub fn reflection_coefficients(&self) -> Vec<Complex<T>> {
        self.rcs
            .iter()
            .zip(&self.phases)
            .map(|(&s, &phi)| Complex::from_polar(s.sqrt(), phi))
            .collect()
    }
}

/// Uniform point on the ellipsoid surface by area-weighted rejection from the
/// unit sphere.
fn sample_surface_point<R: Rng + ?Sized>(
    center: [f64; 3],
    axes: [f64; 3],
    rng: &mut R,
) -> [f64; 3] {
    let [a, b, c] = axes;
    let g_max = (b * c).max(a * c).max(a * b);
    loop {
        let n: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if r == 0.0 {
            continue;
        }
        let u = [n[0] / r, n[1] / r, n[2] / r];
        let g = ((b * c * u[0]).powi(2) + (a * c * u[1]).powi(2) + (a * b * u[2]).powi(2)).sqrt();
        if rng.gen::<f64>() * g_max <= g {
            return [
                center[0] + a * u[0],
                center[1] + b * u[1],
                center[2] + c * u[2],
            ];
        }
    }
}

/// Draws `N_sc ~ Poisson(density · volume)` scatterers uniformly on the
/// ellipsoid surface with log-normal RCS and uniform phases.
///
/// All draws happen in `f64` so the field is identical for every scalar type.
pub fn sample_scatterer_field<T: Scalar, R: Rng + ?Sized>(
    ellipsoid: Ellipsoid<T>,
    density: f64,
    rcs: RcsDistribution,
    rng: &mut R,
) -> Result<ScattererField<T>, ChannelError> {
    let axes = [
        ellipsoid.semi_axes.x.as_f64(),
        ellipsoid.semi_axes.y.as_f64(),
        ellipsoid.semi_axes.z.as_f64(),
    ];
    if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(ChannelError::Config(
            "ellipsoid semi-axes must be positive".into(),
        ));
    }
    if !(density.is_finite() && density > 0.0) {
        return Err(ChannelError::Config(
            "scatterer density must be positive".into(),
        ));
    }
    if !(rcs.mean > 0.0 && rcs.variance >= 0.0 && rcs.mean.is_finite() && rcs.variance.is_finite())
    {
        return Err(ChannelError::Config(
            "RCS mean must be positive and variance non-negative".into(),
        ));
    }
    let center = [
        ellipsoid.center.x.as_f64(),
        ellipsoid.center.y.as_f64(),
        ellipsoid.center.z.as_f64(),
    ];
    let expected = density * ellipsoid.volume().as_f64();
    let count = Poisson::new(expected)
        .map_err(|e| ChannelError::Config(format!("invalid Poisson mean {expected}: {e}")))?
        .sample(rng) as usize;

    let (mu, sigma) = rcs.log_params();
    let lognormal = LogNormal::new(mu, sigma).map_err(|e| ChannelError::Config(e.to_string()))?;
    let phase = Uniform::new(0.0, std::f64::consts::TAU);

    let mut field = ScattererField::empty(ellipsoid);
    for _ in 0..count {
        let p = sample_surface_point(center, axes, rng);
        field
            .positions
            .push(Vec3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2])));
        field.rcs.push(T::lit(lognormal.sample(rng)));
        field.phases.push(T::lit(phase.sample(rng)));
    }
    Ok(field)
}

/// Scatterer-to-UE factors `Σ_sc h_RX`, shared by every source.
pub(crate) fn weighted_receive_vector<T: Scalar>(
    field: &ScattererField<T>,
    ue: &Vec3<T>,
    wavelength: T,
) -> Result<Vec<Complex<T>>, ChannelError> {
    let four_pi = T::lit(4.0) * T::PI();
    field
        .positions
        .iter()
        .zip(field.reflection_coefficients())
        .enumerate()
        .map(|(i, (p, coeff))| {
            let d = p.distance(ue);
            if !(d > T::zero()) {
                return Err(ChannelError::ZeroDistance {
                    what: format!("scatterer {i} and UE"),
                });
            }
            Ok(coeff * propagation_phase(d, wavelength) * (wavelength / (four_pi * d)))
        })
        .collect()
}

/// `H_TX,s^T (Σ_sc h_RX)` given precomputed `Σ_sc h_RX`.
pub(crate) fn dmc_from_weights<T: Scalar>(
    source: &ImageSource<T>,
    field: &ScattererField<T>,
    weights: &[Complex<T>],
    wavelength: T,
) -> Result<CVector<T>, ChannelError> {
    let inv_sqrt_4pi = T::one() / (T::lit(4.0) * T::PI()).sqrt();
    let mut out = vec![Complex::new(T::zero(), T::zero()); source.antennas.len()];
    for (l, (p, w)) in field.positions.iter().zip(weights).enumerate() {
        for (m, antenna) in source.antennas.iter().enumerate() {
            let d = p.distance(antenna);
            if !(d > T::zero()) {
                return Err(ChannelError::ZeroDistance {
                    what: format!("scatterer {l} and antenna {m} of source {}", source.index),
                });
            }
            let tx = source.gain * propagation_phase(d, wavelength) * (inv_sqrt_4pi / d);
            out[m] += tx * w;
        }
    }
    Ok(CVector::new(out)?)
}

/// Diffuse component of one source: `H_TX,s^T Σ_sc h_RX`.
pub fn dmc_response<T: Scalar>(
    source: &ImageSource<T>,
    field: &ScattererField<T>,
    ue: &Vec3<T>,
    wavelength: T,
) -> Result<CVector<T>, ChannelError> {
    let weights = weighted_receive_vector(field, ue, wavelength)?;
    dmc_from_weights(source, field, &weights, wavelength)
}
