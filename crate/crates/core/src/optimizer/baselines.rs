//! Reference schemes: maximum ratio transmission on the outdated CSI and
//! eigen-beamforming on the neighborhood covariance.

use num_complex::Complex;

use super::codebook::check_channels;
use super::{Codebook, OptimizerError};
use crate::neighborhood::closeness;
use crate::numerics::{
    dominant_eigenvectors, hermitian_eigen, inner_slices, CVector, HermitianMatrix, NumericsError,
};
use crate::Scalar;

fn check_power<T: Scalar>(power: T) -> Result<(), OptimizerError> {
    if power.is_finite() && power > T::zero() {
        Ok(())
    } else {
        Err(OptimizerError::InvalidConfig(format!(
            "power budget must be positive, got {power}"
        )))
    }
}

/// `√P · g / ‖g‖`.
pub fn mrt_beamformer<T: Scalar>(g: &CVector<T>, power: T) -> Result<CVector<T>, OptimizerError> {
    check_power(power)?;
    let norm = g.norm();
    if !(norm > T::zero()) {
        return Err(OptimizerError::ZeroNormChannel { index: 0 });
    }
    Ok(g.scale_real(power.sqrt() / norm))
}

/// `L` copies of the MRT beamformer: the codebook whose min-sum gain is
/// exactly [`mrt_baseline_gain`].
pub fn mrt_codebook<T: Scalar>(
    g: &CVector<T>,
    power: T,
    size: usize,
) -> Result<Codebook<T>, OptimizerError> {
    if size == 0 {
        return Err(OptimizerError::InvalidConfig(
            "codebook size must be at least 1".into(),
        ));
    }
    let f = mrt_beamformer(g, power)?;
    Codebook::new(vec![f; size], power)
}

/// `L · P · min_i closeness(g, h_i)`.
pub fn mrt_baseline_gain<T: Scalar>(
    g: &CVector<T>,
    power: T,
    size: usize,
    channels: &[CVector<T>],
) -> Result<T, OptimizerError> {
    check_power(power)?;
    if !(g.squared_norm() > T::zero()) {
        return Err(OptimizerError::ZeroNormChannel { index: 0 });
    }
    check_channels(channels, g.dim())?;
    let mut worst = T::infinity();
    for h in channels {
        let c = closeness(g, h).map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        worst = worst.min(c);
    }
    Ok(T::of_usize(size) * power * worst)
}

/// `√P` times the `L` dominant eigenvectors of `R = (1/K) Σ h_i h_i^H`.
///
/// When `K < M` the eigenvectors are obtained from the `K × K` Gram matrix
/// `(1/K) H^H H` (same nonzero spectrum, `u = H v / √(Kλ)`), which keeps the
/// cost independent of the array size; the full covariance is used whenever
/// the requested rank reaches the Gram matrix's numerical rank.
pub fn ebf_codebook<T: Scalar>(
    channels: &[CVector<T>],
    power: T,
    size: usize,
) -> Result<Codebook<T>, OptimizerError> {
    check_power(power)?;
    let Some(first) = channels.first() else {
        return Err(OptimizerError::EmptyNeighborhood);
    };
    let m = first.dim();
    check_channels(channels, m)?;
    if size == 0 || size > m {
        return Err(NumericsError::RankTooLarge {
            requested: size,
            dim: m,
        }
        .into());
    }
    let k = channels.len();
    let weight = T::one() / T::of_usize(k);
    let scale = power.sqrt();

    if k < m && size <= k {
        if let Some(vectors) = gram_eigenvectors(channels, weight, size)? {
            return Codebook::new(
                vectors.into_iter().map(|u| u.scale_real(scale)).collect(),
                power,
            );
        }
    }
    let r = HermitianMatrix::from_outer_products(channels, weight)?;
    let (_, vectors) = dominant_eigenvectors(&r, size)?;
    Codebook::new(
        vectors.into_iter().map(|u| u.scale_real(scale)).collect(),
        power,
    )
}

fn gram_eigenvectors<T: Scalar>(
    channels: &[CVector<T>],
    weight: T,
    size: usize,
) -> Result<Option<Vec<CVector<T>>>, OptimizerError> {
    let k = channels.len();
    let m = channels[0].dim();
    let mut entries = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        for j in 0..k {
            entries[i * k + j] =
                inner_slices(channels[i].as_slice(), channels[j].as_slice()) * weight;
        }
    }
    let gram = HermitianMatrix::from_matrix(crate::numerics::CMatrix::new(k, k, entries)?)?;
    let eig = hermitian_eigen(&gram)?;
    let top = eig.values[0];
    let floor = T::lit(1e3) * T::epsilon() * top.max(T::min_positive_value());
    if !(eig.values[size - 1] > floor) {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(size);
    for (lambda, v) in eig.values.iter().zip(&eig.vectors).take(size) {
        let mut u = vec![Complex::new(T::zero(), T::zero()); m];
        for (h, &c) in channels.iter().zip(v.iter()) {
            for (ui, &hi) in u.iter_mut().zip(h.iter()) {
                *ui += hi * c;
            }
        }
        let u = CVector::new(u)?;
        let norm = u.norm();
        debug_assert!((norm * norm - *lambda / weight).abs() <= T::lit(1e-6) * (*lambda / weight));
        out.push(u.scale_real(T::one() / norm));
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::min_sum_gain;

    fn v(entries: &[(f64, f64)]) -> CVector<f64> {
        CVector::new(entries.iter().map(|&(r, i)| Complex::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn mrt_examples() {
        let f = mrt_beamformer(&v(&[(1.0, 0.0), (0.0, 0.0)]), 1.0).unwrap();
        assert_eq!(f, v(&[(1.0, 0.0), (0.0, 0.0)]));
        let f = mrt_beamformer(&v(&[(1.0, 0.0), (0.0, 1.0)]), 4.0).unwrap();
        let s2 = 2f64.sqrt();
        assert!((f[0] - Complex::new(s2, 0.0)).norm() < 1e-15);
        assert!((f[1] - Complex::new(0.0, s2)).norm() < 1e-15);
        assert!((f.squared_norm() - 4.0).abs() < 1e-14);
        assert!(mrt_beamformer(&CVector::<f64>::zeros(2), 1.0).is_err());
    }

    #[test]
    fn mrt_baseline_examples() {
        let g = v(&[(1.0, 0.0), (0.0, 0.0)]);
        assert!(
            (mrt_baseline_gain(&g, 1.0, 3, std::slice::from_ref(&g)).unwrap() - 3.0).abs() < 1e-15
        );
        assert_eq!(
            mrt_baseline_gain(&g, 1.0, 1, &[g.clone(), v(&[(0.0, 0.0), (1.0, 1.0)])]).unwrap(),
            0.0
        );
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let gain = mrt_baseline_gain(&g, 1.0, 2, &[v(&[(r, 0.0), (r, 0.0)])]).unwrap();
        assert!((gain - 1.0).abs() < 1e-14);
        // the L-copy codebook realizes the same value
        let h = [v(&[(r, 0.0), (r, 0.0)]), v(&[(0.3, 0.1), (-0.2, 0.9)])];
        let cb = mrt_codebook(&g, 1.0, 2).unwrap();
        let direct = mrt_baseline_gain(&g, 1.0, 2, &h).unwrap();
        assert!((min_sum_gain(&cb, &h).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn ebf_single_channel_is_mrt() {
        let h = v(&[(0.3, -1.0), (2.0, 0.5), (0.0, 0.7)]);
        let cb = ebf_codebook(std::slice::from_ref(&h), 2.0, 1).unwrap();
        let f = &cb.vectors()[0];
        assert!((f.squared_norm() - 2.0).abs() < 1e-12);
        assert!((closeness(f, &h).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ebf_picks_dominant_axis() {
        let e1 = v(&[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = v(&[(0.0, 0.0), (1.0, 0.0)]);
        let cb = ebf_codebook(&[e1.clone(), e1.clone(), e2], 1.0, 1).unwrap();
        assert!((closeness(&cb.vectors()[0], &e1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ebf_vectors_orthogonal_and_full_power() {
        let chans = vec![
            v(&[(1.0, 0.2), (0.5, 0.0), (0.0, -0.3), (0.1, 0.1)]),
            v(&[(0.2, 0.9), (-0.4, 0.3), (1.0, 0.0), (0.0, 0.5)]),
            v(&[(0.0, 0.0), (1.0, 1.0), (0.2, 0.2), (-0.7, 0.1)]),
        ];
        for size in [2, 3] {
            // K = 3 < M = 4 exercises the Gram path
            let cb = ebf_codebook(&chans, 2.0, size).unwrap();
            for f in cb.vectors() {
                assert!((f.squared_norm() - 2.0).abs() < 1e-10);
            }
            let ip = cb.vectors()[0].inner(&cb.vectors()[1]).unwrap();
            assert!(ip.norm() < 1e-8 * 2.0);
        }
        // Gram and covariance paths agree on the dominant direction
        let gram = ebf_codebook(&chans, 1.0, 1).unwrap();
        let r = HermitianMatrix::from_outer_products(&chans, 1.0 / 3.0).unwrap();
        let (_, full) = dominant_eigenvectors(&r, 1).unwrap();
        assert!((closeness(&gram.vectors()[0], &full[0]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ebf_rank_beyond_gram_rank_falls_back() {
        let h = v(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let cb = ebf_codebook(&[h.clone(), h], 1.0, 2).unwrap();
        assert_eq!(cb.len(), 2);
        assert!(ebf_codebook(&[v(&[(1.0, 0.0)])], 1.0, 2).is_err());
    }
}
