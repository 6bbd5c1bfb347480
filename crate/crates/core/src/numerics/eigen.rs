//! Hermitian eigensolver.
//!
//! Cyclic complex Jacobi rotations on the full matrix. Each rotation first
//! removes the phase of the pivot entry, then applies a real Givens rotation,
//! so the iterate stays exactly Hermitian and the accumulated basis stays
//! unitary to rounding.

use num_complex::Complex;

use super::matrix::CMatrix;
use super::{CVector, HermitianMatrix, NumericsError};
use crate::Scalar;

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Full spectral decomposition, eigenvalues sorted non-increasing.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Vec<CVector<T>>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// `Σ_ℓ λ_ℓ u_ℓ u_ℓ^H`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.vectors[0].dim();
        CMatrix::from_fn(n, n, |i, j| {
            self.values
                .iter()
                .zip(&self.vectors)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&l, u)| {
                    acc + u[i] * u[j].conj() * l
                })
        })
    }
}

/// Residual `‖A u − λ u‖`.
pub fn eigen_residual<T: Scalar>(
    a: &HermitianMatrix<T>,
    value: T,
    vector: &CVector<T>,
) -> Result<T, NumericsError> {
    let au = a.mul_vec(vector)?;
    Ok(au
        .iter()
        .zip(vector.iter())
        .map(|(x, u)| (x - u * value).norm_sqr())
        .sum::<T>()
        .sqrt())
}

/// Relative residual bound every returned eigenpair must satisfy.
pub fn residual_tolerance<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(256.0))
}

pub fn hermitian_eigen<T: Scalar>(
    a: &HermitianMatrix<T>,
) -> Result<EigenDecomposition<T>, NumericsError> {
    let n = a.dim();
    let mut m: Vec<Complex<T>> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j))
        .collect();
    let mut v = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        v[i * n + i] = Complex::new(T::one(), T::zero());
    }

    let frob = a.frobenius_norm();
    let stop = T::epsilon() * frob;
    let off_norm = |m: &[Complex<T>]| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = frob == T::zero() || off_norm(&m) <= stop;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / r;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (r + r);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (theta * theta + T::one()).sqrt())
                } else {
                    -T::one() / (-theta + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let pc = phase.conj();

                // columns: A <- A U, with U = [[c, s], [-s conj(e), c conj(e)]]
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * c - akq * pc * s;
                    m[k * n + q] = akp * s + akq * pc * c;
                }
                // rows: A <- U^H A
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = apk * c - aqk * phase * s;
                    m[q * n + k] = apk * s + aqk * phase * c;
                }
                m[p * n + q] = Complex::new(T::zero(), T::zero());
                m[q * n + p] = Complex::new(T::zero(), T::zero());
                m[p * n + p].im = T::zero();
                m[q * n + q].im = T::zero();

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * pc * s;
                    v[k * n + q] = vkp * s + vkq * pc * c;
                }
            }
        }
        converged = off_norm(&m) <= stop;
    }

    if !converged {
        return Err(NumericsError::NoConvergence {
            iterations: sweeps,
            residual: (off_norm(&m) / frob).as_f64(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j * n + j]
            .re
            .partial_cmp(&m[i * n + i].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let vectors = order
        .iter()
        .map(|&j| CVector::from_vec_unchecked((0..n).map(|i| v[i * n + j]).collect()))
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

/// The `count` eigenvectors of largest eigenvalue, unit norm, mutually
/// orthogonal, ordered by non-increasing eigenvalue.
pub fn dominant_eigenvectors<T: Scalar>(
    a: &HermitianMatrix<T>,
    count: usize,
) -> Result<(Vec<T>, Vec<CVector<T>>), NumericsError> {
    if count == 0 || count > a.dim() {
        return Err(NumericsError::RankTooLarge {
            requested: count,
            dim: a.dim(),
        });
    }
    let eig = hermitian_eigen(a)?;
    let bound = residual_tolerance::<T>() * a.frobenius_norm();
    let mut worst = T::zero();
    for (value, vector) in eig.values.iter().zip(&eig.vectors).take(count) {
        worst = worst.max(eigen_residual(a, *value, vector)?);
    }
    if worst > bound {
        return Err(NumericsError::NoConvergence {
            iterations: MAX_SWEEPS,
            residual: worst.as_f64(),
        });
    }
    let values = eig.values[..count].to_vec();
    let vectors = eig.vectors.into_iter().take(count).collect();
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hermitian_inner;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Distance between orthogonal projectors onto span(us) and span(vs).
    fn projector_distance(us: &[CVector<f64>], vs: &[CVector<f64>]) -> f64 {
        let n = us[0].dim();
        let proj = |ws: &[CVector<f64>]| {
            CMatrix::from_fn(n, n, |i, j| {
                ws.iter().fold(c(0.0, 0.0), |a, w| a + w[i] * w[j].conj())
            })
        };
        proj(us).sub(&proj(vs)).unwrap().frobenius_norm()
    }

    #[test]
    fn identity_any_unit_vector() {
        let a = HermitianMatrix::<f64>::identity(2);
        let (vals, vecs) = dominant_eigenvectors(&a, 1).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!((vecs[0].norm() - 1.0).abs() < 1e-15);
        assert!(eigen_residual(&a, vals[0], &vecs[0]).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_picks_largest() {
        let a = HermitianMatrix::from_matrix(CMatrix::<f64>::diagonal(&[4.0, 1.0])).unwrap();
        let (vals, vecs) = dominant_eigenvectors(&a, 1).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-14);
        assert!((vecs[0][0].norm() - 1.0).abs() < 1e-14);
        assert!(vecs[0][1].norm() < 1e-14);
    }

    #[test]
    fn rank_one_generator_recovered() {
        let h = CVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let a = HermitianMatrix::from_outer_products(std::slice::from_ref(&h), 1.0).unwrap();
        let (vals, vecs) = dominant_eigenvectors(&a, 1).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14);
        let unit = h.normalized().unwrap();
        assert!(projector_distance(&vecs, &[unit]) < 1e-12);
    }

    #[test]
    fn degenerate_eigenspace_compared_by_projector() {
        // diag(3, 3, 1) rotated by a fixed unitary: top-2 subspace is unique.
        let u = [
            CVector::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)])
                .unwrap()
                .normalized()
                .unwrap(),
            CVector::new(vec![c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)])
                .unwrap()
                .normalized()
                .unwrap(),
            CVector::basis(3, 2),
        ];
        let mut vecs = Vec::new();
        for (w, u) in [3.0f64, 3.0, 1.0].iter().zip(&u) {
            vecs.push(u.scale_real(w.sqrt()));
        }
        let a = HermitianMatrix::from_outer_products(&vecs, 1.0).unwrap();
        let (_, top) = dominant_eigenvectors(&a, 2).unwrap();
        assert!(projector_distance(&top, &u[..2]) < 1e-10);
        assert!(hermitian_inner(&top[0], &top[1]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn rejects_too_many() {
        let a = HermitianMatrix::<f64>::identity(2);
        assert!(matches!(
            dominant_eigenvectors(&a, 3),
            Err(NumericsError::RankTooLarge {
                requested: 3,
                dim: 2
            })
        ));
        assert!(dominant_eigenvectors(&a, 0).is_err());
    }
}
