use num_complex::Complex;

use super::vector::{check_dims, inner_slices};
use super::{CVector, NumericsError};
use crate::Scalar;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::Empty);
        }
        check_dims(rows * cols, entries.len())?;
        if let Some(index) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(NumericsError::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(values[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[CVector<T>]) -> Result<Self, NumericsError> {
        let first = columns.first().ok_or(NumericsError::Empty)?;
        let rows = first.dim();
        for c in columns {
            check_dims(rows, c.dim())?;
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: Complex<T>) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector<T> {
        CVector::from_vec_unchecked((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, x: &CVector<T>) -> Result<CVector<T>, NumericsError> {
        check_dims(self.cols, x.dim())?;
        Ok(CVector::from_vec_unchecked(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(x.iter())
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                            acc + a * b
                        })
                })
                .collect(),
        ))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, NumericsError> {
        check_dims(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.entries[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericsError> {
        check_dims(self.rows, other.rows)?;
        check_dims(self.cols, other.cols)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn scale_real(&self, factor: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    inner: CMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Absolute per-entry tolerance used when validating Hermitian symmetry.
    pub fn symmetry_tolerance(scale: T) -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(64.0) * scale)
    }

    /// Validates `matrix` as Hermitian, then stores its exact Hermitian part.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self, NumericsError> {
        if !matrix.is_square() {
            return Err(NumericsError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let n = matrix.rows();
        let scale = matrix
            .entries
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm()));
        let tol = Self::symmetry_tolerance(scale);
        let mut max_deviation = T::zero();
        for i in 0..n {
            for j in i..n {
                max_deviation =
                    max_deviation.max((matrix.get(i, j) - matrix.get(j, i).conj()).norm());
            }
        }
        if max_deviation > tol {
            return Err(NumericsError::NotHermitian {
                max_deviation: max_deviation.as_f64(),
            });
        }
        let half = T::lit(0.5);
        let sym = CMatrix::from_fn(n, n, |i, j| {
            (matrix.get(i, j) + matrix.get(j, i).conj()) * half
        });
        Ok(Self { inner: sym })
    }

    /// `Σ_i weight · v_i v_i^H`; positive semidefinite by construction.
    pub fn from_outer_products(vectors: &[CVector<T>], weight: T) -> Result<Self, NumericsError> {
        let n = vectors.first().ok_or(NumericsError::Empty)?.dim();
        for v in vectors {
            check_dims(n, v.dim())?;
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for v in vectors {
                    acc += v[i] * v[j].conj();
                }
                acc *= weight;
                if i == j {
                    acc.im = T::zero();
                    m.set(i, i, acc);
                } else {
                    m.set(i, j, acc);
                    m.set(j, i, acc.conj());
                }
            }
        }
        Ok(Self { inner: m })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: CMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_matrix(&self) -> &CMatrix<T> {
        &self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.inner.get(i, j)
    }

    pub fn mul_vec(&self, x: &CVector<T>) -> Result<CVector<T>, NumericsError> {
        self.inner.mul_vec(x)
    }

    /// Rayleigh quotient `x^H A x / x^H x` (real for Hermitian `A`).
    pub fn rayleigh_quotient(&self, x: &CVector<T>) -> Result<T, NumericsError> {
        let ax = self.mul_vec(x)?;
        Ok(inner_slices(x.as_slice(), ax.as_slice()).re / x.squared_norm())
    }

    pub fn frobenius_norm(&self) -> T {
        self.inner.frobenius_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            HermitianMatrix::from_matrix(m),
            Err(NumericsError::NotHermitian { .. })
        ));
        let rect = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            HermitianMatrix::from_matrix(rect),
            Err(NumericsError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn outer_product_is_hermitian_psd() {
        let h = CVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let a = HermitianMatrix::from_outer_products(std::slice::from_ref(&h), 1.0).unwrap();
        assert_eq!(a.get(0, 1), c(0.0, -1.0));
        assert_eq!(a.get(1, 0), c(0.0, 1.0));
        assert!((a.rayleigh_quotient(&h).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn matmul_matches_mul_vec() {
        let a = CMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 - 1.0));
        let x = CVector::new(vec![c(0.5, -1.0), c(2.0, 0.25)]).unwrap();
        let xm = CMatrix::from_columns(std::slice::from_ref(&x)).unwrap();
        let via_mat = a.matmul(&xm).unwrap().column(0);
        assert_eq!(via_mat, a.mul_vec(&x).unwrap());
    }
}
