use std::ops::Index;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::NumericsError;
use crate::Scalar;

/// Dense complex column vector with at least one entry, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex<T>>", into = "Vec<Complex<T>>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct CVector<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> CVector<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self, NumericsError> {
        if entries.is_empty() {
            return Err(NumericsError::Empty);
        }
        if let Some(index) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(NumericsError::NonFinite { index });
        }
        Ok(Self { entries })
    }

    /// Builds a vector from separate real and imaginary parts.
    pub fn from_parts(re: &[T], im: &[T]) -> Result<Self, NumericsError> {
        if re.len() != im.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: re.len(),
                found: im.len(),
            });
        }
        Self::new(
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex::new(r, i))
                .collect(),
        )
    }

    pub fn from_real(values: &[T]) -> Result<Self, NumericsError> {
        Self::new(values.iter().map(|&r| Complex::new(r, T::zero())).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Self {
            entries: vec![Complex::new(T::zero(), T::zero()); dim],
        }
    }

    /// Canonical basis vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex::new(T::one(), T::zero());
        v
    }

    /// Constructor for internal callers whose arithmetic cannot produce an empty vector.
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex<T>>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.entries.iter()
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.entries
    }

    pub fn re(&self) -> Vec<T> {
        self.entries.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<T> {
        self.entries.iter().map(|z| z.im).collect()
    }

    /// `a^H b`, conjugating the receiver.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>, NumericsError> {
        hermitian_inner(self, other)
    }

    pub fn squared_norm(&self) -> T {
        squared_norm(self)
    }

    pub fn norm(&self) -> T {
        self.squared_norm().sqrt()
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|&z| z * factor).collect())
    }

    pub fn scale_real(&self, factor: T) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|&z| z * factor).collect())
    }

    /// Unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero()).then(|| self.scale_real(T::one() / n))
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumericsError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericsError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: Complex<T>, x: &Self) -> Result<(), NumericsError> {
        check_dims(self.dim(), x.dim())?;
        for (y, &xi) in self.entries.iter_mut().zip(&x.entries) {
            *y += alpha * xi;
        }
        Ok(())
    }

    /// Converts the scalar type, e.g. `f64 -> f32`.
    pub fn cast<U: Scalar>(&self) -> CVector<U> {
        CVector::from_vec_unchecked(
            self.entries
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        )
    }
}

impl<T> Index<usize> for CVector<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.entries[i]
    }
}

impl<T: Scalar> TryFrom<Vec<Complex<T>>> for CVector<T> {
    type Error = NumericsError;

    fn try_from(entries: Vec<Complex<T>>) -> Result<Self, Self::Error> {
        Self::new(entries)
    }
}

impl<T> From<CVector<T>> for Vec<Complex<T>> {
    fn from(v: CVector<T>) -> Self {
        v.entries
    }
}

#[inline]
pub(crate) fn check_dims(expected: usize, found: usize) -> Result<(), NumericsError> {
    if expected == found {
        Ok(())
    } else {
        Err(NumericsError::DimensionMismatch { expected, found })
    }
}

/// `Σ_j conj(a_j) b_j` over raw slices; caller guarantees equal lengths.
#[inline]
pub(crate) fn inner_slices<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex::new(re, im)
}

/// Hermitian inner product `a^H b`.
pub fn hermitian_inner<T: Scalar>(
    a: &CVector<T>,
    b: &CVector<T>,
) -> Result<Complex<T>, NumericsError> {
    check_dims(a.dim(), b.dim())?;
    Ok(inner_slices(a.as_slice(), b.as_slice()))
}

/// `‖a‖²`, computed without forming the (zero) imaginary part.
pub fn squared_norm<T: Scalar>(a: &CVector<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}
