#![allow(dead_code)]

use num_complex::Complex;
use proptest::prelude::*;
use robustbf::numerics::CVector;

pub fn complex() -> impl Strategy<Value = Complex<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

pub fn cvector(dim: usize) -> impl Strategy<Value = CVector<f64>> {
    prop::collection::vec(complex(), dim).prop_map(|v| CVector::new(v).unwrap())
}

/// A vector bounded away from zero so normalizations are well conditioned.
pub fn nonzero_cvector(dim: usize) -> impl Strategy<Value = CVector<f64>> {
    cvector(dim).prop_filter("norm too small", |v| v.norm() > 1e-3)
}

pub fn channel_set(
    dim: usize,
    count: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Vec<CVector<f64>>> {
    prop::collection::vec(nonzero_cvector(dim), count)
}
