mod common;

use common::{cvector, nonzero_cvector};
use num_complex::Complex;
use proptest::prelude::*;
use robustbf::numerics::{
    hermitian_eigen, hermitian_inner, squared_norm, CMatrix, HermitianMatrix,
};

proptest! {
    #[test]
    fn inner_product_is_conjugate_symmetric((a, b) in (1usize..=16).prop_flat_map(|m| (cvector(m), cvector(m)))) {
        let ab = hermitian_inner(&a, &b).unwrap();
        let ba = hermitian_inner(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12);
    }

    #[test]
    fn cauchy_schwarz((a, b) in (1usize..=16).prop_flat_map(|m| (cvector(m), cvector(m)))) {
        let ip = hermitian_inner(&a, &b).unwrap().norm_sqr();
        prop_assert!(ip <= squared_norm(&a) * squared_norm(&b) + 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs_psd(vs in (1usize..=8).prop_flat_map(|m| prop::collection::vec(nonzero_cvector(m), 1..=8))) {
        let a = HermitianMatrix::from_outer_products(&vs, 1.0).unwrap();
        let eig = hermitian_eigen(&a).unwrap();
        let diff = eig.reconstruct().sub(a.as_matrix()).unwrap();
        prop_assert!(diff.frobenius_norm() <= 1e-6);
        for w in eig.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        prop_assert!(eig.values.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn eigenvectors_are_orthonormal(vs in (2usize..=8).prop_flat_map(|m| prop::collection::vec(nonzero_cvector(m), 1..=8))) {
        let a = HermitianMatrix::from_outer_products(&vs, 0.5).unwrap();
        let eig = hermitian_eigen(&a).unwrap();
        for (i, u) in eig.vectors.iter().enumerate() {
            for (j, v) in eig.vectors.iter().enumerate() {
                let ip = hermitian_inner(u, v).unwrap();
                let expected = if i == j { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
                prop_assert!((ip - expected).norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn non_hermitian_input_is_rejected() {
    let m = CMatrix::from_fn(2, 2, |i, j| Complex::new((i + 2 * j) as f64, 0.0));
    assert!(HermitianMatrix::from_matrix(m).is_err());
}

#[test]
fn single_precision_instantiation() {
    let v: Vec<_> = (0..4).map(|i| Complex::new(i as f32 + 1.0, -0.5)).collect();
    let h = robustbf::numerics::CVector::new(v).unwrap();
    let a = HermitianMatrix::from_outer_products(std::slice::from_ref(&h), 1.0f32).unwrap();
    let eig = hermitian_eigen(&a).unwrap();
    assert!((eig.values[0] - h.squared_norm()).abs() <= 1e-4 * h.squared_norm());
}
