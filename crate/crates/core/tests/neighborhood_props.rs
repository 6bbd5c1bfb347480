mod common;

use common::nonzero_cvector;
use num_complex::Complex;
use proptest::prelude::*;
use robustbf::channel::CsiDatabase;
use robustbf::neighborhood::{
    build_neighborhood, closeness, expand_local, match_initial, NeighborhoodParams,
};

fn database(n: usize, m: usize) -> impl Strategy<Value = CsiDatabase<f64>> {
    prop::collection::vec(nonzero_cvector(m), n)
        .prop_map(|v| CsiDatabase::from_channels(v).unwrap())
}

fn phase() -> impl Strategy<Value = Complex<f64>> {
    (0.1f64..5.0, 0.0f64..6.3).prop_map(|(r, t)| Complex::from_polar(r, t))
}

proptest! {
    #[test]
    fn closeness_is_scale_invariant_and_symmetric(
        (g, h) in (1usize..=12).prop_flat_map(|m| (nonzero_cvector(m), nonzero_cvector(m))),
        a in phase(), b in phase(),
    ) {
        let c = closeness(&g, &h).unwrap();
        prop_assert!((closeness(&g.scale(a), &h.scale(b)).unwrap() - c).abs() <= 1e-12);
        prop_assert!((closeness(&h, &g).unwrap() - c).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn thresholding_is_monotone(db in database(40, 3), q in nonzero_cvector(3), g1 in 0.0f64..1.0, g2 in 0.0f64..1.0) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let loose = match_initial(&db, &q, &NeighborhoodParams::threshold(lo, 0));
        let tight = match_initial(&db, &q, &NeighborhoodParams::threshold(hi, 0));
        if let Ok(tight) = tight {
            let loose = loose.unwrap();
            prop_assert!(tight.iter().all(|i| loose.contains(i)));
        }
    }

    #[test]
    fn list_size_bound(db in database(60, 2), q in nonzero_cvector(2), t in 1usize..=6, k in 0usize..=4) {
        let list = build_neighborhood(&db, &q, &NeighborhoodParams::top_t(t, k)).unwrap();
        prop_assert!(list.len() <= (2 * k + 1) * list.initial.len());
        // members sorted, unique, in range
        prop_assert!(list.members.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(list.members.iter().all(|&i| i < db.len()));
    }

    #[test]
    fn size_equality_iff_disjoint_interior_windows(
        initial in prop::collection::btree_set(0usize..80, 1..=5),
        k in 0usize..=5,
    ) {
        let db = CsiDatabase::from_channels(
            (0..80).map(|i| robustbf::numerics::CVector::new(vec![Complex::new(1.0, i as f64)]).unwrap()).collect(),
        ).unwrap();
        let initial: Vec<usize> = initial.into_iter().collect();
        let list = expand_local(&db, &initial, k).unwrap();
        let interior = initial.iter().all(|&i| i >= k && i + k < db.len());
        let disjoint = initial.windows(2).all(|w| w[1] - w[0] > 2 * k);
        let full = list.len() == (2 * k + 1) * initial.len();
        prop_assert_eq!(full, interior && disjoint);
    }
}
