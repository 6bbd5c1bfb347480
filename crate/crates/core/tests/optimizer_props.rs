mod common;

use common::{channel_set, cvector, nonzero_cvector};
use num_complex::Complex;
use proptest::prelude::*;
use robustbf::numerics::{hermitian_inner, CVector};
use robustbf::optimizer::{
    brute_force_oracle, ebf_codebook, min_sum_gain, mrt_baseline_gain, sca_design,
    sca_design_with_reference, solve_subproblem, taylor_minorant, Codebook, InitStrategy,
    SolverConfig,
};

fn full_power(v: &CVector<f64>, p: f64) -> CVector<f64> {
    v.scale_real(p.sqrt() / v.norm())
}

fn fast_config() -> SolverConfig {
    SolverConfig {
        max_outer: 50,
        ..SolverConfig::default()
    }
}

proptest! {
    #[test]
    fn minorant_is_sound_and_tangent((h, f, w) in (1usize..=16).prop_flat_map(|m| (cvector(m), cvector(m), cvector(m)))) {
        let gain = hermitian_inner(&h, &f).unwrap().norm_sqr();
        prop_assert!(taylor_minorant(&h, &f, &w).unwrap() <= gain + 1e-10);
        let at_w = hermitian_inner(&h, &w).unwrap().norm_sqr();
        prop_assert!((taylor_minorant(&h, &w, &w).unwrap() - at_w).abs() <= 1e-12);
    }

    #[test]
    fn min_sum_gain_is_phase_invariant(
        (chans, f) in (1usize..=8).prop_flat_map(|m| (channel_set(m, 1..=6), nonzero_cvector(m))),
        alpha in 0.0f64..6.3, which in 0usize..6,
    ) {
        let cb = Codebook::new(vec![full_power(&f, 1.0)], 1.0).unwrap();
        let before = min_sum_gain(&cb, &chans).unwrap();
        let mut rotated = chans.clone();
        let i = which % rotated.len();
        rotated[i] = rotated[i].scale(Complex::from_polar(1.0, alpha));
        prop_assert!((min_sum_gain(&cb, &rotated).unwrap() - before).abs() <= 1e-12);
    }

    #[test]
    fn subproblem_ascends_from_feasible_start(
        (chans, w) in (2usize..=6).prop_flat_map(|m| (channel_set(m, 1..=8), prop::collection::vec(nonzero_cvector(m), 1..=2))),
        p in 0.5f64..3.0,
    ) {
        let w: Vec<_> = w.iter().map(|v| full_power(v, p)).collect();
        let sol = solve_subproblem(&chans, &w, p, 1e-8).unwrap();
        prop_assert!(sol.t >= sol.t_start - 1e-8);
        prop_assert!(sol.t <= p * w.len() as f64 + 1e-9);
        for f in &sol.vectors {
            prop_assert!(f.squared_norm() <= p + 1e-9);
        }
        // the minorant bounds the true objective of the new point
        let cb = Codebook::new(sol.vectors.clone(), p).unwrap();
        prop_assert!(min_sum_gain(&cb, &chans).unwrap() >= sol.t - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn design_is_feasible_ascending_and_dominates_baselines(
        (chans, g) in (2usize..=8).prop_flat_map(|m| (channel_set(m, 1..=12), nonzero_cvector(m))),
        l in 1usize..=3,
    ) {
        let l = l.min(g.dim());
        let (cb, report) = sca_design_with_reference(&chans, Some(&g), 1.0, l, &fast_config()).unwrap();
        for f in cb.vectors() {
            prop_assert!(f.squared_norm() <= 1.0 + 1e-9);
        }
        for w in report.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8);
        }
        for w in report.gain_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8);
        }
        let mms = min_sum_gain(&cb, &chans).unwrap();
        let mrt = mrt_baseline_gain(&g, 1.0, l, &chans).unwrap();
        let ebf = min_sum_gain(&ebf_codebook(&chans, 1.0, l).unwrap(), &chans).unwrap();
        prop_assert!(mms >= mrt.max(ebf) - 1e-8);
    }

    #[test]
    fn oracle_never_increases_when_the_set_grows(
        (base, extra) in (channel_set(2, 1..=4), channel_set(2, 1..=3)),
    ) {
        let small = brute_force_oracle(&base, 1.0, 1, 128).unwrap();
        let mut grown = base.clone();
        grown.extend(extra);
        let large = brute_force_oracle(&grown, 1.0, 1, 128).unwrap();
        prop_assert!(large <= small + 1e-9);
    }
}

#[test]
fn random_start_with_given_codebook_round_trips() {
    let chans: Vec<_> = (0..3)
        .map(|i| {
            CVector::new(vec![
                Complex::new(1.0, 0.1 * i as f64),
                Complex::new(0.2, -0.3),
            ])
            .unwrap()
        })
        .collect();
    let (first, _) = sca_design(
        &chans,
        1.0,
        1,
        &SolverConfig {
            init: InitStrategy::Random { seed: 4 },
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let export = robustbf::optimizer::CodebookExport::new(&first, None, None);
    let cfg = SolverConfig {
        init: InitStrategy::Given { codebook: export },
        ..SolverConfig::default()
    };
    let (again, report) = sca_design(&chans, 1.0, 1, &cfg).unwrap();
    assert_eq!(report.init, "given");
    assert!(min_sum_gain(&again, &chans).unwrap() >= min_sum_gain(&first, &chans).unwrap() - 1e-8);
}

#[test]
fn single_precision_design() {
    let h = CVector::new(vec![
        Complex::new(1.0f32, 0.5),
        Complex::new(-0.25, 0.75),
        Complex::new(0.1, 0.0),
    ])
    .unwrap();
    let cfg = SolverConfig {
        eps_inner: 1e-4,
        eps_outer: 1e-4,
        ..SolverConfig::default()
    };
    let (cb, _) = sca_design(std::slice::from_ref(&h), 1.0f32, 1, &cfg).unwrap();
    assert!((min_sum_gain(&cb, &[h]).unwrap() - 1.0).abs() < 1e-4);
}
