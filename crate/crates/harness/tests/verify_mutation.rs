use robustbf::optimizer::{taylor_minorant, OptimizerError};
use robustbf::CVector64;
use robustbf_harness::verify::{check_minorant, run_verify_with, VerifyOptions};

/// `2 Re(f^H h h^H w) + |h^H w|²`: the constant term's sign flipped.
fn flipped_constant(h: &CVector64, f: &CVector64, w: &CVector64) -> Result<f64, OptimizerError> {
    let hw = h.inner(w)?.norm_sqr();
    Ok(taylor_minorant(h, f, w)? + 2.0 * hw)
}

/// `-2 Re(f^H h h^H w) - |h^H w|²`: the cross term's sign flipped.
fn flipped_cross_term(h: &CVector64, f: &CVector64, w: &CVector64) -> Result<f64, OptimizerError> {
    let hw = h.inner(w)?.norm_sqr();
    Ok(-(taylor_minorant(h, f, w)? + hw) - hw)
}

fn quick() -> VerifyOptions {
    VerifyOptions {
        minorant_samples: 500,
        ascent_instances: 4,
        exact_csi_instances: 3,
        oracle_instances: 2,
        monotonicity_pairs: 2,
        oracle_resolution: 64,
        ..VerifyOptions::default()
    }
}

#[test]
fn library_minorant_passes() {
    let c = check_minorant(&quick(), taylor_minorant::<f64>);
    assert!(c.passed, "{c:?}");
    assert_eq!(c.instances, 500);
}

#[test]
fn sign_errors_are_caught() {
    for broken in [
        flipped_constant as robustbf_harness::verify::MinorantFn,
        flipped_cross_term,
    ] {
        let report = run_verify_with(&quick(), broken);
        assert!(!report.passed);
        let minorant = report.check("minorant").unwrap();
        assert!(!minorant.passed && minorant.failure.is_some());
        assert_eq!(
            report.failed(),
            1,
            "only the minorant check depends on the injected function"
        );
    }
}
