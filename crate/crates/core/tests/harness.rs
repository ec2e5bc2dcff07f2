use robinlab::boundary_ops::BoundaryOperatorSpec;
use robinlab::eigen::{inertia_count, residual_norm, SolveOptions};
use robinlab::harness::{
    filonov_trial_check, safarov_weak_check, verify_counting, verify_interlacing, BoundaryCondition, Discretization, FilonovOptions,
    HarnessOptions, InequalityReport, Problem, Verdict,
};
use robinlab::{Error, PolygonalDomain};

fn square(spec: &str) -> Problem {
    Problem::new(PolygonalDomain::unit_square(), BoundaryOperatorSpec::parse(spec).unwrap())
}

#[test]
fn report_roundtrips_through_json() {
    let r = verify_interlacing(&square("mult:const:-1"), 3, &[2, 3], &HarnessOptions::default()).unwrap();
    let text = r.to_json().unwrap();
    let back = InequalityReport::from_json(&text).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["problem", "rows", "conditions", "counting", "environment"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["j", "lambda_theta", "lambda_theta_err", "lambda_dirichlet", "lambda_dirichlet_err", "margin", "verdict"] {
        assert!(v["rows"][0].get(key).is_some(), "missing row field {key}");
    }
    assert_eq!(v["rows"][0]["verdict"], "holds_strict");
}

#[test]
fn failed_precondition_blocks_certification() {
    let r = verify_interlacing(&square("mult:const:50"), 2, &[3, 4], &HarnessOptions::default()).unwrap();
    assert!(!r.conditions.preconditions_met);
    assert_ne!(r.worst(), Verdict::HoldsStrict);
    assert_ne!(r.exit_code(), 0);
}

#[test]
fn abstract_operator_is_refused() {
    let err = verify_interlacing(&square("abstract:dtn"), 2, &[3, 4], &HarnessOptions::default()).unwrap_err();
    assert!(matches!(err, Error::UnverifiablePairing(_)), "{err}");
}

#[test]
fn levels_must_be_nested() {
    let opts = HarnessOptions::default();
    assert!(verify_interlacing(&square("zero"), 2, &[4], &opts).is_err());
    assert!(verify_interlacing(&square("zero"), 2, &[3, 5], &opts).is_err());
}

#[test]
fn counting_rejects_truncated_cluster() {
    let pi2 = std::f64::consts::PI.powi(2);
    // the 5 pi^2 cluster is cut off after one member
    let err = verify_counting(&square("zero"), 2, &[3, 4], Some(&[2.0 * pi2, 5.0 * pi2]), &HarnessOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InsufficientWindow(_)), "{err}");
}

#[test]
fn safarov_certifies_for_negative_constant() {
    let r = safarov_weak_check(&square("mult:const:-1"), 1, &[[1.0, 0.0], [0.0, 3.0]], &[3, 4], &HarnessOptions::default()).unwrap();
    assert!(r.renormalized);
    assert!(r.weak_certified && r.strict_certified);
    for s in &r.samples {
        let n2 = s.eta[0].powi(2) + s.eta[1].powi(2);
        assert!((n2 - r.lambda_dirichlet).abs() < 1e-9 * r.lambda_dirichlet);
        assert!((s.value + 4.0).abs() < 1e-10);
    }
    assert_eq!(r.interlacing.verdict, Verdict::HoldsStrict);
}

#[test]
fn safarov_needs_directions_and_sign() {
    let opts = HarnessOptions::default();
    assert!(matches!(safarov_weak_check(&square("zero"), 1, &[], &[3, 4], &opts), Err(Error::InvalidArgument(_))));
    let r = safarov_weak_check(&square("mult:const:2"), 1, &[[1.0, 1.0]], &[3, 4], &opts).unwrap();
    assert!(!r.weak_certified && !r.strict_certified);
    // the same direction twice is not two directions
    let r = safarov_weak_check(&square("zero"), 1, &[[1.0, 1.0], [2.0, 2.0]], &[3, 4], &opts).unwrap();
    assert!(r.weak_certified && !r.strict_certified);
}

#[test]
fn filonov_bound_tightens_under_refinement() {
    let opts = FilonovOptions::default();
    let coarse = filonov_trial_check(&square("mult:const:-1"), 1, 3, &opts).unwrap();
    let fine = filonov_trial_check(&square("mult:const:-1"), 1, 4, &opts).unwrap();
    assert_eq!(coarse.dim_u, 1);
    assert_eq!(coarse.dim_w, coarse.dim_u + coarse.dim_kernel + 1);
    assert!(fine.ratio - 1.0 < coarse.ratio - 1.0);
    assert!(coarse.plane_wave_ok);
    assert_eq!(coarse.resamples, 0);
}

#[test]
fn filonov_gives_up_on_degenerate_trial_space() {
    // a threshold no Gram determinant of unit vectors can exceed
    let opts = FilonovOptions { gram_threshold: 2.0, max_resamples: 3, ..FilonovOptions::default() };
    let err = filonov_trial_check(&square("zero"), 1, 2, &opts).unwrap_err();
    assert!(matches!(err, Error::TrialSpaceDegenerate(_)), "{err}");
}

#[test]
fn nonlocal_eigenpairs_have_small_residuals() {
    let p = square("sum:(rank1:const:-2;kernel:cosine:-1:2)");
    let disc = Discretization::new(&p, 4).unwrap();
    let (k, m) = disc.pencil(BoundaryCondition::Robin).unwrap();
    let s = disc.solve(BoundaryCondition::Robin, 8, &SolveOptions::default()).unwrap();
    let vecs = s.eigenvectors.as_ref().unwrap();
    for (lam, x) in s.eigenvalues.iter().zip(vecs) {
        assert!(residual_norm(&k, &m, x, *lam).unwrap() < 1e-7 * lam.abs().max(1.0));
    }
    let top = s.largest().unwrap();
    assert_eq!(inertia_count(&k, &m, top + 1e-6).unwrap().count, 8);
}
