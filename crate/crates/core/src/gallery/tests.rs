use super::*;

fn params(pairs: &[(&str, &str)]) -> CaseParams {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn verdicts(r: &CaseResult) -> Vec<Verdict> {
    r.checks.iter().map(|c| c.report.verdict).collect()
}

#[test]
fn catalog_is_sorted_and_unique() {
    let ids: Vec<_> = list_cases().iter().map(|c| c.id).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 10);
}

#[test]
fn theta_is_positive_but_not_two_positive() {
    let r = run_case("theta_transpose_tensor", &CaseParams::new(), 7).unwrap();
    assert!(r.passed);
    let w = r.checks[0].report.witness.as_ref().expect("witness");
    assert_eq!(w.len(), 2);
    assert!(r.checks[0].report.min_eig < -0.5);
    assert!(run_case("theta_positive", &params(&[("trials", "300")]), 7).unwrap().passed);
}

#[test]
fn hadamard_brackets_reproduce() {
    let r = run_case("hadamard_power_threshold", &params(&[("trials", "2000")]), 1).unwrap();
    assert!(r.passed, "{:#?}", r.checks);
    let real: Vec<_> = r.checks.iter().filter(|c| c.population == Population::Real).collect();
    assert_eq!(real.len(), 5);
    assert_eq!(real[0].report.verdict, Verdict::Violated);
    assert_eq!(real[3].report.verdict, Verdict::Violated);
}

#[test]
fn hadamard_expectation_table() {
    assert_eq!(hadamard_expectation(3, 1, 0.5), Some(Verdict::Violated));
    assert_eq!(hadamard_expectation(3, 1, 1.0), Some(Verdict::ExhaustedTrials));
    assert_eq!(hadamard_expectation(2, 2, 2.0), Some(Verdict::ExhaustedTrials));
    assert_eq!(hadamard_expectation(4, 1, 1.0), None);
    assert_eq!(hadamard_expectation(4, 1, 0.0), Some(Verdict::ExhaustedTrials));
}

#[test]
fn hadamard_parameters_must_come_together() {
    let err = run_case("hadamard_power_threshold", &params(&[("m", "3")]), 1).unwrap_err();
    assert!(matches!(err, GalleryError::BadParameter { .. }));
    let r = run_case("hadamard_power_threshold", &params(&[("m", "2"), ("n", "1"), ("alpha", "0"), ("trials", "200")]), 1)
        .unwrap();
    assert_eq!(r.checks.len(), 2);
    assert!(r.passed);
}

#[test]
fn c01_witness_violates() {
    let r = run_case("c01_hadamard_type1", &params(&[("p", "8")]), 0).unwrap();
    assert!(r.passed);
    assert_eq!(verdicts(&r), vec![Verdict::Violated]);
}

#[test]
fn projection_and_products() {
    assert!(run_case("projection_Lambda", &params(&[("k", "3"), ("trials", "100")]), 3).unwrap().passed);
    let pi = run_case("product_Pi_type1_cp", &params(&[("trials", "200")]), 3).unwrap();
    assert!(pi.passed, "{:#?}", pi.checks);
    assert_eq!(pi.checks.len(), 3);
    let t2 = run_case("product_Pi_type2", &params(&[("trials", "100")]), 3).unwrap();
    assert_eq!(verdicts(&t2), vec![Verdict::Violated]);
    assert!(run_case("product_Pi_commutative", &params(&[("trials", "200")]), 3).unwrap().passed);
}

#[test]
fn conjugate_power_and_norm() {
    assert!(run_case("conjugate_power", &params(&[("trials", "200")]), 5).unwrap().passed);
    let r = run_case("operator_norm_not_3_positive", &params(&[("trials", "200")]), 5).unwrap();
    assert_eq!(verdicts(&r)[1], Verdict::Violated);
    assert!(r.passed);
}

#[test]
fn parameter_errors() {
    assert!(matches!(run_case("nope", &CaseParams::new(), 0), Err(GalleryError::UnknownCase(_))));
    assert!(matches!(
        run_case("theta_positive", &params(&[("bogus", "1")]), 0),
        Err(GalleryError::UnknownParameter { .. })
    ));
    assert!(matches!(
        run_case("theta_positive", &params(&[("trials", "x")]), 0),
        Err(GalleryError::BadParameter { .. })
    ));
    assert!(matches!(
        run_case("projection_Lambda", &params(&[("k", "1")]), 0),
        Err(GalleryError::BadParameter { .. })
    ));
}

#[test]
fn expected_exhausted_accepts_certificate() {
    let r = run_case("theta_positive", &params(&[("trials", "10")]), 0).unwrap();
    let mut c = r.checks[0].clone();
    c.report.verdict = Verdict::CertifiedPositive;
    assert!(c.matches());
    c.report.verdict = Verdict::Violated;
    assert!(!c.matches());
    c.expected = None;
    assert!(c.matches());
}

#[test]
fn case_result_is_deterministic() {
    let p = params(&[("trials", "150")]);
    let a = serde_json::to_string(&run_case("product_Pi_type1_cp", &p, 11).unwrap()).unwrap();
    let b = serde_json::to_string(&run_case("product_Pi_type1_cp", &p, 11).unwrap()).unwrap();
    assert_eq!(a, b);
}
