use warpcheck::scenario::{dump_samples, evaluate, run_scenario, RunConfig, ScenarioError};

fn ov(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn run(samples: usize) -> RunConfig {
    RunConfig { samples, ..RunConfig::default() }
}

#[test]
fn spheres_product_example() {
    let rep = run_scenario("spheres-product", &ov(&[("n", 8.0), ("m", 5.0), ("rho", 4.0)]), &run(16), None).unwrap();
    assert!(rep.overall_passed);
    let rho = rep.check("einstein").unwrap().estimated_constant.unwrap();
    assert!((rho - 4.0).abs() < 1e-3);
    // mixed planes flat, intra-sphere planes 1/r²
    assert!(rep.check("sectional-factors").unwrap().passed);
}

#[test]
fn gs_example() {
    let rep = run_scenario("gs-metric", &ov(&[("n", 5.0), ("c", -1.0)]), &run(16), None).unwrap();
    assert!(rep.overall_passed);
    assert!(rep.check("einstein").unwrap().estimated_constant.unwrap().abs() < 1e-3);
    assert!(rep.check("first-integral").unwrap().max_residual < 1e-8);
}

#[test]
fn gs_higher_dimension() {
    let rep = run_scenario("gs-metric", &ov(&[("n", 6.0), ("c", -8.0)]), &run(8), None).unwrap();
    assert!(rep.overall_passed, "{:?}", rep.checks);
    assert!(rep.check("closed-form").is_none());
}

#[test]
fn prop2_positive_example() {
    let rep = run_scenario("prop2-positive", &ov(&[("n", 8.0), ("rho", 7.0), ("a", 1.0), ("b", 0.0)]), &run(8), None)
        .unwrap();
    assert!(rep.overall_passed);
    for id in ["reduced-1", "reduced-2", "eq3", "eq4"] {
        assert!(rep.check(id).unwrap().max_residual <= 1e-10, "{id}");
    }
}

#[test]
fn prop2_other_parameters() {
    // a² + b² = (n−1)/ρ = 1 with both coefficients positive
    let s = 0.5f64.sqrt();
    let rep = evaluate("prop2-positive", &ov(&[("a", s), ("b", s)]), &run(8)).unwrap().report;
    assert!(rep.overall_passed, "{:?}", rep.checks);
    // ε = −1 needs a² − b² = ε(n−1)/ρ = 1
    let rep = evaluate("prop2-negative", &ov(&[("eps", -1.0), ("a", 2f64.sqrt()), ("b", 1.0)]), &run(8))
        .unwrap()
        .report;
    assert!(rep.overall_passed, "{:?}", rep.checks);
    // ε = 0: a = ±b
    let rep = evaluate("prop2-negative", &ov(&[("eps", 0.0), ("a", 1.0), ("b", 1.0)]), &run(8)).unwrap().report;
    assert!(rep.overall_passed, "{:?}", rep.checks);
}

#[test]
fn negative_sinh_needs_positive_eps() {
    let e = evaluate("prop2-negative", &ov(&[("eps", -1.0), ("a", 0.0), ("b", 1.0)]), &run(4)).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn flat_cone_reports_sqrt_c() {
    for c in [0.25, 4.0] {
        let rep = evaluate("flat-cone", &ov(&[("c", c)]), &run(8)).unwrap().report;
        assert!(rep.overall_passed);
        let v = rep.check("constancy").unwrap().estimated_constant.unwrap();
        assert!((v - c.sqrt()).abs() < 1e-10, "{v}");
    }
}

#[test]
fn warped_representation_dimensions() {
    for (d, v) in [(2.0, 1.0), (3.0, 2.0), (4.0, 2.0), (4.0, 1.0)] {
        let rep = evaluate("warped-representation", &ov(&[("d", d), ("v", v)]), &run(8)).unwrap().report;
        assert!(rep.overall_passed, "d={d} v={v}: {:?}", rep.checks);
    }
    assert!(evaluate("warped-representation", &ov(&[("d", 3.0), ("v", 3.0)]), &run(4)).is_err());
}

#[test]
fn thm2_in_other_dimensions() {
    let rep = evaluate("thm2-identities", &ov(&[("n", 9.0), ("m", 6.0), ("rho", 2.0)]), &run(8)).unwrap().report;
    assert!(rep.overall_passed, "{:?}", rep.checks);
    let a = rep.check("a-estimate").unwrap().estimated_constant.unwrap();
    // a = √((n−1)/ρ)
    assert!((a - 2.0).abs() < 1e-3, "{a}");
}

#[test]
fn dump_has_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let t = dump_samples("thm2-identities", &[], &run(10), &path).unwrap();
    assert_eq!(t.rows.len(), 10);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().next().unwrap().contains("trace-identity"));
}

#[test]
fn reports_are_deterministic_in_process() {
    let a = evaluate("flat-cone", &[], &run(12)).unwrap().report.to_json().unwrap();
    let b = evaluate("flat-cone", &[], &run(12)).unwrap().report.to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_scenario() {
    assert!(matches!(evaluate("nope", &[], &run(4)), Err(ScenarioError::UnknownScenario(_))));
}
