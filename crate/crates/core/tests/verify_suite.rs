use vstates::verify::{format_table, run_suite, SuiteConfig};

#[test]
fn default_suite_passes_and_is_deterministic() {
    let config = SuiteConfig::default();
    let reports = run_suite(&config);
    println!("{}", format_table(&reports));
    let names: Vec<_> = reports.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for r in &reports {
        assert_eq!(r.passed, r.max_error <= r.tolerance);
        assert!(r.passed, "{r:?}");
        assert!(r.cases > 0, "{r:?}");
    }
    let again = run_suite(&config);
    assert_eq!(
        serde_json::to_string(&reports).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}
