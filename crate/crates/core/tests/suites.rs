use gevrey_nse::verifier::{run_suite, Suite};
use gevrey_nse::Calibration;

fn check(suite: Suite) {
    let r = run_suite(suite, 7, &Calibration::embedded()).unwrap();
    for s in &r.summary {
        eprintln!("{suite} {:<22} cases {:>5} failures {} max ratio {:.4}", s.name, s.cases, s.failures, s.max_ratio);
    }
    let failing: Vec<_> = r.failures().take(5).collect();
    assert!(failing.is_empty(), "{failing:#?}");
}

#[test]
fn semigroup_suite_has_no_violations() {
    check(Suite::Semigroup);
}

#[test]
fn appendix_suite_has_no_violations() {
    check(Suite::Appendix);
}

#[test]
fn lemma_suite_has_no_violations() {
    check(Suite::Lemmas);
}
