// Cross-check the evaluator against full enumeration on random knowledge
// bases, then show that a biased oracle is caught.
//
//     cargo run --example brute_force_check

use ppq::verify::{run_verify, KbKind, VerifyConfig};

pub fn main() {
    for kind in [KbKind::Joint, KbKind::Network] {
        let cfg = VerifyConfig { trials: 200, kind, max_domain: 3, ..VerifyConfig::default() };
        let report = run_verify(&cfg);
        println!(
            "{kind:?}: {} comparisons, max deviation {:.2e}, {}",
            report.comparisons,
            report.max_deviation,
            if report.passed() { "pass" } else { "FAIL" }
        );
    }

    let report = run_verify(&VerifyConfig { trials: 20, inject_fault: true, ..VerifyConfig::default() });
    let f = report.first_failure.expect("a biased oracle is detected");
    println!("biased oracle: {} of {} wrong, first {} (expected {:.6})", report.failures, report.comparisons, f.query, f.expected);
}
