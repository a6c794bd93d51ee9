//! One PASS/FAIL line per acceptance criterion, at the default size 32.
//!
//! Run with `cargo test --release -p chern-lab --test acceptance -- --nocapture`
//! to see the lines.

use std::time::Instant;

use chern_lab::report::Report;
use chern_lab::suites::{self, Suite, SuiteConfig, EXAMPLE_CONSTANT, EXAMPLE_CONSTANT_QUOTED};

struct Criterion {
    id: u32,
    title: &'static str,
    suite: Suite,
    max_seconds: Option<f64>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "abelian example on T³×S¹", suite: Suite::Example, max_seconds: Some(60.0) },
    Criterion { id: 2, title: "dη = ∫Ch − Ch(h_*)", suite: Suite::Deta, max_seconds: Some(300.0) },
    Criterion {
        id: 3,
        title: "CS of the stable homotopies vanishes",
        suite: Suite::CsVanishing,
        max_seconds: Some(60.0),
    },
    Criterion { id: 4, title: "Stokes for CS, both parities", suite: Suite::Stokes, max_seconds: None },
    Criterion { id: 5, title: "Chern-number integrality", suite: Suite::Integrality, max_seconds: None },
    Criterion { id: 6, title: "additivity of ⊕ and ⊞", suite: Suite::Sums, max_seconds: None },
    Criterion { id: 7, title: "based-loop identities", suite: Suite::BasedLoop, max_seconds: None },
    Criterion { id: 8, title: "Bott map in degree 0", suite: Suite::BottDegree0, max_seconds: None },
    Criterion { id: 9, title: "gluing CS(t g⁻¹dg) = Ch(g)", suite: Suite::Gluing, max_seconds: None },
    Criterion { id: 10, title: "reversal flips η and inverts h_*", suite: Suite::Reversal, max_seconds: None },
];

/// Largest residual/tolerance over the checks that carry a tolerance.
fn worst_ratio(r: &Report) -> f64 {
    r.checks.iter().filter(|c| c.tolerance > 0.0).map(|c| c.residual / c.tolerance).fold(0.0, f64::max)
}

fn line(pass: bool, id: &str, title: &str, detail: &str) {
    println!("{} criterion {id:>3}  {title:40}  {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::default();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = suites::run(c.suite, cfg);
        let secs = start.elapsed().as_secs_f64();
        let in_time = c.max_seconds.is_none_or(|m| secs <= m);
        let limit = c.max_seconds.map_or(String::new(), |m| format!(" (limit {m:.0}s)"));
        match outcome {
            Ok(report) => {
                let pass = report.pass && in_time;
                let detail = format!(
                    "{} checks, worst residual/tol {:.2e}, {secs:.1}s{limit}",
                    report.checks.len(),
                    worst_ratio(&report)
                );
                line(pass, &c.id.to_string(), c.title, &detail);
                for f in report.failures() {
                    println!("      failed {}: residual {:.3e} tol {:.1e}", f.name, f.residual, f.tolerance);
                }
                if !pass {
                    failed.push(c.id);
                }
            }
            Err(e) => {
                line(false, &c.id.to_string(), c.title, &format!("error: {e}"));
                failed.push(c.id);
            }
        }

        if c.id == 1 {
            // The quoted constant is off from the derived one by a factor of
            // two; reported, not asserted.
            let m = suites::measure_example(cfg.size).expect("example measurement");
            let dev = (m.constant.abs() / EXAMPLE_CONSTANT_QUOTED - 1.0).abs();
            line(
                dev <= 1e-3,
                "1q",
                "constant vs quoted 1/(4π²), informational",
                &format!(
                    "|c| = {:.6e}, 1/(8π²) = {:.6e}, deviation from quoted {dev:.2e}",
                    m.constant.abs(),
                    EXAMPLE_CONSTANT
                ),
            );
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
