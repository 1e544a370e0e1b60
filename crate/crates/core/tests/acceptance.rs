//! One PASS/FAIL line per acceptance criterion. Tolerances live in
//! `qgeo::suites::tol`; the timed criteria also enforce their runtime ceiling.

use std::process::ExitCode;
use std::time::Instant;

use qgeo::report::{Bound, Check};
use qgeo::suites::{criterion, runtime_limit, SuiteOptions, CRITERIA};

const SEED: u64 = 7;

fn worst(checks: &[Check]) -> Option<&Check> {
    checks.iter().filter(|c| c.bound == Bound::Below).max_by(|a, b| {
        let ra = a.residual.map_or(f64::INFINITY, |r| r / a.tolerance);
        let rb = b.residual.map_or(f64::INFINITY, |r| r / b.tolerance);
        ra.total_cmp(&rb)
    })
}

fn main() -> ExitCode {
    let opts = SuiteOptions { seed: SEED, ..SuiteOptions::default() };
    let mut failed = 0;
    for (i, title) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let checks = match criterion(id, &opts) {
            Ok(c) => c,
            Err(e) => vec![Check::error("acceptance", *title, "setup", e)],
        };
        let secs = start.elapsed().as_secs_f64();
        let bad: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
        let slow = runtime_limit(id).is_some_and(|l| secs > l);
        let ok = bad.is_empty() && !slow && !checks.is_empty();
        let limit = runtime_limit(id).map(|l| format!(" (limit {l:.0}s)")).unwrap_or_default();
        let detail = match worst(&checks) {
            Some(w) => format!("worst {} = {:.2e} < {:.0e}", w.name, w.residual.unwrap_or(f64::NAN), w.tolerance),
            None => String::new(),
        };
        println!(
            "{} criterion {id}: {title}; {} checks; {detail}; {secs:.1}s{limit}",
            if ok { "PASS" } else { "FAIL" },
            checks.len(),
        );
        for c in &bad {
            let r = c.residual.map_or("n/a".to_string(), |r| format!("{r:e}"));
            println!(
                "    failed: {} residual {r} tolerance {:e} {}",
                c.name,
                c.tolerance,
                c.note.as_deref().unwrap_or("")
            );
        }
        if slow {
            println!("    runtime {secs:.1}s over the limit");
        }
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
