//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use ckns::verify::{
    caloric_test_function, classifier_soundness, dyadic_sweep_check, entropy_maxima,
    pressure_oracles, scaling_invariance, smooth_run_checks, vitali_check,
};

fn main() -> ExitCode {
    let started = Instant::now();
    let mut checks = vec![
        scaling_invariance(),
        caloric_test_function(),
        entropy_maxima(),
    ];
    let (conservation, energy, entry) = smooth_run_checks(64);
    checks.extend([conservation, energy]);
    checks.extend([
        pressure_oracles(),
        vitali_check(20),
        classifier_soundness(20),
        dyadic_sweep_check(),
    ]);

    for c in &checks {
        println!("{}", c.line());
    }
    if let Some(entry) = entry {
        // per-term breakdown at the final time
        if let Some(r) = entry.records.last() {
            println!(
                "energy inequality at t = {:.6}: lhs {:.6e}, rhs {:.6e}, margin {:.6e}",
                r.t, r.lhs, r.rhs, r.margin
            );
            for (name, v) in &r.terms {
                println!("  {name:>4} = {v:+.6e}");
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} criteria passed in {:.0} s",
        checks.len() - failed,
        checks.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
