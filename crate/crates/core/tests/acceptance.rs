//! Prints one PASS/FAIL line per acceptance criterion and fails the run if
//! any criterion fails. Set VIRTLOC_SEED to change the random streams.

use std::process::ExitCode;

fn main() -> ExitCode {
    let seed = std::env::var("VIRTLOC_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("acceptance suite, seed {seed}");
    let verdicts = virtloc::acceptance::run_all(seed);
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
