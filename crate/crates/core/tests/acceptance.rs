//! Acceptance criteria AC-1..AC-8 at their stated tolerances, one line each.
//! Exits nonzero if any criterion fails or breaks down.

use std::process::ExitCode;
use std::time::Instant;

use bergman_lab::config::RunConfig;
use bergman_lab::verify::{self, Criterion};

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let started = Instant::now();
    let mut ok = true;
    let mut report = |id: &str, outcome: bergman_lab::Result<Criterion>| match outcome {
        Ok(c) => {
            println!("{}", c.summary_line());
            for f in c.failures().skip(1) {
                println!("      also failing: {} = {:e} vs {}", f.name, f.value, f.bound());
            }
            ok &= c.pass();
        }
        Err(e) => {
            println!("{id:<5} FAIL breakdown: {e}");
            ok = false;
        }
    };
    report("AC-1", verify::ac1(&cfg));
    report("AC-2", verify::ac2(&cfg));
    report("AC-3", verify::ac3(&cfg));
    report("AC-4", verify::ac4(&cfg));
    match verify::leading_reports(&cfg) {
        Ok(reports) => {
            report("AC-5", Ok(verify::ac5(&reports)));
            report("AC-6", verify::ac6(&cfg));
            report("AC-7", verify::ac7(&cfg));
            report("AC-8", Ok(verify::ac8(&reports)));
        }
        Err(e) => {
            let msg = e.to_string();
            report("AC-5", Err(e));
            report("AC-6", verify::ac6(&cfg));
            report("AC-7", verify::ac7(&cfg));
            println!("AC-8  FAIL breakdown: {msg}");
            ok = false;
        }
    }
    println!("acceptance: {} in {:.1?}", if ok { "all criteria pass" } else { "FAILED" }, started.elapsed());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
