//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.

use std::time::Instant;

use dbk_core::verify::{self, SuiteReport};
use dbk_core::Result;

type Criterion = (&'static str, fn() -> Result<SuiteReport>);

const CRITERIA: [Criterion; 12] = [
    ("AC1 modal diffusion", verify::modal_diffusion),
    ("AC2 logistic reaction and blow-up", verify::logistic),
    ("AC3 concentration energy identity", verify::concentration_identity),
    ("AC4 momentum energy identity", verify::momentum_identity),
    ("AC5 mass conservation", verify::mass_conservation),
    ("AC6 exponential decay to mean", verify::decay_to_mean),
    ("AC7 velocity decay", verify::velocity_decay),
    ("AC8 positivity", verify::positivity),
    ("AC9 perturbation scaling", verify::perturbation),
    ("AC10 Korteweg reduction", verify::korteweg_reduction),
    ("AC11 manufactured-solution convergence", verify::mms_convergence),
    ("AC12 mobility corollaries", verify::mobility_corollaries),
];

fn main() {
    let results: Vec<(String, bool, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA
            .iter()
            .map(|(name, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let mut text = String::new();
                    let ok = match f() {
                        Ok(rep) => {
                            for c in &rep.checks {
                                text.push_str(&format!(
                                    "      [{}] {}: {:.6e} (expected {})\n",
                                    if c.passed { "ok" } else { "XX" },
                                    c.name,
                                    c.measured,
                                    c.expected
                                ));
                            }
                            rep.passed()
                        }
                        Err(e) => {
                            text.push_str(&format!("      error: {e}\n"));
                            false
                        }
                    };
                    let line = format!("{} {name} ({:.1}s)\n{text}", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
                    (line, ok, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let mut failed = 0;
    for (line, ok, _) in &results {
        print!("{line}");
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
