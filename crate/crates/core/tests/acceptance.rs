//! Primary acceptance criteria. Runs without the libtest harness so that each
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use thermistor::analysis::Verdict;
use thermistor::experiments::{self, Scenario, ScenarioConfig};
use thermistor::poincare::poincare_constant;
use thermistor::{Grid, Result};

fn poincare() -> Result<Vec<Verdict>> {
    let line = poincare_constant(&Grid::interval(1.0, 256)?, 2.0)?;
    let square = poincare_constant(&Grid::rectangle(1.0, 1.0, 256, 256)?, 2.0)?;
    let pi2 = PI * PI;
    Ok(vec![
        Verdict::le("poincare.interval", format!("C={line}"), (line - pi2).abs() / pi2, 0.01),
        Verdict::le("poincare.square", format!("C={square}"), (square - 2.0 * pi2).abs() / (2.0 * pi2), 0.02),
    ])
}

fn scenario(sc: Scenario) -> Result<Vec<Verdict>> {
    experiments::run_scenario(sc, &ScenarioConfig::defaults(sc)).map(|o| o.verdicts)
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Vec<Verdict>>;
    let criteria: [(&str, Check); 10] = [
        ("tartar", || Ok(experiments::tartar_suite(100_000, 0))),
        ("legendre", || Ok(experiments::legendre_suite(10_000, 1))),
        ("ghidaglia", || Ok(vec![experiments::ghidaglia_suite(1_000, 2)])),
        ("oracle-equivalence", || Ok(vec![experiments::oracle_equivalence(100, 3)])),
        ("mms-convergence", || scenario(Scenario::Mms)),
        ("uniform-linf-bound", || scenario(Scenario::RegSweep)),
        ("comparison-contraction", || scenario(Scenario::Uniqueness)),
        ("absorbing-set", || scenario(Scenario::Absorbing)),
        ("attractor", || scenario(Scenario::Attractor)),
        ("poincare", poincare),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(verdicts) => {
                for v in &verdicts {
                    println!(
                        "    {} {}: lhs={:e} rhs={:e} [{}]",
                        if v.pass { "ok  " } else { "FAIL" },
                        v.check,
                        v.lhs,
                        v.rhs,
                        v.parameters
                    );
                }
                let pass = !verdicts.is_empty() && verdicts.iter().all(|v| v.pass);
                if !pass {
                    failed += 1;
                }
                println!("{} {name} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" });
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {e}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
