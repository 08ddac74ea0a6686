//! Batch front end: `thermistor <scenario> --config PATH --out DIR`.
//!
//! Writes `trajectory.csv`, `constants.csv`, `verdicts.csv` and
//! `manifest.toml` into the output directory. Exit status: 0 when every
//! verdict passes, 1 when one fails, 2 for configuration or I/O errors,
//! 3 when the solver fails.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::Parser;

use thermistor::experiments::{run_scenario, Scenario};
use thermistor::Error;

#[derive(Parser, Debug)]
#[command(name = "thermistor", version, about = "Run a thermistor experiment scenario")]
struct Cli {
    /// simulate | mms | reg-sweep | uniqueness | absorbing | attractor | verify
    #[arg(value_parser = parse_scenario)]
    scenario: Scenario,
    /// TOML config; missing keys fall back to the scenario defaults.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensemble runs; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

const EXIT_VERDICT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fail = |code: u8, err: anyhow::Error| {
        eprintln!("error: {err:#}");
        ExitCode::from(code)
    };

    let text = match fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display())) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let mut cfg = match config::parse(&text).and_then(|f| config::resolve(cli.scenario, &f)) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Err(e) = fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display())) {
        return fail(EXIT_CONFIG, e);
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_CONFIG, e.into()),
    };
    let outcome = match pool.install(|| run_scenario(cli.scenario, &cfg)) {
        Ok(o) => o,
        Err(e) => {
            let code = match e {
                Error::InvalidSpec(_) | Error::InvalidR(_) | Error::InvalidExponent(_) | Error::GridMismatch => {
                    EXIT_CONFIG
                }
                _ => EXIT_SOLVER,
            };
            return fail(code, e.into());
        }
    };

    let written = (|| -> anyhow::Result<()> {
        output::write_trajectories(&cli.out.join("trajectory.csv"), &outcome.runs)?;
        output::write_constants(&cli.out.join("constants.csv"), outcome.constants.as_ref())?;
        output::write_verdicts(&cli.out.join("verdicts.csv"), &outcome.verdicts)?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let resolved = toml::to_string(&config::echo(cli.scenario, &cfg))?;
        let manifest = format!(
            "# generated_at_unix = {stamp}\n# jobs = {}\n{resolved}",
            cli.jobs.map_or("auto".to_string(), |j| j.to_string())
        );
        fs::write(cli.out.join("manifest.toml"), manifest)?;
        Ok(())
    })();
    if let Err(e) = written {
        return fail(EXIT_CONFIG, e);
    }

    for v in &outcome.verdicts {
        println!(
            "{} {} lhs={} rhs={} [{}]",
            if v.pass { "pass" } else { "FAIL" },
            v.check,
            v.lhs,
            v.rhs,
            v.parameters
        );
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT)
    }
}
