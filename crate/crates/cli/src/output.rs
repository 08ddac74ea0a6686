//! CSV artifacts. Column order is fixed; every cell is filled (non-finite
//! values are written as `NaN`, `inf` or `-inf`).

use std::path::Path;

use anyhow::Result;

use thermistor::analysis::{TheoryConstants, Verdict};
use thermistor::TrajectoryRecord;

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "run_id",
    "step",
    "time",
    "linf",
    "l1",
    "l2",
    "lp_max",
    "w1m_seminorm",
    "energy_psi_star",
    "dalpha_dt_l2",
    "nonlocal_coeff",
    "newton_iters",
    "picard_iters",
    "r",
    "m",
];

pub const CONSTANTS_COLUMNS: [&str; 3] = ["name", "value", "formula"];

pub const VERDICT_COLUMNS: [&str; 6] = ["check", "parameters", "lhs", "rhs", "margin", "pass"];

pub fn write_trajectories(path: &Path, runs: &[TrajectoryRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_COLUMNS)?;
    for (run_id, run) in runs.iter().enumerate() {
        for row in &run.rows {
            w.write_record([
                run_id.to_string(),
                row.step.to_string(),
                row.time.to_string(),
                row.linf.to_string(),
                row.l1.to_string(),
                row.l2.to_string(),
                row.lp_max.to_string(),
                row.w1m_seminorm.to_string(),
                row.energy_psi_star.to_string(),
                row.dalpha_dt_l2.to_string(),
                row.nonlocal_coeff.to_string(),
                row.newton_iters.to_string(),
                row.picard_iters.to_string(),
                run.r.to_string(),
                run.m.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_constants(path: &Path, constants: Option<&TheoryConstants>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CONSTANTS_COLUMNS)?;
    if let Some(c) = constants {
        for (name, value, formula) in c.rows() {
            w.write_record([name, &value.to_string(), formula])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_verdicts(path: &Path, verdicts: &[Verdict]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(VERDICT_COLUMNS)?;
    for v in verdicts {
        w.write_record([
            v.check.clone(),
            v.parameters.clone(),
            v.lhs.to_string(),
            v.rhs.to_string(),
            v.margin.to_string(),
            v.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
