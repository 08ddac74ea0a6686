//! Scenario drivers. Each scenario runs a batch of trajectories or property
//! samples and returns pass/fail verdicts together with the recorded runs.
//!
//! Trajectories of one scenario run in parallel on the ambient rayon pool and
//! are collected in run-id order, so results do not depend on the pool size.

mod dynamics;
mod suites;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{compute_theory_constants, TheoryConstants, Verdict};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{Domain, InitialData, MaterialLaw, ProblemSpec, SourceLaw};
use crate::solver::{integrate_from, uniform_record_times, StepperConfig, TrajectoryRecord};

pub use dynamics::{
    absorbing, attractor, mms_study, reg_sweep, simulate, uniqueness, AbsorbingSettings,
    AttractorSettings, MmsSettings, RegSweepSettings,
};
pub use suites::{
    gronwall_suite, ghidaglia_suite, legendre_suite, oracle_equivalence, tartar_suite,
    verify_suite, VerifySettings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Simulate,
    Mms,
    RegSweep,
    Uniqueness,
    Absorbing,
    Attractor,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Simulate,
        Scenario::Mms,
        Scenario::RegSweep,
        Scenario::Uniqueness,
        Scenario::Absorbing,
        Scenario::Attractor,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Mms => "mms",
            Scenario::RegSweep => "reg-sweep",
            Scenario::Uniqueness => "uniqueness",
            Scenario::Absorbing => "absorbing",
            Scenario::Attractor => "attractor",
            Scenario::Verify => "verify",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown scenario '{s}'")))
    }
}

/// Bounded family of initial data for ensembles.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialFamily {
    /// Bumps with amplitude in `[min, max]`, random center in the middle
    /// half of the domain and half width between 0.2 and 0.4 of the extent.
    Bumps { min_amplitude: f64, max_amplitude: f64 },
    /// Sine series with leading coefficient in `[lead_min, lead_max]` and
    /// `modes - 1` further coefficients bounded by `tail_bound`.
    Fourier {
        lead_min: f64,
        lead_max: f64,
        modes: usize,
        tail_bound: f64,
    },
    /// Constants in `[min, max]`.
    Constants { min: f64, max: f64 },
}

impl InitialFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialFamily::Bumps {
                min_amplitude,
                max_amplitude,
            } => min_amplitude <= max_amplitude && min_amplitude.is_finite() && max_amplitude.is_finite(),
            InitialFamily::Fourier {
                lead_min,
                lead_max,
                modes,
                tail_bound,
            } => lead_min <= lead_max && modes >= 1 && tail_bound >= 0.0 && lead_max.is_finite(),
            InitialFamily::Constants { min, max } => min <= max && min.is_finite() && max.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid initial family {self:?}")))
        }
    }

    /// Draws `count` members; the same seed gives the same members.
    pub fn draw(&self, grid: &Grid, count: usize, seed: u64) -> Vec<InitialData> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| if lo < hi { rng.gen_range(lo..hi) } else { lo };
        let ext = [grid.extent(0), grid.extent(1)];
        let min_ext = if grid.dim() == 1 { ext[0] } else { ext[0].min(ext[1]) };
        (0..count)
            .map(|_| match *self {
                InitialFamily::Bumps {
                    min_amplitude,
                    max_amplitude,
                } => {
                    let amplitude = uniform(&mut rng, min_amplitude, max_amplitude);
                    let center = [
                        ext[0] * uniform(&mut rng, 0.25, 0.75),
                        ext[1] * uniform(&mut rng, 0.25, 0.75),
                    ];
                    let width = min_ext * uniform(&mut rng, 0.2, 0.4);
                    InitialData::Bump {
                        amplitude,
                        center,
                        width,
                    }
                }
                InitialFamily::Fourier {
                    lead_min,
                    lead_max,
                    modes,
                    tail_bound,
                } => {
                    let mut coefficients = vec![uniform(&mut rng, lead_min, lead_max)];
                    for _ in 1..modes {
                        coefficients.push(uniform(&mut rng, -tail_bound, tail_bound));
                    }
                    InitialData::Fourier { coefficients }
                }
                InitialFamily::Constants { min, max } => InitialData::Constant {
                    value: uniform(&mut rng, min, max),
                },
            })
            .collect()
    }
}

/// Result of one scenario.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    /// Runs in run-id order.
    pub runs: Vec<TrajectoryRecord>,
    pub constants: Option<TheoryConstants>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Full parameter set of a scenario run; [`ScenarioConfig::defaults`] gives
/// the shipped values.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub spec: ProblemSpec,
    pub stepper: StepperConfig,
    /// Number of evenly spaced record times in `(0, M]`.
    pub records: usize,
    pub seed: u64,
    /// Simulate-only: run an ensemble instead of the single initial datum.
    pub ensemble: Option<(InitialFamily, usize)>,
    pub verify: VerifySettings,
    pub mms: MmsSettings,
    pub reg_sweep: RegSweepSettings,
    pub absorbing: AbsorbingSettings,
    pub attractor: AttractorSettings,
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let mut spec = ProblemSpec::interval(1.0, 64, 2.0);
        let mut stepper = StepperConfig::default();
        let mut records = 20;
        match scenario {
            Scenario::Simulate => {
                spec.m = 3.0;
                spec.material = MaterialLaw::default_cubic();
                spec.source = SourceLaw::default_bump();
                spec.reg_r = 1e-2;
                spec.initial = InitialData::Sine { amplitude: 1.0 };
            }
            Scenario::Mms | Scenario::Verify => {}
            Scenario::RegSweep => {
                spec.m = 4.0;
                spec.domain = Domain::Interval {
                    length: 1.0,
                    cells: 128,
                };
                spec.horizon = 0.5;
                spec.material = MaterialLaw::default_cubic();
                spec.source = SourceLaw::default_bump();
                spec.initial = InitialData::Step {
                    amplitude: 1.0,
                    from: 0.25,
                    to: 0.75,
                };
                stepper.dt = 2e-3;
                records = 50;
            }
            Scenario::Uniqueness => {
                spec.m = 3.0;
                spec.material = MaterialLaw::default_cubic();
                spec.source = SourceLaw::default_bump();
                spec.reg_r = 1e-2;
                spec.initial = InitialData::Bump {
                    amplitude: 1.0,
                    center: [0.5, 0.5],
                    width: 0.3,
                };
                stepper.dt = 5e-3;
                records = 40;
            }
            Scenario::Absorbing => {
                spec.m = 4.0;
                spec.horizon = 2.0;
                spec.material = MaterialLaw::default_piecewise();
                spec.source = SourceLaw::default_bump();
                spec.reg_r = 1e-2;
                stepper.dt = 2e-3;
                records = 80;
            }
            Scenario::Attractor => {
                spec.m = 4.0;
                spec.horizon = 6.0;
                spec.material = MaterialLaw::default_piecewise();
                spec.source = SourceLaw::default_bump();
                spec.reg_r = 1e-2;
                records = 60;
            }
        }
        Self {
            spec,
            stepper,
            records,
            seed: 0,
            ensemble: None,
            verify: VerifySettings::default(),
            mms: MmsSettings::default(),
            reg_sweep: RegSweepSettings::default(),
            absorbing: AbsorbingSettings::default(),
            attractor: AttractorSettings::default(),
        }
    }

    pub fn record_times(&self) -> Vec<f64> {
        if self.spec.horizon == 0.0 {
            Vec::new()
        } else {
            uniform_record_times(self.spec.horizon, self.records.max(1))
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.stepper.validate()?;
        if let Some((family, _)) = &self.ensemble {
            family.validate()?;
        }
        self.attractor.first.validate()?;
        self.attractor.second.validate()?;
        Ok(())
    }
}

/// Runs `scenario` and attaches the theory constants of the configured
/// problem.
pub fn run_scenario(scenario: Scenario, config: &ScenarioConfig) -> Result<Outcome> {
    config.validate()?;
    let mut outcome = match scenario {
        Scenario::Simulate => simulate(config)?,
        Scenario::Mms => mms_study(&config.spec, &config.mms)?,
        Scenario::RegSweep => reg_sweep(config)?,
        Scenario::Uniqueness => uniqueness(config)?,
        Scenario::Absorbing => absorbing(config)?,
        Scenario::Attractor => attractor(config)?,
        Scenario::Verify => verify_suite(&config.verify, config.seed),
    };
    let mut constants = compute_theory_constants(&config.spec)?;
    if let Some(c) = &outcome.constants {
        constants.fitted_k = c.fitted_k;
    }
    outcome.constants = Some(constants);
    Ok(outcome)
}

/// Integrates every `(spec, initial)` pair in parallel, keeping input order.
pub(crate) fn run_batch(
    jobs: &[(ProblemSpec, Field)],
    stepper: &StepperConfig,
    times: &[f64],
) -> Result<Vec<TrajectoryRecord>> {
    jobs.par_iter()
        .map(|(spec, initial)| integrate_from(spec, stepper, initial.clone(), times))
        .collect()
}

pub(crate) fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}
