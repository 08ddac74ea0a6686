//! Experiment configuration files: TOML with flat sections.
//!
//! Every key is optional. Missing keys keep the defaults of the chosen
//! scenario, so an empty file runs the shipped configuration. `resolve`
//! turns a parsed file into a [`ScenarioConfig`]; `echo` writes the fully
//! resolved values back in the same layout.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use thermistor::experiments::{InitialFamily, Scenario, ScenarioConfig};
use thermistor::operator::Linearization;
use thermistor::{Domain, InitialData, MaterialLaw, SourceLaw};

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub records: Option<usize>,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub material: LawSection,
    #[serde(default)]
    pub source: LawSection,
    #[serde(default)]
    pub initial: LawSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub ensemble: FamilySection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub mms: MmsSection,
    #[serde(default)]
    pub reg_sweep: RegSweepSection,
    #[serde(default)]
    pub absorbing: AbsorbingSection,
    #[serde(default)]
    pub attractor: AttractorSection,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub m: Option<f64>,
    pub kappa: Option<f64>,
    /// Sets `kappa = current^2 / area^2`; both must be given.
    pub current: Option<f64>,
    pub area: Option<f64>,
    pub horizon: Option<f64>,
    pub reg_r: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: Option<usize>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

/// Shared shape of the material, source and initial-data sections: a
/// family name plus its scalar parameters.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    pub family: Option<String>,
    // material
    pub linear: Option<f64>,
    pub cubic: Option<f64>,
    pub cutoff: Option<f64>,
    pub slope_low: Option<f64>,
    pub slope_high: Option<f64>,
    pub breakpoint: Option<f64>,
    pub half_width: Option<f64>,
    // source
    pub sigma: Option<f64>,
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    // initial data
    pub value: Option<f64>,
    pub center_y: Option<f64>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub dt: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iters: Option<usize>,
    pub picard_max_iters: Option<usize>,
    pub picard_tol: Option<f64>,
    pub dt_halving_max: Option<usize>,
    pub linearization: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub count: Option<usize>,
    pub family: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub modes: Option<usize>,
    pub tail: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub tartar_samples: Option<usize>,
    pub legendre_samples: Option<usize>,
    pub ghidaglia_draws: Option<usize>,
    pub gronwall_draws: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSection {
    pub horizon: Option<f64>,
    pub temporal_cells: Option<usize>,
    pub temporal_dts: Option<Vec<f64>>,
    pub spatial_cells: Option<Vec<usize>>,
    pub spatial_dt_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegSweepSection {
    pub r_values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorbingSection {
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AttractorSection {
    pub members: Option<usize>,
    pub cutoff: Option<f64>,
    pub merge_tol: Option<f64>,
    pub tolerance: Option<f64>,
    pub first_family: Option<String>,
    pub first_min: Option<f64>,
    pub first_max: Option<f64>,
    pub first_modes: Option<usize>,
    pub first_tail: Option<f64>,
    pub second_family: Option<String>,
    pub second_min: Option<f64>,
    pub second_max: Option<f64>,
    pub second_modes: Option<usize>,
    pub second_tail: Option<f64>,
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).context("malformed config")
}

fn material(s: &LawSection, current: &MaterialLaw) -> Result<MaterialLaw> {
    let family = s.family.as_deref().unwrap_or(current.family());
    let base = if family == current.family() {
        current.clone()
    } else {
        match family {
            "identity" => MaterialLaw::Identity,
            "cubic-affine" => MaterialLaw::default_cubic(),
            "smoothed-piecewise" => MaterialLaw::default_piecewise(),
            other => bail!("unknown material family '{other}'"),
        }
    };
    Ok(match base {
        MaterialLaw::Identity => MaterialLaw::Identity,
        MaterialLaw::CubicAffine { linear, cubic, cutoff } => MaterialLaw::CubicAffine {
            linear: s.linear.unwrap_or(linear),
            cubic: s.cubic.unwrap_or(cubic),
            cutoff: s.cutoff.unwrap_or(cutoff),
        },
        MaterialLaw::SmoothedPiecewise {
            slope_low,
            slope_high,
            breakpoint,
            half_width,
        } => MaterialLaw::SmoothedPiecewise {
            slope_low: s.slope_low.unwrap_or(slope_low),
            slope_high: s.slope_high.unwrap_or(slope_high),
            breakpoint: s.breakpoint.unwrap_or(breakpoint),
            half_width: s.half_width.unwrap_or(half_width),
        },
    })
}

fn source(s: &LawSection, current: &SourceLaw) -> Result<SourceLaw> {
    let family = s.family.as_deref().unwrap_or(current.family());
    let base = if family == current.family() {
        current.clone()
    } else {
        match family {
            "constant-floor" => SourceLaw::ConstantFloor { sigma: 1.0 },
            "bump-over-floor" => SourceLaw::default_bump(),
            other => bail!("unknown source family '{other}'"),
        }
    };
    Ok(match base {
        SourceLaw::ConstantFloor { sigma } => SourceLaw::ConstantFloor {
            sigma: s.sigma.unwrap_or(sigma),
        },
        SourceLaw::BumpOverFloor {
            sigma,
            amplitude,
            center,
            width,
        } => SourceLaw::BumpOverFloor {
            sigma: s.sigma.unwrap_or(sigma),
            amplitude: s.amplitude.unwrap_or(amplitude),
            center: s.center.unwrap_or(center),
            width: s.width.unwrap_or(width),
        },
    })
}

fn initial_family_name(d: &InitialData) -> &'static str {
    match d {
        InitialData::Zero => "zero",
        InitialData::Constant { .. } => "constant",
        InitialData::Sine { .. } => "sine",
        InitialData::Bump { .. } => "bump",
        InitialData::Step { .. } => "step",
        InitialData::Fourier { .. } => "fourier",
        InitialData::Nodal { .. } => "nodal",
        InitialData::Mollified { .. } => "mollified",
    }
}

fn initial(s: &LawSection, current: &InitialData, extent: [f64; 2]) -> Result<InitialData> {
    let name = s.family.as_deref().unwrap_or(initial_family_name(current));
    let same = name == initial_family_name(current);
    let amp = |default: f64, field: Option<f64>| field.unwrap_or(default);
    Ok(match name {
        "zero" => InitialData::Zero,
        "constant" => {
            let v = match current {
                InitialData::Constant { value } if same => *value,
                _ => 1.0,
            };
            InitialData::Constant { value: amp(v, s.value) }
        }
        "sine" => {
            let a = match current {
                InitialData::Sine { amplitude } if same => *amplitude,
                _ => 1.0,
            };
            InitialData::Sine {
                amplitude: amp(a, s.amplitude),
            }
        }
        "bump" => {
            let (a, c, w) = match current {
                InitialData::Bump {
                    amplitude,
                    center,
                    width,
                } if same => (*amplitude, *center, *width),
                _ => (1.0, [0.5 * extent[0], 0.5 * extent[1]], 0.3 * extent[0]),
            };
            InitialData::Bump {
                amplitude: amp(a, s.amplitude),
                center: [s.center.unwrap_or(c[0]), s.center_y.unwrap_or(c[1])],
                width: s.width.unwrap_or(w),
            }
        }
        "step" => {
            let (a, f, t) = match current {
                InitialData::Step { amplitude, from, to } if same => (*amplitude, *from, *to),
                _ => (1.0, 0.25 * extent[0], 0.75 * extent[0]),
            };
            InitialData::Step {
                amplitude: amp(a, s.amplitude),
                from: s.from.unwrap_or(f),
                to: s.to.unwrap_or(t),
            }
        }
        "fourier" => {
            let c = match current {
                InitialData::Fourier { coefficients } if same => coefficients.clone(),
                _ => vec![1.0],
            };
            InitialData::Fourier {
                coefficients: s.coefficients.clone().unwrap_or(c),
            }
        }
        other => bail!("unknown initial-data family '{other}'"),
    })
}

fn family(name: &str, min: Option<f64>, max: Option<f64>, modes: Option<usize>, tail: Option<f64>, current: &InitialFamily) -> Result<InitialFamily> {
    let same = family_name(current) == name;
    Ok(match name {
        "bumps" => {
            let (lo, hi) = match current {
                InitialFamily::Bumps {
                    min_amplitude,
                    max_amplitude,
                } if same => (*min_amplitude, *max_amplitude),
                _ => (1.0, 2.0),
            };
            InitialFamily::Bumps {
                min_amplitude: min.unwrap_or(lo),
                max_amplitude: max.unwrap_or(hi),
            }
        }
        "fourier" => {
            let (lo, hi, n, t) = match current {
                InitialFamily::Fourier {
                    lead_min,
                    lead_max,
                    modes,
                    tail_bound,
                } if same => (*lead_min, *lead_max, *modes, *tail_bound),
                _ => (1.0, 2.0, 3, 0.5),
            };
            InitialFamily::Fourier {
                lead_min: min.unwrap_or(lo),
                lead_max: max.unwrap_or(hi),
                modes: modes.unwrap_or(n),
                tail_bound: tail.unwrap_or(t),
            }
        }
        "constants" => {
            let (lo, hi) = match current {
                InitialFamily::Constants { min, max } if same => (*min, *max),
                _ => (0.0, 1.0),
            };
            InitialFamily::Constants {
                min: min.unwrap_or(lo),
                max: max.unwrap_or(hi),
            }
        }
        other => bail!("unknown ensemble family '{other}'"),
    })
}

fn family_name(f: &InitialFamily) -> &'static str {
    match f {
        InitialFamily::Bumps { .. } => "bumps",
        InitialFamily::Fourier { .. } => "fourier",
        InitialFamily::Constants { .. } => "constants",
    }
}

fn linearization_name(l: Linearization) -> &'static str {
    match l {
        Linearization::NormalExact => "normal-exact",
        Linearization::FrozenCoefficient => "frozen-coefficient",
    }
}

/// Applies `file` on top of the defaults of `scenario`.
pub fn resolve(scenario: Scenario, file: &ConfigFile) -> Result<ScenarioConfig> {
    if let Some(name) = &file.scenario {
        if name != scenario.name() {
            bail!("config is for scenario '{name}' but '{scenario}' was requested");
        }
    }
    let mut cfg = ScenarioConfig::defaults(scenario);
    if let Some(seed) = file.seed {
        cfg.seed = seed;
    }
    if let Some(records) = file.records {
        cfg.records = records;
    }

    let p = &file.problem;
    let spec = &mut cfg.spec;
    if let Some(m) = p.m {
        spec.m = m;
    }
    if let Some(k) = p.kappa {
        spec.kappa = k;
    }
    match (p.current, p.area) {
        (Some(i), Some(b)) => {
            if p.kappa.is_some() {
                bail!("give either kappa or current and area, not both");
            }
            *spec = spec.clone().with_current(i, b);
        }
        (None, None) => {}
        _ => bail!("current and area must be given together"),
    }
    if let Some(h) = p.horizon {
        spec.horizon = h;
    }
    if let Some(r) = p.reg_r {
        spec.reg_r = r;
    }

    let g = &file.grid;
    let (mut lx, mut ly, mut nx, mut ny) = match spec.domain {
        Domain::Interval { length, cells } => (length, length, cells, cells),
        Domain::Rectangle { lx, ly, nx, ny } => (lx, ly, nx, ny),
    };
    let dim = g.dim.unwrap_or(match spec.domain {
        Domain::Interval { .. } => 1,
        Domain::Rectangle { .. } => 2,
    });
    lx = g.lx.unwrap_or(lx);
    ly = g.ly.unwrap_or(ly);
    nx = g.nx.unwrap_or(nx);
    ny = g.ny.unwrap_or(ny);
    spec.domain = match dim {
        1 => Domain::Interval { length: lx, cells: nx },
        2 => Domain::Rectangle { lx, ly, nx, ny },
        d => bail!("grid.dim must be 1 or 2, got {d}"),
    };

    spec.material = material(&file.material, &spec.material)?;
    spec.source = source(&file.source, &spec.source)?;
    spec.initial = initial(&file.initial, &spec.initial, [lx, ly])?;

    let s = &file.stepper;
    let st = &mut cfg.stepper;
    st.dt = s.dt.unwrap_or(st.dt);
    st.newton_tol = s.newton_tol.unwrap_or(st.newton_tol);
    st.newton_max_iters = s.newton_max_iters.unwrap_or(st.newton_max_iters);
    st.picard_max_iters = s.picard_max_iters.unwrap_or(st.picard_max_iters);
    st.picard_tol = s.picard_tol.unwrap_or(st.picard_tol);
    st.dt_halving_max = s.dt_halving_max.unwrap_or(st.dt_halving_max);
    if let Some(l) = &s.linearization {
        st.linearization = match l.as_str() {
            "normal-exact" => Linearization::NormalExact,
            "frozen-coefficient" => Linearization::FrozenCoefficient,
            other => bail!("unknown linearization '{other}'"),
        };
    }

    let e = &file.ensemble;
    if let Some(name) = &e.family {
        let current = InitialFamily::Constants { min: 0.0, max: 1.0 };
        let fam = family(name, e.min, e.max, e.modes, e.tail, &current)?;
        cfg.ensemble = Some((fam, e.count.unwrap_or(1)));
    } else if e.count.is_some() || e.min.is_some() || e.max.is_some() {
        bail!("ensemble section needs a family");
    }

    let v = &file.verify;
    let vs = &mut cfg.verify;
    vs.tartar_samples = v.tartar_samples.unwrap_or(vs.tartar_samples);
    vs.legendre_samples = v.legendre_samples.unwrap_or(vs.legendre_samples);
    vs.ghidaglia_draws = v.ghidaglia_draws.unwrap_or(vs.ghidaglia_draws);
    vs.gronwall_draws = v.gronwall_draws.unwrap_or(vs.gronwall_draws);

    let m = &file.mms;
    let ms = &mut cfg.mms;
    ms.horizon = m.horizon.unwrap_or(ms.horizon);
    ms.temporal_cells = m.temporal_cells.unwrap_or(ms.temporal_cells);
    if let Some(d) = &m.temporal_dts {
        ms.temporal_dts = d.clone();
    }
    if let Some(c) = &m.spatial_cells {
        ms.spatial_cells = c.clone();
    }
    ms.spatial_dt_factor = m.spatial_dt_factor.unwrap_or(ms.spatial_dt_factor);

    if let Some(r) = &file.reg_sweep.r_values {
        cfg.reg_sweep.r_values = r.clone();
    }
    if let Some(a) = &file.absorbing.amplitudes {
        cfg.absorbing.amplitudes = a.clone();
    }

    let a = &file.attractor;
    let at = &mut cfg.attractor;
    at.members = a.members.unwrap_or(at.members);
    at.cutoff = a.cutoff.unwrap_or(at.cutoff);
    at.merge_tol = a.merge_tol.unwrap_or(at.merge_tol);
    at.tolerance = a.tolerance.unwrap_or(at.tolerance);
    let first_name = a.first_family.clone().unwrap_or_else(|| family_name(&at.first).into());
    at.first = family(&first_name, a.first_min, a.first_max, a.first_modes, a.first_tail, &at.first)?;
    let second_name = a.second_family.clone().unwrap_or_else(|| family_name(&at.second).into());
    at.second = family(&second_name, a.second_min, a.second_max, a.second_modes, a.second_tail, &at.second)?;

    cfg.validate().map_err(anyhow::Error::from)?;
    Ok(cfg)
}

fn family_fields(f: &InitialFamily) -> (String, f64, f64, Option<usize>, Option<f64>) {
    match *f {
        InitialFamily::Bumps {
            min_amplitude,
            max_amplitude,
        } => ("bumps".into(), min_amplitude, max_amplitude, None, None),
        InitialFamily::Fourier {
            lead_min,
            lead_max,
            modes,
            tail_bound,
        } => ("fourier".into(), lead_min, lead_max, Some(modes), Some(tail_bound)),
        InitialFamily::Constants { min, max } => ("constants".into(), min, max, None, None),
    }
}

/// Fully resolved configuration in the input layout.
pub fn echo(scenario: Scenario, cfg: &ScenarioConfig) -> ConfigFile {
    let spec = &cfg.spec;
    let (dim, lx, ly, nx, ny) = match spec.domain {
        Domain::Interval { length, cells } => (1, length, None, cells, None),
        Domain::Rectangle { lx, ly, nx, ny } => (2, lx, Some(ly), nx, Some(ny)),
    };
    let mut material = LawSection {
        family: Some(spec.material.family().into()),
        ..LawSection::default()
    };
    match spec.material {
        MaterialLaw::Identity => {}
        MaterialLaw::CubicAffine { linear, cubic, cutoff } => {
            material.linear = Some(linear);
            material.cubic = Some(cubic);
            material.cutoff = Some(cutoff);
        }
        MaterialLaw::SmoothedPiecewise {
            slope_low,
            slope_high,
            breakpoint,
            half_width,
        } => {
            material.slope_low = Some(slope_low);
            material.slope_high = Some(slope_high);
            material.breakpoint = Some(breakpoint);
            material.half_width = Some(half_width);
        }
    }
    let mut source = LawSection {
        family: Some(spec.source.family().into()),
        sigma: Some(spec.source.sigma()),
        ..LawSection::default()
    };
    if let SourceLaw::BumpOverFloor {
        amplitude,
        center,
        width,
        ..
    } = spec.source
    {
        source.amplitude = Some(amplitude);
        source.center = Some(center);
        source.width = Some(width);
    }
    let mut initial = LawSection {
        family: Some(initial_family_name(&spec.initial).into()),
        ..LawSection::default()
    };
    match &spec.initial {
        InitialData::Constant { value } => initial.value = Some(*value),
        InitialData::Sine { amplitude } => initial.amplitude = Some(*amplitude),
        InitialData::Bump {
            amplitude,
            center,
            width,
        } => {
            initial.amplitude = Some(*amplitude);
            initial.center = Some(center[0]);
            initial.center_y = Some(center[1]);
            initial.width = Some(*width);
        }
        InitialData::Step { amplitude, from, to } => {
            initial.amplitude = Some(*amplitude);
            initial.from = Some(*from);
            initial.to = Some(*to);
        }
        InitialData::Fourier { coefficients } => initial.coefficients = Some(coefficients.clone()),
        _ => {}
    }
    let ensemble = match &cfg.ensemble {
        Some((fam, count)) => {
            let (family, min, max, modes, tail) = family_fields(fam);
            FamilySection {
                count: Some(*count),
                family: Some(family),
                min: Some(min),
                max: Some(max),
                modes,
                tail,
            }
        }
        None => FamilySection::default(),
    };
    let (f1, f1min, f1max, f1modes, f1tail) = family_fields(&cfg.attractor.first);
    let (f2, f2min, f2max, f2modes, f2tail) = family_fields(&cfg.attractor.second);
    let (kappa, current, area) = match (spec.current_i, spec.area_b) {
        (Some(i), Some(b)) => (None, Some(i), Some(b)),
        _ => (Some(spec.kappa), None, None),
    };
    ConfigFile {
        scenario: Some(scenario.name().into()),
        seed: Some(cfg.seed),
        records: Some(cfg.records),
        problem: ProblemSection {
            m: Some(spec.m),
            kappa,
            current,
            area,
            horizon: Some(spec.horizon),
            reg_r: Some(spec.reg_r),
        },
        grid: GridSection {
            dim: Some(dim),
            lx: Some(lx),
            ly,
            nx: Some(nx),
            ny,
        },
        material,
        source,
        initial,
        stepper: StepperSection {
            dt: Some(cfg.stepper.dt),
            newton_tol: Some(cfg.stepper.newton_tol),
            newton_max_iters: Some(cfg.stepper.newton_max_iters),
            picard_max_iters: Some(cfg.stepper.picard_max_iters),
            picard_tol: Some(cfg.stepper.picard_tol),
            dt_halving_max: Some(cfg.stepper.dt_halving_max),
            linearization: Some(linearization_name(cfg.stepper.linearization).into()),
        },
        ensemble,
        verify: VerifySection {
            tartar_samples: Some(cfg.verify.tartar_samples),
            legendre_samples: Some(cfg.verify.legendre_samples),
            ghidaglia_draws: Some(cfg.verify.ghidaglia_draws),
            gronwall_draws: Some(cfg.verify.gronwall_draws),
        },
        mms: MmsSection {
            horizon: Some(cfg.mms.horizon),
            temporal_cells: Some(cfg.mms.temporal_cells),
            temporal_dts: Some(cfg.mms.temporal_dts.clone()),
            spatial_cells: Some(cfg.mms.spatial_cells.clone()),
            spatial_dt_factor: Some(cfg.mms.spatial_dt_factor),
        },
        reg_sweep: RegSweepSection {
            r_values: Some(cfg.reg_sweep.r_values.clone()),
        },
        absorbing: AbsorbingSection {
            amplitudes: Some(cfg.absorbing.amplitudes.clone()),
        },
        attractor: AttractorSection {
            members: Some(cfg.attractor.members),
            cutoff: Some(cfg.attractor.cutoff),
            merge_tol: Some(cfg.attractor.merge_tol),
            tolerance: Some(cfg.attractor.tolerance),
            first_family: Some(f1),
            first_min: Some(f1min),
            first_max: Some(f1max),
            first_modes: f1modes,
            first_tail: f1tail,
            second_family: Some(f2),
            second_min: Some(f2min),
            second_max: Some(f2max),
            second_modes: f2modes,
            second_tail: f2tail,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = resolve(Scenario::Absorbing, &parse("").unwrap()).unwrap();
        let d = ScenarioConfig::defaults(Scenario::Absorbing);
        assert_eq!(cfg.spec, d.spec);
        assert_eq!(cfg.stepper, d.stepper);
    }

    #[test]
    fn overrides_apply() {
        let text = r#"
            seed = 4
            [problem]
            m = 3.0
            current = 2.0
            area = 4.0
            [grid]
            dim = 2
            nx = 10
            ny = 12
            [material]
            family = "cubic-affine"
            cubic = 2.0
            [initial]
            family = "bump"
            amplitude = 3.0
            [stepper]
            dt = 0.5
            linearization = "frozen-coefficient"
        "#;
        let cfg = resolve(Scenario::Simulate, &parse(text).unwrap()).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.spec.m, 3.0);
        assert_eq!(cfg.spec.kappa, 0.25);
        assert_eq!(cfg.spec.domain, Domain::Rectangle { lx: 1.0, ly: 1.0, nx: 10, ny: 12 });
        assert!(matches!(cfg.spec.material, MaterialLaw::CubicAffine { cubic, .. } if cubic == 2.0));
        assert!(matches!(cfg.spec.initial, InitialData::Bump { amplitude, .. } if amplitude == 3.0));
        assert_eq!(cfg.stepper.linearization, Linearization::FrozenCoefficient);
    }

    #[test]
    fn errors_are_reported() {
        assert!(parse("bogus = 1").is_err());
        assert!(parse("[problem]\nm = \"two\"").is_err());
        let f = parse("[problem]\nm = 1.5").unwrap();
        assert!(resolve(Scenario::Simulate, &f).is_err());
        let f = parse("scenario = \"mms\"").unwrap();
        assert!(resolve(Scenario::Simulate, &f).is_err());
        let f = parse("[material]\nfamily = \"quartic\"").unwrap();
        assert!(resolve(Scenario::Simulate, &f).is_err());
    }

    #[test]
    fn echo_round_trips() {
        for sc in Scenario::ALL {
            let cfg = ScenarioConfig::defaults(sc);
            let text = toml::to_string(&echo(sc, &cfg)).unwrap();
            let back = resolve(sc, &parse(&text).unwrap()).unwrap();
            assert_eq!(back.spec, cfg.spec, "{sc}");
            assert_eq!(back.stepper, cfg.stepper);
            assert_eq!(back.attractor, cfg.attractor);
            assert_eq!(back.mms, cfg.mms);
        }
    }
}
