//! Time stepping for the regularized problem.
//!
//! One backward Euler step solves, node by node,
//!
//! ```text
//! alpha(v+) - alpha(v) = dt * (A_r(v+) + c f(v+) + g)
//! ```
//!
//! with `A_r` the regularized m-Laplacian, `g` the optional manufactured
//! forcing and `c = kappa / (int f)^2` the nonlocal coefficient. Newton solves
//! the system with `c` frozen; outer Picard sweeps recompute `c` from the new
//! iterate until it stops changing.

use crate::error::{Error, Result};
use crate::grid::{integrate, integrate_composed, norms, Field, Grid};
use crate::linalg::{solve_dense, BandedMatrix};
use crate::model::{nonlocal_coefficient, ProblemSpec};
use crate::operator::{Linearization, MLaplacian};

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    /// Tolerance on the scaled max-norm residual.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// One sweep means the nonlocal coefficient is fully lagged.
    pub picard_max_iters: usize,
    pub picard_tol: f64,
    pub dt_halving_max: usize,
    pub linearization: Linearization,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            newton_tol: 1e-10,
            newton_max_iters: 50,
            picard_max_iters: 20,
            picard_tol: 1e-10,
            dt_halving_max: 6,
            linearization: Linearization::NormalExact,
        }
    }
}

impl StepperConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.newton_tol > 0.0
            && self.newton_tol < 1.0
            && self.picard_tol > 0.0
            && self.picard_tol < 1.0
            && self.newton_max_iters > 0
            && self.picard_max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid stepper configuration {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    /// Sub-step size actually used (`dt / 2^halvings`).
    pub dt: f64,
    pub newton_iters: usize,
    pub picard_iters: usize,
    pub picard_converged: bool,
    /// Largest scaled residual over the accepted sub-steps.
    pub residual: f64,
    pub halvings: usize,
    /// Nonlocal coefficient of the accepted state.
    pub nonlocal_coeff: f64,
}

/// Residual scale: keeps the Newton test meaningful when `alpha(v)` or the
/// diffusion fluxes are large.
fn residual_scale(alpha_old: &[f64], alpha_new: &[f64], dt_diffusion: &[f64]) -> f64 {
    let mx = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    1.0 + mx(alpha_old) + mx(alpha_new) + mx(dt_diffusion)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Reusable stepper for one problem; caches the face stencils.
#[derive(Clone, Debug)]
pub struct Stepper {
    spec: ProblemSpec,
    cfg: StepperConfig,
    grid: Grid,
    op: MLaplacian,
}

struct SubStep {
    values: Vec<f64>,
    newton_iters: usize,
    picard_iters: usize,
    picard_converged: bool,
    residual: f64,
    coeff: f64,
}

impl Stepper {
    pub fn new(spec: &ProblemSpec, cfg: &StepperConfig) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let grid = spec.grid()?;
        Ok(Self {
            op: MLaplacian::new(grid, spec.m, spec.reg_r),
            spec: spec.clone(),
            cfg: cfg.clone(),
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn operator(&self) -> &MLaplacian {
        &self.op
    }

    fn forcing(&self, time: f64) -> Result<Vec<f64>> {
        match &self.spec.forcing {
            Some(f) => f.evaluate(&self.spec, &self.grid, time),
            None => Ok(vec![0.0; self.grid.len()]),
        }
    }

    fn coefficient(&self, values: &[f64]) -> Result<f64> {
        if self.spec.kappa == 0.0 {
            return Ok(0.0);
        }
        let f = Field::new(self.grid, values.to_vec())?;
        nonlocal_coefficient(&self.spec, &f)
    }

    /// `alpha(w) - alpha_old - dt (A w + c f(w) + g)` and its scale.
    fn residual(&self, w: &[f64], alpha_old: &[f64], c: f64, g: &[f64], dt: f64) -> (Vec<f64>, f64) {
        let law = &self.spec.material;
        let src = &self.spec.source;
        let aw = self.op.apply_values(w);
        let alpha_new: Vec<f64> = w.iter().map(|&x| law.alpha(x)).collect();
        let dt_diff: Vec<f64> = aw.iter().map(|a| dt * a).collect();
        let res = (0..w.len())
            .map(|i| alpha_new[i] - alpha_old[i] - dt_diff[i] - dt * (c * src.f(w[i]) + g[i]))
            .collect();
        let scale = residual_scale(alpha_old, &alpha_new, &dt_diff);
        (res, scale)
    }

    /// Newton iteration with frozen `c`. Returns iterations and the scaled
    /// residual, or the scaled residual reached on failure.
    fn newton(
        &self,
        w: &mut Vec<f64>,
        alpha_old: &[f64],
        c: f64,
        g: &[f64],
        dt: f64,
    ) -> std::result::Result<(usize, f64), f64> {
        let n = w.len();
        let law = &self.spec.material;
        let src = &self.spec.source;
        let bw = self.grid.bandwidth();
        let (mut res, mut scale) = self.residual(w, alpha_old, c, g, dt);
        let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
        for it in 0..=self.cfg.newton_max_iters {
            let scaled = max_abs(&res) / scale;
            if !scaled.is_finite() {
                return Err(f64::INFINITY);
            }
            if scaled <= self.cfg.newton_tol {
                return Ok((it, scaled));
            }
            if it == self.cfg.newton_max_iters {
                return Err(scaled);
            }
            let mut jac = BandedMatrix::zeros(n, bw, bw);
            for i in 0..n {
                jac.add(i, i, law.alpha_prime(w[i]) - dt * c * src.f_prime(w[i]));
            }
            self.op.add_linearization(w, self.cfg.linearization, dt, &mut jac);
            let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
            let delta = jac.solve(&rhs).map_err(|_| scaled)?;
            let base = norm2(&res);
            let mut theta = 1.0;
            loop {
                let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, d)| a + theta * d).collect();
                let (rt, st) = self.residual(&trial, alpha_old, c, g, dt);
                let nt = norm2(&rt);
                if nt.is_finite() && nt <= (1.0 - 1e-4 * theta) * base {
                    *w = trial;
                    res = rt;
                    scale = st;
                    break;
                }
                theta *= 0.5;
                if theta < 1.0 / 1024.0 {
                    // no descent: either stalled at rounding level or diverging
                    return if max_abs(&rt) / st <= self.cfg.newton_tol {
                        *w = trial;
                        Ok((it + 1, max_abs(&rt) / st))
                    } else {
                        Err(scaled)
                    };
                }
            }
        }
        unreachable!()
    }

    fn substep(&self, old: &[f64], t_new: f64, dt: f64) -> std::result::Result<SubStep, f64> {
        let law = &self.spec.material;
        let alpha_old: Vec<f64> = old.iter().map(|&x| law.alpha(x)).collect();
        let g = self.forcing(t_new).map_err(|_| f64::NAN)?;
        let mut c = self.coefficient(old).map_err(|_| f64::NAN)?;
        let mut w = old.to_vec();
        let mut newton_iters = 0;
        let mut residual = 0.0;
        for sweep in 1..=self.cfg.picard_max_iters {
            let (its, res) = self.newton(&mut w, &alpha_old, c, &g, dt)?;
            newton_iters += its;
            residual = res;
            let c_new = self.coefficient(&w).map_err(|_| f64::NAN)?;
            let converged = (c_new - c).abs() <= self.cfg.picard_tol * c_new.abs();
            if converged || sweep == self.cfg.picard_max_iters {
                return Ok(SubStep {
                    values: w,
                    newton_iters,
                    picard_iters: sweep,
                    picard_converged: converged,
                    residual,
                    coeff: c_new,
                });
            }
            c = c_new;
        }
        Err(residual)
    }

    /// Advances `state` from `time` by `cfg.dt`-style step `dt`, halving the
    /// sub-step size when Newton fails.
    pub fn step(&self, state: &Field, time: f64, dt: f64) -> Result<(Field, StepReport)> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut worst = f64::NAN;
        'halving: for halvings in 0..=self.cfg.dt_halving_max {
            let parts = 1usize << halvings;
            let sub = dt / parts as f64;
            let mut v = state.values().to_vec();
            let mut report = StepReport {
                dt: sub,
                newton_iters: 0,
                picard_iters: 0,
                picard_converged: true,
                residual: 0.0,
                halvings,
                nonlocal_coeff: 0.0,
            };
            for k in 0..parts {
                let t_new = if k + 1 == parts {
                    time + dt
                } else {
                    time + sub * (k + 1) as f64
                };
                match self.substep(&v, t_new, sub) {
                    Ok(s) => {
                        v = s.values;
                        report.newton_iters += s.newton_iters;
                        report.picard_iters += s.picard_iters;
                        report.picard_converged &= s.picard_converged;
                        report.residual = report.residual.max(s.residual);
                        report.nonlocal_coeff = s.coeff;
                    }
                    Err(r) => {
                        worst = r;
                        continue 'halving;
                    }
                }
            }
            return Ok((Field::new(self.grid, v)?, report));
        }
        Err(Error::StepFailure {
            time,
            halvings: self.cfg.dt_halving_max,
            residual: worst,
        })
    }
}

/// One backward Euler step of size `cfg.dt` from `time`.
pub fn implicit_step(
    state: &Field,
    spec: &ProblemSpec,
    cfg: &StepperConfig,
    time: f64,
) -> Result<(Field, StepReport)> {
    Stepper::new(spec, cfg)?.step(state, time, cfg.dt)
}

/// Verification oracle for tiny grids: solves the same step with the nonlocal
/// coefficient evaluated self-consistently inside the residual, by dense
/// damped Newton with a finite-difference Jacobian, falling back to
/// coordinate-wise bisection sweeps if Newton stalls.
pub fn brute_force_step(state: &Field, spec: &ProblemSpec, dt: f64, time: f64) -> Result<Field> {
    const MAX_NODES: usize = 8;
    spec.validate()?;
    let grid = spec.grid()?;
    if state.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.len();
    if n > MAX_NODES {
        return Err(Error::InvalidSpec(format!(
            "brute-force oracle supports at most {MAX_NODES} nodes, got {n}"
        )));
    }
    let op = MLaplacian::new(grid, spec.m, spec.reg_r);
    let law = &spec.material;
    let alpha_old: Vec<f64> = state.values().iter().map(|&x| law.alpha(x)).collect();
    let g = match &spec.forcing {
        Some(f) => f.evaluate(spec, &grid, time + dt)?,
        None => vec![0.0; n],
    };
    let eval = |w: &[f64]| -> Result<(Vec<f64>, f64)> {
        let c = if spec.kappa == 0.0 {
            0.0
        } else {
            nonlocal_coefficient(spec, &Field::new(grid, w.to_vec())?)?
        };
        let aw = op.apply_values(w);
        let alpha_new: Vec<f64> = w.iter().map(|&x| law.alpha(x)).collect();
        let dt_diff: Vec<f64> = aw.iter().map(|a| dt * a).collect();
        let r = (0..n)
            .map(|i| alpha_new[i] - alpha_old[i] - dt_diff[i] - dt * (c * spec.source.f(w[i]) + g[i]))
            .collect();
        Ok((r, residual_scale(&alpha_old, &alpha_new, &dt_diff)))
    };
    let scaled = |w: &[f64]| -> Result<f64> {
        let (r, s) = eval(w)?;
        Ok(max_abs(&r) / s)
    };
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut w = state.values().to_vec();
    for _ in 0..100 {
        let (r, s) = eval(&w)?;
        if max_abs(&r) / s <= 1e-13 {
            return Field::new(grid, w);
        }
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-6 * (1.0 + w[j].abs());
            let mut p = w.clone();
            p[j] += h;
            let mut q = w.clone();
            q[j] -= h;
            let (rp, _) = eval(&p)?;
            let (rq, _) = eval(&q)?;
            for i in 0..n {
                jac[i][j] = (rp[i] - rq[i]) / (2.0 * h);
            }
        }
        let Ok(delta) = solve_dense(jac, r.iter().map(|x| -x).collect()) else {
            break;
        };
        let base = norm2(&r);
        let mut theta = 1.0;
        let mut moved = false;
        while theta > 1e-6 {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, d)| a + theta * d).collect();
            let (rt, _) = eval(&trial)?;
            if norm2(&rt) < base {
                w = trial;
                moved = true;
                break;
            }
            theta *= 0.5;
        }
        if !moved {
            break;
        }
    }

    // bisection sweeps, one coordinate at a time
    for _ in 0..500 {
        if scaled(&w)? <= 1e-13 {
            break;
        }
        for i in 0..n {
            let comp = |x: f64, w: &[f64]| -> Result<f64> {
                let mut t = w.to_vec();
                t[i] = x;
                Ok(eval(&t)?.0[i])
            };
            let f0 = comp(w[i], &w)?;
            if f0 == 0.0 {
                continue;
            }
            let mut step = 1e-3 * (1.0 + w[i].abs());
            let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
            let (mut lo, mut hi) = (w[i], w[i]);
            let mut found = false;
            for _ in 0..80 {
                let x = w[i] + dir * step;
                if comp(x, &w)?.signum() != f0.signum() {
                    if dir > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    found = true;
                    break;
                }
                if dir > 0.0 {
                    lo = x;
                } else {
                    hi = x;
                }
                step *= 2.0;
            }
            if !found {
                continue;
            }
            let flo = comp(lo, &w)?;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if comp(mid, &w)?.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            w[i] = 0.5 * (lo + hi);
        }
    }
    let res = scaled(&w)?;
    if res <= 1e-12 {
        Field::new(grid, w)
    } else {
        Err(Error::OracleFailure { residual: res })
    }
}

/// Per-step energy balance
/// `[E(v+) - E(v)]/dt + int a |grad v+|^2 - int c f(v+) v+ - int g v+`
/// with `E = int psi*(alpha(v))`; vanishes at first order in `dt`.
pub fn energy_balance_residual(
    spec: &ProblemSpec,
    old: &Field,
    new: &Field,
    dt: f64,
    time_new: f64,
) -> Result<f64> {
    let grid = *new.grid();
    let law = &spec.material;
    let op = MLaplacian::new(grid, spec.m, spec.reg_r);
    let energy = |f: &Field| {
        let e: Vec<f64> = f.values().iter().map(|&v| law.psi_star_of_alpha(v)).collect();
        integrate(&e, &grid)
    };
    let c = if spec.kappa == 0.0 {
        0.0
    } else {
        nonlocal_coefficient(spec, new)?
    };
    let g = match &spec.forcing {
        Some(f) => f.evaluate(spec, &grid, time_new)?,
        None => vec![0.0; grid.len()],
    };
    let work: Vec<f64> = new
        .values()
        .iter()
        .zip(&g)
        .map(|(&v, &gi)| (c * spec.source.f(v) + gi) * v)
        .collect();
    Ok((energy(new) - energy(old)) / dt + op.dissipation(new.values()) - integrate(&work, &grid))
}

/// One recorded sample of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordRow {
    pub step: usize,
    pub time: f64,
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
    pub lp_max: f64,
    pub w1m_seminorm: f64,
    /// `int psi*(alpha(v))`.
    pub energy_psi_star: f64,
    /// `(int ((alpha(v+) - alpha(v)) / dt)^2)^{1/2}` over the last step.
    pub dalpha_dt_l2: f64,
    pub nonlocal_coeff: f64,
    pub newton_iters: usize,
    pub picard_iters: usize,
    pub halvings: usize,
}

/// Time series of functionals for one run plus the states at record times.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub m: f64,
    pub r: f64,
    pub rows: Vec<RecordRow>,
    pub states: Vec<Field>,
    /// `dt * sum_steps int |grad v|^m`, a discrete `L^m(0,M; W^{1,m})` energy.
    pub time_integrated_seminorm: f64,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    pub fn sup_linf(&self) -> f64 {
        self.rows.iter().fold(0.0, |a, r| a.max(r.linf))
    }
}

fn record_row(
    spec: &ProblemSpec,
    state: &Field,
    step: usize,
    time: f64,
    dalpha: f64,
    report: Option<&StepReport>,
) -> Result<RecordRow> {
    let n = norms(state, spec.m);
    let law = &spec.material;
    let e: Vec<f64> = state.values().iter().map(|&v| law.psi_star_of_alpha(v)).collect();
    let coeff = match report {
        Some(r) => r.nonlocal_coeff,
        None if spec.kappa == 0.0 => 0.0,
        None => nonlocal_coefficient(spec, state)?,
    };
    Ok(RecordRow {
        step,
        time,
        linf: n.linf,
        l1: n.l1,
        l2: n.l2,
        lp_max: n.lp_max,
        w1m_seminorm: n.w1m_seminorm,
        energy_psi_star: integrate(&e, state.grid()),
        dalpha_dt_l2: dalpha,
        nonlocal_coeff: coeff,
        newton_iters: report.map_or(0, |r| r.newton_iters),
        picard_iters: report.map_or(0, |r| r.picard_iters),
        halvings: report.map_or(0, |r| r.halvings),
    })
}

/// Discrete semigroup action: steps from the initial data to `spec.horizon`,
/// recording at `0`, every requested time in `(0, M]`, and `M`.
pub fn integrate_trajectory(
    spec: &ProblemSpec,
    cfg: &StepperConfig,
    record_times: &[f64],
) -> Result<TrajectoryRecord> {
    let initial = spec.initial_field()?;
    integrate_from(spec, cfg, initial, record_times)
}

/// [`integrate_trajectory`] from an explicit initial state.
pub fn integrate_from(
    spec: &ProblemSpec,
    cfg: &StepperConfig,
    initial: Field,
    record_times: &[f64],
) -> Result<TrajectoryRecord> {
    let stepper = Stepper::new(spec, cfg)?;
    let horizon = spec.horizon;
    if let Some(bad) = record_times.iter().find(|&&t| !(0.0..=horizon).contains(&t)) {
        return Err(Error::InvalidSpec(format!("record time {bad} outside [0, {horizon}]")));
    }
    let mut targets: Vec<f64> = record_times.iter().copied().filter(|&t| t > 0.0).collect();
    targets.push(horizon);
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * horizon.max(1.0));
    targets.retain(|&t| t > 0.0);

    let law = &spec.material;
    let grid = *initial.grid();
    let mut rows = vec![record_row(spec, &initial, 0, 0.0, 0.0, None)?];
    let mut states = vec![initial.clone()];
    let mut time_integrated_seminorm = 0.0;
    let mut state = initial;
    let mut time = 0.0;
    let mut step = 0;
    for &target in &targets {
        let mut last = None;
        let mut dalpha = 0.0;
        while time < target {
            let remaining = target - time;
            // absorb a sliver at the end rather than taking a tiny step
            let dt = if remaining <= cfg.dt * (1.0 + 1e-9) {
                remaining
            } else {
                cfg.dt
            };
            let (next, report) = stepper.step(&state, time, dt).map_err(|e| match e {
                Error::StepFailure { halvings, residual, .. } => Error::StepFailure {
                    time,
                    halvings,
                    residual,
                },
                other => other,
            })?;
            let diff: Vec<f64> = next
                .values()
                .iter()
                .zip(state.values())
                .map(|(&a, &b)| ((law.alpha(a) - law.alpha(b)) / dt).powi(2))
                .collect();
            dalpha = integrate(&diff, &grid).sqrt();
            time_integrated_seminorm += dt * crate::grid::w1m_seminorm(&next, spec.m);
            state = next;
            time = if dt == remaining { target } else { time + dt };
            step += 1;
            last = Some(report);
        }
        rows.push(record_row(spec, &state, step, time, dalpha, last.as_ref())?);
        states.push(state.clone());
    }
    Ok(TrajectoryRecord {
        m: spec.m,
        r: spec.reg_r,
        rows,
        states,
        time_integrated_seminorm,
    })
}

/// Evenly spaced record times `M/k, 2M/k, ..., M`.
pub fn uniform_record_times(horizon: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| horizon * k as f64 / count as f64).collect()
}

/// `int f(v)` helper exposed for diagnostics.
pub fn source_integral(spec: &ProblemSpec, field: &Field) -> f64 {
    integrate_composed(field, |v| spec.source.f(v))
}
