//! Constitutive laws, problem description and the regularization of data.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{integrate_composed, Field, Grid};

/// Smooth compactly supported bump `exp(1 - 1/(1 - x^2))` on `(-1, 1)`,
/// equal to 1 at the origin.
pub fn bump(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

pub fn bump_prime(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        0.0
    } else {
        bump(x) * (-2.0 * x / (q * q))
    }
}

/// `max |bump'|`, located by golden-section search on `(0, 1)` where
/// `|bump'|` is unimodal.
pub fn bump_prime_max() -> f64 {
    static MAX: OnceLock<f64> = OnceLock::new();
    *MAX.get_or_init(|| {
        let x = golden_max(|x| -bump_prime(x), 1e-6, 1.0 - 1e-6);
        -bump_prime(x)
    })
}

/// Maximizer of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// The increasing nonlinearity `alpha` of the time derivative term.
///
/// Every family is C^1 with `alpha(0) = 0`, closed-form derivative and
/// closed-form antiderivative `psi`, and satisfies
/// `lambda_low <= alpha' <= lip_l1` on the whole line.
#[derive(Clone, Debug, PartialEq)]
pub enum MaterialLaw {
    /// `alpha(t) = t`.
    Identity,
    /// Derivative ramps linearly from `slope_low` to `slope_high` across
    /// `[breakpoint - half_width, breakpoint + half_width]`.
    SmoothedPiecewise {
        slope_low: f64,
        slope_high: f64,
        breakpoint: f64,
        half_width: f64,
    },
    /// `alpha(t) = linear t + cubic t^3` for `|t| <= cutoff`, continued by its
    /// tangent lines beyond the cutoff.
    CubicAffine { linear: f64, cubic: f64, cutoff: f64 },
}

impl MaterialLaw {
    pub fn family(&self) -> &'static str {
        match self {
            MaterialLaw::Identity => "identity",
            MaterialLaw::SmoothedPiecewise { .. } => "smoothed-piecewise",
            MaterialLaw::CubicAffine { .. } => "cubic-affine",
        }
    }

    /// `t + t^3` up to `|t| = 4`.
    pub fn default_cubic() -> Self {
        MaterialLaw::CubicAffine {
            linear: 1.0,
            cubic: 1.0,
            cutoff: 4.0,
        }
    }

    /// Slope 1 below zero, slope 3 above 1/2, ramp of half width 1/4.
    pub fn default_piecewise() -> Self {
        MaterialLaw::SmoothedPiecewise {
            slope_low: 1.0,
            slope_high: 3.0,
            breakpoint: 0.5,
            half_width: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("{}: {msg}", self.family())));
        match *self {
            MaterialLaw::Identity => Ok(()),
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                half_width,
                breakpoint,
            } => {
                if !(slope_low > 0.0 && slope_high > 0.0) {
                    return bad("slopes must be positive");
                }
                if !(half_width > 0.0 && breakpoint.is_finite()) {
                    return bad("ramp half width must be positive");
                }
                Ok(())
            }
            MaterialLaw::CubicAffine {
                linear,
                cubic,
                cutoff,
            } => {
                if !(linear > 0.0 && cubic >= 0.0 && cutoff > 0.0) {
                    return bad("need linear > 0, cubic >= 0, cutoff > 0");
                }
                Ok(())
            }
        }
    }

    pub fn alpha(&self, t: f64) -> f64 {
        match *self {
            MaterialLaw::Identity => t,
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                breakpoint,
                half_width,
            } => {
                let p1 = |t: f64| {
                    slope_low * t + (slope_high - slope_low) * ramp1(t, breakpoint, half_width)
                };
                p1(t) - p1(0.0)
            }
            MaterialLaw::CubicAffine {
                linear,
                cubic,
                cutoff,
            } => {
                let a = t.abs();
                let val = if a <= cutoff {
                    linear * a + cubic * a * a * a
                } else {
                    let at = linear * cutoff + cubic * cutoff.powi(3);
                    at + (linear + 3.0 * cubic * cutoff * cutoff) * (a - cutoff)
                };
                val.copysign(t)
            }
        }
    }

    pub fn alpha_prime(&self, t: f64) -> f64 {
        match *self {
            MaterialLaw::Identity => 1.0,
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                breakpoint,
                half_width,
            } => {
                let s = ((t - (breakpoint - half_width)) / (2.0 * half_width)).clamp(0.0, 1.0);
                slope_low + (slope_high - slope_low) * s
            }
            MaterialLaw::CubicAffine {
                linear,
                cubic,
                cutoff,
            } => {
                let a = t.abs().min(cutoff);
                linear + 3.0 * cubic * a * a
            }
        }
    }

    /// `psi(t) = int_0^t alpha`.
    pub fn psi(&self, t: f64) -> f64 {
        match *self {
            MaterialLaw::Identity => 0.5 * t * t,
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                breakpoint,
                half_width,
            } => {
                let p1_0 = (slope_high - slope_low) * ramp1(0.0, breakpoint, half_width);
                let p2 = |t: f64| {
                    0.5 * slope_low * t * t
                        + (slope_high - slope_low) * ramp2(t, breakpoint, half_width)
                };
                p2(t) - p2(0.0) - p1_0 * t
            }
            MaterialLaw::CubicAffine {
                linear,
                cubic,
                cutoff,
            } => {
                let a = t.abs();
                if a <= cutoff {
                    0.5 * linear * a * a + 0.25 * cubic * a.powi(4)
                } else {
                    let psi_c = 0.5 * linear * cutoff * cutoff + 0.25 * cubic * cutoff.powi(4);
                    let alpha_c = linear * cutoff + cubic * cutoff.powi(3);
                    let slope = linear + 3.0 * cubic * cutoff * cutoff;
                    let d = a - cutoff;
                    psi_c + alpha_c * d + 0.5 * slope * d * d
                }
            }
        }
    }

    /// `psi*(alpha(t)) = t alpha(t) - psi(t)`, the energy density.
    pub fn psi_star_of_alpha(&self, t: f64) -> f64 {
        t * self.alpha(t) - self.psi(t)
    }

    /// Legendre transform `psi*(y) = sup_s { s y - psi(s) }` evaluated from
    /// its definition by golden-section maximization over `s`.
    pub fn legendre_conjugate(&self, y: f64) -> f64 {
        let reach = y.abs() / self.lambda_low() + 1.0;
        let s = golden_max(|s| s * y - self.psi(s), -reach, reach);
        s * y - self.psi(s)
    }

    /// `alpha^{-1}(y)` by safeguarded Newton iteration.
    pub fn inverse(&self, y: f64) -> f64 {
        if let MaterialLaw::Identity = self {
            return y;
        }
        let reach = y.abs() / self.lambda_low() + 1.0;
        let (mut lo, mut hi) = (-reach, reach);
        let mut t = 0.0;
        for _ in 0..200 {
            let r = self.alpha(t) - y;
            if r == 0.0 {
                return t;
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - r / self.alpha_prime(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    /// Lower bound `lambda` of `alpha'`.
    pub fn lambda_low(&self) -> f64 {
        match *self {
            MaterialLaw::Identity => 1.0,
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                ..
            } => slope_low.min(slope_high),
            MaterialLaw::CubicAffine { linear, .. } => linear,
        }
    }

    /// Lipschitz constant `L1` of `alpha`.
    pub fn lip_l1(&self) -> f64 {
        match *self {
            MaterialLaw::Identity => 1.0,
            MaterialLaw::SmoothedPiecewise {
                slope_low,
                slope_high,
                ..
            } => slope_low.max(slope_high),
            MaterialLaw::CubicAffine {
                linear,
                cubic,
                cutoff,
            } => linear + 3.0 * cubic * cutoff * cutoff,
        }
    }

    /// Dense-sample check of the structural hypotheses on `[-radius, radius]`.
    pub fn check_hypotheses(&self, radius: f64, samples: usize) -> Result<()> {
        self.validate()?;
        if self.alpha(0.0) != 0.0 {
            return Err(Error::InvalidSpec(format!("{}: alpha(0) != 0", self.family())));
        }
        let (lam, lip) = (self.lambda_low(), self.lip_l1());
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=samples {
            let t = -radius + 2.0 * radius * k as f64 / samples as f64;
            let d = self.alpha_prime(t);
            let a = self.alpha(t);
            if d < lam * (1.0 - 1e-14) || d > lip * (1.0 + 1e-14) || a <= prev {
                return Err(Error::InvalidSpec(format!(
                    "{}: monotonicity or derivative bounds fail at t = {t}",
                    self.family()
                )));
            }
            prev = a;
        }
        Ok(())
    }
}

// First and second antiderivatives of the unit ramp rising on [b - w, b + w].
fn ramp1(t: f64, b: f64, w: f64) -> f64 {
    let (lo, hi) = (b - w, b + w);
    if t <= lo {
        0.0
    } else if t <= hi {
        (t - lo).powi(2) / (4.0 * w)
    } else {
        w + (t - hi)
    }
}

fn ramp2(t: f64, b: f64, w: f64) -> f64 {
    let (lo, hi) = (b - w, b + w);
    if t <= lo {
        0.0
    } else if t <= hi {
        (t - lo).powi(3) / (12.0 * w)
    } else {
        let d = t - hi;
        2.0 * w * w / 3.0 + w * d + 0.5 * d * d
    }
}

/// The resistance law `f`: a positive floor `sigma` plus a bounded part of
/// compact support, so `sigma <= f <= f_max`.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceLaw {
    ConstantFloor {
        sigma: f64,
    },
    /// `sigma + amplitude * bump((s - center) / width)`.
    BumpOverFloor {
        sigma: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl SourceLaw {
    /// Unit floor with a unit bump of half width 1 centered at 0.
    pub fn default_bump() -> Self {
        SourceLaw::BumpOverFloor {
            sigma: 1.0,
            amplitude: 1.0,
            center: 0.0,
            width: 1.0,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            SourceLaw::ConstantFloor { .. } => "constant-floor",
            SourceLaw::BumpOverFloor { .. } => "bump-over-floor",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceLaw::ConstantFloor { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            SourceLaw::BumpOverFloor {
                sigma,
                amplitude,
                center,
                width,
            } if sigma > 0.0 && amplitude >= 0.0 && width > 0.0 && center.is_finite() => Ok(()),
            _ => Err(Error::InvalidSpec(format!(
                "{}: need sigma > 0, amplitude >= 0, width > 0",
                self.family()
            ))),
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        match *self {
            SourceLaw::ConstantFloor { sigma } => sigma,
            SourceLaw::BumpOverFloor {
                sigma,
                amplitude,
                center,
                width,
            } => sigma + amplitude * bump((s - center) / width),
        }
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        match *self {
            SourceLaw::ConstantFloor { .. } => 0.0,
            SourceLaw::BumpOverFloor {
                amplitude,
                center,
                width,
                ..
            } => amplitude * bump_prime((s - center) / width) / width,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            SourceLaw::ConstantFloor { sigma } | SourceLaw::BumpOverFloor { sigma, .. } => sigma,
        }
    }

    pub fn f_max(&self) -> f64 {
        match *self {
            SourceLaw::ConstantFloor { sigma } => sigma,
            SourceLaw::BumpOverFloor {
                sigma, amplitude, ..
            } => sigma + amplitude,
        }
    }

    /// Lipschitz constant of `f`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            SourceLaw::ConstantFloor { .. } => 0.0,
            SourceLaw::BumpOverFloor {
                amplitude, width, ..
            } => amplitude * bump_prime_max() / width * (1.0 + 1e-9),
        }
    }

    /// Constant `L2` with `|f(u) - f(v)| <= L2 |alpha(u) - alpha(v)|`; since
    /// `alpha' >= lambda`, `Lip(f) / lambda` suffices.
    pub fn lip_l2(&self, material: &MaterialLaw) -> f64 {
        self.lipschitz() / material.lambda_low()
    }

    /// Dense-sample check of the floor, ceiling and the `L2` condition.
    pub fn check_hypotheses(&self, material: &MaterialLaw, radius: f64, samples: usize) -> Result<()> {
        self.validate()?;
        let l2 = self.lip_l2(material);
        let pts: Vec<f64> = (0..=samples)
            .map(|k| -radius + 2.0 * radius * k as f64 / samples as f64)
            .collect();
        for &s in &pts {
            let v = self.f(s);
            if v < self.sigma() || v > self.f_max() {
                return Err(Error::InvalidSpec(format!("f({s}) = {v} outside [sigma, f_max]")));
            }
        }
        for w in pts.windows(2) {
            let df = (self.f(w[1]) - self.f(w[0])).abs();
            let da = (material.alpha(w[1]) - material.alpha(w[0])).abs();
            if df > l2 * da * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::InvalidSpec(format!(
                    "|f(u)-f(v)| <= L2 |alpha(u)-alpha(v)| fails near s = {}",
                    w[0]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Interval { length: f64, cells: usize },
    Rectangle { lx: f64, ly: f64, nx: usize, ny: usize },
}

impl Domain {
    pub fn grid(&self) -> Result<Grid> {
        match *self {
            Domain::Interval { length, cells } => Grid::interval(length, cells),
            Domain::Rectangle { lx, ly, nx, ny } => Grid::rectangle(lx, ly, nx, ny),
        }
    }

    pub fn min_extent(&self) -> f64 {
        match *self {
            Domain::Interval { length, .. } => length,
            Domain::Rectangle { lx, ly, .. } => lx.min(ly),
        }
    }
}

/// Initial-field descriptor, sampled on a grid by [`InitialData::sample`].
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Zero,
    /// Constant in the interior (a step down to the Dirichlet zero at the wall).
    Constant { value: f64 },
    /// `amplitude * prod_d sin(pi x_d / l_d)`.
    Sine { amplitude: f64 },
    /// `amplitude * bump(|x - center| / width)`, center in physical coordinates.
    Bump { amplitude: f64, center: [f64; 2], width: f64 },
    /// `amplitude` on `from <= x_0 <= to`, zero elsewhere.
    Step { amplitude: f64, from: f64, to: f64 },
    /// `sum_k c_k prod_d sin((k+1) pi x_d / l_d)`.
    Fourier { coefficients: Vec<f64> },
    /// Explicit interior values.
    Nodal { values: Vec<f64> },
    /// Zero-extended discrete convolution of `inner` with a normalized bump of
    /// the given physical half width.
    Mollified { inner: Box<InitialData>, half_width: f64 },
}

impl InitialData {
    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        let dim = grid.dim();
        let ext = [grid.extent(0), grid.extent(1)];
        let sines = move |x: [f64; 2], k: f64| -> f64 {
            (0..dim).map(|d| (k * PI * x[d] / ext[d]).sin()).product()
        };
        let field = match self {
            InitialData::Zero => grid.zeros(),
            InitialData::Constant { value } => grid.sample(|_| *value),
            InitialData::Sine { amplitude } => grid.sample(|x| amplitude * sines(x, 1.0)),
            InitialData::Bump {
                amplitude,
                center,
                width,
            } => grid.sample(|x| {
                let r2: f64 = (0..dim).map(|d| (x[d] - center[d]).powi(2)).sum();
                amplitude * bump(r2.sqrt() / width)
            }),
            InitialData::Step { amplitude, from, to } => {
                grid.sample(|x| if x[0] >= *from && x[0] <= *to { *amplitude } else { 0.0 })
            }
            InitialData::Fourier { coefficients } => grid.sample(|x| {
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * sines(x, (k + 1) as f64))
                    .sum()
            }),
            InitialData::Nodal { values } => return Field::new(*grid, values.clone()),
            InitialData::Mollified { inner, half_width } => {
                let base = inner.sample(grid)?;
                return Ok(mollify(&base, *half_width));
            }
        };
        Field::new(*grid, field.into_values())
    }
}

fn mollify(field: &Field, half_width: f64) -> Field {
    let grid = *field.grid();
    let dim = grid.dim();
    let reach: Vec<isize> = (0..dim)
        .map(|d| (half_width / grid.spacing(d)).ceil() as isize)
        .collect();
    if reach.iter().all(|&k| k <= 1) {
        // kernel narrower than one cell: no neighbour gets weight
        return field.clone();
    }
    let weight = |d: usize, k: isize| bump(k as f64 * grid.spacing(d) / half_width);
    let (kx, ky) = (reach[0], if dim == 2 { reach[1] } else { 0 });
    let mut total = 0.0;
    for b in -ky..=ky {
        for a in -kx..=kx {
            total += weight(0, a) * if dim == 2 { weight(1, b) } else { 1.0 };
        }
    }
    let v = field.values();
    let nx = grid.cells(0) as isize;
    let ny = if dim == 2 { grid.cells(1) as isize } else { 1 };
    let bound = field.max_abs() + 1.0;
    let out = grid.sample(|_| 0.0);
    let mut out = out.into_values();
    for (k, o) in out.iter_mut().enumerate() {
        let [x, y] = grid.coords(k);
        let i = (x / grid.spacing(0)).round() as isize;
        let j = if dim == 2 {
            (y / grid.spacing(1)).round() as isize
        } else {
            0
        };
        let mut acc = 0.0;
        for b in -ky..=ky {
            for a in -kx..=kx {
                let (ii, jj) = (i + a, j + b);
                if ii <= 0 || ii >= nx || (dim == 2 && (jj <= 0 || jj >= ny)) {
                    continue;
                }
                if let Some(idx) = grid.index(ii as usize, jj as usize) {
                    acc += weight(0, a) * if dim == 2 { weight(1, b) } else { 1.0 } * v[idx];
                }
            }
        }
        *o = (acc / total).clamp(-bound, bound);
    }
    Field::new(grid, out).expect("mollified values are finite")
}

/// Extra source used only for manufactured-solution verification runs.
#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    /// Makes `v(x, s) = exp(-s) prod_d sin(pi x_d / l_d)` an exact solution of
    /// the continuous problem with `alpha = id`, `m = 2`.
    DecayingSine,
}

impl Forcing {
    pub fn exact(&self, grid: &Grid, time: f64) -> Field {
        match self {
            Forcing::DecayingSine => {
                let ext = [grid.extent(0), grid.extent(1)];
                let dim = grid.dim();
                grid.sample(|x| {
                    (-time).exp() * (0..dim).map(|d| (PI * x[d] / ext[d]).sin()).product::<f64>()
                })
            }
        }
    }

    /// Nodal forcing at `time`: the manufactured residual minus the nonlocal
    /// source evaluated on the exact solution.
    pub fn evaluate(&self, spec: &ProblemSpec, grid: &Grid, time: f64) -> Result<Vec<f64>> {
        match self {
            Forcing::DecayingSine => {
                let exact = self.exact(grid, time);
                let k2: f64 = (0..grid.dim()).map(|d| (PI / grid.extent(d)).powi(2)).sum();
                let c = nonlocal_coefficient(spec, &exact)?;
                Ok(exact
                    .values()
                    .iter()
                    .map(|&u| (k2 - 1.0) * u - c * spec.source.f(u))
                    .collect())
            }
        }
    }
}

/// Complete description of one run of the (regularized) problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    /// Diffusion exponent, `m >= 2`.
    pub m: f64,
    /// Source intensity; zero switches the source off.
    pub kappa: f64,
    pub domain: Domain,
    /// Final time `M`.
    pub horizon: f64,
    pub material: MaterialLaw,
    pub source: SourceLaw,
    /// Regularization `r >= 0` of the diffusion coefficient.
    pub reg_r: f64,
    pub initial: InitialData,
    pub forcing: Option<Forcing>,
    /// Current `I` and area `B` when `kappa` was set as `I^2 / B^2`.
    pub current_i: Option<f64>,
    pub area_b: Option<f64>,
}

impl ProblemSpec {
    /// A 1D problem with identity law, unit floor source and zero data.
    pub fn interval(length: f64, cells: usize, m: f64) -> Self {
        Self {
            m,
            kappa: 1.0,
            domain: Domain::Interval { length, cells },
            horizon: 1.0,
            material: MaterialLaw::Identity,
            source: SourceLaw::ConstantFloor { sigma: 1.0 },
            reg_r: 0.0,
            initial: InitialData::Zero,
            forcing: None,
            current_i: None,
            area_b: None,
        }
    }

    /// Sets `kappa = I^2 / B^2` and records both.
    pub fn with_current(mut self, current: f64, area: f64) -> Self {
        self.kappa = current * current / (area * area);
        self.current_i = Some(current);
        self.area_b = Some(area);
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        self.domain.grid()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 2.0 && self.m.is_finite()) {
            return Err(Error::InvalidSpec(format!("m must be >= 2, got {}", self.m)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidSpec(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.reg_r >= 0.0 && self.reg_r.is_finite()) {
            return Err(Error::InvalidSpec(format!("r must be >= 0, got {}", self.reg_r)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidSpec(format!("horizon must be >= 0, got {}", self.horizon)));
        }
        if let Some(Forcing::DecayingSine) = self.forcing {
            if self.material != MaterialLaw::Identity || self.m != 2.0 {
                return Err(Error::InvalidSpec(
                    "manufactured forcing requires alpha = id and m = 2".into(),
                ));
            }
        }
        self.material.validate()?;
        self.source.validate()?;
        self.grid().map(|_| ())
    }

    pub fn initial_field(&self) -> Result<Field> {
        self.initial.sample(&self.grid()?)
    }
}

/// `kappa / (int f(v))^2`, the scalar multiplying `f(v)` pointwise.
pub fn nonlocal_coefficient(spec: &ProblemSpec, field: &Field) -> Result<f64> {
    let integral = integrate_composed(field, |v| spec.source.f(v));
    let threshold = 0.5 * spec.source.sigma() * field.grid().measure();
    if !(integral >= threshold) {
        return Err(Error::DenominatorTooSmall {
            integral,
            threshold,
        });
    }
    Ok(spec.kappa / (integral * integral))
}

/// Regularized problem: sets `reg_r` and mollifies the initial data with a
/// kernel of half width `r * min extent`. The built-in laws are already C^1
/// (material) and C^infinity (source), so they are returned unchanged.
pub fn regularize(spec: &ProblemSpec, r: f64) -> Result<ProblemSpec> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidR(r));
    }
    let mut out = spec.clone();
    out.reg_r = r;
    let inner = match &spec.initial {
        InitialData::Mollified { inner, .. } => inner.clone(),
        other => Box::new(other.clone()),
    };
    out.initial = InitialData::Mollified {
        inner,
        half_width: r * spec.domain.min_extent(),
    };
    Ok(out)
}
