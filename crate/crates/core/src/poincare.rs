//! Discrete Poincare constant: the largest `C` with
//! `C int |v|^m <= int |grad v|^m` over grid functions vanishing on the wall.
//!
//! For `m = 2` this is the smallest eigenvalue of the 3-/5-point Dirichlet
//! Laplacian, computed by inverse power iteration. For other `m` the Rayleigh
//! quotient is minimized directly: random sampling picks a start, then a
//! Laplacian-preconditioned descent with Armijo backtracking refines it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::{conjugate_gradient, dot};
use crate::operator::MLaplacian;

#[derive(Clone, Debug)]
pub struct PoincareOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Random fields sampled before descent (`m != 2`).
    pub samples: usize,
    pub seed: u64,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            max_iters: 5000,
            samples: 32,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PoincareEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Minimizing field, normalized to `int |v|^m = 1`.
    pub minimizer: Field,
}

pub fn poincare_constant(grid: &Grid, m: f64) -> Result<f64> {
    poincare_constant_with(grid, m, &PoincareOptions::default()).map(|e| e.value)
}

pub fn poincare_constant_with(grid: &Grid, m: f64, opts: &PoincareOptions) -> Result<PoincareEstimate> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::InvalidSpec(format!("Poincare exponent must exceed 1, got {m}")));
    }
    if m == 2.0 {
        inverse_iteration(grid, opts)
    } else {
        rayleigh_descent(grid, m, opts)
    }
}

/// Applies the positive 3-/5-point operator `-Delta_h`.
fn negative_laplacian(op: &MLaplacian) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |x: &[f64], y: &mut [f64]| {
        let a = op.apply_values(x);
        for (yi, ai) in y.iter_mut().zip(a) {
            *yi = -ai;
        }
    }
}

/// Smallest eigenvalue of the discrete Dirichlet Laplacian.
pub fn inverse_iteration(grid: &Grid, opts: &PoincareOptions) -> Result<PoincareEstimate> {
    let op = MLaplacian::new(*grid, 2.0, 0.0);
    let apply = negative_laplacian(&op);
    let n = grid.len();
    let w = grid.node_weight();
    let rq = |y: &[f64]| op.dissipation(y) / (w * dot(y, y));

    // positive start: overlaps the positive ground state
    let mut y = vec![1.0; n];
    let mut lambda = rq(&y);
    let mut x = vec![0.0; n];
    let cg_cap = 20 * n + 100;
    for it in 1..=opts.max_iters {
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / lambda;
        }
        conjugate_gradient(&apply, &y, &mut x, 1e-13, cg_cap)?;
        let norm = dot(&x, &x).sqrt();
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = xi / norm;
        }
        let next = rq(&y);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= opts.rel_tol * lambda {
            let scale = 1.0 / (w * dot(&y, &y)).sqrt();
            let minimizer = Field::new(*grid, y.iter().map(|v| v * scale).collect())?;
            return Ok(PoincareEstimate {
                value: lambda,
                iterations: it,
                minimizer,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "inverse power iteration",
        iterations: opts.max_iters,
        last_change: lambda,
    })
}

struct Quotient<'a> {
    op: &'a MLaplacian,
    m: f64,
    weight: f64,
}

impl Quotient<'_> {
    fn denominator(&self, v: &[f64]) -> f64 {
        self.weight * v.iter().map(|x| x.abs().powf(self.m)).sum::<f64>()
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.op.seminorm_and_gradient(v).0 / self.denominator(v)
    }

    fn value_and_gradient(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let (num, gnum) = self.op.seminorm_and_gradient(v);
        let den = self.denominator(v);
        let q = num / den;
        let grad = v
            .iter()
            .zip(&gnum)
            .map(|(&x, &gn)| {
                let gd = self.weight * self.m * x.abs().powf(self.m - 2.0) * x;
                (gn - q * gd) / den
            })
            .collect();
        (q, grad)
    }

    fn normalize(&self, v: &mut [f64]) {
        let s = self.denominator(v).powf(-1.0 / self.m);
        v.iter_mut().for_each(|x| *x *= s);
    }
}

fn random_start(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let modes = 4;
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lead = rng.gen_range(0.5..1.5);
    let dim = grid.dim();
    grid.sample(|x| {
        let mode = |k: usize| -> f64 {
            (0..dim)
                .map(|d| ((k + 1) as f64 * std::f64::consts::PI * x[d] / grid.extent(d)).sin())
                .product()
        };
        lead * mode(0) + coeffs.iter().enumerate().map(|(k, c)| 0.3 * c * mode(k + 1)).sum::<f64>()
    })
    .into_values()
}

/// Direct minimization of `int |grad v|^m / int |v|^m`.
pub fn rayleigh_descent(grid: &Grid, m: f64, opts: &PoincareOptions) -> Result<PoincareEstimate> {
    let op = MLaplacian::new(*grid, m, 0.0);
    let lap = MLaplacian::new(*grid, 2.0, 0.0);
    let precond = negative_laplacian(&lap);
    let quotient = Quotient {
        op: &op,
        m,
        weight: grid.node_weight(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = random_start(grid, &mut rng);
    let mut best_q = quotient.value(&best);
    for _ in 1..opts.samples.max(1) {
        let cand = random_start(grid, &mut rng);
        let q = quotient.value(&cand);
        if q < best_q {
            best = cand;
            best_q = q;
        }
    }
    let mut v = best;
    quotient.normalize(&mut v);

    let n = grid.len();
    let cg_cap = 20 * n + 100;
    let mut step = 1.0;
    let mut quiet = 0;
    let mut last_change = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let (q, g) = quotient.value_and_gradient(&v);
        let mut d = vec![0.0; n];
        conjugate_gradient(&precond, &g, &mut d, 1e-10, cg_cap)?;
        d.iter_mut().for_each(|x| *x = -*x);
        let slope = dot(&g, &d);
        if slope >= 0.0 {
            // preconditioned gradient vanished to rounding
            return finish(grid, v, q, it);
        }
        let scale = dot(&v, &v).sqrt() / dot(&d, &d).sqrt();
        let mut accepted = None;
        let mut tau = step;
        while tau * scale > 1e-14 {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + tau * scale * b).collect();
            let qt = quotient.value(&trial);
            if qt <= q + 1e-4 * tau * scale * slope {
                accepted = Some((trial, qt));
                break;
            }
            tau *= 0.5;
        }
        let Some((mut next, qn)) = accepted else {
            return finish(grid, v, q, it);
        };
        step = (2.0 * tau).min(1.0);
        quotient.normalize(&mut next);
        v = next;
        last_change = (q - qn) / q;
        if last_change <= opts.rel_tol {
            quiet += 1;
            if quiet >= 3 {
                return finish(grid, v, qn, it);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "Rayleigh quotient descent",
        iterations: opts.max_iters,
        last_change,
    })
}

fn finish(grid: &Grid, v: Vec<f64>, value: f64, iterations: usize) -> Result<PoincareEstimate> {
    Ok(PoincareEstimate {
        value,
        iterations,
        minimizer: Field::new(*grid, v)?,
    })
}
