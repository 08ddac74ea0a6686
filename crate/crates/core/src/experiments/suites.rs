//! Randomized property suites for the inequalities and the step oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Outcome;
use crate::analysis::ode::integrate_scalar;
use crate::analysis::{ghidaglia_violation, gronwall_check, tartar_check, Verdict};
use crate::grid::Field;
use crate::model::{MaterialLaw, ProblemSpec, SourceLaw};
use crate::solver::{brute_force_step, implicit_step, StepperConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySettings {
    pub tartar_samples: usize,
    pub legendre_samples: usize,
    pub ghidaglia_draws: usize,
    pub gronwall_draws: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            tartar_samples: 100_000,
            legendre_samples: 10_000,
            ghidaglia_draws: 1_000,
            gronwall_draws: 200,
        }
    }
}

pub fn verify_suite(settings: &VerifySettings, seed: u64) -> Outcome {
    let mut verdicts = tartar_suite(settings.tartar_samples, seed);
    verdicts.extend(legendre_suite(settings.legendre_samples, seed.wrapping_add(1)));
    verdicts.push(ghidaglia_suite(settings.ghidaglia_draws, seed.wrapping_add(2)));
    verdicts.push(gronwall_suite(settings.gronwall_draws, seed.wrapping_add(3)));
    Outcome {
        verdicts,
        ..Outcome::default()
    }
}

/// Random vector whose scale spans several decades.
fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}

/// Pairs mixing generic, nearly equal, antipodal and zero configurations.
fn random_pair(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let a = random_vector(rng, dim);
    let b = match rng.gen_range(0..4) {
        0 => random_vector(rng, dim),
        1 => {
            let eps = 10f64.powf(rng.gen_range(-8.0..-1.0));
            a.iter().map(|x| x * (1.0 + eps * rng.gen_range(-1.0..1.0))).collect()
        }
        2 => {
            let t = rng.gen_range(0.1..10.0);
            a.iter().map(|x| -t * x).collect()
        }
        _ => vec![0.0; dim],
    };
    (a, b)
}

/// Monotonicity bound for `|a|^{m-2} a`: `samples` draws over
/// `m in {2, 2.5, 3, 4, 6}` and dimensions 1-3, plus a formula check of
/// the sub-quadratic branch at `m in {1.3, 1.7}`.
pub fn tartar_suite(samples: usize, seed: u64) -> Vec<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponents = [2.0, 2.5, 3.0, 4.0, 6.0];
    let mut verdicts = Vec::new();
    let mut run = |label: &str, ms: &[f64], count: usize, rng: &mut ChaCha8Rng| {
        let mut violations = 0usize;
        let mut worst = f64::INFINITY;
        for k in 0..count {
            let m = ms[k % ms.len()];
            let dim = 1 + (k / ms.len()) % 3;
            let (a, b) = random_pair(rng, dim);
            let o = tartar_check(&a, &b, m);
            if !o.holds {
                violations += 1;
            }
            if o.rhs > 0.0 {
                worst = worst.min(o.lhs / o.rhs);
            }
        }
        verdicts.push(Verdict::le(
            label,
            format!("samples={count} m={} dims=1-3 min_ratio={worst}", super::fmt_list(ms)),
            violations as f64,
            0.0,
        ));
    };
    run("tartar", &exponents, samples, &mut rng);
    run("tartar.subquadratic", &[1.3, 1.7], (samples / 10).max(1), &mut rng);
    verdicts
}

/// `|psi*(alpha(t)) - t alpha(t) + psi(t)| <= 1e-10 (1 + |t|^4)` with
/// `psi*` from its sup definition, for every built-in material family.
pub fn legendre_suite(samples: usize, seed: u64) -> Vec<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let laws = [
        MaterialLaw::Identity,
        MaterialLaw::default_cubic(),
        MaterialLaw::default_piecewise(),
    ];
    laws.iter()
        .map(|law| {
            let mut worst = 0.0_f64;
            for _ in 0..samples {
                let t: f64 = rng.gen_range(-8.0..8.0);
                let err = (law.legendre_conjugate(law.alpha(t)) - t * law.alpha(t) + law.psi(t)).abs();
                worst = worst.max(err / (1e-10 * (1.0 + t.powi(4))));
            }
            Verdict::le(
                format!("legendre.{}", law.family()),
                format!("samples={samples} t=[-8,8] lhs=max err/(1e-10(1+t^4))"),
                worst,
                1.0,
            )
        })
        .collect()
}

/// Envelope domination for `z' = eta - delta z^q` over random parameters.
pub fn ghidaglia_suite(draws: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times: Vec<f64> = (0..40).map(|k| 1e-3 * 10f64.powf(4.0 * k as f64 / 39.0)).collect();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..draws {
        let delta = 10f64.powf(rng.gen_range(-1.0..1.0));
        let eta = rng.gen_range(0.0..5.0);
        let q = rng.gen_range(1.2..4.0);
        let z0 = if k % 10 == 0 { 0.0 } else { 10f64.powf(rng.gen_range(-2.0..2.0)) };
        worst = worst.max(ghidaglia_violation(delta, eta, q, z0, &times));
    }
    Verdict::le(
        "ghidaglia",
        format!("draws={draws} s=[1e-3,10] lhs=max(z - envelope)"),
        worst,
        1e-8,
    )
}

/// Gronwall bound on integrated solutions of
/// `z' = h(s) z + g(s) - d z` with `h, g, d >= 0`.
pub fn gronwall_suite(draws: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times: Vec<f64> = (0..=400).map(|k| 3.0 * k as f64 / 400.0).collect();
    let mut failures = 0usize;
    for _ in 0..draws {
        let (a, b, w) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.5..3.0));
        let (c, w2, d) = (rng.gen_range(0.0..2.0), rng.gen_range(0.5..3.0), rng.gen_range(0.0..1.0));
        let z0 = rng.gen_range(0.0..2.0);
        let h = move |s: f64| a + b * (w * s).sin().powi(2);
        let g = move |s: f64| c * (1.0 + (w2 * s).cos());
        let z = integrate_scalar(|s, z| h(s) * z + g(s) - d * z, z0, &times, 1e-12, 1e-14);
        let hs: Vec<f64> = times.iter().map(|&s| h(s)).collect();
        let gs: Vec<f64> = times.iter().map(|&s| g(s)).collect();
        match gronwall_check(&times, &z, &hs, &gs, 1e-5) {
            Ok(out) if out.holds => {}
            _ => failures += 1,
        }
    }
    Verdict::le("gronwall", format!("draws={draws} samples=401 s=[0,3]"), failures as f64, 0.0)
}

/// Implicit step with converged Picard sweeps against the self-consistent
/// brute-force oracle on 1D grids with at most 5 interior nodes.
pub fn oracle_equivalence(configs: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg_base = StepperConfig {
        newton_tol: 1e-13,
        picard_tol: 1e-14,
        picard_max_iters: 200,
        ..StepperConfig::default()
    };
    let mut worst = 0.0_f64;
    let mut errors = 0usize;
    for k in 0..configs {
        let m = [2.0, 3.0, 4.0][k % 3];
        let cells = rng.gen_range(2..=6);
        let mut spec = ProblemSpec::interval(rng.gen_range(0.5..2.0), cells, m);
        spec.material = if k % 2 == 0 {
            MaterialLaw::default_cubic()
        } else {
            MaterialLaw::default_piecewise()
        };
        spec.source = if rng.gen_bool(0.5) {
            SourceLaw::default_bump()
        } else {
            SourceLaw::ConstantFloor {
                sigma: rng.gen_range(0.5..2.0),
            }
        };
        spec.kappa = rng.gen_range(0.0..3.0);
        spec.reg_r = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(1e-3..0.1) };
        let grid = spec.grid().expect("valid grid");
        let state = Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .expect("finite state");
        let dt = rng.gen_range(0.01..0.2);
        let cfg = StepperConfig { dt, ..cfg_base.clone() };
        let pair = implicit_step(&state, &spec, &cfg, 0.0).and_then(|(v, _)| {
            let o = brute_force_step(&state, &spec, dt, 0.0)?;
            v.linf_distance(&o)
        });
        match pair {
            Ok(d) => worst = worst.max(d),
            Err(_) => errors += 1,
        }
    }
    if errors > 0 {
        worst = f64::INFINITY;
    }
    Verdict::le(
        "oracle_equivalence",
        format!("configs={configs} nodes<=5 m=2;3;4 errors={errors}"),
        worst,
        1e-9,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let out = verify_suite(
            &VerifySettings {
                tartar_samples: 2_000,
                legendre_samples: 200,
                ghidaglia_draws: 20,
                gronwall_draws: 10,
            },
            3,
        );
        for v in &out.verdicts {
            assert!(v.pass, "{v:?}");
        }
        assert_eq!(out.verdicts.len(), 7);
    }

    #[test]
    fn oracle_matches_on_a_few_configs() {
        let v = oracle_equivalence(12, 5);
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(tartar_suite(500, 9), tartar_suite(500, 9));
        assert_eq!(ghidaglia_suite(5, 9), ghidaglia_suite(5, 9));
    }
}
