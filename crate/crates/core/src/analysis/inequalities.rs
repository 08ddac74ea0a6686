//! Pointwise and differential inequalities: Tartar monotonicity, Gronwall,
//! and the Ghidaglia decay envelope.

use crate::error::{Error, Result};

use super::ode::integrate_scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TartarOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Constant in the monotonicity bound of `|a|^{m-2} a`.
pub fn tartar_constant(m: f64) -> f64 {
    if m >= 2.0 {
        2f64.powf(2.0 - m)
    } else {
        m - 1.0
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compares `(|a|^{m-2}a - |b|^{m-2}b).(a-b)` with its lower bound.
///
/// Panics if `a` and `b` differ in length or `m <= 1`.
pub fn tartar_check(a: &[f64], b: &[f64], m: f64) -> TartarOutcome {
    assert_eq!(a.len(), b.len(), "vectors must share a dimension");
    assert!(m > 1.0, "exponent must exceed 1");
    let (na, nb) = (norm(a), norm(b));
    let pow = |n: f64| if n == 0.0 { 0.0 } else { n.powf(m - 2.0) };
    let (pa, pb) = (pow(na), pow(nb));
    let lhs: f64 = a.iter().zip(b).map(|(x, y)| (pa * x - pb * y) * (x - y)).sum();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nd = norm(&diff);
    let rhs = if m >= 2.0 {
        tartar_constant(m) * nd.powf(m)
    } else if na + nb == 0.0 {
        0.0
    } else {
        tartar_constant(m) * nd * nd / (na + nb).powf(2.0 - m)
    };
    TartarOutcome {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12 * (1.0 + rhs),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GronwallOutcome {
    /// `exp(int_0^s h) (z(0) + int_0^s g)` at each sample.
    pub bound: Vec<f64>,
    /// Largest `z - bound` over the samples.
    pub max_excess: f64,
    pub holds: bool,
}

/// Verifies `z(s) <= exp(int h) (z(0) + int g)` on sampled series.
///
/// The hypothesis `z' <= h z + g` is first checked in integrated form on
/// each interval, `z_{i+1} - z_i <= trap(h z + g)`, with slack
/// `tol (1 + |z_i| + |z_{i+1}|)`; the same slack applies to the conclusion.
pub fn gronwall_check(times: &[f64], z: &[f64], h: &[f64], g: &[f64], tol: f64) -> Result<GronwallOutcome> {
    let n = times.len();
    if n == 0 || z.len() != n || h.len() != n || g.len() != n {
        return Err(Error::InvalidSpec("series must be nonempty and share a time grid".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("times must increase strictly".into()));
    }
    if z.iter().chain(h).chain(g).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidSpec("series must be finite and nonnegative".into()));
    }
    for i in 0..n - 1 {
        let dt = times[i + 1] - times[i];
        let lhs = z[i + 1] - z[i];
        let rhs = 0.5 * dt * (h[i] * z[i] + g[i] + h[i + 1] * z[i + 1] + g[i + 1]);
        if lhs > rhs + tol * (1.0 + z[i].abs() + z[i + 1].abs()) {
            return Err(Error::HypothesisViolated { index: i, lhs, rhs });
        }
    }
    let mut bound = Vec::with_capacity(n);
    let (mut ih, mut ig) = (0.0, 0.0);
    bound.push(z[0]);
    for i in 1..n {
        let dt = times[i] - times[i - 1];
        ih += 0.5 * dt * (h[i] + h[i - 1]);
        ig += 0.5 * dt * (g[i] + g[i - 1]);
        bound.push(ih.exp() * (z[0] + ig));
    }
    let mut max_excess = f64::NEG_INFINITY;
    let mut holds = true;
    for (zi, bi) in z.iter().zip(&bound) {
        max_excess = max_excess.max(zi - bi);
        if *zi > bi + tol * (1.0 + zi.abs()) {
            holds = false;
        }
    }
    Ok(GronwallOutcome {
        bound,
        max_excess,
        holds,
    })
}

/// `(eta/delta)^{1/q} + (delta (q-1) s)^{-1/(q-1)}`, the uniform bound for
/// nonnegative solutions of `z' + delta z^q <= eta`.
pub fn ghidaglia_envelope(delta: f64, eta: f64, q: f64, s: f64) -> f64 {
    (eta / delta).powf(1.0 / q) + (delta * (q - 1.0) * s).powf(-1.0 / (q - 1.0))
}

/// Largest `z(s) - envelope(s)` over `times`, with `z` integrated from
/// `z' = eta - delta z^q`, `z(0) = z0`.
pub fn ghidaglia_violation(delta: f64, eta: f64, q: f64, z0: f64, times: &[f64]) -> f64 {
    let z = integrate_scalar(|_, z| eta - delta * z.max(0.0).powf(q), z0, times, 1e-12, 1e-14);
    times
        .iter()
        .zip(z)
        .map(|(&s, zs)| zs - ghidaglia_envelope(delta, eta, q, s))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tartar_equal_vectors() {
        let o = tartar_check(&[0.3, -1.0], &[0.3, -1.0], 3.0);
        assert_eq!((o.lhs, o.rhs), (0.0, 0.0));
        assert!(o.holds);
        let o = tartar_check(&[0.0], &[0.0], 1.5);
        assert_eq!((o.lhs, o.rhs), (0.0, 0.0));
    }

    #[test]
    fn tartar_m2_is_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let o = tartar_check(&a, &b, 2.0);
            assert!((o.lhs - o.rhs).abs() < 1e-12 * (1.0 + o.rhs));
        }
    }

    #[test]
    fn tartar_m4_orthogonal_units() {
        let o = tartar_check(&[1.0, 0.0], &[0.0, 1.0], 4.0);
        assert!((o.lhs - 2.0).abs() < 1e-15);
        assert!((o.rhs - 1.0).abs() < 1e-15);
        assert!(o.holds);
    }

    #[test]
    fn tartar_constants() {
        assert_eq!(tartar_constant(2.0), 1.0);
        assert_eq!(tartar_constant(4.0), 0.25);
        assert!((tartar_constant(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tartar_scalar_sharpness_at_opposite_points() {
        // a = -b = 1 in 1D attains the constant 2^{2-m}
        for m in [2.5, 3.0, 6.0] {
            let o = tartar_check(&[1.0], &[-1.0], m);
            assert!((o.lhs - 4.0).abs() < 1e-14);
            assert!((o.rhs - 4.0).abs() < 1e-12);
            assert!(o.holds);
        }
    }

    #[test]
    fn gronwall_exponential_is_tight() {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let z: Vec<f64> = times.iter().map(|t| t.exp()).collect();
        let h = vec![1.0; times.len()];
        let g = vec![0.0; times.len()];
        let out = gronwall_check(&times, &z, &h, &g, 1e-9).unwrap();
        assert!(out.holds);
        assert!(out.max_excess.abs() < 1e-12 * times.last().unwrap().exp());
    }

    #[test]
    fn gronwall_constant() {
        let times = [0.0, 0.5, 1.0];
        let out = gronwall_check(&times, &[2.0; 3], &[0.0; 3], &[0.0; 3], 0.0).unwrap();
        assert_eq!(out.bound, vec![2.0; 3]);
        assert!(out.holds);
    }

    #[test]
    fn gronwall_holds_for_forced_growth() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.03).collect();
        let z = integrate_scalar(|s, z| 0.5 * z + s.sin().powi(2), 0.2, &times, 1e-12, 1e-14);
        let h = vec![0.5; times.len()];
        let g: Vec<f64> = times.iter().map(|s| s.sin().powi(2)).collect();
        let out = gronwall_check(&times, &z, &h, &g, 1e-4).unwrap();
        assert!(out.holds);
        assert_eq!(out.max_excess, 0.0);
        assert!(z.iter().zip(&out.bound).skip(1).all(|(zi, bi)| zi < bi));
    }

    #[test]
    fn gronwall_rejects_violated_hypothesis() {
        let times = [0.0, 1.0, 2.0];
        let err = gronwall_check(&times, &[1.0, 3.0, 9.0], &[0.5; 3], &[0.0; 3], 1e-9).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated { index: 0, .. }));
    }

    #[test]
    fn ghidaglia_examples() {
        assert!((ghidaglia_envelope(1.0, 1.0, 2.0, 1e12) - 1.0).abs() < 1e-11);
        let s = 0.7;
        let e = ghidaglia_envelope(2.0, 0.0, 3.0, s);
        assert!((e - (2.0 * 2.0 * s).powf(-0.5)).abs() < 1e-15);
        // 2^{1/3} + 2^{-1/2} to 30 digits: 1.96702783108142068916805496938
        assert!((ghidaglia_envelope(1.0, 2.0, 3.0, 1.0) - 1.967_027_831_081_420_7).abs() < 1e-15);
    }

    #[test]
    fn ghidaglia_dominates_integrated_solutions() {
        let times: Vec<f64> = (1..=50).map(|i| 0.05 * i as f64).collect();
        for (delta, eta, q, z0) in [(1.0, 1.0, 2.0, 100.0), (0.5, 0.0, 3.0, 10.0), (2.0, 3.0, 1.5, 0.0)] {
            assert!(ghidaglia_violation(delta, eta, q, z0, &times) <= 1e-10);
        }
    }
}
