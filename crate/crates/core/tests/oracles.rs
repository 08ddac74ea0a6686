//! Solver and operator checks against independently computed references.

use num::{BigInt, BigRational, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermistor::linalg::solve_dense;
use thermistor::model::{bump, nonlocal_coefficient};
use thermistor::operator::m_laplacian_apply;
use thermistor::solver::{brute_force_step, energy_balance_residual, implicit_step, integrate_from};
use thermistor::{Domain, Field, Grid, InitialData, MaterialLaw, ProblemSpec, SourceLaw, StepperConfig};

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

// Exact rational evaluation of (F_{i+1/2} - F_{i-1/2}) / h with
// F = (g^2 + r) g and g the one-sided difference, zero outside.
#[test]
fn m4_operator_matches_exact_rational_arithmetic() {
    let cells = 9;
    let grid = Grid::interval(1.0, cells).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let r = 0.01;
    let field = Field::new(grid, values.clone()).unwrap();
    let got = m_laplacian_apply(&field, 4.0, r);

    let h = BigRational::new(BigInt::from(1), BigInt::from(cells));
    let rr = rat(r);
    let mut padded = vec![BigRational::from_integer(0.into())];
    padded.extend(values.iter().map(|&x| rat(x)));
    padded.push(BigRational::from_integer(0.into()));
    let flux: Vec<BigRational> = padded
        .windows(2)
        .map(|w| {
            let g = (&w[1] - &w[0]) / &h;
            (&g * &g + &rr) * g
        })
        .collect();
    for i in 0..grid.len() {
        let exact = ((&flux[i + 1] - &flux[i]) / &h).to_f64().unwrap();
        let diff = (got.values()[i] - exact).abs();
        assert!(diff <= 1e-12 * (1.0 + exact.abs()), "node {i}: {} vs {exact}", got.values()[i]);
    }
}

fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn nonlocal_coefficient_matches_quadrature() {
    let cells = 64;
    let mut spec = ProblemSpec::interval(1.0, cells, 3.0);
    spec.source = SourceLaw::default_bump();
    spec.kappa = 2.5;
    let grid = spec.grid().unwrap();
    let a = 0.7;
    let v = grid.sample(|x| a * (std::f64::consts::PI * x[0]).sin());
    let c = nonlocal_coefficient(&spec, &v).unwrap();

    // the same trapezoid rule written out node by node
    let h = 1.0 / cells as f64;
    let f = |s: f64| 1.0 + bump(s);
    let trap: f64 = h * (0.5 * f(0.0) + (1..cells).map(|i| f(v.values()[i - 1])).sum::<f64>() + 0.5 * f(0.0));
    assert!((c - 2.5 / (trap * trap)).abs() <= 1e-12 * c);

    // and the continuous integral within the trapezoid error
    let fine = composite_simpson(|x| f(a * (std::f64::consts::PI * x).sin()), 0.0, 1.0, 1 << 16);
    let exact = 2.5 / (fine * fine);
    assert!((c - exact).abs() <= 10.0 * h * h * exact, "{c} vs {exact}");
}

#[test]
fn linear_step_matches_dense_solve() {
    for cells in [3, 5, 8] {
        let mut spec = ProblemSpec::interval(1.0, cells, 2.0);
        spec.kappa = 0.0;
        let grid = spec.grid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cells as u64);
        let old = Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let dt = 0.05;
        let n = grid.len();
        let h = 1.0 / cells as f64;
        // (I - dt D2) w = v_old with the 3-point second difference
        let k = dt / (h * h);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match i.abs_diff(j) {
                        0 => 1.0 + 2.0 * k,
                        1 => -k,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let exact = solve_dense(a, old.values().to_vec()).unwrap();
        let brute = brute_force_step(&old, &spec, dt, 0.0).unwrap();
        let (newton, _) = implicit_step(&old, &spec, &StepperConfig::with_dt(dt), 0.0).unwrap();
        for i in 0..n {
            assert!((brute.values()[i] - exact[i]).abs() < 1e-11);
            assert!((newton.values()[i] - exact[i]).abs() < 1e-11);
        }
    }
}

fn cubic_bump_spec(cells: usize) -> ProblemSpec {
    let mut spec = ProblemSpec::interval(1.0, cells, 4.0);
    spec.material = MaterialLaw::default_cubic();
    spec.source = SourceLaw::default_bump();
    spec.kappa = 3.0;
    spec.reg_r = 0.01;
    spec
}

#[test]
fn three_node_step_matches_brute_force() {
    let spec = cubic_bump_spec(4);
    let grid = spec.grid().unwrap();
    let old = Field::new(grid, vec![0.4, -0.8, 0.3]).unwrap();
    for dt in [0.01, 0.1] {
        let cfg = StepperConfig {
            newton_tol: 1e-13,
            picard_tol: 1e-13,
            picard_max_iters: 200,
            ..StepperConfig::with_dt(dt)
        };
        let (newton, report) = implicit_step(&old, &spec, &cfg, 0.0).unwrap();
        assert!(report.picard_converged);
        let brute = brute_force_step(&old, &spec, dt, 0.0).unwrap();
        let diff = newton.linf_distance(&brute).unwrap();
        assert!(diff < 1e-10, "dt {dt}: {diff}");
    }
}

fn run_to(spec: &ProblemSpec, cfg: &StepperConfig) -> Field {
    let init = spec.initial_field().unwrap();
    integrate_from(spec, cfg, init, &[]).unwrap().states.pop().unwrap()
}

#[test]
fn lagged_coefficient_error_is_first_order() {
    let mut spec = cubic_bump_spec(32);
    spec.initial = InitialData::Sine { amplitude: 0.6 };
    spec.horizon = 0.2;
    let gap = |dt: f64| {
        let full = StepperConfig {
            picard_tol: 1e-13,
            picard_max_iters: 100,
            ..StepperConfig::with_dt(dt)
        };
        let lagged = StepperConfig {
            picard_max_iters: 1,
            ..full.clone()
        };
        run_to(&spec, &full).linf_distance(&run_to(&spec, &lagged)).unwrap()
    };
    let (coarse, fine) = (gap(0.02), gap(0.01));
    assert!(fine > 0.0);
    let ratio = coarse / fine;
    assert!((1.6..2.4).contains(&ratio), "gap ratio {ratio} ({coarse}, {fine})");
}

#[test]
fn energy_balance_residual_is_first_order() {
    // coarse grid keeps dt below the fastest diffusive time scale
    let mut spec = cubic_bump_spec(8);
    spec.initial = InitialData::Sine { amplitude: 0.8 };
    let old = spec.initial_field().unwrap();
    let residual = |dt: f64| {
        let cfg = StepperConfig {
            newton_tol: 1e-13,
            picard_tol: 1e-13,
            picard_max_iters: 100,
            ..StepperConfig::with_dt(dt)
        };
        let (new, _) = implicit_step(&old, &spec, &cfg, 0.0).unwrap();
        energy_balance_residual(&spec, &old, &new, dt, dt).unwrap()
    };
    let (r1, r2, r3) = (residual(4e-5), residual(2e-5), residual(1e-5));
    // convexity of the energy makes the defect nonpositive
    for r in [r1, r2, r3] {
        assert!(r <= 1e-9, "{r}");
    }
    let (q1, q2) = (r1 / r2, r2 / r3);
    assert!((1.7..2.3).contains(&q1) && (1.7..2.3).contains(&q2), "{q1} {q2}");
}

#[test]
fn ordered_data_stay_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for dim2 in [false, true] {
        let mut spec = cubic_bump_spec(24);
        spec.source = SourceLaw::ConstantFloor { sigma: 1.0 };
        spec.m = 3.0;
        spec.horizon = 0.1;
        if dim2 {
            spec.domain = Domain::Rectangle {
                lx: 1.0,
                ly: 1.0,
                nx: 10,
                ny: 10,
            };
        }
        let grid = spec.grid().unwrap();
        let cfg = StepperConfig::with_dt(0.01);
        for _ in 0..4 {
            let lower: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let upper: Vec<f64> = lower.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
            let u = integrate_from(&spec, &cfg, Field::new(grid, lower).unwrap(), &[]).unwrap();
            let v = integrate_from(&spec, &cfg, Field::new(grid, upper).unwrap(), &[]).unwrap();
            for (a, b) in u.states.iter().zip(&v.states) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!(x <= &(y + 1e-10), "order lost: {x} > {y}");
                }
            }
        }
    }
}
