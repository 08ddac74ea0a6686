//! Set distances, omega-limit snapshots and the two-trajectory contraction
//! estimate.

use crate::error::{Error, Result};
use crate::grid::{integrate, Field};
use crate::model::MaterialLaw;
use crate::solver::TrajectoryRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SetNorm {
    #[default]
    Linf,
    L1,
    L2,
}

impl SetNorm {
    pub fn distance(self, a: &Field, b: &Field) -> Result<f64> {
        if a.grid() != b.grid() {
            return Err(Error::GridMismatch);
        }
        let diff = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs());
        Ok(match self {
            SetNorm::Linf => diff.fold(0.0, f64::max),
            SetNorm::L1 => integrate(&diff.collect::<Vec<_>>(), a.grid()),
            SetNorm::L2 => integrate(&diff.map(|d| d * d).collect::<Vec<_>>(), a.grid()).sqrt(),
        })
    }
}

/// Finite set of states with the run and time each was taken from.
#[derive(Clone, Debug, Default)]
pub struct SnapshotSet {
    pub fields: Vec<Field>,
    pub sources: Vec<(usize, f64)>,
}

impl SnapshotSet {
    pub fn from_fields(fields: Vec<Field>) -> Self {
        let sources = (0..fields.len()).map(|i| (i, 0.0)).collect();
        Self { fields, sources }
    }

    pub fn push(&mut self, field: Field, run_id: usize, time: f64) {
        self.fields.push(field);
        self.sources.push((run_id, time));
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// `sup_{a in A} inf_{b in B} |a - b|`.
pub fn hausdorff_semidistance(a: &SnapshotSet, b: &SnapshotSet, norm: SetNorm) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sup = 0.0_f64;
    for x in &a.fields {
        let mut inf = f64::INFINITY;
        for y in &b.fields {
            inf = inf.min(norm.distance(x, y)?);
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Snapshots at times `>= cutoff` from every run, greedily deduplicated in
/// `L^inf` with tolerance `merge_tol`. Run ids are positions in `ensemble`.
pub fn omega_limit_estimate(ensemble: &[TrajectoryRecord], cutoff: f64, merge_tol: f64) -> Result<SnapshotSet> {
    let mut set = SnapshotSet::default();
    for (run, rec) in ensemble.iter().enumerate() {
        for (row, state) in rec.rows.iter().zip(&rec.states) {
            if row.time < cutoff {
                continue;
            }
            let mut duplicate = false;
            for kept in &set.fields {
                if state.linf_distance(kept)? <= merge_tol {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                set.push(state.clone(), run, row.time);
            }
        }
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionOutcome {
    pub times: Vec<f64>,
    /// `|alpha(v(s)) - alpha(u(s))|_{L^1}`.
    pub d: Vec<f64>,
    /// Smallest `K` with `d(s) <= e^{K s} d(0)` at every record; `None` on
    /// the degenerate branch or with no positive record time.
    pub fitted_k: Option<f64>,
    /// Least-squares slope of `ln(d(s)/d(0))` against `s` through the origin.
    pub lsq_k: Option<f64>,
    /// `max_s d(s) - e^{K s} d(0)` for the fitted `K`, or `max_s d(s)` on the
    /// degenerate branch.
    pub max_violation: f64,
    pub degenerate: bool,
    pub holds: bool,
}

/// Tracks the `L^1` distance of `alpha(v)` and `alpha(u)` along two runs.
///
/// When `d(0) = 0` the fit is skipped and every `d(s)` must stay below `tol`;
/// otherwise `DegenerateFit` is returned.
pub fn contraction_estimate(
    run_v: &TrajectoryRecord,
    run_u: &TrajectoryRecord,
    law: &MaterialLaw,
    tol: f64,
) -> Result<ContractionOutcome> {
    if run_v.states.len() != run_u.states.len() || run_v.states.is_empty() {
        return Err(Error::GridMismatch);
    }
    let times = run_v.times();
    let matched = times
        .iter()
        .zip(run_u.times())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    if !matched {
        return Err(Error::InvalidSpec("record times differ between runs".into()));
    }
    let mut d = Vec::with_capacity(times.len());
    for (v, u) in run_v.states.iter().zip(&run_u.states) {
        let diff = v.zip_map(u, |a, b| (law.alpha(a) - law.alpha(b)).abs())?;
        d.push(integrate(diff.values(), v.grid()));
    }
    let d0 = d[0];
    if d0 == 0.0 {
        let max = d.iter().copied().fold(0.0, f64::max);
        if max > tol {
            return Err(Error::DegenerateFit(format!(
                "d(0) = 0 but d(s) reaches {max:e} > {tol:e}"
            )));
        }
        return Ok(ContractionOutcome {
            times,
            d,
            fitted_k: None,
            lsq_k: None,
            max_violation: max,
            degenerate: true,
            holds: true,
        });
    }
    let mut fitted: Option<f64> = None;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&s, &ds) in times.iter().zip(&d).skip(1) {
        if s <= 0.0 || ds <= 0.0 {
            continue;
        }
        let y = (ds / d0).ln();
        fitted = Some(fitted.map_or(y / s, |k: f64| k.max(y / s)));
        sxy += s * y;
        sxx += s * s;
    }
    let lsq_k = (sxx > 0.0).then(|| sxy / sxx);
    let k = fitted.unwrap_or(0.0);
    let max_violation = times
        .iter()
        .zip(&d)
        .map(|(&s, &ds)| ds - (k * s).exp() * d0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionOutcome {
        times,
        d,
        fitted_k: fitted,
        lsq_k,
        max_violation,
        degenerate: false,
        holds: max_violation <= 1e-12 * d0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::solver::RecordRow;
    use num::{BigRational, Signed, ToPrimitive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(grid: Grid, count: usize, rng: &mut ChaCha8Rng) -> SnapshotSet {
        let fields = (0..count)
            .map(|_| Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        SnapshotSet::from_fields(fields)
    }

    fn record(states: Vec<Field>, times: &[f64]) -> TrajectoryRecord {
        let rows = times
            .iter()
            .enumerate()
            .map(|(i, &t)| RecordRow {
                step: i,
                time: t,
                linf: 0.0,
                l1: 0.0,
                l2: 0.0,
                lp_max: 0.0,
                w1m_seminorm: 0.0,
                energy_psi_star: 0.0,
                dalpha_dt_l2: 0.0,
                nonlocal_coeff: 0.0,
                newton_iters: 0,
                picard_iters: 0,
                halvings: 0,
            })
            .collect();
        TrajectoryRecord {
            m: 2.0,
            r: 0.0,
            rows,
            states,
            time_integrated_seminorm: 0.0,
        }
    }

    #[test]
    fn semidistance_of_a_set_to_itself_is_zero() {
        let g = Grid::interval(1.0, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_set(g, 5, &mut rng);
        for norm in [SetNorm::Linf, SetNorm::L1, SetNorm::L2] {
            assert_eq!(hausdorff_semidistance(&a, &a, norm).unwrap(), 0.0);
        }
    }

    #[test]
    fn singletons_give_the_norm() {
        let g = Grid::interval(1.0, 4).unwrap();
        let a = SnapshotSet::from_fields(vec![Field::new(g, vec![0.0, 1.0, 0.0]).unwrap()]);
        let b = SnapshotSet::from_fields(vec![Field::new(g, vec![0.5, -1.0, 0.0]).unwrap()]);
        assert_eq!(hausdorff_semidistance(&a, &b, SetNorm::Linf).unwrap(), 2.0);
        assert!((hausdorff_semidistance(&a, &b, SetNorm::L1).unwrap() - 0.25 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn empty_sets_are_rejected() {
        let g = Grid::interval(1.0, 4).unwrap();
        let a = SnapshotSet::from_fields(vec![g.zeros()]);
        let e = SnapshotSet::default();
        assert_eq!(hausdorff_semidistance(&a, &e, SetNorm::Linf), Err(Error::EmptySet));
        assert_eq!(hausdorff_semidistance(&e, &a, SetNorm::Linf), Err(Error::EmptySet));
    }

    #[test]
    fn matches_exact_rational_double_loop() {
        let g = Grid::rectangle(1.0, 1.0, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_set(g, 5, &mut rng);
        let b = random_set(g, 7, &mut rng);
        let exact = |x: f64| BigRational::from_float(x).unwrap();
        let w = exact(g.node_weight());
        for norm in [SetNorm::Linf, SetNorm::L1] {
            let mut sup: Option<BigRational> = None;
            for x in &a.fields {
                let mut inf: Option<BigRational> = None;
                for y in &b.fields {
                    let diffs = x.values().iter().zip(y.values()).map(|(p, q)| (exact(*p) - exact(*q)).abs());
                    let d = match norm {
                        SetNorm::Linf => diffs.max().unwrap(),
                        _ => diffs.fold(BigRational::from_integer(0.into()), |acc, d| acc + d) * &w,
                    };
                    inf = Some(match inf {
                        Some(cur) if cur <= d => cur,
                        _ => d,
                    });
                }
                let inf = inf.unwrap();
                sup = Some(match sup {
                    Some(cur) if cur >= inf => cur,
                    _ => inf,
                });
            }
            let expected = sup.unwrap().to_f64().unwrap();
            let got = hausdorff_semidistance(&a, &b, norm).unwrap();
            assert!((got - expected).abs() <= 4.0 * f64::EPSILON * expected, "{norm:?}");
        }
    }

    #[test]
    fn semidistance_is_zero_iff_covered() {
        let g = Grid::interval(1.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = random_set(g, 6, &mut rng);
        let sub = SnapshotSet::from_fields(b.fields[1..4].to_vec());
        assert_eq!(hausdorff_semidistance(&sub, &b, SetNorm::Linf).unwrap(), 0.0);
        assert!(hausdorff_semidistance(&b, &sub, SetNorm::Linf).unwrap() > 0.0);
    }

    #[test]
    fn triangle_bound() {
        let g = Grid::interval(1.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let a = random_set(g, 4, &mut rng);
            let b = random_set(g, 5, &mut rng);
            let c = random_set(g, 3, &mut rng);
            let ac = hausdorff_semidistance(&a, &c, SetNorm::Linf).unwrap();
            let ab = hausdorff_semidistance(&a, &b, SetNorm::Linf).unwrap();
            let bc = hausdorff_semidistance(&b, &c, SetNorm::Linf).unwrap();
            assert!(ac <= ab + bc + 1e-15);
        }
    }

    #[test]
    fn constant_trajectory_gives_a_singleton() {
        let g = Grid::interval(1.0, 4).unwrap();
        let s = Field::new(g, vec![0.2, 0.4, 0.1]).unwrap();
        let rec = record(vec![s.clone(), s.clone(), s], &[0.0, 1.0, 2.0]);
        let set = omega_limit_estimate(&[rec.clone()], 0.0, 1e-12).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.sources, vec![(0, 0.0)]);
        assert_eq!(omega_limit_estimate(&[rec], 3.0, 1e-12).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn larger_cutoff_gives_a_subset() {
        let g = Grid::interval(1.0, 4).unwrap();
        let times = [0.0, 1.0, 2.0, 3.0];
        let states = times
            .iter()
            .map(|t: &f64| Field::new(g, vec![(-t).exp(), 0.5, 0.0]).unwrap())
            .collect();
        let rec = [record(states, &times)];
        let early = omega_limit_estimate(&rec, 1.0, 1e-3).unwrap();
        let late = omega_limit_estimate(&rec, 2.0, 1e-3).unwrap();
        assert!(hausdorff_semidistance(&late, &early, SetNorm::Linf).unwrap() <= 1e-3);
        assert!(late.len() < early.len());
    }

    #[test]
    fn identical_runs_take_the_degenerate_branch() {
        let g = Grid::interval(1.0, 4).unwrap();
        let s = Field::new(g, vec![0.2, 0.4, 0.1]).unwrap();
        let rec = record(vec![s.clone(), s], &[0.0, 1.0]);
        let out = contraction_estimate(&rec, &rec, &MaterialLaw::Identity, 1e-9).unwrap();
        assert!(out.degenerate && out.holds);
        assert_eq!(out.fitted_k, None);
    }

    #[test]
    fn diverging_from_zero_distance_is_degenerate_fit() {
        let g = Grid::interval(1.0, 4).unwrap();
        let a = record(vec![g.zeros(), g.zeros()], &[0.0, 1.0]);
        let b = record(vec![g.zeros(), Field::new(g, vec![1.0, 0.0, 0.0]).unwrap()], &[0.0, 1.0]);
        assert!(matches!(
            contraction_estimate(&a, &b, &MaterialLaw::Identity, 1e-9),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn identity_law_distance_is_l1_of_states() {
        let g = Grid::interval(1.0, 4).unwrap();
        let times = [0.0, 0.5, 1.0];
        let v = record(
            times.iter().map(|t| Field::new(g, vec![1.0 + t, 0.0, 0.0]).unwrap()).collect(),
            &times,
        );
        let u = record(vec![g.zeros(); 3], &times);
        let out = contraction_estimate(&v, &u, &MaterialLaw::Identity, 1e-9).unwrap();
        for (t, d) in times.iter().zip(&out.d) {
            assert!((d - 0.25 * (1.0 + t)).abs() < 1e-15);
        }
        // d(s)/d(0) = 1 + s, steepest at s = 0.5
        assert!((out.fitted_k.unwrap() - 2.0 * 1.5f64.ln()).abs() < 1e-12);
        assert!(out.holds);
        assert!(out.max_violation.abs() < 1e-14);
    }
}
