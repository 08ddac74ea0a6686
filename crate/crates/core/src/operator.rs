//! Flux-form regularized m-Laplacian `div((|grad v|^2 + r)^{(m-2)/2} grad v)`.
//!
//! Fluxes live on faces: `F = a(|grad v|^2) * g_n` with `g_n` the two-point
//! normal difference. The divergence is taken so that
//! `sum_i w_i A(v)_i u_i = -sum_f w_f a_f g_n(v) g_n(u)` holds exactly, which
//! gives the sign and monotonicity properties of the continuous operator.

use crate::grid::{Face, Field, Grid};
use crate::linalg::BandedMatrix;

/// Face diffusion coefficient `(s + r)^{(m-2)/2}` with `s = |grad v|^2`.
#[inline]
pub fn face_coefficient(grad_sq: f64, m: f64, r: f64) -> f64 {
    if m == 2.0 {
        1.0
    } else {
        (grad_sq + r).powf(0.5 * (m - 2.0))
    }
}

/// `d(a g_n)/d g_n` with the tangential part held fixed.
#[inline]
fn normal_flux_derivative(gn: f64, grad_sq: f64, m: f64, r: f64) -> f64 {
    if m == 2.0 {
        return 1.0;
    }
    let s = grad_sq + r;
    if s == 0.0 {
        return 0.0;
    }
    s.powf(0.5 * (m - 2.0)) + (m - 2.0) * gn * gn * s.powf(0.5 * (m - 4.0))
}

/// How the diffusion term is linearized inside Newton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearization {
    /// Face coefficient frozen at the current iterate (Picard/Kacanov form).
    FrozenCoefficient,
    /// Exact derivative of each face flux with respect to its own normal
    /// difference; exact in 1D, drops only the tangential coupling in 2D.
    NormalExact,
}

fn apply_with(field: &Field, faces: &[Face], m: f64, r: f64) -> Vec<f64> {
    let grid = field.grid();
    let v = field.values();
    let inv_w = 1.0 / grid.node_weight();
    let mut out = vec![0.0; v.len()];
    for face in faces {
        let gn = face.normal_gradient(v);
        let s = if grid.dim() == 1 { gn * gn } else { face.gradient_sq(v) };
        let flux = face_coefficient(s, m, r) * gn;
        let scale = face.weight * inv_w * flux;
        for t in &face.normal {
            if let Some(k) = t.node {
                out[k] -= scale * t.coeff;
            }
        }
    }
    out
}

/// Regularized m-Laplacian of `field`, one value per interior node.
pub fn m_laplacian_apply(field: &Field, m: f64, r: f64) -> Field {
    let faces = field.grid().faces();
    let out = apply_with(field, &faces, m, r);
    Field::new(*field.grid(), out).expect("operator output is finite for finite input")
}

/// Precomputed face list for repeated applications on one grid.
#[derive(Clone, Debug)]
pub struct MLaplacian {
    grid: Grid,
    faces: Vec<Face>,
    pub m: f64,
    pub r: f64,
}

impl MLaplacian {
    pub fn new(grid: Grid, m: f64, r: f64) -> Self {
        Self {
            faces: grid.faces(),
            grid,
            m,
            r,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply(&self, field: &Field) -> Vec<f64> {
        debug_assert_eq!(field.grid(), &self.grid);
        apply_with(field, &self.faces, self.m, self.r)
    }

    /// Same as [`MLaplacian::apply`] on raw nodal values.
    pub fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        let f = Field::new(self.grid, values.to_vec()).expect("finite values");
        self.apply(&f)
    }

    /// `-int A(v) v = sum_f w_f a_f g_n^2 >= 0`.
    pub fn dissipation(&self, values: &[f64]) -> f64 {
        let two_d = self.grid.dim() == 2;
        self.faces
            .iter()
            .map(|face| {
                let gn = face.normal_gradient(values);
                let s = if two_d { face.gradient_sq(values) } else { gn * gn };
                face.weight * face_coefficient(s, self.m, self.r) * gn * gn
            })
            .sum()
    }

    /// Adds `scale * K` to `jac`, where `K` approximates `-dA/dv` according to
    /// `kind`. `K` is symmetric positive semidefinite with the nearest-neighbour
    /// sparsity of the grid.
    pub fn add_linearization(
        &self,
        values: &[f64],
        kind: Linearization,
        scale: f64,
        jac: &mut BandedMatrix,
    ) {
        let inv_w = 1.0 / self.grid.node_weight();
        let two_d = self.grid.dim() == 2;
        for face in &self.faces {
            let gn = face.normal_gradient(values);
            let s = if two_d { face.gradient_sq(values) } else { gn * gn };
            let b = match kind {
                Linearization::FrozenCoefficient => face_coefficient(s, self.m, self.r),
                Linearization::NormalExact => normal_flux_derivative(gn, s, self.m, self.r),
            };
            let c = scale * face.weight * inv_w * b;
            for p in &face.normal {
                let Some(i) = p.node else { continue };
                for q in &face.normal {
                    let Some(j) = q.node else { continue };
                    jac.add(i, j, c * p.coeff * q.coeff);
                }
            }
        }
    }

    /// `int |grad v|^m` and its gradient with respect to the nodal values.
    pub fn seminorm_and_gradient(&self, values: &[f64]) -> (f64, Vec<f64>) {
        let m = self.m;
        let factor = self.grid.face_family_factor();
        let mut grad = vec![0.0; values.len()];
        let mut total = 0.0;
        for face in &self.faces {
            let gn = face.normal_gradient(values);
            let gt = face.tangential_gradient(values);
            let s = gn * gn + gt * gt;
            total += face.weight * s.powf(0.5 * m);
            if s == 0.0 {
                continue;
            }
            // d/dv of s^{m/2} = m s^{(m-2)/2} (gn dgn + gt dgt)
            let c = factor * face.weight * m * s.powf(0.5 * (m - 2.0));
            for t in &face.normal {
                if let Some(k) = t.node {
                    grad[k] += c * gn * t.coeff;
                }
            }
            for t in &face.tangential {
                if let Some(k) = t.node {
                    grad[k] += c * gt * t.coeff;
                }
            }
        }
        (factor * total, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, w1m_seminorm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng, amp: f64) -> Field {
        let vals = (0..grid.len()).map(|_| rng.gen_range(-amp..amp)).collect();
        Field::new(grid, vals).unwrap()
    }

    #[test]
    fn laplacian_of_parabola_is_minus_two() {
        let g = Grid::interval(1.0, 16).unwrap();
        let v = g.sample(|x| x[0] * (1.0 - x[0]));
        let lap = m_laplacian_apply(&v, 2.0, 0.0);
        for &y in lap.values() {
            assert!((y + 2.0).abs() < 1e-11, "{y}");
        }
    }

    #[test]
    fn zero_field_maps_to_zero() {
        for g in [Grid::interval(1.0, 9).unwrap(), Grid::rectangle(1.0, 2.0, 5, 6).unwrap()] {
            for (m, r) in [(2.0, 0.0), (3.0, 0.0), (4.0, 0.1)] {
                let out = m_laplacian_apply(&g.zeros(), m, r);
                assert!(out.values().iter().all(|&y| y == 0.0));
            }
        }
    }

    #[test]
    fn m2_reduces_to_five_point_stencil() {
        let g = Grid::rectangle(1.0, 1.5, 6, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_field(g, &mut rng, 1.0);
        let out = m_laplacian_apply(&v, 2.0, 0.0);
        let (hx, hy) = (g.spacing(0), g.spacing(1));
        let val = |i: usize, j: usize| g.index(i, j).map_or(0.0, |k| v.values()[k]);
        for j in 1..5 {
            for i in 1..6 {
                let k = g.index(i, j).unwrap();
                let five = (val(i + 1, j) - 2.0 * val(i, j) + val(i - 1, j)) / (hx * hx)
                    + (val(i, j + 1) - 2.0 * val(i, j) + val(i, j - 1)) / (hy * hy);
                assert!((out.values()[k] - five).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn summation_by_parts_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in [Grid::interval(1.0, 12).unwrap(), Grid::rectangle(1.0, 1.0, 7, 6).unwrap()] {
            for (m, r) in [(2.0, 0.0), (3.0, 0.01), (4.0, 0.0), (6.0, 0.5)] {
                let op = MLaplacian::new(g, m, r);
                let v = random_field(g, &mut rng, 2.0);
                let a = op.apply(&v);
                let prod: Vec<f64> = a.iter().zip(v.values()).map(|(x, y)| x * y).collect();
                let lhs = integrate(&prod, &g);
                let d = op.dissipation(v.values());
                assert!(lhs <= 0.0);
                assert!((lhs + d).abs() < 1e-10 * (1.0 + d));
            }
        }
    }

    #[test]
    fn dissipation_equals_seminorm_for_r0_in_1d() {
        let g = Grid::interval(2.0, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_field(g, &mut rng, 1.0);
        for m in [2.0, 3.0, 4.5] {
            let op = MLaplacian::new(g, m, 0.0);
            let d = op.dissipation(v.values());
            assert!((d - w1m_seminorm(&v, m)).abs() < 1e-10 * d);
        }
    }

    #[test]
    fn seminorm_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in [Grid::interval(1.0, 8).unwrap(), Grid::rectangle(1.0, 1.0, 5, 4).unwrap()] {
            for m in [2.0, 3.0, 4.0] {
                let op = MLaplacian::new(g, m, 0.0);
                let v = random_field(g, &mut rng, 1.0);
                let (n, grad) = op.seminorm_and_gradient(v.values());
                assert!((n - w1m_seminorm(&v, m)).abs() < 1e-12 * n);
                for k in 0..g.len() {
                    let h = 1e-6;
                    let mut p = v.values().to_vec();
                    p[k] += h;
                    let mut q = v.values().to_vec();
                    q[k] -= h;
                    let fd = (op.seminorm_and_gradient(&p).0 - op.seminorm_and_gradient(&q).0)
                        / (2.0 * h);
                    assert!((fd - grad[k]).abs() < 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn normal_exact_linearization_is_the_1d_jacobian() {
        let g = Grid::interval(1.0, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_field(g, &mut rng, 1.0);
        for (m, r) in [(2.0, 0.0), (3.0, 0.01), (4.0, 0.1)] {
            let op = MLaplacian::new(g, m, r);
            let n = g.len();
            let mut jac = BandedMatrix::zeros(n, 1, 1);
            op.add_linearization(v.values(), Linearization::NormalExact, 1.0, &mut jac);
            for j in 0..n {
                let h = 1e-6;
                let mut p = v.values().to_vec();
                p[j] += h;
                let mut q = v.values().to_vec();
                q[j] -= h;
                let ap = op.apply_values(&p);
                let aq = op.apply_values(&q);
                for i in 0..n {
                    let fd = -(ap[i] - aq[i]) / (2.0 * h);
                    assert!((fd - jac.get(i, j)).abs() < 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
    }
}
