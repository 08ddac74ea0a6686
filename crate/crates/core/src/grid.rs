//! Uniform tensor grids with homogeneous Dirichlet boundary, discrete fields,
//! face stencils, quadrature and norms.
//!
//! Nodes sit at `x_i = i * h` for `i = 0..=cells`. Boundary nodes carry the
//! Dirichlet zero and are not stored; a [`Field`] holds one value per interior
//! node. Interior nodes are numbered with the first axis running fastest.

use crate::error::{Error, Result};

/// Exponents used for the Moser-style `L^p` sweep reported as `lp_max`.
pub const MOSER_EXPONENTS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    extent: [f64; 2],
}

impl Grid {
    pub fn interval(length: f64, cells: usize) -> Result<Self> {
        Self::new(1, [cells, 1], [length, 1.0])
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(2, [nx, ny], [lx, ly])
    }

    fn new(dim: usize, cells: [usize; 2], extent: [f64; 2]) -> Result<Self> {
        for axis in 0..dim {
            if cells[axis] < 2 {
                return Err(Error::InvalidSpec(format!(
                    "need at least 2 cells per axis, got {}",
                    cells[axis]
                )));
            }
            if !(extent[axis].is_finite() && extent[axis] > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "domain extent must be positive, got {}",
                    extent[axis]
                )));
            }
        }
        Ok(Self { dim, cells, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.cells[axis] as f64
    }

    /// Interior nodes along `axis`.
    pub fn interior_per_axis(&self, axis: usize) -> usize {
        self.cells[axis] - 1
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|a| self.interior_per_axis(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// |Omega|.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.extent[a]).product()
    }

    /// Quadrature weight of every interior node (trapezoid rule).
    pub fn node_weight(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Total quadrature weight carried by boundary nodes, so that interior
    /// plus boundary weights sum to |Omega|.
    pub fn boundary_weight(&self) -> f64 {
        self.measure() - self.len() as f64 * self.node_weight()
    }

    /// Half bandwidth of the nearest-neighbour coupling in the interior numbering.
    pub fn bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.interior_per_axis(0)
        }
    }

    /// Interior index of grid node `(i, j)`; `None` on the boundary.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        let nx = self.cells[0];
        if i == 0 || i >= nx {
            return None;
        }
        if self.dim == 1 {
            return Some(i - 1);
        }
        let ny = self.cells[1];
        if j == 0 || j >= ny {
            return None;
        }
        Some((j - 1) * (nx - 1) + (i - 1))
    }

    /// Physical coordinates of interior node `k`.
    pub fn coords(&self, k: usize) -> [f64; 2] {
        let nxi = self.interior_per_axis(0);
        let (i, j) = if self.dim == 1 {
            (k + 1, 0)
        } else {
            (k % nxi + 1, k / nxi + 1)
        };
        [
            i as f64 * self.spacing(0),
            if self.dim == 1 {
                0.0
            } else {
                j as f64 * self.spacing(1)
            },
        ]
    }

    /// Face stencils of the flux-form discretization.
    ///
    /// 1D: one face between each pair of adjacent nodes. 2D: x-faces on the
    /// interior rows and y-faces on the interior columns, each carrying a
    /// normal two-point difference and a tangential difference averaged from
    /// the centered differences at the two adjacent nodes.
    pub fn faces(&self) -> Vec<Face> {
        let mut faces = Vec::new();
        if self.dim == 1 {
            let h = self.spacing(0);
            for i in 0..self.cells[0] {
                faces.push(Face {
                    weight: h,
                    normal: [tap(self.index(i, 0), -1.0 / h), tap(self.index(i + 1, 0), 1.0 / h)],
                    tangential: [Tap::NONE; 4],
                });
            }
            return faces;
        }
        let (hx, hy) = (self.spacing(0), self.spacing(1));
        let (nx, ny) = (self.cells[0], self.cells[1]);
        let w = hx * hy;
        for j in 1..ny {
            for i in 0..nx {
                let t = 1.0 / (4.0 * hy);
                faces.push(Face {
                    weight: w,
                    normal: [tap(self.index(i, j), -1.0 / hx), tap(self.index(i + 1, j), 1.0 / hx)],
                    tangential: [
                        tap(self.index(i, j + 1), t),
                        tap(self.index(i, j - 1), -t),
                        tap(self.index(i + 1, j + 1), t),
                        tap(self.index(i + 1, j - 1), -t),
                    ],
                });
            }
        }
        for j in 0..ny {
            for i in 1..nx {
                let t = 1.0 / (4.0 * hx);
                faces.push(Face {
                    weight: w,
                    normal: [tap(self.index(i, j), -1.0 / hy), tap(self.index(i, j + 1), 1.0 / hy)],
                    tangential: [
                        tap(self.index(i + 1, j), t),
                        tap(self.index(i - 1, j), -t),
                        tap(self.index(i + 1, j + 1), t),
                        tap(self.index(i - 1, j + 1), -t),
                    ],
                });
            }
        }
        faces
    }

    /// Factor converting face sums into an integral of |grad v|^m. In 2D both
    /// face families carry a full gradient estimate, so each is counted half.
    pub fn face_family_factor(&self) -> f64 {
        if self.dim == 1 {
            1.0
        } else {
            0.5
        }
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: *self,
            values: vec![0.0; self.len()],
        }
    }

    /// Samples `f` at every interior node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Field {
        Field {
            grid: *self,
            values: (0..self.len()).map(|k| f(self.coords(k))).collect(),
        }
    }
}

fn tap(node: Option<usize>, coeff: f64) -> Tap {
    Tap { node, coeff }
}

/// One term of a difference stencil; `node == None` means a boundary node,
/// whose value is the Dirichlet zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub node: Option<usize>,
    pub coeff: f64,
}

impl Tap {
    const NONE: Tap = Tap {
        node: None,
        coeff: 0.0,
    };

    #[inline]
    fn eval(&self, values: &[f64]) -> f64 {
        self.node.map_or(0.0, |k| self.coeff * values[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub weight: f64,
    pub normal: [Tap; 2],
    pub tangential: [Tap; 4],
}

impl Face {
    #[inline]
    pub fn normal_gradient(&self, values: &[f64]) -> f64 {
        self.normal[0].eval(values) + self.normal[1].eval(values)
    }

    #[inline]
    pub fn tangential_gradient(&self, values: &[f64]) -> f64 {
        self.tangential.iter().map(|t| t.eval(values)).sum()
    }

    /// |grad v|^2 on the face.
    #[inline]
    pub fn gradient_sq(&self, values: &[f64]) -> f64 {
        let gn = self.normal_gradient(values);
        let gt = self.tangential_gradient(values);
        gn * gn + gt * gt
    }
}

/// Discrete field: one finite value per interior node of `grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpec(format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite field value {bad}")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Max-norm distance of nodal values.
    pub fn linf_distance(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

/// Quadrature of nodal samples; boundary nodes contribute zero (Dirichlet).
pub fn integrate(values: &[f64], grid: &Grid) -> f64 {
    grid.node_weight() * values.iter().sum::<f64>()
}

/// Quadrature of `g(v)` where the boundary value `g(0)` is included with the
/// boundary weight, so a constant integrates to exactly `c * |Omega|`.
pub fn integrate_composed(field: &Field, g: impl Fn(f64) -> f64) -> f64 {
    let grid = field.grid();
    let interior: f64 = field.values().iter().map(|&v| g(v)).sum();
    grid.node_weight() * interior + grid.boundary_weight() * g(0.0)
}

/// Integral of |grad v|^m over the faces.
pub fn w1m_seminorm(field: &Field, m: f64) -> f64 {
    let grid = field.grid();
    let v = field.values();
    let sum: f64 = grid
        .faces()
        .iter()
        .map(|f| f.weight * f.gradient_sq(v).powf(0.5 * m))
        .sum();
    grid.face_family_factor() * sum
}

#[derive(Clone, Debug, PartialEq)]
pub struct Norms {
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
    /// `(p, ||v||_p)` for each exponent of [`MOSER_EXPONENTS`].
    pub lp: Vec<(f64, f64)>,
    pub lp_max: f64,
    pub w1m_seminorm: f64,
}

pub fn lp_norm(field: &Field, p: f64) -> f64 {
    let s: f64 = field.values().iter().map(|v| v.abs().powf(p)).sum();
    (field.grid().node_weight() * s).powf(1.0 / p)
}

pub fn norms(field: &Field, m: f64) -> Norms {
    let lp: Vec<(f64, f64)> = MOSER_EXPONENTS
        .iter()
        .map(|&p| (p, lp_norm(field, p)))
        .collect();
    let lp_max = lp.iter().fold(0.0_f64, |acc, &(_, n)| acc.max(n));
    Norms {
        linf: field.max_abs(),
        l1: integrate(&field.values().iter().map(|v| v.abs()).collect::<Vec<_>>(), field.grid()),
        l2: lp_norm(field, 2.0),
        lp,
        lp_max,
        w1m_seminorm: w1m_seminorm(field, m),
    }
}
