//! Linear least-squares fits on the 5-point stencil.
//!
//! For a node with stencil points `p_k` (center first, then E, W, N, S), the fit
//! `u ≈ c0 (x - x_c) + c1 (y - y_c) + c2` minimises the squared residual over the
//! five samples. The weights depend on geometry only, so each node's operator is
//! built once and applied to any field as three 5-term dot products.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Grid, Point};

/// Determinant floor on the coordinate-normalised normal matrix.
const DET_FLOOR: f64 = 1e-12;

/// Weights mapping stencil values `[C, E, W, N, S]` to the fit coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOperator {
    pub w_c0: [f64; 5],
    pub w_c1: [f64; 5],
    pub w_c2: [f64; 5],
}

#[inline]
fn dot5(w: &[f64; 5], u: &[f64; 5]) -> f64 {
    w[0] * u[0] + w[1] * u[1] + w[2] * u[2] + w[3] * u[3] + w[4] * u[4]
}

impl FitOperator {
    /// Solves the normal equations for the stencil `center` + `neighbors`.
    ///
    /// Fails when the 5x3 design matrix is (numerically) rank deficient; `node`
    /// is only used to label the error.
    pub fn build(center: Point, neighbors: [Point; 4], node: usize) -> Result<Self> {
        let mut pts = [center; 5];
        pts[1..].copy_from_slice(&neighbors);
        Self::from_points(&pts, node)
    }

    /// Same as [`FitOperator::build`] for an arbitrary number of points; unused
    /// slots of the 5-vector get zero weight.
    pub fn from_points(pts: &[Point], node: usize) -> Result<Self> {
        assert!(pts.len() >= 3 && pts.len() <= 5);
        let center = pts[0];
        let offsets: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] - center[0], p[1] - center[1]]).collect();
        // Normalise offsets so the determinant guard is scale free.
        let scale = offsets
            .iter()
            .map(|o| o[0].abs().max(o[1].abs()))
            .fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::DegenerateStencil { node });
        }
        let rows: Vec<[f64; 3]> = offsets.iter().map(|o| [o[0] / scale, o[1] / scale, 1.0]).collect();

        let mut m = [[0.0; 3]; 3];
        for r in &rows {
            for a in 0..3 {
                for b in 0..3 {
                    m[a][b] += r[a] * r[b];
                }
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if !(det.abs() >= DET_FLOOR) {
            return Err(Error::DegenerateStencil { node });
        }

        // Right-hand sides: A^T, one column per stencil sample.
        let mut rhs = [[0.0; 5]; 3];
        for (k, r) in rows.iter().enumerate() {
            for a in 0..3 {
                rhs[a][k] = r[a];
            }
        }
        let w = solve3(m, rhs);
        let mut op = FitOperator {
            w_c0: [0.0; 5],
            w_c1: [0.0; 5],
            w_c2: [0.0; 5],
        };
        for k in 0..pts.len() {
            op.w_c0[k] = w[0][k] / scale;
            op.w_c1[k] = w[1][k] / scale;
            op.w_c2[k] = w[2][k];
        }
        Ok(op)
    }

    /// The fitted value at the center (`c2`).
    #[inline]
    pub fn value(&self, u: &[f64; 5]) -> f64 {
        dot5(&self.w_c2, u)
    }

    /// The fitted gradient `(c0, c1)`.
    #[inline]
    pub fn gradient(&self, u: &[f64; 5]) -> (f64, f64) {
        (dot5(&self.w_c0, u), dot5(&self.w_c1, u))
    }

    /// All three coefficients `(c0, c1, c2)`.
    #[inline]
    pub fn coefficients(&self, u: &[f64; 5]) -> (f64, f64, f64) {
        (dot5(&self.w_c0, u), dot5(&self.w_c1, u), dot5(&self.w_c2, u))
    }
}

/// Gaussian elimination with partial pivoting on a 3x3 system with five
/// right-hand sides.
fn solve3(mut m: [[f64; 3]; 3], mut b: [[f64; 5]; 3]) -> [[f64; 5]; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            for k in 0..5 {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    let mut x = [[0.0; 5]; 3];
    for row in (0..3).rev() {
        for k in 0..5 {
            let mut s = b[row][k];
            for c in row + 1..3 {
                s -= m[row][c] * x[c][k];
            }
            x[row][k] = s / m[row][row];
        }
    }
    x
}

/// Convenience: fitted value of `values` on a fresh operator.
pub fn fitted_value(op: &FitOperator, values: &[f64; 5]) -> f64 {
    op.value(values)
}

/// Convenience: fitted gradient of `values` on a fresh operator.
pub fn fitted_gradient(op: &FitOperator, values: &[f64; 5]) -> (f64, f64) {
    op.gradient(values)
}

/// Per-node operators and stencil indices for a whole grid. Nodes on the outer
/// ring have no operator.
#[derive(Debug, Clone)]
pub struct FitTable {
    stencils: Vec<Option<[usize; 5]>>,
    ops: Vec<Option<FitOperator>>,
}

impl FitTable {
    pub fn build(grid: &Grid) -> Result<Self> {
        let stencils: Vec<Option<[usize; 5]>> = (0..grid.len()).map(|k| grid.stencil(k)).collect();
        let ops = stencils
            .par_iter()
            .enumerate()
            .map(|(k, s)| match s {
                None => Ok(None),
                Some(s) => {
                    let pts = s.map(|m| grid.coords[m]);
                    FitOperator::build(pts[0], [pts[1], pts[2], pts[3], pts[4]], k).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { stencils, ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    #[inline]
    pub fn has(&self, node: usize) -> bool {
        self.ops[node].is_some()
    }

    #[inline]
    pub fn stencil(&self, node: usize) -> Option<&[usize; 5]> {
        self.stencils[node].as_ref()
    }

    #[inline]
    pub fn op(&self, node: usize) -> Option<&FitOperator> {
        self.ops[node].as_ref()
    }

    /// Stencil values of `field` around `node`. Panics on outer-ring nodes.
    #[inline]
    pub fn gather(&self, node: usize, field: &[f64]) -> [f64; 5] {
        let s = self.stencils[node].as_ref().expect("node has no stencil");
        [field[s[0]], field[s[1]], field[s[2]], field[s[3]], field[s[4]]]
    }

    #[inline]
    pub fn value(&self, node: usize, field: &[f64]) -> Option<f64> {
        let op = self.ops[node].as_ref()?;
        Some(op.value(&self.gather(node, field)))
    }

    #[inline]
    pub fn gradient(&self, node: usize, field: &[f64]) -> Option<(f64, f64)> {
        let op = self.ops[node].as_ref()?;
        Some(op.gradient(&self.gather(node, field)))
    }
}
