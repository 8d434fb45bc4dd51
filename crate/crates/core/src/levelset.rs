//! Signed distance to the PEC boundary (positive inside) by pseudo-time
//! redistancing, plus the unit normal and tangent fields derived from it.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Grid, NodeClass, Point, Shape};
use crate::lsq::FitTable;

/// Smoothed sign `x / sqrt(x^2 + dx^2)`.
#[inline]
pub fn smoothed_sign(x: f64, dx: f64) -> f64 {
    x / (x * x + dx * dx).sqrt()
}

/// Sign-correct starting guess: the shape's analytic level function, exactly
/// zero at shifted nodes.
pub fn initialize_phi(shape: &Shape, grid: &Grid) -> Vec<f64> {
    grid.coords
        .iter()
        .zip(&grid.shifted)
        .map(|(&p, &s)| if s { 0.0 } else { shape.level_value(p) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedistanceParams {
    /// Pseudo-time step over grid spacing.
    pub pseudo_cfl: f64,
    /// Stop once the largest per-node update drops below `tol * dx`.
    pub tol: f64,
    /// Defaults to `max(nx, ny) / pseudo_cfl`.
    pub max_iter: Option<usize>,
    /// Only update nodes with `|phi0| <= band * dx` when set.
    pub band: Option<f64>,
}

impl Default for RedistanceParams {
    fn default() -> Self {
        Self {
            pseudo_cfl: 0.2,
            tol: 1e-3,
            max_iter: None,
            band: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Redistanced {
    pub phi: Vec<f64>,
    pub iterations: usize,
    pub max_update: f64,
}

/// Iterates `phi <- phi - dtau * sgn(phi) * (|grad phi| - 1)` to steady state.
///
/// `|grad phi|` is the gradient of the plane through the node and its upwind
/// neighbors (at most one per lattice axis, chosen Godunov style), using the
/// true shifted coordinates. Boundary nodes stay at exactly zero and the outer
/// ring is filled by linear extrapolation from inside.
pub fn redistance(
    phi0: &[f64],
    grid: &Grid,
    classes: &[NodeClass],
    fits: &FitTable,
    params: &RedistanceParams,
) -> Result<Redistanced> {
    let h = grid.h();
    let dtau = params.pseudo_cfl * h;
    let max_iter = params
        .max_iter
        .unwrap_or_else(|| (grid.nx.max(grid.ny) as f64 / params.pseudo_cfl).ceil() as usize);
    let threshold = params.tol * h;
    let active: Vec<bool> = (0..grid.len())
        .map(|k| {
            fits.has(k)
                && classes[k] != NodeClass::Boundary
                && params.band.map_or(true, |b| phi0[k].abs() <= b * h)
        })
        .collect();

    let mut cur: Vec<f64> = phi0.to_vec();
    for (k, c) in classes.iter().enumerate() {
        if *c == NodeClass::Boundary {
            cur[k] = 0.0;
        }
    }
    let mut next = cur.clone();
    let mut iterations = 0;
    let mut max_update = f64::INFINITY;
    while iterations < max_iter {
        next.par_iter_mut().enumerate().for_each(|(k, out)| {
            *out = if active[k] {
                let phi = cur[k];
                let g = upwind_gradient_norm(grid, fits.stencil(k).unwrap(), &cur);
                phi - dtau * smoothed_sign(phi, h) * (g - 1.0)
            } else {
                cur[k]
            };
        });
        extrapolate_outer_ring(grid, &mut next);
        max_update = (0..grid.len())
            .into_par_iter()
            .filter(|&k| active[k])
            .map(|k| (next[k] - cur[k]).abs())
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if max_update < threshold {
            break;
        }
    }
    if max_update > 10.0 * threshold {
        return Err(Error::RedistanceNotConverged {
            iterations,
            max_update,
        });
    }
    if max_update >= threshold {
        log::warn!("redistancing stopped at max_iter={iterations} with update {max_update:.3e}");
    }
    Ok(Redistanced {
        phi: cur,
        iterations,
        max_update,
    })
}

/// Godunov-upwinded gradient magnitude on the 5-point stencil `[C, E, W, N, S]`.
///
/// Information travels away from the interface, so a neighbor is upwind when
/// it is closer to the zero level than the center. Per axis the steeper upwind
/// neighbor is kept; the gradient is the plane through the center and the kept
/// neighbors.
pub fn upwind_gradient_norm(grid: &Grid, stencil: &[usize; 5], phi: &[f64]) -> f64 {
    let c = stencil[0];
    let (pc, fc) = (grid.coords[c], phi[c]);
    let sign = if fc >= 0.0 { 1.0 } else { -1.0 };
    let mut chosen: [Option<([f64; 2], f64, f64)>; 2] = [None, None];
    for axis in 0..2 {
        for &m in &stencil[1 + 2 * axis..3 + 2 * axis] {
            let e = [grid.coords[m][0] - pc[0], grid.coords[m][1] - pc[1]];
            let len = e[0].hypot(e[1]);
            let df = phi[m] - fc;
            let strength = -sign * df / len;
            if strength > 0.0 && chosen[axis].map_or(true, |(_, _, s)| strength > s) {
                chosen[axis] = Some((e, df, strength));
            }
        }
    }
    match chosen {
        [Some((e1, d1, s1)), Some((e2, d2, s2))] => {
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            let norms = e1[0].hypot(e1[1]) * e2[0].hypot(e2[1]);
            if det.abs() < 0.1 * norms {
                return s1.max(s2);
            }
            let gx = (d1 * e2[1] - d2 * e1[1]) / det;
            let gy = (e1[0] * d2 - e2[0] * d1) / det;
            gx.hypot(gy)
        }
        [Some((_, _, s)), None] | [None, Some((_, _, s))] => s,
        [None, None] => 0.0,
    }
}

/// Outer-ring values from the two inward neighbors: `2 a - b`.
fn extrapolate_outer_ring(grid: &Grid, phi: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let inward = |i: usize, n: usize| -> isize {
        if i == 0 {
            1
        } else if i + 1 == n {
            -1
        } else {
            0
        }
    };
    let mut fill = |i: usize, j: usize| {
        let (di, dj) = (inward(i, nx), inward(j, ny));
        let at = |s: isize| grid.index((i as isize + s * di) as usize, (j as isize + s * dj) as usize);
        phi[at(0)] = 2.0 * phi[at(1)] - phi[at(2)];
    };
    for i in 0..nx {
        fill(i, 0);
        fill(i, ny - 1);
    }
    for j in 1..ny - 1 {
        fill(0, j);
        fill(nx - 1, j);
    }
}

/// Least-squares `|grad phi|` per node; `None` on the outer ring.
pub fn gradient_magnitude(phi: &[f64], fits: &FitTable) -> Vec<Option<f64>> {
    (0..phi.len())
        .into_par_iter()
        .map(|k| fits.gradient(k, phi).map(|(gx, gy)| gx.hypot(gy)))
        .collect()
}

/// Below this gradient magnitude the normal direction is undefined.
const NORMAL_FLOOR: f64 = 1e-8;

/// Clockwise rotation of `n` by a quarter turn.
#[inline]
pub fn tangent_of(n: Point) -> Point {
    [n[1], -n[0]]
}

/// `n = grad phi / |grad phi|` and `t = (n_y, -n_x)` at every node.
///
/// Nodes without a usable gradient (outer ring, medial-axis points) copy the
/// nearest valid normal, except near the PEC boundary, where that is an error.
pub fn compute_normals_tangents(
    phi: &[f64],
    grid: &Grid,
    fits: &FitTable,
    classes: &[NodeClass],
) -> Result<(Vec<Point>, Vec<Point>)> {
    let n = grid.len();
    let raw: Vec<Option<Point>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (gx, gy) = fits.gradient(k, phi)?;
            let m = gx.hypot(gy);
            (m >= NORMAL_FLOOR).then(|| [gx / m, gy / m])
        })
        .collect();

    let near_boundary = |k: usize| match classes[k] {
        NodeClass::Ghost | NodeClass::Boundary => true,
        NodeClass::Exterior => grid.neighbors[k]
            .iter()
            .flatten()
            .any(|&m| matches!(classes[m], NodeClass::Boundary | NodeClass::Ghost)),
        NodeClass::DeepInterior => false,
    };
    for k in 0..n {
        if raw[k].is_none() && fits.has(k) && near_boundary(k) {
            let (gx, gy) = fits.gradient(k, phi).unwrap();
            return Err(Error::DegenerateNormal {
                node: k,
                magnitude: gx.hypot(gy),
            });
        }
    }

    let mut normal: Vec<Option<Point>> = raw;
    let mut queue: VecDeque<usize> = (0..n).filter(|&k| normal[k].is_some()).collect();
    while let Some(k) = queue.pop_front() {
        let v = normal[k];
        for &m in grid.neighbors[k].iter().flatten() {
            if normal[m].is_none() {
                normal[m] = v;
                queue.push_back(m);
            }
        }
    }
    let normal: Vec<Point> = normal.into_iter().map(|v| v.unwrap_or([1.0, 0.0])).collect();
    let tangent = normal.iter().map(|&v| tangent_of(v)).collect();
    Ok((normal, tangent))
}

/// Signed distance with its derived normal and tangent fields.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub phi: Vec<f64>,
    pub normal: Vec<Point>,
    pub tangent: Vec<Point>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_point_shift, classify_nodes, find_boundary_intersections, Domain};

    struct Setup {
        shape: Shape,
        grid: Grid,
        classes: Vec<NodeClass>,
        fits: FitTable,
        phi0: Vec<f64>,
    }

    fn setup(shape: Shape, cells: usize) -> Setup {
        let g = Grid::with_cells(Domain::square(10.0).unwrap(), cells).unwrap();
        let grid = apply_point_shift(&g, &find_boundary_intersections(&shape, &g)).unwrap().grid;
        let phi0 = initialize_phi(&shape, &grid);
        let classes = classify_nodes(&grid, &phi0).unwrap();
        let fits = FitTable::build(&grid).unwrap();
        Setup {
            shape,
            grid,
            classes,
            fits,
            phi0,
        }
    }

    fn circle() -> Shape {
        Shape::circle([5.0, 5.0], 2.0)
    }

    #[test]
    fn smoothed_sign_examples() {
        assert_eq!(smoothed_sign(0.0, 0.3), 0.0);
        assert!((smoothed_sign(0.1, 0.1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((smoothed_sign(-1.0, 0.1) - (-10.0 / 101f64.sqrt())).abs() < 1e-15);
        assert!((smoothed_sign(-1.0, 0.1) + 0.99504).abs() < 1e-5);
    }

    #[test]
    fn initial_phi_examples() {
        let g = Grid::with_cells(Domain::square(10.0).unwrap(), 100).unwrap();
        let mut g2 = g.clone();
        let k = g.index(50, 50);
        let k2 = g.index(50, 80);
        g2.coords[k] = [5.0, 5.0];
        let phi = initialize_phi(&circle(), &g2);
        assert_eq!(phi[k], 2.0);
        assert_eq!(phi[k2], -1.0);
        let hm = Shape::default_half_moon();
        assert_eq!(hm.level_value([6.2, 5.0]), -2.0);
        let s = setup(circle(), 100);
        for k in 0..s.grid.len() {
            if s.grid.shifted[k] {
                assert_eq!(s.phi0[k], 0.0);
            }
        }
    }

    #[test]
    fn exact_distance_stays_within_second_order_band() {
        for cells in [100, 200] {
            let s = setup(circle(), cells);
            let r = redistance(&s.phi0, &s.grid, &s.classes, &s.fits, &RedistanceParams::default()).unwrap();
            let h = s.grid.dx;
            let grad = gradient_magnitude(&r.phi, &s.fits);
            for k in 0..s.grid.len() {
                let p = s.grid.coords[k];
                if s.shape.boundary_distance(p) <= 5.0 * h {
                    assert!((r.phi[k] - s.shape.signed_distance(p)).abs() <= 2.0 * h * h + 1e-6);
                    assert!((grad[k].unwrap() - 1.0).abs() <= 0.05);
                }
            }
        }
    }

    #[test]
    fn halved_distance_recovers_exact_distance() {
        let s = setup(circle(), 200);
        let half: Vec<f64> = s.phi0.iter().map(|p| 0.5 * p).collect();
        let r = redistance(&half, &s.grid, &s.classes, &s.fits, &RedistanceParams::default()).unwrap();
        let k = s.grid.index(100, 160); // (5, 8): one unit outside
        assert!((r.phi[k] + 1.0).abs() <= 0.02, "{}", r.phi[k]);
        for k in 0..s.grid.len() {
            assert_eq!(r.phi[k] > 0.0, s.phi0[k] > 0.0, "sign flip at {k}");
            if s.classes[k] == NodeClass::Boundary {
                assert_eq!(r.phi[k], 0.0);
            }
        }
        let grad = gradient_magnitude(&r.phi, &s.fits);
        let h = s.grid.dx;
        for k in 0..s.grid.len() {
            if s.shape.boundary_distance(s.grid.coords[k]) <= 5.0 * h {
                let g = grad[k].unwrap();
                assert!((g - 1.0).abs() <= 0.05, "node {k}: {g}");
            }
        }
    }

    #[test]
    fn half_moon_redistance_converges_and_keeps_sign() {
        let s = setup(Shape::default_half_moon(), 100);
        let r = redistance(&s.phi0, &s.grid, &s.classes, &s.fits, &RedistanceParams::default()).unwrap();
        for k in 0..s.grid.len() {
            assert_eq!(r.phi[k] > 0.0, s.phi0[k] > 0.0);
        }
        // Near the interface the result approaches the exact crescent distance.
        let h = s.grid.dx;
        let mut worst: f64 = 0.0;
        for k in 0..s.grid.len() {
            let p = s.grid.coords[k];
            if s.shape.boundary_distance(p) <= 3.0 * h {
                worst = worst.max((r.phi[k] - s.shape.signed_distance(p)).abs());
            }
        }
        assert!(worst < 0.5 * h, "{worst}");
    }

    #[test]
    fn band_limited_mode_only_touches_band() {
        let s = setup(Shape::default_half_moon(), 100);
        let params = RedistanceParams {
            band: Some(12.0),
            ..Default::default()
        };
        let r = redistance(&s.phi0, &s.grid, &s.classes, &s.fits, &params).unwrap();
        for k in 0..s.grid.len() {
            if s.fits.has(k) && s.phi0[k].abs() > 12.0 * s.grid.dx {
                assert_eq!(r.phi[k], s.phi0[k]);
            }
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let s = setup(circle(), 100);
        let half: Vec<f64> = s.phi0.iter().map(|p| 0.5 * p).collect();
        let params = RedistanceParams {
            max_iter: Some(2),
            ..Default::default()
        };
        let r = redistance(&half, &s.grid, &s.classes, &s.fits, &params);
        assert!(matches!(r, Err(Error::RedistanceNotConverged { iterations: 2, .. })));
    }

    #[test]
    fn normals_and_tangents() {
        let s = setup(circle(), 200);
        let exact: Vec<f64> = s.grid.coords.iter().map(|&p| 2.0 - (p[0] - 5.0).hypot(p[1] - 5.0)).collect();
        let (n, t) = compute_normals_tangents(&exact, &s.grid, &s.fits, &s.classes).unwrap();
        let south = s.grid.index(100, 60); // (5, 3)
        // Into the PEC, i.e. toward the center.
        assert!((n[south][0]).abs() < 1e-9 && (n[south][1] - 1.0).abs() < 1e-9, "{:?}", n[south]);
        assert!((t[south][0] - 1.0).abs() < 1e-9 && t[south][1].abs() < 1e-9);
        let ne = s.grid.index(130, 130); // (6.5, 6.5)
        let r = 0.5f64.sqrt();
        assert!((n[ne][0] + r).abs() < 1e-6 && (n[ne][1] + r).abs() < 1e-6, "{:?}", n[ne]);
        for k in 0..s.grid.len() {
            let (a, b) = (n[k], t[k]);
            assert!((a[0].hypot(a[1]) - 1.0).abs() < 1e-12);
            assert!((b[0].hypot(b[1]) - 1.0).abs() < 1e-12);
            assert!((a[0] * b[0] + a[1] * b[1]).abs() < 1e-14);
            // Clockwise: n x t = -1.
            assert!((a[0] * b[1] - a[1] * b[0] + 1.0).abs() < 1e-12);
        }
        assert_eq!(tangent_of([0.0, 1.0]), [1.0, -0.0]);
    }
}
