//! Grid-refinement studies: run a ladder of grids and a finer reference,
//! compare on a fixed band of exterior nodes around the object, and report
//! observed orders.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Grid, NodeClass, Point, Shape};
use crate::levelset::RedistanceParams;
use crate::maxwell::{run_simulation, FieldState, RunParams};
use crate::scene::Scene;

/// Exterior nodes with `−width ≤ φ < 0`; `width` is a physical length.
pub fn sampling_mask(phi: &[f64], classes: &[NodeClass], width: f64) -> Result<Vec<usize>> {
    let nodes: Vec<usize> = (0..phi.len())
        .filter(|&k| classes[k] == NodeClass::Exterior && phi[k] < 0.0 && phi[k] >= -width)
        .collect();
    if nodes.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(nodes)
}

/// Bilinear interpolation of nodal `values` of `grid` at `points`, locating
/// cells on the unshifted lattice.
pub fn interpolate_reference(grid: &Grid, values: &[f64], points: &[Point]) -> Result<Vec<f64>> {
    let d = &grid.domain;
    points
        .iter()
        .map(|&p| {
            let tol = 1e-12 * d.width().max(d.height());
            if p[0] < d.x_min - tol || p[0] > d.x_max + tol || p[1] < d.y_min - tol || p[1] > d.y_max + tol {
                return Err(Error::OutsideDomain { x: p[0], y: p[1] });
            }
            let fx = snap(((p[0] - d.x_min) / grid.dx).clamp(0.0, (grid.nx - 1) as f64));
            let fy = snap(((p[1] - d.y_min) / grid.dy).clamp(0.0, (grid.ny - 1) as f64));
            let i = (fx.floor() as usize).min(grid.nx - 2);
            let j = (fy.floor() as usize).min(grid.ny - 2);
            let (s, t) = (fx - i as f64, fy - j as f64);
            let v = |i, j| values[grid.index(i, j)];
            Ok((1.0 - s) * (1.0 - t) * v(i, j)
                + s * (1.0 - t) * v(i + 1, j)
                + (1.0 - s) * t * v(i, j + 1)
                + s * t * v(i + 1, j + 1))
        })
        .collect()
}

/// Lattice coordinates within rounding of a node are moved onto it, so a
/// query at a node returns that node's value exactly.
fn snap(f: f64) -> f64 {
    let r = f.round();
    if (f - r).abs() < 1e-9 {
        r
    } else {
        f
    }
}

/// `log2(coarse / fine)`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Inputs of a refinement study.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub shape: Shape,
    pub domain: Domain,
    /// Cells per side of each study grid, coarsest first.
    pub grids: Vec<usize>,
    /// Cells per side of the reference grid.
    pub reference: usize,
    pub run: RunParams,
    pub redistance: RedistanceParams,
    /// Band width in units of the coarsest grid spacing.
    pub band: f64,
    /// Run the study grids concurrently.
    pub parallel: bool,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.grids.len() < 2 {
            return Err(Error::config("grids", "a study needs at least two grids"));
        }
        if self.grids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("grids", "grid sizes must increase strictly"));
        }
        let finest = *self.grids.last().unwrap();
        if self.reference < 2 * finest {
            return Err(Error::config(
                "reference",
                format!("reference {} must be at least twice the finest grid {finest}", self.reference),
            ));
        }
        if !(self.band > 0.0 && self.band.is_finite()) {
            return Err(Error::config("band", "must be positive"));
        }
        Ok(())
    }

    fn coarsest_spacing(&self) -> f64 {
        let cells = self.grids[0] as f64;
        (self.domain.width() / cells).max(self.domain.height() / cells)
    }
}

/// One study grid's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: usize,
    pub spacing: f64,
    pub samples: usize,
    pub ez: f64,
    pub hx: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub reference: usize,
    /// Per grid: the result or the failure message.
    pub rows: Vec<(usize, std::result::Result<GridResult, String>)>,
}

impl ErrorReport {
    /// Orders between consecutive grids for `(ez, hx)`; `None` across gaps.
    pub fn orders(&self) -> Vec<Option<(f64, f64)>> {
        self.rows
            .windows(2)
            .map(|w| match (&w[0].1, &w[1].1) {
                (Ok(a), Ok(b)) => Some((observed_order(a.ez, b.ez), observed_order(a.hx, b.hx))),
                _ => None,
            })
            .collect()
    }

    pub fn ez_orders(&self) -> Vec<Option<f64>> {
        self.orders().into_iter().map(|o| o.map(|p| p.0)).collect()
    }

    pub fn hx_orders(&self) -> Vec<Option<f64>> {
        self.orders().into_iter().map(|o| o.map(|p| p.1)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.1.is_ok())
    }

    /// One header line and one line per grid; order columns refer to the
    /// previous (coarser) grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,dx,samples,ez_l1,ez_order,hx_l1,hx_order,max_abs,status\n");
        let orders = self.orders();
        for (i, (cells, row)) in self.rows.iter().enumerate() {
            let order = if i == 0 { None } else { orders[i - 1] };
            let fmt = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
            match row {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{},{:.17e},{},{:.17e},{},{:.17e},{},{:.17e},ok",
                        cells,
                        r.spacing,
                        r.samples,
                        r.ez,
                        fmt(order.map(|o| o.0)),
                        r.hx,
                        fmt(order.map(|o| o.1)),
                        r.max_abs
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{cells},,,,,,,,\"failed: {}\"", e.replace('"', "'"));
                }
            }
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "reference grid {0}x{0}\n{1:>6}  {2:>9}  {3:>8}  {4:>12}  {5:>6}  {6:>12}  {7:>6}\n",
            self.reference, "grid", "dx", "samples", "Ez l1", "order", "Hx(Bx) l1", "order"
        );
        let orders = self.orders();
        for (i, (cells, row)) in self.rows.iter().enumerate() {
            let order = if i == 0 { None } else { orders[i - 1] };
            let fmt = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            match row {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{:>6}  {:>9.5}  {:>8}  {:>12.4e}  {:>6}  {:>12.4e}  {:>6}",
                        cells,
                        r.spacing,
                        r.samples,
                        r.ez,
                        fmt(order.map(|o| o.0)),
                        r.hx,
                        fmt(order.map(|o| o.1))
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{cells:>6}  failed: {e}");
                }
            }
        }
        out
    }
}

/// Builds the scene for a square-cell grid with `cells` intervals per side.
pub fn build_scene(spec: &StudySpec, cells: usize) -> Result<Scene> {
    let ny = ((cells as f64) * spec.domain.height() / spec.domain.width()).round() as usize;
    Scene::build(spec.shape, spec.domain, cells + 1, ny + 1, &spec.redistance)
}

fn simulate(spec: &StudySpec, cells: usize) -> Result<(Scene, FieldState)> {
    let scene = build_scene(spec, cells)?;
    log::info!(
        "grid {cells}: {} nodes, {} boundary, {} ghost",
        scene.len(),
        scene.count(NodeClass::Boundary),
        scene.count(NodeClass::Ghost)
    );
    let state = run_simulation(&scene, &spec.run, |step, _| {
        log::trace!("grid {cells}: step {step}");
        Ok(())
    })?;
    Ok((scene, state))
}

/// Band sample points of one study grid, compared with the reference.
fn grid_errors(spec: &StudySpec, cells: usize, reference: &(Scene, FieldState)) -> Result<GridResult> {
    let (scene, state) = simulate(spec, cells)?;
    let width = spec.band * spec.coarsest_spacing();
    let mask = sampling_mask(&scene.level.phi, &scene.classes, width)?;
    let points: Vec<Point> = mask.iter().map(|&k| scene.grid.coords[k]).collect();
    let (rs, rf) = reference;
    let ref_ez = interpolate_reference(&rs.grid, &rf.ez, &points)?;
    let ref_hx = interpolate_reference(&rs.grid, &rf.hx, &points)?;
    let n = mask.len() as f64;
    let ez = mask.iter().zip(&ref_ez).map(|(&k, r)| (state.ez[k] - r).abs()).sum::<f64>() / n;
    let hx = mask.iter().zip(&ref_hx).map(|(&k, r)| (state.hx[k] - r).abs()).sum::<f64>() / n;
    let max_abs = mask
        .iter()
        .map(|&k| state.ez[k].abs().max(state.hx[k].abs()).max(state.hy[k].abs()))
        .fold(0.0, f64::max);
    Ok(GridResult {
        cells,
        spacing: scene.grid.h(),
        samples: mask.len(),
        ez,
        hx,
        max_abs,
    })
}

/// Runs the reference and every study grid. A failing study grid is recorded
/// in the report and the others still run; a failing reference is an error.
pub fn convergence_study(spec: &StudySpec) -> Result<ErrorReport> {
    spec.validate()?;
    log::info!("reference grid {}", spec.reference);
    let reference = simulate(spec, spec.reference)?;
    let run_one = |&cells: &usize| {
        let row = grid_errors(spec, cells, &reference).map_err(|e| {
            log::warn!("grid {cells} failed: {e}");
            e.to_string()
        });
        (cells, row)
    };
    let rows = if spec.parallel {
        spec.grids.par_iter().map(run_one).collect()
    } else {
        spec.grids.iter().map(run_one).collect()
    };
    Ok(ErrorReport {
        reference: spec.reference,
        rows,
    })
}

/// Free-space error of one grid against the exact plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpaceRow {
    pub cells: usize,
    pub spacing: f64,
    /// Mean absolute Ez error over all nodes.
    pub ez: f64,
    /// Mean absolute Hy error over all nodes.
    pub hy: f64,
}

/// Runs the incident wave alone (no object) on each grid and compares with
/// the exact solution at `run.final_time`.
pub fn freespace_study(domain: Domain, grids: &[usize], run: &RunParams) -> Result<Vec<FreeSpaceRow>> {
    grids
        .iter()
        .map(|&cells| {
            let ny = ((cells as f64) * domain.height() / domain.width()).round() as usize;
            let scene = Scene::build(Shape::None, domain, cells + 1, ny + 1, &RedistanceParams::default())?;
            let state = run_simulation(&scene, run, |_, _| Ok(()))?;
            let (mut ez, mut hy) = (0.0, 0.0);
            for (k, p) in scene.grid.coords.iter().enumerate() {
                let [_, hy0, ez0] = crate::maxwell::incident_wave(p[0], p[1], state.time, run.omega);
                ez += (state.ez[k] - ez0).abs();
                hy += (state.hy[k] - hy0).abs();
            }
            let n = scene.len() as f64;
            Ok(FreeSpaceRow {
                cells,
                spacing: scene.grid.h(),
                ez: ez / n,
                hy: hy / n,
            })
        })
        .collect()
}
