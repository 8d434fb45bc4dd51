//! CSV and legacy-VTK output of grids, level sets and field states.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Grid, NodeClass};
use crate::levelset::LevelSet;
use crate::maxwell::FieldState;

/// Header of field CSV files.
pub const FIELD_HEADER: &str = "x,y,class,phi,hx,hy,ez";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// 17 significant digits: enough for a bitwise round trip.
#[inline]
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per node in row-major order: `x,y,class,phi,hx,hy,ez`.
pub fn export_field(path: &Path, grid: &Grid, classes: &[NodeClass], phi: &[f64], state: &FieldState) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{FIELD_HEADER}").map_err(io)?;
    for k in 0..grid.len() {
        let p = grid.coords[k];
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(p[0]),
            num(p[1]),
            classes[k].as_str(),
            num(phi[k]),
            num(state.hx[k]),
            num(state.hy[k]),
            num(state.ez[k])
        )
        .map_err(io)?;
    }
    finish(w, path)
}

/// A parsed row of a field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub y: f64,
    pub class: NodeClass,
    pub phi: f64,
    pub hx: f64,
    pub hy: f64,
    pub ez: f64,
}

/// Reads a file written by [`export_field`].
pub fn read_field(path: &Path) -> Result<Vec<FieldRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        if i == 0 {
            if line.trim() != FIELD_HEADER {
                return Err(err(format!("expected header '{FIELD_HEADER}'")));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(err(format!("expected 7 columns, got {}", cols.len())));
        }
        let f = |c: &str| c.trim().parse::<f64>().map_err(|_| err(format!("bad number '{c}'")));
        rows.push(FieldRow {
            x: f(cols[0])?,
            y: f(cols[1])?,
            class: cols[2].parse().map_err(|e: String| err(e))?,
            phi: f(cols[3])?,
            hx: f(cols[4])?,
            hy: f(cols[5])?,
            ez: f(cols[6])?,
        });
    }
    Ok(rows)
}

/// Legacy-VTK structured points on the unshifted lattice with nodal scalars
/// `phi`, `class` (0 exterior, 1 boundary, 2 ghost, 3 deep interior), `hx`,
/// `hy`, `ez`. Infinite φ (no object) is written as the largest finite value.
pub fn export_vtk(path: &Path, grid: &Grid, classes: &[NodeClass], phi: &[f64], state: &FieldState) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let d = &grid.domain;
    write!(
        w,
        "# vtk DataFile Version 3.0\nfields t={}\nASCII\nDATASET STRUCTURED_POINTS\nDIMENSIONS {} {} 1\nORIGIN {} {} 0\nSPACING {} {} 1\nPOINT_DATA {}\n",
        num(state.time),
        grid.nx,
        grid.ny,
        num(d.x_min),
        num(d.y_min),
        num(grid.dx),
        num(grid.dy),
        grid.len()
    )
    .map_err(io)?;
    let class_code = |c: NodeClass| match c {
        NodeClass::Exterior => 0.0,
        NodeClass::Boundary => 1.0,
        NodeClass::Ghost => 2.0,
        NodeClass::DeepInterior => 3.0,
    };
    let class_vals: Vec<f64> = classes.iter().map(|&c| class_code(c)).collect();
    let phi_vals: Vec<f64> = phi.iter().map(|&v| v.clamp(f64::MIN, f64::MAX)).collect();
    for (name, values) in [
        ("phi", &phi_vals),
        ("class", &class_vals),
        ("hx", &state.hx),
        ("hy", &state.hy),
        ("ez", &state.ez),
    ] {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default").map_err(io)?;
        for v in values.iter() {
            writeln!(w, "{}", num(*v)).map_err(io)?;
        }
    }
    finish(w, path)
}

/// Grid dump: `i,j,x,y,shifted,class`.
pub fn export_grid(path: &Path, grid: &Grid, classes: &[NodeClass]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "i,j,x,y,shifted,class").map_err(io)?;
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        let p = grid.coords[k];
        writeln!(
            w,
            "{i},{j},{},{},{},{}",
            num(p[0]),
            num(p[1]),
            u8::from(grid.shifted[k]),
            classes[k].as_str()
        )
        .map_err(io)?;
    }
    finish(w, path)
}

/// Level-set dump: `x,y,phi,nx,ny`.
pub fn export_levelset(path: &Path, grid: &Grid, level: &LevelSet) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "x,y,phi,nx,ny").map_err(io)?;
    for k in 0..grid.len() {
        let p = grid.coords[k];
        let n = level.normal[k];
        writeln!(w, "{},{},{},{},{}", num(p[0]), num(p[1]), num(level.phi[k]), num(n[0]), num(n[1])).map_err(io)?;
    }
    finish(w, path)
}
