//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Points and lists are comma separated (`circle_center = 5, 5`).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Shape};
use crate::ghost::ExtensionParams;
use crate::levelset::RedistanceParams;
use crate::maxwell::{RunParams, Scheme, DEFAULT_OMEGA};
use crate::study::StudySpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub domain: Domain,
    pub shape: Shape,
    /// Cells per side for single runs.
    pub grid: usize,
    /// Cells per side of the study grids, coarsest first.
    pub grids: Vec<usize>,
    /// Cells per side of the study reference.
    pub reference: usize,
    pub dt_ratio: f64,
    pub omega: f64,
    pub final_time: f64,
    pub scheme: Scheme,
    /// Sampling band half-width in coarsest-grid spacings.
    pub band: f64,
    /// Time between field snapshots of single runs.
    pub snapshot_interval: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub vtk: bool,
    pub parallel_grids: bool,
    pub redistance: RedistanceParams,
    pub extension: ExtensionParams,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            domain: Domain::square(10.0).expect("valid default domain"),
            shape: Shape::circle([5.0, 5.0], 2.0),
            grid: 100,
            grids: vec![100, 200, 400],
            reference: 800,
            dt_ratio: 1.0,
            omega: DEFAULT_OMEGA,
            final_time: 1.0,
            scheme: Scheme::Bfecc,
            band: 10.0,
            snapshot_interval: None,
            output_dir: None,
            vtk: false,
            parallel_grids: false,
            redistance: RedistanceParams::default(),
            extension: ExtensionParams::default(),
        }
    }
}

/// Shape keys gathered before the shape is assembled.
#[derive(Default)]
struct ShapeKeys {
    kind: Option<String>,
    circle_center: Option<[f64; 2]>,
    circle_radius: Option<f64>,
    outer_center: Option<[f64; 2]>,
    outer_radius: Option<f64>,
    cutter_center: Option<[f64; 2]>,
    cutter_radius: Option<f64>,
}

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(field, s))
        .collect()
}

fn parse_point(field: &str, value: &str) -> Result<[f64; 2]> {
    match parse_list::<f64>(field, value)?.as_slice() {
        &[x, y] => Ok([x, y]),
        other => Err(Error::config(field, format!("expected 2 numbers, got {}", other.len()))),
    }
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(field, format!("expected true or false, got '{value}'"))),
    }
}

impl SimulationConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::ConfigNotFound(path.to_path_buf())),
            Err(e) => return Err(Error::io(path, e)),
        };
        Self::parse_named(&text, path)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, Path::new("<config>"))
    }

    fn parse_named(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut shape = ShapeKeys::default();
        let mut domain: Option<Vec<f64>> = None;
        let mut grid_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "shape" => shape.kind = Some(value.to_ascii_lowercase()),
                "circle_center" => shape.circle_center = Some(parse_point(key, value)?),
                "circle_radius" => shape.circle_radius = Some(parse_num(key, value)?),
                "moon_outer_center" => shape.outer_center = Some(parse_point(key, value)?),
                "moon_outer_radius" => shape.outer_radius = Some(parse_num(key, value)?),
                "moon_cutter_center" => shape.cutter_center = Some(parse_point(key, value)?),
                "moon_cutter_radius" => shape.cutter_radius = Some(parse_num(key, value)?),
                "domain" => domain = Some(parse_list(key, value)?),
                "grid" => {
                    cfg.grid = parse_num(key, value)?;
                    grid_set = true;
                }
                "grids" => cfg.grids = parse_list(key, value)?,
                "reference" => cfg.reference = parse_num(key, value)?,
                "dt_ratio" => cfg.dt_ratio = parse_num(key, value)?,
                "omega" => cfg.omega = parse_num(key, value)?,
                "final_time" => cfg.final_time = parse_num(key, value)?,
                "scheme" => cfg.scheme = value.parse().map_err(|e: String| Error::config(key, e))?,
                "band" => cfg.band = parse_num(key, value)?,
                "snapshot_interval" => cfg.snapshot_interval = Some(parse_num(key, value)?),
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                "vtk" => cfg.vtk = parse_bool(key, value)?,
                "parallel_grids" => cfg.parallel_grids = parse_bool(key, value)?,
                "redistance_cfl" => cfg.redistance.pseudo_cfl = parse_num(key, value)?,
                "redistance_tol" => cfg.redistance.tol = parse_num(key, value)?,
                "redistance_max_iter" => cfg.redistance.max_iter = Some(parse_num(key, value)?),
                "redistance_band" => cfg.redistance.band = Some(parse_num(key, value)?),
                "extension_cfl" => cfg.extension.pseudo_cfl = parse_num(key, value)?,
                "extension_steps" => cfg.extension.steps = parse_num(key, value)?,
                other => return Err(parse_err(format!("unknown key '{other}'"))),
            }
        }
        if let Some(d) = domain {
            match d.as_slice() {
                &[x0, y0, x1, y1] => cfg.domain = Domain::new(x0, y0, x1, y1)?,
                _ => return Err(Error::config("domain", "expected x_min, y_min, x_max, y_max")),
            }
        }
        cfg.shape = build_shape(shape)?;
        if !grid_set {
            if let Some(&g) = cfg.grids.first() {
                cfg.grid = g;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges, resolution and the causality bound of the outer
    /// boundary data. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("dt_ratio", self.dt_ratio)?;
        positive("omega", self.omega)?;
        positive("final_time", self.final_time)?;
        positive("band", self.band)?;
        positive("redistance_cfl", self.redistance.pseudo_cfl)?;
        positive("redistance_tol", self.redistance.tol)?;
        positive("extension_cfl", self.extension.pseudo_cfl)?;
        if let Some(s) = self.snapshot_interval {
            positive("snapshot_interval", s)?;
        }
        if self.extension.steps == 0 {
            return Err(Error::config("extension_steps", "must be at least 1"));
        }
        let min_cells = crate::geometry::MIN_NODES - 1;
        if self.grid < min_cells {
            return Err(Error::config("grid", format!("needs at least {min_cells} cells")));
        }
        if self.grids.iter().any(|&g| g < min_cells) {
            return Err(Error::config("grids", format!("every grid needs at least {min_cells} cells")));
        }
        if self.reference < min_cells {
            return Err(Error::config("reference", format!("needs at least {min_cells} cells")));
        }
        self.shape
            .validate(&self.domain)
            .map_err(|e| Error::config("shape", e.to_string()))?;
        if !self.shape.is_none() {
            let clearance = self.shape.clearance(&self.domain);
            if self.final_time > clearance {
                return Err(Error::config(
                    "final_time",
                    format!(
                        "{} exceeds the causality bound {clearance} (distance from the object to the domain edge)",
                        self.final_time
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            dt_ratio: self.dt_ratio,
            final_time: self.final_time,
            omega: self.omega,
            scheme: self.scheme,
            extension: self.extension,
        }
    }

    pub fn study_spec(&self) -> StudySpec {
        StudySpec {
            shape: self.shape,
            domain: self.domain,
            grids: self.grids.clone(),
            reference: self.reference,
            run: self.run_params(),
            redistance: self.redistance,
            band: self.band,
            parallel: self.parallel_grids,
        }
    }

    /// Node counts per side for a grid with `cells` intervals across the
    /// domain width and square cells.
    pub fn nodes_for(&self, cells: usize) -> (usize, usize) {
        let ny = ((cells as f64) * self.domain.height() / self.domain.width()).round() as usize;
        (cells + 1, ny + 1)
    }
}

fn build_shape(keys: ShapeKeys) -> Result<Shape> {
    let kind = keys.kind.as_deref().unwrap_or("circle");
    match kind {
        "none" => Ok(Shape::None),
        "circle" => Ok(Shape::circle(
            keys.circle_center.unwrap_or([5.0, 5.0]),
            keys.circle_radius.unwrap_or(2.0),
        )),
        "half_moon" | "halfmoon" | "crescent" => {
            let Shape::HalfMoon {
                outer_center,
                outer_radius,
                cutter_center,
                cutter_radius,
            } = Shape::default_half_moon()
            else {
                unreachable!()
            };
            Ok(Shape::HalfMoon {
                outer_center: keys.outer_center.unwrap_or(outer_center),
                outer_radius: keys.outer_radius.unwrap_or(outer_radius),
                cutter_center: keys.cutter_center.unwrap_or(cutter_center),
                cutter_radius: keys.cutter_radius.unwrap_or(cutter_radius),
            })
        }
        other => Err(Error::config(
            "shape",
            format!("unknown shape '{other}' (expected none, circle or half_moon)"),
        )),
    }
}
