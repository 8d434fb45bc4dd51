//! Time-domain TMz Maxwell solver for scattering off perfectly conducting
//! objects on point-shifted rectangular grids.
//!
//! The pipeline, one module per stage:
//!
//! - [`geometry`]: lattice, object shapes, point shifting onto the object
//!   surface and node classification.
//! - [`lsq`]: per-node five-point least-squares plane fits (value and
//!   gradient weights).
//! - [`levelset`]: signed distance by pseudo-time redistancing, normals and
//!   tangents.
//! - [`scene`]: everything above bundled for one grid.
//! - [`ghost`]: first-order Taylor ghost values inside the conductor.
//! - [`maxwell`]: least-squares sweeps, PEC conditions, BFECC stepping.
//! - [`study`], [`config`], [`export`]: refinement studies, run
//!   configuration and file output.

pub mod config;
pub mod error;
pub mod export;
pub mod geometry;
pub mod ghost;
pub mod levelset;
pub mod lsq;
pub mod maxwell;
pub mod scene;
pub mod study;

pub use config::SimulationConfig;
pub use error::{Error, Result};
pub use geometry::{Domain, Grid, NodeClass, Point, Shape};
pub use ghost::{ExtensionParams, GhostExtender, UpdateRegion};
pub use levelset::{LevelSet, RedistanceParams};
pub use lsq::{FitOperator, FitTable};
pub use maxwell::{
    incident_wave, run_simulation, FieldState, RunParams, Scheme, SchemeDirection, Solver, DEFAULT_OMEGA,
};
pub use scene::Scene;
pub use study::{convergence_study, ErrorReport, GridResult, StudySpec};
