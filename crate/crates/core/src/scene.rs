//! One-time geometry preparation: lattice, point shift, signed distance,
//! normals, node classes and least-squares operators.

use crate::error::{Error, Result};
use crate::geometry::{
    apply_point_shift, classify_nodes, find_boundary_intersections, DroppedIntersection, Domain, Grid, NodeClass,
    Shape,
};
use crate::levelset::{compute_normals_tangents, initialize_phi, redistance, LevelSet, RedistanceParams};
use crate::lsq::FitTable;

/// Everything that depends on geometry only. Immutable once built.
#[derive(Debug, Clone)]
pub struct Scene {
    pub shape: Shape,
    pub grid: Grid,
    pub classes: Vec<NodeClass>,
    pub level: LevelSet,
    pub fits: FitTable,
    pub dropped: Vec<DroppedIntersection>,
    pub redistance_iterations: usize,
}

impl Scene {
    pub fn build(shape: Shape, domain: Domain, nx: usize, ny: usize, redist: &RedistanceParams) -> Result<Self> {
        shape.validate(&domain)?;
        let lattice = Grid::uniform(domain, nx, ny)?;
        if shape.is_none() {
            let n = lattice.len();
            let fits = FitTable::build(&lattice)?;
            return Ok(Self {
                shape,
                classes: vec![NodeClass::Exterior; n],
                level: LevelSet {
                    phi: vec![f64::NEG_INFINITY; n],
                    normal: vec![[1.0, 0.0]; n],
                    tangent: vec![[0.0, -1.0]; n],
                },
                fits,
                grid: lattice,
                dropped: Vec::new(),
                redistance_iterations: 0,
            });
        }
        let shifted = apply_point_shift(&lattice, &find_boundary_intersections(&shape, &lattice))?;
        if !shifted.dropped.is_empty() {
            log::debug!("{} boundary intersections merged into already shifted nodes", shifted.dropped.len());
        }
        let grid = shifted.grid;
        let fits = FitTable::build(&grid)?;
        let phi0 = initialize_phi(&shape, &grid);
        let classes = classify_nodes(&grid, &phi0)?;
        let redistanced = redistance(&phi0, &grid, &classes, &fits, redist)?;
        let phi = redistanced.phi;
        if let Some(k) = (0..grid.len()).find(|&k| (phi[k] > 0.0) != (phi0[k] > 0.0)) {
            return Err(Error::InvalidShape(format!("redistancing flipped the sign at node {k}")));
        }
        let (normal, tangent) = compute_normals_tangents(&phi, &grid, &fits, &classes)?;
        Ok(Self {
            shape,
            grid,
            classes,
            level: LevelSet { phi, normal, tangent },
            fits,
            dropped: shifted.dropped,
            redistance_iterations: redistanced.iterations,
        })
    }

    /// Square domain with `cells` intervals per side.
    pub fn with_cells(shape: Shape, domain: Domain, cells: usize, redist: &RedistanceParams) -> Result<Self> {
        Self::build(shape, domain, cells + 1, cells + 1, redist)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}
