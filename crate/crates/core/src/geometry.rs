//! Rectangular lattice, analytic PEC shapes, point shifting and node classification.
//!
//! Nodes are stored row-major: index `j * nx + i`, with `i` running along x.
//! Shifting moves coordinates only; the E/W/N/S adjacency always stays the
//! lattice adjacency.

use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Minimum node count per direction for the 5-point stencils to make sense.
pub const MIN_NODES: usize = 8;

/// Stencil slot order used everywhere: center, east, west, north, south.
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Domain {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let d = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        if !(d.width() > 0.0 && d.height() > 0.0) || !d.width().is_finite() || !d.height().is_finite() {
            return Err(Error::InvalidDomain(format!(
                "[{x_min}, {x_max}] x [{y_min}, {y_max}] has non-positive extent"
            )));
        }
        Ok(d)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

/// Cross section of the PEC cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    None,
    Circle {
        center: Point,
        radius: f64,
    },
    /// Outer disk minus the cutter disk.
    HalfMoon {
        outer_center: Point,
        outer_radius: f64,
        cutter_center: Point,
        cutter_radius: f64,
    },
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed distance to a disk, positive inside.
fn disk_level(center: Point, radius: f64, p: Point) -> f64 {
    radius - dist(center, p)
}

/// Points of the circle on the line `coord[axis] = value`.
fn circle_line_crossings(center: Point, radius: f64, axis: usize, value: f64) -> Vec<Point> {
    let other = 1 - axis;
    let d = value - center[axis];
    let disc = radius * radius - d * d;
    if disc < 0.0 {
        return Vec::new();
    }
    let mk = |o: f64| {
        let mut p = [0.0; 2];
        p[axis] = value;
        p[other] = o;
        p
    };
    if disc == 0.0 {
        return vec![mk(center[other])];
    }
    let h = disc.sqrt();
    vec![mk(center[other] - h), mk(center[other] + h)]
}

impl Shape {
    pub fn circle(center: Point, radius: f64) -> Self {
        Shape::Circle { center, radius }
    }

    /// Crescent with two sharp corners: disk (5,5) r=2 minus disk (6.2,5) r=2.
    pub fn default_half_moon() -> Self {
        Shape::HalfMoon {
            outer_center: [5.0, 5.0],
            outer_radius: 2.0,
            cutter_center: [6.2, 5.0],
            cutter_radius: 2.0,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Shape::None)
    }

    /// Axis-aligned bounding box `(min, max)`; `None` for the empty shape.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match *self {
            Shape::None => None,
            Shape::Circle { center, radius } => Some((
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            )),
            Shape::HalfMoon {
                outer_center: c,
                outer_radius: r,
                ..
            } => Some(([c[0] - r, c[1] - r], [c[0] + r, c[1] + r])),
        }
    }

    /// Smallest distance between the shape's bounding box and the domain edge.
    pub fn clearance(&self, domain: &Domain) -> f64 {
        match self.bounding_box() {
            None => f64::INFINITY,
            Some((lo, hi)) => (lo[0] - domain.x_min)
                .min(lo[1] - domain.y_min)
                .min(domain.x_max - hi[0])
                .min(domain.y_max - hi[1]),
        }
    }

    /// Characteristic radius used for the clearance rule.
    fn radius(&self) -> f64 {
        match *self {
            Shape::None => 0.0,
            Shape::Circle { radius, .. } => radius,
            Shape::HalfMoon { outer_radius, .. } => outer_radius,
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        match *self {
            Shape::None => return Ok(()),
            Shape::Circle { radius, center } => {
                if !(radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidShape(format!("circle radius {radius} must be positive")));
                }
            }
            Shape::HalfMoon {
                outer_center,
                outer_radius,
                cutter_center,
                cutter_radius,
            } => {
                if !(outer_radius > 0.0 && cutter_radius > 0.0) {
                    return Err(Error::InvalidShape("half-moon radii must be positive".into()));
                }
                let d = dist(outer_center, cutter_center);
                if !(d < outer_radius + cutter_radius && d > (outer_radius - cutter_radius).abs()) {
                    return Err(Error::InvalidShape(
                        "half-moon disks must intersect at exactly two points".into(),
                    ));
                }
            }
        }
        let clearance = self.clearance(domain);
        if clearance < 0.5 * self.radius() {
            return Err(Error::InvalidShape(format!(
                "clearance {clearance} to the domain edge is below radius/2"
            )));
        }
        Ok(())
    }

    /// Sign-correct level value (positive inside). Exact signed distance for
    /// the circle; the CSG combination `min(outer, -cutter)` for the half moon.
    pub fn level_value(&self, p: Point) -> f64 {
        match *self {
            Shape::None => f64::NEG_INFINITY,
            Shape::Circle { center, radius } => disk_level(center, radius, p),
            Shape::HalfMoon {
                outer_center,
                outer_radius,
                cutter_center,
                cutter_radius,
            } => disk_level(outer_center, outer_radius, p).min(-disk_level(cutter_center, cutter_radius, p)),
        }
    }

    /// The two sharp corners of the half moon, ordered by y.
    pub fn corners(&self) -> Vec<Point> {
        match *self {
            Shape::HalfMoon {
                outer_center: c0,
                outer_radius: r0,
                cutter_center: c1,
                cutter_radius: r1,
            } => {
                let d = dist(c0, c1);
                let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
                let h = (r0 * r0 - a * a).max(0.0).sqrt();
                let (ux, uy) = ((c1[0] - c0[0]) / d, (c1[1] - c0[1]) / d);
                let m = [c0[0] + a * ux, c0[1] + a * uy];
                let mut pts = vec![[m[0] + h * uy, m[1] - h * ux], [m[0] - h * uy, m[1] + h * ux]];
                pts.sort_by(|p, q| p[1].total_cmp(&q[1]));
                pts
            }
            _ => Vec::new(),
        }
    }

    /// Unsigned distance from `p` to the boundary curve.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match *self {
            Shape::None => f64::INFINITY,
            Shape::Circle { center, radius } => (dist(center, p) - radius).abs(),
            Shape::HalfMoon {
                outer_center,
                outer_radius,
                cutter_center,
                cutter_radius,
            } => {
                let corners = self.corners();
                // Distance to an arc: radial distance when the radial projection
                // lands on the arc, otherwise distance to the nearer corner.
                let arc = |c: Point, r: f64, keep: &dyn Fn(Point) -> bool| {
                    let d = dist(c, p);
                    let proj = if d > 0.0 {
                        [c[0] + r * (p[0] - c[0]) / d, c[1] + r * (p[1] - c[1]) / d]
                    } else {
                        [c[0] + r, c[1]]
                    };
                    if keep(proj) {
                        (d - r).abs()
                    } else {
                        corners.iter().map(|&k| dist(k, p)).fold(f64::INFINITY, f64::min)
                    }
                };
                let outer = arc(outer_center, outer_radius, &|q| dist(q, cutter_center) >= cutter_radius);
                let inner = arc(cutter_center, cutter_radius, &|q| dist(q, outer_center) <= outer_radius);
                outer.min(inner)
            }
        }
    }

    /// Exact signed distance (positive inside).
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.boundary_distance(p);
        if self.level_value(p) > 0.0 {
            d
        } else {
            -d
        }
    }

    /// Boundary points on the line `coord[axis] = value`.
    fn line_crossings(&self, axis: usize, value: f64) -> Vec<Point> {
        match *self {
            Shape::None => Vec::new(),
            Shape::Circle { center, radius } => circle_line_crossings(center, radius, axis, value),
            Shape::HalfMoon {
                outer_center,
                outer_radius,
                cutter_center,
                cutter_radius,
            } => {
                let mut pts: Vec<Point> = circle_line_crossings(outer_center, outer_radius, axis, value)
                    .into_iter()
                    .filter(|&p| dist(p, cutter_center) >= cutter_radius)
                    .collect();
                pts.extend(
                    circle_line_crossings(cutter_center, cutter_radius, axis, value)
                        .into_iter()
                        .filter(|&p| dist(p, outer_center) <= outer_radius),
                );
                pts
            }
        }
    }
}

/// Node category relative to the PEC object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Exterior,
    Boundary,
    Ghost,
    DeepInterior,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Exterior => "exterior",
            NodeClass::Boundary => "boundary",
            NodeClass::Ghost => "ghost",
            NodeClass::DeepInterior => "deep_interior",
        }
    }

    /// Nodes advanced by the Maxwell sweeps.
    pub fn is_active(self) -> bool {
        matches!(self, NodeClass::Exterior | NodeClass::Boundary)
    }
}

impl std::str::FromStr for NodeClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exterior" => Ok(NodeClass::Exterior),
            "boundary" => Ok(NodeClass::Boundary),
            "ghost" => Ok(NodeClass::Ghost),
            "deep_interior" => Ok(NodeClass::DeepInterior),
            other => Err(format!("unknown node class `{other}`")),
        }
    }
}

/// Lattice with (possibly) shifted node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub coords: Vec<Point>,
    /// E, W, N, S neighbor indices; `None` past the domain edge.
    pub neighbors: Vec<[Option<usize>; 4]>,
    pub shifted: Vec<bool>,
}

impl Grid {
    /// Uniform lattice with `nx * ny` nodes spanning `domain`, edges included.
    pub fn uniform(domain: Domain, nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::GridTooSmall { nx, ny });
        }
        let dx = domain.width() / (nx - 1) as f64;
        let dy = domain.height() / (ny - 1) as f64;
        let n = nx * ny;
        let mut coords = Vec::with_capacity(n);
        let mut neighbors = Vec::with_capacity(n);
        for j in 0..ny {
            for i in 0..nx {
                coords.push([domain.x_min + i as f64 * dx, domain.y_min + j as f64 * dy]);
                let idx = j * nx + i;
                neighbors.push([
                    (i + 1 < nx).then(|| idx + 1),
                    (i > 0).then(|| idx - 1),
                    (j + 1 < ny).then(|| idx + nx),
                    (j > 0).then(|| idx - nx),
                ]);
            }
        }
        Ok(Self {
            domain,
            nx,
            ny,
            dx,
            dy,
            coords,
            neighbors,
            shifted: vec![false; n],
        })
    }

    /// Square domain split into `cells` intervals per side.
    pub fn with_cells(domain: Domain, cells: usize) -> Result<Self> {
        Self::uniform(domain, cells + 1, cells + 1)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn lattice_point(&self, i: usize, j: usize) -> Point {
        [
            self.domain.x_min + i as f64 * self.dx,
            self.domain.y_min + j as f64 * self.dy,
        ]
    }

    pub fn h(&self) -> f64 {
        self.dx.min(self.dy)
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.dx.hypot(self.dy)
    }

    pub fn is_edge(&self, idx: usize) -> bool {
        self.neighbors[idx].iter().any(Option::is_none)
    }

    /// Full 5-point stencil `[C, E, W, N, S]`, absent on the outer ring.
    pub fn stencil(&self, idx: usize) -> Option<[usize; 5]> {
        let [e, w, n, s] = self.neighbors[idx];
        Some([idx, e?, w?, n?, s?])
    }

    /// Lattice node nearest to `p` (by original lattice position).
    pub fn nearest_lattice_node(&self, p: Point) -> usize {
        let fi = ((p[0] - self.domain.x_min) / self.dx).round();
        let fj = ((p[1] - self.domain.y_min) / self.dy).round();
        let i = fi.clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = fj.clamp(0.0, (self.ny - 1) as f64) as usize;
        self.index(i, j)
    }
}

/// All points where the shape's boundary crosses a grid line, plus the shape's
/// corners. Exact duplicates (crossings at lattice points) are merged.
pub fn find_boundary_intersections(shape: &Shape, grid: &Grid) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..grid.nx {
        let x = grid.lattice_point(i, 0)[0];
        pts.extend(shape.line_crossings(0, x));
    }
    for j in 0..grid.ny {
        let y = grid.lattice_point(0, j)[1];
        pts.extend(shape.line_crossings(1, y));
    }
    pts.extend(shape.corners());
    pts.retain(|p| grid.domain.contains(*p));
    pts.sort_by(lex_cmp);
    pts.dedup_by(|a, b| dist(*a, *b) <= 1e-12 * grid.dx.max(grid.dy));
    pts
}

fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

/// An intersection that lost its nearest node to a closer one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroppedIntersection {
    pub point: Point,
    pub node: usize,
    pub winner: Point,
}

#[derive(Debug, Clone)]
pub struct ShiftOutcome {
    pub grid: Grid,
    pub dropped: Vec<DroppedIntersection>,
}

/// Moves the nearest lattice node onto each intersection point.
///
/// Candidates are processed by increasing distance to their nearest node, ties
/// broken by the intersection's (x, y) lexicographic order; a node is moved at
/// most once. A losing intersection more than one lattice spacing away from the
/// winner means the curve is under-resolved and is reported as an error.
/// Shifting always starts from lattice positions, so applying it
/// twice yields the same grid.
pub fn apply_point_shift(grid: &Grid, intersections: &[Point]) -> Result<ShiftOutcome> {
    let mut out = grid.clone();
    for (idx, c) in out.coords.iter_mut().enumerate() {
        let (i, j) = grid.ij(idx);
        *c = grid.lattice_point(i, j);
    }
    out.shifted.iter_mut().for_each(|s| *s = false);

    let mut candidates: Vec<(f64, Point, usize)> = intersections
        .iter()
        .map(|&p| {
            let node = grid.nearest_lattice_node(p);
            let (i, j) = grid.ij(node);
            (dist(p, grid.lattice_point(i, j)), p, node)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

    let limit = grid.dx.max(grid.dy);
    let mut winner: Vec<Option<Point>> = vec![None; grid.len()];
    let mut dropped = Vec::new();
    for (_, p, node) in candidates {
        if grid.is_edge(node) {
            return Err(Error::InvalidShape(format!(
                "boundary point ({}, {}) maps onto the outer domain edge",
                p[0], p[1]
            )));
        }
        match winner[node] {
            None => {
                winner[node] = Some(p);
                out.coords[node] = p;
                out.shifted[node] = true;
            }
            Some(w) => {
                let separation = dist(p, w);
                if separation > limit {
                    return Err(Error::UnderResolved {
                        x: p[0],
                        y: p[1],
                        node,
                        separation,
                    });
                }
                log::debug!("intersection ({}, {}) dropped: node {node} already shifted", p[0], p[1]);
                dropped.push(DroppedIntersection { point: p, node, winner: w });
            }
        }
    }
    Ok(ShiftOutcome { grid: out, dropped })
}

/// Classifies nodes from the shift flags and the sign of `phi`.
pub fn classify_nodes(grid: &Grid, phi: &[f64]) -> Result<Vec<NodeClass>> {
    assert_eq!(phi.len(), grid.len());
    let base: Vec<NodeClass> = (0..grid.len())
        .map(|k| {
            if grid.shifted[k] {
                NodeClass::Boundary
            } else if phi[k] > 0.0 {
                NodeClass::DeepInterior
            } else {
                NodeClass::Exterior
            }
        })
        .collect();
    let outside = |c: NodeClass| matches!(c, NodeClass::Exterior | NodeClass::Boundary);
    let mut classes = base.clone();
    for k in 0..grid.len() {
        if base[k] == NodeClass::DeepInterior
            && grid.neighbors[k].iter().flatten().any(|&m| outside(base[m]))
        {
            classes[k] = NodeClass::Ghost;
        }
    }
    for k in 0..grid.len() {
        if classes[k] != NodeClass::Ghost {
            continue;
        }
        let reaches_exterior = grid.neighbors[k].iter().flatten().any(|&m| {
            classes[m] == NodeClass::Exterior
                || grid.neighbors[m].iter().flatten().any(|&q| classes[q] == NodeClass::Exterior)
        });
        if !reaches_exterior {
            return Err(Error::ThinGeometry { node: k });
        }
    }
    Ok(classes)
}
