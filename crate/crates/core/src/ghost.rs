//! Ghost values inside the PEC from a first-order Taylor expansion along the
//! normal.
//!
//! H is split into normal and tangential parts. The tangential part and the
//! normal derivatives of both parts are carried across the interface by
//! pseudo-time transport along `n` (`Φ_τ + n·∇Φ = 0`, discretised with the
//! least-squares value and gradient), with the outside data held fixed. The one
//! ghost layer then receives
//!
//! ```text
//! H⊥ = (∂n H⊥)·φ          (odd; H⊥ = 0 on the wall)
//! H∥ = H∥⁰ − (∂n H∥)·φ    (even)
//! Ez = (∂n Ez)·φ          (odd; Ez = 0 on the wall)
//! ```

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::geometry::{NodeClass, Point};
use crate::lsq::FitOperator;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParams {
    /// Pseudo-time step over grid spacing.
    pub pseudo_cfl: f64,
    /// Transport steps per extension.
    pub steps: usize,
}

impl Default for ExtensionParams {
    fn default() -> Self {
        Self {
            pseudo_cfl: 0.2,
            steps: 24,
        }
    }
}

/// Nodes a transport sweep may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRegion {
    /// `φ > 0`: the extended boundary values.
    PhiPositive,
    /// `φ ≥ 0`: the extended normal derivatives.
    PhiNonNegative,
}

impl UpdateRegion {
    #[inline]
    pub fn contains(self, phi: f64) -> bool {
        match self {
            UpdateRegion::PhiPositive => phi > 0.0,
            UpdateRegion::PhiNonNegative => phi >= 0.0,
        }
    }
}

/// `(H·n, H·t)` per node.
pub fn decompose(hx: &[f64], hy: &[f64], normal: &[Point], tangent: &[Point]) -> (Vec<f64>, Vec<f64>) {
    (0..hx.len())
        .into_par_iter()
        .map(|k| {
            let (n, t) = (normal[k], tangent[k]);
            (hx[k] * n[0] + hy[k] * n[1], hx[k] * t[0] + hy[k] * t[1])
        })
        .unzip()
}

#[inline]
fn recompose(perp: f64, par: f64, n: Point, t: Point) -> (f64, f64) {
    (perp * n[0] + par * t[0], perp * n[1] + par * t[1])
}

/// Weights of `∇u·n` at one node over up to five stencil nodes.
#[derive(Debug, Clone, Copy)]
struct Probe {
    nodes: [usize; 5],
    weights: [f64; 5],
}

impl Probe {
    #[inline]
    fn apply(&self, field: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..5 {
            s += self.weights[i] * field[self.nodes[i]];
        }
        s
    }
}

/// Normal-derivative probe for an exterior node. Ghost neighbors hold values
/// from an earlier extension, so they are left out of the fit; `None` when the
/// remaining points cannot carry a plane.
fn exterior_probe(scene: &Scene, k: usize) -> Option<Probe> {
    let stencil = scene.fits.stencil(k)?;
    let n = scene.level.normal[k];
    let usable: Vec<usize> = stencil
        .iter()
        .copied()
        .filter(|&m| scene.classes[m].is_active())
        .collect();
    let op = if usable.len() == 5 {
        *scene.fits.op(k)?
    } else if usable.len() >= 3 {
        let pts: Vec<Point> = usable.iter().map(|&m| scene.grid.coords[m]).collect();
        FitOperator::from_points(&pts, k).ok()?
    } else {
        return None;
    };
    let mut nodes = [k; 5];
    nodes[..usable.len()].copy_from_slice(&usable);
    let mut weights = [0.0; 5];
    for i in 0..5 {
        weights[i] = n[0] * op.w_c0[i] + n[1] * op.w_c1[i];
    }
    Some(Probe { nodes, weights })
}

/// `∇field·n` at exterior nodes (ghost neighbors excluded from the fit);
/// `None` at every other node and where no fit exists.
pub fn normal_derivative(field: &[f64], scene: &Scene) -> Vec<Option<f64>> {
    (0..scene.len())
        .into_par_iter()
        .map(|k| {
            if scene.classes[k] != NodeClass::Exterior {
                return None;
            }
            exterior_probe(scene, k).map(|p| p.apply(field))
        })
        .collect()
}

/// Precomputed transport update `Φ_k ← w_k · Φ[stencil_k]` for a set of nodes,
/// with `w = w_c2 − Δτ (n_x w_c0 + n_y w_c1)`.
///
/// Before transport the nodes are seeded layer by layer with the mean of
/// their already known neighbors one layer closer to the frozen data, so the
/// sweeps start from a constant-accurate guess instead of stale values.
#[derive(Debug, Clone, Default)]
struct TransportPlan {
    nodes: Vec<usize>,
    stencils: Vec<[usize; 5]>,
    weights: Vec<[f64; 5]>,
    /// Seeding order and, per node, its parents (unused slots are `usize::MAX`).
    seed: Vec<(usize, [usize; 4])>,
}

impl TransportPlan {
    fn new(scene: &Scene, nodes: Vec<usize>, params: &ExtensionParams) -> Self {
        let dtau = params.pseudo_cfl * scene.grid.h();
        let mut stencils = Vec::with_capacity(nodes.len());
        let mut weights = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let op = scene.fits.op(k).expect("transport node without a stencil");
            let n = scene.level.normal[k];
            let mut w = [0.0; 5];
            for i in 0..5 {
                w[i] = op.w_c2[i] - dtau * (n[0] * op.w_c0[i] + n[1] * op.w_c1[i]);
            }
            stencils.push(*scene.fits.stencil(k).unwrap());
            weights.push(w);
        }
        let seed = seed_order(scene, &nodes);
        Self {
            nodes,
            stencils,
            weights,
            seed,
        }
    }

    fn seed(&self, field: &mut [f64]) {
        for (k, parents) in &self.seed {
            let (mut sum, mut count) = (0.0, 0.0);
            for &m in parents.iter().take_while(|&&m| m != usize::MAX) {
                sum += field[m];
                count += 1.0;
            }
            field[*k] = sum / count;
        }
    }

    /// Jacobi sweeps: every step reads the previous iterate only.
    fn run(&self, field: &mut [f64], steps: usize, scratch: &mut Vec<f64>) {
        self.seed(field);
        scratch.resize(self.nodes.len(), 0.0);
        for _ in 0..steps {
            {
                let field: &[f64] = field;
                scratch
                    .par_iter_mut()
                    .zip(self.stencils.par_iter().zip(self.weights.par_iter()))
                    .for_each(|(out, (s, w))| {
                        *out = w[0] * field[s[0]]
                            + w[1] * field[s[1]]
                            + w[2] * field[s[2]]
                            + w[3] * field[s[3]]
                            + w[4] * field[s[4]];
                    });
            }
            for (&k, &v) in self.nodes.iter().zip(scratch.iter()) {
                field[k] = v;
            }
        }
    }
}

/// Breadth-first layers of `nodes` grown from the frozen nodes (`φ ≤ 0` and
/// not in `nodes`). Nodes no layer reaches keep their value.
fn seed_order(scene: &Scene, nodes: &[usize]) -> Vec<(usize, [usize; 4])> {
    let n = scene.len();
    let mut layer = vec![usize::MAX; n];
    let mut in_plan = vec![false; n];
    for &k in nodes {
        in_plan[k] = true;
    }
    let mut frontier: Vec<usize> = Vec::new();
    for &k in nodes {
        let touches = scene.grid.neighbors[k]
            .iter()
            .flatten()
            .any(|&m| !in_plan[m] && scene.level.phi[m] <= 0.0);
        if touches {
            layer[k] = 1;
            frontier.push(k);
        }
    }
    let mut order = Vec::with_capacity(nodes.len());
    let mut depth = 1;
    while !frontier.is_empty() {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &k in &frontier {
            let mut parents = [usize::MAX; 4];
            let mut c = 0;
            for &m in scene.grid.neighbors[k].iter().flatten() {
                let known = if depth == 1 {
                    !in_plan[m] && scene.level.phi[m] <= 0.0
                } else {
                    layer[m] == depth - 1
                };
                if known {
                    parents[c] = m;
                    c += 1;
                }
                if in_plan[m] && layer[m] == usize::MAX {
                    layer[m] = depth + 1;
                    next.push(m);
                }
            }
            order.push((k, parents));
        }
        frontier = next;
        depth += 1;
    }
    order
}

fn region_nodes(scene: &Scene, region: UpdateRegion) -> Vec<usize> {
    (0..scene.len())
        .filter(|&k| scene.fits.has(k) && region.contains(scene.level.phi[k]))
        .collect()
}

/// Transports `field` along `n` for `params.steps` pseudo-time steps, writing
/// only nodes inside `region`; every other node is left bit-for-bit intact.
pub fn constant_extend(field: &mut [f64], scene: &Scene, region: UpdateRegion, params: &ExtensionParams) {
    let plan = TransportPlan::new(scene, region_nodes(scene, region), params);
    plan.run(field, params.steps, &mut Vec::new());
}

/// Lattice hops from the nearest node with `φ ≤ 0`.
fn hops_from_outside(scene: &Scene) -> Vec<usize> {
    let mut hops = vec![usize::MAX; scene.len()];
    let mut queue = VecDeque::new();
    for k in 0..scene.len() {
        if scene.level.phi[k] <= 0.0 {
            hops[k] = 0;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        for &m in scene.grid.neighbors[k].iter().flatten() {
            if hops[m] == usize::MAX {
                hops[m] = hops[k] + 1;
                queue.push_back(m);
            }
        }
    }
    hops
}

/// Reusable ghost-value builder for one scene.
///
/// Transport only runs on nodes that can influence the ghost layer within the
/// configured number of steps, so ghost values are identical to transporting
/// over the whole PEC interior. The extended fields are kept between calls and
/// serve as the starting iterate of the next extension.
#[derive(Debug, Clone)]
pub struct GhostExtender<'a> {
    scene: &'a Scene,
    params: ExtensionParams,
    value_plan: TransportPlan,
    derivative_plan: TransportPlan,
    /// Exterior nodes whose normal derivative is authoritative.
    probes: Vec<(usize, Probe)>,
    /// Nodes with `φ ≤ 0` read by the value plan.
    value_halo: Vec<usize>,
    ghosts: Vec<usize>,
    boundary: Vec<usize>,
    perp: Vec<f64>,
    par: Vec<f64>,
    par_ext: Vec<f64>,
    dn_perp: Vec<f64>,
    dn_par: Vec<f64>,
    dn_e: Vec<f64>,
    e_scratch: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> GhostExtender<'a> {
    pub fn new(scene: &'a Scene, params: ExtensionParams) -> Self {
        let n = scene.len();
        let hops = hops_from_outside(scene);
        let reach = params.steps + 1;
        let value_nodes: Vec<usize> = region_nodes(scene, UpdateRegion::PhiPositive)
            .into_iter()
            .filter(|&k| hops[k] <= reach)
            .collect();
        let mut derivative_nodes: Vec<usize> = region_nodes(scene, UpdateRegion::PhiNonNegative)
            .into_iter()
            .filter(|&k| hops[k] <= reach)
            .collect();

        // Exterior nodes feeding the derivative transport.
        let mut in_plan = vec![false; n];
        for &k in &derivative_nodes {
            in_plan[k] = true;
        }
        let mut halo: Vec<usize> = Vec::new();
        let mut seen = vec![false; n];
        for &k in &derivative_nodes {
            for &m in scene.fits.stencil(k).unwrap() {
                if !in_plan[m] && !seen[m] && scene.classes[m] == NodeClass::Exterior {
                    seen[m] = true;
                    halo.push(m);
                }
            }
        }
        halo.sort_unstable();
        let mut probes = Vec::with_capacity(halo.len());
        for k in halo {
            match exterior_probe(scene, k) {
                Some(p) => probes.push((k, p)),
                // No usable fit: the node is filled by transport instead.
                None if scene.fits.has(k) => derivative_nodes.push(k),
                None => {}
            }
        }
        derivative_nodes.sort_unstable();

        let mut in_value = vec![false; n];
        for &k in &value_nodes {
            in_value[k] = true;
        }
        let mut value_halo: Vec<usize> = value_nodes
            .iter()
            .flat_map(|&k| scene.fits.stencil(k).unwrap().iter().copied())
            .filter(|&m| !in_value[m] && scene.level.phi[m] <= 0.0)
            .collect();
        value_halo.sort_unstable();
        value_halo.dedup();

        let ghosts = (0..n).filter(|&k| scene.classes[k] == NodeClass::Ghost).collect();
        let boundary = (0..n).filter(|&k| scene.classes[k] == NodeClass::Boundary).collect();
        Self {
            scene,
            params,
            value_plan: TransportPlan::new(scene, value_nodes, &params),
            derivative_plan: TransportPlan::new(scene, derivative_nodes, &params),
            probes,
            value_halo,
            ghosts,
            boundary,
            perp: vec![0.0; n],
            par: vec![0.0; n],
            par_ext: vec![0.0; n],
            dn_perp: vec![0.0; n],
            dn_par: vec![0.0; n],
            dn_e: vec![0.0; n],
            e_scratch: vec![0.0; n],
            scratch: Vec::new(),
        }
    }

    pub fn params(&self) -> &ExtensionParams {
        &self.params
    }

    pub fn ghost_nodes(&self) -> &[usize] {
        &self.ghosts
    }

    fn refresh_derivatives(probes: &[(usize, Probe)], field: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        scratch.resize(probes.len(), 0.0);
        scratch
            .par_iter_mut()
            .zip(probes.par_iter())
            .for_each(|(v, (_, p))| *v = p.apply(field));
        for ((k, _), &v) in probes.iter().zip(scratch.iter()) {
            out[*k] = v;
        }
    }

    /// Writes ghost-node values of `(hx, hy)`; no other node is touched.
    pub fn extend_h(&mut self, hx: &mut [f64], hy: &mut [f64]) {
        let scene = self.scene;
        let (normal, tangent) = (&scene.level.normal, &scene.level.tangent);
        let (perp, par) = decompose(hx, hy, normal, tangent);
        self.perp = perp;
        self.par = par;
        for &k in &self.boundary {
            self.perp[k] = 0.0;
        }

        Self::refresh_derivatives(&self.probes, &self.perp, &mut self.dn_perp, &mut self.scratch);
        Self::refresh_derivatives(&self.probes, &self.par, &mut self.dn_par, &mut self.scratch);
        for &k in &self.value_halo {
            self.par_ext[k] = self.par[k];
        }

        let steps = self.params.steps;
        self.value_plan.run(&mut self.par_ext, steps, &mut self.scratch);
        self.derivative_plan.run(&mut self.dn_perp, steps, &mut self.scratch);
        self.derivative_plan.run(&mut self.dn_par, steps, &mut self.scratch);

        let phi = &scene.level.phi;
        for &k in &self.ghosts {
            let h_perp = self.dn_perp[k] * phi[k];
            let h_par = self.par_ext[k] - self.dn_par[k] * phi[k];
            let (x, y) = recompose(h_perp, h_par, normal[k], tangent[k]);
            hx[k] = x;
            hy[k] = y;
        }
    }

    /// Writes ghost-node values of `ez` (odd extension); no other node is touched.
    pub fn extend_e(&mut self, ez: &mut [f64]) {
        let scene = self.scene;
        self.e_scratch.copy_from_slice(ez);
        for &k in &self.boundary {
            self.e_scratch[k] = 0.0;
        }
        Self::refresh_derivatives(&self.probes, &self.e_scratch, &mut self.dn_e, &mut self.scratch);
        self.derivative_plan.run(&mut self.dn_e, self.params.steps, &mut self.scratch);
        let phi = &scene.level.phi;
        for &k in &self.ghosts {
            ez[k] = self.dn_e[k] * phi[k];
        }
    }
}
