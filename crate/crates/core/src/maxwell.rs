//! TMz Maxwell equations (ε = μ = 1) on the point-shifted grid:
//!
//! ```text
//! ∂t Hx = −∂y Ez,   ∂t Hy = ∂x Ez,   ∂t Ez = ∂x Hy − ∂y Hx
//! ```
//!
//! Each sweep replaces the old value by the least-squares fitted value and the
//! derivatives by fitted gradients. The backward sweep is the same operator
//! with time reversed; BFECC combines forward, backward and forward sweeps to
//! cancel the leading error of the one-step scheme.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Grid, NodeClass, Point};
use crate::ghost::{ExtensionParams, GhostExtender};
use crate::scene::Scene;

/// Angular frequency of the default incident wave (wavelength 0.6).
pub const DEFAULT_OMEGA: f64 = 2.0 * PI / 0.6;

/// Plane wave travelling in +x: `(Hx, Hy, Ez) = (0, −sin ω(x−t), sin ω(x−t))`.
#[inline]
pub fn incident_wave(x: f64, _y: f64, t: f64, omega: f64) -> [f64; 3] {
    let s = (omega * (x - t)).sin();
    [0.0, -s, s]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    pub ez: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(len: usize) -> Self {
        Self::uniform(len, [0.0; 3])
    }

    pub fn uniform(len: usize, value: [f64; 3]) -> Self {
        Self {
            hx: vec![value[0]; len],
            hy: vec![value[1]; len],
            ez: vec![value[2]; len],
            time: 0.0,
        }
    }

    /// Incident wave at every node.
    pub fn incident(grid: &Grid, t: f64, omega: f64) -> Self {
        let mut s = Self::zeros(grid.len());
        for (k, p) in grid.coords.iter().enumerate() {
            let [hx, hy, ez] = incident_wave(p[0], p[1], t, omega);
            s.hx[k] = hx;
            s.hy[k] = hy;
            s.ez[k] = ez;
        }
        s.time = t;
        s
    }

    pub fn len(&self) -> usize {
        self.ez.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ez.is_empty()
    }

    /// First node among `nodes` holding a non-finite component.
    pub fn first_non_finite(&self, nodes: &[usize]) -> Option<usize> {
        nodes
            .par_iter()
            .copied()
            .find_first(|&k| !(self.hx[k].is_finite() && self.hy[k].is_finite() && self.ez[k].is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeDirection {
    Forward,
    Backward,
}

impl SchemeDirection {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            SchemeDirection::Forward => 1.0,
            SchemeDirection::Backward => -1.0,
        }
    }
}

/// Time integrator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One forward sweep per step.
    Plain,
    /// Forward, backward, compensated forward.
    Bfecc,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::Bfecc => "bfecc",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" => Ok(Scheme::Plain),
            "bfecc" => Ok(Scheme::Bfecc),
            other => Err(format!("unknown scheme '{other}' (expected plain or bfecc)")),
        }
    }
}

/// Exterior and boundary nodes with a full stencil: the nodes a sweep updates.
pub fn updated_nodes(scene: &Scene) -> Vec<usize> {
    (0..scene.len())
        .filter(|&k| scene.classes[k].is_active() && scene.fits.has(k))
        .collect()
}

/// One sweep of the least-squares scheme over `nodes`; all other nodes are
/// copied unchanged. Time advances by `±dt`.
pub fn maxwell_sweep(state: &FieldState, dir: SchemeDirection, dt: f64, scene: &Scene, nodes: &[usize]) -> FieldState {
    let sdt = dir.sign() * dt;
    let (hx, hy, ez) = (&state.hx, &state.hy, &state.ez);
    let updates: Vec<[f64; 3]> = nodes
        .par_iter()
        .map(|&k| {
            let s = scene.fits.stencil(k).expect("sweep node without a stencil");
            let op = scene.fits.op(k).unwrap();
            debug_assert!(
                s.iter().all(|&m| scene.classes[m] != NodeClass::DeepInterior),
                "sweep at node {k} reads a deep-interior node"
            );
            let (mut hx0, mut hy0, mut ez0) = (0.0, 0.0, 0.0);
            let (mut ez_x, mut ez_y, mut hy_x, mut hx_y) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..5 {
                let m = s[i];
                hx0 += op.w_c2[i] * hx[m];
                hy0 += op.w_c2[i] * hy[m];
                ez0 += op.w_c2[i] * ez[m];
                ez_x += op.w_c0[i] * ez[m];
                ez_y += op.w_c1[i] * ez[m];
                hy_x += op.w_c0[i] * hy[m];
                hx_y += op.w_c1[i] * hx[m];
            }
            [hx0 - sdt * ez_y, hy0 + sdt * ez_x, ez0 + sdt * (hy_x - hx_y)]
        })
        .collect();
    let mut out = state.clone();
    for (&k, u) in nodes.iter().zip(&updates) {
        out.hx[k] = u[0];
        out.hy[k] = u[1];
        out.ez[k] = u[2];
    }
    out.time = state.time + sdt;
    out
}

/// PEC conditions at boundary nodes: `Ez = 0` and `H·n = 0` (tangential
/// projection).
pub fn enforce_boundary(state: &mut FieldState, normal: &[Point], classes: &[NodeClass]) {
    for (k, class) in classes.iter().enumerate() {
        if *class == NodeClass::Boundary {
            let n = normal[k];
            let hn = state.hx[k] * n[0] + state.hy[k] * n[1];
            state.hx[k] -= hn * n[0];
            state.hy[k] -= hn * n[1];
            state.ez[k] = 0.0;
        }
    }
}

/// Incident-wave Dirichlet data on `nodes` at the state's time.
pub fn apply_outer_boundary(state: &mut FieldState, grid: &Grid, nodes: &[usize], omega: f64) {
    for &k in nodes {
        let p = grid.coords[k];
        let [hx, hy, ez] = incident_wave(p[0], p[1], state.time, omega);
        state.hx[k] = hx;
        state.hy[k] = hy;
        state.ez[k] = ez;
    }
}

/// Drives sweeps, boundary conditions and ghost extension on one scene.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    scene: &'a Scene,
    omega: f64,
    updated: Vec<usize>,
    outer: Vec<usize>,
    /// Nodes checked by the stability sentinel.
    watched: Vec<usize>,
    extender: GhostExtender<'a>,
}

impl<'a> Solver<'a> {
    pub fn new(scene: &'a Scene, omega: f64, extension: ExtensionParams) -> Self {
        let updated = updated_nodes(scene);
        let outer = (0..scene.len()).filter(|&k| !scene.fits.has(k)).collect();
        let watched = (0..scene.len())
            .filter(|&k| scene.classes[k] != NodeClass::DeepInterior)
            .collect();
        Self {
            scene,
            omega,
            updated,
            outer,
            watched,
            extender: GhostExtender::new(scene, extension),
        }
    }

    /// Holds the outer ring at its current values instead of imposing the
    /// incident wave there.
    pub fn freeze_outer(mut self) -> Self {
        self.outer.clear();
        self
    }

    pub fn scene(&self) -> &'a Scene {
        self.scene
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn updated(&self) -> &[usize] {
        &self.updated
    }

    /// Incident wave at exterior and boundary nodes, PEC conditions applied,
    /// zero inside the object.
    pub fn initial_state(&self) -> FieldState {
        let mut s = FieldState::incident(&self.scene.grid, 0.0, self.omega);
        for (k, class) in self.scene.classes.iter().enumerate() {
            if !class.is_active() {
                s.hx[k] = 0.0;
                s.hy[k] = 0.0;
                s.ez[k] = 0.0;
            }
        }
        self.enforce(&mut s);
        s
    }

    fn enforce(&self, state: &mut FieldState) {
        enforce_boundary(state, &self.scene.level.normal, &self.scene.classes);
    }

    fn extend(&mut self, state: &mut FieldState) {
        if self.extender.ghost_nodes().is_empty() {
            return;
        }
        self.extender.extend_h(&mut state.hx, &mut state.hy);
        self.extender.extend_e(&mut state.ez);
    }

    /// Boundary conditions, ghost extension, one sweep, outer data.
    fn sub_step(&mut self, state: &mut FieldState, dir: SchemeDirection, dt: f64) -> FieldState {
        self.enforce(state);
        self.extend(state);
        let mut next = maxwell_sweep(state, dir, dt, self.scene, &self.updated);
        apply_outer_boundary(&mut next, &self.scene.grid, &self.outer, self.omega);
        next
    }

    /// Plain forward step.
    pub fn plain_step(&mut self, state: &FieldState, dt: f64) -> FieldState {
        let mut u = state.clone();
        let mut next = self.sub_step(&mut u, SchemeDirection::Forward, dt);
        self.enforce(&mut next);
        next
    }

    /// Forward–backward–compensated-forward step.
    pub fn bfecc_step(&mut self, state: &FieldState, dt: f64) -> FieldState {
        let mut u = state.clone();
        let mut forward = self.sub_step(&mut u, SchemeDirection::Forward, dt);
        let back = self.sub_step(&mut forward, SchemeDirection::Backward, dt);
        let mut v = u;
        let classes = &self.scene.classes;
        let compensate = |f: &mut [f64], b: &[f64]| {
            f.par_iter_mut().zip(b.par_iter()).enumerate().for_each(|(k, (x, &y))| {
                if classes[k].is_active() {
                    *x += 0.5 * (*x - y);
                }
            });
        };
        compensate(&mut v.hx, &back.hx);
        compensate(&mut v.hy, &back.hy);
        compensate(&mut v.ez, &back.ez);
        let mut next = self.sub_step(&mut v, SchemeDirection::Forward, dt);
        self.enforce(&mut next);
        next
    }

    pub fn step(&mut self, state: &FieldState, dt: f64, scheme: Scheme) -> FieldState {
        match scheme {
            Scheme::Plain => self.plain_step(state, dt),
            Scheme::Bfecc => self.bfecc_step(state, dt),
        }
    }

    /// Steps from `state.time` to `final_time`, shortening the last step so
    /// the run lands on `final_time` exactly. `observer` sees every state
    /// after a completed step together with its step index (from 1).
    pub fn run<F>(&mut self, mut state: FieldState, dt: f64, final_time: f64, scheme: Scheme, mut observer: F) -> Result<FieldState>
    where
        F: FnMut(usize, &FieldState) -> Result<()>,
    {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {dt}")));
        }
        let mut step = 0;
        while state.time < final_time {
            let remaining = final_time - state.time;
            let last = remaining <= dt * (1.0 + 1e-9);
            let h = if last { remaining } else { dt };
            state = self.step(&state, h, scheme);
            if last {
                state.time = final_time;
            }
            step += 1;
            if let Some(node) = state.first_non_finite(&self.watched) {
                return Err(Error::Unstable { step, node });
            }
            observer(step, &state)?;
        }
        Ok(state)
    }
}

/// Time-stepping settings for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub dt_ratio: f64,
    pub final_time: f64,
    pub omega: f64,
    pub scheme: Scheme,
    pub extension: ExtensionParams,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            dt_ratio: 1.0,
            final_time: 1.0,
            omega: DEFAULT_OMEGA,
            scheme: Scheme::Bfecc,
            extension: ExtensionParams::default(),
        }
    }
}

/// Initial state, then steps to `params.final_time` with `dt = dt_ratio · h`.
pub fn run_simulation<F>(scene: &Scene, params: &RunParams, observer: F) -> Result<FieldState>
where
    F: FnMut(usize, &FieldState) -> Result<()>,
{
    let mut solver = Solver::new(scene, params.omega, params.extension);
    let dt = params.dt_ratio * scene.grid.h();
    let state = solver.initial_state();
    solver.run(state, dt, params.final_time, params.scheme, observer)
}

/// Mean absolute deviation of `ez` and `hx` from the incident wave over
/// `nodes`.
pub fn plane_wave_error(state: &FieldState, grid: &Grid, nodes: &[usize], omega: f64) -> (f64, f64) {
    let (mut e, mut h) = (0.0, 0.0);
    for &k in nodes {
        let p = grid.coords[k];
        let [hx, _, ez] = incident_wave(p[0], p[1], state.time, omega);
        e += (state.ez[k] - ez).abs();
        h += (state.hx[k] - hx).abs();
    }
    let n = nodes.len().max(1) as f64;
    (e / n, h / n)
}
