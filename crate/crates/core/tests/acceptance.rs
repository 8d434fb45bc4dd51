//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown.
//! Fast checks run first; the three refinement studies take a few minutes on
//! a single core.

use std::io::Write;
use std::time::Instant;

use ghostmax::geometry::classify_nodes;
use ghostmax::ghost::constant_extend;
use ghostmax::levelset::gradient_magnitude;
use ghostmax::study::{freespace_study, observed_order, ErrorReport};
use ghostmax::{
    convergence_study, Domain, ExtensionParams, FieldState, FitOperator, FitTable, GhostExtender, Grid, LevelSet,
    NodeClass, Point, RedistanceParams, RunParams, Scene, Scheme, Shape, Solver, StudySpec, UpdateRegion,
    DEFAULT_OMEGA,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

/// Every threshold checked below.
mod tol {
    /// Circle study: expected Ez orders per refinement pair.
    pub const CIRCLE_EZ_ORDERS: [f64; 2] = [0.96, 1.70];
    /// Circle study: expected Hx orders per refinement pair.
    pub const CIRCLE_HX_ORDERS: [f64; 2] = [1.01, 1.66];
    /// Allowed deviation from each expected circle order.
    pub const CIRCLE_ORDER_WINDOW: f64 = 0.35;
    /// Minimum order of the finest circle pair.
    pub const CIRCLE_LAST_ORDER_MIN: f64 = 1.5;
    /// Crescent Ez orders may differ from the circle's by at most this.
    pub const MOON_ORDER_WINDOW: f64 = 0.4;
    /// Minimum Ez order of the dt/dx = 1.4 study.
    pub const CFL14_ORDER_MIN: f64 = 0.8;
    /// "Bounded" for the large-time-step run: sampled fields stay below this
    /// multiple of the unit incident amplitude.
    pub const BOUNDED_AMPLITUDE: f64 = 10.0;
    /// Free space: largest admissible order of the plain scheme.
    pub const PLAIN_ORDER_MAX: f64 = 1.3;
    /// Free space: smallest admissible order with error compensation.
    pub const BFECC_ORDER_MIN: f64 = 1.7;
    /// Level set: `| |grad phi| - 1 |` within ±5 dx of the surface.
    pub const GRADIENT_BAND: f64 = 0.05;
    /// Level set: signed-distance error within ±5 dx of the surface, in
    /// units of dx². Away from the band the first-order steady state is off
    /// by O(dx) at the distance function's kinks (circle centre), which is
    /// reported but not held to this bound.
    pub const PHI_ERROR_DX2: f64 = 2.0;
    /// Ghost values of fields linear in the normal coordinate: error ≤ C·dx.
    pub const GHOST_LINEAR_C: f64 = 1.0;
    /// Ghost values: minimum observed order.
    pub const GHOST_ORDER_MIN: f64 = 1.0;
    /// Linear exactness of the least-squares fit, relative to the data scale.
    pub const FIT_EXACT: f64 = 1e-10;
    /// Constant states and boundary conditions, absolute.
    pub const STATE_EXACT: f64 = 1e-12;
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within(value: f64, target: f64, window: f64) -> bool {
    (value - target).abs() <= window
}

fn domain() -> Domain {
    Domain::square(10.0).expect("valid domain")
}

fn circle() -> Shape {
    Shape::circle([5.0, 5.0], 2.0)
}

fn scene(shape: Shape, cells: usize) -> Scene {
    Scene::with_cells(shape, domain(), cells, &RedistanceParams::default()).expect("scene builds")
}

fn fmt_orders(v: &[f64]) -> String {
    v.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(" -> ")
}

fn study(shape: Shape, grids: Vec<usize>, dt_ratio: f64) -> ErrorReport {
    let spec = StudySpec {
        shape,
        domain: domain(),
        grids,
        reference: 800,
        run: RunParams {
            dt_ratio,
            final_time: 1.0,
            omega: DEFAULT_OMEGA,
            scheme: Scheme::Bfecc,
            extension: ExtensionParams::default(),
        },
        redistance: RedistanceParams::default(),
        band: 10.0,
        parallel: false,
    };
    convergence_study(&spec).expect("study runs")
}

fn complete_orders(report: &ErrorReport) -> Option<(Vec<f64>, Vec<f64>)> {
    let ez: Option<Vec<f64>> = report.ez_orders().into_iter().collect();
    let hx: Option<Vec<f64>> = report.hx_orders().into_iter().collect();
    Some((ez?, hx?))
}

// ---------------------------------------------------------------------------
// 1–3: refinement studies
// ---------------------------------------------------------------------------

fn circle_convergence(report: &ErrorReport) -> Outcome {
    let Some((ez, hx)) = complete_orders(report) else {
        return Outcome::new(false, format!("study incomplete:\n{}", report.to_table()));
    };
    let shape_ok = |o: &[f64], expected: &[f64; 2]| {
        o.len() == 2
            && o.iter().zip(expected).all(|(&a, &b)| within(a, b, tol::CIRCLE_ORDER_WINDOW))
            && o[1] > o[0]
            && o[1] >= tol::CIRCLE_LAST_ORDER_MIN
    };
    let pass = shape_ok(&ez, &tol::CIRCLE_EZ_ORDERS) && shape_ok(&hx, &tol::CIRCLE_HX_ORDERS);
    Outcome::new(
        pass,
        format!(
            "Ez orders {} (expected {} ±{}), Hx orders {} (expected {} ±{}); increasing, last ≥ {}",
            fmt_orders(&ez),
            fmt_orders(&tol::CIRCLE_EZ_ORDERS),
            tol::CIRCLE_ORDER_WINDOW,
            fmt_orders(&hx),
            fmt_orders(&tol::CIRCLE_HX_ORDERS),
            tol::CIRCLE_ORDER_WINDOW,
            tol::CIRCLE_LAST_ORDER_MIN
        ),
    )
}

fn half_moon_convergence(report: &ErrorReport, circle: &ErrorReport) -> Outcome {
    let (Some((ez, _)), Some((cez, _))) = (complete_orders(report), complete_orders(circle)) else {
        return Outcome::new(false, format!("study incomplete:\n{}", report.to_table()));
    };
    let close = ez.len() == cez.len() && ez.iter().zip(&cez).all(|(&a, &b)| within(a, b, tol::MOON_ORDER_WINDOW));
    let finite_samples = report
        .rows
        .iter()
        .all(|(_, r)| r.as_ref().map(|g| g.max_abs.is_finite() && g.ez.is_finite()).unwrap_or(false));

    // Fields near the two corners after a full run on the middle grid.
    let s = scene(Shape::default_half_moon(), 200);
    let state = ghostmax::run_simulation(&s, &RunParams::default(), |_, _| Ok(())).expect("crescent run");
    let corners = s.shape.corners();
    let near: Vec<usize> = (0..s.len())
        .filter(|&k| s.classes[k] != NodeClass::DeepInterior)
        .filter(|&k| {
            let p = s.grid.coords[k];
            corners.iter().any(|c| (p[0] - c[0]).hypot(p[1] - c[1]) <= 0.5)
        })
        .collect();
    let corner_finite = state.first_non_finite(&near).is_none();
    let corner_max = near
        .iter()
        .map(|&k| state.ez[k].abs().max(state.hx[k].abs()).max(state.hy[k].abs()))
        .fold(0.0, f64::max);
    Outcome::new(
        close && finite_samples && corner_finite,
        format!(
            "Ez orders {} vs circle {} (window ±{}); all samples finite: {}; {} nodes within 0.5 of the corners finite: {} (max |field| {:.3})",
            fmt_orders(&ez),
            fmt_orders(&cez),
            tol::MOON_ORDER_WINDOW,
            finite_samples,
            near.len(),
            corner_finite,
            corner_max
        ),
    )
}

fn cfl14_robustness(report: &ErrorReport) -> Outcome {
    let Some((ez, _)) = complete_orders(report) else {
        return Outcome::new(false, format!("study incomplete:\n{}", report.to_table()));
    };
    let bounded = report
        .rows
        .iter()
        .all(|(_, r)| r.as_ref().map(|g| g.max_abs < tol::BOUNDED_AMPLITUDE).unwrap_or(false));
    let max_abs = report
        .rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .map(|g| g.max_abs)
        .fold(0.0, f64::max);
    let order_ok = ez.last().is_some_and(|&o| o >= tol::CFL14_ORDER_MIN);
    Outcome::new(
        bounded && order_ok,
        format!(
            "Ez order 200->400 {} (≥ {}); max sampled |field| {max_abs:.3} (< {})",
            fmt_orders(&ez),
            tol::CFL14_ORDER_MIN,
            tol::BOUNDED_AMPLITUDE
        ),
    )
}

// ---------------------------------------------------------------------------
// 4: free-space order lift
// ---------------------------------------------------------------------------

fn freespace_orders(scheme: Scheme, dt_ratio: f64) -> Vec<f64> {
    let run = RunParams {
        dt_ratio,
        final_time: 0.6,
        scheme,
        ..RunParams::default()
    };
    let rows = freespace_study(domain(), &[100, 200, 400], &run).expect("free-space runs");
    rows.windows(2).map(|w| observed_order(w[0].ez, w[1].ez)).collect()
}

fn freespace_lift() -> Outcome {
    let plain = freespace_orders(Scheme::Plain, 0.5);
    let bfecc = freespace_orders(Scheme::Bfecc, 0.5);
    let bfecc_unit = freespace_orders(Scheme::Bfecc, 1.0);
    let pass = plain.iter().all(|&o| o <= tol::PLAIN_ORDER_MAX) && bfecc.iter().all(|&o| o >= tol::BFECC_ORDER_MIN);
    Outcome::new(
        pass,
        format!(
            "dt/dx = 0.5: plain {} (≤ {}), BFECC {} (≥ {}); for information, BFECC at dt/dx = 1: {}",
            fmt_orders(&plain),
            tol::PLAIN_ORDER_MAX,
            fmt_orders(&bfecc),
            tol::BFECC_ORDER_MIN,
            fmt_orders(&bfecc_unit)
        ),
    )
}

// ---------------------------------------------------------------------------
// 5: level-set quality
// ---------------------------------------------------------------------------

fn levelset_quality() -> Outcome {
    let s = scene(circle(), 200);
    let h = s.grid.h();
    let grad = gradient_magnitude(&s.level.phi, &s.fits);
    let (mut grad_dev, mut phi_band, mut phi_all) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..s.len() {
        let p = s.grid.coords[k];
        let err = (s.level.phi[k] - s.shape.signed_distance(p)).abs();
        phi_all = phi_all.max(err);
        if s.level.phi[k].abs() <= 5.0 * h {
            phi_band = phi_band.max(err);
            if let Some(g) = grad[k] {
                grad_dev = grad_dev.max((g - 1.0).abs());
            }
        }
    }
    let limit = tol::PHI_ERROR_DX2 * h * h;
    Outcome::new(
        grad_dev <= tol::GRADIENT_BAND && phi_band <= limit,
        format!(
            "max | |grad phi| - 1 | in ±5dx band {grad_dev:.4} (≤ {}); max |phi - exact| in the band {:.3} dx² (≤ {} dx²); for information, over the whole domain {:.3} dx² (at the centre kink)",
            tol::GRADIENT_BAND,
            phi_band / (h * h),
            tol::PHI_ERROR_DX2,
            phi_all / (h * h)
        ),
    )
}

// ---------------------------------------------------------------------------
// 6: ghost extension against exact reflections
// ---------------------------------------------------------------------------

/// Half plane `x > wall` as the conductor on a lattice with `x = wall` as a
/// grid line, so the wall nodes are the boundary nodes.
fn planar_scene(cells: usize, wall: f64) -> Scene {
    let mut grid = Grid::with_cells(domain(), cells).expect("grid");
    let phi: Vec<f64> = grid
        .coords
        .iter()
        .map(|p| {
            let d = p[0] - wall;
            if d.abs() < 1e-12 {
                0.0
            } else {
                d
            }
        })
        .collect();
    for (k, &v) in phi.iter().enumerate() {
        grid.shifted[k] = v == 0.0;
    }
    let classes = classify_nodes(&grid, &phi).expect("classes");
    let fits = FitTable::build(&grid).expect("fits");
    let n = grid.len();
    Scene {
        shape: Shape::None,
        classes,
        level: LevelSet {
            phi,
            normal: vec![[1.0, 0.0]; n],
            tangent: vec![[0.0, -1.0]; n],
        },
        fits,
        grid,
        dropped: Vec::new(),
        redistance_iterations: 0,
    }
}

/// Ghost nodes away from the rows where the half plane meets the domain edge.
fn planar_ghosts(s: &Scene) -> Vec<usize> {
    (0..s.len())
        .filter(|&k| {
            let (_, j) = s.grid.ij(k);
            s.classes[k] == NodeClass::Ghost && 10 * j >= 3 * s.grid.ny && 10 * j <= 7 * s.grid.ny
        })
        .collect()
}

/// Max ghost errors `(Hx, Hy, Ez)` against the exact mirror images of the
/// given exterior fields.
fn planar_ghost_errors(cells: usize, hx: impl Fn(Point) -> f64, hy: impl Fn(Point) -> f64, ez: impl Fn(Point) -> f64) -> [f64; 3] {
    let wall = 5.0;
    let s = planar_scene(cells, wall);
    let mut st = FieldState::zeros(s.len());
    for (k, &p) in s.grid.coords.iter().enumerate() {
        if s.level.phi[k] <= 0.0 || s.grid.is_edge(k) {
            st.hx[k] = hx(p);
            st.hy[k] = hy(p);
            st.ez[k] = ez(p);
        } else {
            // Whatever the interior holds must not matter.
            st.hx[k] = 7.0;
            st.hy[k] = -7.0;
            st.ez[k] = 7.0;
        }
    }
    let mut ext = GhostExtender::new(&s, ExtensionParams::default());
    ext.extend_h(&mut st.hx, &mut st.hy);
    ext.extend_e(&mut st.ez);
    let mut err = [0.0f64; 3];
    for k in planar_ghosts(&s) {
        let p = s.grid.coords[k];
        let m = [2.0 * wall - p[0], p[1]];
        err[0] = err[0].max((st.hx[k] + hx(m)).abs()); // normal part: odd
        err[1] = err[1].max((st.hy[k] - hy(m)).abs()); // tangential part: even
        err[2] = err[2].max((st.ez[k] + ez(m)).abs()); // odd
    }
    err
}

fn ghost_oracle() -> Outcome {
    let ladder = [100, 200, 400];
    let (a, b, c) = (1.5, -0.75, 0.8);
    // Linear in the normal coordinate, vanishing on the wall where required.
    let mut linear_ok = true;
    let mut linear_worst = 0.0f64;
    for &cells in &ladder {
        let dx = 10.0 / cells as f64;
        let e = planar_ghost_errors(cells, |p| a * (5.0 - p[0]), |p| b + 0.3 * (5.0 - p[0]), |p| c * (5.0 - p[0]));
        let worst = e.iter().copied().fold(0.0, f64::max);
        linear_worst = linear_worst.max(worst / dx);
        linear_ok &= worst <= tol::GHOST_LINEAR_C * dx;
    }
    // Smooth fields: the mirror is matched to first order or better.
    let smooth: Vec<[f64; 3]> = ladder
        .iter()
        .map(|&cells| {
            planar_ghost_errors(
                cells,
                |p| (5.0 - p[0]).sin() * (0.3 * p[1]).cos(),
                |p| (0.7 * (5.0 - p[0])).cos() + 0.2 * p[1],
                |p| (5.0 - p[0]).sin() * (0.4 * p[1]).sin(),
            )
        })
        .collect();
    let orders: Vec<[f64; 3]> = smooth
        .windows(2)
        .map(|w| [0, 1, 2].map(|i| observed_order(w[0][i], w[1][i])))
        .collect();
    let order_ok = orders.iter().flatten().all(|&o| o >= tol::GHOST_ORDER_MIN);
    let show = |i: usize| orders.iter().map(|o| format!("{:.2}", o[i])).collect::<Vec<_>>().join(" -> ");
    Outcome::new(
        linear_ok && order_ok,
        format!(
            "linear fields: max error {:.1e}·dx (≤ {}·dx); smooth fields, orders over dx 0.1/0.05/0.025: H⊥ {}, H∥ {}, Ez {} (≥ {})",
            linear_worst,
            tol::GHOST_LINEAR_C,
            show(0),
            show(1),
            show(2),
            tol::GHOST_ORDER_MIN
        ),
    )
}

// ---------------------------------------------------------------------------
// 7: invariant suite
// ---------------------------------------------------------------------------

fn fit_linear_exactness() -> std::result::Result<(), String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = (
        0.01f64..2.0,
        prop::array::uniform10(-0.45f64..0.45),
        prop::array::uniform2(-5.0f64..5.0),
        prop::array::uniform3(-10.0f64..10.0),
    );
    runner
        .run(&strategy, |(h, j, base, coef)| {
            let c = [base[0] + j[8] * h, base[1] + j[9] * h];
            let dirs = [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]];
            let nb: [Point; 4] =
                std::array::from_fn(|k| [base[0] + dirs[k][0] + j[2 * k] * h, base[1] + dirs[k][1] + j[2 * k + 1] * h]);
            let op = FitOperator::build(c, nb, 0).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let f = |p: Point| coef[0] * p[0] + coef[1] * p[1] + coef[2];
            let u = [f(c), f(nb[0]), f(nb[1]), f(nb[2]), f(nb[3])];
            let (gx, gy) = op.gradient(&u);
            let scale = 1.0 + coef.iter().map(|v| v.abs()).sum::<f64>() * 6.0;
            prop_assert!((op.value(&u) - f(c)).abs() <= tol::FIT_EXACT * scale);
            prop_assert!((gx - coef[0]).abs() <= tol::FIT_EXACT * scale);
            prop_assert!((gy - coef[1]).abs() <= tol::FIT_EXACT * scale);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn constant_state_fixed_point() -> bool {
    let s = scene(Shape::None, 60);
    let mut solver = Solver::new(&s, DEFAULT_OMEGA, ExtensionParams::default()).freeze_outer();
    let value = [0.4, -1.1, 2.3];
    let mut st = FieldState::uniform(s.len(), value);
    for _ in 0..5 {
        st = solver.bfecc_step(&st, s.grid.h());
    }
    (0..s.len()).all(|k| {
        (st.hx[k] - value[0]).abs() <= tol::STATE_EXACT
            && (st.hy[k] - value[1]).abs() <= tol::STATE_EXACT
            && (st.ez[k] - value[2]).abs() <= tol::STATE_EXACT
    })
}

fn boundary_invariance() -> (bool, usize) {
    let mut ok = true;
    let mut steps = 0;
    for shape in [circle(), Shape::default_half_moon()] {
        let s = scene(shape, 100);
        let boundary: Vec<usize> = (0..s.len()).filter(|&k| s.classes[k] == NodeClass::Boundary).collect();
        ghostmax::run_simulation(&s, &RunParams::default(), |_, st| {
            steps += 1;
            ok &= boundary.iter().all(|&k| {
                let n = s.level.normal[k];
                st.ez[k] == 0.0 && (st.hx[k] * n[0] + st.hy[k] * n[1]).abs() <= tol::STATE_EXACT
            });
            Ok(())
        })
        .expect("run");
    }
    (ok, steps)
}

fn frozen_region_integrity() -> bool {
    let s = scene(Shape::default_half_moon(), 100);
    let f0: Vec<f64> = s.grid.coords.iter().map(|p| (1.3 * p[0]).sin() * (0.7 * p[1]).cos() + p[0]).collect();
    let regions_ok = [UpdateRegion::PhiPositive, UpdateRegion::PhiNonNegative].iter().all(|&region| {
        let mut f = f0.clone();
        constant_extend(&mut f, &s, region, &ExtensionParams::default());
        (0..s.len()).all(|k| region.contains(s.level.phi[k]) || f[k].to_bits() == f0[k].to_bits())
    });
    let mut st = FieldState::zeros(s.len());
    st.hx.clone_from(&f0);
    st.hy = f0.iter().map(|v| 2.0 - v).collect();
    st.ez = f0.iter().map(|v| v * v).collect();
    let before = st.clone();
    let mut ext = GhostExtender::new(&s, ExtensionParams::default());
    ext.extend_h(&mut st.hx, &mut st.hy);
    ext.extend_e(&mut st.ez);
    let ghosts_only = (0..s.len()).all(|k| {
        s.classes[k] == NodeClass::Ghost
            || (st.hx[k].to_bits() == before.hx[k].to_bits()
                && st.hy[k].to_bits() == before.hy[k].to_bits()
                && st.ez[k].to_bits() == before.ez[k].to_bits())
    });
    regions_ok && ghosts_only
}

fn thread_determinism() -> bool {
    let s = scene(Shape::default_half_moon(), 100);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| ghostmax::run_simulation(&s, &RunParams::default(), |_, _| Ok(())).expect("run"))
    };
    let bits = |st: &FieldState| {
        st.hx
            .iter()
            .chain(&st.hy)
            .chain(&st.ez)
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    let reference = bits(&run(1));
    [2, 4].iter().all(|&t| bits(&run(t)) == reference)
}

fn invariant_suite() -> Outcome {
    let fit = fit_linear_exactness();
    let constant = constant_state_fixed_point();
    let (boundary, steps) = boundary_invariance();
    let frozen = frozen_region_integrity();
    let deterministic = thread_determinism();
    Outcome::new(
        fit.is_ok() && constant && boundary && frozen && deterministic,
        format!(
            "fit linear exactness (1000 random stencils): {}; constant state fixed point: {constant}; boundary conditions after each of {steps} steps: {boundary}; frozen nodes bit-identical: {frozen}; bitwise identical on 1/2/4 threads: {deterministic}",
            fit.as_ref().map(|_| "true".to_string()).unwrap_or_else(|e| e.clone())
        ),
    )
}

fn report(id: usize, name: &str, started: Instant, outcome: &Outcome) {
    println!(
        "[{}] criterion {id} {name}: {} ({:.1}s)",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().flush();
}

fn main() {
    // `cargo test -- --list` and similar harness probes.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failures = Vec::new();
    let mut check = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        report(id, name, t, &outcome);
        if !outcome.pass {
            failures.push(id);
        }
    };

    check(4, "free-space order lift", &mut freespace_lift);
    check(5, "level-set quality", &mut levelset_quality);
    check(6, "ghost extension vs reflection oracle", &mut ghost_oracle);
    check(7, "invariant suite", &mut invariant_suite);

    let t = Instant::now();
    let circle_report = study(circle(), vec![100, 200, 400], 1.0);
    println!("{}", circle_report.to_table().trim_end());
    let outcome = circle_convergence(&circle_report);
    report(1, "circle convergence", t, &outcome);
    if !outcome.pass {
        failures.push(1);
    }

    let t = Instant::now();
    let moon_report = study(Shape::default_half_moon(), vec![100, 200, 400], 1.0);
    println!("{}", moon_report.to_table().trim_end());
    let outcome = half_moon_convergence(&moon_report, &circle_report);
    report(2, "half-moon convergence", t, &outcome);
    if !outcome.pass {
        failures.push(2);
    }

    let t = Instant::now();
    let cfl_report = study(circle(), vec![200, 400], 1.4);
    println!("{}", cfl_report.to_table().trim_end());
    let outcome = cfl14_robustness(&cfl_report);
    report(3, "dt/dx = 1.4 robustness", t, &outcome);
    if !outcome.pass {
        failures.push(3);
    }

    failures.sort_unstable();
    if failures.is_empty() {
        println!("acceptance: all 7 criteria pass");
    } else {
        println!("acceptance: failing criteria {failures:?}");
        std::process::exit(1);
    }
}
