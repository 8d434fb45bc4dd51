use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghostmax::export::{export_field, export_grid, export_levelset, export_vtk};
use ghostmax::levelset::gradient_magnitude;
use ghostmax::study::{freespace_study, observed_order};
use ghostmax::{convergence_study, Error, FieldState, NodeClass, Result, Scene, Scheme, Shape, SimulationConfig};

/// Environment variable naming the output directory; `--output-dir` wins.
const OUTPUT_ENV: &str = "GHOSTMAX_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ghostmax", version, about = "TMz scattering off PEC objects on point-shifted grids")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Directory for output files (overrides the config and GHOSTMAX_OUTPUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation on `grid` and write field snapshots.
    Run { config: PathBuf },
    /// Grid-refinement study over `grids` against `reference`.
    Convergence { config: PathBuf },
    /// Signed-distance diagnostics on `grid`.
    Redistance { config: PathBuf },
    /// Plain vs BFECC convergence for the incident wave without an object.
    Freespace { config: PathBuf },
}

impl Command {
    fn config(&self) -> &Path {
        match self {
            Command::Run { config }
            | Command::Convergence { config }
            | Command::Redistance { config }
            | Command::Freespace { config } => config,
        }
    }
}

fn output_dir(global: &GlobalOpts, cfg: &SimulationConfig) -> PathBuf {
    global
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("ghostmax-out"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn build_scene(cfg: &SimulationConfig) -> Result<Scene> {
    let (nx, ny) = cfg.nodes_for(cfg.grid);
    Scene::build(cfg.shape, cfg.domain, nx, ny, &cfg.redistance)
}

fn snapshot(cfg: &SimulationConfig, out: &Path, scene: &Scene, state: &FieldState, name: &str) -> Result<()> {
    let csv = out.join(format!("{name}.csv"));
    export_field(&csv, &scene.grid, &scene.classes, &scene.level.phi, state)?;
    if cfg.vtk {
        export_vtk(&out.join(format!("{name}.vtk")), &scene.grid, &scene.classes, &scene.level.phi, state)?;
    }
    log::info!("wrote {} (t = {:.6})", csv.display(), state.time);
    Ok(())
}

fn cmd_run(cfg: &SimulationConfig, out: &Path) -> Result<()> {
    let scene = build_scene(cfg)?;
    log::info!(
        "grid {}x{}: {} boundary, {} ghost nodes, redistanced in {} iterations",
        scene.grid.nx,
        scene.grid.ny,
        scene.count(NodeClass::Boundary),
        scene.count(NodeClass::Ghost),
        scene.redistance_iterations
    );
    export_grid(&out.join("grid.csv"), &scene.grid, &scene.classes)?;
    export_levelset(&out.join("levelset.csv"), &scene.grid, &scene.level)?;

    let params = cfg.run_params();
    let mut next_snapshot = cfg.snapshot_interval.unwrap_or(f64::INFINITY);
    let mut index = 0;
    let mut steps = 0;
    let state = ghostmax::run_simulation(&scene, &params, |step, state| {
        steps = step;
        if let Some(every) = cfg.snapshot_interval {
            if state.time >= next_snapshot - 1e-9 * every {
                index += 1;
                snapshot(cfg, out, &scene, state, &format!("snapshot_{index:04}"))?;
                while next_snapshot <= state.time + 1e-9 * every {
                    next_snapshot += every;
                }
            }
        }
        Ok(())
    })?;
    snapshot(cfg, out, &scene, &state, "field_final")?;

    let active: Vec<usize> = (0..scene.len()).filter(|&k| scene.classes[k].is_active()).collect();
    let max_ez = active.iter().map(|&k| state.ez[k].abs()).fold(0.0, f64::max);
    let residual = (0..scene.len())
        .filter(|&k| scene.classes[k] == NodeClass::Boundary)
        .map(|k| {
            let n = scene.level.normal[k];
            state.ez[k].abs().max((state.hx[k] * n[0] + state.hy[k] * n[1]).abs())
        })
        .fold(0.0, f64::max);
    println!(
        "steps={steps} time={:.6} scheme={} max_abs_ez={max_ez:.6e} boundary_residual={residual:.3e} output={}",
        state.time,
        params.scheme.as_str(),
        out.display()
    );
    Ok(())
}

fn cmd_convergence(cfg: &SimulationConfig, out: &Path) -> Result<bool> {
    let report = convergence_study(&cfg.study_spec())?;
    write_text(&out.join("convergence.csv"), &report.to_csv())?;
    let table = report.to_table();
    write_text(&out.join("convergence.txt"), &table)?;
    print!("{table}");
    Ok(report.is_complete())
}

/// Histogram of `| |grad phi| − 1 |` on nodes within five spacings of the
/// object surface.
fn cmd_redistance(cfg: &SimulationConfig, out: &Path) -> Result<()> {
    if cfg.shape.is_none() {
        return Err(Error::Config {
            field: "shape".into(),
            reason: "redistance diagnostics need an object".into(),
        });
    }
    let scene = build_scene(cfg)?;
    export_levelset(&out.join("levelset.csv"), &scene.grid, &scene.level)?;
    let h = scene.grid.h();
    let band = 5.0 * h;
    let grad = gradient_magnitude(&scene.level.phi, &scene.fits);
    let devs: Vec<f64> = (0..scene.len())
        .filter(|&k| scene.level.phi[k].abs() <= band)
        .filter_map(|k| grad[k].map(|g| (g - 1.0).abs()))
        .collect();
    let edges = [0.0, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, f64::INFINITY];
    println!("redistanced in {} iterations; {} nodes within {band:.4} of the surface", scene.redistance_iterations, devs.len());
    println!("{:>16}  {:>8}", "| |grad phi|-1 |", "nodes");
    for w in edges.windows(2) {
        let count = devs.iter().filter(|&&d| d >= w[0] && d < w[1]).count();
        let label = if w[1].is_finite() {
            format!("[{}, {})", w[0], w[1])
        } else {
            format!(">= {}", w[0])
        };
        println!("{label:>16}  {count:>8}");
    }
    let max = devs.iter().copied().fold(0.0, f64::max);
    println!("max_grad_deviation={max:.6e}");
    Ok(())
}

fn cmd_freespace(cfg: &SimulationConfig, out: &Path) -> Result<()> {
    let mut csv = String::from("scheme,grid,dx,ez_l1,ez_order,hy_l1,hy_order\n");
    for scheme in [Scheme::Plain, Scheme::Bfecc] {
        let params = ghostmax::RunParams {
            scheme,
            ..cfg.run_params()
        };
        let rows = freespace_study(cfg.domain, &cfg.grids, &params)?;
        println!("{} (dt/dx = {}, T = {})", scheme.as_str(), cfg.dt_ratio, cfg.final_time);
        println!("{:>6}  {:>9}  {:>12}  {:>6}", "grid", "dx", "Ez l1", "order");
        for (i, r) in rows.iter().enumerate() {
            let prev = i.checked_sub(1).map(|j| &rows[j]);
            let ez_order = prev.map(|p| observed_order(p.ez, r.ez));
            let hy_order = prev.map(|p| observed_order(p.hy, r.hy));
            let fmt = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{:.17e},{:.17e},{},{:.17e},{}\n",
                scheme.as_str(),
                r.cells,
                r.spacing,
                r.ez,
                fmt(ez_order),
                r.hy,
                fmt(hy_order)
            ));
            let shown = ez_order.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            println!("{:>6}  {:>9.5}  {:>12.4e}  {:>6}", r.cells, r.spacing, r.ez, shown);
        }
    }
    write_text(&out.join("freespace.csv"), &csv)
}

fn execute(cli: &Cli) -> Result<bool> {
    let mut cfg = SimulationConfig::from_file(cli.command.config())?;
    if matches!(cli.command, Command::Freespace { .. }) {
        cfg.shape = Shape::None;
    }
    let out = output_dir(&cli.global, &cfg);
    std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    match &cli.command {
        Command::Run { .. } => cmd_run(&cfg, &out).map(|_| true),
        Command::Convergence { .. } => cmd_convergence(&cfg, &out),
        Command::Redistance { .. } => cmd_redistance(&cfg, &out).map(|_| true),
        Command::Freespace { .. } => cmd_freespace(&cfg, &out).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error[incomplete]: some study grids failed; see the report");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
