//! Command-line interface for the one-dimensional nonlinear scattering
//! solvers: single-point solves, wavenumber sweeps with CSV/JSON/SVG output,
//! phenomenon detection, nonreciprocity scans, and a composition diagnostic.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use scatter1d::phenomena::{
    detect_spectral_singularity, detect_time_reversed_ss, find_reflectionless, max_gap,
    nonreciprocity_scan, DetectParams,
};
use scatter1d::xfer::{compose, delta_transfer, double_delta_matrix, numeric_transfer};
use scatter1d::{Complex64, Side, WaveNumber};
use scatter1d_cli::config::{KGridSpec, OutputSpec, SideSpec, Spacing, SweepConfig};
use scatter1d_cli::output::{
    render_csv, render_json, render_plot_script, render_plot_svg, write_text, SweepRow,
};
use scatter1d_cli::presets::{load_preset, PRESET_NAMES};
use scatter1d_cli::sweep::{run_sweep, SolverExhausted};

#[derive(Parser)]
#[command(
    name = "scatter1d",
    about = "Nonlinear one-dimensional scattering: multistable reflection/transmission \
             branches, spectral singularities, invisibility, nonreciprocity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one (k, amplitude) point and print the branch table.
    Solve(SolveArgs),
    /// Sweep a wavenumber grid and emit CSV/JSON/plot artifacts.
    Sweep(SweepArgs),
    /// Detect a scattering phenomenon.
    Detect(DetectArgs),
    /// Compare left/right transmission at equal incident amplitude.
    Nonreciprocity(NonreciprocityArgs),
    /// Diagnostic: composed single-site maps against the closed-form
    /// double-site matrix and the numeric construction.
    ComposeCheck(ComposeCheckArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped preset (see `scatter1d presets`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Incident amplitude modulus |A|.
    #[arg(long)]
    amp: Option<f64>,
    /// Incidence side: l, r, or both.
    #[arg(long)]
    side: Option<String>,
    /// Residual tolerance for reported roots.
    #[arg(long)]
    tol: Option<f64>,
    /// Scan grid density for root enumeration.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Upper bound of the transmitted-modulus scan window.
    #[arg(long)]
    window_max: Option<f64>,
    /// Worker threads for sweep points.
    #[arg(long)]
    workers: Option<usize>,
    /// Cross-check every branch against the Jost route.
    #[arg(long)]
    verify: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SweepConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => SweepConfig::load(path)?,
            (None, Some(name)) => load_preset(name)?,
            (None, None) => bail!("provide --config PATH or --preset NAME"),
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        if let Some(amp) = self.amp {
            cfg.amp = amp;
        }
        if let Some(side) = &self.side {
            cfg.side = SideSpec::parse(side)?;
        }
        if let Some(tol) = self.tol {
            cfg.solver.tol = tol;
        }
        if let Some(grid_n) = self.grid_n {
            cfg.solver.grid_n = grid_n;
        }
        if let Some(window_max) = self.window_max {
            cfg.solver.window_max = Some(window_max);
        }
        if let Some(workers) = self.workers {
            cfg.workers = Some(workers);
        }
        if self.verify {
            cfg.verify = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out_json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out_plot: Option<PathBuf>,
    /// Companion plotting script for external tooling.
    #[arg(long, value_name = "PATH")]
    out_script: Option<PathBuf>,
}

impl OutputArgs {
    fn merge_into(&self, outputs: &mut OutputSpec) {
        if self.out_csv.is_some() {
            outputs.csv = self.out_csv.clone();
        }
        if self.out_json.is_some() {
            outputs.json = self.out_json.clone();
        }
        if self.out_plot.is_some() {
            outputs.plot = self.out_plot.clone();
        }
        if self.out_script.is_some() {
            outputs.script = self.out_script.clone();
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Wavenumber.
    #[arg(long)]
    k: f64,
    #[command(flatten)]
    outputs: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    k_count: Option<usize>,
    /// Geometric instead of linear wavenumber spacing.
    #[arg(long)]
    log_spacing: bool,
    #[command(flatten)]
    outputs: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Phenomenon {
    /// Spectral singularities (lasing threshold).
    Ss,
    /// Time-reversed spectral singularities (coherent perfect absorption).
    Trss,
    /// Reflectionless amplitudes.
    Reflectionless,
    /// Reflectionless and transparent amplitudes.
    Invisible,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(value_enum)]
    what: Phenomenon,
    #[command(flatten)]
    config: ConfigArgs,
    /// Wavenumber for amplitude-domain detections.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    k_min: f64,
    #[arg(long, default_value_t = 10.0)]
    k_max: f64,
    /// Emission-modulus window for singularity searches.
    #[arg(long, default_value_t = 0.1)]
    n_min: f64,
    #[arg(long, default_value_t = 5.0)]
    n_max: f64,
    /// Incident-amplitude window for reflectionless/invisible searches.
    #[arg(long, default_value_t = 0.1)]
    amp_min: f64,
    #[arg(long, default_value_t = 5.0)]
    amp_max: f64,
}

#[derive(Args)]
struct NonreciprocityArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0.1)]
    k_min: f64,
    #[arg(long, default_value_t = 15.0)]
    k_max: f64,
    #[arg(long, default_value_t = 200)]
    k_count: usize,
}

#[derive(Args)]
struct ComposeCheckArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Argument grid resolution per axis.
    #[arg(long, default_value_t = 20)]
    grid: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<SolverExhausted>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Nonreciprocity(args) => cmd_nonreciprocity(args),
        Command::ComposeCheck(args) => cmd_compose_check(args),
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn emit_outputs(rows: &[SweepRow], outputs: &OutputSpec, title: &str) -> Result<()> {
    if let Some(path) = &outputs.csv {
        write_text(path, &render_csv(rows))?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &outputs.json {
        write_text(path, &render_json(rows)?)?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &outputs.plot {
        write_text(path, &render_plot_svg(rows, title))?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &outputs.script {
        let csv_ref = outputs
            .csv
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "sweep.csv".to_string());
        write_text(path, &render_plot_script(&csv_ref))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn print_rows(rows: &[SweepRow]) {
    println!(
        "{:>10} {:>4} {:>6} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13} {:>10}  {}",
        "k", "side", "branch", "n", "Re R", "Im R", "Re T", "Im T", "|T|^2", "residual", "flags"
    );
    for r in rows {
        println!(
            "{:>10.5} {:>4} {:>6} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>10.2e}  {}",
            r.k, r.side, r.branch, r.n, r.re_r, r.im_r, r.re_t, r.im_t, r.abs_t2, r.residual, r.flags
        );
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let mut cfg = args.config.resolve()?;
    if !(args.k > 0.0) {
        bail!("--k must be positive");
    }
    cfg.k_grid = KGridSpec {
        min: args.k,
        max: args.k,
        count: 1,
        spacing: Spacing::Linear,
    };
    args.outputs.merge_into(&mut cfg.outputs);
    let rows = run_sweep(&cfg)?;
    print_rows(&rows);
    emit_outputs(&rows, &cfg.outputs, &format!("branches at k = {}", args.k))?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = args.config.resolve()?;
    if let Some(min) = args.k_min {
        cfg.k_grid.min = min;
    }
    if let Some(max) = args.k_max {
        cfg.k_grid.max = max;
    }
    if let Some(count) = args.k_count {
        cfg.k_grid.count = count;
    }
    if args.log_spacing {
        cfg.k_grid.spacing = Spacing::Log;
    }
    cfg.k_grid.points().context("k grid")?;
    args.outputs.merge_into(&mut cfg.outputs);

    let rows = run_sweep(&cfg)?;
    let branches = rows.iter().filter(|r| r.n.is_finite()).count();
    let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
    let title = args
        .config
        .preset
        .clone()
        .unwrap_or_else(|| "sweep".to_string());
    emit_outputs(
        &rows,
        &cfg.outputs,
        &format!("|T|^2 vs k ({title}, |A| = {})", cfg.amp),
    )?;
    eprintln!(
        "swept {} wavenumbers, {} sides: {branches} branches ({flagged} flagged rows)",
        cfg.k_grid.count,
        cfg.side.sides().len()
    );
    if cfg.outputs.csv.is_none() && cfg.outputs.json.is_none() {
        eprintln!("hint: pass --out-csv/--out-json/--out-plot to keep the data");
    }
    Ok(())
}

fn cmd_detect(args: DetectArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let interaction = cfg.interaction.to_core()?;
    let solve = cfg.solver.to_options(interaction.has_negative_power());
    let mut detect = DetectParams::default();
    detect.tol = cfg.solver.tol.min(1e-10);

    let side = match cfg.side {
        SideSpec::Right => Side::Right,
        _ => Side::Left,
    };

    match args.what {
        Phenomenon::Ss | Phenomenon::Trss => {
            let k_range = (args.k_min, args.k_max);
            let n_range = (args.n_min, args.n_max);
            let reports = match args.what {
                Phenomenon::Ss => {
                    detect_spectral_singularity(&interaction, side, k_range, n_range, &detect)?
                }
                _ => detect_time_reversed_ss(&interaction, side, k_range, n_range, &detect)?,
            };
            if reports.is_empty() {
                println!(
                    "no detections in k ∈ [{}, {}], n ∈ [{}, {}]",
                    args.k_min, args.k_max, args.n_min, args.n_max
                );
                return Ok(());
            }
            println!(
                "{:>12} {:>12} {:>12} {:>12} {:>10}",
                "k*", "n*", "I(-inf)", "I(+inf)", "defect"
            );
            for r in reports {
                println!(
                    "{:>12.8} {:>12.8} {:>12.6e} {:>12.6e} {:>10.2e}",
                    r.k_star, r.n_star, r.intensity_left, r.intensity_right, r.defect
                );
            }
        }
        Phenomenon::Reflectionless | Phenomenon::Invisible => {
            let k = args
                .k
                .context("--k is required for amplitude-domain detection")?;
            let k = WaveNumber::new(k).map_err(|e| anyhow::anyhow!("{e}"))?;
            let hits = find_reflectionless(
                &interaction,
                side,
                k,
                (args.amp_min, args.amp_max),
                &detect,
                &solve,
            )?;
            let want_invisible = args.what == Phenomenon::Invisible;
            println!("{:>12} {:>12} {:>12} {:>12}", "|A|", "n", "|R|", "|T-1|");
            let mut shown = 0usize;
            for h in &hits {
                let t_defect = (h.branch.t - Complex64::new(1.0, 0.0)).norm();
                if want_invisible && t_defect >= detect.tol {
                    continue;
                }
                println!(
                    "{:>12.8} {:>12.8} {:>12.2e} {:>12.2e}",
                    h.abs_amplitude,
                    h.branch.n,
                    h.branch.r.norm(),
                    t_defect
                );
                shown += 1;
            }
            if shown == 0 {
                println!(
                    "no detections in |A| ∈ [{}, {}]",
                    args.amp_min, args.amp_max
                );
            }
        }
    }
    Ok(())
}

fn cmd_nonreciprocity(args: NonreciprocityArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let interaction = cfg.interaction.to_core()?;
    let solve = cfg.solver.to_options(interaction.has_negative_power());
    if !(args.k_min > 0.0 && args.k_min <= args.k_max && args.k_count >= 1) {
        bail!("invalid wavenumber grid");
    }
    let ks: Vec<f64> = if args.k_count == 1 {
        vec![args.k_min]
    } else {
        (0..args.k_count)
            .map(|j| args.k_min + (args.k_max - args.k_min) * j as f64 / (args.k_count - 1) as f64)
            .collect()
    };

    let scan_chunk = |chunk: &[f64]| nonreciprocity_scan(&interaction, chunk, cfg.amp, &solve);
    let points = match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()?;
            pool.install(|| {
                ks.par_chunks(16)
                    .map(scan_chunk)
                    .collect::<Result<Vec<_>, _>>()
            })?
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
        }
        None => ks
            .par_chunks(16)
            .map(scan_chunk)
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect(),
    };

    println!(
        "{:>10} {:>8} {:>13} {:>13} {:>13} {:>6}",
        "k", "pairs", "|T_l|^2", "|T_r|^2", "gap", "struct"
    );
    for p in &points {
        for (tl, tr) in &p.pairs {
            println!(
                "{:>10.5} {:>8} {:>13.6e} {:>13.6e} {:>13.6e} {:>6}",
                p.k,
                p.pairs.len(),
                tl,
                tr,
                (tl - tr).abs(),
                if p.structural_mismatch { "yes" } else { "" }
            );
        }
    }
    println!("max transmission gap: {:.6e}", max_gap(&points));
    Ok(())
}

fn cmd_compose_check(args: ComposeCheckArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let interaction = cfg.interaction.to_core()?;
    let sites = interaction
        .sites()
        .filter(|s| s.len() == 2)
        .context("compose-check needs a two-site delta chain")?
        .to_vec();
    let k = WaveNumber::new(args.k).map_err(|e| anyhow::anyhow!("{e}"))?;

    let composed = compose(delta_transfer(&sites[1], k), delta_transfer(&sites[0], k))
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let numeric = numeric_transfer(&interaction, k);

    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let n = args.grid.max(2);
    let mut max_compose = 0f64;
    let mut max_numeric = 0f64;
    let mut max_det = 0f64;
    for i in 0..n {
        let a = Complex64::from_polar(0.05 + 0.15 * i as f64 / (n - 1) as f64, golden * i as f64);
        for j in 0..n {
            let b = Complex64::from_polar(
                0.3 + 0.25 * j as f64 / (n - 1) as f64,
                golden * (j as f64 + 0.5),
            );
            let closed = double_delta_matrix(&sites[0], &sites[1], k, a, b)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let mc = composed.eval(a, b).map_err(|e| anyhow::anyhow!("{e}"))?;
            let mn = numeric.eval(a, b).map_err(|e| anyhow::anyhow!("{e}"))?;
            max_compose = max_compose.max(mc.max_abs_diff(&closed));
            max_numeric = max_numeric.max(mn.max_abs_diff(&closed));
            max_det = max_det.max((mc.det() - Complex64::new(1.0, 0.0)).norm());
        }
    }
    println!("composition vs closed form : max |ΔM| = {max_compose:.3e}");
    println!("numeric     vs closed form : max |ΔM| = {max_numeric:.3e}");
    println!("unimodularity              : max |det M - 1| = {max_det:.3e}");
    Ok(())
}
