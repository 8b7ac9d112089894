use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavswap::multipartite::{
    bell, fidelity_report, ghz, kernel_fidelity_report, w_state, FidelityReport, KernelTable, PostSelectedScheme,
    WaveformTable,
};
use cavswap::pipeline::{simulate_pair, simulate_source, swap_identical, SourceRun};
use cavswap::sweep::output::{
    write_bound_report, write_curve, write_frontier, write_samples, write_scan_samples,
};
use cavswap::sweep::{run_asymmetric_scan, run_bound_check, run_tradeoff_sweep, Family, RunConfig, ScanPlan, SigmaRange, Spacing};
use cavswap::{Error, Regime, Result, SwapResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "cavswap", version, about = "Rate-fidelity sweeps for cavity-based entanglement swapping")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reference regime (a-e) used when no config file is given.
    #[arg(long, global = true, default_value = "a")]
    regime: Regime,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fixed number of time samples per source.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Relative and absolute integrator tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Write the two-time correlation grid of `single` runs.
    #[arg(long, global = true)]
    dump_correlation: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Constant-area sweeps over the pulse width.
    Sweep,
    /// Symmetric and asymmetric pulse scan with per-bin frontiers.
    Asymscan,
    /// Best high-emission fidelity against the cooperativity ceiling.
    Bound,
    /// One swap; prints the result as JSON.
    Single,
    /// Heralded fidelity of a multipartite scheme.
    Multipartite(MultipartiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Bell,
    Ghz,
    W,
}

#[derive(Args)]
struct MultipartiteArgs {
    /// Built-in network.
    #[arg(long, conflicts_with = "scheme")]
    preset: Option<Preset>,
    /// Scheme JSON file.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Number of sources of the W preset.
    #[arg(long, default_value_t = 3)]
    sources: usize,
    /// Excitation probability of each W source.
    #[arg(long, default_value_t = 0.5)]
    excitation: f64,
    /// Waveform overlap matrix as JSON `[[[re, im], ...], ...]`.
    #[arg(long, conflicts_with = "simulate")]
    gram: Option<PathBuf>,
    /// Use correlation kernels simulated from the configured pulse(s).
    #[arg(long)]
    simulate: bool,
    /// Also write the expanded scheme to the output directory.
    #[arg(long)]
    write_scheme: bool,
}

enum Failure {
    Core(Error),
    AllPointsFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::AllPointsFailed) => {
            eprintln!("error: every point failed to integrate");
            ExitCode::from(3)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) | Error::NonUnitary(_) => 2,
        Error::StepRejection { .. }
        | Error::NonConvergence { .. }
        | Error::EmissionZero(_)
        | Error::NoHighEmissionPoint { .. }
        | Error::PostSelectionImpossible => 3,
        _ => 1,
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::for_regime(common.regime),
    };
    if let Some(n) = common.grid_points {
        cfg.solver.grid_points = Some(n);
    }
    if let Some(tol) = common.tolerance {
        cfg.solver.rtol = tol;
        cfg.solver.atol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult {
    let common = &cli.common;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let cfg = load_config(common)?;
    match &cli.command {
        Command::Sweep => sweep(&cfg, &common.out),
        Command::Asymscan => asymscan(&cfg, &common.out),
        Command::Bound => Ok(bound(&cfg, &common.out)?),
        Command::Single => Ok(single(&cfg, common)?),
        Command::Multipartite(args) => Ok(multipartite(&cfg, common, args)?),
    }
}

fn sweep(cfg: &RunConfig, out: &Path) -> CliResult {
    let params = cfg.params()?;
    let settings = cfg.solver_settings();
    let range = cfg.sweep.range()?;
    let label = cfg.label();
    let curves = run_tradeoff_sweep(&params, &label, &cfg.sweep.areas, &range, &settings)?;
    if curves.iter().all(|c| c.points.is_empty()) {
        return Err(Failure::AllPointsFailed);
    }
    for c in &curves {
        let path = write_curve(out, c, &params, &settings)?;
        println!(
            "S={:<6} points={:<4} failed={:<3} max P_ex={:.4} orientation={:?} -> {}",
            c.pulse_area,
            c.points.len(),
            c.failures.len(),
            c.max_p_ex(),
            c.orientation,
            path.display()
        );
    }
    let path = write_samples(out, &curves, &params, &settings)?;
    println!("samples -> {}", path.display());
    Ok(())
}

fn asymscan(cfg: &RunConfig, out: &Path) -> CliResult {
    let params = cfg.params()?;
    let settings = cfg.solver_settings();
    let s = &cfg.scan;
    let plan = ScanPlan::new(
        s.areas.clone(),
        SigmaRange::new(s.sigma1_min, s.sigma1_max, s.sigma1_count, Spacing::Log)?,
        SigmaRange::new(s.ratio_min, s.ratio_max, s.ratio_count, Spacing::Log)?,
        SigmaRange::log_density(s.sigma1_min, s.sigma1_max, s.symmetric_points_per_decade)?,
    )?;
    let scan = run_asymmetric_scan(&params, &plan, &settings)?;
    if scan.samples.is_empty() {
        return Err(Failure::AllPointsFailed);
    }
    println!("samples={} failed={}", scan.samples.len(), scan.failures);
    for family in [Family::FastFall, Family::FastRise] {
        let gains = scan.gains(family);
        let best = gains.iter().max_by(|a, b| a.gain.total_cmp(&b.gain));
        match best {
            Some(g) => println!(
                "{}: best gain over symmetric {:+.4} in P_ex bin {}; median sigma2/sigma1 of improvements {}",
                family.label(),
                g.gain,
                g.bin,
                scan.median_ratio_of_improvements(family)
                    .map(|r| format!("{r:.3}"))
                    .unwrap_or_else(|| "n/a".into())
            ),
            None => println!("{}: no bin shared with the symmetric family", family.label()),
        }
    }
    println!("frontier -> {}", write_frontier(out, &scan)?.display());
    println!("samples -> {}", write_scan_samples(out, &scan, &params, &settings)?.display());
    Ok(())
}

fn bound(cfg: &RunConfig, out: &Path) -> Result<()> {
    let params = cfg.params()?;
    let settings = cfg.solver_settings();
    let range = cfg.sweep.range()?;
    let check = run_bound_check(
        &params,
        &cfg.label(),
        &cfg.bound.areas,
        &range,
        cfg.bound.threshold,
        &settings,
    )?;
    println!(
        "C={:.4} reference F={:.4} best F={:.4} at P_ex={:.4} (S={}, sigma={}) excess={:+.4}",
        check.cooperativity,
        check.reference_fidelity,
        check.best.fidelity,
        check.best.p_ex,
        check.best.area,
        check.best.sigma,
        check.excess
    );
    println!(
        "full bound checked on {} points, worst J - bound = {:.3e}",
        check.points_checked, check.worst_bound_margin
    );
    println!("report -> {}", write_bound_report(out, &[check])?.display());
    Ok(())
}

fn dump(out: &Path, name: &str, run: &SourceRun) -> Result<()> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    run.correlation()?.dump(&path)?;
    log::info!("correlation -> {}", path.display());
    Ok(())
}

fn single(cfg: &RunConfig, common: &Common) -> Result<()> {
    let params = cfg.params()?;
    let settings = cfg.solver_settings();
    let pulse = cfg.pulse()?;
    let result: SwapResult = match &cfg.pulse2 {
        None => {
            if common.dump_correlation {
                dump(&common.out, "correlation.bin", &simulate_source(&params, &pulse, &settings)?)?;
            }
            swap_identical(&params, &pulse, &settings)?.swap
        }
        Some(p2) => {
            let pulse2 = p2.to_policy()?;
            let (r1, r2) = simulate_pair((&params, &pulse), (&params, &pulse2), &settings)?;
            let (c1, c2) = (r1.correlation()?, r2.correlation()?);
            if common.dump_correlation {
                dump(&common.out, "correlation_1.bin", &r1)?;
                dump(&common.out, "correlation_2.bin", &r2)?;
            }
            let j = cavswap::metrics::correlation_j(&c1, &c2, r1.p_ex, r2.p_ex)?;
            SwapResult::new(r1.p_ex, r2.p_ex, j)
        }
    };
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

fn read_gram(path: &Path) -> Result<WaveformTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    WaveformTable::from_gram(
        raw.into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect(),
    )
}

fn simulated_kernels(cfg: &RunConfig, count: usize) -> Result<KernelTable> {
    let params = cfg.params()?;
    let settings = cfg.solver_settings();
    let pulse = cfg.pulse()?;
    let pulse2 = cfg.pulse2.as_ref().map(|p| p.to_policy()).transpose()?;
    let (r1, r2) = simulate_pair((&params, &pulse), (&params, pulse2.as_ref().unwrap_or(&pulse)), &settings)?;
    let c1 = r1.correlation()?;
    let c2 = if pulse2.is_some() { r2.correlation()? } else { c1.clone() };
    let refs: Vec<_> = (0..count).map(|k| if k == 1 { &c2 } else { &c1 }).collect();
    KernelTable::from_correlations(&refs)
}

fn multipartite(cfg: &RunConfig, common: &Common, args: &MultipartiteArgs) -> Result<()> {
    let (scheme, n_waveforms) = match (&args.scheme, args.preset) {
        (Some(path), _) => {
            let s = PostSelectedScheme::load(path)?;
            let n = s.terms.iter().flat_map(|t| t.waveforms.iter().copied()).max().map_or(0, |m| m + 1);
            (s, n)
        }
        (None, preset) => {
            let setup = match preset.unwrap_or(Preset::Bell) {
                Preset::Bell => bell(),
                Preset::Ghz => ghz(),
                Preset::W => w_state(args.sources, args.excitation)?,
            };
            (setup.scheme()?, setup.n_waveforms())
        }
    };
    if args.write_scheme {
        fs::create_dir_all(&common.out)?;
        let path = common.out.join("scheme.json");
        fs::write(&path, scheme.to_json()?)?;
        log::info!("scheme -> {}", path.display());
    }
    let report: FidelityReport = if args.simulate {
        kernel_fidelity_report(&scheme, &simulated_kernels(cfg, n_waveforms)?)?
    } else {
        let table = match &args.gram {
            Some(path) => read_gram(path)?,
            None => WaveformTable::identical(n_waveforms),
        };
        fidelity_report(&scheme, &table)?
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
