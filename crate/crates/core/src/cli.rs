//! Command-line front end and run orchestration. Everything that touches a
//! run directory lives here.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, CaseName, EnstrophyStats, Manifest};
use crate::config::{self, RunConfig, RunMode};
use crate::error::{QgError, Result};
use crate::filter::FilterMode;
use crate::linsolve::SolverLog;
use crate::mms::{self, ConvergenceStudy};
use crate::timeloop::{
    format_series_row, load_checkpoint, read_series_csv, save_checkpoint, Accumulators, Integrator,
    RunObserver, SimState, AVERAGE_NAMES,
};

pub const CONFIG_ECHO: &str = "config.ini";
pub const MANIFEST: &str = "manifest.txt";
pub const ENSTROPHY_CSV: &str = "enstrophy.csv";
pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const FINAL_DIR: &str = "final";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const AVERAGES_META: &str = "averages.txt";

const EXIT_HELP: &str = "\
Exit status:
  0  success
  1  generic failure (including a failed verification gate)
  2  invalid configuration or arguments
  3  a linear solve did not converge
  4  the solution became non-finite
  5  file or I/O error";

#[derive(Debug, Parser)]
#[command(name = "qg2", version, about = "Two-layer quasi-geostrophic solver with differential filters", after_help = EXIT_HELP)]
pub struct Cli {
    /// Worker threads for independent runs (meshes of a study, cases of a matrix).
    #[arg(long, global = true, env = "QG2_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manufactured-solution convergence study.
    Verify(VerifyArgs),
    /// Single simulation from a config file and/or flags.
    Run(RunArgs),
    /// Matrix of filter modes on a canned case, with published comparisons.
    Bench(BenchArgs),
    /// Enstrophy statistics of finished runs' CSV files.
    Stats(StatsArgs),
    /// Continue a run from its last checkpoint.
    Resume(ResumeArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Verification case, or `all`.
    #[arg(long, default_value = "ro1-re10")]
    pub case: String,
    /// Comma-separated cells per side.
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub meshes: Vec<usize>,
    /// Final time of each mesh run.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time step on the first mesh (halved with h).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Directory receiving `<case>/convergence.csv` and `<case>/report.txt`.
    #[arg(long, default_value = "output/verify")]
    pub output: PathBuf,
    /// Report only; do not fail on the published-error gate.
    #[arg(long)]
    pub no_gate: bool,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// INI configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<String>,
    /// Mesh as NXxNY.
    #[arg(long)]
    pub mesh: Option<String>,
    /// none, linear or nonlinear.
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Run directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "case1")]
    pub case: String,
    #[arg(long, default_value = "32x64")]
    pub mesh: String,
    /// Comma-separated filter modes.
    #[arg(long, value_delimiter = ',', default_value = "none,linear,nonlinear")]
    pub filters: Vec<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Parent of the per-mode run directories.
    #[arg(long, default_value = "output/bench")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Enstrophy CSV files (`t,E1,E2`) or run directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 20.0)]
    pub window_start: f64,
    #[arg(long, default_value_t = 100.0)]
    pub window_end: f64,
    /// Reference series for the L2 error column.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResumeArgs {
    /// Run directory holding a checkpoint.
    pub dir: PathBuf,
    /// New final time (defaults to the configured one).
    #[arg(long)]
    pub t_end: Option<f64>,
}

/// Outcome of a completed simulation.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub steps: u64,
    pub t: f64,
    pub wall_seconds: f64,
    /// Enstrophy statistics over the averaging window, if it saw samples.
    pub stats: Option<[EnstrophyStats; 2]>,
    /// Largest enstrophy seen at any sample.
    pub max_enstrophy: f64,
    pub min_enstrophy: f64,
}

/// Observer writing into a run directory as the simulation proceeds.
pub struct RunDirectory {
    dir: PathBuf,
    dt: f64,
    csv: BufWriter<fs::File>,
}

impl RunDirectory {
    /// Creates the directory and an enstrophy CSV holding `existing` rows.
    pub fn create(dir: &Path, dt: f64, existing: &[(f64, f64, f64)]) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| QgError::file(dir, e))?;
        let path = dir.join(ENSTROPHY_CSV);
        let file = fs::File::create(&path).map_err(|e| QgError::file(&path, e))?;
        let mut csv = BufWriter::new(file);
        writeln!(csv, "t,E1,E2")?;
        for (t, e1, e2) in existing {
            writeln!(csv, "{}", format_series_row(*t, *e1, *e2))?;
        }
        csv.flush()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            dt,
            csv,
        })
    }
}

impl RunObserver for RunDirectory {
    fn enstrophy(&mut self, t: f64, e1: f64, e2: f64) -> Result<()> {
        writeln!(self.csv, "{}", format_series_row(t, e1, e2))?;
        self.csv.flush()?;
        Ok(())
    }

    fn snapshot(&mut self, state: &SimState) -> Result<()> {
        let dir = self.dir.join(SNAPSHOT_DIR).join(format!("t{:.6}", state.t));
        state.save_fields(&dir, "")
    }

    fn checkpoint(&mut self, state: &SimState, acc: &Accumulators) -> Result<()> {
        // Write beside the previous checkpoint and swap, so an interrupted
        // write never destroys the last good one.
        let tmp = self.dir.join(format!("{CHECKPOINT_DIR}.tmp"));
        let dest = self.dir.join(CHECKPOINT_DIR);
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| QgError::file(&tmp, e))?;
        }
        fs::create_dir_all(&tmp).map_err(|e| QgError::file(&tmp, e))?;
        save_checkpoint(&tmp, state, acc, self.dt)?;
        if dest.exists() {
            fs::remove_dir_all(&dest).map_err(|e| QgError::file(&dest, e))?;
        }
        fs::rename(&tmp, &dest).map_err(|e| QgError::file(&dest, e))
    }

    fn solver_log(&mut self, log: &SolverLog) -> Result<()> {
        let path = self.dir.join("solver_log.csv");
        let file = fs::File::create(&path).map_err(|e| QgError::file(&path, e))?;
        let mut w = BufWriter::new(file);
        log.write_csv(&mut w)?;
        w.flush().map_err(|e| QgError::file(&path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.csv.flush()?;
        Ok(())
    }
}

fn manifest_for(cfg: &RunConfig, summary: &RunSummary, averaged: bool) -> Manifest {
    let mut m = Manifest::new();
    m.set("case", cfg.case.as_deref().unwrap_or("custom"));
    m.set("mesh", format!("{}x{}", cfg.grid.nx(), cfg.grid.ny()));
    m.set("filter", cfg.filter.mode);
    m.set("alpha", format!("{:e}", cfg.filter.alpha));
    m.set("dt", format!("{:e}", cfg.dt));
    m.set("t_end", format!("{:e}", summary.t));
    m.set("steps", summary.steps);
    m.set("wall_clock_seconds", format!("{:.3}", summary.wall_seconds));
    m.set("config", CONFIG_ECHO);
    m.set("enstrophy_csv", ENSTROPHY_CSV);
    m.set("window_start", format!("{:e}", cfg.window.0));
    m.set("window_end", format!("{:e}", cfg.window.1));
    if averaged {
        let files: Vec<String> = AVERAGE_NAMES.iter().map(|n| format!("avg_{n}.fld")).collect();
        m.set("averaged_fields", files.join(","));
    }
    if let Some([e1, e2]) = summary.stats {
        m.set("e1_avg", format!("{:.6e}", e1.avg));
        m.set("e1_max", format!("{:.6e}", e1.max));
        m.set("e2_avg", format!("{:.6e}", e2.avg));
        m.set("e2_min", format!("{:.6e}", e2.min));
    }
    m
}

/// Runs `state` to `cfg.t_end`, writing everything into `cfg.output`.
fn drive(cfg: &RunConfig, state: SimState, mut acc: Accumulators) -> Result<RunSummary> {
    let started = Instant::now();
    let dir = cfg.output.clone();
    let integ = Integrator::new(cfg.step_config()?)?;
    let mut out = RunDirectory::create(&dir, cfg.dt, &acc.series)?;
    let echo = dir.join(CONFIG_ECHO);
    fs::write(&echo, cfg.to_ini()).map_err(|e| QgError::file(&echo, e))?;

    let result = integ.run(state, &cfg.plan(), &mut acc, &mut out);
    // Whatever happened, leave the series on disk in a consistent state.
    out.flush()?;
    let end = result?;
    end.save_fields(&dir.join(FINAL_DIR), "")?;

    let averaged = acc.count() > 0;
    if averaged {
        for (f, name) in acc.averages()?.iter().zip(AVERAGE_NAMES) {
            f.save(&dir.join(format!("avg_{name}.fld")), cfg.window.1.min(end.t))?;
        }
        let meta = dir.join(AVERAGES_META);
        let text = format!(
            "window_start = {:e}\nwindow_end = {:e}\nsamples = {}\n",
            cfg.window.0,
            cfg.window.1,
            acc.count()
        );
        fs::write(&meta, text).map_err(|e| QgError::file(&meta, e))?;
    }
    let (lo, hi) = acc.series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.1).min(s.2), hi.max(s.1).max(s.2))
    });
    let summary = RunSummary {
        dir: dir.clone(),
        steps: end.step,
        t: end.t,
        wall_seconds: started.elapsed().as_secs_f64(),
        stats: bench::enstrophy_stats(&acc.series, cfg.window).ok(),
        max_enstrophy: hi,
        min_enstrophy: lo,
    };
    manifest_for(cfg, &summary, averaged).save(&dir.join(MANIFEST))?;
    Ok(summary)
}

/// Runs a wind-driven configuration from rest.
pub fn execute_run(cfg: &RunConfig) -> Result<RunSummary> {
    if cfg.mode == RunMode::Mms {
        return Err(QgError::config("run.mode", "verification cases run through `verify`"));
    }
    let state = SimState::rest(&cfg.grid);
    let acc = Accumulators::new(&cfg.grid, cfg.window, cfg.enstrophy_stride, cfg.dt)?;
    drive(cfg, state, acc)
}

/// Continues the run in `dir` from its checkpoint, optionally to a new
/// final time.
pub fn resume_run(dir: &Path, t_end: Option<f64>) -> Result<RunSummary> {
    let echo = dir.join(CONFIG_ECHO);
    let text = fs::read_to_string(&echo).map_err(|e| QgError::file(&echo, e))?;
    let mut cfg = config::parse_config(&text)?;
    cfg.output = dir.to_path_buf();
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    let (state, acc, dt) = load_checkpoint(&dir.join(CHECKPOINT_DIR))?;
    if dt.to_bits() != cfg.dt.to_bits() {
        return Err(QgError::config("run.dt", "checkpoint was written with a different time step"));
    }
    if !state.grid().same_as(&cfg.grid) {
        return Err(QgError::GridMismatch);
    }
    drive(&cfg, state, acc)
}

fn run_overrides(args: &RunArgs) -> Vec<(&'static str, String)> {
    let mut o = Vec::new();
    if let Some(v) = &args.case {
        o.push(("run.case", v.clone()));
    }
    if let Some(v) = &args.mesh {
        o.push(("run.mesh", v.clone()));
    }
    if let Some(v) = &args.filter {
        o.push(("filter.mode", v.clone()));
    }
    if let Some(v) = args.alpha {
        o.push(("filter.alpha", format!("{v:e}")));
    }
    if let Some(v) = args.dt {
        o.push(("run.dt", format!("{v:e}")));
    }
    if let Some(v) = args.t_end {
        o.push(("run.t_end", format!("{v:e}")));
    }
    if let Some(v) = &args.output {
        o.push(("run.output", v.display().to_string()));
    }
    o
}

/// Builds the configuration of `qg2 run` from its file and flags.
pub fn run_config(args: &RunArgs, workers: Option<usize>) -> Result<RunConfig> {
    let text = match &args.config {
        Some(p) => fs::read_to_string(p).map_err(|e| QgError::file(p, e))?,
        None => String::new(),
    };
    let mut o = run_overrides(args);
    if let Some(w) = workers {
        o.push(("run.workers", w.to_string()));
    }
    config::parse_config_with(&text, &o)
}

fn format_stats(label: &str, stats: &Option<[EnstrophyStats; 2]>) -> String {
    match stats {
        Some([e1, e2]) => format!(
            "{label:<12} {:>11} {:>11} {:>11} {:>11}",
            mms::format_sci(e1.avg),
            mms::format_sci(e1.max),
            mms::format_sci(e2.avg),
            mms::format_sci(e2.min)
        ),
        None => format!("{label:<12} (no samples in the averaging window)"),
    }
}

fn stats_header() -> String {
    format!("{:<12} {:>11} {:>11} {:>11} {:>11}", "", "E1 avg", "E1 max", "E2 avg", "E2 min")
}

/// Runs a convergence study of one named case and writes its reports.
pub fn verify_case(
    name: &str,
    args: &VerifyArgs,
    workers: usize,
) -> Result<(ConvergenceStudy, mms::GateReport)> {
    let case = mms::case(name)?;
    let mut cfg = case.config();
    cfg.meshes = args.meshes.clone();
    if let Some(t) = args.t_end {
        cfg.t_end = t;
    }
    if let Some(dt) = args.dt {
        cfg.dt_coarse = dt;
    }
    let study = mms::run_convergence_study(&cfg, workers)?;
    let dir = args.output.join(name);
    fs::create_dir_all(&dir).map_err(|e| QgError::file(&dir, e))?;
    let csv = dir.join("convergence.csv");
    let file = fs::File::create(&csv).map_err(|e| QgError::file(&csv, e))?;
    let mut w = BufWriter::new(file);
    study.write_csv(&mut w)?;
    w.flush().map_err(|e| QgError::file(&csv, e))?;
    let report = case.gate(&study);
    let mut text = study.text_table();
    if report.passed() {
        text.push_str("gate: PASS\n");
    } else {
        text.push_str("gate: FAIL\n");
        for f in &report.failures {
            text.push_str(&format!("  {f}\n"));
        }
    }
    let path = dir.join("report.txt");
    fs::write(&path, &text).map_err(|e| QgError::file(&path, e))?;
    Ok((study, report))
}

fn cmd_verify(args: &VerifyArgs, workers: usize) -> Result<bool> {
    let names: Vec<&str> = if args.case == "all" {
        mms::CASES.iter().map(|c| c.name).collect()
    } else {
        vec![args.case.as_str()]
    };
    let mut ok = true;
    for name in names {
        let (study, report) = verify_case(name, args, workers)?;
        println!("{name}");
        print!("{}", study.text_table());
        if report.passed() {
            println!("gate: PASS\n");
        } else {
            println!("gate: FAIL");
            for f in &report.failures {
                println!("  {f}");
            }
            println!();
            ok &= args.no_gate;
        }
    }
    Ok(ok)
}

fn cmd_bench(args: &BenchArgs, workers: usize) -> Result<()> {
    let case: CaseName = args.case.parse()?;
    let mesh = config::parse_mesh(&args.mesh)?;
    let modes: Vec<FilterMode> = args
        .filters
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_>>()?;
    let mut configs = Vec::new();
    for mode in modes {
        let mut cfg = bench::make_case(case, mesh, mode, None)?;
        if let Some(t) = args.t_end {
            cfg.t_end = t;
        }
        cfg.output = args.output.join(format!("{case}-{}x{}-{mode}", mesh.0, mesh.1));
        cfg.validate()?;
        configs.push(cfg);
    }
    let mut summaries = Vec::new();
    for chunk in configs.chunks(workers.max(1)) {
        let outs: Vec<Result<RunSummary>> = thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|c| s.spawn(move || execute_run(c))).collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(QgError::InvalidParameter("run panicked".into())))
                })
                .collect()
        });
        for (cfg, o) in chunk.iter().zip(outs) {
            summaries.push((cfg.filter.mode, o?));
        }
    }
    println!("{case} {}x{}", mesh.0, mesh.1);
    println!("{}", stats_header());
    for (mode, s) in &summaries {
        println!("{}", format_stats(mode.as_str(), &s.stats));
    }
    let table = bench::published_table(case);
    if table.coarse_mesh == mesh {
        println!("published:");
        for r in &table.rows {
            println!(
                "{:<12} {:>11} {:>11} {:>11} {:>11}",
                r.model,
                mms::format_sci(r.e1_avg),
                mms::format_sci(r.e1_max),
                mms::format_sci(r.e2_avg),
                mms::format_sci(r.e2_min)
            );
        }
    }
    Ok(())
}

fn series_of(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    if path.is_dir() {
        read_series_csv(&path.join(ENSTROPHY_CSV))
    } else {
        read_series_csv(path)
    }
}

fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let window = (args.window_start, args.window_end);
    let reference = args.reference.as_deref().map(series_of).transpose()?;
    let mut header = stats_header();
    if reference.is_some() {
        header.push_str(&format!(" {:>11} {:>11}", "E1 L2", "E2 L2"));
    }
    println!("{header}");
    for input in &args.inputs {
        let series = series_of(input)?;
        let stats = bench::enstrophy_stats(&series, window)?;
        let mut line = format_stats(&input.display().to_string(), &Some(stats));
        if let Some(r) = &reference {
            let [l1, l2] = bench::series_l2_error(&series, r, window)?;
            line.push_str(&format!(" {:>11} {:>11}", mms::format_sci(l1), mms::format_sci(l2)));
        }
        println!("{line}");
    }
    Ok(())
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} steps to t = {} in {:.1} s; output in {}",
        s.steps,
        s.t,
        s.wall_seconds,
        s.dir.display()
    );
    println!("{}", stats_header());
    println!("{}", format_stats("run", &s.stats));
}

/// Executes a parsed command line. `Ok(false)` means the command ran but a
/// verification gate failed.
pub fn dispatch(cli: Cli) -> Result<bool> {
    let workers = cli.workers.unwrap_or(1);
    if workers == 0 {
        return Err(QgError::config("workers", "must be at least 1"));
    }
    match cli.command {
        Command::Verify(a) => cmd_verify(&a, workers),
        Command::Run(a) => {
            let cfg = run_config(&a, cli.workers)?;
            print_summary(&execute_run(&cfg)?);
            Ok(true)
        }
        Command::Bench(a) => cmd_bench(&a, workers).map(|_| true),
        Command::Stats(a) => cmd_stats(&a).map(|_| true),
        Command::Resume(a) => {
            print_summary(&resume_run(&a.dir, a.t_end)?);
            Ok(true)
        }
    }
}
