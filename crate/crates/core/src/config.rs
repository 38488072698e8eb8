//! Run configuration: INI parsing, defaulting from the canned cases, and the
//! canonical echo written next to every run's outputs.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;

use crate::bench::{self, CaseName};
use crate::error::{QgError, Result};
use crate::filter::{FilterConfig, FilterMode, DEFAULT_INDICATOR_FLOOR};
use crate::grid::{BoundaryCondition, GridSpec};
use crate::linsolve::{SolverSettings, DEFAULT_TOLERANCE};
use crate::mms;
use crate::physics::PhysicalParams;
use crate::timeloop::{RunPlan, StepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Manufactured-solution convergence study.
    Mms,
    /// One of the canned wind-driven cases.
    Bench,
    /// Everything given explicitly.
    Custom,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Mms => "mms",
            RunMode::Bench => "bench",
            RunMode::Custom => "custom",
        }
    }
}

impl FromStr for RunMode {
    type Err = QgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mms" | "verify" => Ok(RunMode::Mms),
            "bench" => Ok(RunMode::Bench),
            "custom" => Ok(RunMode::Custom),
            other => Err(QgError::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Wind forcing of the top layer; the bottom layer is never forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    /// `F1 = sin(pi y)`, `F2 = 0`.
    DoubleGyre,
    None,
}

impl ForcingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ForcingKind::DoubleGyre => "double-gyre",
            ForcingKind::None => "none",
        }
    }
}

/// Dirichlet data of the potential vorticities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VorticityBoundary {
    /// `q = y`.
    Y,
    Constant(f64),
}

impl VorticityBoundary {
    pub fn condition(&self) -> BoundaryCondition {
        match self {
            VorticityBoundary::Y => BoundaryCondition::YCoordinate,
            VorticityBoundary::Constant(c) => BoundaryCondition::Constant(*c),
        }
    }
}

impl fmt::Display for VorticityBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VorticityBoundary::Y => f.write_str("y"),
            VorticityBoundary::Constant(c) => write!(f, "{c:e}"),
        }
    }
}

/// Fully validated configuration of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    /// Canned case name (`case1`, `case2`, or a verification case).
    pub case: Option<String>,
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub filter: FilterConfig,
    pub forcing: ForcingKind,
    pub q_bc: VorticityBoundary,
    pub dt: f64,
    pub t_end: f64,
    pub window: (f64, f64),
    pub output: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub enstrophy_stride: f64,
    pub checkpoint_interval: Option<f64>,
    pub solver: SolverSettings,
    pub solver_log: bool,
    pub workers: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(QgError::config("dt", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(QgError::config("t_end", "must be positive"));
        }
        if !(self.window.0 <= self.window.1) {
            return Err(QgError::config("window_start", "must not exceed window_end"));
        }
        if !(self.enstrophy_stride.is_finite() && self.enstrophy_stride > 0.0) {
            return Err(QgError::config("enstrophy_stride", "must be positive"));
        }
        if let Some(c) = self.checkpoint_interval {
            if !(c.is_finite() && c > 0.0) {
                return Err(QgError::config("checkpoint_interval", "must be positive"));
            }
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(QgError::config("tol", "must lie in (0,1)"));
        }
        if self.workers == 0 {
            return Err(QgError::config("workers", "must be at least 1"));
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(QgError::config("snapshot_times", "must be non-negative"));
        }
        self.filter
            .validate()
            .map_err(|e| QgError::config("filter.alpha", e.to_string()))
    }

    /// Configuration with output and solver defaults and the averaging window
    /// spanning the whole run.
    pub fn with_defaults(grid: GridSpec, params: PhysicalParams, dt: f64, t_end: f64) -> Self {
        Self {
            mode: RunMode::Custom,
            case: None,
            grid,
            params,
            filter: FilterConfig::none(),
            forcing: ForcingKind::DoubleGyre,
            q_bc: VorticityBoundary::Y,
            dt,
            t_end,
            window: (0.0, t_end),
            output: PathBuf::from("output"),
            snapshot_times: Vec::new(),
            enstrophy_stride: 0.1,
            checkpoint_interval: None,
            solver: SolverSettings::default(),
            solver_log: false,
            workers: 1,
        }
    }

    /// Integrator configuration for the wind-driven problem (the
    /// verification cases build their own through [`crate::mms::setup`]).
    pub fn step_config(&self) -> Result<StepConfig> {
        let f1: fn(f64, f64) -> f64 = match self.forcing {
            ForcingKind::DoubleGyre => |_, y| (std::f64::consts::PI * y).sin(),
            ForcingKind::None => |_, _| 0.0,
        };
        let bc = self.q_bc.condition();
        let mut cfg = StepConfig::new(
            &self.grid,
            self.dt,
            self.params,
            self.filter,
            f1,
            |_, _| 0.0,
            [bc.clone(), bc],
        )?;
        cfg.solver = self.solver;
        Ok(cfg)
    }

    pub fn plan(&self) -> RunPlan {
        RunPlan {
            t_end: self.t_end,
            snapshot_times: self.snapshot_times.clone(),
            checkpoint_interval: self.checkpoint_interval,
            log_solves: self.solver_log,
        }
    }

    /// Canonical INI text; parsing it yields an equal configuration.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let (x0, xf, y0, yf) = self.grid.bounds();
        let p = &self.params;
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        if let Some(c) = &self.case {
            let _ = writeln!(s, "case = {c}");
        }
        let _ = writeln!(s, "mesh = {}x{}", self.grid.nx(), self.grid.ny());
        let _ = writeln!(s, "dt = {:e}", self.dt);
        let _ = writeln!(s, "t_end = {:e}", self.t_end);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "forcing = {}", self.forcing.as_str());
        let _ = writeln!(s, "q_boundary = {}", self.q_bc);
        let _ = writeln!(s, "\n[domain]");
        let _ = writeln!(s, "x0 = {x0:e}\nxf = {xf:e}\ny0 = {y0:e}\nyf = {yf:e}");
        let _ = writeln!(s, "\n[physics]");
        let _ = writeln!(
            s,
            "ro = {:e}\nre = {:e}\nfr = {:e}\nsigma = {:e}\ndelta = {:e}\nlength = {:e}",
            p.ro(),
            p.re(),
            p.fr(),
            p.sigma(),
            p.delta(),
            p.length()
        );
        let _ = writeln!(s, "\n[filter]");
        let _ = writeln!(s, "mode = {}", self.filter.mode);
        let _ = writeln!(s, "alpha = {:e}", self.filter.alpha);
        let _ = writeln!(s, "indicator_floor = {:e}", self.filter.indicator_floor);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "window_start = {:e}", self.window.0);
        let _ = writeln!(s, "window_end = {:e}", self.window.1);
        let _ = writeln!(s, "enstrophy_stride = {:e}", self.enstrophy_stride);
        let times: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:e}")).collect();
        let _ = writeln!(s, "snapshot_times = {}", times.join(", "));
        match self.checkpoint_interval {
            Some(c) => {
                let _ = writeln!(s, "checkpoint_interval = {c:e}");
            }
            None => {
                let _ = writeln!(s, "checkpoint_interval = none");
            }
        }
        let _ = writeln!(s, "solver_log = {}", self.solver_log);
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "tol = {:e}", self.solver.tol);
        match self.solver.max_iter {
            Some(m) => {
                let _ = writeln!(s, "max_iter = {m}");
            }
            None => {
                let _ = writeln!(s, "max_iter = auto");
            }
        }
        s
    }
}

const SECTIONS: [(&str, &[&str]); 6] = [
    (
        "run",
        &[
            "mode", "case", "mesh", "dt", "t_end", "output", "workers", "forcing", "q_boundary",
            "filter", "alpha",
        ],
    ),
    ("domain", &["x0", "xf", "y0", "yf"]),
    ("physics", &["ro", "re", "fr", "sigma", "delta", "length"]),
    ("filter", &["mode", "alpha", "indicator_floor"]),
    (
        "output",
        &[
            "window_start",
            "window_end",
            "enstrophy_stride",
            "snapshot_times",
            "checkpoint_interval",
            "solver_log",
        ],
    ),
    ("solver", &["tol", "max_iter"]),
];

/// Flat `section.key -> value` view of a parsed file.
struct Entries {
    values: Vec<(String, String)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_f64(key, v))
            .transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| QgError::config(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(QgError::config(key, "must be finite"));
    }
    Ok(x)
}

/// Parses `NXxNY` (or a single `N` for a square mesh).
pub fn parse_mesh(v: &str) -> Result<(usize, usize)> {
    let bad = || QgError::config("mesh", format!("`{v}` is not of the form NXxNY"));
    let v = v.trim().to_ascii_lowercase();
    let (a, b) = match v.split_once('x') {
        Some((a, b)) => (a, b),
        None => (v.as_str(), v.as_str()),
    };
    let nx = a.trim().parse::<usize>().map_err(|_| bad())?;
    let ny = b.trim().parse::<usize>().map_err(|_| bad())?;
    if nx == 0 || ny == 0 {
        return Err(bad());
    }
    Ok((nx, ny))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(QgError::config(key, format!("`{v}` is not a boolean"))),
    }
}

/// Line-level syntax the INI reader is lenient about (or reports at the
/// wrong line): unclosed headers and lines that are neither keys nor
/// comments.
fn check_syntax(text: &str) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let msg = if line.starts_with('[') {
            if line.ends_with(']') {
                continue;
            }
            "unclosed section header"
        } else if line.contains('=') {
            continue;
        } else {
            "expected `key = value`"
        };
        return Err(QgError::Parse {
            line: n + 1,
            msg: msg.into(),
        });
    }
    Ok(())
}

fn read_entries(text: &str, overrides: &[(&str, String)]) -> Result<Entries> {
    check_syntax(text)?;
    let ini = Ini::load_from_str_noescape(text).map_err(|e| QgError::Parse {
        line: e.line,
        msg: e.msg.to_string(),
    })?;
    let mut values: Vec<(String, String)> = Vec::new();
    for (section, props) in &ini {
        let section = section.unwrap_or("run");
        let known = SECTIONS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| QgError::config(format!("[{section}]"), "unknown section"))?
            .1;
        for (key, value) in props.iter() {
            if !known.contains(&key) {
                return Err(QgError::config(
                    format!("{section}.{key}"),
                    "unknown key",
                ));
            }
            // `filter` and `alpha` in [run] are shorthands for the [filter] keys.
            let full = match (section, key) {
                ("run", "filter") => "filter.mode".to_string(),
                ("run", "alpha") => "filter.alpha".to_string(),
                _ => format!("{section}.{key}"),
            };
            if values.iter().any(|(k, _)| *k == full) {
                return Err(QgError::config(full, "given more than once"));
            }
            values.push((full, value.to_string()));
        }
    }
    for (key, value) in overrides {
        let (section, name) = key
            .split_once('.')
            .ok_or_else(|| QgError::config(*key, "override keys are `section.key`"))?;
        let known = SECTIONS.iter().find(|(s, _)| *s == section).map(|s| s.1);
        if !known.is_some_and(|k| k.contains(&name)) {
            return Err(QgError::config(*key, "unknown key"));
        }
        match values.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.clone(),
            None => values.push((key.to_string(), value.clone())),
        }
    }
    Ok(Entries { values })
}

/// Parses and validates a configuration; omitted values come from the
/// named case or from built-in defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// [`parse_config`] with `section.key = value` overrides applied on top of
/// the file (command-line flags). Overrides replace rather than duplicate.
pub fn parse_config_with(text: &str, overrides: &[(&str, String)]) -> Result<RunConfig> {
    let e = read_entries(text, overrides)?;
    let case = e.get("run.case").map(|s| s.trim().to_string());
    let bench_case = case.as_deref().and_then(|c| c.parse::<CaseName>().ok());
    let mode = match e.get("run.mode") {
        Some(m) => m.parse()?,
        None => match (&case, bench_case) {
            (_, Some(_)) => RunMode::Bench,
            (Some(c), None) if mms::case(c).is_ok() => RunMode::Mms,
            (Some(c), None) => {
                return Err(QgError::config("run.case", format!("unknown case `{c}`")))
            }
            (None, None) => RunMode::Custom,
        },
    };

    let mesh = e.get("run.mesh").map(parse_mesh).transpose()?;
    let filter_mode = e
        .get("filter.mode")
        .map(|m| m.parse::<FilterMode>().map_err(|err| QgError::config("filter.mode", err.to_string())))
        .transpose()?
        .unwrap_or(FilterMode::None);
    let alpha = e.num("filter.alpha")?;

    // Case defaults.
    let (defaults, grid_default) = match mode {
        RunMode::Bench => {
            let name = bench_case
                .ok_or_else(|| QgError::config("run.case", "bench mode needs case = case1 or case2"))?;
            let (nx, ny) = mesh.unwrap_or((32, 64));
            let run = bench::make_case(name, (nx, ny), filter_mode, alpha)?;
            (Some(run.clone()), Some(run.grid))
        }
        RunMode::Mms => {
            let c = case
                .as_deref()
                .ok_or_else(|| QgError::config("run.case", "mms mode needs a verification case"))?;
            let m = mms::case(c).map_err(|err| QgError::config("run.case", err.to_string()))?;
            let n = mesh.map(|m| m.0).unwrap_or(32);
            let mc = m.config();
            let grid = GridSpec::new(n, n, -0.5, 0.5, -0.5, 0.5)?;
            let run = RunConfig::with_defaults(grid, mc.params()?, mc.dt_for(n), mc.t_end);
            (Some(run), Some(grid))
        }
        RunMode::Custom => (None, None),
    };

    let x0 = e.num("domain.x0")?;
    let xf = e.num("domain.xf")?;
    let y0 = e.num("domain.y0")?;
    let yf = e.num("domain.yf")?;
    let grid = match (grid_default, mesh) {
        (Some(g), _) if x0.is_none() && xf.is_none() && y0.is_none() && yf.is_none() => g,
        (g, m) => {
            let (dx0, dxf, dy0, dyf) = g.map(|g| g.bounds()).unwrap_or((0.0, 1.0, -1.0, 1.0));
            let (nx, ny) = m
                .or(g.map(|g| (g.nx(), g.ny())))
                .ok_or_else(|| QgError::config("run.mesh", "required in custom mode"))?;
            GridSpec::new(
                nx,
                ny,
                x0.unwrap_or(dx0),
                xf.unwrap_or(dxf),
                y0.unwrap_or(dy0),
                yf.unwrap_or(dyf),
            )
            .map_err(|err| QgError::config("run.mesh", err.to_string()))?
        }
    };

    let dp = defaults.as_ref().map(|d| d.params);
    let pick = |key: &str, default: Option<f64>| -> Result<f64> {
        match e.num(key)? {
            Some(v) => Ok(v),
            None => default.ok_or_else(|| QgError::config(key, "required in custom mode")),
        }
    };
    let ro = pick("physics.ro", dp.map(|p| p.ro()))?;
    let re = pick("physics.re", dp.map(|p| p.re()))?;
    let fr = pick("physics.fr", dp.map(|p| p.fr()))?;
    let sigma = pick("physics.sigma", dp.map(|p| p.sigma()))?;
    let delta = pick("physics.delta", dp.map(|p| p.delta()))?;
    let length = pick("physics.length", Some(dp.map(|p| p.length()).unwrap_or(grid.bounds().3 - grid.bounds().2)))?;
    let params = PhysicalParams::new(ro, re, fr, sigma, delta, length).map_err(|err| {
        let msg = match err {
            QgError::InvalidParameter(m) => m,
            other => other.to_string(),
        };
        let key = msg.split_whitespace().next().unwrap_or("physics").to_string();
        QgError::config(format!("physics.{key}"), msg)
    })?;

    let alpha = match (alpha, filter_mode, &defaults) {
        (Some(a), _, _) => a,
        (None, FilterMode::None, _) => 0.0,
        (None, _, Some(_)) if mode == RunMode::Bench => {
            bench::default_alpha(bench_case.expect("bench mode has a case"), grid.h())
        }
        (None, _, Some(d)) => d.filter.alpha,
        (None, _, None) => {
            return Err(QgError::config(
                "filter.alpha",
                "required when filtering outside the canned cases",
            ))
        }
    };
    let filter = FilterConfig {
        mode: filter_mode,
        alpha,
        indicator_floor: e.num("filter.indicator_floor")?.unwrap_or(DEFAULT_INDICATOR_FLOOR),
    };

    let d = defaults.as_ref();
    let dt = pick("run.dt", d.map(|d| d.dt))?;
    let t_end = pick("run.t_end", d.map(|d| d.t_end))?;
    let window = (
        e.num("output.window_start")?
            .unwrap_or(d.map(|d| d.window.0).unwrap_or(0.0)),
        e.num("output.window_end")?
            .unwrap_or(d.map(|d| d.window.1).unwrap_or(t_end)),
    );
    let forcing = match e.get("run.forcing").map(str::trim) {
        None | Some("double-gyre") => ForcingKind::DoubleGyre,
        Some("none") => ForcingKind::None,
        Some(other) => return Err(QgError::config("run.forcing", format!("unknown forcing `{other}`"))),
    };
    let q_bc = match e.get("run.q_boundary").map(str::trim) {
        None | Some("y") => VorticityBoundary::Y,
        Some(v) => VorticityBoundary::Constant(parse_f64("run.q_boundary", v)?),
    };
    let snapshot_times = match e.get("output.snapshot_times").map(str::trim) {
        None | Some("") => Vec::new(),
        Some(v) => v
            .split(',')
            .map(|t| parse_f64("output.snapshot_times", t))
            .collect::<Result<_>>()?,
    };
    let checkpoint_interval = match e.get("output.checkpoint_interval").map(str::trim) {
        None | Some("none") => None,
        Some(v) => Some(parse_f64("output.checkpoint_interval", v)?),
    };
    let max_iter = match e.get("solver.max_iter").map(str::trim) {
        None | Some("auto") => None,
        Some(v) => Some(
            v.parse::<usize>()
                .map_err(|_| QgError::config("solver.max_iter", format!("`{v}` is not a count")))?,
        ),
    };
    let workers = match e.get("run.workers") {
        None => 1,
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| QgError::config("run.workers", format!("`{v}` is not a count")))?,
    };

    let cfg = RunConfig {
        mode,
        case,
        grid,
        params,
        filter,
        forcing,
        q_bc,
        dt,
        t_end,
        window,
        output: PathBuf::from(e.get("run.output").map(str::trim).unwrap_or("output")),
        snapshot_times,
        enstrophy_stride: e.num("output.enstrophy_stride")?.unwrap_or(0.1),
        checkpoint_interval,
        solver: SolverSettings {
            tol: e.num("solver.tol")?.unwrap_or(DEFAULT_TOLERANCE),
            max_iter,
        },
        solver_log: e
            .get("output.solver_log")
            .map(|v| parse_bool("output.solver_log", v))
            .transpose()?
            .unwrap_or(false),
        workers,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_case1() {
        let cfg = parse_config("case = case1\nmesh = 32x64\nfilter = nonlinear\n").unwrap();
        assert_eq!(cfg.mode, RunMode::Bench);
        assert_eq!(cfg.filter.mode, FilterMode::Nonlinear);
        assert!((cfg.filter.alpha - 2f64.sqrt() / 32.0).abs() < 1e-15);
        assert_eq!(cfg.dt, 2.5e-5);
        assert_eq!(cfg.t_end, 100.0);
        assert_eq!(cfg.window, (20.0, 100.0));
        assert_eq!(cfg.params.sigma(), 0.005);
        assert_eq!(cfg.grid.bounds(), (0.0, 1.0, -1.0, 1.0));
    }

    #[test]
    fn case2_linear_alpha() {
        let cfg = parse_config("case = case2\nmesh = 64x128\nfilter = linear\n").unwrap();
        assert_eq!(cfg.filter.alpha, 1.0 / 64.0);
        assert_eq!(cfg.params.delta(), 0.1);
    }

    #[test]
    fn bad_delta_names_key() {
        let err = parse_config("case = case1\n[physics]\ndelta = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("delta must lie in (0,1)"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("case = case1\nalpa = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("alpa"), "{err}");
        let err = parse_config("[filtre]\nmode = none\n").unwrap_err();
        assert!(err.to_string().contains("filtre"), "{err}");
    }

    #[test]
    fn parse_error_has_line() {
        let err = parse_config("case = case1\n[physics\n").unwrap_err();
        assert!(matches!(err, QgError::Parse { line: 2, .. }), "{err:?}");
        let err = parse_config("# comment\ncase = case1\nmesh\n").unwrap_err();
        assert!(matches!(err, QgError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(parse_config("case = case1\nfilter = none\n[filter]\nmode = linear\n").is_err());
    }

    #[test]
    fn custom_requires_physics_and_alpha() {
        let base = "mesh = 8x16\ndt = 1e-3\nt_end = 1\n";
        assert!(parse_config(base).is_err());
        let full = format!("{base}[physics]\nro = 0.001\nre = 450\nfr = 0.1\nsigma = 0.005\ndelta = 0.5\n");
        let cfg = parse_config(&full).unwrap();
        assert_eq!(cfg.mode, RunMode::Custom);
        assert_eq!(cfg.params.length(), 2.0);
        let err = parse_config(&format!("{full}[filter]\nmode = linear\n")).unwrap_err();
        assert!(err.to_string().contains("filter.alpha"));
    }

    #[test]
    fn echo_round_trips() {
        let texts = [
            "case = case1\nmesh = 32x64\nfilter = nonlinear\n",
            "case = case2\nmesh = 16x32\nfilter = linear\nalpha = 0.05\n[output]\nsnapshot_times = 1, 2.5\ncheckpoint_interval = 10\nsolver_log = true\n[solver]\nmax_iter = 500\n",
            "case = ro1-re10\nmesh = 64\n",
            "mesh = 8x8\ndt = 0.01\nt_end = 0.1\nforcing = none\nq_boundary = 0\n[domain]\ny0 = 0\n[physics]\nro = 1\nre = 10\nfr = 0.1\nsigma = 0\ndelta = 0.2\n",
        ];
        for t in texts {
            let cfg = parse_config(t).unwrap();
            let again = parse_config(&cfg.to_ini()).unwrap();
            assert_eq!(again, cfg, "{}", cfg.to_ini());
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let text = "case = case1\nmesh = 32x64\nfilter = linear\n";
        let cfg = parse_config_with(text, &[("run.mesh", "16x32".into()), ("filter.mode", "nonlinear".into())]).unwrap();
        assert_eq!(cfg.grid.nx(), 16);
        assert_eq!(cfg.filter.mode, FilterMode::Nonlinear);
        assert!((cfg.filter.alpha - 2f64.sqrt() / 16.0).abs() < 1e-15);
        assert!(parse_config_with(text, &[("run.mesch", "8x16".into())]).is_err());
    }

    #[test]
    fn mesh_syntax() {
        assert_eq!(parse_mesh("32x64").unwrap(), (32, 64));
        assert_eq!(parse_mesh("16").unwrap(), (16, 16));
        assert!(parse_mesh("0x4").is_err());
        assert!(parse_mesh("axb").is_err());
    }
}
