//! Wind-driven double-gyre cases, enstrophy statistics and the published
//! reference values they are compared against.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::{RunConfig, RunMode};
use crate::error::{QgError, Result};
use crate::filter::{FilterConfig, FilterMode};
use crate::grid::GridSpec;
use crate::physics::PhysicalParams;

pub const BENCH_DT: f64 = 2.5e-5;
pub const BENCH_T_END: f64 = 100.0;
pub const BENCH_WINDOW: (f64, f64) = (20.0, 100.0);
/// Meshes the canned cases are run on; the last is the fine reference mesh.
pub const SUPPORTED_MESHES: [(usize, usize); 5] = [(8, 16), (16, 32), (32, 64), (64, 128), (256, 512)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseName {
    /// `sigma = 0.005`, `delta = 0.5`.
    Case1,
    /// `sigma = 0.01`, `delta = 0.1`.
    Case2,
}

impl CaseName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseName::Case1 => "case1",
            CaseName::Case2 => "case2",
        }
    }

    pub fn params(&self) -> PhysicalParams {
        let (sigma, delta) = match self {
            CaseName::Case1 => (0.005, 0.5),
            CaseName::Case2 => (0.01, 0.1),
        };
        PhysicalParams::new(0.001, 450.0, 0.1, sigma, delta, 2.0).expect("case parameters are valid")
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = QgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "case1" => Ok(CaseName::Case1),
            "case2" => Ok(CaseName::Case2),
            other => Err(QgError::InvalidParameter(format!(
                "unknown benchmark case `{other}` (expected case1 or case2)"
            ))),
        }
    }
}

/// Default filtering radius: `sqrt(2) h` for case 1, `h` for case 2.
pub fn default_alpha(case: CaseName, h: f64) -> f64 {
    match case {
        CaseName::Case1 => std::f64::consts::SQRT_2 * h,
        CaseName::Case2 => h,
    }
}

/// Complete configuration of a canned case on `[0,1] x [-1,1]`.
///
/// `alpha` overrides the case default; it is ignored (stored as 0) when
/// `mode` is [`FilterMode::None`].
pub fn make_case(
    case: CaseName,
    mesh: (usize, usize),
    mode: FilterMode,
    alpha: Option<f64>,
) -> Result<RunConfig> {
    if !SUPPORTED_MESHES.contains(&mesh) {
        return Err(QgError::InvalidParameter(format!(
            "mesh {}x{} is not one of the benchmark meshes",
            mesh.0, mesh.1
        )));
    }
    let grid = GridSpec::new(mesh.0, mesh.1, 0.0, 1.0, -1.0, 1.0)?;
    let alpha = match mode {
        FilterMode::None => 0.0,
        _ => alpha.unwrap_or_else(|| default_alpha(case, grid.h())),
    };
    let mut cfg = RunConfig::with_defaults(grid, case.params(), BENCH_DT, BENCH_T_END);
    cfg.mode = RunMode::Bench;
    cfg.case = Some(case.as_str().to_string());
    cfg.filter = FilterConfig::new(mode, alpha)?;
    cfg.window = BENCH_WINDOW;
    cfg.output = PathBuf::from(format!("output/{}-{}x{}-{}", case, mesh.0, mesh.1, mode));
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnstrophyStats {
    pub avg: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

fn in_window(t: f64, window: (f64, f64)) -> bool {
    let eps = 1e-9 * window.1.abs().max(1.0);
    t >= window.0 - eps && t <= window.1 + eps
}

/// Average, minimum and maximum of `E1` and `E2` over the in-window
/// samples of a `(t, E1, E2)` series.
pub fn enstrophy_stats(series: &[(f64, f64, f64)], window: (f64, f64)) -> Result<[EnstrophyStats; 2]> {
    let picked: Vec<_> = series.iter().filter(|s| in_window(s.0, window)).collect();
    if picked.is_empty() {
        return Err(QgError::EmptyWindow {
            start: window.0,
            end: window.1,
        });
    }
    let stats = |get: fn(&(f64, f64, f64)) -> f64| {
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for s in &picked {
            let v = get(s);
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        EnstrophyStats {
            avg: sum / picked.len() as f64,
            min,
            max,
            samples: picked.len(),
        }
    };
    Ok([stats(|s| s.1), stats(|s| s.2)])
}

/// `sqrt(sum (E - E_ref)^2 dt_sample)` per layer over the in-window
/// samples, treating the series as step functions.
///
/// Both series must carry the same sample times inside the window.
pub fn series_l2_error(
    series: &[(f64, f64, f64)],
    reference: &[(f64, f64, f64)],
    window: (f64, f64),
) -> Result<[f64; 2]> {
    let a: Vec<_> = series.iter().filter(|s| in_window(s.0, window)).collect();
    let b: Vec<_> = reference.iter().filter(|s| in_window(s.0, window)).collect();
    if a.is_empty() || b.is_empty() {
        return Err(QgError::EmptyWindow {
            start: window.0,
            end: window.1,
        });
    }
    if a.len() != b.len() {
        return Err(QgError::InvalidParameter(format!(
            "series have {} and {} samples in the window",
            a.len(),
            b.len()
        )));
    }
    let mut acc = [0.0; 2];
    for (k, (sa, sb)) in a.iter().zip(&b).enumerate() {
        if (sa.0 - sb.0).abs() > 1e-9 * sa.0.abs().max(1.0) {
            return Err(QgError::InvalidParameter(format!(
                "sample times differ: {} vs {}",
                sa.0, sb.0
            )));
        }
        // Each sample stands for the interval up to the next one; the last
        // reuses the previous spacing.
        let dt = if k + 1 < a.len() {
            a[k + 1].0 - sa.0
        } else if k > 0 {
            sa.0 - a[k - 1].0
        } else {
            1.0
        };
        acc[0] += (sa.1 - sb.1).powi(2) * dt;
        acc[1] += (sa.2 - sb.2).powi(2) * dt;
    }
    Ok([acc[0].sqrt(), acc[1].sqrt()])
}

/// One model's row of a published enstrophy table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub model: &'static str,
    pub e1_avg: f64,
    pub e1_max: f64,
    /// Series error against the fine-mesh run; absent for that run itself.
    pub e1_l2: Option<f64>,
    pub e2_avg: f64,
    pub e2_min: f64,
    pub e2_l2: Option<f64>,
}

/// Published enstrophy statistics of one case on one coarse mesh, with the
/// fine-mesh run as the first row. These are numbers copied from the
/// literature, not outputs of this code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTable {
    pub case: CaseName,
    pub coarse_mesh: (usize, usize),
    pub fine_mesh: (usize, usize),
    pub rows: [ReferenceRow; 4],
}

impl ReferenceTable {
    pub fn row(&self, model: &str) -> Option<&ReferenceRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

pub const PUBLISHED_CASE1: ReferenceTable = ReferenceTable {
    case: CaseName::Case1,
    coarse_mesh: (32, 64),
    fine_mesh: (256, 512),
    rows: [
        ReferenceRow { model: "dns", e1_avg: 5.094e-2, e1_max: 5.732e-2, e1_l2: None, e2_avg: 2.640e-2, e2_min: 2.432e-2, e2_l2: None },
        ReferenceRow { model: "none", e1_avg: 4.704e-2, e1_max: 6.736e-2, e1_l2: Some(9.616e-2), e2_avg: 2.703e-2, e2_min: 2.103e-2, e2_l2: Some(1.950e-2) },
        ReferenceRow { model: "linear", e1_avg: 5.011e-2, e1_max: 6.544e-2, e1_l2: Some(4.343e-2), e2_avg: 2.526e-2, e2_min: 1.917e-2, e2_l2: Some(2.999e-2) },
        ReferenceRow { model: "nonlinear", e1_avg: 4.950e-2, e1_max: 6.249e-2, e1_l2: Some(4.930e-2), e2_avg: 2.587e-2, e2_min: 2.045e-2, e2_l2: Some(1.831e-2) },
    ],
};

pub const PUBLISHED_CASE2: ReferenceTable = ReferenceTable {
    case: CaseName::Case2,
    coarse_mesh: (64, 128),
    fine_mesh: (256, 512),
    rows: [
        ReferenceRow { model: "dns", e1_avg: 1.732e-1, e1_max: 2.087e-1, e1_l2: None, e2_avg: 2.826e-2, e2_min: 2.728e-2, e2_l2: None },
        ReferenceRow { model: "none", e1_avg: 1.433e-1, e1_max: 1.646e-1, e1_l2: Some(7.275e-1), e2_avg: 2.912e-2, e2_min: 2.840e-2, e2_l2: Some(2.130e-2) },
        ReferenceRow { model: "linear", e1_avg: 1.718e-1, e1_max: 2.016e-1, e1_l2: Some(3.750e-1), e2_avg: 2.816e-2, e2_min: 2.713e-2, e2_l2: Some(1.180e-2) },
        ReferenceRow { model: "nonlinear", e1_avg: 1.583e-1, e1_max: 1.892e-1, e1_l2: Some(4.610e-1), e2_avg: 2.865e-2, e2_min: 2.762e-2, e2_l2: Some(1.280e-2) },
    ],
};

pub fn published_table(case: CaseName) -> &'static ReferenceTable {
    match case {
        CaseName::Case1 => &PUBLISHED_CASE1,
        CaseName::Case2 => &PUBLISHED_CASE2,
    }
}

/// Plain-text `key = value` summary of a finished run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| QgError::Parse {
                line: n + 1,
                msg: "expected key = value".into(),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| QgError::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| QgError::file(path, e))?;
        Self::parse(&text)
    }
}
