//! Segregated BDF1 time integration of the filtered two-layer system.
//!
//! One step performs six solves in a fixed order: vorticity, filter and
//! stream function of the top layer, then the same for the bottom layer.
//! The bottom-layer vorticity solve sees the freshly computed top-layer
//! stream function.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{QgError, Result};
use crate::filter::{filtered_step, FilterConfig};
use crate::fvops::{
    convection_stencil, face_fluxes, integral_of_square, laplacian_stencil, Stencil,
};
use crate::grid::{y_field, BoundaryCondition, GridSpec, ScalarField};
use crate::linsolve::{LinearSystem, SolverLog, SolverSettings};
use crate::physics::PhysicalParams;

/// Prognostic and diagnostic fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub q1: ScalarField,
    pub q2: ScalarField,
    pub qbar1: ScalarField,
    pub qbar2: ScalarField,
    pub psi1: ScalarField,
    pub psi2: ScalarField,
    pub t: f64,
    /// Completed steps; `t = step * dt`.
    pub step: u64,
}

pub const FIELD_NAMES: [&str; 6] = ["q1", "q2", "qbar1", "qbar2", "psi1", "psi2"];

impl SimState {
    /// Rest state: `q = qbar = y`, `psi = 0`, `t = 0`.
    pub fn rest(grid: &GridSpec) -> Self {
        let y = y_field(grid);
        let zero = ScalarField::zeros(*grid);
        Self {
            q1: y.clone(),
            q2: y.clone(),
            qbar1: y.clone(),
            qbar2: y,
            psi1: zero.clone(),
            psi2: zero,
            t: 0.0,
            step: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.q1.grid()
    }

    pub fn fields(&self) -> [&ScalarField; 6] {
        [&self.q1, &self.q2, &self.qbar1, &self.qbar2, &self.psi1, &self.psi2]
    }

    pub fn validate(&self) -> Result<()> {
        for (f, name) in self.fields().into_iter().zip(FIELD_NAMES) {
            self.q1.ensure_same_grid(f)?;
            f.check_finite(name)?;
        }
        Ok(())
    }

    /// Largest max-norm difference over the six fields.
    pub fn max_abs_diff(&self, other: &SimState) -> Result<f64> {
        let mut m: f64 = 0.0;
        for (a, b) in self.fields().into_iter().zip(other.fields()) {
            m = m.max(a.max_abs_diff(b)?);
        }
        Ok(m)
    }

    pub fn save_fields(&self, dir: &Path, prefix: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| QgError::file(dir, e))?;
        for (f, name) in self.fields().into_iter().zip(FIELD_NAMES) {
            f.save(&dir.join(format!("{prefix}{name}.fld")), self.t)?;
        }
        Ok(())
    }

    fn load_fields(dir: &Path, step: u64, t: f64) -> Result<Self> {
        let load = |name: &str| ScalarField::load(&dir.join(format!("{name}.fld"))).map(|p| p.0);
        let state = Self {
            q1: load("q1")?,
            q2: load("q2")?,
            qbar1: load("qbar1")?,
            qbar2: load("qbar2")?,
            psi1: load("psi1")?,
            psi2: load("psi2")?,
            t,
            step,
        };
        state.validate()?;
        Ok(state)
    }
}

/// Which top-layer stream function enters the coupling term of the
/// bottom-layer vorticity solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Step4Coupling {
    /// `psi1` at the new time level (the published ordering).
    #[default]
    Fresh,
    /// `psi1` at the old time level; only for ordering-sensitivity checks.
    Lagged,
}

#[derive(Debug, Clone)]
pub struct StepConfig {
    pub dt: f64,
    pub params: PhysicalParams,
    pub filter: FilterConfig,
    /// Cell-center samples of `F1`, `F2`.
    pub forcing: [ScalarField; 2],
    pub q_bc: [BoundaryCondition; 2],
    pub qbar_bc: [BoundaryCondition; 2],
    pub solver: SolverSettings,
    pub coupling: Step4Coupling,
}

impl StepConfig {
    pub fn new(
        grid: &GridSpec,
        dt: f64,
        params: PhysicalParams,
        filter: FilterConfig,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
        q_bc: [BoundaryCondition; 2],
    ) -> Result<Self> {
        let cfg = Self {
            dt,
            params,
            filter,
            forcing: [ScalarField::from_fn(*grid, f1), ScalarField::from_fn(*grid, f2)],
            qbar_bc: q_bc.clone(),
            q_bc,
            solver: SolverSettings::default(),
            coupling: Step4Coupling::Fresh,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(QgError::InvalidParameter("dt must be positive".into()));
        }
        self.filter.validate()?;
        self.forcing[0].ensure_same_grid(&self.forcing[1])?;
        self.forcing[0].check_finite("F1")?;
        self.forcing[1].check_finite("F2")
    }
}

/// Precomputed operators for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Integrator {
    config: StepConfig,
    grid: GridSpec,
    y: ScalarField,
    /// Laplacian with homogeneous data, applied to stream functions.
    lap0: Stencil,
    /// `I/dt - Laplacian/Re` with the vorticity boundary data.
    q_base: [Stencil; 2],
    /// `-Ro Laplacian + c_i I`, the negated kinematic operators.
    psi_ops: [LinearSystem; 2],
}

impl Integrator {
    pub fn new(config: StepConfig) -> Result<Self> {
        config.validate()?;
        let grid = *config.forcing[0].grid();
        let p = &config.params;
        let lap0 = laplacian_stencil(&grid, &BoundaryCondition::Zero, 1.0);
        let q_base = [0, 1].map(|l| {
            let mut op = laplacian_stencil(&grid, &config.q_bc[l], -1.0 / p.re());
            op.add_diagonal(1.0 / config.dt);
            op
        });
        let c = p.coupling();
        let zero = ScalarField::zeros(grid);
        let psi_op = |cl: f64| -> Result<LinearSystem> {
            let mut op = lap0.clone().scale(-p.ro());
            op.add_diagonal(cl);
            LinearSystem::from_stencil(op, &zero, true)
        };
        let psi_ops = [psi_op(c.top)?, psi_op(c.bottom)?];
        Ok(Self {
            y: y_field(&grid),
            config,
            grid,
            lap0,
            q_base,
            psi_ops,
        })
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn vorticity_operator(&self, layer: usize, psi: &ScalarField) -> Stencil {
        let flux = face_fluxes(psi, &BoundaryCondition::Zero);
        let mut op = self.q_base[layer].clone();
        op.add_scaled(&convection_stencil(&flux, &self.config.q_bc[layer]), 1.0);
        op
    }

    /// Right-hand side of a kinematic solve, already negated:
    /// `-(qbar - y - c * psi_other)`.
    fn kinematic_rhs(&self, qbar: &ScalarField, psi_other: &ScalarField, c: f64) -> ScalarField {
        let v = qbar
            .values()
            .iter()
            .zip(self.y.values())
            .zip(psi_other.values())
            .map(|((q, y), p)| -(q - y - c * p))
            .collect();
        ScalarField::from_raw(self.grid, v)
    }

    fn solve_kinematic(
        &self,
        layer: usize,
        qbar: &ScalarField,
        psi_other: &ScalarField,
        guess: &ScalarField,
        name: &str,
        log: &mut Option<&mut SolverLog>,
    ) -> Result<ScalarField> {
        let c = self.config.params.coupling();
        let cl = if layer == 0 { c.top } else { c.bottom };
        let mut system = self.psi_ops[layer].clone();
        system.rhs = self.kinematic_rhs(qbar, psi_other, cl).into_values();
        let (psi, rep) = self.config.solver.solve_named(name, &system, guess)?;
        if let Some(l) = log.as_deref_mut() {
            l.record(name, &rep);
        }
        Ok(psi)
    }

    pub fn step(&self, state: &SimState) -> Result<SimState> {
        self.step_logged(state, None)
    }

    /// Advances one `dt`, recording every inner solve in `log`.
    pub fn step_logged(&self, state: &SimState, mut log: Option<&mut SolverLog>) -> Result<SimState> {
        let cfg = &self.config;
        let p = &cfg.params;
        let dt = cfg.dt;
        let inv_dt = 1.0 / dt;
        let w1 = p.fr() / (p.re() * p.delta());
        let w2 = p.fr() / (p.re() * (1.0 - p.delta()));
        let record = |name: &str, rep: Option<crate::linsolve::SolveReport>, log: &mut Option<&mut SolverLog>| {
            if let (Some(l), Some(r)) = (log.as_deref_mut(), rep) {
                l.record(name, &r);
            }
        };

        // Step 1: top-layer vorticity.
        let dpsi = state.psi2.axpby(1.0, &state.psi1, -1.0)?;
        let coupling = self.lap0.apply(&dpsi);
        let rhs: Vec<f64> = (0..self.grid.len())
            .map(|k| {
                cfg.forcing[0].values()[k] + state.q1.values()[k] * inv_dt
                    - w1 * coupling.values()[k]
            })
            .collect();
        let system = LinearSystem::from_stencil(
            self.vorticity_operator(0, &state.psi1),
            &ScalarField::from_raw(self.grid, rhs),
            false,
        )?;
        let (q1, rep) = cfg.solver.solve_increment("step 1 (q1)", &system, &state.q1)?;
        record("step1", Some(rep), &mut log);

        // Step 2: top-layer filter.
        let (qbar1, rep) = filtered_step(
            &q1,
            &cfg.q_bc[0],
            &cfg.qbar_bc[0],
            &cfg.filter,
            &cfg.solver,
            Some(&state.qbar1),
        )?;
        record("step2", rep, &mut log);

        // Step 3: top-layer stream function.
        let psi1 = self.solve_kinematic(0, &qbar1, &state.psi2, &state.psi1, "step3", &mut log)?;

        // Step 4: bottom-layer vorticity.
        let psi1_c = match cfg.coupling {
            Step4Coupling::Fresh => &psi1,
            Step4Coupling::Lagged => &state.psi1,
        };
        let dpsi = psi1_c.axpby(1.0, &state.psi2, -1.0)?;
        let coupling = self.lap0.apply(&dpsi);
        let friction = self.lap0.apply(&state.psi2);
        let rhs: Vec<f64> = (0..self.grid.len())
            .map(|k| {
                cfg.forcing[1].values()[k] + state.q2.values()[k] * inv_dt
                    - p.sigma() * friction.values()[k]
                    - w2 * coupling.values()[k]
            })
            .collect();
        let system = LinearSystem::from_stencil(
            self.vorticity_operator(1, &state.psi2),
            &ScalarField::from_raw(self.grid, rhs),
            false,
        )?;
        let (q2, rep) = cfg.solver.solve_increment("step 4 (q2)", &system, &state.q2)?;
        record("step4", Some(rep), &mut log);

        // Step 5: bottom-layer filter.
        let (qbar2, rep) = filtered_step(
            &q2,
            &cfg.q_bc[1],
            &cfg.qbar_bc[1],
            &cfg.filter,
            &cfg.solver,
            Some(&state.qbar2),
        )?;
        record("step5", rep, &mut log);

        // Step 6: bottom-layer stream function.
        let psi2 = self.solve_kinematic(1, &qbar2, &psi1, &state.psi2, "step6", &mut log)?;

        let step = state.step + 1;
        let next = SimState {
            q1,
            q2,
            qbar1,
            qbar2,
            psi1,
            psi2,
            t: step as f64 * dt,
            step,
        };
        next.validate()?;
        Ok(next)
    }

    /// Stream functions consistent with `qbar1`, `qbar2` through both
    /// kinematic relations, by alternating the two stream-function solves.
    pub fn invert_kinematics(
        &self,
        qbar1: &ScalarField,
        qbar2: &ScalarField,
    ) -> Result<(ScalarField, ScalarField)> {
        const MAX_SWEEPS: usize = 10_000;
        let tol = self.config.solver.tol;
        let mut psi1 = ScalarField::zeros(self.grid);
        let mut psi2 = ScalarField::zeros(self.grid);
        let mut none = None;
        for _ in 0..MAX_SWEEPS {
            let n1 = self.solve_kinematic(0, qbar1, &psi2, &psi1, "inversion psi1", &mut none)?;
            let n2 = self.solve_kinematic(1, qbar2, &n1, &psi2, "inversion psi2", &mut none)?;
            let change = n1.max_abs_diff(&psi1)?.max(n2.max_abs_diff(&psi2)?);
            let scale = n1.max_abs().max(n2.max_abs()).max(f64::MIN_POSITIVE);
            psi1 = n1;
            psi2 = n2;
            if change <= tol * scale {
                return Ok((psi1, psi2));
            }
        }
        Err(QgError::NotConverged {
            step: "kinematic inversion".into(),
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        })
    }

    /// Potential vorticities that satisfy both kinematic relations exactly
    /// for the given stream functions.
    pub fn kinematic_q(&self, psi1: &ScalarField, psi2: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        let p = &self.config.params;
        let c = p.coupling();
        let lap1 = self.lap0.apply(psi1);
        let lap2 = self.lap0.apply(psi2);
        let q1 = lap1
            .axpby(p.ro(), &self.y, 1.0)?
            .axpby(1.0, &psi2.axpby(c.top, psi1, -c.top)?, 1.0)?;
        let q2 = lap2
            .axpby(p.ro(), &self.y, 1.0)?
            .axpby(1.0, &psi1.axpby(c.bottom, psi2, -c.bottom)?, 1.0)?;
        Ok((q1, q2))
    }

    /// Forcings for which `(q, psi)` is a steady state of the discrete
    /// vorticity equations.
    pub fn steady_forcing(
        &self,
        q1: &ScalarField,
        q2: &ScalarField,
        psi1: &ScalarField,
        psi2: &ScalarField,
    ) -> Result<[ScalarField; 2]> {
        let p = &self.config.params;
        let inv_dt = 1.0 / self.config.dt;
        let w1 = p.fr() / (p.re() * p.delta());
        let w2 = p.fr() / (p.re() * (1.0 - p.delta()));
        let transport = |layer: usize, q: &ScalarField, psi: &ScalarField| {
            let mut op = self.vorticity_operator(layer, psi);
            op.add_diagonal(-inv_dt);
            op.apply(q)
        };
        let c1 = self.lap0.apply(&psi2.axpby(1.0, psi1, -1.0)?);
        let f1 = transport(0, q1, psi1).axpby(1.0, &c1, w1)?;
        let c2 = self.lap0.apply(&psi1.axpby(1.0, psi2, -1.0)?);
        let fr = self.lap0.apply(psi2);
        let f2 = transport(1, q2, psi2)
            .axpby(1.0, &c2, w2)?
            .axpby(1.0, &fr, p.sigma())?;
        Ok([f1, f2])
    }

    /// Runs to `t_end` under `plan`, feeding `observer` along the way.
    pub fn run(
        &self,
        mut state: SimState,
        plan: &RunPlan,
        acc: &mut Accumulators,
        observer: &mut dyn RunObserver,
    ) -> Result<SimState> {
        let dt = self.config.dt;
        let target = plan.steps_to(state.step, dt)?;
        if state.step == 0 && acc.series.is_empty() {
            acc.sample_enstrophy(&state, observer)?;
        }
        let snapshot_steps: Vec<u64> = plan
            .snapshot_times
            .iter()
            .map(|t| (t / dt).round() as u64)
            .collect();
        let checkpoint_steps = plan.checkpoint_interval.map(|c| ((c / dt).round() as u64).max(1));
        let mut log = plan.log_solves.then(SolverLog::default);
        while state.step < target {
            let next = match self.step_logged(&state, log.as_mut()) {
                Ok(s) => s,
                Err(e) => {
                    observer.flush()?;
                    return Err(e);
                }
            };
            state = next;
            acc.accumulate(&state, dt, observer)?;
            if snapshot_steps.contains(&state.step) {
                observer.snapshot(&state)?;
            }
            if let Some(c) = checkpoint_steps {
                if state.step.is_multiple_of(c) {
                    observer.checkpoint(&state, acc)?;
                }
            }
        }
        if let Some(l) = &log {
            observer.solver_log(l)?;
        }
        observer.flush()?;
        Ok(state)
    }
}

/// Time-horizon and output schedule of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub checkpoint_interval: Option<f64>,
    pub log_solves: bool,
}

impl RunPlan {
    pub fn to(t_end: f64) -> Self {
        Self {
            t_end,
            snapshot_times: Vec::new(),
            checkpoint_interval: None,
            log_solves: false,
        }
    }

    /// Final step index; rejects horizons at or before the current one.
    pub fn steps_to(&self, current: u64, dt: f64) -> Result<u64> {
        let target = (self.t_end / dt).round();
        if !(target.is_finite() && target >= 0.0) || target as u64 <= current {
            return Err(QgError::InvalidParameter(format!(
                "t_end = {} does not lie after the current time {}",
                self.t_end,
                current as f64 * dt
            )));
        }
        Ok(target as u64)
    }
}

/// Receives run output as it is produced. All methods default to no-ops.
pub trait RunObserver {
    fn enstrophy(&mut self, _t: f64, _e1: f64, _e2: f64) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }

    fn checkpoint(&mut self, _state: &SimState, _acc: &Accumulators) -> Result<()> {
        Ok(())
    }

    fn solver_log(&mut self, _log: &SolverLog) -> Result<()> {
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Observer that discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// `(E1, E2)` of the unfiltered potential vorticities.
pub fn enstrophy(state: &SimState) -> (f64, f64) {
    (integral_of_square(&state.q1), integral_of_square(&state.q2))
}

/// Running sums for time averages and the sampled enstrophy series.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulators {
    pub window: (f64, f64),
    /// Steps between enstrophy samples.
    pub stride_steps: u64,
    grid: GridSpec,
    sums: [Vec<f64>; 4],
    count: u64,
    pub series: Vec<(f64, f64, f64)>,
}

/// Names of the averaged fields, in storage order.
pub const AVERAGE_NAMES: [&str; 4] = ["q1", "q2", "psi1", "psi2"];

impl Accumulators {
    pub fn new(grid: &GridSpec, window: (f64, f64), stride: f64, dt: f64) -> Result<Self> {
        if !(window.0 <= window.1) {
            return Err(QgError::InvalidParameter(
                "averaging window start must not exceed its end".into(),
            ));
        }
        if !(stride.is_finite() && stride > 0.0) {
            return Err(QgError::InvalidParameter("enstrophy stride must be positive".into()));
        }
        let n = grid.len();
        Ok(Self {
            window,
            stride_steps: ((stride / dt).round() as u64).max(1),
            grid: *grid,
            sums: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            count: 0,
            series: Vec::new(),
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn in_window(&self, t: f64, dt: f64) -> bool {
        let eps = 1e-6 * dt;
        t >= self.window.0 - eps && t <= self.window.1 + eps
    }

    fn sample_enstrophy(&mut self, state: &SimState, observer: &mut dyn RunObserver) -> Result<()> {
        let (e1, e2) = enstrophy(state);
        if !(e1.is_finite() && e2.is_finite()) {
            return Err(QgError::NonFinite {
                what: "enstrophy".into(),
                i: 0,
                j: 0,
            });
        }
        self.series.push((state.t, e1, e2));
        observer.enstrophy(state.t, e1, e2)
    }

    /// Adds a post-step state to the sums and samples enstrophy on stride.
    pub fn accumulate(&mut self, state: &SimState, dt: f64, observer: &mut dyn RunObserver) -> Result<()> {
        if self.in_window(state.t, dt) {
            let fields = [&state.q1, &state.q2, &state.psi1, &state.psi2];
            for (sum, f) in self.sums.iter_mut().zip(fields) {
                for (s, v) in sum.iter_mut().zip(f.values()) {
                    *s += v;
                }
            }
            self.count += 1;
        }
        if state.step.is_multiple_of(self.stride_steps) {
            self.sample_enstrophy(state, observer)?;
        }
        Ok(())
    }

    /// Time-averaged `(q1, q2, psi1, psi2)`.
    pub fn averages(&self) -> Result<[ScalarField; 4]> {
        if self.count == 0 {
            return Err(QgError::EmptyWindow {
                start: self.window.0,
                end: self.window.1,
            });
        }
        let inv = 1.0 / self.count as f64;
        Ok(self
            .sums
            .clone()
            .map(|s| ScalarField::from_raw(self.grid, s.into_iter().map(|v| v * inv).collect())))
    }

    pub fn write_series_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,E1,E2")?;
        for (t, e1, e2) in &self.series {
            writeln!(out, "{}", format_series_row(*t, *e1, *e2))?;
        }
        Ok(())
    }
}

pub fn format_series_row(t: f64, e1: f64, e2: f64) -> String {
    format!("{t:.16e},{e1:.16e},{e2:.16e}")
}

/// Reads a `t,E1,E2` CSV.
pub fn read_series_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let file = fs::File::open(path).map_err(|e| QgError::file(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if n == 0 {
            if line.replace(' ', "") != "t,E1,E2" {
                return Err(QgError::Parse {
                    line: 1,
                    msg: format!("expected header `t,E1,E2`, found `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| QgError::Parse {
                line: n + 1,
                msg: e.to_string(),
            })?;
        if vals.len() != 3 {
            return Err(QgError::Parse {
                line: n + 1,
                msg: format!("expected 3 columns, found {}", vals.len()),
            });
        }
        out.push((vals[0], vals[1], vals[2]));
    }
    Ok(out)
}

const CHECKPOINT_META: &str = "checkpoint.txt";

/// Writes state and accumulators so that a resumed run continues bit-exactly.
pub fn save_checkpoint(dir: &Path, state: &SimState, acc: &Accumulators, dt: f64) -> Result<()> {
    state.save_fields(dir, "")?;
    for (sum, name) in acc.sums.iter().zip(AVERAGE_NAMES) {
        ScalarField::from_raw(acc.grid, sum.clone()).save(&dir.join(format!("sum_{name}.fld")), state.t)?;
    }
    let series = dir.join("series.csv");
    let f = fs::File::create(&series).map_err(|e| QgError::file(&series, e))?;
    let mut w = BufWriter::new(f);
    acc.write_series_csv(&mut w)?;
    w.flush()?;
    let meta = dir.join(CHECKPOINT_META);
    let text = format!(
        "step = {}\ndt = {:.16e}\ncount = {}\nwindow_start = {:.16e}\nwindow_end = {:.16e}\nstride_steps = {}\n",
        state.step, dt, acc.count, acc.window.0, acc.window.1, acc.stride_steps
    );
    fs::write(&meta, text).map_err(|e| QgError::file(&meta, e))
}

/// Inverse of [`save_checkpoint`]; returns the state, accumulators and `dt`.
pub fn load_checkpoint(dir: &Path) -> Result<(SimState, Accumulators, f64)> {
    let meta = dir.join(CHECKPOINT_META);
    let text = fs::read_to_string(&meta).map_err(|e| QgError::file(&meta, e))?;
    let mut kv = std::collections::HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| QgError::Parse {
            line: n + 1,
            msg: "expected `key = value`".into(),
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| QgError::config(k, "missing from checkpoint metadata"))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse::<f64>()
            .map_err(|e| QgError::config(k, e.to_string()))
    };
    let int = |k: &str| -> Result<u64> {
        get(k)?
            .parse::<u64>()
            .map_err(|e| QgError::config(k, e.to_string()))
    };
    let step = int("step")?;
    let dt = num("dt")?;
    let state = SimState::load_fields(dir, step, step as f64 * dt)?;
    let grid = *state.grid();
    let mut sums: [Vec<f64>; 4] = Default::default();
    for (s, name) in sums.iter_mut().zip(AVERAGE_NAMES) {
        let (f, _) = ScalarField::load(&dir.join(format!("sum_{name}.fld")))?;
        if !f.grid().same_as(&grid) {
            return Err(QgError::GridMismatch);
        }
        *s = f.into_values();
    }
    let acc = Accumulators {
        window: (num("window_start")?, num("window_end")?),
        stride_steps: int("stride_steps")?,
        grid,
        sums,
        count: int("count")?,
        series: read_series_csv(&dir.join("series.csv"))?,
    };
    Ok((state, acc, dt))
}
