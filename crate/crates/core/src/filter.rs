//! Differential low-pass filter `-alpha^2 div(a grad qbar) + qbar = q`.

use std::fmt;
use std::str::FromStr;

use crate::error::{QgError, Result};
use crate::fvops::{gradient_magnitude, laplacian_stencil, variable_diffusion_stencil, Stencil};
use crate::grid::{BoundaryCondition, ScalarField};
use crate::linsolve::{LinearSystem, SolveReport, SolverSettings};

pub const DEFAULT_INDICATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMode {
    /// No filtering: `qbar = q`.
    None,
    /// Constant indicator `a = 1`.
    Linear,
    /// Indicator `a = |grad q| / max |grad q|`.
    Nonlinear,
}

impl FilterMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterMode::None => "none",
            FilterMode::Linear => "linear",
            FilterMode::Nonlinear => "nonlinear",
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterMode {
    type Err = QgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "off" => Ok(FilterMode::None),
            "linear" | "alpha" => Ok(FilterMode::Linear),
            "nonlinear" | "nl-alpha" => Ok(FilterMode::Nonlinear),
            other => Err(QgError::InvalidParameter(format!(
                "unknown filter mode `{other}` (expected none, linear or nonlinear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub mode: FilterMode,
    /// Filtering radius.
    pub alpha: f64,
    /// Below this value of `max |grad q|` the indicator is identically zero.
    pub indicator_floor: f64,
}

impl FilterConfig {
    pub fn new(mode: FilterMode, alpha: f64) -> Result<Self> {
        let cfg = Self {
            mode,
            alpha,
            indicator_floor: DEFAULT_INDICATOR_FLOOR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn none() -> Self {
        Self {
            mode: FilterMode::None,
            alpha: 0.0,
            indicator_floor: DEFAULT_INDICATOR_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(QgError::InvalidParameter("alpha must be non-negative".into()));
        }
        if !(self.indicator_floor.is_finite() && self.indicator_floor >= 0.0) {
            return Err(QgError::InvalidParameter(
                "indicator_floor must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// True when the filter step reduces to `qbar = q`.
    pub fn is_identity(&self) -> bool {
        self.mode == FilterMode::None || self.alpha == 0.0
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self::none()
    }
}

/// Indicator field `a(q)` in `[0, 1]`.
///
/// Linear (and `None`) mode gives `a = 1`. In nonlinear mode a field whose
/// gradient never exceeds the floor gets `a = 0`.
pub fn indicator(q: &ScalarField, bc: &BoundaryCondition, config: &FilterConfig) -> ScalarField {
    match config.mode {
        FilterMode::None | FilterMode::Linear => ScalarField::constant(*q.grid(), 1.0),
        FilterMode::Nonlinear => {
            let mut g = gradient_magnitude(q, bc);
            let max = g.max_abs();
            if max <= config.indicator_floor {
                return ScalarField::zeros(*q.grid());
            }
            let inv = 1.0 / max;
            for v in g.values_mut() {
                *v = (*v * inv).min(1.0);
            }
            g
        }
    }
}

/// Operator `-alpha^2 div(a grad .) + I`, or `-alpha^2 Laplacian + I` when
/// `a` is `None`.
pub fn filter_operator(
    grid: &crate::grid::GridSpec,
    a: Option<&ScalarField>,
    alpha: f64,
    bc: &BoundaryCondition,
) -> Stencil {
    let coeff = -alpha * alpha;
    let mut op = match a {
        Some(a) => variable_diffusion_stencil(a, bc, coeff),
        None => laplacian_stencil(grid, bc, coeff),
    };
    op.add_diagonal(1.0);
    op
}

/// Solves the filter equation for `qbar` with indicator `a` (`None` = 1).
///
/// `guess` seeds the iteration; `q` itself is used when absent.
pub fn apply_filter(
    q: &ScalarField,
    a: Option<&ScalarField>,
    alpha: f64,
    bc: &BoundaryCondition,
    solver: &SolverSettings,
    guess: Option<&ScalarField>,
) -> Result<(ScalarField, Option<SolveReport>)> {
    if alpha == 0.0 {
        return Ok((q.clone(), None));
    }
    if let Some(a) = a {
        q.ensure_same_grid(a)?;
    }
    let op = filter_operator(q.grid(), a, alpha, bc);
    let system = LinearSystem::from_stencil(op, q, true)?;
    let (qbar, report) = solver.solve_named("filter", &system, guess.unwrap_or(q))?;
    Ok((qbar, Some(report)))
}

/// Indicator evaluation followed by the filter solve; identity when the
/// configuration says so.
pub fn filtered_step(
    q_new: &ScalarField,
    q_bc: &BoundaryCondition,
    qbar_bc: &BoundaryCondition,
    config: &FilterConfig,
    solver: &SolverSettings,
    guess: Option<&ScalarField>,
) -> Result<(ScalarField, Option<SolveReport>)> {
    if config.is_identity() {
        return Ok((q_new.clone(), None));
    }
    match config.mode {
        FilterMode::None => Ok((q_new.clone(), None)),
        FilterMode::Linear => apply_filter(q_new, None, config.alpha, qbar_bc, solver, guess),
        FilterMode::Nonlinear => {
            let a = indicator(q_new, q_bc, config);
            apply_filter(q_new, Some(&a), config.alpha, qbar_bc, solver, guess)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_relative_error, GridSpec};
    use std::f64::consts::PI;

    fn tight() -> SolverSettings {
        SolverSettings {
            tol: 1e-12,
            max_iter: None,
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("none".parse::<FilterMode>().unwrap(), FilterMode::None);
        assert_eq!("Linear".parse::<FilterMode>().unwrap(), FilterMode::Linear);
        assert_eq!("nonlinear".parse::<FilterMode>().unwrap(), FilterMode::Nonlinear);
        assert!("nl".parse::<FilterMode>().is_err());
        assert!(FilterConfig::new(FilterMode::Linear, -1.0).is_err());
    }

    #[test]
    fn indicator_of_linear_field_is_one() {
        let g = GridSpec::unit_square(16).unwrap();
        let q = ScalarField::from_fn(g, |x, _| x);
        let bc = BoundaryCondition::function(|x, _| x);
        let cfg = FilterConfig::new(FilterMode::Nonlinear, 0.1).unwrap();
        let a = indicator(&q, &bc, &cfg);
        assert!(a.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn indicator_of_constant_is_zero() {
        let g = GridSpec::unit_square(8).unwrap();
        let q = ScalarField::constant(g, 5.0);
        let cfg = FilterConfig::new(FilterMode::Nonlinear, 0.1).unwrap();
        let a = indicator(&q, &BoundaryCondition::Constant(5.0), &cfg);
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn linear_indicator_is_one() {
        let g = GridSpec::unit_square(8).unwrap();
        let q = ScalarField::from_fn(g, |x, y| (x * y).sin());
        let cfg = FilterConfig::new(FilterMode::Linear, 0.1).unwrap();
        let a = indicator(&q, &BoundaryCondition::Zero, &cfg);
        assert!(a.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn zero_alpha_is_identity() {
        let g = GridSpec::unit_square(8).unwrap();
        let q = ScalarField::from_fn(g, |x, y| x * x - y);
        let (qbar, rep) =
            apply_filter(&q, None, 0.0, &BoundaryCondition::Zero, &tight(), None).unwrap();
        assert!(rep.is_none());
        assert_eq!(qbar, q);
    }

    #[test]
    fn constants_pass_through() {
        let g = GridSpec::unit_square(16).unwrap();
        let q = ScalarField::constant(g, 3.0);
        let (qbar, _) =
            apply_filter(&q, None, 0.2, &BoundaryCondition::Constant(3.0), &tight(), None).unwrap();
        assert!(qbar.max_abs_diff(&q).unwrap() < 1e-10);
    }

    #[test]
    fn eigenfunction_is_damped() {
        let g = GridSpec::unit_square(64).unwrap();
        let alpha = 0.1;
        let q = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        let (qbar, _) =
            apply_filter(&q, None, alpha, &BoundaryCondition::Zero, &tight(), None).unwrap();
        let expected = q.scaled(1.0 / (1.0 + 2.0 * PI * PI * alpha * alpha));
        assert!(l2_relative_error(&qbar, &expected).unwrap() < 1e-2);
        assert!(qbar.l2_norm() < q.l2_norm());
    }

    #[test]
    fn vanishing_radius_recovers_input() {
        let g = GridSpec::unit_square(32).unwrap();
        let q = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (2.0 * PI * y).cos());
        let bc = BoundaryCondition::function(|x, y| (PI * x).sin() * (2.0 * PI * y).cos());
        let mut last = f64::INFINITY;
        for alpha in [1e-2, 1e-4, 1e-6] {
            let (qbar, _) = apply_filter(&q, None, alpha, &bc, &tight(), None).unwrap();
            let d = qbar.axpby(1.0, &q, -1.0).unwrap().l2_norm();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn floor_disables_nonlinear_filter() {
        let g = GridSpec::unit_square(8).unwrap();
        let q = ScalarField::from_fn(g, |x, _| 1e-14 * x);
        let cfg = FilterConfig::new(FilterMode::Nonlinear, 0.1).unwrap();
        let bc = BoundaryCondition::function(|x, _| 1e-14 * x);
        let (qbar, _) = filtered_step(&q, &bc, &bc, &cfg, &tight(), None).unwrap();
        assert!(qbar.max_abs_diff(&q).unwrap() < 1e-20);
    }

    #[test]
    fn unit_indicator_matches_linear_path() {
        let g = GridSpec::unit_square(16).unwrap();
        let q = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() + y * y);
        let bc = BoundaryCondition::YCoordinate;
        let s = SolverSettings::default();
        let one = ScalarField::constant(g, 1.0);
        let (lin, _) = apply_filter(&q, None, 0.05, &bc, &s, None).unwrap();
        let (nl, _) = apply_filter(&q, Some(&one), 0.05, &bc, &s, None).unwrap();
        assert!(lin.max_abs_diff(&nl).unwrap() <= 10.0 * s.tol * q.max_abs());
    }
}
