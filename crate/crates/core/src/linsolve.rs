//! Pentadiagonal systems from the structured grid and their Krylov solvers.
//!
//! Symmetric systems go through Jacobi-preconditioned conjugate gradients,
//! everything else through Jacobi-preconditioned BiCGStab. Inner products are
//! plain sequential sums, so results are reproducible bit for bit.

use std::io::Write;

use crate::error::{QgError, Result};
use crate::fvops::{stencil_matvec, Stencil};
use crate::grid::{GridSpec, ScalarField};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// `A x = rhs` with `A` a 5-point operator on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    grid: GridSpec,
    pub diag: Vec<f64>,
    pub east: Vec<f64>,
    pub west: Vec<f64>,
    pub north: Vec<f64>,
    pub south: Vec<f64>,
    pub rhs: Vec<f64>,
    pub symmetric: bool,
}

impl LinearSystem {
    /// Builds `A x = rhs - source` from the affine operator `x -> A x + source`.
    pub fn from_stencil(op: Stencil, rhs: &ScalarField, symmetric: bool) -> Result<Self> {
        if !op.grid().same_as(rhs.grid()) {
            return Err(QgError::GridMismatch);
        }
        let grid = *op.grid();
        let Stencil {
            center,
            east,
            west,
            north,
            south,
            source,
            ..
        } = op;
        let rhs = rhs.values().iter().zip(&source).map(|(b, s)| b - s).collect();
        let system = Self {
            grid,
            diag: center,
            east,
            west,
            north,
            south,
            rhs,
            symmetric,
        };
        system.validate()?;
        Ok(system)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        for v in [&self.diag, &self.east, &self.west, &self.north, &self.south, &self.rhs] {
            if v.len() != n {
                return Err(QgError::InvalidParameter(format!(
                    "system arrays must hold {n} entries"
                )));
            }
        }
        if let Some(k) = self.diag.iter().position(|d| *d == 0.0 || !d.is_finite()) {
            return Err(QgError::InvalidParameter(format!(
                "diagonal entry of row {k} is zero or non-finite"
            )));
        }
        if self.symmetric {
            let nx = self.grid.nx();
            let ny = self.grid.ny();
            for j in 0..ny {
                for i in 0..nx {
                    let k = self.grid.index(i, j);
                    if i + 1 < nx && self.east[k] != self.west[k + 1] {
                        return Err(QgError::InvalidParameter(format!(
                            "system tagged symmetric but east({i},{j}) != west({},{j})",
                            i + 1
                        )));
                    }
                    if j + 1 < ny && self.north[k] != self.south[k + nx] {
                        return Err(QgError::InvalidParameter(format!(
                            "system tagged symmetric but north({i},{j}) != south({i},{})",
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        stencil_matvec(
            &self.grid,
            [&self.diag, &self.east, &self.west, &self.north, &self.south],
            x,
            y,
        );
    }

    /// `b - A x`.
    pub fn residual_of(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; x.len()];
        residual(self, x, &mut r);
        r
    }

    /// `||b - A x|| / ||b||` (or `||A x||` when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.matvec(x, &mut ax);
        let r: f64 = self
            .rhs
            .iter()
            .zip(&ax)
            .map(|(b, a)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        let nb = norm(&self.rhs);
        if nb > 0.0 {
            r / nb
        } else {
            r
        }
    }

    /// Explicit dense matrix, row-major, for testing against direct solves.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        const MAX_DENSE: usize = 4096;
        let n = self.grid.len();
        if n > MAX_DENSE {
            return Err(QgError::InvalidParameter(format!(
                "dense export limited to {MAX_DENSE} unknowns, system has {n}"
            )));
        }
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        let mut m = vec![vec![0.0; n]; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = self.grid.index(i, j);
                m[k][k] = self.diag[k];
                if i + 1 < nx {
                    m[k][k + 1] = self.east[k];
                }
                if i > 0 {
                    m[k][k - 1] = self.west[k];
                }
                if j + 1 < ny {
                    m[k][k + nx] = self.north[k];
                }
                if j > 0 {
                    m[k][k - nx] = self.south[k];
                }
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
}

/// Tolerance and iteration cap for every inner solve of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    /// `None` means `10 * nx * ny`.
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iter: None,
        }
    }
}

impl SolverSettings {
    pub fn max_iter_for(&self, grid: &GridSpec) -> usize {
        self.max_iter.unwrap_or(10 * grid.len())
    }

    /// Solves and turns non-convergence into an error naming `step`.
    pub fn solve_named(
        &self,
        step: &str,
        system: &LinearSystem,
        guess: &ScalarField,
    ) -> Result<(ScalarField, SolveReport)> {
        let (x, report) = solve(system, guess, self.tol, self.max_iter_for(system.grid()))?;
        if !report.converged {
            return Err(QgError::NotConverged {
                step: step.to_string(),
                iterations: report.iterations,
                residual: report.final_relative_residual,
            });
        }
        x.check_finite(step)?;
        Ok((x, report))
    }

    /// Solves for the correction to `base`, so the tolerance applies to the
    /// change `x - base` rather than to `x` itself.
    ///
    /// Used for time-integrated unknowns, where a tolerance relative to the
    /// full right-hand side would let tiny per-step updates stall.
    pub fn solve_increment(
        &self,
        step: &str,
        system: &LinearSystem,
        base: &ScalarField,
    ) -> Result<(ScalarField, SolveReport)> {
        let mut inc = system.clone();
        inc.rhs = system.residual_of(base.values());
        let (dx, report) = self.solve_named(step, &inc, &ScalarField::zeros(system.grid))?;
        let x = base.axpby(1.0, &dx, 1.0)?;
        Ok((x, report))
    }
}

/// `y = A x`, returning `x . y`.
fn matvec_dot(system: &LinearSystem, x: &[f64], y: &mut [f64]) -> f64 {
    system.matvec(x, y);
    dot(x, y)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `system` to relative residual `tol` starting from `initial_guess`.
///
/// Non-convergence is reported through `SolveReport::converged`; a vanishing
/// inner product that stops the iteration is an error.
pub fn solve(
    system: &LinearSystem,
    initial_guess: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, SolveReport)> {
    if !(tol > 0.0) {
        return Err(QgError::InvalidParameter("solver tolerance must be positive".into()));
    }
    if !initial_guess.grid().same_as(&system.grid) {
        return Err(QgError::GridMismatch);
    }
    let mut x = initial_guess.values().to_vec();
    let report = if system.symmetric {
        pcg(system, &mut x, tol, max_iter)?
    } else {
        bicgstab(system, &mut x, tol, max_iter)?
    };
    Ok((ScalarField::from_raw(system.grid, x), report))
}

fn residual(system: &LinearSystem, x: &[f64], r: &mut [f64]) {
    system.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(&system.rhs) {
        *ri = bi - *ri;
    }
}

fn pcg(system: &LinearSystem, x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    let n = x.len();
    let bnorm = norm(&system.rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport {
            iterations: 0,
            final_relative_residual: 0.0,
            converged: true,
        });
    }
    let target = tol * bnorm;
    let inv_diag: Vec<f64> = system.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    residual(system, x, &mut r);
    let mut rnorm = norm(&r);
    // Outer loop re-seeds from the true residual whenever the recurrence
    // claims convergence, so the reported residual is never a drifted value.
    while rnorm > target && iterations < max_iter {
        for (zi, (ri, di)) in z.iter_mut().zip(r.iter().zip(&inv_diag)) {
            *zi = ri * di;
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let target2 = target * target;
        while iterations < max_iter {
            let pq = matvec_dot(system, &p, &mut q);
            if pq == 0.0 || !pq.is_finite() {
                return Err(QgError::Breakdown {
                    method: "CG",
                    iteration: iterations,
                    reason: "p^T A p vanished",
                });
            }
            let alpha = rz / pq;
            let mut rr = 0.0;
            let mut rz_new = 0.0;
            for k in 0..n {
                x[k] += alpha * p[k];
                let rk = r[k] - alpha * q[k];
                r[k] = rk;
                rr += rk * rk;
                rz_new += rk * rk * inv_diag[k];
            }
            iterations += 1;
            if rr <= target2 {
                break;
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = r[k] * inv_diag[k] + beta * p[k];
            }
        }
        residual(system, x, &mut r);
        rnorm = norm(&r);
    }
    Ok(SolveReport {
        iterations,
        final_relative_residual: rnorm / bnorm,
        converged: rnorm <= target,
    })
}

fn bicgstab(system: &LinearSystem, x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    let n = x.len();
    let bnorm = norm(&system.rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport {
            iterations: 0,
            final_relative_residual: 0.0,
            converged: true,
        });
    }
    let target = tol * bnorm;
    let inv_diag: Vec<f64> = system.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    let mut r_hat = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iterations = 0;

    residual(system, x, &mut r);
    let mut rnorm = norm(&r);
    while rnorm > target && iterations < max_iter {
        r_hat.copy_from_slice(&r);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        let (mut rho, mut alpha, mut omega) = (1.0_f64, 1.0_f64, 1.0_f64);
        while iterations < max_iter {
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || !rho_new.is_finite() {
                return Err(QgError::Breakdown {
                    method: "BiCGStab",
                    iteration: iterations,
                    reason: "shadow residual became orthogonal to the residual",
                });
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
                p_hat[k] = p[k] * inv_diag[k];
            }
            system.matvec(&p_hat, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                return Err(QgError::Breakdown {
                    method: "BiCGStab",
                    iteration: iterations,
                    reason: "r_hat^T v vanished",
                });
            }
            alpha = rho / rv;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            iterations += 1;
            if norm(&s) <= target {
                for k in 0..n {
                    x[k] += alpha * p_hat[k];
                }
                r.copy_from_slice(&s);
                break;
            }
            for k in 0..n {
                s_hat[k] = s[k] * inv_diag[k];
            }
            system.matvec(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 || !tt.is_finite() {
                return Err(QgError::Breakdown {
                    method: "BiCGStab",
                    iteration: iterations,
                    reason: "t^T t vanished",
                });
            }
            omega = dot(&t, &s) / tt;
            for k in 0..n {
                x[k] += alpha * p_hat[k] + omega * s_hat[k];
                r[k] = s[k] - omega * t[k];
            }
            if norm(&r) <= target {
                break;
            }
            if omega == 0.0 {
                return Err(QgError::Breakdown {
                    method: "BiCGStab",
                    iteration: iterations,
                    reason: "stabilization parameter vanished",
                });
            }
        }
        residual(system, x, &mut r);
        rnorm = norm(&r);
    }
    Ok(SolveReport {
        iterations,
        final_relative_residual: rnorm / bnorm,
        converged: rnorm <= target,
    })
}

/// One row per inner solve, written as `step,iterations,residual`.
#[derive(Debug, Default, Clone)]
pub struct SolverLog {
    rows: Vec<(String, usize, f64)>,
}

impl SolverLog {
    pub fn record(&mut self, step: &str, report: &SolveReport) {
        self.rows
            .push((step.to_string(), report.iterations, report.final_relative_residual));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,iterations,residual")?;
        for (step, it, res) in &self.rows {
            writeln!(out, "{step},{it},{res:.16e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fvops::laplacian_stencil;
    use crate::grid::BoundaryCondition;

    #[test]
    fn identity_system_solves_in_one_iteration() {
        let g = GridSpec::unit_square(4).unwrap();
        let b = ScalarField::from_fn(g, |x, y| x + 2.0 * y);
        for symmetric in [true, false] {
            let sys = LinearSystem::from_stencil(Stencil::identity(g, 1.0), &b, symmetric).unwrap();
            let (x, rep) = solve(&sys, &ScalarField::zeros(g), 1e-12, 10).unwrap();
            assert!(rep.converged);
            assert!(rep.iterations <= 1);
            assert!(x.max_abs_diff(&b).unwrap() < 1e-15);
        }
    }

    #[test]
    fn dense_export_of_small_poisson() {
        let g = GridSpec::unit_square(2).unwrap();
        // Interior-only 2x2 grid: every cell touches two walls.
        let op = laplacian_stencil(&g, &BoundaryCondition::Zero, -1.0);
        let sys = LinearSystem::from_stencil(op, &ScalarField::zeros(g), true).unwrap();
        let m = sys.to_dense().unwrap();
        let inv_h2 = 4.0;
        for (k, row) in m.iter().enumerate() {
            assert_eq!(row[k], 6.0 * inv_h2);
            assert_eq!(row.iter().filter(|v| **v == -inv_h2).count(), 2);
        }
        for (a, row) in m.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                assert_eq!(*v, m[b][a]);
            }
        }
    }

    #[test]
    fn dense_export_size_guard() {
        let g = GridSpec::unit_square(65).unwrap();
        let sys = LinearSystem::from_stencil(Stencil::identity(g, 1.0), &ScalarField::zeros(g), true)
            .unwrap();
        assert!(sys.to_dense().is_err());
    }

    #[test]
    fn rejects_mislabelled_symmetry_and_zero_diagonal() {
        let g = GridSpec::unit_square(3).unwrap();
        let mut op = laplacian_stencil(&g, &BoundaryCondition::Zero, 1.0);
        op.east[0] += 1.0;
        assert!(LinearSystem::from_stencil(op.clone(), &ScalarField::zeros(g), true).is_err());
        assert!(LinearSystem::from_stencil(op, &ScalarField::zeros(g), false).is_ok());
        let zero = Stencil::zeros(g);
        assert!(LinearSystem::from_stencil(zero, &ScalarField::zeros(g), false).is_err());
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let g = GridSpec::unit_square(4).unwrap();
        let op = laplacian_stencil(&g, &BoundaryCondition::Zero, -1.0);
        let sys = LinearSystem::from_stencil(op, &ScalarField::zeros(g), true).unwrap();
        let (x, rep) = solve(&sys, &ScalarField::constant(g, 1.0), 1e-8, 100).unwrap();
        assert!(rep.converged);
        assert_eq!(x.max_abs(), 0.0);
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = GridSpec::unit_square(32).unwrap();
        let op = laplacian_stencil(&g, &BoundaryCondition::Zero, -1.0);
        let b = ScalarField::constant(g, 1.0);
        let sys = LinearSystem::from_stencil(op, &b, true).unwrap();
        let (_, rep) = solve(&sys, &ScalarField::zeros(g), 1e-12, 3).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
        let settings = SolverSettings {
            tol: 1e-12,
            max_iter: Some(3),
        };
        let err = settings
            .solve_named("step 3", &sys, &ScalarField::zeros(g))
            .unwrap_err();
        assert!(err.to_string().starts_with("step 3"));
    }

    #[test]
    fn solver_log_csv() {
        let mut log = SolverLog::default();
        log.record(
            "step1",
            &SolveReport {
                iterations: 3,
                final_relative_residual: 1e-9,
                converged: true,
            },
        );
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("step1,3,"));
    }
}
