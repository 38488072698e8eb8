//! Uniform cell-centered Cartesian grid and the scalar fields that live on it.
//!
//! Storage is interior-only and row-major by y-row: the value of cell `(i, j)`
//! sits at `j * nx + i`, with `j = 0` the southernmost row. There are no ghost
//! cells; Dirichlet data is supplied separately as a [`BoundaryCondition`] and
//! evaluated at boundary-face centers by the discrete operators.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{QgError, Result};

/// Relative tolerance used when checking that cells are square.
const SQUARE_CELL_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    x0: f64,
    xf: f64,
    y0: f64,
    yf: f64,
    hx: f64,
    hy: f64,
}

impl GridSpec {
    /// Builds a grid of `nx * ny` square cells covering `[x0, xf] x [y0, yf]`.
    pub fn new(nx: usize, ny: usize, x0: f64, xf: f64, y0: f64, yf: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(QgError::InvalidGrid(format!(
                "cell counts must be positive, got {nx}x{ny}"
            )));
        }
        if ![x0, xf, y0, yf].iter().all(|v| v.is_finite()) {
            return Err(QgError::InvalidGrid("domain bounds must be finite".into()));
        }
        if xf <= x0 || yf <= y0 {
            return Err(QgError::InvalidGrid(format!(
                "empty domain [{x0}, {xf}] x [{y0}, {yf}]"
            )));
        }
        let hx = (xf - x0) / nx as f64;
        let hy = (yf - y0) / ny as f64;
        if (hx - hy).abs() > SQUARE_CELL_RTOL * hx.max(hy) {
            return Err(QgError::InvalidGrid(format!(
                "cells must be square, got hx = {hx} and hy = {hy}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            x0,
            xf,
            y0,
            yf,
            hx,
            hy,
        })
    }

    /// Unit square `[0, 1]^2` with `n * n` cells.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 0.0, 1.0, 0.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x0, self.xf, self.y0, self.yf)
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Cell width. Cells are square, so this is both `hx` and `hy`.
    pub fn h(&self) -> f64 {
        self.hx
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub(crate) fn x_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.hx
    }

    #[inline]
    pub(crate) fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.hy
    }

    /// Center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        if i >= self.nx || j >= self.ny {
            return Err(QgError::IndexOutOfRange {
                i,
                j,
                nx: self.nx,
                ny: self.ny,
            });
        }
        Ok((self.x_center(i), self.y_center(j)))
    }

    /// Inverse of [`cell_center`](Self::cell_center): the cell containing `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.x0) / self.hx).floor();
        let fj = ((y - self.y0) / self.hy).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} on [{}, {}] x [{}, {}]",
            self.nx, self.ny, self.x0, self.xf, self.y0, self.yf
        )
    }
}

/// Cell-averaged samples of one scalar unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QgError::InvalidGrid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.ny,
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.check_finite("field")?;
        Ok(field)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y_center(j);
            for i in 0..grid.nx {
                values.push(f(grid.x_center(i), y));
            }
        }
        Self { grid, values }
    }

    /// Unchecked constructor for operator outputs; callers validate as needed.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference to `other`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Cell-measure-weighted discrete L2 norm, `(sum f^2 h^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        (s * self.grid.cell_area()).sqrt()
    }

    /// Linear combination `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &ScalarField, b: f64) -> Result<ScalarField> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        Self::from_raw(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(QgError::GridMismatch)
        }
    }

    /// Fails on the first NaN or infinity, naming `what` in the error.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(QgError::NonFinite {
                what: what.to_string(),
                i: k % self.grid.nx,
                j: k / self.grid.nx,
            }),
        }
    }

    /// Writes the plain-text `.fld` representation.
    pub fn write_fld<W: Write>(&self, mut out: W, time: f64) -> Result<()> {
        let g = &self.grid;
        writeln!(
            out,
            "{} {} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            g.nx, g.ny, g.x0, g.xf, g.y0, g.yf, time
        )?;
        let mut line = String::with_capacity(g.nx * 25);
        for row in self.values.chunks(g.nx) {
            line.clear();
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Parses a `.fld` stream, returning the field and its time stamp.
    pub fn read_fld<R: Read>(input: R) -> Result<(ScalarField, f64)> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(QgError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 7 {
            return Err(QgError::Parse {
                line: 1,
                msg: format!("header needs 7 entries, found {}", parts.len()),
            });
        }
        let int = |s: &str| {
            s.parse::<usize>().map_err(|e| QgError::Parse {
                line: 1,
                msg: format!("bad cell count `{s}`: {e}"),
            })
        };
        let real = |s: &str| {
            s.parse::<f64>().map_err(|e| QgError::Parse {
                line: 1,
                msg: format!("bad number `{s}`: {e}"),
            })
        };
        let grid = GridSpec::new(
            int(parts[0])?,
            int(parts[1])?,
            real(parts[2])?,
            real(parts[3])?,
            real(parts[4])?,
            real(parts[5])?,
        )?;
        let time = real(parts[6])?;

        let mut values = Vec::with_capacity(grid.len());
        for row in 0..grid.ny {
            let (lineno, line) = lines.next().ok_or(QgError::Parse {
                line: row + 2,
                msg: format!("expected {} data rows, found {row}", grid.ny),
            })?;
            let line = line?;
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| QgError::Parse {
                    line: lineno + 1,
                    msg: format!("bad value `{tok}`: {e}"),
                })?);
            }
            if values.len() - before != grid.nx {
                return Err(QgError::Parse {
                    line: lineno + 1,
                    msg: format!("expected {} values, found {}", grid.nx, values.len() - before),
                });
            }
        }
        Ok((ScalarField::new(grid, values)?, time))
    }

    pub fn save(&self, path: &Path, time: f64) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| QgError::file(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_fld(&mut out, time)?;
        out.flush().map_err(|e| QgError::file(path, e))
    }

    pub fn load(path: &Path) -> Result<(ScalarField, f64)> {
        let file = std::fs::File::open(path).map_err(|e| QgError::file(path, e))?;
        Self::read_fld(file)
    }
}

/// The planetary-vorticity field: each cell holds the y-coordinate of its center.
pub fn y_field(grid: &GridSpec) -> ScalarField {
    ScalarField::from_fn(*grid, |_, y| y)
}

/// `||a - b|| / ||b||` in the cell-weighted discrete L2 norm.
pub fn l2_relative_error(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.ensure_same_grid(b)?;
    let nb = b.l2_norm();
    if nb == 0.0 {
        return Err(QgError::ZeroNorm);
    }
    let diff: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((diff * a.grid.cell_area()).sqrt() / nb)
}

pub type TraceFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Dirichlet data `g(x, y)`, evaluated at boundary-face centers.
#[derive(Clone)]
pub enum BoundaryCondition {
    /// `g = 0`, used for the stream functions.
    Zero,
    Constant(f64),
    /// `g = y`, the potential-vorticity trace of the wind-driven benchmark.
    YCoordinate,
    Function(Arc<TraceFn>),
}

impl BoundaryCondition {
    pub fn function(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryCondition::Function(Arc::new(f))
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            BoundaryCondition::Zero => 0.0,
            BoundaryCondition::Constant(c) => *c,
            BoundaryCondition::YCoordinate => y,
            BoundaryCondition::Function(f) => f(x, y),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, BoundaryCondition::Zero | BoundaryCondition::Constant(0.0))
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Zero => write!(f, "Zero"),
            BoundaryCondition::Constant(c) => write!(f, "Constant({c})"),
            BoundaryCondition::YCoordinate => write!(f, "YCoordinate"),
            BoundaryCondition::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Dirichlet values at the centers of the four families of boundary faces.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryValues {
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
}

impl BoundaryValues {
    pub fn new(grid: &GridSpec, bc: &BoundaryCondition) -> Self {
        let (x0, xf, y0, yf) = grid.bounds();
        Self {
            west: (0..grid.ny).map(|j| bc.value(x0, grid.y_center(j))).collect(),
            east: (0..grid.ny).map(|j| bc.value(xf, grid.y_center(j))).collect(),
            south: (0..grid.nx).map(|i| bc.value(grid.x_center(i), y0)).collect(),
            north: (0..grid.nx).map(|i| bc.value(grid.x_center(i), yf)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cell_centers() {
        let g = GridSpec::unit_square(2).unwrap();
        assert_eq!(g.cell_center(0, 0).unwrap(), (0.25, 0.25));
        assert_eq!(g.cell_center(1, 1).unwrap(), (0.75, 0.75));
        let g = GridSpec::new(256, 512, 0.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(g.h(), 1.0 / 256.0);
        assert_eq!(g.cell_center(0, 0).unwrap(), (1.0 / 512.0, -1.0 + 1.0 / 512.0));
        assert!(matches!(
            g.cell_center(256, 0),
            Err(QgError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0, 4, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0, 0.0, 0.0).is_err());
        // 256x256 on [0,1]x[-1,1] has rectangular cells.
        let err = GridSpec::new(256, 256, 0.0, 1.0, -1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("square"));
    }

    #[test]
    fn y_field_values() {
        let g = GridSpec::new(1, 2, 0.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(y_field(&g).values(), &[-0.5, 0.5]);
        let g = GridSpec::new(2, 2, -0.5, 0.5, -0.5, 0.5).unwrap();
        assert_eq!(y_field(&g).values(), &[-0.25, -0.25, 0.25, 0.25]);
        let g = GridSpec::new(16, 32, 0.0, 1.0, -1.0, 1.0).unwrap();
        let total: f64 = y_field(&g).values().iter().sum::<f64>() * g.cell_area();
        assert!(total.abs() < 1e-14);
    }

    #[test]
    fn y_field_matches_cell_centers() {
        let g = GridSpec::new(8, 16, 0.0, 1.0, -1.0, 1.0).unwrap();
        let yf = y_field(&g);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                assert_eq!(yf.get(i, j), g.cell_center(i, j).unwrap().1);
            }
        }
    }

    #[test]
    fn relative_error_basics() {
        let g = GridSpec::unit_square(8).unwrap();
        let b = ScalarField::from_fn(g, |x, y| 1.0 + x * y);
        assert_eq!(l2_relative_error(&b, &b).unwrap(), 0.0);
        let a = b.scaled(2.0);
        assert_relative_eq!(l2_relative_error(&a, &b).unwrap(), 1.0, epsilon = 1e-15);
        let z = ScalarField::zeros(g);
        assert!(matches!(l2_relative_error(&a, &z), Err(QgError::ZeroNorm)));
        let other = ScalarField::zeros(GridSpec::unit_square(4).unwrap());
        assert!(matches!(
            l2_relative_error(&other, &b),
            Err(QgError::GridMismatch)
        ));
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = GridSpec::unit_square(2).unwrap();
        let err = ScalarField::new(g, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        assert!(matches!(err, QgError::NonFinite { i: 0, j: 1, .. }));
    }

    #[test]
    fn fld_header_and_layout() {
        let g = GridSpec::new(2, 2, 0.0, 1.0, 0.0, 1.0).unwrap();
        let f = ScalarField::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        f.write_fld(&mut buf, 0.5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("2 2 "));
        assert!(lines[1].starts_with("1.0000000000000000e0 2.0"));
        let (back, t) = ScalarField::read_fld(text.as_bytes()).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 0.5);
    }

    #[test]
    fn fld_parse_errors_carry_line_numbers() {
        let text = "2 2 0 1 0 1 0\n1 2\n3 x\n";
        match ScalarField::read_fld(text.as_bytes()) {
            Err(QgError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "2 2 0 1 0 1 0\n1 2\n";
        assert!(ScalarField::read_fld(short.as_bytes()).is_err());
    }
}
