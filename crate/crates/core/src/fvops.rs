//! Second-order finite-volume operators on the uniform grid.
//!
//! Every operator is assembled as a 5-point [`Stencil`] already divided by the
//! cell measure, so applying it to a field yields per-unit-area quantities.
//! Dirichlet data enters through the stencil's `source` term: a face on the
//! physical boundary sees the boundary value at its center, a distance `h/2`
//! from the adjacent cell center.

use crate::grid::{BoundaryCondition, BoundaryValues, GridSpec, ScalarField};

/// One row of a 5-point operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StencilCoefficients {
    pub center: f64,
    pub east: f64,
    pub west: f64,
    pub north: f64,
    pub south: f64,
    pub source: f64,
}

/// Affine 5-point operator `f -> A f + source`.
///
/// Coefficients pointing out of the domain are always zero; the boundary
/// closure is folded into `center` and `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    grid: GridSpec,
    pub center: Vec<f64>,
    pub east: Vec<f64>,
    pub west: Vec<f64>,
    pub north: Vec<f64>,
    pub south: Vec<f64>,
    pub source: Vec<f64>,
}

impl Stencil {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            center: vec![0.0; n],
            east: vec![0.0; n],
            west: vec![0.0; n],
            north: vec![0.0; n],
            south: vec![0.0; n],
            source: vec![0.0; n],
        }
    }

    /// `scale * I`.
    pub fn identity(grid: GridSpec, scale: f64) -> Self {
        let mut s = Self::zeros(grid);
        s.center.iter_mut().for_each(|c| *c = scale);
        s
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn row(&self, i: usize, j: usize) -> StencilCoefficients {
        let k = self.grid.index(i, j);
        StencilCoefficients {
            center: self.center[k],
            east: self.east[k],
            west: self.west[k],
            north: self.north[k],
            south: self.south[k],
            source: self.source[k],
        }
    }

    /// Linear part only: `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        stencil_matvec(
            &self.grid,
            [&self.center, &self.east, &self.west, &self.north, &self.south],
            x,
            y,
        );
    }

    /// Full affine application `A f + source`.
    pub fn apply(&self, field: &ScalarField) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        self.matvec(field.values(), &mut out);
        for (o, s) in out.iter_mut().zip(&self.source) {
            *o += s;
        }
        ScalarField::from_raw(self.grid, out)
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in [
            &mut self.center,
            &mut self.east,
            &mut self.west,
            &mut self.north,
            &mut self.south,
            &mut self.source,
        ] {
            v.iter_mut().for_each(|c| *c *= s);
        }
        self
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Stencil, s: f64) {
        debug_assert!(self.grid.same_as(&other.grid));
        let pairs = [
            (&mut self.center, &other.center),
            (&mut self.east, &other.east),
            (&mut self.west, &other.west),
            (&mut self.north, &other.north),
            (&mut self.south, &other.south),
            (&mut self.source, &other.source),
        ];
        for (dst, src) in pairs {
            for (d, v) in dst.iter_mut().zip(src) {
                *d += s * v;
            }
        }
    }

    pub fn add_diagonal(&mut self, c: f64) {
        self.center.iter_mut().for_each(|v| *v += c);
    }
}

/// Shared 5-point product used by [`Stencil`] and the linear solver.
#[inline]
pub(crate) fn stencil_matvec(grid: &GridSpec, coeffs: [&[f64]; 5], x: &[f64], y: &mut [f64]) {
    let [c, e, w, n, s] = coeffs;
    let nx = grid.nx();
    let ny = grid.ny();
    // Row-wise sweeps over contiguous slices; coefficients pointing out of
    // the domain are never read.
    for j in 0..ny {
        let r = j * nx..(j + 1) * nx;
        let yr = &mut y[r.clone()];
        let xr = &x[r.clone()];
        for ((yk, ck), xk) in yr.iter_mut().zip(&c[r.clone()]).zip(xr) {
            *yk = ck * xk;
        }
        for ((yk, ek), xk) in yr[..nx - 1].iter_mut().zip(&e[r.start..r.end - 1]).zip(&xr[1..]) {
            *yk += ek * xk;
        }
        for ((yk, wk), xk) in yr[1..].iter_mut().zip(&w[r.start + 1..r.end]).zip(&xr[..nx - 1]) {
            *yk += wk * xk;
        }
        if j + 1 < ny {
            let xn = &x[r.end..r.end + nx];
            for ((yk, nk), xk) in yr.iter_mut().zip(&n[r.clone()]).zip(xn) {
                *yk += nk * xk;
            }
        }
        if j > 0 {
            let xs = &x[r.start - nx..r.start];
            for ((yk, sk), xk) in yr.iter_mut().zip(&s[r.clone()]).zip(xs) {
                *yk += sk * xk;
            }
        }
    }
}

/// Diffusion operator `coeff * div(k grad f)`; `k = 1` when `cell_k` is absent.
fn diffusion_stencil_with(
    grid: &GridSpec,
    bc: &BoundaryCondition,
    coeff: f64,
    cell_k: Option<&ScalarField>,
) -> Stencil {
    let nx = grid.nx();
    let ny = grid.ny();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let bv = BoundaryValues::new(grid, bc);
    let kval = |k: usize| cell_k.map_or(1.0, |f| f.values()[k]);
    let face = |a: usize, b: usize| match cell_k {
        None => 1.0,
        Some(f) => 0.5 * (f.values()[a] + f.values()[b]),
    };
    let mut st = Stencil::zeros(*grid);
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            let mut center = 0.0;
            let mut source = 0.0;
            // Interior faces: coeff * k_f * (f_N - f_P) / h^2.
            // Boundary faces: coeff * k_P * (g - f_P) / (h/2) / h.
            let wb = 2.0 * coeff * kval(k) * inv_h2;
            let mut boundary = |g: f64, center: &mut f64| {
                *center -= wb;
                source += wb * g;
            };
            if i + 1 < nx {
                let w = coeff * face(k, k + 1) * inv_h2;
                st.east[k] = w;
                center -= w;
            } else {
                boundary(bv.east[j], &mut center);
            }
            if i > 0 {
                let w = coeff * face(k, k - 1) * inv_h2;
                st.west[k] = w;
                center -= w;
            } else {
                boundary(bv.west[j], &mut center);
            }
            if j + 1 < ny {
                let w = coeff * face(k, k + nx) * inv_h2;
                st.north[k] = w;
                center -= w;
            } else {
                boundary(bv.north[i], &mut center);
            }
            if j > 0 {
                let w = coeff * face(k, k - nx) * inv_h2;
                st.south[k] = w;
                center -= w;
            } else {
                boundary(bv.south[i], &mut center);
            }
            st.center[k] = center;
            st.source[k] = source;
        }
    }
    st
}

/// `coeff * Laplacian` with Dirichlet data `bc`.
pub fn laplacian_stencil(grid: &GridSpec, bc: &BoundaryCondition, coeff: f64) -> Stencil {
    diffusion_stencil_with(grid, bc, coeff, None)
}

/// `coeff * div(a grad f)` with the face diffusivity taken as the arithmetic
/// mean of the two adjacent cell values of `a`; boundary faces use the
/// adjacent cell's value.
pub fn variable_diffusion_stencil(
    a: &ScalarField,
    bc: &BoundaryCondition,
    coeff: f64,
) -> Stencil {
    diffusion_stencil_with(a.grid(), bc, coeff, Some(a))
}

/// `coeff * Laplacian(field)` evaluated explicitly.
pub fn explicit_laplacian(field: &ScalarField, bc: &BoundaryCondition, coeff: f64) -> ScalarField {
    laplacian_stencil(field.grid(), bc, coeff).apply(field)
}

/// Volumetric fluxes of the velocity `curl(psi) = (d psi/dy, -d psi/dx)`
/// through every face, positive along +x (vertical faces) and +y
/// (horizontal faces).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxField {
    grid: GridSpec,
    /// `(nx + 1) * ny` entries; face `i` of row `j` at `j * (nx + 1) + i`.
    pub phi_x: Vec<f64>,
    /// `nx * (ny + 1)` entries; face `j` of column `i` at `j * nx + i`.
    pub phi_y: Vec<f64>,
}

impl FaceFluxField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            phi_x: vec![0.0; (grid.nx() + 1) * grid.ny()],
            phi_y: vec![0.0; grid.nx() * (grid.ny() + 1)],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn x_face(&self, i: usize, j: usize) -> f64 {
        self.phi_x[j * (self.grid.nx() + 1) + i]
    }

    #[inline]
    pub fn y_face(&self, i: usize, j: usize) -> f64 {
        self.phi_y[j * self.grid.nx() + i]
    }

    /// Net outward flux of cell `(i, j)`.
    pub fn net_outflow(&self, i: usize, j: usize) -> f64 {
        self.x_face(i + 1, j) - self.x_face(i, j) + self.y_face(i, j + 1) - self.y_face(i, j)
    }

    pub fn is_finite(&self) -> bool {
        self.phi_x.iter().chain(&self.phi_y).all(|v| v.is_finite())
    }
}

/// Derivative along one grid line of `len` cells with Dirichlet values
/// `g_lo`, `g_hi` at the two end faces.
///
/// Interior cells use central differences. A boundary-adjacent cell fits a
/// parabola through the face value, its own value and its interior
/// neighbour, which differentiates polynomials of degree two exactly.
#[inline]
fn line_derivative(f: impl Fn(usize) -> f64, len: usize, idx: usize, g_lo: f64, g_hi: f64, h: f64) -> f64 {
    if len == 1 {
        return (g_hi - g_lo) / h;
    }
    if idx == 0 {
        (-4.0 / 3.0 * g_lo + f(0) + f(1) / 3.0) / h
    } else if idx == len - 1 {
        (4.0 / 3.0 * g_hi - f(len - 1) - f(len - 2) / 3.0) / h
    } else {
        (f(idx + 1) - f(idx - 1)) / (2.0 * h)
    }
}

/// Cell-center gradient `(df/dx, df/dy)`.
pub fn gradient(field: &ScalarField, bc: &BoundaryCondition) -> (ScalarField, ScalarField) {
    let grid = *field.grid();
    let nx = grid.nx();
    let ny = grid.ny();
    let h = grid.h();
    let bv = BoundaryValues::new(&grid, bc);
    let v = field.values();
    let mut gx = vec![0.0; grid.len()];
    let mut gy = vec![0.0; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            gx[k] = line_derivative(|ii| v[j * nx + ii], nx, i, bv.west[j], bv.east[j], h);
            gy[k] = line_derivative(|jj| v[jj * nx + i], ny, j, bv.south[i], bv.north[i], h);
        }
    }
    (ScalarField::from_raw(grid, gx), ScalarField::from_raw(grid, gy))
}

/// Per-cell `|grad f|`.
pub fn gradient_magnitude(field: &ScalarField, bc: &BoundaryCondition) -> ScalarField {
    let (gx, gy) = gradient(field, bc);
    let values = gx
        .values()
        .iter()
        .zip(gy.values())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    ScalarField::from_raw(*field.grid(), values)
}

/// Face fluxes of `curl(psi)` with Dirichlet trace `bc` for psi.
///
/// Cell-center velocities come from [`gradient`]; interior faces take the
/// mean of the two adjacent cell velocities. On physical boundary faces the
/// normal velocity is the tangential derivative of the trace, so a zero
/// trace gives an impermeable wall.
pub fn face_fluxes(psi: &ScalarField, bc: &BoundaryCondition) -> FaceFluxField {
    let grid = *psi.grid();
    let nx = grid.nx();
    let ny = grid.ny();
    let h = grid.h();
    let (x0, xf, y0, yf) = grid.bounds();
    let (dpsi_dx, dpsi_dy) = gradient(psi, bc);
    // u = dpsi/dy, v = -dpsi/dx
    let u = dpsi_dy.values();
    let vx = dpsi_dx.values();
    let mut flux = FaceFluxField::zeros(grid);

    for j in 0..ny {
        let ylo = y0 + j as f64 * h;
        let yhi = ylo + h;
        let row = j * (nx + 1);
        flux.phi_x[row] = bc.value(x0, yhi) - bc.value(x0, ylo);
        flux.phi_x[row + nx] = bc.value(xf, yhi) - bc.value(xf, ylo);
        for i in 1..nx {
            let k = grid.index(i, j);
            flux.phi_x[row + i] = 0.5 * (u[k - 1] + u[k]) * h;
        }
    }
    for i in 0..nx {
        let xlo = x0 + i as f64 * h;
        let xhi = xlo + h;
        flux.phi_y[i] = -(bc.value(xhi, y0) - bc.value(xlo, y0));
        flux.phi_y[ny * nx + i] = -(bc.value(xhi, yf) - bc.value(xlo, yf));
        for j in 1..ny {
            let k = grid.index(i, j);
            flux.phi_y[j * nx + i] = -0.5 * (vx[k - nx] + vx[k]) * h;
        }
    }
    flux
}

/// Convection operator `div(u q)` with central (mean) face values of `q`.
///
/// On boundary faces `q` takes its Dirichlet value from `bc`, which moves
/// the contribution into the stencil source.
pub fn convection_stencil(flux: &FaceFluxField, bc: &BoundaryCondition) -> Stencil {
    let grid = *flux.grid();
    let nx = grid.nx();
    let ny = grid.ny();
    let inv_area = 1.0 / grid.cell_area();
    let half = 0.5 * inv_area;
    let bv = BoundaryValues::new(&grid, bc);
    let mut st = Stencil::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            let out_e = flux.x_face(i + 1, j);
            let out_w = -flux.x_face(i, j);
            let out_n = flux.y_face(i, j + 1);
            let out_s = -flux.y_face(i, j);
            let mut center = 0.0;
            let mut source = 0.0;
            if i + 1 < nx {
                center += out_e * half;
                st.east[k] = out_e * half;
            } else {
                source += out_e * bv.east[j] * inv_area;
            }
            if i > 0 {
                center += out_w * half;
                st.west[k] = out_w * half;
            } else {
                source += out_w * bv.west[j] * inv_area;
            }
            if j + 1 < ny {
                center += out_n * half;
                st.north[k] = out_n * half;
            } else {
                source += out_n * bv.north[i] * inv_area;
            }
            if j > 0 {
                center += out_s * half;
                st.south[k] = out_s * half;
            } else {
                source += out_s * bv.south[i] * inv_area;
            }
            st.center[k] = center;
            st.source[k] = source;
        }
    }
    st
}

/// Net transport of the boundary values out of the domain, `sum_b phi_f g_f`.
pub fn boundary_transport(flux: &FaceFluxField, bc: &BoundaryCondition) -> f64 {
    let grid = flux.grid();
    let nx = grid.nx();
    let ny = grid.ny();
    let bv = BoundaryValues::new(grid, bc);
    let mut total = 0.0;
    for j in 0..ny {
        total += flux.x_face(nx, j) * bv.east[j] - flux.x_face(0, j) * bv.west[j];
    }
    for i in 0..nx {
        total += flux.y_face(i, ny) * bv.north[i] - flux.y_face(i, 0) * bv.south[i];
    }
    total
}

/// `sum f^2 h^2`, the midpoint-rule integral of the square.
pub fn integral_of_square(field: &ScalarField) -> f64 {
    let s: f64 = field.values().iter().map(|v| v * v).sum();
    s * field.grid().cell_area()
}

/// `sum f h^2`.
pub fn integral(field: &ScalarField) -> f64 {
    field.values().iter().sum::<f64>() * field.grid().cell_area()
}
