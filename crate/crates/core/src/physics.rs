//! Nondimensional parameters of the two-layer model and derived length scales.

use crate::error::{QgError, Result};

/// Nondimensional groups of the two-layer equations.
///
/// `a` (the lateral eddy viscosity coefficient) is derived from `ro / re`
/// and never set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    ro: f64,
    re: f64,
    fr: f64,
    sigma: f64,
    delta: f64,
    length: f64,
    a: f64,
}

impl PhysicalParams {
    pub fn new(ro: f64, re: f64, fr: f64, sigma: f64, delta: f64, length: f64) -> Result<Self> {
        let bad = |name: &str, msg: &str| Err(QgError::InvalidParameter(format!("{name} {msg}")));
        if !(ro.is_finite() && ro > 0.0) {
            return bad("ro", "must be positive");
        }
        if !(re.is_finite() && re > 0.0) {
            return bad("re", "must be positive");
        }
        if !(fr.is_finite() && fr >= 0.0) {
            return bad("fr", "must be non-negative");
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return bad("sigma", "must be non-negative");
        }
        if !(delta > 0.0 && delta < 1.0) {
            return bad("delta", "must lie in (0,1)");
        }
        if !(length.is_finite() && length > 0.0) {
            return bad("length", "must be positive");
        }
        Ok(Self {
            ro,
            re,
            fr,
            sigma,
            delta,
            length,
            a: derived_a(ro, re)?,
        })
    }

    pub fn ro(&self) -> f64 {
        self.ro
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn fr(&self) -> f64 {
        self.fr
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Characteristic meridional length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Lateral eddy viscosity coefficient `A = Ro / Re`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn coupling(&self) -> LayerCoupling {
        LayerCoupling {
            top: self.fr / self.delta,
            bottom: self.fr / (1.0 - self.delta),
        }
    }

    pub fn munk_scale(&self) -> f64 {
        munk_scale(self)
    }

    pub fn kolmogorov_scale(&self) -> f64 {
        kolmogorov_scale(self)
    }
}

/// Weights of the inter-layer coupling terms in the kinematic relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerCoupling {
    /// `Fr / delta`: how strongly the bottom layer acts on the top layer.
    pub top: f64,
    /// `Fr / (1 - delta)`: how strongly the top layer acts on the bottom layer.
    pub bottom: f64,
}

/// Munk boundary-layer width `L (Ro / Re)^(1/3)`.
pub fn munk_scale(p: &PhysicalParams) -> f64 {
    p.length * (p.ro / p.re).cbrt()
}

/// Kolmogorov scale `Re^(-3/4) L`.
pub fn kolmogorov_scale(p: &PhysicalParams) -> f64 {
    p.re.powf(-0.75) * p.length
}

pub fn derived_a(ro: f64, re: f64) -> Result<f64> {
    if re == 0.0 {
        return Err(QgError::InvalidParameter("re must be nonzero".into()));
    }
    Ok(ro / re)
}
