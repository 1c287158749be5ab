//! Comparison integrals for the eccentric annulus and the semi-analytic
//! Rayleigh upper bound built from them.
//!
//! `R_d(theta1)` is the radial distance from the hole center to the offset
//! outer sphere. The `A` family enters the Dirichlet energy of the fixed test
//! function, the `V` family its boundary mass; `A1`/`V1` are offset-invariant,
//! `A2`/`V2` vanish identically, and `A3`/`V3` are minimized at the concentric
//! configuration. All integrals are evaluated by Gauss–Legendre quadrature on
//! `[0, pi]`, which resolves these analytic integrands to rounding error.

use crate::closed_form::wallis_integral;
use crate::quadrature::GaussLegendre;
use thiserror::Error;

pub const DEFAULT_QUADRATURE_NODES: usize = 256;
const MIN_QUADRATURE_NODES: usize = 64;

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error("quadrature needs at least {MIN_QUADRATURE_NODES} nodes, got {0}")]
    NodeCountTooSmall(usize),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(u32),
    #[error("need r2 > r1 > 0, got r1 = {r1}, r2 = {r2}")]
    InvalidRadii { r1: f64, r2: f64 },
    #[error("offset must satisfy 0 <= d < {max}, got {d}")]
    InvalidOffset { d: f64, max: f64 },
    #[error("surface integral of the test function degenerated to {0}")]
    DegenerateDenominator(f64),
}

/// Quadrature setup for the lemma integrals: rule size, dimension, and the
/// annulus radii.
#[derive(Debug, Clone)]
pub struct LemmaQuadratureConfig {
    nodes: usize,
    pub n: u32,
    pub r1: f64,
    pub r2: f64,
    rule: GaussLegendre,
}

impl LemmaQuadratureConfig {
    pub fn new(n: u32, r1: f64, r2: f64, nodes: usize) -> Result<Self, LemmaError> {
        if nodes < MIN_QUADRATURE_NODES {
            return Err(LemmaError::NodeCountTooSmall(nodes));
        }
        if n < 2 {
            return Err(LemmaError::DimensionTooSmall(n));
        }
        if !(r1 > 0.0 && r2 > r1) {
            return Err(LemmaError::InvalidRadii { r1, r2 });
        }
        Ok(Self {
            nodes,
            n,
            r1,
            r2,
            rule: GaussLegendre::new(nodes),
        })
    }

    /// The default 256-node rule.
    pub fn standard(n: u32, r1: f64, r2: f64) -> Result<Self, LemmaError> {
        Self::new(n, r1, r2, DEFAULT_QUADRATURE_NODES)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn check_offset(&self, d: f64) -> Result<(), LemmaError> {
        let max = self.r2 - self.r1;
        if !(0.0..max).contains(&d) {
            return Err(LemmaError::InvalidOffset { d, max });
        }
        Ok(())
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.rule.integrate(0.0, std::f64::consts::PI, f)
    }
}

/// Radial distance to the offset sphere together with its angular derivative
/// and the surface area factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdValues {
    pub radius: f64,
    pub derivative: f64,
    /// `sqrt(R_d^2 + R_d'^2) = R2 (1 + d cos(theta1) / sqrt(R2^2 - d^2 sin^2 theta1))`.
    pub surface_factor: f64,
}

/// Evaluate `R_d(theta1) = d cos(theta1) + sqrt(R2^2 - d^2 sin^2 theta1)`.
pub fn eval_rd(d: f64, theta1: f64, r2: f64) -> Result<RdValues, LemmaError> {
    if !(0.0..r2).contains(&d) {
        return Err(LemmaError::InvalidOffset { d, max: r2 });
    }
    let (sin, cos) = theta1.sin_cos();
    let s = (r2 * r2 - d * d * sin * sin).sqrt();
    let radius = d * cos + s;
    Ok(RdValues {
        radius,
        derivative: -d * sin * radius / s,
        surface_factor: r2 * radius / s,
    })
}

/// Angular weight `phi(theta1) = -n sin^n + (n-1) sin^(n-2)`.
pub fn phi_weight(n: u32, theta1: f64) -> f64 {
    let nf = f64::from(n);
    let s = theta1.sin();
    -nf * s.powi(n as i32) + (nf - 1.0) * s.powi(n as i32 - 2)
}

/// Angular weight `psi(theta1) = (n-2) sin^n + (n-1) sin^(n-2)`.
pub fn psi_weight(n: u32, theta1: f64) -> f64 {
    let nf = f64::from(n);
    let s = theta1.sin();
    (nf - 2.0) * s.powi(n as i32) + (nf - 1.0) * s.powi(n as i32 - 2)
}

/// The six comparison integrals at offset `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaValues {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

pub fn lemma_values(d: f64, cfg: &LemmaQuadratureConfig) -> Result<LemmaValues, LemmaError> {
    cfg.check_offset(d)?;
    let n = cfg.n as i32;
    let r1 = cfg.r1;
    let r2 = cfg.r2;
    let rd = |t: f64| eval_rd(d, t, r2).expect("offset checked");

    let a1 = cfg.integrate(|t| t.sin().powi(n - 2) * (rd(t).radius.powi(n) - r1.powi(n)));
    let a2 = cfg.integrate(|t| phi_weight(cfg.n, t) * (rd(t).radius / r1).ln());
    let a3 = cfg.integrate(|t| {
        psi_weight(cfg.n, t) * (rd(t).radius.powi(-n) - r1.powi(-n))
    });
    let v1 = cfg.integrate(|t| {
        let v = rd(t);
        t.sin().powi(n) * v.radius.powi(n) * v.surface_factor
    });
    let v2 = cfg.integrate(|t| {
        let (sin, cos) = t.sin_cos();
        let s = (r2 * r2 - d * d * sin * sin).sqrt();
        sin.powi(n) * d * cos / s
    });
    let v3 = cfg.integrate(|t| {
        let sin = t.sin();
        let s = (r2 * r2 - d * d * sin * sin).sqrt();
        r2 * sin.powi(n) / (rd(t).radius.powi(n - 1) * s)
    });
    Ok(LemmaValues {
        a1,
        a2,
        a3,
        v1,
        v2,
        v3,
    })
}

/// Rayleigh-quotient upper bound `Theta(d)` for the first eigenvalue of the
/// eccentric annulus, built from the fixed first-eigenspace test function of
/// the concentric problem.
///
/// The Dirichlet energy is assembled from the `A` integrals (the explicit
/// planar expression for `n = 2`, the product form for `n >= 3`); the
/// boundary mass is quadratured directly over the offset sphere. At `d = 0`
/// the test function is the exact eigenfunction, so `Theta(0) = mu_1` in the
/// planar case.
pub fn rayleigh_bound_theta(d: f64, cfg: &LemmaQuadratureConfig) -> Result<f64, LemmaError> {
    let values = lemma_values(d, cfg)?;
    let numerator = energy_from_lemma_values(&values, cfg);
    let denominator = surface_mass(d, cfg)?;
    if !(denominator > 0.0) {
        return Err(LemmaError::DegenerateDenominator(denominator));
    }
    Ok(numerator / denominator)
}

/// Dirichlet energy of the test function expressed through `A1..A3`.
pub fn energy_from_lemma_values(values: &LemmaValues, cfg: &LemmaQuadratureConfig) -> f64 {
    let nf = f64::from(cfg.n);
    let r1 = cfg.r1;
    if cfg.n == 2 {
        // Planar form: the full-circle integral is twice the half-period one.
        values.a1 + 4.0 * r1 * r1 * values.a2 - r1.powi(4) * values.a3
    } else {
        let mut wallis_product = 1.0;
        for k in 0..=(cfg.n as usize - 3) {
            wallis_product *= wallis_integral(k);
        }
        2.0 / ((nf - 1.0) * (nf - 1.0))
            * wallis_product
            * ((nf - 1.0) * (nf - 1.0) / nf * values.a1
                + 2.0 * r1.powi(cfg.n as i32) * values.a2
                - r1.powi(2 * cfg.n as i32) / nf * values.a3)
    }
}

/// Boundary mass `int f^2 dS` over the offset sphere by direct surface
/// quadrature: the polar-angle factor is quadratured, the remaining angular
/// block reduces to Wallis integrals.
pub fn surface_mass(d: f64, cfg: &LemmaQuadratureConfig) -> Result<f64, LemmaError> {
    cfg.check_offset(d)?;
    let n = cfg.n as i32;
    let nf = f64::from(cfg.n);
    let r1 = cfg.r1;
    let radial = |r: f64| r + r1.powi(n) / ((nf - 1.0) * r.powi(n - 1));
    let polar = cfg.integrate(|t| {
        let v = eval_rd(d, t, cfg.r2).expect("offset checked");
        let g = radial(v.radius);
        t.sin().powi(n) * g * g * v.radius.powi(n - 2) * v.surface_factor
    });
    Ok(if cfg.n == 2 {
        2.0 * polar
    } else {
        cos_squared_block(cfg.n) * polar
    })
}

/// Integral of `cos^2 theta2` over the angular block `theta2 .. theta_{n-1}`
/// with the spherical measure; the test function for `n >= 3` carries one
/// `cos theta2` factor.
fn cos_squared_block(n: u32) -> f64 {
    if n == 3 {
        // theta2 is the final angle and spans [0, 2 pi).
        return std::f64::consts::PI;
    }
    let mut tail = 2.0 * std::f64::consts::PI;
    for j in 1..=(n as usize - 4) {
        tail *= wallis_integral(j);
    }
    (wallis_integral(n as usize - 3) - wallis_integral(n as usize - 1)) * tail
}
