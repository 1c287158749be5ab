//! Isoperimetric comparisons in the small-hole regime: the punctured domain
//! is dominated by the concentric annulus whose outer ball matches the
//! domain's measure (any Lipschitz outer) or perimeter (convex outer), with
//! equality exactly when the outer domain is that ball.

use super::AnalysisError;
use crate::closed_form::mu_l_concentric;
use crate::geometry::{build_domain, AnnulusSpec, PolarCurve};
use crate::solver::{solve_steklov_neumann, SolverOptions};

/// Which geometric quantity the comparison ball matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoperimetricConstraint {
    Measure,
    Perimeter,
}

/// Default smallness threshold: the hole may use at most this fraction of
/// the inscribed radius.
pub const DEFAULT_SMALLNESS_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoperimetricReport {
    pub hole_radius: f64,
    pub constraint: IsoperimetricConstraint,
    /// Radius of the ball with the same measure (resp. perimeter).
    pub comparison_radius: f64,
    pub mu1_domain: f64,
    pub mu1_annulus: f64,
    /// `mu1_annulus - mu1_domain`; nonnegative in the asymptotic regime.
    pub margin: f64,
}

/// Compare the punctured domain against its constrained comparison annulus.
///
/// `smallness` overrides the default hole-size gate `r <= smallness * R_m`;
/// the corollaries hold for sufficiently small holes only, and the threshold
/// is not explicit, so it is exposed as configuration.
pub fn isoperimetric_check(
    outer: &PolarCurve,
    hole_radius: f64,
    constraint: IsoperimetricConstraint,
    opts: &SolverOptions,
    smallness: Option<f64>,
) -> Result<IsoperimetricReport, AnalysisError> {
    let rho_min = outer.min_rho();
    let max_radius = smallness.unwrap_or(DEFAULT_SMALLNESS_FRACTION) * rho_min;
    if !(hole_radius > 0.0) || hole_radius > max_radius {
        return Err(AnalysisError::HoleTooLargeForAsymptotics {
            r: hole_radius,
            max: max_radius,
        });
    }
    let comparison_radius = match constraint {
        IsoperimetricConstraint::Measure => (outer.area() / std::f64::consts::PI).sqrt(),
        IsoperimetricConstraint::Perimeter => {
            if !outer.is_convex() {
                return Err(AnalysisError::NotConvex);
            }
            outer.perimeter() / (2.0 * std::f64::consts::PI)
        }
    };
    let m = opts.m_out.unwrap_or_else(|| opts.default_samples());
    let domain = build_domain(outer.clone(), hole_radius, m, m)?;
    let solution = solve_steklov_neumann(&domain, opts)?;
    let annulus = AnnulusSpec::concentric(2, hole_radius, comparison_radius)?;
    let mu1_annulus = mu_l_concentric(&annulus, 1)?.value;
    let mu1_domain = solution.mu(1);
    Ok(IsoperimetricReport {
        hole_radius,
        constraint,
        comparison_radius,
        mu1_domain,
        mu1_annulus,
        margin: mu1_annulus - mu1_domain,
    })
}
