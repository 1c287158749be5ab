//! Sandwich bounds for star-shaped perforated domains: the first mixed
//! eigenvalue is pinched between explicitly weighted eigenvalues of the
//! inscribed and circumscribed concentric annuli.

use super::AnalysisError;
use crate::closed_form::mu_l_concentric;
use crate::geometry::{AnnulusSpec, DoublyConnectedDomain, RevolutionProfile};
use crate::solver::{solve_steklov_neumann, EigenSolution, SolverOptions};

/// The two-sided comparison for one domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub mu1: f64,
    pub lower: f64,
    pub upper: f64,
    pub c1: f64,
    pub c2: f64,
    pub inscribed_radius: f64,
    pub circumscribed_radius: f64,
    pub star_constant: f64,
    pub mu1_inscribed_annulus: f64,
    pub mu1_circumscribed_annulus: f64,
}

/// The explicit constants: `C1 = h(R_m)^(n-1) / (sqrt(1 + a) h(R_M)^(n-1))`
/// and `C2 = h(R_M)^(n-1) / h(R_m)^(n-1)`, with `a` the star-shape angle
/// constant of the outer boundary.
pub fn sandwich_constants(
    inscribed_radius: f64,
    circumscribed_radius: f64,
    star_constant: f64,
    profile: &RevolutionProfile,
) -> (f64, f64) {
    let exponent = profile.dim as i32 - 1;
    let h_m = profile.eval(inscribed_radius).powi(exponent);
    let h_max = profile.eval(circumscribed_radius).powi(exponent);
    let c1 = h_m / ((1.0 + star_constant).sqrt() * h_max);
    let c2 = h_max / h_m;
    (c1, c2)
}

/// Assemble the sandwich report for a star-shaped perforated domain.
///
/// The annulus eigenvalues and the solver value are Euclidean
/// (two-dimensional); a non-Euclidean profile only makes sense for the
/// constants, so the eigenvalue comparison is meaningful when `h(r) = r`.
pub fn sandwich_bounds(
    domain: &DoublyConnectedDomain,
    profile: &RevolutionProfile,
    opts: &SolverOptions,
) -> Result<SandwichReport, AnalysisError> {
    let solution = solve_steklov_neumann(domain, opts)?;
    sandwich_bounds_with_solution(domain, profile, &solution)
}

/// Same as [`sandwich_bounds`], reusing an existing solve.
pub fn sandwich_bounds_with_solution(
    domain: &DoublyConnectedDomain,
    profile: &RevolutionProfile,
    solution: &EigenSolution,
) -> Result<SandwichReport, AnalysisError> {
    let r_m = domain.inscribed_radius;
    let r_max = domain.circumscribed_radius;
    if r_m <= domain.r1 {
        return Err(AnalysisError::DegenerateSandwich {
            r_m,
            r1: domain.r1,
        });
    }
    let (c1, c2) = sandwich_constants(r_m, r_max, domain.star_constant, profile);
    let inner = AnnulusSpec::concentric(2, domain.r1, r_m)?;
    let outer = AnnulusSpec::concentric(2, domain.r1, r_max)?;
    let mu_inner = mu_l_concentric(&inner, 1)?.value;
    let mu_outer = mu_l_concentric(&outer, 1)?.value;
    Ok(SandwichReport {
        mu1: solution.mu(1),
        lower: c1 * mu_inner,
        upper: c2 * mu_outer,
        c1,
        c2,
        inscribed_radius: r_m,
        circumscribed_radius: r_max,
        star_constant: domain.star_constant,
        mu1_inscribed_annulus: mu_inner,
        mu1_circumscribed_annulus: mu_outer,
    })
}
