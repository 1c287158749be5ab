//! Theorem-level analyses built on the solver and the closed forms:
//! nodal-domain counting, the harmonic-extension gradient estimate, the
//! star-shaped sandwich bounds, vanishing-hole asymptotics with their
//! isoperimetric consequences, and the perforated-dumbbell construction.

mod dumbbell;
mod extension;
mod isoperimetric;
mod nodal;
mod sandwich;
mod shrink;

pub use dumbbell::{dumbbell_bound, DumbbellReport, DumbbellSpec};
pub use extension::{harmonic_extension_ratio, ExtensionReport};
pub use isoperimetric::{isoperimetric_check, IsoperimetricConstraint, IsoperimetricReport};
pub use nodal::{count_nodal_domains, NodalReport};
pub use sandwich::{
    sandwich_bounds, sandwich_bounds_with_solution, sandwich_constants, SandwichReport,
};
pub use shrink::{hole_shrink_rows, hole_shrink_sweep, HoleShrinkReport, HoleShrinkRow};

use crate::closed_form::ClosedFormError;
use crate::geometry::GeometryError;
use crate::solver::SolverError;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error("nodal grid needs at least {min} points per side, got {got}")]
    GridTooCoarse { min: usize, got: usize },
    #[error("no interior sample points at resolution {0}")]
    EmptyInteriorSample(usize),
    #[error("radius ratio {0} is outside the asymptotic regime (need r/R < 1/2)")]
    RadiusRatioTooLarge(f64),
    #[error("hole radii must be strictly decreasing and positive")]
    RadiiNotDecreasing,
    #[error("hole of radius {r} does not fit inside the outer curve (min rho = {rho_min})")]
    HoleNotInside { r: f64, rho_min: f64 },
    #[error("mixed eigenvalue {mu} exceeds the outer Steklov eigenvalue {sigma} beyond tolerance")]
    UpperBoundViolated { mu: f64, sigma: f64 },
    #[error("hole radius {r} exceeds the smallness threshold {max} for asymptotic comparisons")]
    HoleTooLargeForAsymptotics { r: f64, max: f64 },
    #[error("perimeter-constrained comparison requires a convex outer domain")]
    NotConvex,
    #[error("neck parameter {0} out of range (need 0 < eps <= 0.2)")]
    NeckParameterOutOfRange(f64),
    #[error("hole radius {0} out of range (need 0 < r1 < 1)")]
    HoleRadiusOutOfRange(f64),
    #[error("inscribed radius {r_m} does not exceed the hole radius {r1}")]
    DegenerateSandwich { r_m: f64, r1: f64 },
}

/// Deterministic random unit vectors in `R^dim`, for probing eigenspaces.
pub fn random_unit_combinations(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        out.push(v.iter().map(|x| x / norm).collect());
    }
    out
}
