//! Spectral geometry of the mixed Steklov–Neumann problem on doubly
//! connected planar domains.
//!
//! The crate computes eigenvalues of the Dirichlet-to-Neumann map on domains
//! with a circular hole: harmonic in the interior, homogeneous Neumann on the
//! hole boundary, and the spectral (Steklov) condition on the outer boundary.
//! It provides
//!
//! * exact closed forms for concentric annuli in any dimension
//!   ([`closed_form`]),
//! * a Trefftz–Galerkin solver on a truncated harmonic trial space for
//!   general 2D domains ([`solver`]),
//! * the comparison-integral machinery behind the eccentric-annulus upper
//!   bound ([`lemmas`]),
//! * domain construction and boundary discretization ([`geometry`]), and
//! * higher-level analyses: nodal-domain counts, star-shaped sandwich
//!   bounds, vanishing-hole asymptotics, isoperimetric comparisons, and the
//!   perforated-dumbbell construction ([`analysis`]).

pub mod analysis;
pub mod closed_form;
pub mod geometry;
pub mod lemmas;
pub mod quadrature;
pub mod solver;

pub use closed_form::{mu_l_concentric, AnnulusEigenvalue};
pub use geometry::{
    build_domain, build_simple_domain, AnnulusSpec, BoundaryCurve, DoublyConnectedDomain,
    PolarCurve, RevolutionProfile, SimpleDomain, StarPolarCurve,
};
pub use lemmas::{lemma_values, rayleigh_bound_theta, LemmaQuadratureConfig, LemmaValues};
