//! The perforated-dumbbell family: two large disks joined by a thin
//! rectangular neck, with a concentric hole in one disk. The oscillating
//! test function supported on the neck shows the first mixed eigenvalue can
//! be made arbitrarily small without star-shapedness — the corners rule out
//! the single-center harmonic basis, so the bound is evaluated by direct
//! quadrature of the test function, exactly as the construction prescribes.

use super::AnalysisError;
use crate::quadrature::GaussLegendre;

/// Geometry of one dumbbell: neck half-width `epsilon/2`, neck half-height
/// `epsilon^3/2`, disks of radius `sqrt((1 + eps/2)^2 + eps^6/4)` centered
/// at `(-(1 + eps), 0)` and `(1 + eps, 0)`, and a hole of radius
/// `hole_radius < 1` concentric with the right disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumbbellSpec {
    pub epsilon: f64,
    pub hole_radius: f64,
}

impl DumbbellSpec {
    pub fn new(epsilon: f64, hole_radius: f64) -> Result<Self, AnalysisError> {
        if !(epsilon > 0.0 && epsilon <= 0.2) {
            return Err(AnalysisError::NeckParameterOutOfRange(epsilon));
        }
        if !(hole_radius > 0.0 && hole_radius < 1.0) {
            return Err(AnalysisError::HoleRadiusOutOfRange(hole_radius));
        }
        Ok(Self {
            epsilon,
            hole_radius,
        })
    }

    /// Common radius of the two disks.
    pub fn ball_radius(&self) -> f64 {
        let eps = self.epsilon;
        ((1.0 + eps / 2.0).powi(2) + eps.powi(6) / 4.0).sqrt()
    }

    /// Centers of the two disks.
    pub fn ball_centers(&self) -> [(f64, f64); 2] {
        let offset = 1.0 + self.epsilon;
        [(-offset, 0.0), (offset, 0.0)]
    }

    /// The neck corners lie exactly on the disk circles.
    pub fn corner_gap(&self) -> f64 {
        let eps = self.epsilon;
        let corner = (eps / 2.0, eps.powi(3) / 2.0);
        let center = self.ball_centers()[1];
        let dist = ((corner.0 - center.0).powi(2) + (corner.1 - center.1).powi(2)).sqrt();
        (dist - self.ball_radius()).abs()
    }
}

/// The evaluated Rayleigh quotient of the neck test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumbbellReport {
    pub epsilon: f64,
    /// `int_{neck boundary} v ds`; admissibility requires this to vanish.
    pub boundary_integral: f64,
    /// `int v^2 ds = epsilon`.
    pub boundary_mass: f64,
    /// `int |grad v|^2 = 2 pi^2 epsilon^2`.
    pub dirichlet_energy: f64,
    /// `energy / mass = 2 pi^2 epsilon`, an upper bound for the first
    /// mixed eigenvalue of the dumbbell.
    pub quotient: f64,
}

/// Quadrature the test function `v = sin(2 pi x / eps)` over the neck.
pub fn dumbbell_bound(spec: &DumbbellSpec) -> DumbbellReport {
    let eps = spec.epsilon;
    let rule = GaussLegendre::new(128);
    let half = eps / 2.0;
    let height = eps.powi(3);
    let wave = 2.0 * std::f64::consts::PI / eps;

    // Top and bottom edges carry sin(2 pi x / eps); the vertical edges sit
    // at x = +-eps/2 where the sine vanishes.
    let edge_integral = rule.integrate(-half, half, |x| (wave * x).sin());
    let vertical = (wave * half).sin() * height + (-wave * half).sin() * height;
    let boundary_integral = 2.0 * edge_integral + vertical;

    let edge_mass = rule.integrate(-half, half, |x| (wave * x).sin().powi(2));
    let vertical_mass = (wave * half).sin().powi(2) * height * 2.0;
    let boundary_mass = 2.0 * edge_mass + vertical_mass;

    // |grad v|^2 = (2 pi / eps)^2 cos^2, constant in y across the neck.
    let energy_line = rule.integrate(-half, half, |x| (wave * x).cos().powi(2));
    let dirichlet_energy = wave * wave * height * energy_line;

    DumbbellReport {
        epsilon: eps,
        boundary_integral,
        boundary_mass,
        dirichlet_energy,
        quotient: dirichlet_energy / boundary_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn quotient_matches_closed_form() {
        for eps in [0.1, 0.05, 0.01] {
            let spec = DumbbellSpec::new(eps, 0.5).unwrap();
            let report = dumbbell_bound(&spec);
            assert_abs_diff_eq!(report.quotient, 2.0 * PI * PI * eps, epsilon = 1e-10);
            assert_abs_diff_eq!(report.boundary_mass, eps, epsilon = 1e-12);
            assert_abs_diff_eq!(
                report.dirichlet_energy,
                2.0 * PI * PI * eps * eps,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn test_function_is_admissible() {
        for eps in [0.2, 0.1, 0.01] {
            let report = dumbbell_bound(&DumbbellSpec::new(eps, 0.3).unwrap());
            assert!(
                report.boundary_integral.abs() <= 1e-12,
                "eps = {eps}: mean {}",
                report.boundary_integral
            );
        }
    }

    #[test]
    fn quotient_vanishes_linearly() {
        let values: Vec<f64> = [0.1, 0.05, 0.01]
            .iter()
            .map(|&eps| dumbbell_bound(&DumbbellSpec::new(eps, 0.5).unwrap()).quotient)
            .collect();
        assert!(values[1] < values[0] && values[2] < values[1]);
        // Linear scaling: quotient / eps is constant.
        assert_abs_diff_eq!(values[0] / 0.1, values[2] / 0.01, epsilon = 1e-9);
    }

    #[test]
    fn geometry_invariants() {
        let spec = DumbbellSpec::new(0.1, 0.5).unwrap();
        assert_abs_diff_eq!(
            spec.ball_radius(),
            (1.05f64.powi(2) + 0.1f64.powi(6) / 4.0).sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(spec.ball_centers(), [(-1.1, 0.0), (1.1, 0.0)]);
        // Neck corners lie on the circles by construction.
        assert!(spec.corner_gap() <= 1e-12);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(DumbbellSpec::new(0.3, 0.5).is_err());
        assert!(DumbbellSpec::new(0.0, 0.5).is_err());
        assert!(DumbbellSpec::new(0.1, 1.5).is_err());
    }
}
