//! Dirichlet energy of the harmonic extension into the hole.
//!
//! For a mode of the concentric annulus `A_{r,R}` satisfying Neumann on the
//! inner circle, the trace on `|x| = r` is expanded in circular harmonics,
//! extended harmonically inside by matching positive powers, and the
//! extension's energy `pi sum_k k (a_k^2 + b_k^2)` is compared with the
//! mode's energy on the annulus. The ratio obeys the `5 (r/R)^n` envelope
//! (up to a margin for the higher-order term) as the hole shrinks.

use super::AnalysisError;
use crate::geometry::Point;
use crate::solver::EigenSolution;

/// Extension-energy comparison for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionReport {
    pub radius_ratio: f64,
    /// `int_{B_r} |grad h|^2` from the trace coefficients.
    pub extension_energy: f64,
    /// `int_{A_{r,R}} |grad u|^2` from the mode's coefficients.
    pub annulus_energy: f64,
    /// `extension_energy / annulus_energy`; zero for the constant mode.
    pub ratio: f64,
    /// `5 (r/R)^2 * (1 + margin)` with the default margin of one half.
    pub envelope: f64,
}

const ENVELOPE_MARGIN: f64 = 0.5;

/// Compare the hole-extension energy of `mode` against the envelope.
///
/// `solution` must come from a concentric annulus `A_{inner_radius,
/// outer_radius}` centered at the basis center; the asymptotic envelope only
/// applies for `inner_radius / outer_radius < 1/2`.
pub fn harmonic_extension_ratio(
    solution: &EigenSolution,
    mode: usize,
    inner_radius: f64,
    outer_radius: f64,
) -> Result<ExtensionReport, AnalysisError> {
    let ratio = inner_radius / outer_radius;
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(AnalysisError::RadiusRatioTooLarge(ratio));
    }
    let order = solution.basis.order;
    // Trapezoid Fourier analysis of the trace on the inner circle; the trace
    // is band-limited by the basis order, so 4x oversampling is exact.
    let samples = (8 * order).max(64);
    let center = solution.basis.center;
    let points: Vec<Point> = (0..samples)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            Point::new(
                center.x + inner_radius * t.cos(),
                center.y + inner_radius * t.sin(),
            )
        })
        .collect();
    let trace = solution.evaluate_mode(mode, &points)?;

    // a_k = (1/pi) int trace cos(k t), b_k likewise; the extension inside is
    // sum (rho/r)^k (a_k cos + b_k sin) and its Dirichlet energy on B_r is
    // pi sum k (a_k^2 + b_k^2).
    let mut extension_energy = 0.0;
    for k in 1..=order {
        let mut a = 0.0;
        let mut b = 0.0;
        for (j, &u) in trace.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            a += u * (k as f64 * t).cos();
            b += u * (k as f64 * t).sin();
        }
        a *= 2.0 / samples as f64;
        b *= 2.0 / samples as f64;
        extension_energy += std::f64::consts::PI * k as f64 * (a * a + b * b);
    }

    let annulus_energy = dirichlet_energy_annulus(solution, mode, inner_radius, outer_radius);
    let ratio_value = if extension_energy <= f64::EPSILON * annulus_energy.max(1.0) {
        0.0
    } else {
        extension_energy / annulus_energy
    };
    Ok(ExtensionReport {
        radius_ratio: ratio,
        extension_energy,
        annulus_energy,
        ratio: ratio_value,
        envelope: 5.0 * ratio * ratio * (1.0 + ENVELOPE_MARGIN),
    })
}

/// Closed-form Dirichlet energy of a basis combination on the concentric
/// annulus: `2 pi b_log^2 log(R/r)` for the log member plus
/// `pi k (A_k^2 (R^{2k} - r^{2k}) + B_k^2 (r^{-2k} - R^{-2k}))` per
/// frequency; positive/negative cross terms integrate to zero.
fn dirichlet_energy_annulus(
    solution: &EigenSolution,
    mode: usize,
    inner_radius: f64,
    outer_radius: f64,
) -> f64 {
    let basis = &solution.basis;
    let coeffs = solution.mode_coefficients(mode);
    let mut energy = 0.0;
    let log_coeff = coeffs[1];
    energy += 2.0 * std::f64::consts::PI
        * log_coeff
        * log_coeff
        * (outer_radius / inner_radius).ln();
    for k in 1..=basis.order {
        let idx = 2 + 4 * (k - 1);
        let kf = k as f64;
        // Unscale to raw Laurent coefficients.
        let scale_pos = basis.scale_out.powi(k as i32);
        let scale_neg = basis.scale_in.powi(k as i32);
        for trig in 0..2 {
            let a = coeffs[idx + trig] / scale_pos;
            let b = coeffs[idx + 2 + trig] * scale_neg;
            energy += std::f64::consts::PI
                * kf
                * (a * a * (outer_radius.powi(2 * k as i32) - inner_radius.powi(2 * k as i32))
                    + b * b
                        * (inner_radius.powi(-2 * (k as i32))
                            - outer_radius.powi(-2 * (k as i32))));
        }
    }
    energy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, PolarCurve};
    use crate::solver::{solve_steklov_neumann, SolverOptions};
    use approx::assert_abs_diff_eq;

    fn solve_annulus(r: f64) -> EigenSolution {
        let domain = build_domain(PolarCurve::eccentric(1.0, 0.0).unwrap(), r, 384, 384).unwrap();
        solve_steklov_neumann(&domain, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn first_mode_matches_closed_form_ratio() {
        // For the l = 1 mode of A_{r,1} the exact ratio is
        // 4 (r/R)^2 / (1 - (r/R)^4).
        for r in [0.2, 0.1, 0.05] {
            let solution = solve_annulus(r);
            let report = harmonic_extension_ratio(&solution, 1, r, 1.0).unwrap();
            let exact = 4.0 * r * r / (1.0 - r.powi(4));
            assert_abs_diff_eq!(report.ratio, exact, epsilon = 1e-8 * exact);
        }
    }

    #[test]
    fn ratio_respects_envelope_and_decreases() {
        let mut previous = f64::INFINITY;
        for r in [0.2, 0.1, 0.05] {
            let solution = solve_annulus(r);
            let report = harmonic_extension_ratio(&solution, 1, r, 1.0).unwrap();
            assert!(
                report.ratio <= report.envelope,
                "r = {r}: ratio {} vs envelope {}",
                report.ratio,
                report.envelope
            );
            assert!(report.ratio < previous);
            previous = report.ratio;
        }
    }

    #[test]
    fn constant_mode_has_zero_ratio() {
        let solution = solve_annulus(0.1);
        let report = harmonic_extension_ratio(&solution, 0, 0.1, 1.0).unwrap();
        assert_eq!(report.ratio, 0.0);
    }

    #[test]
    fn energy_matches_pencil_relation() {
        // c^T K c = mu for an M-normalized mode, so the closed-form energy
        // of the mu_1 mode must equal the eigenvalue.
        let solution = solve_annulus(0.1);
        let energy = dirichlet_energy_annulus(&solution, 1, 0.1, 1.0);
        assert_abs_diff_eq!(energy, solution.mu(1), epsilon = 1e-9);
    }

    #[test]
    fn rejects_large_ratio() {
        let solution = solve_annulus(0.2);
        assert!(matches!(
            harmonic_extension_ratio(&solution, 1, 0.2, 0.39),
            Err(AnalysisError::RadiusRatioTooLarge(_))
        ));
    }
}
