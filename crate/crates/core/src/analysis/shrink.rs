//! Vanishing-hole asymptotics: as the hole radius shrinks, the first mixed
//! eigenvalue converges to the first classical Steklov eigenvalue of the
//! outer domain, with eigenfunction traces converging after eigenspace
//! alignment, and the mixed eigenvalue never exceeds the Steklov one.

use super::AnalysisError;
use crate::geometry::{build_domain, build_simple_domain, PolarCurve};
use crate::solver::{solve_steklov, solve_steklov_neumann, SolverOptions, SpectralMode};
use rayon::prelude::*;

const STEP1_TOLERANCE: f64 = 1e-8;

/// One row of the shrink sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleShrinkRow {
    pub radius: f64,
    pub mu1: f64,
    /// `sigma_1(outer) - mu_1(punctured)`, nonnegative up to tolerance.
    pub gap: f64,
    /// Distance on the outer boundary between the reference Steklov
    /// eigenfunction and its projection onto the mixed first eigenspace.
    pub trace_distance: f64,
    pub flux_residual: f64,
}

/// Sweep output: the outer Steklov eigenvalue and the per-radius rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleShrinkReport {
    pub sigma1: f64,
    pub rows: Vec<HoleShrinkRow>,
}

/// Run the shrink sweep over strictly decreasing hole radii.
///
/// Fails with [`AnalysisError::UpperBoundViolated`] if any mixed eigenvalue
/// exceeds `sigma_1` beyond tolerance — that inequality holds at every
/// radius, not only in the limit.
pub fn hole_shrink_sweep(
    outer: &PolarCurve,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<HoleShrinkReport, AnalysisError> {
    let report = hole_shrink_rows(outer, radii, opts)?;
    for row in &report.rows {
        if row.mu1 > report.sigma1 + STEP1_TOLERANCE {
            return Err(AnalysisError::UpperBoundViolated {
                mu: row.mu1,
                sigma: report.sigma1,
            });
        }
    }
    Ok(report)
}

/// The shrink-sweep data without the upper-bound assertion; callers that
/// report violations rather than abort use this directly.
pub fn hole_shrink_rows(
    outer: &PolarCurve,
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<HoleShrinkReport, AnalysisError> {
    if radii.is_empty()
        || radii.windows(2).any(|w| w[1] >= w[0])
        || radii.iter().any(|&r| r <= 0.0)
    {
        return Err(AnalysisError::RadiiNotDecreasing);
    }
    let rho_min = outer.min_rho();
    if let Some(&r) = radii.iter().find(|&&r| r >= rho_min) {
        return Err(AnalysisError::HoleNotInside { r, rho_min });
    }

    let m = opts.m_out.unwrap_or_else(|| opts.default_samples());
    let simple = build_simple_domain(outer.clone(), m)?;
    let steklov_opts = SolverOptions {
        mode: SpectralMode::Steklov,
        ..opts.clone()
    };
    let outer_solution = solve_steklov(&simple, &steklov_opts)?;
    let sigma1 = outer_solution.mu(1);
    let boundary = &simple.boundary;
    let weights = &boundary.weights;

    // Reference trace, unit-normalized in the weighted boundary product.
    let reference = {
        let mut trace = outer_solution.evaluate_mode(1, &boundary.points)?;
        let norm = weighted_norm(&trace, weights);
        for v in &mut trace {
            *v /= norm;
        }
        trace
    };

    let rows: Result<Vec<HoleShrinkRow>, AnalysisError> = radii
        .par_iter()
        .map(|&radius| {
            let domain = build_domain(outer.clone(), radius, m, m)?;
            let solution = solve_steklov_neumann(&domain, opts)?;
            let mu1 = solution.mu(1);
            // Weighted Gram-Schmidt of the first-eigenspace traces, then the
            // projection error of the reference trace.
            let mut span: Vec<Vec<f64>> = Vec::new();
            for k in solution.cluster_indices(1) {
                let mut trace = solution.evaluate_mode(k, &boundary.points)?;
                for basis_vec in &span {
                    let coeff = weighted_dot(&trace, basis_vec, weights);
                    for (t, b) in trace.iter_mut().zip(basis_vec) {
                        *t -= coeff * b;
                    }
                }
                let norm = weighted_norm(&trace, weights);
                if norm > 1e-12 {
                    for v in &mut trace {
                        *v /= norm;
                    }
                    span.push(trace);
                }
            }
            let mut residual = reference.clone();
            for basis_vec in &span {
                let coeff = weighted_dot(&residual, basis_vec, weights);
                for (r, b) in residual.iter_mut().zip(basis_vec) {
                    *r -= coeff * b;
                }
            }
            Ok(HoleShrinkRow {
                radius,
                mu1,
                gap: sigma1 - mu1,
                trace_distance: weighted_norm(&residual, weights),
                flux_residual: solution.diagnostics.gamma1_flux_residual[1],
            })
        })
        .collect();

    Ok(HoleShrinkReport {
        sigma1,
        rows: rows?,
    })
}

fn weighted_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), wi)| x * y * wi).sum()
}

fn weighted_norm(a: &[f64], w: &[f64]) -> f64 {
    weighted_dot(a, a, w).sqrt()
}
