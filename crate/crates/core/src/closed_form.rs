//! Exact spectral quantities for concentric annuli and balls.
//!
//! These are the oracles the rest of the crate is checked against: the
//! eigenvalues `mu_l` of the mixed problem on `B_R2 \ closure(B_R1)`, the
//! radial factor of the associated eigenfunctions, the Cartesian form of the
//! first eigenfunctions, the first Steklov eigenvalue of a ball, and the
//! Wallis integrals `I_k = int_0^pi sin^k t dt`.

use crate::geometry::AnnulusSpec;
use thiserror::Error;

/// Largest supported harmonic index; keeps `(R1/R2)^(2l + n - 2)` and the
/// radial powers well inside double range.
pub const MAX_HARMONIC_INDEX: usize = 64;

#[derive(Debug, Error)]
pub enum ClosedFormError {
    #[error("closed form requires a concentric annulus, got offset {0}")]
    NotConcentric(f64),
    #[error("harmonic index {0} exceeds the supported maximum {MAX_HARMONIC_INDEX}")]
    IndexTooLarge(usize),
    #[error("radial part requires harmonic index l >= 1")]
    IndexZero,
    #[error("radius {r} lies outside the annulus [{r1}, {r2}]")]
    RadiusOutsideAnnulus { r: f64, r1: f64, r2: f64 },
    #[error("point at radius {r} lies outside the closed annulus [{r1}, {r2}]")]
    PointOutsideAnnulus { r: f64, r1: f64, r2: f64 },
    #[error("axis index {axis} out of range 1..={n}")]
    AxisOutOfRange { axis: usize, n: u32 },
    #[error("point has {got} coordinates, expected {expected}")]
    WrongPointDimension { got: usize, expected: u32 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// An eigenvalue of the concentric annulus together with its harmonic index
/// and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusEigenvalue {
    pub harmonic_index: usize,
    pub value: f64,
    pub multiplicity: usize,
}

/// The `l`-th eigenvalue of the mixed problem on the concentric annulus:
///
/// ```text
/// mu_l = l (l + n - 2) (q^(2l+n-2) - 1) / ( R2 ((l + n - 2) q^(2l+n-2) + l) ),
/// q = R2 / R1.
/// ```
///
/// Evaluated through `t = (R1/R2)^(2l+n-2)`, which stays in `(0, 1]`, so
/// large indices and radius ratios do not overflow.
pub fn mu_l_concentric(
    spec: &AnnulusSpec,
    l: usize,
) -> Result<AnnulusEigenvalue, ClosedFormError> {
    if !spec.is_concentric() {
        return Err(ClosedFormError::NotConcentric(spec.offset));
    }
    if l > MAX_HARMONIC_INDEX {
        return Err(ClosedFormError::IndexTooLarge(l));
    }
    if l == 0 {
        // Constant eigenfunction; the formula degenerates to 0/0 when n = 2.
        return Ok(AnnulusEigenvalue {
            harmonic_index: 0,
            value: 0.0,
            multiplicity: 1,
        });
    }
    let nf = f64::from(spec.n);
    let lf = l as f64;
    let exponent = 2 * l as i32 + spec.n as i32 - 2;
    let t = (spec.r1 / spec.r2).powi(exponent);
    let value = lf * (lf + nf - 2.0) * (1.0 - t) / (spec.r2 * ((lf + nf - 2.0) + lf * t));
    Ok(AnnulusEigenvalue {
        harmonic_index: l,
        value,
        multiplicity: spherical_harmonic_dim(spec.n, l),
    })
}

/// Dimension of the space of degree-`l` spherical harmonics on the unit
/// sphere in `R^n`: the multiplicity of the Laplace–Beltrami eigenvalue
/// `l (l + n - 2)`. In particular it is 1 for `l = 0`, `n` for `l = 1`, and
/// 2 for every `l >= 1` when `n = 2`.
pub fn spherical_harmonic_dim(n: u32, l: usize) -> usize {
    if l == 0 {
        return 1;
    }
    let n = n as usize;
    if n == 2 {
        return 2;
    }
    let first = binomial(n + l - 1, l);
    let second = if l >= 2 { binomial(n + l - 3, l - 2) } else { 0 };
    (first - second) as usize
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

/// Radial factor of the annulus eigenfunctions,
/// `r^l + l R1^(2l+n-2) / ((l + n - 2) r^(l+n-2))`; its derivative vanishes
/// at `r = R1` (the Neumann condition on the hole).
pub fn radial_part(spec: &AnnulusSpec, l: usize, r: f64) -> Result<f64, ClosedFormError> {
    check_radial_args(spec, l, r)?;
    let nf = f64::from(spec.n);
    let lf = l as f64;
    let inner_pow = spec.r1.powi(2 * l as i32 + spec.n as i32 - 2);
    Ok(r.powi(l as i32) + lf * inner_pow / ((lf + nf - 2.0) * r.powi(l as i32 + spec.n as i32 - 2)))
}

/// Analytic derivative of [`radial_part`] with respect to `r`.
pub fn radial_part_derivative(spec: &AnnulusSpec, l: usize, r: f64) -> Result<f64, ClosedFormError> {
    check_radial_args(spec, l, r)?;
    let lf = l as f64;
    let inner_pow = spec.r1.powi(2 * l as i32 + spec.n as i32 - 2);
    Ok(lf * r.powi(l as i32 - 1) - lf * inner_pow / r.powi(l as i32 + spec.n as i32 - 1))
}

fn check_radial_args(spec: &AnnulusSpec, l: usize, r: f64) -> Result<(), ClosedFormError> {
    if !spec.is_concentric() {
        return Err(ClosedFormError::NotConcentric(spec.offset));
    }
    if l == 0 {
        return Err(ClosedFormError::IndexZero);
    }
    if l > MAX_HARMONIC_INDEX {
        return Err(ClosedFormError::IndexTooLarge(l));
    }
    let slack = 1e-12 * spec.r2;
    if r < spec.r1 - slack || r > spec.r2 + slack {
        return Err(ClosedFormError::RadiusOutsideAnnulus {
            r,
            r1: spec.r1,
            r2: spec.r2,
        });
    }
    Ok(())
}

/// First-eigenspace eigenfunction in Cartesian coordinates,
/// `u_n^i(x) = (r + R1^n / ((n-1) r^(n-1))) x_i / r`, antisymmetric under
/// `x_i -> -x_i`.
pub fn eigenfunction_cartesian(
    spec: &AnnulusSpec,
    axis: usize,
    point: &[f64],
) -> Result<f64, ClosedFormError> {
    if point.len() != spec.n as usize {
        return Err(ClosedFormError::WrongPointDimension {
            got: point.len(),
            expected: spec.n,
        });
    }
    if axis == 0 || axis > spec.n as usize {
        return Err(ClosedFormError::AxisOutOfRange {
            axis,
            n: spec.n,
        });
    }
    let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    let slack = 1e-12 * spec.r2;
    if r < spec.r1 - slack || r > spec.r2 + slack {
        return Err(ClosedFormError::PointOutsideAnnulus {
            r,
            r1: spec.r1,
            r2: spec.r2,
        });
    }
    let radial = radial_part(spec, 1, r.clamp(spec.r1, spec.r2))?;
    Ok(radial * point[axis - 1] / r)
}

/// First non-trivial Steklov eigenvalue of a ball of radius `R`: `1 / R`.
pub fn sigma_1_ball(radius: f64) -> Result<f64, ClosedFormError> {
    if !(radius > 0.0) {
        return Err(ClosedFormError::NonPositiveRadius(radius));
    }
    Ok(1.0 / radius)
}

/// Wallis integral `I_k = int_0^pi sin^k t dt` by the recursion
/// `I_k = (k-1)/k I_{k-2}` with `I_0 = pi`, `I_1 = 2`.
pub fn wallis_integral(k: usize) -> f64 {
    let mut even = std::f64::consts::PI;
    let mut odd = 2.0;
    if k == 0 {
        return even;
    }
    if k == 1 {
        return odd;
    }
    for j in 2..=k {
        let jf = j as f64;
        if j % 2 == 0 {
            even *= (jf - 1.0) / jf;
        } else {
            odd *= (jf - 1.0) / jf;
        }
    }
    if k % 2 == 0 {
        even
    } else {
        odd
    }
}
