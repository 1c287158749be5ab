//! Planar domains and their boundary discretizations.
//!
//! Outer boundaries are polar graphs about the hole center: either a
//! trigonometric polynomial `rho(theta)` (star-shaped by construction) or an
//! eccentric circle, which is also a polar graph through the closed-form
//! distance `R_d(theta) = d cos(theta) + sqrt(R2^2 - d^2 sin^2(theta))`.
//! Closed curves are sampled equispaced in angle with periodic-trapezoid
//! arclength weights, which is spectrally accurate on smooth curves.

use nalgebra::{Point2, Vector2};
use thiserror::Error;

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Grid density for scanning polar curves (extrema, positivity, convexity).
pub(crate) const DENSE_SCAN: usize = 4096;

const MIN_BOUNDARY_SAMPLES: usize = 16;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(u32),
    #[error("need r2 > r1 > 0, got r1 = {r1}, r2 = {r2}")]
    InvalidRadii { r1: f64, r2: f64 },
    #[error("offset must satisfy 0 <= d < r2 - r1, got d = {d}, r2 - r1 = {gap}")]
    InvalidOffset { d: f64, gap: f64 },
    #[error("boundary needs at least {MIN_BOUNDARY_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("boundary sample count must be even, got {0}")]
    OddSampleCount(usize),
    #[error("polar radius must stay positive; rho({theta}) = {rho}")]
    NonPositiveRho { theta: f64, rho: f64 },
    #[error("hole of radius {r1} is not strictly inside the outer curve (min rho = {rho_min})")]
    HoleNotInside { r1: f64, rho_min: f64 },
    #[error("operation requires a planar (n = 2) annulus, got n = {0}")]
    PlanarOnly(u32),
    #[error("profile must satisfy h(0) = 0, got h(0) = {0}")]
    ProfileNotVanishing(f64),
    #[error("profile must be strictly increasing on [0, {0}]")]
    ProfileNotIncreasing(f64),
    #[error("profile must satisfy h'(0) = 1, got slope {0}")]
    ProfileBadSlope(f64),
}

/// Concentric or eccentric spherical-shell geometry in dimension `n`: the
/// inner ball of radius `r1` sits at the origin, the outer ball of radius
/// `r2` is centered `offset` away from it. `offset = 0` is the concentric
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub n: u32,
    pub r1: f64,
    pub r2: f64,
    pub offset: f64,
}

impl AnnulusSpec {
    pub fn new(n: u32, r1: f64, r2: f64, offset: f64) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n));
        }
        if !(r1 > 0.0 && r2 > r1) {
            return Err(GeometryError::InvalidRadii { r1, r2 });
        }
        let gap = r2 - r1;
        if !(0.0..gap).contains(&offset) {
            return Err(GeometryError::InvalidOffset { d: offset, gap });
        }
        Ok(Self { n, r1, r2, offset })
    }

    pub fn concentric(n: u32, r1: f64, r2: f64) -> Result<Self, GeometryError> {
        Self::new(n, r1, r2, 0.0)
    }

    pub fn is_concentric(&self) -> bool {
        self.offset == 0.0
    }
}

/// Orientation of a discretized curve: `Outward` normals point away from the
/// enclosed region, `Hole` normals point into the hole (the outward normal of
/// a domain whose boundary component encloses the hole).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Outward,
    Hole,
}

/// A closed planar curve sampled for boundary quadrature: ordered points,
/// unit outward normals, and arclength weights summing to the perimeter.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub points: Vec<Point>,
    pub normals: Vec<Vector>,
    pub weights: Vec<f64>,
    pub orientation: Orientation,
}

impl BoundaryCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn translated(&self, shift: Vector) -> Self {
        Self {
            points: self.points.iter().map(|p| p + shift).collect(),
            normals: self.normals.clone(),
            weights: self.weights.clone(),
            orientation: self.orientation,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x * factor, p.y * factor))
                .collect(),
            normals: self.normals.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            orientation: self.orientation,
        }
    }
}

/// A star-shaped polar graph `rho(theta) = c0 + sum_k (a_k cos k theta
/// + b_k sin k theta)`, positive on a dense scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StarPolarCurve {
    c0: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl StarPolarCurve {
    pub fn new(
        c0: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let curve = Self {
            c0,
            cos_coeffs,
            sin_coeffs,
        };
        for j in 0..DENSE_SCAN {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / DENSE_SCAN as f64;
            let rho = curve.rho(theta);
            if !(rho > 0.0) {
                return Err(GeometryError::NonPositiveRho { theta, rho });
            }
        }
        Ok(curve)
    }

    pub fn circle(radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        Self::new(radius, Vec::new(), Vec::new())
    }

    pub fn rho(&self, theta: f64) -> f64 {
        let mut value = self.c0;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            value += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            value += b * ((k + 1) as f64 * theta).sin();
        }
        value
    }

    pub fn rho_prime(&self, theta: f64) -> f64 {
        let mut value = 0.0;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            value -= a * kf * (kf * theta).sin();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            value += b * kf * (kf * theta).cos();
        }
        value
    }

    pub fn rho_second(&self, theta: f64) -> f64 {
        let mut value = 0.0;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            value -= a * kf * kf * (kf * theta).cos();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            value -= b * kf * kf * (kf * theta).sin();
        }
        value
    }

    fn is_constant(&self) -> bool {
        self.cos_coeffs.iter().all(|&a| a == 0.0) && self.sin_coeffs.iter().all(|&b| b == 0.0)
    }
}

/// An outer boundary given as a polar graph about the hole center. Eccentric
/// circles share the same code path through the closed-form radial distance.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarCurve {
    Star(StarPolarCurve),
    /// Circle of radius `r2` whose center is offset by `d` along the +x axis.
    Eccentric { r2: f64, d: f64 },
}

impl PolarCurve {
    pub fn circle(radius: f64) -> Result<Self, GeometryError> {
        Ok(Self::Star(StarPolarCurve::circle(radius)?))
    }

    pub fn eccentric(r2: f64, d: f64) -> Result<Self, GeometryError> {
        if !(r2 > 0.0) {
            return Err(GeometryError::NonPositiveRadius(r2));
        }
        if !(0.0..r2).contains(&d) {
            return Err(GeometryError::InvalidOffset { d, gap: r2 });
        }
        Ok(Self::Eccentric { r2, d })
    }

    pub fn rho(&self, theta: f64) -> f64 {
        match self {
            Self::Star(curve) => curve.rho(theta),
            Self::Eccentric { r2, d } => {
                let s = (r2 * r2 - d * d * theta.sin().powi(2)).sqrt();
                d * theta.cos() + s
            }
        }
    }

    pub fn rho_prime(&self, theta: f64) -> f64 {
        match self {
            Self::Star(curve) => curve.rho_prime(theta),
            Self::Eccentric { r2, d } => {
                let s = (r2 * r2 - d * d * theta.sin().powi(2)).sqrt();
                -d * theta.sin() * (d * theta.cos() + s) / s
            }
        }
    }

    pub fn rho_second(&self, theta: f64) -> f64 {
        match self {
            Self::Star(curve) => curve.rho_second(theta),
            Self::Eccentric { r2, d } => {
                let (sin, cos) = theta.sin_cos();
                let s = (r2 * r2 - d * d * sin * sin).sqrt();
                let s_prime = -d * d * sin * cos / s;
                -d * cos - d * d * ((cos * cos - sin * sin) / s - sin * cos * s_prime / (s * s))
            }
        }
    }

    pub fn min_rho(&self) -> f64 {
        self.scan().0
    }

    pub fn max_rho(&self) -> f64 {
        self.scan().1
    }

    /// `a = max (rho'/rho)^2` over a dense grid; zero exactly for circles
    /// about the center.
    pub fn star_constant(&self) -> f64 {
        if let Self::Star(curve) = self {
            if curve.is_constant() {
                return 0.0;
            }
        }
        self.scan().2
    }

    fn scan(&self) -> (f64, f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut a = 0.0f64;
        for j in 0..DENSE_SCAN {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / DENSE_SCAN as f64;
            let rho = self.rho(theta);
            let slope = self.rho_prime(theta) / rho;
            min = min.min(rho);
            max = max.max(rho);
            a = a.max(slope * slope);
        }
        (min, max, a)
    }

    /// Enclosed area by the polar formula `1/2 int rho^2`.
    pub fn area(&self) -> f64 {
        let dtheta = 2.0 * std::f64::consts::PI / DENSE_SCAN as f64;
        (0..DENSE_SCAN)
            .map(|j| {
                let rho = self.rho(j as f64 * dtheta);
                0.5 * rho * rho * dtheta
            })
            .sum()
    }

    /// Perimeter by dense periodic-trapezoid quadrature of the arclength
    /// element `sqrt(rho^2 + rho'^2)`.
    pub fn perimeter(&self) -> f64 {
        self.perimeter_with(DENSE_SCAN)
    }

    pub fn perimeter_with(&self, samples: usize) -> f64 {
        let dtheta = 2.0 * std::f64::consts::PI / samples as f64;
        (0..samples)
            .map(|j| {
                let theta = j as f64 * dtheta;
                let rho = self.rho(theta);
                let rp = self.rho_prime(theta);
                (rho * rho + rp * rp).sqrt() * dtheta
            })
            .sum()
    }

    /// Convexity of the enclosed region: the polar curvature numerator
    /// `rho^2 + 2 rho'^2 - rho rho''` must be nonnegative. A tiny relative
    /// tolerance admits curves with isolated flat points.
    pub fn is_convex(&self) -> bool {
        let mut min = f64::INFINITY;
        let mut scale = 0.0f64;
        for j in 0..DENSE_SCAN {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / DENSE_SCAN as f64;
            let rho = self.rho(theta);
            let rp = self.rho_prime(theta);
            let rpp = self.rho_second(theta);
            let g = rho * rho + 2.0 * rp * rp - rho * rpp;
            min = min.min(g);
            scale = scale.max(g.abs());
        }
        min > -1e-10 * scale
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Star(curve) => Self::Star(StarPolarCurve {
                c0: curve.c0 * factor,
                cos_coeffs: curve.cos_coeffs.iter().map(|a| a * factor).collect(),
                sin_coeffs: curve.sin_coeffs.iter().map(|b| b * factor).collect(),
            }),
            Self::Eccentric { r2, d } => Self::Eccentric {
                r2: r2 * factor,
                d: d * factor,
            },
        }
    }
}

/// Discretize a circle with `m` equispaced samples. Weights are the periodic
/// trapezoid rule `2 pi radius / m`; normals are radial from the circle
/// center, flipped for hole boundaries.
pub fn discretize_circle(
    center: Point,
    radius: f64,
    m: usize,
    orientation: Orientation,
) -> Result<BoundaryCurve, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    check_sample_count(m)?;
    let sign = match orientation {
        Orientation::Outward => 1.0,
        Orientation::Hole => -1.0,
    };
    let mut points = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    let weight = 2.0 * std::f64::consts::PI * radius / m as f64;
    for j in 0..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let (sin, cos) = theta.sin_cos();
        points.push(Point::new(center.x + radius * cos, center.y + radius * sin));
        normals.push(Vector::new(sign * cos, sign * sin));
    }
    Ok(BoundaryCurve {
        points,
        normals,
        weights: vec![weight; m],
        orientation,
    })
}

/// Discretize a polar graph with `m` equispaced angles. The outward normal
/// comes from rotating the tangent; weights are `sqrt(rho^2 + rho'^2) *
/// 2 pi / m`.
pub fn discretize_polar(curve: &PolarCurve, m: usize) -> Result<BoundaryCurve, GeometryError> {
    check_sample_count(m)?;
    let mut points = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let dtheta = 2.0 * std::f64::consts::PI / m as f64;
    for j in 0..m {
        let theta = j as f64 * dtheta;
        let rho = curve.rho(theta);
        if !(rho > 0.0) {
            return Err(GeometryError::NonPositiveRho { theta, rho });
        }
        let rp = curve.rho_prime(theta);
        let (sin, cos) = theta.sin_cos();
        let speed = (rho * rho + rp * rp).sqrt();
        points.push(Point::new(rho * cos, rho * sin));
        normals.push(Vector::new(
            (rho * cos + rp * sin) / speed,
            (rho * sin - rp * cos) / speed,
        ));
        weights.push(speed * dtheta);
    }
    Ok(BoundaryCurve {
        points,
        normals,
        weights,
        orientation: Orientation::Outward,
    })
}

/// Discretize a star-shaped trigonometric-polynomial boundary.
pub fn discretize_star(curve: &StarPolarCurve, m: usize) -> Result<BoundaryCurve, GeometryError> {
    discretize_polar(&PolarCurve::Star(curve.clone()), m)
}

fn check_sample_count(m: usize) -> Result<(), GeometryError> {
    if m < MIN_BOUNDARY_SAMPLES {
        return Err(GeometryError::TooFewSamples(m));
    }
    if m % 2 != 0 {
        return Err(GeometryError::OddSampleCount(m));
    }
    Ok(())
}

/// A doubly connected planar domain: outer star-shaped boundary and an inner
/// circular hole of radius `r1` about `center`. Geometric constants are taken
/// over a dense scan of the outer curve.
#[derive(Debug, Clone)]
pub struct DoublyConnectedDomain {
    pub outer: BoundaryCurve,
    pub inner: BoundaryCurve,
    pub outer_curve: PolarCurve,
    pub center: Point,
    pub r1: f64,
    /// Largest concentric radius inscribed in the outer curve (min rho).
    pub inscribed_radius: f64,
    /// Smallest concentric radius circumscribing the outer curve (max rho).
    pub circumscribed_radius: f64,
    /// Star-shape angle constant `a = max (rho'/rho)^2`.
    pub star_constant: f64,
}

/// Assemble a doubly connected domain from an outer polar curve and a hole
/// radius, discretizing both boundary components.
pub fn build_domain(
    outer_curve: PolarCurve,
    r1: f64,
    m_out: usize,
    m_in: usize,
) -> Result<DoublyConnectedDomain, GeometryError> {
    if !(r1 > 0.0) {
        return Err(GeometryError::NonPositiveRadius(r1));
    }
    let (rho_min, rho_max, a) = outer_curve.scan();
    if r1 >= rho_min {
        return Err(GeometryError::HoleNotInside { r1, rho_min });
    }
    let outer = discretize_polar(&outer_curve, m_out)?;
    let inner = discretize_circle(Point::origin(), r1, m_in, Orientation::Hole)?;
    Ok(DoublyConnectedDomain {
        outer,
        inner,
        outer_curve,
        center: Point::origin(),
        r1,
        inscribed_radius: rho_min,
        circumscribed_radius: rho_max,
        star_constant: a,
    })
}

impl DoublyConnectedDomain {
    /// Planar realization of an annulus spec (`n = 2`), offset along +x.
    pub fn from_annulus(
        spec: &AnnulusSpec,
        m_out: usize,
        m_in: usize,
    ) -> Result<Self, GeometryError> {
        if spec.n != 2 {
            return Err(GeometryError::PlanarOnly(spec.n));
        }
        build_domain(
            PolarCurve::eccentric(spec.r2, spec.offset)?,
            spec.r1,
            m_out,
            m_in,
        )
    }

    /// Strict interior membership: between the hole and the outer curve.
    pub fn contains(&self, p: &Point) -> bool {
        let local = p - self.center;
        let r = local.norm();
        if r <= self.r1 {
            return false;
        }
        let theta = local.y.atan2(local.x);
        r < self.outer_curve.rho(theta)
    }

    /// Translate the whole domain (both curves and the center).
    pub fn translated(&self, shift: Vector) -> Self {
        Self {
            outer: self.outer.translated(shift),
            inner: self.inner.translated(shift),
            outer_curve: self.outer_curve.clone(),
            center: self.center + shift,
            r1: self.r1,
            inscribed_radius: self.inscribed_radius,
            circumscribed_radius: self.circumscribed_radius,
            star_constant: self.star_constant,
        }
    }

    /// Scale the whole domain about its center by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            outer: self.outer.scaled(factor),
            inner: self.inner.scaled(factor),
            outer_curve: self.outer_curve.scaled(factor),
            center: self.center,
            r1: self.r1 * factor,
            inscribed_radius: self.inscribed_radius * factor,
            circumscribed_radius: self.circumscribed_radius * factor,
            star_constant: self.star_constant,
        }
    }

    /// Rebuild with different boundary sample counts.
    pub fn with_resolution(&self, m_out: usize, m_in: usize) -> Result<Self, GeometryError> {
        let rebuilt = build_domain(self.outer_curve.clone(), self.r1, m_out, m_in)?;
        let shift = self.center - Point::origin();
        Ok(rebuilt.translated(shift))
    }
}

/// A simply connected domain bounded by a single polar graph; used for the
/// classical Steklov problem on the outer region alone.
#[derive(Debug, Clone)]
pub struct SimpleDomain {
    pub boundary: BoundaryCurve,
    pub curve: PolarCurve,
    pub center: Point,
}

pub fn build_simple_domain(curve: PolarCurve, m: usize) -> Result<SimpleDomain, GeometryError> {
    let boundary = discretize_polar(&curve, m)?;
    Ok(SimpleDomain {
        boundary,
        curve,
        center: Point::origin(),
    })
}

impl SimpleDomain {
    pub fn contains(&self, p: &Point) -> bool {
        let local = p - self.center;
        let r = local.norm();
        let theta = local.y.atan2(local.x);
        r < self.curve.rho(theta)
    }

    pub fn circumscribed_radius(&self) -> f64 {
        self.curve.max_rho()
    }
}

/// Profile of a metric of revolution `dr^2 + h(r)^2 g_sphere`: `h(0) = 0`,
/// `h'(0) = 1`, strictly increasing on `[0, length]`. Only enters eigenvalue
/// bounds through ratios `h(R)^(n-1)`.
pub struct RevolutionProfile {
    h: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub length: f64,
    pub dim: u32,
}

impl std::fmt::Debug for RevolutionProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RevolutionProfile")
            .field("length", &self.length)
            .field("dim", &self.dim)
            .finish()
    }
}

impl RevolutionProfile {
    pub fn new<F>(h: F, length: f64, dim: u32) -> Result<Self, GeometryError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(length > 0.0) {
            return Err(GeometryError::NonPositiveRadius(length));
        }
        if dim < 2 {
            return Err(GeometryError::DimensionTooSmall(dim));
        }
        let at_zero = h(0.0);
        if at_zero.abs() > 1e-12 {
            return Err(GeometryError::ProfileNotVanishing(at_zero));
        }
        let samples = 512;
        let mut prev = at_zero;
        for j in 1..=samples {
            let value = h(length * j as f64 / samples as f64);
            if value <= prev {
                return Err(GeometryError::ProfileNotIncreasing(length));
            }
            prev = value;
        }
        let step = 1e-6 * length;
        let slope = (h(step) - at_zero) / step;
        if (slope - 1.0).abs() > 1e-4 {
            return Err(GeometryError::ProfileBadSlope(slope));
        }
        Ok(Self {
            h: Box::new(h),
            length,
            dim,
        })
    }

    /// The Euclidean profile `h(r) = r`.
    pub fn euclidean(length: f64, dim: u32) -> Self {
        Self::new(|r| r, length, dim).expect("euclidean profile is valid")
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.h)(r)
    }

    pub fn is_euclidean_like(&self) -> bool {
        let samples = 64;
        (0..=samples).all(|j| {
            let r = self.length * j as f64 / samples as f64;
            (self.eval(r) - r).abs() <= 1e-12 * self.length
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_perimeter_is_exact() {
        let curve = discretize_circle(Point::origin(), 1.0, 64, Orientation::Outward).unwrap();
        assert_abs_diff_eq!(curve.perimeter(), 2.0 * PI, epsilon = 1e-12);
        let curve = discretize_circle(Point::origin(), 3.5, 32, Orientation::Outward).unwrap();
        assert_abs_diff_eq!(curve.perimeter(), 7.0 * PI, epsilon = 1e-12 * 7.0 * PI);
    }

    #[test]
    fn circle_normals_are_radial() {
        let curve = discretize_circle(Point::origin(), 2.0, 64, Orientation::Outward).unwrap();
        for (p, nrm) in curve.points.iter().zip(&curve.normals) {
            let radial = p.coords / p.coords.norm();
            assert!((nrm - radial).norm() < 1e-14);
            assert_abs_diff_eq!(nrm.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hole_orientation_flips_normals() {
        let curve = discretize_circle(Point::origin(), 1.0, 32, Orientation::Hole).unwrap();
        for (p, nrm) in curve.points.iter().zip(&curve.normals) {
            assert!(nrm.dot(&p.coords) < 0.0);
        }
    }

    #[test]
    fn eccentric_circle_matches_radial_distance_closed_form() {
        // Distance from the origin to a point of the offset circle, as a
        // function of the angle between the point and the center direction.
        let d = 0.5;
        let r2 = 2.0;
        let center = Point::new(0.0, d);
        let curve = discretize_circle(center, r2, 128, Orientation::Outward).unwrap();
        let center_dir = Vector::new(0.0, 1.0);
        let mut worst = 0.0f64;
        for p in &curve.points {
            let r = p.coords.norm();
            let cos_t1 = p.coords.dot(&center_dir) / r;
            let sin_sq = (1.0 - cos_t1 * cos_t1).max(0.0);
            let closed = d * cos_t1 + (r2 * r2 - d * d * sin_sq).sqrt();
            worst = worst.max((closed - r).abs());
        }
        assert!(worst <= 1e-12, "max deviation {worst}");
    }

    #[test]
    fn eccentric_polar_curve_agrees_with_circle_samples() {
        let curve = PolarCurve::eccentric(2.0, 0.7).unwrap();
        let boundary = discretize_polar(&curve, 64).unwrap();
        // Every sampled point must lie on the circle |p - (d, 0)| = r2.
        for p in &boundary.points {
            let dist = (p - Point::new(0.7, 0.0)).norm();
            assert_abs_diff_eq!(dist, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eccentric_rho_derivative_matches_finite_differences() {
        let curve = PolarCurve::eccentric(2.0, 0.8).unwrap();
        let h = 1e-6;
        for j in 0..37 {
            let theta = 2.0 * PI * j as f64 / 37.0;
            let fd = (curve.rho(theta + h) - curve.rho(theta - h)) / (2.0 * h);
            assert_abs_diff_eq!(curve.rho_prime(theta), fd, epsilon = 1e-7);
            let fd2 = (curve.rho_prime(theta + h) - curve.rho_prime(theta - h)) / (2.0 * h);
            assert_abs_diff_eq!(curve.rho_second(theta), fd2, epsilon = 1e-6);
        }
    }

    #[test]
    fn constant_polar_graph_is_a_circle() {
        let star = StarPolarCurve::circle(1.0).unwrap();
        let a = discretize_star(&star, 128).unwrap();
        let b = discretize_circle(Point::origin(), 1.0, 128, Orientation::Outward).unwrap();
        for i in 0..a.len() {
            assert!((a.points[i] - b.points[i]).norm() < 1e-14);
            assert!((a.normals[i] - b.normals[i]).norm() < 1e-14);
            assert_abs_diff_eq!(a.weights[i], b.weights[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn star_perimeter_self_converges() {
        let star = StarPolarCurve::new(1.0, vec![0.0, 0.3], vec![]).unwrap();
        let curve = PolarCurve::Star(star.clone());
        let coarse = discretize_star(&star, 256).unwrap().perimeter();
        let reference = curve.perimeter_with(4096);
        assert!(
            (coarse - reference).abs() <= 1e-10 * reference,
            "coarse {coarse} vs reference {reference}"
        );
    }

    #[test]
    fn normal_slant_is_bounded_by_star_constant() {
        let star = StarPolarCurve::new(1.0, vec![0.0, 0.3], vec![]).unwrap();
        let curve = PolarCurve::Star(star.clone());
        let a = curve.star_constant();
        let boundary = discretize_star(&star, 512).unwrap();
        for (p, nrm) in boundary.points.iter().zip(&boundary.normals) {
            let radial = p.coords / p.coords.norm();
            let cos = nrm.dot(&radial);
            let tan_sq = (1.0 - cos * cos) / (cos * cos);
            assert!(tan_sq <= a + 1e-10, "tan^2 = {tan_sq}, a = {a}");
        }
    }

    #[test]
    fn star_constant_zero_iff_circle() {
        assert_eq!(PolarCurve::circle(2.0).unwrap().star_constant(), 0.0);
        let wavy = PolarCurve::Star(StarPolarCurve::new(1.0, vec![0.1], vec![]).unwrap());
        assert!(wavy.star_constant() > 0.0);
    }

    #[test]
    fn build_domain_concentric_constants() {
        let domain = build_domain(PolarCurve::eccentric(2.0, 0.0).unwrap(), 1.0, 64, 64).unwrap();
        assert_abs_diff_eq!(domain.inscribed_radius, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(domain.circumscribed_radius, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(domain.star_constant, 0.0, epsilon = 1e-20);
    }

    #[test]
    fn build_domain_eccentric_constants() {
        let domain = build_domain(PolarCurve::eccentric(2.0, 0.5).unwrap(), 1.0, 64, 64).unwrap();
        // Extremes of d cos t + sqrt(r2^2 - d^2 sin^2 t) at t = 0 and t = pi.
        assert_abs_diff_eq!(domain.inscribed_radius, 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(domain.circumscribed_radius, 2.5, epsilon = 1e-6);
    }

    #[test]
    fn build_domain_star_constants() {
        let star = StarPolarCurve::new(1.5, vec![0.0, 0.0, 0.2], vec![]).unwrap();
        let domain = build_domain(PolarCurve::Star(star), 0.5, 64, 64).unwrap();
        assert_abs_diff_eq!(domain.inscribed_radius, 1.3, epsilon = 1e-6);
        assert_abs_diff_eq!(domain.circumscribed_radius, 1.7, epsilon = 1e-6);
    }

    #[test]
    fn membership_between_curves() {
        let domain = build_domain(PolarCurve::eccentric(2.0, 0.3).unwrap(), 1.0, 64, 64).unwrap();
        for (inner, outer) in domain.inner.points.iter().zip(&domain.outer.points) {
            let mid = Point::new(0.5 * (inner.x + outer.x), 0.5 * (inner.y + outer.y));
            assert!(domain.contains(&mid), "midpoint {mid:?} should be inside");
            assert!(!domain.contains(inner), "hole boundary is not interior");
        }
        assert!(!domain.contains(&Point::origin()));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(discretize_circle(Point::origin(), -1.0, 64, Orientation::Outward).is_err());
        assert!(discretize_circle(Point::origin(), 1.0, 8, Orientation::Outward).is_err());
        assert!(discretize_circle(Point::origin(), 1.0, 33, Orientation::Outward).is_err());
        assert!(StarPolarCurve::new(1.0, vec![2.0], vec![]).is_err());
        assert!(build_domain(PolarCurve::eccentric(2.0, 0.0).unwrap(), 2.5, 64, 64).is_err());
        assert!(AnnulusSpec::new(2, 1.0, 2.0, 1.5).is_err());
        assert!(AnnulusSpec::new(2, 2.0, 1.0, 0.0).is_err());
        assert!(AnnulusSpec::new(1, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn translation_moves_points_and_center() {
        let domain = build_domain(PolarCurve::eccentric(2.0, 0.0).unwrap(), 1.0, 64, 64).unwrap();
        let shifted = domain.translated(Vector::new(0.7, -0.3));
        assert_abs_diff_eq!(shifted.center.x, 0.7, epsilon = 1e-15);
        assert!(shifted.contains(&Point::new(2.2, -0.3)));
        assert!(!shifted.contains(&Point::new(0.7, -0.3)));
    }

    #[test]
    fn profile_validation() {
        assert!(RevolutionProfile::new(|r| r, 1.0, 2).is_ok());
        assert!(RevolutionProfile::new(|r| r.sinh(), 1.0, 3).is_ok());
        assert!(RevolutionProfile::new(|r| r + 0.1, 1.0, 2).is_err());
        assert!(RevolutionProfile::new(|r| 2.0 * r, 1.0, 2).is_err());
        assert!(RevolutionProfile::new(|r| r * (1.0 - r), 2.0, 2).is_err());
        assert!(RevolutionProfile::euclidean(1.0, 2).is_euclidean_like());
        assert!(!RevolutionProfile::new(|r| r.sinh(), 1.0, 2)
            .unwrap()
            .is_euclidean_like());
    }

    proptest! {
        #[test]
        fn star_discretization_invariants(
            c0 in 1.0f64..3.0,
            a1 in -0.2f64..0.2,
            a2 in -0.2f64..0.2,
            b1 in -0.2f64..0.2,
        ) {
            let star = StarPolarCurve::new(c0, vec![a1, a2], vec![b1]).unwrap();
            let boundary = discretize_star(&star, 128).unwrap();
            for nrm in &boundary.normals {
                prop_assert!((nrm.norm() - 1.0).abs() < 1e-12);
            }
            let perimeter = boundary.perimeter();
            let reference = PolarCurve::Star(star).perimeter_with(4096);
            prop_assert!((perimeter - reference).abs() < 1e-6 * reference);
        }
    }
}
