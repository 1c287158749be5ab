//! Trefftz–Galerkin solver for planar mixed Steklov problems.
//!
//! The trial space consists of functions harmonic on the computational
//! domain: the constant, a scaled logarithm, and positive/negative circular
//! harmonics about the hole center (negative powers and the logarithm are
//! dropped for simply connected domains). Because every member is harmonic,
//! the Dirichlet energy reduces to boundary flux quadrature and the discrete
//! problem is a symmetric pencil `K c = mu M c` with `M` the mass of the
//! traces on the spectral boundary. The Neumann condition on the hole is
//! natural in the weak form; its violation is surfaced as a flux-residual
//! diagnostic rather than enforced by collocation.

use crate::geometry::{
    BoundaryCurve, DoublyConnectedDomain, GeometryError, Point, PolarCurve, SimpleDomain, Vector,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("boundary quadrature underresolved: stiffness asymmetry {asymmetry:e} exceeds 1e-6 * {norm:e}")]
    QuadratureUnderresolved { asymmetry: f64, norm: f64 },
    #[error("boundary mass matrix is numerically zero")]
    MassMatrixZero,
    #[error("no eigenvalue below {threshold:e} (smallest is {smallest:e}); the constant mode is missing, which signals an assembly bug")]
    MissingConstantMode { smallest: f64, threshold: f64 },
    #[error("pencil is indefinite beyond tolerance: smallest eigenvalue {0:e}")]
    IndefinitePencil(f64),
    #[error("{count} zero-energy directions found where only the constant member is expected")]
    DegenerateEnergyKernel { count: usize },
    #[error("mode index {mode} out of range ({count} modes)")]
    ModeOutOfRange { mode: usize, count: usize },
    #[error("evaluation point ({x}, {y}) lies outside the closed domain")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("weights length {weights} does not match mode count {modes}")]
    CombinationMismatch { weights: usize, modes: usize },
}

/// Which problem the pencil discretizes: the mixed problem (spectral
/// condition on the outer boundary, Neumann on the hole) or the classical
/// Steklov problem (spectral condition on the whole boundary).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMode {
    SteklovNeumann,
    Steklov,
}

/// Solver options. `m_out`/`m_in` override the boundary sample counts; when
/// absent the solver keeps the domain's discretization if it is at least as
/// fine as the default `16 N`, and refines it otherwise.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Truncation order `N` of the harmonic basis.
    pub basis_order: usize,
    pub m_out: Option<usize>,
    pub m_in: Option<usize>,
    /// Relative threshold below which mass-matrix eigendirections are
    /// discarded (the pencil's infinite eigenvalues).
    pub tau_mass: f64,
    /// Relative factor in the zero-mode threshold `tau_0 = tau_zero * |K|/|M|`.
    pub tau_zero: f64,
    pub mode: SpectralMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            basis_order: 24,
            m_out: None,
            m_in: None,
            tau_mass: 1e-12,
            tau_zero: 1e-8,
            mode: SpectralMode::SteklovNeumann,
        }
    }
}

impl SolverOptions {
    pub fn with_order(basis_order: usize) -> Self {
        Self {
            basis_order,
            ..Self::default()
        }
    }

    /// Default boundary sample count for the configured order.
    pub fn default_samples(&self) -> usize {
        16 * self.basis_order
    }

    fn samples_for(&self, requested: Option<usize>, existing: usize) -> usize {
        requested.unwrap_or_else(|| existing.max(self.default_samples()))
    }
}

/// Truncated harmonic trial space about `center`:
/// `{1, log(r/scale_in)} ∪ {(r/scale_out)^k cos k, (r/scale_out)^k sin k}
/// ∪ {(scale_in/r)^k cos k, (scale_in/r)^k sin k}` for `k = 1..=order`.
/// The log and negative powers are present only for doubly connected
/// domains. Scaling keeps boundary magnitudes O(1); raw powers destroy the
/// pencil's conditioning by order 15 or so.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub order: usize,
    pub scale_out: f64,
    pub scale_in: f64,
    pub include_negative: bool,
    pub center: Point,
}

impl HarmonicBasis {
    pub fn doubly_connected(order: usize, scale_out: f64, scale_in: f64, center: Point) -> Self {
        Self {
            order,
            scale_out,
            scale_in,
            include_negative: true,
            center,
        }
    }

    pub fn simply_connected(order: usize, scale_out: f64, center: Point) -> Self {
        Self {
            order,
            scale_out,
            scale_in: 1.0,
            include_negative: false,
            center,
        }
    }

    /// `4N + 2` members for doubly connected domains, `2N + 1` otherwise.
    pub fn dim(&self) -> usize {
        if self.include_negative {
            4 * self.order + 2
        } else {
            2 * self.order + 1
        }
    }

    /// Evaluate every member at `p` into `values` (length `dim()`).
    pub fn eval_into(&self, p: &Point, values: &mut [f64]) {
        debug_assert_eq!(values.len(), self.dim());
        let local = p - self.center;
        let r = local.norm();
        values[0] = 1.0;
        let (ct, st) = if r > 0.0 {
            (local.x / r, local.y / r)
        } else {
            (1.0, 0.0)
        };
        let mut idx = 1;
        if self.include_negative {
            values[1] = (r / self.scale_in).ln();
            idx = 2;
        }
        let tp = r / self.scale_out;
        let tn = self.scale_in / r;
        let mut pos = 1.0;
        let mut neg = 1.0;
        let mut ck = 1.0;
        let mut sk = 0.0;
        for _ in 1..=self.order {
            let c_next = ck * ct - sk * st;
            let s_next = sk * ct + ck * st;
            ck = c_next;
            sk = s_next;
            pos *= tp;
            values[idx] = pos * ck;
            values[idx + 1] = pos * sk;
            idx += 2;
            if self.include_negative {
                neg *= tn;
                values[idx] = neg * ck;
                values[idx + 1] = neg * sk;
                idx += 2;
            }
        }
    }

    /// Evaluate every member's gradient at `p` into `grads`.
    pub fn eval_gradient_into(&self, p: &Point, grads: &mut [Vector]) {
        debug_assert_eq!(grads.len(), self.dim());
        let local = p - self.center;
        let r = local.norm();
        grads[0] = Vector::zeros();
        if r == 0.0 {
            // Only reachable for simply connected bases; the k = 1 members
            // are linear, everything else has a vanishing gradient at the
            // center.
            debug_assert!(!self.include_negative);
            for g in grads.iter_mut().skip(1) {
                *g = Vector::zeros();
            }
            if self.order >= 1 {
                grads[1] = Vector::new(1.0 / self.scale_out, 0.0);
                grads[2] = Vector::new(0.0, 1.0 / self.scale_out);
            }
            return;
        }
        let ct = local.x / r;
        let st = local.y / r;
        let radial = Vector::new(ct, st);
        let angular = Vector::new(-st, ct);
        let mut idx = 1;
        if self.include_negative {
            grads[1] = radial / r;
            idx = 2;
        }
        let tp = r / self.scale_out;
        let tn = self.scale_in / r;
        let mut pos = 1.0;
        let mut neg = 1.0;
        let mut ck = 1.0;
        let mut sk = 0.0;
        for k in 1..=self.order {
            let c_next = ck * ct - sk * st;
            let s_next = sk * ct + ck * st;
            ck = c_next;
            sk = s_next;
            pos *= tp;
            let kf = k as f64;
            let amp_pos = kf * pos / r;
            grads[idx] = (radial * ck - angular * sk) * amp_pos;
            grads[idx + 1] = (radial * sk + angular * ck) * amp_pos;
            idx += 2;
            if self.include_negative {
                neg *= tn;
                let amp_neg = kf * neg / r;
                grads[idx] = (radial * ck + angular * sk) * (-amp_neg);
                grads[idx + 1] = (radial * (-sk) + angular * ck) * amp_neg;
                idx += 2;
            }
        }
    }
}

/// Assembled Dirichlet-energy matrix with its pre-symmetrization asymmetry.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix {
    pub matrix: DMatrix<f64>,
    /// Frobenius norm of `K - K^T` before symmetrization; decays spectrally
    /// with boundary resolution.
    pub asymmetry: f64,
}

/// Which boundary part carries the spectral mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassBoundary {
    /// Outer boundary only (mixed problem).
    Outer,
    /// The whole boundary (classical Steklov).
    Full,
}

/// `K_ij = int grad(phi_i) . grad(phi_j)`, reduced for harmonic members to
/// the boundary flux form `oint phi_i dphi_j/dnu ds` over both boundary
/// components, then symmetrized.
pub fn assemble_stiffness(
    domain: &DoublyConnectedDomain,
    basis: &HarmonicBasis,
) -> StiffnessMatrix {
    assemble_stiffness_curves(&[&domain.outer, &domain.inner], basis)
}

/// Trace Gram matrix of the basis on the selected boundary part.
pub fn assemble_boundary_mass(
    domain: &DoublyConnectedDomain,
    basis: &HarmonicBasis,
    which: MassBoundary,
) -> DMatrix<f64> {
    match which {
        MassBoundary::Outer => assemble_mass_curves(&[&domain.outer], basis),
        MassBoundary::Full => assemble_mass_curves(&[&domain.outer, &domain.inner], basis),
    }
}

pub fn assemble_stiffness_curves(
    curves: &[&BoundaryCurve],
    basis: &HarmonicBasis,
) -> StiffnessMatrix {
    let dim = basis.dim();
    let mut raw = DMatrix::zeros(dim, dim);
    let mut values = vec![0.0; dim];
    let mut grads = vec![Vector::zeros(); dim];
    for curve in curves {
        for ((p, normal), &w) in curve
            .points
            .iter()
            .zip(&curve.normals)
            .zip(&curve.weights)
        {
            basis.eval_into(p, &mut values);
            basis.eval_gradient_into(p, &mut grads);
            for (j, g) in grads.iter().enumerate() {
                let flux = g.dot(normal) * w;
                if flux == 0.0 {
                    continue;
                }
                for (i, &v) in values.iter().enumerate() {
                    raw[(i, j)] += v * flux;
                }
            }
        }
    }
    let asymmetry = (&raw - raw.transpose()).norm();
    let matrix = (&raw + raw.transpose()) * 0.5;
    StiffnessMatrix { matrix, asymmetry }
}

pub fn assemble_mass_curves(curves: &[&BoundaryCurve], basis: &HarmonicBasis) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut mass = DMatrix::zeros(dim, dim);
    let mut values = vec![0.0; dim];
    for curve in curves {
        for (p, &w) in curve.points.iter().zip(&curve.weights) {
            basis.eval_into(p, &mut values);
            for j in 0..dim {
                let vj = values[j] * w;
                if vj == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    mass[(i, j)] += values[i] * vj;
                }
            }
        }
    }
    // Symmetrize away rounding noise from the accumulation order.
    let transpose = mass.transpose();
    (mass + transpose) * 0.5
}

/// Raw output of the pencil eigensolve.
#[derive(Debug, Clone)]
pub struct PencilSolution {
    pub eigenvalues: Vec<f64>,
    /// Coefficient vectors (basis dimension x number of retained modes),
    /// normalized to unit mass `c^T M c = 1`.
    pub vectors: DMatrix<f64>,
    pub mass_rank: usize,
    pub dropped_directions: usize,
}

/// Relative energy cutoff below which trial directions are numerically
/// invisible; the constant member always falls under it.
const ENERGY_KERNEL_CUTOFF: f64 = 1e-12;

/// Solve `K c = mu M c` for the small end of the spectrum.
///
/// The mass matrix of a Trefftz basis is (near-)rank-deficient: on a
/// circular outer boundary, positive and negative harmonics of equal
/// frequency have proportional traces, so `M` has a large kernel whose
/// `M^(-1/2)` whitening would amplify rounding noise by many orders of
/// magnitude. The pencil is therefore solved in reversed form,
/// `M c = nu K c` with `nu = 1/mu`:
///
/// 1. the zero mode is identified in the energy kernel of `K` (the constant
///    member; its Rayleigh quotient must fall below
///    `tau_0 = tau_zero * |K|/|M|`, otherwise the assembly is broken);
/// 2. the trial space is restricted to the mass-orthogonal complement of
///    the constant — the subspace the nonzero modes actually live in, on
///    which `K` is positive definite;
/// 3. `K` is whitened there and `K^(-1/2) M K^(-1/2)`, whose norm is
///    `1/mu_1`, is densely eigendecomposed. Trace-free directions land
///    harmlessly at `nu ~ 0`; modes with `nu <= tau_mass * nu_max` carry no
///    mass on the spectral boundary (the pencil's infinite eigenvalues) and
///    are dropped from the report.
pub fn solve_pencil(
    stiffness: &StiffnessMatrix,
    mass: &DMatrix<f64>,
    opts: &SolverOptions,
) -> Result<PencilSolution, SolverError> {
    let k_norm = stiffness.matrix.norm();
    let m_norm = mass.norm();
    if stiffness.asymmetry > 1e-6 * k_norm {
        return Err(SolverError::QuadratureUnderresolved {
            asymmetry: stiffness.asymmetry,
            norm: k_norm,
        });
    }
    if !(m_norm > 0.0) {
        return Err(SolverError::MassMatrixZero);
    }
    let dim = mass.nrows();
    let tau0 = opts.tau_zero * (k_norm / m_norm);

    // Zero mode: the most massive direction in the energy kernel.
    let k_eig = SymmetricEigen::new(stiffness.matrix.clone());
    let kappa_max = k_eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let kernel_cut = ENERGY_KERNEL_CUTOFF * kappa_max;
    let mut constant: Option<(f64, DVector<f64>)> = None;
    for i in 0..dim {
        if k_eig.eigenvalues[i] > kernel_cut {
            continue;
        }
        let q = k_eig.eigenvectors.column(i);
        let q_mass = (q.transpose() * mass * q)[(0, 0)];
        if constant.as_ref().is_none_or(|(mass0, _)| q_mass > *mass0) {
            constant = Some((q_mass, q.into_owned()));
        }
    }
    let Some((constant_mass, constant)) = constant else {
        let smallest = k_eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        return Err(SolverError::MissingConstantMode {
            smallest,
            threshold: tau0,
        });
    };
    if !(constant_mass > 0.0) {
        return Err(SolverError::MassMatrixZero);
    }
    let mu0 = (constant.transpose() * &stiffness.matrix * &constant)[(0, 0)] / constant_mass;
    if mu0.abs() > tau0 {
        return Err(SolverError::MissingConstantMode {
            smallest: mu0,
            threshold: tau0,
        });
    }

    // Orthonormal basis of the mass-orthogonal complement of the constant:
    // the non-trivial columns of the Householder reflection sending e_0 to
    // the unit vector along M c_0.
    let m_c0 = mass * &constant;
    let m_c0 = &m_c0 / m_c0.norm();
    let mut reflector = m_c0.clone_owned();
    reflector[0] += if m_c0[0] >= 0.0 { 1.0 } else { -1.0 };
    let reflector = &reflector / reflector.norm();
    let mut complement = DMatrix::zeros(dim, dim - 1);
    for col in 1..dim {
        let mut column = DVector::zeros(dim);
        column[col] = 1.0;
        column -= &reflector * (2.0 * reflector[col]);
        complement.column_mut(col - 1).copy_from(&column);
    }

    let k_c = complement.transpose() * &stiffness.matrix * &complement;
    let k_c = (&k_c + k_c.transpose()) * 0.5;
    let m_c = complement.transpose() * mass * &complement;
    let m_c = (&m_c + m_c.transpose()) * 0.5;

    // Whiten the restricted energy; directions below the cutoff are
    // numerically invisible and dropped.
    let kc_eig = SymmetricEigen::new(k_c);
    let kept: Vec<usize> = (0..dim - 1)
        .filter(|&i| kc_eig.eigenvalues[i] > kernel_cut)
        .collect();
    if kept.is_empty() {
        return Err(SolverError::DegenerateEnergyKernel { count: dim - 1 });
    }
    let rank = kept.len();
    let mut whitener = DMatrix::zeros(dim - 1, rank);
    for (col, &i) in kept.iter().enumerate() {
        let scale = 1.0 / kc_eig.eigenvalues[i].sqrt();
        whitener
            .column_mut(col)
            .copy_from(&(kc_eig.eigenvectors.column(i) * scale));
    }
    let reduced = whitener.transpose() * &m_c * &whitener;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let nu_eig = SymmetricEigen::new(reduced);
    let nu_max = nu_eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    if !(nu_max > 0.0) {
        return Err(SolverError::MassMatrixZero);
    }
    let nu_min = nu_eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if nu_min < -1e-8 * nu_max {
        return Err(SolverError::IndefinitePencil(nu_min));
    }

    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&i, &j| nu_eig.eigenvalues[j].total_cmp(&nu_eig.eigenvalues[i]));
    let nu_floor = opts.tau_mass.max(f64::EPSILON) * nu_max;

    let mut eigenvalues = vec![mu0];
    let mut columns = vec![constant / constant_mass.sqrt()];
    for &i in &order {
        let nu = nu_eig.eigenvalues[i];
        if nu <= nu_floor {
            break;
        }
        eigenvalues.push(1.0 / nu);
        let coeff = &complement * (&whitener * nu_eig.eigenvectors.column(i));
        // K-whitened vectors have c^T M c = nu; renormalize to unit mass.
        columns.push(coeff / nu.sqrt());
    }
    let reported = eigenvalues.len();
    let mut vectors = DMatrix::zeros(dim, reported);
    for (col, coeff) in columns.iter().enumerate() {
        vectors.column_mut(col).copy_from(coeff);
    }
    Ok(PencilSolution {
        eigenvalues,
        vectors,
        mass_rank: reported,
        dropped_directions: dim - reported,
    })
}

/// Solver diagnostics carried along with a solution.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub mass_rank: usize,
    pub dropped_directions: usize,
    pub stiffness_asymmetry: f64,
    pub stiffness_norm: f64,
    /// Per-mode `max |du/dnu|` on the hole boundary relative to
    /// `max |u|` on the outer boundary; empty when there is no hole.
    pub gamma1_flux_residual: Vec<f64>,
    /// `|mu_1(N) - mu_1(N + 8)|` when a refinement solve was requested.
    pub self_convergence: Option<f64>,
}

#[derive(Debug, Clone)]
enum Region {
    Annular {
        curve: PolarCurve,
        r1: f64,
        center: Point,
    },
    Simple {
        curve: PolarCurve,
        center: Point,
    },
}

impl Region {
    fn contains_closed(&self, p: &Point) -> bool {
        const SLACK: f64 = 1e-9;
        match self {
            Region::Annular { curve, r1, center } => {
                let local = p - center;
                let r = local.norm();
                let rho = curve.rho(local.y.atan2(local.x));
                r >= r1 * (1.0 - SLACK) && r <= rho * (1.0 + SLACK)
            }
            Region::Simple { curve, center } => {
                let local = p - center;
                let rho = curve.rho(local.y.atan2(local.x));
                local.norm() <= rho * (1.0 + SLACK)
            }
        }
    }
}

/// Eigenvalues, coefficient vectors, and diagnostics of one solve. The
/// first entry is the zero mode `mu_0`; `mu_1` sits at index 1.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub coefficients: DMatrix<f64>,
    pub basis: HarmonicBasis,
    pub diagnostics: SolveDiagnostics,
    region: Region,
}

/// Relative gap below which eigenvalues are grouped into one multiplicity
/// cluster for reporting.
pub const CLUSTER_RELATIVE_GAP: f64 = 1e-8;

impl EigenSolution {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn mode_coefficients(&self, k: usize) -> DVector<f64> {
        self.coefficients.column(k).into_owned()
    }

    /// Indices of the multiplicity cluster containing mode `k`.
    pub fn cluster_indices(&self, k: usize) -> std::ops::Range<usize> {
        let value = self.eigenvalues[k];
        let tol = CLUSTER_RELATIVE_GAP * value.abs().max(f64::MIN_POSITIVE);
        let mut lo = k;
        while lo > 0 && (self.eigenvalues[lo - 1] - value).abs() <= tol {
            lo -= 1;
        }
        let mut hi = k + 1;
        while hi < self.eigenvalues.len() && (self.eigenvalues[hi] - value).abs() <= tol {
            hi += 1;
        }
        lo..hi
    }

    pub fn multiplicity(&self, k: usize) -> usize {
        self.cluster_indices(k).len()
    }

    fn check_points(&self, points: &[Point]) -> Result<(), SolverError> {
        for p in points {
            if !self.region.contains_closed(p) {
                return Err(SolverError::PointOutsideDomain { x: p.x, y: p.y });
            }
        }
        Ok(())
    }

    /// Values of mode `k` at the given points (points must lie in the
    /// closed domain).
    pub fn evaluate_mode(&self, k: usize, points: &[Point]) -> Result<Vec<f64>, SolverError> {
        if k >= self.n_modes() {
            return Err(SolverError::ModeOutOfRange {
                mode: k,
                count: self.n_modes(),
            });
        }
        self.check_points(points)?;
        let coeffs = self.coefficients.column(k);
        let mut values = vec![0.0; self.basis.dim()];
        Ok(points
            .iter()
            .map(|p| {
                self.basis.eval_into(p, &mut values);
                values.iter().zip(coeffs.iter()).map(|(v, c)| v * c).sum()
            })
            .collect())
    }

    /// Values of a linear combination of modes, `sum_j weights[j] * u_{modes[j]}`.
    pub fn evaluate_combination(
        &self,
        modes: &[usize],
        weights: &[f64],
        points: &[Point],
    ) -> Result<Vec<f64>, SolverError> {
        if modes.len() != weights.len() {
            return Err(SolverError::CombinationMismatch {
                weights: weights.len(),
                modes: modes.len(),
            });
        }
        for &m in modes {
            if m >= self.n_modes() {
                return Err(SolverError::ModeOutOfRange {
                    mode: m,
                    count: self.n_modes(),
                });
            }
        }
        self.check_points(points)?;
        let dim = self.basis.dim();
        let mut combined = DVector::zeros(dim);
        for (&m, &w) in modes.iter().zip(weights) {
            combined += self.coefficients.column(m) * w;
        }
        let mut values = vec![0.0; dim];
        Ok(points
            .iter()
            .map(|p| {
                self.basis.eval_into(p, &mut values);
                values.iter().zip(combined.iter()).map(|(v, c)| v * c).sum()
            })
            .collect())
    }

    /// Analytic gradient of mode `k` at a point.
    pub fn gradient_mode(&self, k: usize, p: &Point) -> Result<Vector, SolverError> {
        if k >= self.n_modes() {
            return Err(SolverError::ModeOutOfRange {
                mode: k,
                count: self.n_modes(),
            });
        }
        self.check_points(std::slice::from_ref(p))?;
        let coeffs = self.coefficients.column(k);
        let mut grads = vec![Vector::zeros(); self.basis.dim()];
        self.basis.eval_gradient_into(p, &mut grads);
        let mut out = Vector::zeros();
        for (g, c) in grads.iter().zip(coeffs.iter()) {
            out += g * *c;
        }
        Ok(out)
    }
}

/// Solve the mixed problem on a doubly connected domain.
pub fn solve_steklov_neumann(
    domain: &DoublyConnectedDomain,
    opts: &SolverOptions,
) -> Result<EigenSolution, SolverError> {
    let m_out = opts.samples_for(opts.m_out, domain.outer.len());
    let m_in = opts.samples_for(opts.m_in, domain.inner.len());
    let domain = if m_out != domain.outer.len() || m_in != domain.inner.len() {
        domain.with_resolution(m_out, m_in)?
    } else {
        domain.clone()
    };
    let basis = HarmonicBasis::doubly_connected(
        opts.basis_order,
        domain.circumscribed_radius,
        domain.r1,
        domain.center,
    );
    let stiffness = assemble_stiffness(&domain, &basis);
    let mass = assemble_boundary_mass(&domain, &basis, MassBoundary::Outer);
    let pencil = solve_pencil(&stiffness, &mass, opts)?;

    let gamma1_flux_residual = flux_residuals(&pencil, &basis, &domain);
    Ok(EigenSolution {
        eigenvalues: pencil.eigenvalues,
        coefficients: pencil.vectors,
        region: Region::Annular {
            curve: domain.outer_curve.clone(),
            r1: domain.r1,
            center: domain.center,
        },
        diagnostics: SolveDiagnostics {
            mass_rank: pencil.mass_rank,
            dropped_directions: pencil.dropped_directions,
            stiffness_asymmetry: stiffness.asymmetry,
            stiffness_norm: stiffness.matrix.norm(),
            gamma1_flux_residual,
            self_convergence: None,
        },
        basis,
    })
}

/// Solve the classical Steklov problem on a simply connected domain.
pub fn solve_steklov(
    domain: &SimpleDomain,
    opts: &SolverOptions,
) -> Result<EigenSolution, SolverError> {
    let m = opts.samples_for(opts.m_out, domain.boundary.len());
    let domain = if m != domain.boundary.len() {
        crate::geometry::build_simple_domain(domain.curve.clone(), m)?
    } else {
        domain.clone()
    };
    let basis = HarmonicBasis::simply_connected(
        opts.basis_order,
        domain.circumscribed_radius(),
        domain.center,
    );
    let stiffness = assemble_stiffness_curves(&[&domain.boundary], &basis);
    let mass = assemble_mass_curves(&[&domain.boundary], &basis);
    let pencil = solve_pencil(&stiffness, &mass, opts)?;
    Ok(EigenSolution {
        eigenvalues: pencil.eigenvalues,
        coefficients: pencil.vectors,
        region: Region::Simple {
            curve: domain.curve.clone(),
            center: domain.center,
        },
        diagnostics: SolveDiagnostics {
            mass_rank: pencil.mass_rank,
            dropped_directions: pencil.dropped_directions,
            stiffness_asymmetry: stiffness.asymmetry,
            stiffness_norm: stiffness.matrix.norm(),
            gamma1_flux_residual: Vec::new(),
            self_convergence: None,
        },
        basis,
    })
}

/// Solve at order `N` and `N + 8`, recording `|mu_1(N) - mu_1(N+8)|` as the
/// self-convergence diagnostic on the returned (order `N`) solution.
pub fn solve_steklov_neumann_refined(
    domain: &DoublyConnectedDomain,
    opts: &SolverOptions,
) -> Result<EigenSolution, SolverError> {
    let mut base = solve_steklov_neumann(domain, opts)?;
    let finer_opts = SolverOptions {
        basis_order: opts.basis_order + 8,
        m_out: opts.m_out.map(|m| m.max(16 * (opts.basis_order + 8))),
        m_in: opts.m_in.map(|m| m.max(16 * (opts.basis_order + 8))),
        ..opts.clone()
    };
    let finer = solve_steklov_neumann(domain, &finer_opts)?;
    if base.n_modes() > 1 && finer.n_modes() > 1 {
        base.diagnostics.self_convergence = Some((base.mu(1) - finer.mu(1)).abs());
    }
    Ok(base)
}

fn flux_residuals(
    pencil: &PencilSolution,
    basis: &HarmonicBasis,
    domain: &DoublyConnectedDomain,
) -> Vec<f64> {
    let dim = basis.dim();
    let n_modes = pencil.vectors.ncols();
    let mut values = vec![0.0; dim];
    let mut grads = vec![Vector::zeros(); dim];
    let mut max_outer = vec![0.0f64; n_modes];
    for p in &domain.outer.points {
        basis.eval_into(p, &mut values);
        for (m, max) in max_outer.iter_mut().enumerate() {
            let u: f64 = values
                .iter()
                .zip(pencil.vectors.column(m).iter())
                .map(|(v, c)| v * c)
                .sum();
            *max = max.max(u.abs());
        }
    }
    let mut max_flux = vec![0.0f64; n_modes];
    for (p, normal) in domain.inner.points.iter().zip(&domain.inner.normals) {
        basis.eval_gradient_into(p, &mut grads);
        for (m, max) in max_flux.iter_mut().enumerate() {
            let flux: f64 = grads
                .iter()
                .zip(pencil.vectors.column(m).iter())
                .map(|(g, c)| g.dot(normal) * c)
                .sum();
            *max = max.max(flux.abs());
        }
    }
    max_flux
        .iter()
        .zip(&max_outer)
        .map(|(&f, &u)| if u > 0.0 { f / u } else { f64::INFINITY })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{eigenfunction_cartesian, mu_l_concentric};
    use crate::geometry::{build_domain, build_simple_domain, AnnulusSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn concentric_domain(m: usize) -> DoublyConnectedDomain {
        build_domain(PolarCurve::eccentric(2.0, 0.0).unwrap(), 1.0, m, m).unwrap()
    }

    fn test_basis(order: usize) -> HarmonicBasis {
        HarmonicBasis::doubly_connected(order, 2.0, 1.0, Point::origin())
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(test_basis(24).dim(), 98);
        assert_eq!(
            HarmonicBasis::simply_connected(24, 1.0, Point::origin()).dim(),
            49
        );
    }

    #[test]
    fn basis_members_are_harmonic() {
        // Five-point Laplacian stencil at interior points.
        let basis = test_basis(6);
        let dim = basis.dim();
        let h = 1e-4;
        let probes = [
            Point::new(1.3, 0.2),
            Point::new(-0.9, 1.1),
            Point::new(0.4, -1.5),
            Point::new(-1.2, -0.7),
        ];
        let mut center = vec![0.0; dim];
        let mut east = vec![0.0; dim];
        let mut west = vec![0.0; dim];
        let mut north = vec![0.0; dim];
        let mut south = vec![0.0; dim];
        for p in probes {
            basis.eval_into(&p, &mut center);
            basis.eval_into(&Point::new(p.x + h, p.y), &mut east);
            basis.eval_into(&Point::new(p.x - h, p.y), &mut west);
            basis.eval_into(&Point::new(p.x, p.y + h), &mut north);
            basis.eval_into(&Point::new(p.x, p.y - h), &mut south);
            for j in 0..dim {
                let laplacian =
                    (east[j] + west[j] + north[j] + south[j] - 4.0 * center[j]) / (h * h);
                assert!(
                    laplacian.abs() < 1e-6,
                    "member {j} at {p:?}: discrete Laplacian {laplacian}"
                );
            }
        }
    }

    #[test]
    fn basis_gradients_match_finite_differences() {
        let basis = test_basis(5);
        let dim = basis.dim();
        let h = 1e-6;
        let p = Point::new(1.1, -0.6);
        let mut grads = vec![Vector::zeros(); dim];
        basis.eval_gradient_into(&p, &mut grads);
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        basis.eval_into(&Point::new(p.x + h, p.y), &mut plus);
        basis.eval_into(&Point::new(p.x - h, p.y), &mut minus);
        for j in 0..dim {
            assert_abs_diff_eq!(grads[j].x, (plus[j] - minus[j]) / (2.0 * h), epsilon = 1e-8);
        }
        basis.eval_into(&Point::new(p.x, p.y + h), &mut plus);
        basis.eval_into(&Point::new(p.x, p.y - h), &mut minus);
        for j in 0..dim {
            assert_abs_diff_eq!(grads[j].y, (plus[j] - minus[j]) / (2.0 * h), epsilon = 1e-8);
        }
    }

    #[test]
    fn stiffness_constant_row_vanishes() {
        let domain = concentric_domain(256);
        let k = assemble_stiffness(&domain, &test_basis(8));
        let dim = k.matrix.nrows();
        for j in 0..dim {
            assert!(
                k.matrix[(0, j)].abs() < 1e-10,
                "K[0,{j}] = {}",
                k.matrix[(0, j)]
            );
            assert!(k.matrix[(j, 0)].abs() < 1e-10);
        }
    }

    #[test]
    fn stiffness_matches_analytic_annulus_energies() {
        // For R1 = 1, R2 = 2 and k = 1: the positive member (r/R2) cos t has
        // energy pi (R2^2 - R1^2) / R2^2, the negative member (R1/r) cos t
        // the same value, and their cross energy vanishes; the log member has
        // energy 2 pi log(R2/R1).
        let domain = concentric_domain(256);
        let basis = test_basis(4);
        let k = assemble_stiffness(&domain, &basis).matrix;
        let expected = PI * 3.0 / 4.0;
        let pos_cos = 2; // [const, log, pos-cos1, pos-sin1, neg-cos1, neg-sin1, ...]
        let neg_cos = 4;
        assert_abs_diff_eq!(k[(pos_cos, pos_cos)], expected, epsilon = 1e-10);
        assert_abs_diff_eq!(k[(neg_cos, neg_cos)], expected, epsilon = 1e-10);
        assert_abs_diff_eq!(k[(pos_cos, neg_cos)], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(k[(1, 1)], 2.0 * PI * 2.0f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn stiffness_asymmetry_decays_with_resolution() {
        let basis = test_basis(12);
        let coarse = assemble_stiffness(&concentric_domain(64), &basis).asymmetry;
        let fine = assemble_stiffness(&concentric_domain(128), &basis).asymmetry;
        // Trapezoid quadrature on trig polynomials is exact once resolved, so
        // both should be at rounding level; the fine one must not be worse.
        assert!(fine <= coarse.max(1e-12), "coarse {coarse}, fine {fine}");
        assert!(fine < 1e-10);
    }

    #[test]
    fn mass_matches_analytic_circle_integrals() {
        let domain = concentric_domain(256);
        let basis = test_basis(4);
        let m = assemble_boundary_mass(&domain, &basis, MassBoundary::Outer);
        // Constant member: the outer perimeter.
        assert_abs_diff_eq!(m[(0, 0)], 4.0 * PI, epsilon = 1e-12 * 4.0 * PI);
        // (r/R2)^k cos(kt) traces have mass pi R2 on the outer circle.
        for k in 1..=4usize {
            let idx = 2 + 4 * (k - 1);
            assert_abs_diff_eq!(m[(idx, idx)], 2.0 * PI, epsilon = 1e-12 * 2.0 * PI);
            // Orthogonality across different frequencies.
            for j in 1..k {
                let jdx = 2 + 4 * (j - 1);
                assert_abs_diff_eq!(m[(idx, jdx)], 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mass_is_positive_semidefinite() {
        let domain =
            build_domain(PolarCurve::eccentric(2.0, 0.6).unwrap(), 1.0, 256, 256).unwrap();
        let basis = test_basis(10);
        let m = assemble_boundary_mass(&domain, &basis, MassBoundary::Outer);
        let eig = SymmetricEigen::new(m);
        let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min >= -1e-12 * max, "min {min}, max {max}");
    }

    #[test]
    fn concentric_annulus_reproduces_closed_form() {
        let domain = concentric_domain(384);
        let opts = SolverOptions::default();
        let solution = solve_steklov_neumann(&domain, &opts).unwrap();
        assert!(solution.mu(0).abs() <= 1e-10, "mu_0 = {}", solution.mu(0));
        assert_abs_diff_eq!(solution.mu(1), 0.3, epsilon = 1e-8);
        assert!(solution.mu(2) - solution.mu(1) <= 1e-8);
        assert_eq!(solution.multiplicity(1), 2);
        // Higher closed-form eigenvalues for good measure.
        let spec = AnnulusSpec::concentric(2, 1.0, 2.0).unwrap();
        for l in 2..=5usize {
            let expected = mu_l_concentric(&spec, l).unwrap().value;
            let computed = solution.mu(2 * l - 1);
            assert!(
                (computed - expected).abs() <= 1e-8 * expected,
                "l = {l}: {computed} vs {expected}"
            );
        }
    }

    #[test]
    fn disk_reproduces_classical_steklov_spectrum() {
        let domain = build_simple_domain(PolarCurve::circle(1.0).unwrap(), 384).unwrap();
        let opts = SolverOptions {
            mode: SpectralMode::Steklov,
            ..SolverOptions::default()
        };
        let solution = solve_steklov(&domain, &opts).unwrap();
        assert!(solution.mu(0).abs() <= 1e-10);
        assert_abs_diff_eq!(solution.mu(1), 1.0, epsilon = 1e-9);
        assert_eq!(solution.multiplicity(1), 2);
        for k in 1..=5usize {
            let sigma = solution.mu(2 * k - 1);
            assert!(
                (sigma - k as f64).abs() <= 1e-8 * k as f64,
                "sigma_{k} = {sigma}"
            );
        }
    }

    #[test]
    fn eigenfunction_matches_cartesian_closed_form_after_alignment() {
        let domain = concentric_domain(384);
        let solution = solve_steklov_neumann(&domain, &SolverOptions::default()).unwrap();
        let spec = AnnulusSpec::concentric(2, 1.0, 2.0).unwrap();
        // Probe on the mid circle.
        let probe: Vec<Point> = (0..64)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 64.0;
                Point::new(1.5 * t.cos(), 1.5 * t.sin())
            })
            .collect();
        let exact: Vec<f64> = probe
            .iter()
            .map(|p| eigenfunction_cartesian(&spec, 1, &[p.x, p.y]).unwrap())
            .collect();
        let cluster = solution.cluster_indices(1);
        let mode_values: Vec<Vec<f64>> = cluster
            .clone()
            .map(|k| solution.evaluate_mode(k, &probe).unwrap())
            .collect();
        // Least-squares fit of the exact eigenfunction in the eigenspace.
        let mismatch = relative_ls_mismatch(&exact, &mode_values);
        assert!(mismatch <= 1e-6, "relative mismatch {mismatch}");
    }

    fn relative_ls_mismatch(target: &[f64], span: &[Vec<f64>]) -> f64 {
        let n = target.len();
        let k = span.len();
        let mut gram = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DVector::<f64>::zeros(k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = span[i].iter().zip(&span[j]).map(|(a, b)| a * b).sum();
            }
            rhs[i] = span[i].iter().zip(target).map(|(a, b)| a * b).sum();
        }
        let coeffs = gram.lu().solve(&rhs).expect("Gram system solvable");
        let mut err = 0.0;
        let mut norm = 0.0;
        for p in 0..n {
            let fit: f64 = (0..k).map(|i| coeffs[i] * span[i][p]).sum();
            err += (target[p] - fit).powi(2);
            norm += target[p].powi(2);
        }
        (err / norm).sqrt()
    }

    #[test]
    fn constant_mode_is_flat() {
        let domain = concentric_domain(384);
        let solution = solve_steklov_neumann(&domain, &SolverOptions::default()).unwrap();
        let probe: Vec<Point> = (0..32)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 32.0;
                let r = 1.2 + 0.6 * ((j % 5) as f64 / 5.0);
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let values = solution.evaluate_mode(0, &probe).unwrap();
        let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        for v in values {
            assert!((v - mean).abs() <= 1e-8 * mean.abs(), "spread around {mean}");
        }
    }

    #[test]
    fn gamma1_flux_residual_is_small() {
        let domain = concentric_domain(384);
        let solution = solve_steklov_neumann(&domain, &SolverOptions::default()).unwrap();
        let residual = solution.diagnostics.gamma1_flux_residual[1];
        assert!(residual <= 1e-6, "flux residual {residual}");
    }

    #[test]
    fn eccentric_annulus_stays_below_concentric() {
        let opts = SolverOptions::default();
        let concentric = solve_steklov_neumann(&concentric_domain(384), &opts).unwrap();
        for d in [0.2, 0.5, 0.8] {
            let domain =
                build_domain(PolarCurve::eccentric(2.0, d).unwrap(), 1.0, 384, 384).unwrap();
            let solution = solve_steklov_neumann(&domain, &opts).unwrap();
            assert!(
                solution.mu(1) <= concentric.mu(1) + 1e-8,
                "d = {d}: {} vs {}",
                solution.mu(1),
                concentric.mu(1)
            );
        }
    }

    #[test]
    fn rayleigh_ritz_upper_bound_decreases_with_order() {
        let domain =
            build_domain(PolarCurve::eccentric(2.0, 0.5).unwrap(), 1.0, 512, 512).unwrap();
        let coarse = solve_steklov_neumann(&domain, &SolverOptions::with_order(16)).unwrap();
        let fine = solve_steklov_neumann(&domain, &SolverOptions::with_order(24)).unwrap();
        assert!(fine.mu(1) <= coarse.mu(1) + 1e-12);
        let refined =
            solve_steklov_neumann_refined(&domain, &SolverOptions::with_order(24)).unwrap();
        let delta = refined.diagnostics.self_convergence.unwrap();
        assert!(delta < 1e-9, "self-convergence delta {delta}");
    }

    #[test]
    fn translation_invariance_with_recentered_basis() {
        let domain =
            build_domain(PolarCurve::eccentric(2.0, 0.4).unwrap(), 1.0, 384, 384).unwrap();
        let shifted = domain.translated(Vector::new(0.7, -0.3));
        let opts = SolverOptions::default();
        let base = solve_steklov_neumann(&domain, &opts).unwrap();
        let moved = solve_steklov_neumann(&shifted, &opts).unwrap();
        for k in 0..10 {
            assert!(
                (base.mu(k) - moved.mu(k)).abs() <= 1e-9 * base.mu(k).abs().max(1.0),
                "mode {k}: {} vs {}",
                base.mu(k),
                moved.mu(k)
            );
        }
    }

    #[test]
    fn scaling_covariance() {
        let star = crate::geometry::StarPolarCurve::new(1.5, vec![0.0, 0.0, 0.2], vec![]).unwrap();
        let domain = build_domain(PolarCurve::Star(star), 0.5, 384, 384).unwrap();
        let opts = SolverOptions::default();
        let base = solve_steklov_neumann(&domain, &opts).unwrap();
        for s in [0.5, 2.0] {
            let scaled = solve_steklov_neumann(&domain.scaled(s), &opts).unwrap();
            for k in 1..6 {
                let expected = base.mu(k) / s;
                assert!(
                    (scaled.mu(k) - expected).abs() <= 1e-8 * expected,
                    "s = {s}, mode {k}: {} vs {expected}",
                    scaled.mu(k)
                );
            }
        }
    }

    #[test]
    fn missing_constant_mode_is_detected() {
        // A basis without the constant member cannot represent mu_0; the
        // solver must flag the assembly as broken rather than mislabel modes.
        let domain = concentric_domain(256);
        let basis = test_basis(6);
        let stiffness = assemble_stiffness(&domain, &basis);
        let mass = assemble_boundary_mass(&domain, &basis, MassBoundary::Outer);
        let dim = basis.dim();
        // Strip the constant row/column.
        let k_sub = StiffnessMatrix {
            matrix: stiffness
                .matrix
                .view((1, 1), (dim - 1, dim - 1))
                .into_owned(),
            asymmetry: stiffness.asymmetry,
        };
        let m_sub = mass.view((1, 1), (dim - 1, dim - 1)).into_owned();
        let err = solve_pencil(&k_sub, &m_sub, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::MissingConstantMode { .. }));
    }

    #[test]
    fn out_of_domain_evaluation_is_rejected() {
        let domain = concentric_domain(256);
        let solution = solve_steklov_neumann(&domain, &SolverOptions::with_order(8)).unwrap();
        let err = solution
            .evaluate_mode(1, &[Point::new(0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, SolverError::PointOutsideDomain { .. }));
        let err = solution
            .evaluate_mode(1, &[Point::new(5.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, SolverError::PointOutsideDomain { .. }));
    }
}
