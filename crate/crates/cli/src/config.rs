//! Experiment configuration: flat TOML with typed sections, every field
//! validated before any solve runs, unknown keys rejected.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use steklov_core::geometry::{build_domain, DoublyConnectedDomain, PolarCurve, StarPolarCurve};
use steklov_core::solver::{SolverOptions, SpectralMode};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    pub exact: Option<ExactConfig>,
    pub lemmas: Option<LemmasConfig>,
    pub nodal: Option<NodalConfig>,
    pub dumbbell: Option<DumbbellConfig>,
    pub isoperimetric: Option<IsoperimetricConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub assertions: AssertionConfig,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: Self = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    pub fn domain(&self) -> Result<&DomainConfig> {
        self.domain
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("config needs a [domain] section"))
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        self.solver.to_options()
    }

    /// Diagnostic gate on the hole flux residual, with environment override.
    pub fn flux_gate(&self) -> Result<f64> {
        let mut gate = self.solver.flux_gate.unwrap_or(1e-6);
        if let Ok(text) = std::env::var("STEKLOV_FLUX_GATE") {
            gate = text
                .parse()
                .context("STEKLOV_FLUX_GATE must be a positive float")?;
        }
        if !(gate > 0.0) {
            bail!("flux_gate must be positive");
        }
        Ok(gate)
    }
}

/// Domain specification: `kind` selects which fields apply.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    #[serde(default = "default_dim")]
    pub n: u32,
    pub r1: f64,
    pub r2: Option<f64>,
    pub d: Option<f64>,
    pub rho_c0: Option<f64>,
    #[serde(default)]
    pub rho_cos: Vec<f64>,
    #[serde(default)]
    pub rho_sin: Vec<f64>,
    pub m_out: Option<usize>,
    pub m_in: Option<usize>,
}

fn default_dim() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Concentric,
    Eccentric,
    Star,
}

impl DomainConfig {
    pub fn outer_curve(&self) -> Result<PolarCurve> {
        match self.kind {
            DomainKind::Concentric => {
                let r2 = self.require_r2()?;
                Ok(PolarCurve::eccentric(r2, 0.0)?)
            }
            DomainKind::Eccentric => {
                let r2 = self.require_r2()?;
                Ok(PolarCurve::eccentric(r2, self.d.unwrap_or(0.0))?)
            }
            DomainKind::Star => {
                let c0 = self
                    .rho_c0
                    .ok_or_else(|| anyhow::anyhow!("star domain needs rho_c0"))?;
                Ok(PolarCurve::Star(StarPolarCurve::new(
                    c0,
                    self.rho_cos.clone(),
                    self.rho_sin.clone(),
                )?))
            }
        }
    }

    pub fn require_r2(&self) -> Result<f64> {
        self.r2
            .ok_or_else(|| anyhow::anyhow!("{:?} domain needs r2", self.kind))
    }

    pub fn build(&self, opts: &SolverOptions) -> Result<DoublyConnectedDomain> {
        if self.n != 2 {
            bail!("the solver is planar; set n = 2 (closed forms accept any n via `exact`)");
        }
        let m_out = self.m_out.unwrap_or_else(|| opts.default_samples());
        let m_in = self.m_in.unwrap_or_else(|| opts.default_samples());
        Ok(build_domain(self.outer_curve()?, self.r1, m_out, m_in)?)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub basis_order: Option<usize>,
    pub m_out: Option<usize>,
    pub m_in: Option<usize>,
    pub tau_mass: Option<f64>,
    pub tau_zero: Option<f64>,
    pub mode: Option<SolverMode>,
    /// Hole flux residuals above this are a diagnostic breach (exit 3).
    /// Near-degenerate geometries converge in eigenvalue long before the
    /// pointwise Neumann residual does; loosen deliberately when sweeping
    /// into that regime.
    pub flux_gate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    SteklovNeumann,
    Steklov,
}

impl SolverConfig {
    fn to_options(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions::default();
        if let Some(order) = self.basis_order {
            if order == 0 {
                bail!("basis_order must be positive");
            }
            opts.basis_order = order;
        }
        opts.m_out = self.m_out;
        opts.m_in = self.m_in;
        if let Some(tau) = self.tau_mass {
            if !(tau > 0.0) {
                bail!("tau_mass must be positive");
            }
            opts.tau_mass = tau;
        }
        if let Some(tau) = self.tau_zero {
            if !(tau > 0.0) {
                bail!("tau_zero must be positive");
            }
            opts.tau_zero = tau;
        }
        opts.mode = match self.mode.unwrap_or(SolverMode::SteklovNeumann) {
            SolverMode::SteklovNeumann => SpectralMode::SteklovNeumann,
            SolverMode::Steklov => SpectralMode::Steklov,
        };
        // Environment overrides for the tolerances.
        if let Ok(tau) = std::env::var("STEKLOV_TAU_M") {
            opts.tau_mass = tau
                .parse()
                .context("STEKLOV_TAU_M must be a positive float")?;
        }
        if let Ok(tau) = std::env::var("STEKLOV_TAU_0") {
            opts.tau_zero = tau
                .parse()
                .context("STEKLOV_TAU_0 must be a positive float")?;
        }
        Ok(opts)
    }
}

/// Parameter grid for `sweep`: explicit values or a uniform grid.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    #[serde(default)]
    pub values: Vec<f64>,
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Eccentricity,
    HoleShrink,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepConfig {
    pub fn parameter_values(&self) -> Result<Vec<f64>> {
        if !self.values.is_empty() {
            if self.grid.is_some() {
                bail!("[sweep] takes either `values` or `grid`, not both");
            }
            return Ok(self.values.clone());
        }
        let grid = self
            .grid
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("[sweep] needs `values` or `grid`"))?;
        if grid.count < 2 {
            bail!("[sweep] grid needs at least two points");
        }
        let step = (grid.stop - grid.start) / (grid.count - 1) as f64;
        Ok((0..grid.count)
            .map(|i| grid.start + step * i as f64)
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub l_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasConfig {
    pub n: u32,
    pub r1: f64,
    pub r2: f64,
    pub nodes: Option<usize>,
    pub offsets: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalConfig {
    pub resolutions: Vec<usize>,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default = "default_random_combinations")]
    pub random_combinations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_zero_tol() -> f64 {
    1e-6
}

fn default_random_combinations() -> usize {
    10
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumbbellConfig {
    pub epsilons: Vec<f64>,
    pub hole_radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoperimetricConfig {
    pub hole_radius: f64,
    pub constraints: Vec<ConstraintKind>,
    pub smallness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Measure,
    Perimeter,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
}

impl Default for AssertionConfig {
    fn default() -> Self {
        Self { enabled: true }
    }
}

fn default_true() -> bool {
    true
}
