//! Experiment runners: each subcommand validates its configuration, runs
//! the computation, and produces a table plus assertion results.

use crate::config::{ConstraintKind, DomainKind, ExperimentConfig, SweepKind};
use crate::report::{Assertion, ExperimentOutcome, PlotSpec};
use anyhow::anyhow;
use rayon::prelude::*;
use steklov_core::analysis::{
    count_nodal_domains, dumbbell_bound, hole_shrink_rows, isoperimetric_check,
    random_unit_combinations, sandwich_bounds_with_solution, DumbbellSpec,
    IsoperimetricConstraint,
};
use steklov_core::closed_form::mu_l_concentric;
use steklov_core::geometry::{build_domain, AnnulusSpec, PolarCurve, RevolutionProfile};
use steklov_core::lemmas::{lemma_values, rayleigh_bound_theta, LemmaQuadratureConfig};
use steklov_core::solver::{
    solve_steklov, solve_steklov_neumann, EigenSolution, SpectralMode,
};

/// Distinguishes configuration problems (exit 2) from failures during the
/// computation itself (exit 3).
#[derive(Debug)]
pub enum StageError {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageError::Config(e) => write!(f, "configuration error: {e:#}"),
            StageError::Compute(e) => write!(f, "computation error: {e:#}"),
        }
    }
}

trait StageExt<T> {
    fn config_stage(self) -> Result<T, StageError>;
    fn compute_stage(self) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn config_stage(self) -> Result<T, StageError> {
        self.map_err(|e| StageError::Config(e.into()))
    }
    fn compute_stage(self) -> Result<T, StageError> {
        self.map_err(|e| StageError::Compute(e.into()))
    }
}

fn check_flux_gate(solution: &EigenSolution, gate: f64, label: &str) -> Result<f64, StageError> {
    let residual = solution
        .diagnostics
        .gamma1_flux_residual
        .get(1)
        .copied()
        .unwrap_or(0.0);
    if residual > gate {
        return Err(StageError::Compute(anyhow!(
            "{label}: hole flux residual {residual:e} exceeds the {gate:e} gate"
        )));
    }
    Ok(residual)
}

pub fn run_exact(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let domain = cfg.domain().config_stage()?;
    let exact = cfg
        .exact
        .as_ref()
        .ok_or_else(|| anyhow!("`exact` needs an [exact] section"))
        .config_stage()?;
    let r2 = domain.require_r2().config_stage()?;
    if domain.kind == DomainKind::Star {
        return Err(StageError::Config(anyhow!(
            "closed forms apply to concentric annuli; use kind = \"concentric\""
        )));
    }
    if domain.d.unwrap_or(0.0) != 0.0 {
        return Err(StageError::Config(anyhow!(
            "closed forms require offset d = 0"
        )));
    }
    let spec = AnnulusSpec::concentric(domain.n, domain.r1, r2).config_stage()?;

    let mut rows = Vec::new();
    for l in 0..=exact.l_max {
        let eig = mu_l_concentric(&spec, l).compute_stage()?;
        rows.push(vec![l as f64, eig.value, eig.multiplicity as f64]);
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        let increasing = rows.windows(2).all(|w| w[1][1] > w[0][1]);
        assertions.push(Assertion::check(
            "eigenvalues strictly increase in l",
            increasing,
            String::new(),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mu: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    Ok(ExperimentOutcome {
        name: "exact".into(),
        header: vec!["l", "mu", "multiplicity"],
        rows,
        assertions,
        plot: Some(PlotSpec {
            title: format!("closed-form spectrum, n = {}, R1 = {}, R2 = {}", spec.n, spec.r1, spec.r2),
            x_label: "harmonic index l".into(),
            y_label: "mu_l".into(),
            x,
            series: vec![("mu_l".into(), mu)],
        }),
        notes: Vec::new(),
    })
}

pub fn run_solve(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let domain_cfg = cfg.domain().config_stage()?;
    let solution = match opts.mode {
        SpectralMode::SteklovNeumann => {
            let domain = domain_cfg.build(&opts).config_stage()?;
            solve_steklov_neumann(&domain, &opts).compute_stage()?
        }
        SpectralMode::Steklov => {
            let curve = domain_cfg.outer_curve().config_stage()?;
            let m = domain_cfg
                .m_out
                .or(opts.m_out)
                .unwrap_or_else(|| opts.default_samples());
            let simple = steklov_core::geometry::build_simple_domain(curve, m).config_stage()?;
            solve_steklov(&simple, &opts).compute_stage()?
        }
    };
    if opts.mode == SpectralMode::SteklovNeumann {
        check_flux_gate(&solution, cfg.flux_gate().config_stage()?, "solve")?;
    }

    let shown = solution.n_modes().min(2 * opts.basis_order);
    let mut rows = Vec::new();
    for k in 0..shown {
        let residual = solution
            .diagnostics
            .gamma1_flux_residual
            .get(k)
            .copied()
            .unwrap_or(0.0);
        rows.push(vec![
            k as f64,
            solution.mu(k),
            solution.multiplicity(k) as f64,
            residual,
        ]);
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "zero mode present",
            solution.mu(0).abs() <= 1e-10 * solution.mu(1).abs().max(1.0),
            format!("mu_0 = {:e}", solution.mu(0)),
        ));
        assertions.push(Assertion::check(
            "first nonzero eigenvalue is positive",
            solution.mu(1) > 0.0,
            format!("mu_1 = {}", solution.mu(1)),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mu: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    Ok(ExperimentOutcome {
        name: "solve".into(),
        header: vec!["k", "mu", "cluster_size", "residual_gamma1"],
        rows,
        assertions,
        plot: Some(PlotSpec {
            title: "computed spectrum".into(),
            x_label: "mode index".into(),
            y_label: "eigenvalue".into(),
            x,
            series: vec![("mu_k".into(), mu)],
        }),
        notes: vec![format!(
            "mass rank {}, dropped {}, stiffness asymmetry {:.3e}",
            solution.diagnostics.mass_rank,
            solution.diagnostics.dropped_directions,
            solution.diagnostics.stiffness_asymmetry
        )],
    })
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("`sweep` needs a [sweep] section"))
        .config_stage()?;
    match sweep.kind {
        SweepKind::Eccentricity => run_eccentricity_sweep(cfg),
        SweepKind::HoleShrink => run_hole_shrink_sweep(cfg),
    }
}

fn run_eccentricity_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let domain_cfg = cfg.domain().config_stage()?;
    if domain_cfg.kind == DomainKind::Star {
        return Err(StageError::Config(anyhow!(
            "eccentricity sweeps vary the offset of a circular outer boundary"
        )));
    }
    let r2 = domain_cfg.require_r2().config_stage()?;
    let r1 = domain_cfg.r1;
    let offsets = cfg
        .sweep
        .as_ref()
        .expect("checked by run_sweep")
        .parameter_values()
        .config_stage()?;
    for &d in &offsets {
        if !(0.0..r2 - r1).contains(&d) {
            return Err(StageError::Config(anyhow!(
                "offset {d} outside [0, r2 - r1)"
            )));
        }
    }
    let lemma_cfg = LemmaQuadratureConfig::standard(2, r1, r2).config_stage()?;
    let m_out = domain_cfg.m_out.unwrap_or_else(|| opts.default_samples());
    let m_in = domain_cfg.m_in.unwrap_or_else(|| opts.default_samples());

    let flux_gate = cfg.flux_gate().config_stage()?;
    let concentric = {
        let domain =
            build_domain(PolarCurve::eccentric(r2, 0.0).compute_stage()?, r1, m_out, m_in)
                .compute_stage()?;
        let solution = solve_steklov_neumann(&domain, &opts).compute_stage()?;
        check_flux_gate(&solution, flux_gate, "d = 0")?;
        solution.mu(1)
    };

    let rows: Result<Vec<Vec<f64>>, StageError> = offsets
        .par_iter()
        .map(|&d| {
            let domain = build_domain(PolarCurve::eccentric(r2, d)?, r1, m_out, m_in)?;
            let solution = solve_steklov_neumann(&domain, &opts)?;
            let theta = rayleigh_bound_theta(d, &lemma_cfg)?;
            Ok::<_, anyhow::Error>(vec![
                d,
                solution.mu(1),
                concentric,
                theta,
                solution.diagnostics.gamma1_flux_residual[1],
            ])
        })
        .map(|row| row.compute_stage())
        .collect();
    let rows = rows?;
    for row in &rows {
        if row[4] > flux_gate {
            return Err(StageError::Compute(anyhow!(
                "d = {}: hole flux residual {:e} exceeds the {flux_gate:e} gate",
                row[0],
                row[4]
            )));
        }
    }

    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        let below_concentric = rows.iter().all(|r| r[1] <= concentric + 1e-8);
        assertions.push(Assertion::check(
            "mu_1(offset) <= mu_1(concentric) + 1e-8",
            below_concentric,
            String::new(),
        ));
        let below_theta = rows.iter().all(|r| r[1] <= r[3] + 1e-6);
        assertions.push(Assertion::check(
            "mu_1(offset) <= Theta(offset) + 1e-6",
            below_theta,
            String::new(),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(ExperimentOutcome {
        name: "eccentricity".into(),
        header: vec!["d", "mu1", "mu1_concentric", "theta_bound", "residual_gamma1"],
        plot: Some(PlotSpec {
            title: format!("eccentricity sweep, R1 = {r1}, R2 = {r2}"),
            x_label: "offset d".into(),
            y_label: "eigenvalue".into(),
            x,
            series: vec![
                ("mu_1".into(), rows.iter().map(|r| r[1]).collect()),
                ("Theta bound".into(), rows.iter().map(|r| r[3]).collect()),
                ("concentric".into(), rows.iter().map(|r| r[2]).collect()),
            ],
        }),
        rows,
        assertions,
        notes: Vec::new(),
    })
}

fn run_hole_shrink_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let domain_cfg = cfg.domain().config_stage()?;
    let outer = domain_cfg.outer_curve().config_stage()?;
    let radii = cfg
        .sweep
        .as_ref()
        .expect("checked by run_sweep")
        .parameter_values()
        .config_stage()?;
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| r <= 0.0) {
        return Err(StageError::Config(anyhow!(
            "hole radii must be positive and strictly decreasing"
        )));
    }
    let flux_gate = cfg.flux_gate().config_stage()?;
    let report = hole_shrink_rows(&outer, &radii, &opts).compute_stage()?;
    for row in &report.rows {
        if row.flux_residual > flux_gate {
            return Err(StageError::Compute(anyhow!(
                "r = {}: hole flux residual {:e} exceeds the {flux_gate:e} gate",
                row.radius,
                row.flux_residual
            )));
        }
    }
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.radius,
                r.mu1,
                report.sigma1,
                r.gap,
                r.trace_distance,
                r.flux_residual,
            ]
        })
        .collect();
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        let step1 = report
            .rows
            .iter()
            .all(|r| r.mu1 <= report.sigma1 + 1e-8);
        assertions.push(Assertion::check(
            "mu_1(punctured) <= sigma_1(outer) + 1e-8",
            step1,
            format!("sigma_1 = {}", report.sigma1),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(ExperimentOutcome {
        name: "hole_shrink".into(),
        header: vec!["r", "mu1", "sigma1", "gap", "trace_distance", "residual_gamma1"],
        plot: Some(PlotSpec {
            title: "vanishing-hole sweep".into(),
            x_label: "hole radius r".into(),
            y_label: "eigenvalue".into(),
            x,
            series: vec![
                ("mu_1".into(), rows.iter().map(|r| r[1]).collect()),
                ("sigma_1".into(), rows.iter().map(|r| r[2]).collect()),
            ],
        }),
        rows,
        assertions,
        notes: Vec::new(),
    })
}

pub fn run_lemmas(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let lemmas = cfg
        .lemmas
        .as_ref()
        .ok_or_else(|| anyhow!("`lemmas` needs a [lemmas] section"))
        .config_stage()?;
    let quad = match lemmas.nodes {
        Some(nodes) => LemmaQuadratureConfig::new(lemmas.n, lemmas.r1, lemmas.r2, nodes),
        None => LemmaQuadratureConfig::standard(lemmas.n, lemmas.r1, lemmas.r2),
    }
    .config_stage()?;
    for &d in &lemmas.offsets {
        if !(0.0..lemmas.r2 - lemmas.r1).contains(&d) {
            return Err(StageError::Config(anyhow!(
                "offset {d} outside [0, r2 - r1)"
            )));
        }
    }

    let base = lemma_values(0.0, &quad).compute_stage()?;
    let theta0 = rayleigh_bound_theta(0.0, &quad).compute_stage()?;
    let mut rows = Vec::new();
    for &d in &lemmas.offsets {
        let v = lemma_values(d, &quad).compute_stage()?;
        let theta = rayleigh_bound_theta(d, &quad).compute_stage()?;
        rows.push(vec![d, v.a1, v.a2, v.a3, v.v1, v.v2, v.v3, theta]);
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "A2 and V2 vanish",
            rows.iter().all(|r| r[2].abs() <= 1e-10 && r[5].abs() <= 1e-10),
            String::new(),
        ));
        assertions.push(Assertion::check(
            "A1 and V1 are offset-invariant",
            rows.iter().all(|r| {
                (r[1] - base.a1).abs() <= 1e-10 * base.a1.abs()
                    && (r[4] - base.v1).abs() <= 1e-10 * base.v1.abs()
            }),
            String::new(),
        ));
        assertions.push(Assertion::check(
            "A3 and V3 are minimized at the concentric configuration",
            rows.iter()
                .filter(|r| r[0] > 0.0)
                .all(|r| r[3] > base.a3 && r[6] > base.v3),
            String::new(),
        ));
        assertions.push(Assertion::check(
            "Theta is maximized at the concentric configuration",
            rows.iter().all(|r| r[7] <= theta0 + 1e-12),
            format!("Theta(0) = {theta0}"),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let theta_series: Vec<f64> = rows.iter().map(|r| r[7]).collect();
    Ok(ExperimentOutcome {
        name: "lemmas".into(),
        header: vec!["d", "a1", "a2", "a3", "v1", "v2", "v3", "theta"],
        rows,
        assertions,
        plot: Some(PlotSpec {
            title: format!(
                "comparison integrals, n = {}, R1 = {}, R2 = {}",
                lemmas.n, lemmas.r1, lemmas.r2
            ),
            x_label: "offset d".into(),
            y_label: "Theta(d)".into(),
            x,
            series: vec![("Theta".into(), theta_series)],
        }),
        notes: Vec::new(),
    })
}

pub fn run_nodal(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let nodal = cfg
        .nodal
        .as_ref()
        .ok_or_else(|| anyhow!("`nodal` needs a [nodal] section"))
        .config_stage()?;
    if nodal.resolutions.is_empty() {
        return Err(StageError::Config(anyhow!("[nodal] needs resolutions")));
    }
    let domain = cfg.domain().config_stage()?.build(&opts).config_stage()?;
    let solution = solve_steklov_neumann(&domain, &opts).compute_stage()?;
    check_flux_gate(&solution, cfg.flux_gate().config_stage()?, "nodal")?;

    let cluster: Vec<usize> = solution.cluster_indices(1).collect();
    let mut fields: Vec<Vec<f64>> = (0..cluster.len())
        .map(|i| {
            let mut w = vec![0.0; cluster.len()];
            w[i] = 1.0;
            w
        })
        .collect();
    fields.extend(random_unit_combinations(
        cluster.len(),
        nodal.random_combinations,
        nodal.seed,
    ));

    let mut rows = Vec::new();
    for (field_idx, weights) in fields.iter().enumerate() {
        for &resolution in &nodal.resolutions {
            let report = count_nodal_domains(
                &domain,
                |pts| {
                    solution
                        .evaluate_combination(&cluster, weights, pts)
                        .expect("grid points are interior")
                },
                resolution,
                nodal.zero_tol,
            )
            .compute_stage()?;
            rows.push(vec![
                field_idx as f64,
                resolution as f64,
                report.count as f64,
                report.component_sizes.first().copied().unwrap_or(0) as f64,
                report.component_sizes.last().copied().unwrap_or(0) as f64,
                report.zero_band_points as f64,
            ]);
        }
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "every first-eigenspace field has exactly 2 nodal domains",
            rows.iter().all(|r| r[2] == 2.0),
            String::new(),
        ));
    }
    Ok(ExperimentOutcome {
        name: "nodal".into(),
        header: vec![
            "field",
            "resolution",
            "count",
            "largest_component",
            "smallest_component",
            "zero_band_points",
        ],
        rows,
        assertions,
        plot: None,
        notes: vec![format!(
            "first eigenspace: modes {:?}, {} random combinations, seed {}",
            cluster, nodal.random_combinations, nodal.seed
        )],
    })
}

pub fn run_dumbbell(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let dumbbell = cfg
        .dumbbell
        .as_ref()
        .ok_or_else(|| anyhow!("`dumbbell` needs a [dumbbell] section"))
        .config_stage()?;
    let specs: Vec<DumbbellSpec> = dumbbell
        .epsilons
        .iter()
        .map(|&eps| DumbbellSpec::new(eps, dumbbell.hole_radius))
        .collect::<Result<_, _>>()
        .config_stage()?;

    let mut rows = Vec::new();
    for spec in &specs {
        let report = dumbbell_bound(spec);
        let expected = 2.0 * std::f64::consts::PI.powi(2) * spec.epsilon;
        rows.push(vec![
            spec.epsilon,
            report.quotient,
            expected,
            report.boundary_integral,
            report.boundary_mass,
            report.dirichlet_energy,
        ]);
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "quotient equals 2 pi^2 eps within 1e-10",
            rows.iter().all(|r| (r[1] - r[2]).abs() <= 1e-10),
            String::new(),
        ));
        assertions.push(Assertion::check(
            "neck test function has zero boundary mean",
            rows.iter().all(|r| r[3].abs() <= 1e-12),
            String::new(),
        ));
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(ExperimentOutcome {
        name: "dumbbell".into(),
        header: vec![
            "epsilon",
            "quotient",
            "expected",
            "boundary_integral",
            "boundary_mass",
            "dirichlet_energy",
        ],
        plot: Some(PlotSpec {
            title: "dumbbell neck quotient".into(),
            x_label: "neck parameter".into(),
            y_label: "Rayleigh quotient".into(),
            x,
            series: vec![
                ("quotient".into(), rows.iter().map(|r| r[1]).collect()),
                ("2 pi^2 eps".into(), rows.iter().map(|r| r[2]).collect()),
            ],
        }),
        rows,
        assertions,
        notes: Vec::new(),
    })
}

pub fn run_sandwich(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let domain = cfg.domain().config_stage()?.build(&opts).config_stage()?;
    let profile = RevolutionProfile::euclidean(
        4.0 * domain.circumscribed_radius.max(1.0),
        2,
    );
    let solution = solve_steklov_neumann(&domain, &opts).compute_stage()?;
    check_flux_gate(&solution, cfg.flux_gate().config_stage()?, "sandwich")?;
    let report = sandwich_bounds_with_solution(&domain, &profile, &solution).compute_stage()?;

    let rows = vec![vec![
        domain.r1,
        report.inscribed_radius,
        report.circumscribed_radius,
        report.star_constant,
        report.c1,
        report.c2,
        report.lower,
        report.mu1,
        report.upper,
    ]];
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "lower <= mu_1 <= upper",
            report.lower <= report.mu1 && report.mu1 <= report.upper,
            format!("{} <= {} <= {}", report.lower, report.mu1, report.upper),
        ));
    }
    Ok(ExperimentOutcome {
        name: "sandwich".into(),
        header: vec![
            "r1", "r_m", "r_max", "a", "c1", "c2", "lower", "mu1", "upper",
        ],
        rows,
        assertions,
        plot: None,
        notes: Vec::new(),
    })
}

pub fn run_isoperimetric(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, StageError> {
    let opts = cfg.solver_options().config_stage()?;
    let iso = cfg
        .isoperimetric
        .as_ref()
        .ok_or_else(|| anyhow!("`isoperimetric` needs an [isoperimetric] section"))
        .config_stage()?;
    if iso.constraints.is_empty() {
        return Err(StageError::Config(anyhow!(
            "[isoperimetric] needs at least one constraint"
        )));
    }
    let outer = cfg.domain().config_stage()?.outer_curve().config_stage()?;

    let mut rows = Vec::new();
    for &constraint in &iso.constraints {
        let kind = match constraint {
            ConstraintKind::Measure => IsoperimetricConstraint::Measure,
            ConstraintKind::Perimeter => IsoperimetricConstraint::Perimeter,
        };
        let report = isoperimetric_check(&outer, iso.hole_radius, kind, &opts, iso.smallness)
            .compute_stage()?;
        rows.push(vec![
            match constraint {
                ConstraintKind::Measure => 0.0,
                ConstraintKind::Perimeter => 1.0,
            },
            report.hole_radius,
            report.comparison_radius,
            report.mu1_domain,
            report.mu1_annulus,
            report.margin,
        ]);
    }
    let mut assertions = Vec::new();
    if cfg.assertions.enabled {
        assertions.push(Assertion::check(
            "mu_1(punctured) <= mu_1(comparison annulus)",
            rows.iter().all(|r| r[5] >= -1e-8),
            String::new(),
        ));
    }
    Ok(ExperimentOutcome {
        name: "isoperimetric".into(),
        header: vec![
            "constraint",
            "r",
            "comparison_radius",
            "mu1_domain",
            "mu1_annulus",
            "margin",
        ],
        rows,
        assertions,
        plot: None,
        notes: vec!["constraint: 0 = measure, 1 = perimeter".into()],
    })
}
