//! The experiment suites behind `memwave run`.
//!
//! Every experiment returns its CSV tables together with named checks; the
//! run fails when any check fails.

use std::f64::consts::PI;

use memwave_core::control::{solve_hum, HumOptions, ModalState};
use memwave_core::ingham::{
    positivity_threshold, random_data, theorem_constant, verify_direct, verify_inverse,
    TrialSettings,
};
use memwave_core::modal::{
    asymptotic_coefficients, exact_coefficients_all, norm_equivalence, remainder_report,
};
use memwave_core::series::{default_grid, steps_for, volterra_oracle, Direction, SolutionField};
use memwave_core::spectrum::{
    asymptotic_roots, control_time_threshold, mode_roots_range, spectral_limits,
};
use memwave_core::{InitialData, ModelParams, Result, SpectralBasis};

use crate::config::{Experiment, Horizon, RunConfig, TargetKind};
use crate::output::{Cell, Table};

/// Largest relative quartic residual accepted by the spectrum experiment.
pub const RESIDUAL_LIMIT: f64 = 1e-9;
/// Largest relative disagreement with the time stepper in `simulate`.
pub const ORACLE_LIMIT: f64 = 1e-6;
/// Largest relative final-state error accepted by the control experiment.
pub const TARGET_LIMIT: f64 = 1e-3;

pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<(String, bool)>,
}

/// Control-time threshold from the exact roots of `max(modes, 10)` modes.
pub fn threshold(params: &ModelParams, modes: usize, epsilon: f64) -> Result<f64> {
    let basis = SpectralBasis::orthonormal(*params);
    let (limits, _) = spectral_limits(&basis, modes.max(10), &[epsilon])?;
    control_time_threshold(&limits)
}

pub fn resolve_horizon(config: &RunConfig, params: &ModelParams) -> Result<f64> {
    match config.horizon {
        Horizon::Fixed(t) => Ok(t),
        Horizon::Auto => Ok(1.5 * threshold(params, config.modes, config.epsilon)?),
    }
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    let params = config.model_params()?;
    match config.experiment {
        Experiment::Spectrum => spectrum(config, &params),
        Experiment::Modal => modal(config, &params),
        Experiment::Simulate => simulate(config, &params),
        Experiment::InghamInverse => inverse(config, &params),
        Experiment::InghamDirect => direct(config, &params),
        Experiment::Control => control(config, &params),
    }
}

fn spectrum(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let basis = SpectralBasis::orthonormal(*params);
    let (limits, roots) = spectral_limits(&basis, config.modes.max(10), &[config.epsilon])?;
    let mut table = Table::new(
        "roots.csv",
        &[
            "n",
            "lambda",
            "omega_re",
            "omega_im",
            "rho",
            "residual",
            "omega_scaled_error",
            "rho_scaled_error",
        ],
    );
    let mut worst = 0.0f64;
    for r in &roots[..config.modes] {
        let (omega_asym, rho_asym) = asymptotic_roots(params, r.lambda);
        worst = worst.max(r.residual);
        table.push(vec![
            r.n.into(),
            r.lambda.into(),
            r.omega.re.into(),
            r.omega.im.into(),
            r.rho.into(),
            r.residual.into(),
            (r.lambda.sqrt() * (r.omega - omega_asym).norm()).into(),
            (r.lambda * (r.rho - rho_asym).abs()).into(),
        ]);
    }
    let mut summary = Table::new(
        "limits.csv",
        &[
            "retained",
            "gap",
            "alpha_omega",
            "alpha_rho",
            "epsilon",
            "n0",
            "control_time",
        ],
    );
    let control_time = match control_time_threshold(&limits) {
        Ok(t) => Cell::Float(t),
        Err(_) => Cell::Empty,
    };
    summary.push(vec![
        limits.retained.into(),
        limits.gap.into(),
        limits.alpha_omega.into(),
        limits.alpha_rho.into(),
        config.epsilon.into(),
        limits.n0(config.epsilon).map_or(Cell::Empty, Cell::from),
        control_time,
    ]);
    Ok(ExperimentOutput {
        tables: vec![table, summary],
        checks: vec![("residuals".into(), worst <= RESIDUAL_LIMIT)],
    })
}

fn modal(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let basis = SpectralBasis::orthonormal(*params);
    let (u0, u1) = random_data(config.modes, config.seed, 0, config.decay.unwrap_or(1.0));
    let data = InitialData::new(u0, u1)?;
    let roots = mode_roots_range(&basis, config.modes)?;
    let coeffs = exact_coefficients_all(params, &roots, &data)?;
    let lambdas: Vec<f64> = roots.iter().map(|r| r.lambda).collect();
    let report = remainder_report(&coeffs, &lambdas)?;
    let mut table = Table::new(
        "modal.csv",
        &[
            "n",
            "u0",
            "u1",
            "amplitude_re",
            "amplitude_im",
            "constant",
            "transient",
            "amplitude_scaled_error",
            "constant_scaled_error",
            "transient_scaled_error",
            "remainder_ratio",
        ],
    );
    for (i, (r, c)) in roots.iter().zip(&coeffs).enumerate() {
        let asym = asymptotic_coefficients(params, r.lambda, data.u0[i], data.u1[i]);
        let ratio = report
            .ratios
            .iter()
            .find(|(n, _)| *n == r.n)
            .map_or(Cell::Empty, |&(_, v)| Cell::Float(v));
        let l2 = r.lambda * r.lambda;
        table.push(vec![
            r.n.into(),
            data.u0[i].into(),
            data.u1[i].into(),
            c.amplitude.re.into(),
            c.amplitude.im.into(),
            c.constant.into(),
            c.transient.into(),
            (r.lambda * (c.amplitude - asym.amplitude).norm()).into(),
            (l2 * (c.constant - asym.constant).abs()).into(),
            (l2 * (c.transient - asym.transient).abs()).into(),
            ratio,
        ]);
    }
    let equivalence = norm_equivalence(&basis, &coeffs, &data)?;
    let mut summary = Table::new(
        "modal_summary.csv",
        &["modes", "m_hat", "worst_n", "norm_ratio"],
    );
    summary.push(vec![
        config.modes.into(),
        report.m_hat.into(),
        report.worst_n.into(),
        equivalence.into(),
    ]);
    Ok(ExperimentOutput {
        tables: vec![table, summary],
        checks: vec![
            ("remainder_constant_finite".into(), report.m_hat.is_finite()),
            (
                "norm_ratio_positive".into(),
                equivalence > 0.0 && equivalence.is_finite(),
            ),
        ],
    })
}

fn simulate(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let basis = SpectralBasis::orthonormal(*params);
    let horizon = resolve_horizon(config, params)?;
    let (u0, u1) = random_data(config.modes, config.seed, 0, config.decay.unwrap_or(2.0));
    let data = InitialData::new(u0, u1)?;
    let field = SolutionField::new(basis, &data, Direction::Forward)?;

    let mut snapshots = Table::new("snapshots.csv", &["t", "x", "u"]);
    let frames = config.snapshots.max(2);
    let points = config.points.max(2);
    for k in 0..frames {
        let t = horizon * k as f64 / (frames - 1) as f64;
        for j in 0..points {
            let x = PI * j as f64 / (points - 1) as f64;
            snapshots.push(vec![t.into(), x.into(), field.evaluate(t, x).into()]);
        }
    }

    let grid = default_grid(horizon, field.fastest_frequency());
    let mut trace = Table::new("trace.csv", &["t", "ux_at_zero", "ux_at_pi"]);
    for &t in &grid {
        trace.push(vec![
            t.into(),
            field.trace_at_zero(t).into(),
            field.trace_at_pi(t).into(),
        ]);
    }

    let mut oracle = Table::new("oracle.csv", &["n", "steps", "relative_error"]);
    let mut worst = 0.0f64;
    for (i, (r, c)) in field.roots.iter().zip(&field.coefficients).enumerate() {
        let traj = volterra_oracle(
            params,
            r.lambda,
            data.u0[i],
            data.u1[i],
            horizon,
            steps_for(horizon, r.omega.re, 32.0),
        )?;
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for (t, v) in traj.times.iter().zip(&traj.values) {
            let exact = c.value(r, *t);
            diff = diff.max((exact - v).abs());
            scale = scale.max(exact.abs());
        }
        let err = if scale > 0.0 { diff / scale } else { diff };
        worst = worst.max(err);
        oracle.push(vec![r.n.into(), traj.steps.into(), err.into()]);
    }
    Ok(ExperimentOutput {
        tables: vec![snapshots, trace, oracle],
        checks: vec![("oracle_agreement".into(), worst <= ORACLE_LIMIT)],
    })
}

fn inverse(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let horizon = resolve_horizon(config, params)?;
    let settings = TrialSettings {
        modes: config.modes,
        trials: config.trials,
        seed: config.seed,
        decay: config.decay.unwrap_or(1.5),
    };
    let report = verify_inverse(params, horizon, config.epsilon, settings)?;
    let mut table = Table::new("inverse.csv", &["trial", "lhs", "rhs", "ratio"]);
    for (k, t) in report.trials.iter().enumerate() {
        table.push(vec![
            k.into(),
            t.lhs.into(),
            t.rhs_sum.into(),
            t.ratio.into(),
        ]);
    }
    match report
        .trials
        .iter()
        .filter(|t| t.rhs_sum > 0.0)
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
    {
        Some(t) => table.push(vec![
            "min".into(),
            t.lhs.into(),
            t.rhs_sum.into(),
            t.ratio.into(),
        ]),
        None => table.push(vec!["min".into(), Cell::Empty, Cell::Empty, Cell::Empty]),
    }

    let limits = &report.limits;
    let base = control_time_threshold(limits)?;
    let mut constants = Table::new(
        "constants.csv",
        &["T", "epsilon", "theorem_constant", "T0", "T_eps"],
    );
    let t_eps = positivity_threshold(config.epsilon, limits.gap, limits.alpha_omega)
        .map_or(Cell::Empty, Cell::from);
    let mut horizons = vec![horizon];
    horizons.extend([0.8, 1.0, 1.2, 1.5, 2.0, 3.0].iter().map(|m| m * base));
    for t in horizons {
        constants.push(vec![
            t.into(),
            config.epsilon.into(),
            theorem_constant(t, config.epsilon, limits.gap, limits.alpha_omega).into(),
            base.into(),
            t_eps.clone(),
        ]);
    }
    let positive = report.min_ratio > 0.0;
    Ok(ExperimentOutput {
        tables: vec![table, constants],
        checks: vec![
            ("min_ratio_positive".into(), positive),
            (
                "min_ratio_above_constant".into(),
                positive && report.min_ratio >= report.theorem_constant,
            ),
        ],
    })
}

fn direct(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let horizon = resolve_horizon(config, params)?;
    let settings = TrialSettings {
        modes: config.modes,
        trials: config.trials,
        seed: config.seed,
        decay: config.decay.unwrap_or(1.6),
    };
    let report = verify_direct(params, horizon, settings)?;
    let mut table = Table::new("direct.csv", &["trial", "lhs", "rhs", "ratio"]);
    for (k, ((l, e), r)) in report
        .traces
        .iter()
        .zip(&report.energies)
        .zip(&report.ratios)
        .enumerate()
    {
        table.push(vec![k.into(), (*l).into(), (*e).into(), (*r).into()]);
    }
    table.push(vec![
        "max".into(),
        Cell::Empty,
        Cell::Empty,
        report.c0.into(),
    ]);
    Ok(ExperimentOutput {
        tables: vec![table],
        checks: vec![("c0_finite".into(), report.c0.is_finite() && report.c0 > 0.0)],
    })
}

/// Target of the control experiment, truncated at `config.modes`.
pub fn control_target(config: &RunConfig, basis: &SpectralBasis) -> ModalState {
    let mut target = ModalState::zeros(config.modes);
    match config.target {
        TargetKind::Value => target.value[config.target_mode - 1] = 1.0,
        TargetKind::Velocity => target.velocity[config.target_mode - 1] = 1.0,
        TargetKind::Random => {
            // y0 in L^2 and y1 in H^{-1}: the velocity carries an extra sqrt(lambda_n)
            let (y0, y1) = random_data(config.modes, config.seed, 0, config.decay.unwrap_or(1.0));
            target.value = y0;
            target.velocity = y1
                .iter()
                .enumerate()
                .map(|(i, v)| v * basis.eigenvalue(i + 1).sqrt())
                .collect();
        }
    }
    target
}

fn control(config: &RunConfig, params: &ModelParams) -> Result<ExperimentOutput> {
    let basis = SpectralBasis::orthonormal(*params);
    let horizon = resolve_horizon(config, params)?;
    let target = control_target(config, &basis);
    let result = solve_hum(
        params,
        &target,
        horizon,
        config.modes,
        HumOptions {
            tikhonov: config.tikhonov,
        },
    )?;
    let mut signal = Table::new("control.csv", &["t", "f"]);
    for (t, f) in result.f.times.iter().zip(&result.f.values) {
        signal.push(vec![(*t).into(), (*f).into()]);
    }
    let mut summary = Table::new(
        "summary.csv",
        &[
            "N",
            "T",
            "gram_condition",
            "target_error",
            "gram_min_eigenvalue",
            "control_norm",
        ],
    );
    summary.push(vec![
        config.modes.into(),
        horizon.into(),
        result.gram_condition.into(),
        result.target_error.into(),
        result.gram_min_eigenvalue.into(),
        result.control_norm.into(),
    ]);
    let mut state = Table::new(
        "state.csv",
        &[
            "n",
            "target_value",
            "target_velocity",
            "achieved_value",
            "achieved_velocity",
        ],
    );
    for n in 0..config.modes {
        state.push(vec![
            (n + 1).into(),
            target.value[n].into(),
            target.velocity[n].into(),
            result.achieved.value[n].into(),
            result.achieved.velocity[n].into(),
        ]);
    }
    Ok(ExperimentOutput {
        tables: vec![signal, summary, state],
        checks: vec![("target_reached".into(), result.target_error <= TARGET_LIMIT)],
    })
}
