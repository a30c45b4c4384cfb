//! Ingham-type inequalities for the nonharmonic series
//!
//! ```text
//! u(t) = sum_n C_n e^{i w_n t} + conj(C_n) e^{-i conj(w_n) t} + R_{1,n} + R_{2,n} e^{rho_n t}.
//! ```
//!
//! The lower bound is built from the weight `g(t) = sin(pi t / T)` on
//! `[0, T]`, whose Fourier-Laplace transform is `(1 + e^{iwT}) G(w)` with
//! `G(w) = -T pi / (T^2 w^2 - pi^2)`. Everything here is evaluated on
//! truncated series: the inequalities are checked on sampled coefficient
//! sets, not proved.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modal::{data_for_amplitude, exact_coefficients, ModalCoefficients};
use crate::model::{ModelParams, SpectralBasis};
use crate::quadrature::{integrate_converged, CompositeRule};
use crate::spectrum::{
    control_time_threshold, gap_index, spectral_limits, ModalRoots, SpectralLimits,
};

/// Distance from `+-pi/T` inside which [`kernel_g`] refuses to evaluate.
pub const POLE_GUARD: f64 = 1e-8;

/// Minimum separation of distinct exponents.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-10;

/// Default `epsilon` used to instantiate the explicit constants.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// `sin(pi t / T)` on `[0, T]`, zero elsewhere.
pub fn weight_g(t: f64, horizon: f64) -> f64 {
    if (0.0..=horizon).contains(&t) {
        (PI * t / horizon).sin()
    } else {
        0.0
    }
}

/// `G(w) = -T pi / (T^2 w^2 - pi^2)`.
pub fn kernel_g(w: Complex64, horizon: f64) -> Result<Complex64> {
    let pole = PI / horizon;
    if (w - pole).norm() < POLE_GUARD || (w + pole).norm() < POLE_GUARD {
        return Err(Error::NearPole { w });
    }
    Ok(-horizon * PI / (horizon * horizon * w * w - PI * PI))
}

/// `e^{iwT} = e^{-Im(w) T} e^{i Re(w) T}`.
fn phase(w: Complex64, horizon: f64) -> Complex64 {
    Complex64::from_polar((-w.im * horizon).exp(), w.re * horizon)
}

/// `int_0^T g(t) e^{iwt} dt = (1 + e^{iwT}) G(w)`, continued across the
/// removable singularities at `w = +-pi/T` (values `+-iT/2`).
pub fn weighted_transform(w: Complex64, horizon: f64) -> Complex64 {
    let pole = PI / horizon;
    for sign in [1.0, -1.0] {
        let d = w - sign * pole;
        if d.norm() < POLE_GUARD {
            // first-order expansion about the pole
            let at_pole = Complex64::new(0.0, sign * horizon / 2.0);
            let t2 = horizon * horizon;
            let slope = Complex64::new(-sign * t2 / 4.0, -t2 / (4.0 * PI));
            return at_pole + slope * d;
        }
    }
    (1.0 + phase(w, horizon)) * kernel_g(w, horizon).expect("pole guarded above")
}

/// `4 pi / (T sigma^2 (4 n^2 - 1))`, an upper bound for `|G(w)|` when
/// `|w| >= sigma n` and `T > 2 pi / sigma`.
pub fn kernel_bound(sigma: f64, n: usize, horizon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::HypothesisViolated("n must be at least 1".into()));
    }
    if horizon <= 2.0 * PI / sigma {
        return Err(Error::HypothesisViolated(format!(
            "T = {horizon} must exceed 2 pi / sigma = {}",
            2.0 * PI / sigma
        )));
    }
    let n = n as f64;
    Ok(4.0 * PI / (horizon * sigma * sigma * (4.0 * n * n - 1.0)))
}

/// Constants entering the lemma-level bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSetup {
    pub horizon: f64,
    pub epsilon: f64,
    pub n0: usize,
    pub nu: f64,
    pub m: f64,
}

impl WeightSetup {
    /// Requires `T > 2 pi / (gap sqrt(1 - epsilon))`.
    pub fn check(&self, gap: f64) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::HypothesisViolated(format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        let min = 2.0 * PI / (gap * (1.0 - self.epsilon).sqrt());
        if self.horizon <= min {
            return Err(Error::HypothesisViolated(format!(
                "T = {} must exceed 2 pi / (gap sqrt(1 - eps)) = {min}",
                self.horizon
            )));
        }
        if self.nu <= 0.5 {
            return Err(Error::HypothesisViolated(format!(
                "nu = {} must exceed 1/2",
                self.nu
            )));
        }
        Ok(())
    }
}

/// Smallest index `n0` such that `a |G(w_n)|` and `a sum_{n >= n0} |G(w_n)|`
/// both stay below `pi eps / (T gap^2 (1 - eps))`.
///
/// Modes beyond the retained range are covered by [`kernel_bound`] with
/// `sigma = gap sqrt(1 - eps)`, whose tail sum telescopes to
/// `4 pi / (T sigma^2) / (2 (2N + 1))`.
pub fn tail_index(setup: &WeightSetup, gap: f64, roots: &[ModalRoots], a: f64) -> Result<usize> {
    setup.check(gap)?;
    let retained = roots.len();
    if retained == 0 {
        return Err(Error::NotFoundWithinRange { retained });
    }
    let (horizon, eps) = (setup.horizon, setup.epsilon);
    let threshold = PI * eps / (horizon * gap * gap * (1.0 - eps));
    let sigma = gap * (1.0 - eps).sqrt();
    let beyond_max = kernel_bound(sigma, retained + 1, horizon)?;
    let beyond_sum = 4.0 * PI / (horizon * sigma * sigma) / (2.0 * (2.0 * retained as f64 + 1.0));

    let magnitudes = roots
        .iter()
        .map(|r| kernel_g(r.omega, horizon).map(|g| g.norm()))
        .collect::<Result<Vec<_>>>()?;
    let mut suffix_sum = beyond_sum;
    let mut suffix_max = beyond_max;
    let mut best = None;
    for i in (0..retained).rev() {
        suffix_sum += magnitudes[i];
        suffix_max = suffix_max.max(magnitudes[i]);
        if a * suffix_max <= threshold && a * suffix_sum <= threshold {
            best = Some(i + 1);
        } else {
            break;
        }
    }
    best.ok_or(Error::NotFoundWithinRange { retained })
}

/// `2 pi T (1 / (pi^2 + 4 T^2 a^2 (1 + eps)) - 4 / (T^2 gap^2 (1 - eps)))`.
pub fn theorem_constant(horizon: f64, epsilon: f64, gap: f64, alpha_omega: f64) -> f64 {
    let t2 = horizon * horizon;
    2.0 * PI
        * horizon
        * (1.0 / (PI * PI + 4.0 * t2 * alpha_omega * alpha_omega * (1.0 + epsilon))
            - 4.0 / (t2 * gap * gap * (1.0 - epsilon)))
}

/// The horizon `2 pi / sqrt(gap^2 (1 - eps) - 16 a^2 (1 + eps))` beyond which
/// [`theorem_constant`] is positive, if the radicand is positive.
pub fn positivity_threshold(epsilon: f64, gap: f64, alpha_omega: f64) -> Option<f64> {
    let radicand = gap * gap * (1.0 - epsilon) - 16.0 * alpha_omega * alpha_omega * (1.0 + epsilon);
    (radicand > 0.0).then(|| 2.0 * PI / radicand.sqrt())
}

/// Aborts when two exponents of the series coincide: the pair
/// `{i w_n, conj(i w_n)}`, `rho_n` and the constant term must all differ.
pub fn check_distinct_exponents(roots: &[ModalRoots]) -> Result<()> {
    let mut exps: Vec<(Complex64, String)> = vec![(Complex64::new(0.0, 0.0), "0".into())];
    for r in roots {
        let s = r.exponent();
        exps.push((s, format!("i w_{}", r.n)));
        exps.push((s.conj(), format!("conj(i w_{})", r.n)));
        exps.push((Complex64::new(r.rho, 0.0), format!("rho_{}", r.n)));
    }
    for i in 0..exps.len() {
        for j in (i + 1)..exps.len() {
            let d = (exps[i].0 - exps[j].0).norm();
            if d <= COINCIDENCE_TOLERANCE * (1.0 + exps[i].0.norm()) {
                return Err(Error::ExponentCoincidence(format!(
                    "{} and {} coincide ({d:e})",
                    exps[i].1, exps[j].1
                )));
            }
        }
    }
    Ok(())
}

/// Mode exponentials tabulated on the nodes of a quadrature rule.
struct ModeTable {
    /// `e^{s_n t_j}`, node-major.
    oscillatory: Vec<Complex64>,
    /// `e^{rho_n t_j}`, node-major.
    transient: Vec<f64>,
    modes: usize,
}

impl ModeTable {
    fn new(roots: &[ModalRoots], points: &[f64]) -> Self {
        let modes = roots.len();
        let mut oscillatory = Vec::with_capacity(points.len() * modes);
        let mut transient = Vec::with_capacity(points.len() * modes);
        for &t in points {
            for r in roots {
                oscillatory.push((r.exponent() * t).exp());
                transient.push((r.rho * t).exp());
            }
        }
        Self {
            oscillatory,
            transient,
            modes,
        }
    }

    /// `sum_n weight_n v_n(t_j)` at node `j`.
    fn combine(&self, j: usize, coeffs: &[ModalCoefficients], weights: &[f64]) -> f64 {
        let row = j * self.modes;
        let mut acc = 0.0;
        for (n, (c, w)) in coeffs.iter().zip(weights).enumerate() {
            let e = self.oscillatory[row + n];
            acc += w
                * (2.0 * (c.amplitude.re * e.re - c.amplitude.im * e.im)
                    + c.constant
                    + c.transient * self.transient[row + n]);
        }
        acc
    }
}

/// `int_0^T (sum_n w_n v_n(t))^2 dt` for each coefficient set, with the
/// weight `g` applied when `weighted` is set. One converged quadrature is
/// shared by all sets.
fn squared_integrals(
    roots: &[ModalRoots],
    sets: &[Vec<ModalCoefficients>],
    mode_weights: &[f64],
    horizon: f64,
    weighted: bool,
) -> Result<Vec<f64>> {
    let fastest = roots.iter().fold(1.0f64, |m, r| m.max(r.omega.re));
    integrate_converged(0.0, horizon, fastest, |rule: &CompositeRule| {
        let table = ModeTable::new(roots, &rule.points);
        sets.par_iter()
            .map(|coeffs| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .enumerate()
                    .map(|(j, (&t, w))| {
                        let v = table.combine(j, coeffs, mode_weights);
                        let g = if weighted { weight_g(t, horizon) } else { 1.0 };
                        w * g * v * v
                    })
                    .sum()
            })
            .collect()
    })
}

/// One trial of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// `int_0^T u(t)^2 dt`.
    pub lhs: f64,
    /// The explicit constant multiplying `rhs_sum`.
    pub rhs_constant: f64,
    /// `sum (1 + e^{-2 Im w_n T}) |C_n|^2`.
    pub rhs_sum: f64,
    pub ratio: f64,
    pub theorem_constant_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseReport {
    pub horizon: f64,
    pub epsilon: f64,
    pub threshold: f64,
    pub theorem_constant: f64,
    pub limits: SpectralLimits,
    pub trials: Vec<InequalityReport>,
    /// Minimum ratio over trials with nonzero right-hand side.
    pub min_ratio: f64,
}

/// Settings for the randomized inequality experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSettings {
    pub modes: usize,
    pub trials: usize,
    pub seed: u64,
    /// Coefficients are scaled by `n^{-decay}`.
    pub decay: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random amplitudes `C_n = n^{-decay} U e^{i phi}`, `U ~ U(0,1)`,
/// `phi ~ U(0, 2 pi)`, with `R1`, `R2` implied by the modal structure.
pub fn random_amplitude_set(
    params: &ModelParams,
    roots: &[ModalRoots],
    seed: u64,
    trial: usize,
    decay: f64,
) -> Result<Vec<ModalCoefficients>> {
    let mut rng = trial_rng(seed, trial);
    roots
        .iter()
        .map(|r| {
            let size = (r.n.max(1) as f64).powf(-decay) * rng.random::<f64>();
            let phi = 2.0 * PI * rng.random::<f64>();
            data_for_amplitude(params, r, Complex64::from_polar(size, phi)).map(|(_, _, c)| c)
        })
        .collect()
}

/// Random data `u0n = n^{-decay} U`, `u1n = n^{-decay} U'`, `U, U' ~ U(-1, 1)`.
/// The draws for mode `n` do not depend on the truncation.
pub fn random_data(modes: usize, seed: u64, trial: usize, decay: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = trial_rng(seed, trial);
    let mut u0 = Vec::with_capacity(modes);
    let mut u1 = Vec::with_capacity(modes);
    for n in 1..=modes {
        let scale = (n as f64).powf(-decay);
        u0.push(scale * rng.random_range(-1.0..1.0));
        u1.push(scale * rng.random_range(-1.0..1.0));
    }
    (u0, u1)
}

/// Checks `int_0^T u^2 >= C sum (1 + e^{-2 Im w_n T}) |C_n|^2` over random
/// coefficient sets with all modes `n >= 1`, against the explicit constant.
pub fn verify_inverse(
    params: &ModelParams,
    horizon: f64,
    epsilon: f64,
    settings: TrialSettings,
) -> Result<InverseReport> {
    let basis = SpectralBasis::orthonormal(*params);
    let (limits, roots) = spectral_limits(&basis, settings.modes.max(10), &[epsilon])?;
    let roots = &roots[..settings.modes];
    let threshold = control_time_threshold(&limits)?;
    if horizon <= threshold {
        return Err(Error::HypothesisViolated(format!(
            "T = {horizon} must exceed the control time {threshold}"
        )));
    }
    check_distinct_exponents(roots)?;

    let sets = (0..settings.trials)
        .map(|k| random_amplitude_set(params, roots, settings.seed, k, settings.decay))
        .collect::<Result<Vec<_>>>()?;
    let ones = vec![1.0; roots.len()];
    let lhs = squared_integrals(roots, &sets, &ones, horizon, false)?;
    let constant = theorem_constant(horizon, epsilon, limits.gap, limits.alpha_omega);

    let trials: Vec<InequalityReport> = sets
        .iter()
        .zip(&lhs)
        .map(|(coeffs, &lhs)| {
            let rhs_sum = observed_weight_sum(roots, coeffs, horizon);
            InequalityReport {
                lhs,
                rhs_constant: constant,
                rhs_sum,
                ratio: if rhs_sum > 0.0 {
                    lhs / rhs_sum
                } else {
                    f64::NAN
                },
                theorem_constant_positive: constant > 0.0,
            }
        })
        .collect();
    let min_ratio = trials
        .iter()
        .filter(|r| r.rhs_sum > 0.0)
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(InverseReport {
        horizon,
        epsilon,
        threshold,
        theorem_constant: constant,
        limits,
        trials,
        min_ratio,
    })
}

/// `sum (1 + e^{-2 Im w_n T}) |C_n|^2`.
pub fn observed_weight_sum(
    roots: &[ModalRoots],
    coeffs: &[ModalCoefficients],
    horizon: f64,
) -> f64 {
    roots
        .iter()
        .zip(coeffs)
        .map(|(r, c)| (1.0 + (-2.0 * r.omega.im * horizon).exp()) * c.amplitude.norm_sqr())
        .sum()
}

/// `int_0^T u(t)^2 dt` for one coefficient set on the given modes.
pub fn series_energy(
    roots: &[ModalRoots],
    coeffs: &[ModalCoefficients],
    horizon: f64,
) -> Result<f64> {
    let ones = vec![1.0; roots.len()];
    squared_integrals(roots, &[coeffs.to_vec()], &ones, horizon, false).map(|v| v[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedReport {
    pub n0: usize,
    /// `(lhs, rhs)` per trial.
    pub trials: Vec<(f64, f64)>,
    /// `min (lhs - rhs) / max(|lhs|, |rhs|)`.
    pub min_relative_slack: f64,
}

/// Right-hand side `2 pi T sum_{n >= n0} (1/(pi^2 + 4 T^2 Im(w_n)^2) -
/// 4/(T^2 gap^2 (1 - eps))) (1 + e^{-2 Im w_n T}) |C_n|^2`.
pub fn weighted_lower_bound_rhs(
    roots: &[ModalRoots],
    coeffs: &[ModalCoefficients],
    horizon: f64,
    epsilon: f64,
    gap: f64,
) -> f64 {
    let t2 = horizon * horizon;
    let off_diagonal = 4.0 / (t2 * gap * gap * (1.0 - epsilon));
    2.0 * PI
        * horizon
        * roots
            .iter()
            .zip(coeffs)
            .map(|(r, c)| {
                let a = r.omega.im;
                (1.0 / (PI * PI + 4.0 * t2 * a * a) - off_diagonal)
                    * (1.0 + (-2.0 * a * horizon).exp())
                    * c.amplitude.norm_sqr()
            })
            .sum::<f64>()
}

/// Compares `int g (sum_{n>=n0} C e^{iwt} + conj)^2` with its lower bound over
/// random amplitude sets; `n0` is the gap-lemma index for `epsilon`.
pub fn verify_weighted_lower_bound(
    params: &ModelParams,
    horizon: f64,
    epsilon: f64,
    settings: TrialSettings,
) -> Result<WeightedReport> {
    let basis = SpectralBasis::orthonormal(*params);
    let (limits, roots) = spectral_limits(&basis, settings.modes.max(10), &[epsilon])?;
    let setup = WeightSetup {
        horizon,
        epsilon,
        n0: limits.n0(epsilon).unwrap_or(1),
        nu: 1.0,
        m: 0.0,
    };
    setup.check(limits.gap)?;
    let n0 = gap_index(&roots, limits.gap, epsilon).ok_or(Error::NotFoundWithinRange {
        retained: roots.len(),
    })?;
    let tail = &roots[n0 - 1..settings.modes.max(n0)];

    let sets: Vec<Vec<ModalCoefficients>> = (0..settings.trials)
        .map(|k| {
            random_amplitude_set(params, tail, settings.seed, k, settings.decay).map(|v| {
                // only the oscillatory pair enters this bound
                v.into_iter()
                    .map(|c| ModalCoefficients {
                        constant: 0.0,
                        transient: 0.0,
                        ..c
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let ones = vec![1.0; tail.len()];
    let lhs = squared_integrals(tail, &sets, &ones, horizon, true)?;
    let trials: Vec<(f64, f64)> = sets
        .iter()
        .zip(&lhs)
        .map(|(c, &l)| {
            (
                l,
                weighted_lower_bound_rhs(tail, c, horizon, epsilon, limits.gap),
            )
        })
        .collect();
    let min_relative_slack = trials
        .iter()
        .map(|&(l, r)| {
            let scale = l.abs().max(r.abs());
            if scale == 0.0 {
                0.0
            } else {
                (l - r) / scale
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok(WeightedReport {
        n0,
        trials,
        min_relative_slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectReport {
    /// `int_0^T (u_x(t,0)^2 + u_x(t,pi)^2) dt` per trial.
    pub traces: Vec<f64>,
    /// `||u0||^2_{D(sqrt L)} + ||u1||^2` per trial.
    pub energies: Vec<f64>,
    /// `traces / energies`, zero for zero data.
    pub ratios: Vec<f64>,
    /// Largest ratio: the empirical `C0`.
    pub c0: f64,
}

/// Empirical constant of the direct inequality over random data.
pub fn verify_direct(
    params: &ModelParams,
    horizon: f64,
    settings: TrialSettings,
) -> Result<DirectReport> {
    if horizon <= 0.0 {
        return Err(Error::HypothesisViolated("T must be positive".into()));
    }
    let basis = SpectralBasis::orthonormal(*params);
    let roots = crate::spectrum::mode_roots_range(&basis, settings.modes)?;
    let mut sets = Vec::with_capacity(settings.trials);
    let mut energies = Vec::with_capacity(settings.trials);
    for k in 0..settings.trials {
        let (u0, u1) = random_data(settings.modes, settings.seed, k, settings.decay);
        let data = crate::model::InitialData::new(u0, u1)?;
        energies.push(data.energy(&basis));
        sets.push(crate::modal::exact_coefficients_all(params, &roots, &data)?);
    }
    let at_pi: Vec<f64> = (1..=settings.modes)
        .map(|n| basis.derivative_at_pi(n))
        .collect();
    let at_zero: Vec<f64> = (1..=settings.modes)
        .map(|n| basis.derivative_at_zero(n))
        .collect();
    let right = squared_integrals(&roots, &sets, &at_pi, horizon, false)?;
    let left = squared_integrals(&roots, &sets, &at_zero, horizon, false)?;
    let traces: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let ratios: Vec<f64> = traces
        .iter()
        .zip(&energies)
        .map(|(t, e)| if *e > 0.0 { t / e } else { 0.0 })
        .collect();
    let c0 = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(DirectReport {
        traces,
        energies,
        ratios,
        c0,
    })
}

/// `int_0^T u_x(t, pi)^2 dt / (||u0||^2_{D(sqrt L)} + ||u1||^2)` for given data.
pub fn observation_ratio(
    params: &ModelParams,
    horizon: f64,
    u0: &[f64],
    u1: &[f64],
) -> Result<f64> {
    let basis = SpectralBasis::orthonormal(*params);
    let data = crate::model::InitialData::new(u0.to_vec(), u1.to_vec())?;
    let energy = data.energy(&basis);
    if energy <= 0.0 {
        return Err(Error::ZeroData);
    }
    let roots = crate::spectrum::mode_roots_range(&basis, data.truncation())?;
    let coeffs = crate::modal::exact_coefficients_all(params, &roots, &data)?;
    let at_pi: Vec<f64> = (1..=data.truncation())
        .map(|n| basis.derivative_at_pi(n))
        .collect();
    Ok(squared_integrals(&roots, &[coeffs], &at_pi, horizon, false)?[0] / energy)
}

/// `int_0^T v_1(t)^2 dt / ((1 + e^{-2 Im w_1 T}) |C_1|^2)` for a single mode
/// with data `(u0, u1)`.
pub fn single_mode_ratio(
    params: &ModelParams,
    roots: &ModalRoots,
    u0: f64,
    u1: f64,
    horizon: f64,
) -> Result<f64> {
    let c = exact_coefficients(params, roots, u0, u1)?;
    let lhs = series_energy(std::slice::from_ref(roots), &[c], horizon)?;
    Ok(lhs / observed_weight_sum(std::slice::from_ref(roots), &[c], horizon))
}
