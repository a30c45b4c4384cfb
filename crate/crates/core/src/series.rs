//! Truncated nonharmonic series for `u(t, x)`, its boundary traces, and an
//! independent time stepper for the modal memory equation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modal::{exact_coefficients_all, ModalCoefficients};
use crate::model::{InitialData, SpectralBasis};
use crate::spectrum::{mode_roots_range, ModalRoots};

/// Relative step-halving tolerance of the time steppers.
pub const STEPPER_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 10;

/// Whether the field is read at `t` or at `T - t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Forward,
    /// `z(t) = u(T - t)`: the backward (adjoint) problem as a Cauchy problem.
    TimeReversed {
        horizon: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SolutionField {
    pub basis: SpectralBasis,
    pub roots: Vec<ModalRoots>,
    pub coefficients: Vec<ModalCoefficients>,
    pub direction: Direction,
}

impl SolutionField {
    /// Field generated by `u(0) = sum u0n e_n`, `u'(0) = sum u1n e_n`.
    pub fn new(basis: SpectralBasis, data: &InitialData, direction: Direction) -> Result<Self> {
        let roots = mode_roots_range(&basis, data.truncation())?;
        let coefficients = exact_coefficients_all(&basis.params, &roots, data)?;
        Ok(Self {
            basis,
            roots,
            coefficients,
            direction,
        })
    }

    /// Adjoint field with final data `z(T) = z0`, `z_t(T) = z1`.
    pub fn adjoint(basis: SpectralBasis, z0: &[f64], z1: &[f64], horizon: f64) -> Result<Self> {
        let data = InitialData::new(z0.to_vec(), z1.iter().map(|v| -v).collect())?;
        Self::new(basis, &data, Direction::TimeReversed { horizon })
    }

    pub fn modes(&self) -> usize {
        self.roots.len()
    }

    fn local_time(&self, t: f64) -> f64 {
        match self.direction {
            Direction::Forward => t,
            Direction::TimeReversed { horizon } => horizon - t,
        }
    }

    fn time_sign(&self) -> f64 {
        match self.direction {
            Direction::Forward => 1.0,
            Direction::TimeReversed { .. } => -1.0,
        }
    }

    /// Per-mode time factors `v_n` at `t`.
    pub fn modal_values(&self, t: f64) -> Vec<f64> {
        let tau = self.local_time(t);
        self.coefficients
            .iter()
            .zip(&self.roots)
            .map(|(c, r)| c.value(r, tau))
            .collect()
    }

    pub fn modal_velocities(&self, t: f64) -> Vec<f64> {
        let tau = self.local_time(t);
        let sign = self.time_sign();
        self.coefficients
            .iter()
            .zip(&self.roots)
            .map(|(c, r)| sign * c.velocity(r, tau))
            .collect()
    }

    /// `u(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        self.modal_values(t)
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.basis.eigenfunction(i + 1, x))
            .sum()
    }

    /// `u_t(t, x)`.
    pub fn evaluate_velocity(&self, t: f64, x: f64) -> f64 {
        self.modal_velocities(t)
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.basis.eigenfunction(i + 1, x))
            .sum()
    }

    /// `u_x(t, pi) = sum (-1)^n n c v_n(t)`.
    pub fn trace_at_pi(&self, t: f64) -> f64 {
        self.modal_values(t)
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.basis.derivative_at_pi(i + 1))
            .sum()
    }

    /// `u_x(t, 0) = sum n c v_n(t)`.
    pub fn trace_at_zero(&self, t: f64) -> f64 {
        self.modal_values(t)
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.basis.derivative_at_zero(i + 1))
            .sum()
    }

    /// Largest oscillation frequency `Re omega_N` of the retained modes.
    pub fn fastest_frequency(&self) -> f64 {
        self.roots.last().map_or(0.0, |r| r.omega.re)
    }

    /// `u_x(., pi)` sampled on `grid`.
    pub fn boundary_trace(&self, grid: &[f64]) -> Result<TraceSignal> {
        check_grid(grid, self.fastest_frequency())?;
        Ok(TraceSignal {
            times: grid.to_vec(),
            values: grid.iter().map(|&t| self.trace_at_pi(t)).collect(),
        })
    }
}

/// A sampled scalar signal on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSignal {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TraceSignal {
    pub fn sample<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Self {
        Self {
            times: grid.to_vec(),
            values: grid.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform grid on `[0, horizon]` with 32 points per period of `omega`.
pub fn default_grid(horizon: f64, omega: f64) -> Vec<f64> {
    let step = 2.0 * PI / (32.0 * omega.abs().max(1e-12));
    let intervals = ((horizon / step).ceil() as usize).max(1);
    (0..=intervals)
        .map(|i| horizon * i as f64 / intervals as f64)
        .collect()
}

/// Rejects grids with a step above `pi / (4 omega)`.
pub fn check_grid(grid: &[f64], omega: f64) -> Result<()> {
    let limit = PI / (4.0 * omega.abs().max(1e-12));
    for w in grid.windows(2) {
        let step = w[1] - w[0];
        if step <= 0.0 {
            return Err(Error::GridTooCoarse("grid is not increasing".into()));
        }
        if step > limit * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse(format!(
                "step {step} exceeds {limit} for frequency {omega}"
            )));
        }
    }
    Ok(())
}

/// One classical Runge-Kutta step of `y' = f(t, y)`.
pub(crate) fn rk4_step<F>(f: &F, t: f64, h: f64, y: &mut [f64], scratch: &mut [Vec<f64>; 5])
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let [k1, k2, k3, k4, tmp] = scratch;
    f(t, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, tmp, k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrates `y' = f(t, y)` on `[0, horizon]` with `steps` RK4 steps,
/// recording the state after every step (row 0 is `y0`).
pub(crate) fn rk4_solve<F>(f: &F, y0: &[f64], horizon: f64, steps: usize) -> Vec<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let h = horizon / steps as f64;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y.clone());
    for k in 0..steps {
        rk4_step(f, k as f64 * h, h, &mut y, &mut scratch);
        out.push(y.clone());
    }
    out
}

/// Runs [`rk4_solve`] with `steps`, `2 steps`, ... until the states shared by
/// two successive runs agree to [`STEPPER_TOLERANCE`] relative to the largest
/// state entry. Returns the finer run and its step count.
pub(crate) fn rk4_converged<F>(
    f: &F,
    y0: &[f64],
    horizon: f64,
    steps: usize,
) -> Result<(Vec<Vec<f64>>, usize)>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut steps = steps.max(1);
    let mut coarse = rk4_solve(f, y0, horizon, steps);
    for _ in 0..MAX_HALVINGS {
        let fine = rk4_solve(f, y0, horizon, 2 * steps);
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for (k, row) in coarse.iter().enumerate() {
            for (a, b) in row.iter().zip(&fine[2 * k]) {
                scale = scale.max(b.abs());
                diff = diff.max((a - b).abs());
            }
        }
        steps *= 2;
        if diff <= STEPPER_TOLERANCE * scale || scale == 0.0 {
            return Ok((fine, steps));
        }
        coarse = fine;
    }
    Err(Error::NotConverged(format!(
        "step halving did not settle below {STEPPER_TOLERANCE} with {steps} steps"
    )))
}

/// Uniformly sampled solution of one modal equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub velocities: Vec<f64>,
    pub steps: usize,
}

/// Solves `v'' + lambda v - lambda (k * v) = 0`, `v(0) = u0n`, `v'(0) = u1n`
/// on `[0, horizon]` without using the characteristic roots.
///
/// The memory terms are carried as states `y_i = int_0^t e^{-r_i (t-s)} v ds`,
/// which obey `y_i' = v - r_i y_i` with `y_i(0) = 0`.
pub fn volterra_oracle(
    params: &crate::model::ModelParams,
    lambda: f64,
    u0n: f64,
    u1n: f64,
    horizon: f64,
    steps: usize,
) -> Result<ModalTrajectory> {
    let (b1, b2, r1, r2) = (params.b1(), params.b2(), params.r1(), params.r2());
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -lambda * y[0] + lambda * b1 * y[2] + lambda * b2 * y[3];
        dy[2] = y[0] - r1 * y[2];
        dy[3] = y[0] - r2 * y[3];
    };
    let (states, steps) = rk4_converged(&rhs, &[u0n, u1n, 0.0, 0.0], horizon, steps)?;
    let h = horizon / steps as f64;
    Ok(ModalTrajectory {
        times: (0..=steps).map(|k| k as f64 * h).collect(),
        values: states.iter().map(|y| y[0]).collect(),
        velocities: states.iter().map(|y| y[1]).collect(),
        steps,
    })
}

/// Step count giving roughly `per_period` steps per period of `omega`.
pub fn steps_for(horizon: f64, omega: f64, per_period: f64) -> usize {
    ((horizon * omega.abs() * per_period / (2.0 * PI)).ceil() as usize).max(16)
}
