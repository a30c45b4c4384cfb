//! Boundary control by the Hilbert Uniqueness Method on a truncated modal
//! system.
//!
//! The controlled problem is `u(t, 0) = 0`, `u(t, pi) = f(t)` with zero
//! initial state. Testing the equation against `e_n` and integrating by parts
//! twice gives, for each mode,
//!
//! ```text
//! u_n'' + lambda_n (u_n - k * u_n) = beta_n (f - k * f),   beta_n = -gamma^2 e_n'(pi).
//! ```
//!
//! The adjoint state `z` solves the backward memory equation with final data
//! `(z0, z1)`. Multiplying the mode equation by `z_n` and integrating over
//! `(0, T)` gives the duality identity
//!
//! ```text
//! sum_n u_n'(T) z0_n - u_n(T) z1_n = int_0^T f(t) (B z)(t) dt,
//! (B z)(t) = -gamma^2 (z_x(t, pi) - int_t^T k(s - t) z_x(s, pi) ds),
//! ```
//!
//! so `B z` is the observation the control pairs with. The Gram matrix of
//! `B` over a basis of final data is symmetric, and the control is
//! `f = B z*` for the solution `z*` of the Gram system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modal::{exact_coefficients, kernel_convolution, ModalCoefficients};
use crate::model::{InitialData, ModelParams, SpectralBasis};
use crate::quadrature::{integrate_converged, CompositeRule};
use crate::series::{check_grid, rk4_converged, steps_for, TraceSignal};
use crate::spectrum::{mode_roots_range, ModalRoots};
use num_complex::Complex64;

/// Gram systems with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Final data of the adjoint problem, as orthonormal modal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointDatum {
    pub z0: Vec<f64>,
    pub z1: Vec<f64>,
    pub horizon: f64,
}

impl AdjointDatum {
    /// `(||z0||^2_{H^1_0}, ||z1||^2_{L^2})` with `||z0||^2 = sum lambda_n z0_n^2`.
    pub fn norms(&self, basis: &SpectralBasis) -> (f64, f64) {
        let h1 = self
            .z0
            .iter()
            .enumerate()
            .map(|(i, z)| basis.eigenvalue(i + 1) * z * z)
            .sum();
        let l2 = self.z1.iter().map(|z| z * z).sum();
        (h1, l2)
    }
}

/// A state `(y0, y1)` given by orthonormal modal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub value: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl ModalState {
    pub fn zeros(modes: usize) -> Self {
        Self {
            value: vec![0.0; modes],
            velocity: vec![0.0; modes],
        }
    }

    /// `||y0||^2_{L^2} + ||y1||^2_{H^{-1}}`, with `||y1||^2 = sum y1_n^2 / lambda_n`.
    pub fn norm_sq(&self, basis: &SpectralBasis) -> f64 {
        self.value.iter().map(|v| v * v).sum::<f64>()
            + self
                .velocity
                .iter()
                .enumerate()
                .map(|(i, v)| v * v / basis.eigenvalue(i + 1))
                .sum::<f64>()
    }

    /// Pairing with adjoint data: `sum y1_n z0_n - y0_n z1_n`.
    pub fn pairing(&self, datum: &AdjointDatum) -> f64 {
        self.velocity
            .iter()
            .zip(&datum.z0)
            .map(|(y, z)| y * z)
            .sum::<f64>()
            - self
                .value
                .iter()
                .zip(&datum.z1)
                .map(|(y, z)| y * z)
                .sum::<f64>()
    }
}

impl From<&InitialData> for ModalState {
    fn from(data: &InitialData) -> Self {
        Self {
            value: data.u0.clone(),
            velocity: data.u1.clone(),
        }
    }
}

/// One single-mode adjoint solution.
#[derive(Debug, Clone, Copy)]
struct AdjointElement {
    n: usize,
    roots: ModalRoots,
    /// Coefficients of `w(tau) = z(T - tau)`.
    coeffs: ModalCoefficients,
    /// `e_n'(pi)`.
    slope: f64,
}

/// Adjoint solutions for the final data `(e_j / sqrt(lambda_j), 0)` and
/// `(0, e_j)`, `j = 1..N`, in that order. The first family is scaled to unit
/// `H^1_0` norm.
#[derive(Debug, Clone)]
pub struct AdjointBasis {
    pub params: ModelParams,
    pub basis: SpectralBasis,
    pub horizon: f64,
    pub modes: usize,
    elements: Vec<AdjointElement>,
}

impl AdjointBasis {
    pub fn new(params: &ModelParams, horizon: f64, modes: usize) -> Result<Self> {
        if modes == 0 || horizon <= 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "need modes >= 1 and T > 0, got {modes} and {horizon}"
            )));
        }
        let basis = SpectralBasis::orthonormal(*params);
        let roots = mode_roots_range(&basis, modes)?;
        let mut elements = Vec::with_capacity(2 * modes);
        // z(T) = z0, z_t(T) = z1  <=>  w(0) = z0, w'(0) = -z1
        for family in 0..2 {
            for r in &roots {
                let (u0, u1) = if family == 0 {
                    (1.0 / r.lambda.sqrt(), 0.0)
                } else {
                    (0.0, -1.0)
                };
                elements.push(AdjointElement {
                    n: r.n,
                    roots: *r,
                    coeffs: exact_coefficients(params, r, u0, u1)?,
                    slope: basis.derivative_at_pi(r.n),
                });
            }
        }
        Ok(Self {
            params: *params,
            basis,
            horizon,
            modes,
            elements,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Final datum of basis element `j`.
    pub fn datum(&self, j: usize) -> AdjointDatum {
        let mut z0 = vec![0.0; self.modes];
        let mut z1 = vec![0.0; self.modes];
        let e = &self.elements[j];
        if j < self.modes {
            z0[e.n - 1] = 1.0 / e.roots.lambda.sqrt();
        } else {
            z1[e.n - 1] = 1.0;
        }
        AdjointDatum {
            z0,
            z1,
            horizon: self.horizon,
        }
    }

    /// Expresses an adjoint datum in this basis.
    pub fn coordinates(&self, datum: &AdjointDatum) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.len());
        for (i, e) in self.elements.iter().enumerate() {
            c.push(if i < self.modes {
                datum.z0.get(e.n - 1).copied().unwrap_or(0.0) * e.roots.lambda.sqrt()
            } else {
                datum.z1.get(e.n - 1).copied().unwrap_or(0.0)
            });
        }
        c
    }

    pub fn fastest_frequency(&self) -> f64 {
        self.elements
            .iter()
            .fold(0.0, |m, e| m.max(e.roots.omega.re))
    }

    /// `z_x(t, pi)` of element `j`.
    pub fn displacement_trace(&self, j: usize, t: f64) -> f64 {
        let e = &self.elements[j];
        e.slope * e.coeffs.value(&e.roots, self.horizon - t)
    }

    /// `(B z)(t)` of element `j`.
    pub fn observation(&self, j: usize, t: f64) -> f64 {
        let e = &self.elements[j];
        let tau = self.horizon - t;
        let s = e.roots.exponent();
        let memory = 2.0 * (e.coeffs.amplitude * kernel_convolution(&self.params, s, tau)).re
            + e.coeffs.constant
                * kernel_convolution(&self.params, Complex64::new(0.0, 0.0), tau).re
            + e.coeffs.transient
                * kernel_convolution(&self.params, Complex64::new(e.roots.rho, 0.0), tau).re;
        let g2 = self.params.gamma() * self.params.gamma();
        -g2 * e.slope * (e.coeffs.value(&e.roots, tau) - memory)
    }

    /// `B z` for the datum with the given coordinates.
    pub fn combined_observation(&self, coords: &[f64], t: f64) -> f64 {
        coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| c * self.observation(j, t))
            .sum()
    }

    /// `z_x(t, pi)` for the datum with the given coordinates.
    pub fn combined_displacement_trace(&self, coords: &[f64], t: f64) -> f64 {
        coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| c * self.displacement_trace(j, t))
            .sum()
    }
}

/// `z_x(., pi)` of every basis element, sampled on `grid`.
pub fn adjoint_trace_basis(
    params: &ModelParams,
    horizon: f64,
    modes: usize,
    grid: &[f64],
) -> Result<Vec<TraceSignal>> {
    let basis = AdjointBasis::new(params, horizon, modes)?;
    check_grid(grid, basis.fastest_frequency())?;
    Ok((0..basis.len())
        .map(|j| TraceSignal::sample(grid, |t| basis.displacement_trace(j, t)))
        .collect())
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl GramMatrix {
    pub fn condition(&self) -> f64 {
        if self.min_eigenvalue > 0.0 {
            self.max_eigenvalue / self.min_eigenvalue
        } else {
            f64::INFINITY
        }
    }
}

/// `Lambda_jk = int_0^T (B phi_j)(B phi_k) dt`, symmetrized.
///
/// Fails with `NotPositiveDefinite` when the smallest eigenvalue is not
/// distinguishable from rounding, `100 * dim * eps * max`.
pub fn gram_matrix(adjoint: &AdjointBasis) -> Result<GramMatrix> {
    let dim = adjoint.len();
    let entries = integrate_converged(
        0.0,
        adjoint.horizon,
        adjoint.fastest_frequency(),
        |rule: &CompositeRule| {
            let rows: Vec<Vec<f64>> = (0..dim)
                .into_par_iter()
                .map(|j| {
                    rule.points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&t, w)| w.sqrt() * adjoint.observation(j, t))
                        .collect()
                })
                .collect();
            let phi = DMatrix::from_fn(dim, rule.points.len(), |i, k| rows[i][k]);
            let g = &phi * phi.transpose();
            g.as_slice().to_vec()
        },
    )?;
    let raw = DMatrix::from_column_slice(dim, dim, &entries);
    let matrix = (&raw + raw.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(matrix.clone());
    let min_eigenvalue = eigen.eigenvalues.min();
    let max_eigenvalue = eigen.eigenvalues.max();
    if min_eigenvalue <= 100.0 * dim as f64 * f64::EPSILON * max_eigenvalue.abs() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue,
            max_eigenvalue,
        });
    }
    Ok(GramMatrix {
        matrix,
        min_eigenvalue,
        max_eigenvalue,
    })
}

/// A control `f = B z` in closed form.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    pub adjoint: AdjointBasis,
    pub coordinates: Vec<f64>,
}

impl ControlSignal {
    pub fn eval(&self, t: f64) -> f64 {
        self.adjoint.combined_observation(&self.coordinates, t)
    }

    pub fn sample(&self, grid: &[f64]) -> TraceSignal {
        TraceSignal::sample(grid, |t| self.eval(t))
    }

    /// `||f||_{L^2(0,T)}`.
    pub fn l2_norm(&self) -> Result<f64> {
        crate::quadrature::integrate_scalar(
            0.0,
            self.adjoint.horizon,
            self.adjoint.fastest_frequency(),
            |t| self.eval(t).powi(2),
        )
        .map(f64::sqrt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HumOptions {
    /// Diagonal shift added to the Gram matrix. Zero reproduces plain HUM.
    pub tikhonov: f64,
}

#[derive(Debug, Clone)]
pub struct ControlResult {
    pub control: ControlSignal,
    /// `control` sampled on the default trace grid.
    pub f: TraceSignal,
    pub gram_condition: f64,
    pub gram_min_eigenvalue: f64,
    pub achieved: ModalState,
    /// Relative final-state error in the truncated `L^2 x H^{-1}` norm.
    pub target_error: f64,
    pub control_norm: f64,
}

/// Load vector `b_k = <target, phi_k>`.
fn load_vector(adjoint: &AdjointBasis, target: &ModalState) -> DVector<f64> {
    DVector::from_fn(adjoint.len(), |k, _| target.pairing(&adjoint.datum(k)))
}

/// Steers the zero state to `target` at time `T` with `N` modes.
pub fn solve_hum(
    params: &ModelParams,
    target: &ModalState,
    horizon: f64,
    modes: usize,
    options: HumOptions,
) -> Result<ControlResult> {
    if target.value.len() != modes || target.velocity.len() != modes {
        return Err(Error::ConstraintViolation(format!(
            "target must be truncated at {modes} modes"
        )));
    }
    let adjoint = AdjointBasis::new(params, horizon, modes)?;
    let gram = gram_matrix(&adjoint)?;
    let condition = gram.condition();
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            condition,
            limit: MAX_CONDITION,
        });
    }
    let mut system = gram.matrix.clone();
    for i in 0..system.nrows() {
        system[(i, i)] += options.tikhonov;
    }
    let b = load_vector(&adjoint, target);
    let coords = system
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: gram.min_eigenvalue,
            max_eigenvalue: gram.max_eigenvalue,
        })?
        .solve(&b);
    let control = ControlSignal {
        adjoint,
        coordinates: coords.as_slice().to_vec(),
    };
    let achieved = verify_control(params, |t| control.eval(t), horizon, modes)?;
    let target_error = relative_state_error(&control.adjoint.basis, &achieved, target);
    let grid = crate::series::default_grid(horizon, control.adjoint.fastest_frequency());
    let control_norm = control.l2_norm()?;
    Ok(ControlResult {
        f: control.sample(&grid),
        control,
        gram_condition: condition,
        gram_min_eigenvalue: gram.min_eigenvalue,
        achieved,
        target_error,
        control_norm,
    })
}

/// `||achieved - target|| / ||target||`, or the absolute error for a zero target.
pub fn relative_state_error(
    basis: &SpectralBasis,
    achieved: &ModalState,
    target: &ModalState,
) -> f64 {
    let diff = ModalState {
        value: achieved
            .value
            .iter()
            .zip(&target.value)
            .map(|(a, b)| a - b)
            .collect(),
        velocity: achieved
            .velocity
            .iter()
            .zip(&target.velocity)
            .map(|(a, b)| a - b)
            .collect(),
    };
    let t = target.norm_sq(basis).sqrt();
    let d = diff.norm_sq(basis).sqrt();
    if t > 0.0 {
        d / t
    } else {
        d
    }
}

/// Final state `(u_n(T), u_n'(T))`, `n = 1..N`, of the boundary-controlled
/// modal system started from rest.
///
/// The memories of every `u_n` and of `f` are carried as auxiliary states, as
/// in [`crate::series::volterra_oracle`].
pub fn verify_control<F>(
    params: &ModelParams,
    f: F,
    horizon: f64,
    modes: usize,
) -> Result<ModalState>
where
    F: Fn(f64) -> f64 + Sync,
{
    let basis = SpectralBasis::orthonormal(*params);
    let (b1, b2, r1, r2) = (params.b1(), params.b2(), params.r1(), params.r2());
    let g2 = params.gamma() * params.gamma();
    let lambdas: Vec<f64> = (1..=modes).map(|n| basis.eigenvalue(n)).collect();
    let forcing: Vec<f64> = (1..=modes)
        .map(|n| -g2 * basis.derivative_at_pi(n))
        .collect();
    // layout: [g1, g2, (u, u', m1, m2) per mode]
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let ft = f(t);
        dy[0] = ft - r1 * y[0];
        dy[1] = ft - r2 * y[1];
        let drive = ft - b1 * y[0] - b2 * y[1];
        for n in 0..modes {
            let k = 2 + 4 * n;
            let lambda = lambdas[n];
            dy[k] = y[k + 1];
            dy[k + 1] =
                -lambda * y[k] + lambda * (b1 * y[k + 2] + b2 * y[k + 3]) + forcing[n] * drive;
            dy[k + 2] = y[k] - r1 * y[k + 2];
            dy[k + 3] = y[k] - r2 * y[k + 3];
        }
    };
    let y0 = vec![0.0; 2 + 4 * modes];
    let fastest = lambdas.last().map_or(1.0, |l| l.sqrt());
    let (states, _) = rk4_converged(&rhs, &y0, horizon, steps_for(horizon, fastest, 64.0))?;
    let last = states.last().expect("at least the initial state");
    Ok(ModalState {
        value: (0..modes).map(|n| last[2 + 4 * n]).collect(),
        velocity: (0..modes).map(|n| last[3 + 4 * n]).collect(),
    })
}
