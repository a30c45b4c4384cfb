//! Modal amplitudes of the solution
//!
//! ```text
//! v(t) = C e^{i omega t} + conj(C) e^{-i conj(omega) t} + R1 + R2 e^{rho t}
//! ```
//!
//! for one mode with data `v(0) = u0n`, `v'(0) = u1n`.
//!
//! The four real unknowns `(Re C, Im C, R1, R2)` are pinned by the first four
//! derivatives at `t = 0`. Both memory integrals vanish at `t = 0`, so the
//! equation gives `v''(0) = -lambda u0n`, and differentiating once more
//! (using `d/dt int_0^t e^{-r(t-s)} v ds = v(t) - r int_0^t ...`) gives
//! `v'''(0) = -lambda u1n + lambda (b1 + b2) u0n`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{InitialData, ModelParams, SpectralBasis};
use crate::spectrum::ModalRoots;

/// Relative separation below which two roots are treated as confluent.
pub const CONFLUENCE_TOLERANCE: f64 = 1e-10;

/// Amplitudes of the four exponentials of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalCoefficients {
    pub n: usize,
    /// `C_n`, amplitude of `e^{i omega t}`.
    pub amplitude: Complex64,
    /// `R_{1,n}`, the time-constant part.
    pub constant: f64,
    /// `R_{2,n}`, amplitude of `e^{rho t}`.
    pub transient: f64,
}

impl ModalCoefficients {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            amplitude: Complex64::new(0.0, 0.0),
            constant: 0.0,
            transient: 0.0,
        }
    }

    /// `v(t)`.
    pub fn value(&self, roots: &ModalRoots, t: f64) -> f64 {
        let s = roots.exponent();
        2.0 * (self.amplitude * (s * t).exp()).re
            + self.constant
            + self.transient * (roots.rho * t).exp()
    }

    /// `v'(t)`.
    pub fn velocity(&self, roots: &ModalRoots, t: f64) -> f64 {
        self.derivative(roots, t, 1)
    }

    /// `d^k v / dt^k` at `t`.
    pub fn derivative(&self, roots: &ModalRoots, t: f64, order: u32) -> f64 {
        if order == 0 {
            return self.value(roots, t);
        }
        let s = roots.exponent();
        2.0 * (self.amplitude * s.powu(order) * (s * t).exp()).re
            + self.transient * roots.rho.powi(order as i32) * (roots.rho * t).exp()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            amplitude: self.amplitude * factor,
            constant: self.constant * factor,
            transient: self.transient * factor,
        }
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            amplitude: self.amplitude + other.amplitude,
            constant: self.constant + other.constant,
            transient: self.transient + other.transient,
        }
    }
}

/// `int_0^t e^{-r (t - tau)} e^{s tau} d tau`, stable as `s + r -> 0`.
pub fn exponential_convolution(s: Complex64, r: f64, t: f64) -> Complex64 {
    let z = (s + r) * t;
    // (e^z - 1) / z
    let phi = if z.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    };
    (-r * t).exp() * t * phi
}

/// `(k * e^{s .})(t)` for the composite kernel.
pub fn kernel_convolution(params: &ModelParams, s: Complex64, t: f64) -> Complex64 {
    params.b1() * exponential_convolution(s, params.r1(), t)
        + params.b2() * exponential_convolution(s, params.r2(), t)
}

fn check_confluence(roots: &ModalRoots) -> Result<()> {
    let all = roots.all();
    let scale = 1.0 + roots.omega.norm();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = (all[i] - all[j]).norm();
            if d <= CONFLUENCE_TOLERANCE * scale {
                return Err(Error::SingularSystem {
                    n: roots.n,
                    detail: format!("roots {} and {} coincide to {d:e}", all[i], all[j]),
                });
            }
        }
    }
    Ok(())
}

/// Solves the four initial conditions for `(C, R1, R2)`.
pub fn exact_coefficients(
    params: &ModelParams,
    roots: &ModalRoots,
    u0n: f64,
    u1n: f64,
) -> Result<ModalCoefficients> {
    if !(u0n.is_finite() && u1n.is_finite()) {
        return Err(Error::ConstraintViolation("non-finite modal data".into()));
    }
    check_confluence(roots)?;
    let lambda = roots.lambda;
    let s = roots.exponent();
    let rho = roots.rho;
    // Row k is divided by mu^k to keep the Vandermonde-type system balanced.
    let mu = lambda.sqrt().max(1.0);
    let mut m = Matrix4::zeros();
    let mut sk = Complex64::new(1.0, 0.0);
    let mut rk = 1.0;
    for k in 0..4 {
        let w = mu.powi(-(k as i32));
        m[(k, 0)] = 2.0 * sk.re * w;
        m[(k, 1)] = -2.0 * sk.im * w;
        m[(k, 2)] = if k == 0 { 1.0 } else { 0.0 };
        m[(k, 3)] = rk * w;
        sk *= s;
        rk *= rho;
    }
    let rhs = Vector4::new(
        u0n,
        u1n / mu,
        -lambda * u0n / (mu * mu),
        lambda * (-u1n + params.b_sum() * u0n) / (mu * mu * mu),
    );
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::SingularSystem {
        n: roots.n,
        detail: "initial-condition matrix is singular".into(),
    })?;
    Ok(ModalCoefficients {
        n: roots.n,
        amplitude: Complex64::new(x[0], x[1]),
        constant: x[2],
        transient: x[3],
    })
}

/// Exact coefficients for every mode of `data`.
pub fn exact_coefficients_all(
    params: &ModelParams,
    roots: &[ModalRoots],
    data: &InitialData,
) -> Result<Vec<ModalCoefficients>> {
    if roots.len() < data.truncation() {
        return Err(Error::ConstraintViolation(format!(
            "{} roots for {} modes",
            roots.len(),
            data.truncation()
        )));
    }
    roots
        .iter()
        .zip(data.u0.iter().zip(&data.u1))
        .map(|(r, (&u0, &u1))| exact_coefficients(params, r, u0, u1))
        .collect()
}

/// Data `(u0n, u1n)` whose exact coefficients have oscillatory amplitude `C`.
///
/// The data-to-amplitude map is real-linear and two-dimensional, so `C` fixes
/// the data and with it `R1` and `R2`.
pub fn data_for_amplitude(
    params: &ModelParams,
    roots: &ModalRoots,
    amplitude: Complex64,
) -> Result<(f64, f64, ModalCoefficients)> {
    let from_u0 = exact_coefficients(params, roots, 1.0, 0.0)?;
    let from_u1 = exact_coefficients(params, roots, 0.0, 1.0)?;
    let m = Matrix2::new(
        from_u0.amplitude.re,
        from_u1.amplitude.re,
        from_u0.amplitude.im,
        from_u1.amplitude.im,
    );
    let x = m
        .lu()
        .solve(&Vector2::new(amplitude.re, amplitude.im))
        .ok_or_else(|| Error::SingularSystem {
            n: roots.n,
            detail: "amplitude map is not invertible".into(),
        })?;
    let coeffs = from_u0.scaled(x[0]).add(&from_u1.scaled(x[1]));
    Ok((x[0], x[1], coeffs))
}

/// Leading terms of the large-eigenvalue expansions of `C`, `R1`, `R2`.
pub fn asymptotic_coefficients(
    params: &ModelParams,
    lambda: f64,
    u0n: f64,
    u1n: f64,
) -> ModalCoefficients {
    let b = params.b_sum();
    let (r1, r2) = (params.r1(), params.r2());
    let sqrt_lambda = lambda.sqrt();
    let amplitude = Complex64::new(u0n / 2.0, -(b * u0n + 2.0 * u1n) / (4.0 * sqrt_lambda));
    let constant = r1 * r2 * u1n / ((r1 + r2 - b) * lambda);
    let transient = (b - r1) * (b - r2) * (u0n * (b - r1 - r2) + u1n) / ((b - r1 - r2) * lambda);
    ModalCoefficients {
        n: 0,
        amplitude,
        constant,
        transient,
    }
}

/// `v'' + lambda v - lambda (k * v)` at `t`, with the memory term in closed
/// form. Vanishes for exact coefficients.
pub fn equation_residual(
    params: &ModelParams,
    roots: &ModalRoots,
    coeffs: &ModalCoefficients,
    t: f64,
) -> f64 {
    let lambda = roots.lambda;
    let s = roots.exponent();
    let memory = 2.0 * (coeffs.amplitude * kernel_convolution(params, s, t)).re
        + coeffs.constant * kernel_convolution(params, Complex64::new(0.0, 0.0), t).re
        + coeffs.transient * kernel_convolution(params, Complex64::new(roots.rho, 0.0), t).re;
    coeffs.derivative(roots, t, 2) + lambda * coeffs.value(roots, t) - lambda * memory
}

/// Empirical constant of the bound `|R1| + |R2| <= M |C| / sqrt(lambda_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    pub m_hat: f64,
    /// Decay exponent of the bound in `n`; `sqrt(lambda_n) = gamma n` gives 1.
    pub nu: f64,
    pub worst_n: usize,
    /// `(n, (|R1| + |R2|) sqrt(lambda_n) / |C|)` for every admitted mode.
    pub ratios: Vec<(usize, f64)>,
}

/// Amplitudes below this are skipped in ratio statistics.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

pub fn remainder_report(coeffs: &[ModalCoefficients], lambdas: &[f64]) -> Result<RemainderReport> {
    let ratios: Vec<(usize, f64)> = coeffs
        .iter()
        .zip(lambdas)
        .filter(|(c, _)| c.amplitude.norm() >= AMPLITUDE_FLOOR)
        .map(|(c, &lambda)| {
            (
                c.n,
                (c.constant.abs() + c.transient.abs()) * lambda.sqrt() / c.amplitude.norm(),
            )
        })
        .collect();
    let &(worst_n, m_hat) = ratios
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::AllAmplitudesZero)?;
    Ok(RemainderReport {
        m_hat,
        nu: 1.0,
        worst_n,
        ratios,
    })
}

/// `sum lambda_n |C_n|^2 / (||u0||^2_{D(sqrt L)} + ||u1||^2_H)`.
pub fn norm_equivalence(
    basis: &SpectralBasis,
    coeffs: &[ModalCoefficients],
    data: &InitialData,
) -> Result<f64> {
    let energy = data.energy(basis);
    if energy <= 0.0 {
        return Err(Error::ZeroData);
    }
    let weighted: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| basis.eigenvalue(i + 1) * c.amplitude.norm_sqr())
        .sum();
    Ok(weighted / energy)
}
