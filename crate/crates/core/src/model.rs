//! Physical parameters of the two-kernel memory model and the sine basis of
//! the Dirichlet operator `L = -gamma^2 d^2/dx^2` on `(0, pi)`.
//!
//! Each mode `n` of the solution obeys
//!
//! ```text
//! v'' + lambda_n v - lambda_n * (k * v) = 0,   k(t) = b1 e^{-r1 t} + b2 e^{-r2 t},
//! ```
//!
//! with `lambda_n = gamma^2 n^2`. The admissible parameters satisfy
//! `b1/r1 + b2/r2 = 1` and `r1 + r2 > b1 + b2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Absolute tolerance on `b1/r1 + b2/r2 = 1`.
pub const RELAXATION_TOLERANCE: f64 = 1e-12;

/// Validated constants of the memory wave equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    b1: f64,
    b2: f64,
    r1: f64,
    r2: f64,
    strong_condition: bool,
}

impl ModelParams {
    /// Checks positivity, the relaxation identity `b1/r1 + b2/r2 = 1` and the
    /// dissipation condition `r1 + r2 > b1 + b2`.
    ///
    /// The stronger `1.5 (b1 + b2) < r1 + r2` is only recorded, see
    /// [`ModelParams::strong_condition`].
    pub fn new(gamma: f64, b1: f64, b2: f64, r1: f64, r2: f64) -> Result<Self> {
        for (name, value) in [
            ("gamma", gamma),
            ("b1", b1),
            ("b2", b2),
            ("r1", r1),
            ("r2", r2),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::ConstraintViolation(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        let relaxation = b1 / r1 + b2 / r2;
        if (relaxation - 1.0).abs() > RELAXATION_TOLERANCE {
            return Err(Error::ConstraintViolation(format!(
                "b1/r1 + b2/r2 = {relaxation} differs from 1"
            )));
        }
        let margin = r1 + r2 - b1 - b2;
        if margin <= 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "r1 + r2 - b1 - b2 = {margin} is not positive"
            )));
        }
        Ok(Self {
            gamma,
            b1,
            b2,
            r1,
            r2,
            strong_condition: 1.5 * (b1 + b2) < r1 + r2,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// `b1 + b2`
    pub fn b_sum(&self) -> f64 {
        self.b1 + self.b2
    }

    /// `r1 + r2`
    pub fn r_sum(&self) -> f64 {
        self.r1 + self.r2
    }

    /// Whether `1.5 (b1 + b2) < r1 + r2` holds (the hypothesis of the
    /// reachability statement). Not required by anything in this crate.
    pub fn strong_condition(&self) -> bool {
        self.strong_condition
    }

    /// Composite relaxation kernel `k(t) = b1 e^{-r1 t} + b2 e^{-r2 t}`.
    pub fn kernel(&self, t: f64) -> f64 {
        self.b1 * (-self.r1 * t).exp() + self.b2 * (-self.r2 * t).exp()
    }

    pub fn kernel_derivative(&self, t: f64) -> f64 {
        -self.b1 * self.r1 * (-self.r1 * t).exp() - self.b2 * self.r2 * (-self.r2 * t).exp()
    }

    /// `int_0^t k(s) ds`, which stays below 1 for every `t` because the
    /// relaxation identity makes its limit exactly 1.
    pub fn kernel_integral(&self, t: f64) -> f64 {
        self.b1 / self.r1 * (-(-self.r1 * t).exp_m1())
            + self.b2 / self.r2 * (-(-self.r2 * t).exp_m1())
    }
}

/// Scaling of the sine eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `sqrt(2/pi) sin(n x)`, orthonormal in `L^2(0, pi)`.
    #[default]
    Orthonormal,
    /// Bare `sin(n x)`.
    Bare,
}

impl Normalization {
    /// Factor multiplying `sin(n x)`.
    pub fn factor(self) -> f64 {
        match self {
            Normalization::Orthonormal => (2.0 / PI).sqrt(),
            Normalization::Bare => 1.0,
        }
    }
}

/// Eigenpairs `(gamma^2 n^2, c sin(n x))` of the Dirichlet operator on `(0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBasis {
    pub params: ModelParams,
    pub normalization: Normalization,
}

impl SpectralBasis {
    pub fn new(params: ModelParams, normalization: Normalization) -> Self {
        Self {
            params,
            normalization,
        }
    }

    pub fn orthonormal(params: ModelParams) -> Self {
        Self::new(params, Normalization::Orthonormal)
    }

    /// `lambda_n = gamma^2 n^2`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        assert!(n >= 1, "modes are indexed from 1");
        let g = self.params.gamma();
        let n = n as f64;
        g * g * n * n
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        self.normalization.factor() * (n as f64 * x).sin()
    }

    pub fn eigenfunction_derivative(&self, n: usize, x: f64) -> f64 {
        let n = n as f64;
        self.normalization.factor() * n * (n * x).cos()
    }

    /// `e_n'(pi) = c n (-1)^n`, exact.
    pub fn derivative_at_pi(&self, n: usize) -> f64 {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.normalization.factor() * n as f64
    }

    /// `e_n'(0) = c n`.
    pub fn derivative_at_zero(&self, n: usize) -> f64 {
        self.normalization.factor() * n as f64
    }

    /// Multiplier taking expansion coefficients in this basis to orthonormal ones.
    pub fn to_orthonormal_factor(&self) -> f64 {
        self.normalization.factor() / Normalization::Orthonormal.factor()
    }

    /// Expansion coefficients `a_1..a_N` of a function sampled at the uniform
    /// grid `x_j = j pi / M`, `j = 0..=M`, so that `u ~ sum a_n e_n`.
    ///
    /// Uses the trapezoidal rule, which is exact on the discrete sine modes
    /// below the Nyquist index. Requires at least 8 samples per shortest
    /// wavelength, i.e. `M >= 4 N`.
    pub fn project(&self, samples: &[f64], modes: usize) -> Result<Vec<f64>> {
        if samples.len() < 2 {
            return Err(Error::GridTooCoarse("need at least two samples".into()));
        }
        let intervals = samples.len() - 1;
        if intervals < 4 * modes {
            return Err(Error::GridTooCoarse(format!(
                "{intervals} intervals cannot resolve {modes} modes (need {})",
                4 * modes
            )));
        }
        let h = PI / intervals as f64;
        let c = self.normalization.factor();
        // sum_j h u(x_j) sin(n x_j) = <u, sin(n .)>; ||c sin||^2 = c^2 pi / 2
        let norm_sq = c * c * PI / 2.0;
        Ok((1..=modes)
            .map(|n| {
                let inner: f64 = samples[1..intervals]
                    .iter()
                    .enumerate()
                    .map(|(j, &u)| u * (n as f64 * (j + 1) as f64 * h).sin())
                    .sum::<f64>()
                    * h
                    * c;
                inner / norm_sq
            })
            .collect())
    }

    /// `sum_n a_n e_n(x)`.
    pub fn synthesize(&self, coefficients: &[f64], x: f64) -> f64 {
        coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| a * self.eigenfunction(i + 1, x))
            .sum()
    }
}

/// Modal coefficients of the initial displacement and velocity, truncated at
/// `N = u0.len()`, expressed in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

impl InitialData {
    pub fn new(u0: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        if u0.len() != u1.len() {
            return Err(Error::ConstraintViolation(format!(
                "displacement has {} modes, velocity {}",
                u0.len(),
                u1.len()
            )));
        }
        if u0.iter().chain(&u1).any(|v| !v.is_finite()) {
            return Err(Error::ConstraintViolation(
                "non-finite modal coefficient".into(),
            ));
        }
        Ok(Self { u0, u1 })
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            u0: vec![0.0; modes],
            u1: vec![0.0; modes],
        }
    }

    pub fn truncation(&self) -> usize {
        self.u0.len()
    }

    /// `||u0||^2_{D(sqrt L)} = sum lambda_n u0n^2`.
    pub fn displacement_energy(&self, basis: &SpectralBasis) -> f64 {
        self.u0
            .iter()
            .enumerate()
            .map(|(i, u)| basis.eigenvalue(i + 1) * u * u)
            .sum()
    }

    /// `||u1||^2_H = sum u1n^2`.
    pub fn velocity_energy(&self) -> f64 {
        self.u1.iter().map(|u| u * u).sum()
    }

    pub fn energy(&self, basis: &SpectralBasis) -> f64 {
        self.displacement_energy(basis) + self.velocity_energy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn canonical() -> ModelParams {
        ModelParams::new(1.0, 0.05, 0.15, 0.1, 0.3).unwrap()
    }

    #[test]
    fn canonical_parameters_are_valid_and_strong() {
        let p = canonical();
        assert!(p.strong_condition());
        assert_relative_eq!(p.r_sum() - p.b_sum(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn equal_rates_are_valid() {
        let p = ModelParams::new(1.0, 0.1, 0.1, 0.2, 0.2).unwrap();
        // 1.5 * 0.2 = 0.3 < 0.4
        assert!(p.strong_condition());
    }

    #[test]
    fn relaxation_identity_is_enforced() {
        let err = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(ref m) if m.contains("b1/r1")));
    }

    #[test]
    fn dissipation_margin_follows_from_relaxation() {
        // b1 + b2 = x r1 + (1 - x) r2 <= max(r1, r2) whenever b1/r1 + b2/r2 = 1
        for (r1, r2, x) in [(0.1, 0.3, 0.5), (1.0, 50.0, 0.01), (3.0, 3.0, 0.9)] {
            let p = ModelParams::new(1.0, x * r1, (1.0 - x) * r2, r1, r2).unwrap();
            assert!(p.r_sum() - p.b_sum() >= r1.min(r2) - 1e-12);
        }
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        assert!(ModelParams::new(0.0, 0.05, 0.15, 0.1, 0.3).is_err());
        assert!(ModelParams::new(1.0, -0.05, 0.15, 0.1, 0.3).is_err());
        assert!(ModelParams::new(1.0, 0.05, 0.15, f64::NAN, 0.3).is_err());
    }

    #[test]
    fn weak_but_not_strong() {
        // 0.05/1 + 9.5/10 = 1, r-sum 11 > b-sum 9.55 but 1.5 * 9.55 > 11
        let p = ModelParams::new(1.0, 0.05, 9.5, 1.0, 10.0).unwrap();
        assert!(!p.strong_condition());
    }

    #[test]
    fn eigenvalues() {
        let b = SpectralBasis::orthonormal(canonical());
        assert_eq!(b.eigenvalue(3), 9.0);
        assert_eq!(b.eigenvalue(1), 1.0);
        let p2 = ModelParams::new(2.0, 0.05, 0.15, 0.1, 0.3).unwrap();
        assert_eq!(SpectralBasis::orthonormal(p2).eigenvalue(1), 4.0);
    }

    #[test]
    fn eigenfunctions_vanish_on_boundary() {
        let b = SpectralBasis::new(canonical(), Normalization::Bare);
        for n in 1..50 {
            assert!(b.eigenfunction(n, 0.0).abs() < 1e-15);
            assert!(b.eigenfunction(n, PI).abs() < 1e-13 * n as f64);
            assert_relative_eq!(
                b.derivative_at_pi(n),
                b.eigenfunction_derivative(n, PI),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn project_sin_x() {
        let b = SpectralBasis::orthonormal(canonical());
        let m = 64;
        let samples: Vec<f64> = (0..=m).map(|j| (j as f64 * PI / m as f64).sin()).collect();
        let a = b.project(&samples, 8).unwrap();
        assert_relative_eq!(a[0], (PI / 2.0).sqrt(), epsilon = 1e-14);
        assert!(a[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn project_two_modes() {
        let b = SpectralBasis::new(canonical(), Normalization::Bare);
        let m = 40;
        let samples: Vec<f64> = (0..=m)
            .map(|j| {
                let x = j as f64 * PI / m as f64;
                (2.0 * x).sin() + (5.0 * x).sin()
            })
            .collect();
        let a = b.project(&samples, 10).unwrap();
        for (i, v) in a.iter().enumerate() {
            let expected = if i + 1 == 2 || i + 1 == 5 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-13, "mode {} -> {v}", i + 1);
        }
    }

    #[test]
    fn project_zero() {
        let b = SpectralBasis::orthonormal(canonical());
        assert!(b.project(&[0.0; 41], 10).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coarse_grid_rejected() {
        let b = SpectralBasis::orthonormal(canonical());
        assert!(matches!(
            b.project(&[0.0; 40], 10),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn kernel_hypotheses() {
        for p in [
            canonical(),
            ModelParams::new(1.0, 0.1, 0.1, 0.2, 0.2).unwrap(),
        ] {
            assert!(p.kernel(0.0) > 0.0);
            for i in 0..2000 {
                let t = i as f64 * 0.05;
                assert!(p.kernel_derivative(t) <= 0.0);
                assert!(p.kernel_integral(t) < 1.0);
            }
            assert!((p.kernel_integral(1e4) - 1.0).abs() < 1e-12);
        }
    }
}
