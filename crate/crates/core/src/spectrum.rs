//! Modal characteristic roots.
//!
//! Seeking `v(t) = e^{st}` in the memory equation of a single mode and
//! clearing the kernel denominators gives the quartic
//!
//! ```text
//! p(s) = (s^2 + lambda)(s + r1)(s + r2) - lambda b1 (s + r2) - lambda b2 (s + r1).
//! ```
//!
//! Its constant term is `lambda r1 r2 (1 - b1/r1 - b2/r2) = 0`, so `s = 0` is
//! always a root. The remaining cubic has one real root `rho < 0` and a
//! complex pair `{i omega, conj(i omega)}` with `Im omega > 0`, at least for
//! all but possibly the lowest modes.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralBasis};

/// Imaginary parts below `IMAG_TOLERANCE * (1 + |s|)` count as real.
pub const IMAG_TOLERANCE: f64 = 1e-10;

/// Roots of the modal quartic for one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalRoots {
    /// Mode index, or 0 when the roots were computed for a bare eigenvalue.
    pub n: usize,
    pub lambda: f64,
    /// Complex frequency; the oscillatory exponent is `s = i omega`.
    pub omega: Complex64,
    /// Real decay rate.
    pub rho: f64,
    /// Largest relative quartic residual over the four roots.
    pub residual: f64,
}

impl ModalRoots {
    /// `s = i omega`, the exponent of `C e^{i omega t}`.
    pub fn exponent(&self) -> Complex64 {
        Complex64::i() * self.omega
    }

    /// The four roots `[i omega, conj(i omega), 0, rho]`.
    pub fn all(&self) -> [Complex64; 4] {
        let s = self.exponent();
        [
            s,
            s.conj(),
            Complex64::new(0.0, 0.0),
            Complex64::new(self.rho, 0.0),
        ]
    }
}

/// Evaluates the modal quartic at `s`.
pub fn characteristic_poly(params: &ModelParams, lambda: f64, s: Complex64) -> Complex64 {
    let (b1, b2, r1, r2) = (params.b1(), params.b2(), params.r1(), params.r2());
    (s * s + lambda) * (s + r1) * (s + r2) - lambda * b1 * (s + r2) - lambda * b2 * (s + r1)
}

fn characteristic_derivative(params: &ModelParams, lambda: f64, s: Complex64) -> Complex64 {
    let (b1, b2, r1, r2) = (params.b1(), params.b2(), params.r1(), params.r2());
    2.0 * s * (s + r1) * (s + r2) + (s * s + lambda) * (2.0 * s + r1 + r2) - lambda * (b1 + b2)
}

/// Magnitude of the terms summed in [`characteristic_poly`]; the residual is
/// reported relative to it.
fn evaluation_scale(params: &ModelParams, lambda: f64, s: Complex64) -> f64 {
    let (b1, b2, r1, r2) = (params.b1(), params.b2(), params.r1(), params.r2());
    (s * s + lambda).norm() * (s + r1).norm() * (s + r2).norm()
        + lambda * b1 * (s + r2).norm()
        + lambda * b2 * (s + r1).norm()
}

/// `|p(s)|` relative to the size of its terms.
pub fn relative_residual(params: &ModelParams, lambda: f64, s: Complex64) -> f64 {
    let scale = evaluation_scale(params, lambda, s);
    if scale == 0.0 {
        return 0.0;
    }
    characteristic_poly(params, lambda, s).norm() / scale
}

/// Monic coefficients `[a2, a1, a0]` of the cubic `p(s) / s`.
pub fn deflated_cubic(params: &ModelParams, lambda: f64) -> [f64; 3] {
    [
        params.r_sum(),
        params.r1() * params.r2() + lambda,
        lambda * (params.r_sum() - params.b_sum()),
    ]
}

fn polish(params: &ModelParams, lambda: f64, s: Complex64) -> Complex64 {
    let d = characteristic_derivative(params, lambda, s);
    if d.norm() == 0.0 {
        return s;
    }
    let candidate = s - characteristic_poly(params, lambda, s) / d;
    if relative_residual(params, lambda, candidate) < relative_residual(params, lambda, s) {
        candidate
    } else {
        s
    }
}

/// Roots of the modal quartic for eigenvalue `lambda`.
///
/// `s = 0` is removed analytically, the cubic is solved through the
/// eigenvalues of its companion matrix, and each root receives one Newton
/// step on the full quartic.
pub fn exact_roots(params: &ModelParams, lambda: f64) -> Result<ModalRoots> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::ConstraintViolation(format!(
            "eigenvalue must be positive, got {lambda}"
        )));
    }
    let [a2, a1, a0] = deflated_cubic(params, lambda);
    #[rustfmt::skip]
    let companion = Matrix3::new(
        -a2, -a1, -a0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
    );
    let eigen = companion.complex_eigenvalues();

    let mut real = Vec::with_capacity(3);
    let mut complex = Vec::with_capacity(2);
    for z in eigen.iter() {
        if z.im.abs() > IMAG_TOLERANCE * (1.0 + z.norm()) {
            complex.push(*z);
        } else {
            real.push(z.re);
        }
    }
    if real.len() != 1 || complex.len() != 2 {
        return Err(Error::RootClassificationFailure {
            lambda,
            detail: format!(
                "deflated cubic has {} real and {} complex roots: {:?}",
                real.len(),
                complex.len(),
                eigen.as_slice()
            ),
        });
    }

    let upper = if complex[0].im > 0.0 {
        complex[0]
    } else {
        complex[1]
    };
    let s = polish(params, lambda, upper);
    // keep the pair exactly conjugate
    let s = Complex64::new(s.re, s.im.abs());
    let rho = polish(params, lambda, Complex64::new(real[0], 0.0)).re;

    if s.re >= 0.0 || rho >= 0.0 {
        return Err(Error::RootClassificationFailure {
            lambda,
            detail: format!("non-decaying root: s = {s}, rho = {rho}"),
        });
    }

    // omega = -i s
    let omega = Complex64::new(s.im, -s.re);
    let zero = Complex64::new(0.0, 0.0);
    let residual = [s, s.conj(), zero, Complex64::new(rho, 0.0)]
        .iter()
        .map(|&z| relative_residual(params, lambda, z))
        .fold(0.0, f64::max);

    Ok(ModalRoots {
        n: 0,
        lambda,
        omega,
        rho,
        residual,
    })
}

/// Roots for mode `n` of the sine basis.
pub fn mode_roots(basis: &SpectralBasis, n: usize) -> Result<ModalRoots> {
    let mut roots = exact_roots(&basis.params, basis.eigenvalue(n))?;
    roots.n = n;
    Ok(roots)
}

/// Roots for modes `1..=modes`.
pub fn mode_roots_range(basis: &SpectralBasis, modes: usize) -> Result<Vec<ModalRoots>> {
    (1..=modes).map(|n| mode_roots(basis, n)).collect()
}

/// Largest relative deviation of the elementary symmetric functions of the
/// four roots from the quartic's coefficients.
pub fn vieta_defect(params: &ModelParams, roots: &ModalRoots) -> f64 {
    let [a2, a1, a0] = deflated_cubic(params, roots.lambda);
    let s = roots.exponent();
    let sc = s.conj();
    let rho = Complex64::new(roots.rho, 0.0);
    // With the zero root the quartic's e1..e3 are the cubic's, e4 = 0.
    let e1 = s + sc + rho;
    let e2 = s * sc + s * rho + sc * rho;
    let e3 = s * sc * rho;
    let rel = |got: Complex64, want: f64| (got - want).norm() / want.abs().max(1.0);
    rel(e1, -a2).max(rel(e2, a1)).max(rel(e3, -a0))
}

/// Leading terms `(sqrt(lambda) + i (b1+b2)/2, b1 + b2 - r1 - r2)` of the
/// large-eigenvalue expansions of `omega` and `rho`.
pub fn asymptotic_roots(params: &ModelParams, lambda: f64) -> (Complex64, f64) {
    (
        Complex64::new(lambda.sqrt(), params.b_sum() / 2.0),
        params.b_sum() - params.r_sum(),
    )
}

/// Gap and tail statistics of the exact roots.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLimits {
    /// `liminf (Re omega_{n+1} - Re omega_n)`, estimated over the upper half
    /// of the retained modes.
    pub gap: f64,
    /// Limit of `Im omega_n`.
    pub alpha_omega: f64,
    /// Limit of `rho_n`.
    pub alpha_rho: f64,
    /// Pairs `(epsilon, n0)` with `n0` the smallest index from which both gap
    /// bounds hold on the retained range.
    pub n0_table: Vec<(f64, usize)>,
    pub retained: usize,
}

impl SpectralLimits {
    /// The exact limits implied by the root expansions: gap `gamma`,
    /// `alpha_omega = (b1+b2)/2`, `alpha_rho = b1+b2-r1-r2`.
    pub fn asymptotic(params: &ModelParams) -> Self {
        Self {
            gap: params.gamma(),
            alpha_omega: params.b_sum() / 2.0,
            alpha_rho: params.b_sum() - params.r_sum(),
            n0_table: Vec::new(),
            retained: 0,
        }
    }

    pub fn n0(&self, epsilon: f64) -> Option<usize> {
        self.n0_table
            .iter()
            .find(|(e, _)| (e - epsilon).abs() <= 1e-15)
            .map(|&(_, n0)| n0)
    }
}

/// Smallest `n0` such that for all `n, m` in `n0..=N`
/// `|Re w_n - Re w_m| >= gap sqrt(1-eps) |n-m|` and `Re w_n >= gap sqrt(1-eps) n`.
pub fn gap_index(roots: &[ModalRoots], gap: f64, epsilon: f64) -> Option<usize> {
    let slope = gap * (1.0 - epsilon).sqrt();
    let re: Vec<f64> = roots.iter().map(|r| r.omega.re).collect();
    // Every violation involving indices n < m forces n0 > n.
    let mut n0 = 1;
    for i in 0..re.len() {
        let n = i + 1;
        if re[i] < slope * n as f64 {
            n0 = n0.max(n + 1);
        }
        for j in (i + 1)..re.len() {
            if (re[j] - re[i]).abs() < slope * (j - i) as f64 {
                n0 = n0.max(n + 1);
            }
        }
    }
    (n0 <= re.len()).then_some(n0)
}

/// Gap, tail limits and gap-lemma indices from the exact roots of modes
/// `1..=modes`.
pub fn spectral_limits(
    basis: &SpectralBasis,
    modes: usize,
    epsilons: &[f64],
) -> Result<(SpectralLimits, Vec<ModalRoots>)> {
    if modes < 10 {
        return Err(Error::ConstraintViolation(format!(
            "spectral limits need at least 10 modes, got {modes}"
        )));
    }
    let roots = mode_roots_range(basis, modes)?;
    let gap = roots[modes / 2..]
        .windows(2)
        .map(|w| w[1].omega.re - w[0].omega.re)
        .fold(f64::INFINITY, f64::min);
    if gap <= 0.0 {
        return Err(Error::GapDegenerate { gap });
    }
    let last = roots[modes - 1];
    let mut n0_table = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::ConstraintViolation(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
        let n0 =
            gap_index(&roots, gap, eps).ok_or(Error::NotFoundWithinRange { retained: modes })?;
        n0_table.push((eps, n0));
    }
    Ok((
        SpectralLimits {
            gap,
            alpha_omega: last.omega.im,
            alpha_rho: last.rho,
            n0_table,
            retained: modes,
        },
        roots,
    ))
}

/// `T0 = 2 pi / sqrt(gap^2 - 16 alpha_omega^2)`.
pub fn control_time_threshold(limits: &SpectralLimits) -> Result<f64> {
    let gap = limits.gap;
    let alpha = limits.alpha_omega;
    if gap <= 4.0 * alpha {
        return Err(Error::NoThreshold {
            gap,
            alpha_omega: alpha,
        });
    }
    Ok(2.0 * std::f64::consts::PI / (gap * gap - 16.0 * alpha * alpha).sqrt())
}
