//! Small- and large-ν asymptotics of the Lyapunov exponent and of the
//! normalization constant, and the regime-switching evaluator.
//!
//! The universal constant is
//!
//! ```text
//! c = 3^{5/6} / (√π 2^{2/3} Γ(1/6)) · ∫₀^∞ [2Q(0) − Q(s) − Q(−s)] / s² ds,
//! Q(s) = ∫₀^∞ exp(−(t³/3 + s t² + s² t)) dt,
//! ```
//!
//! the symmetric-pair form of a principal-value integral.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

use crate::exact::{gamma_exact, ExactConfig, ExactError};
use crate::model::{
    classify_regime, GammaEstimate, Method, RegimeKind, RegimeThresholds, Sign, SpectralPoint,
};
use crate::quad::{integrate_half_line_scaled, QuadError, QuadSpec};

/// Number of small-ν coefficients `a₀ … a₄` kept in [`AsymptoticConstants`].
pub const SMALL_NU_TERMS: usize = 5;
/// Number of large-ν coefficients `b₀ … b₄` kept in [`AsymptoticConstants`].
pub const LARGE_NU_TERMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptError {
    #[error("formula needs {expected} energy, got {got}")]
    WrongSign { expected: Sign, got: Sign },
    #[error("nu = {nu} is outside the validity range of this expansion ({range})")]
    OutOfRange { nu: f64, range: &'static str },
    #[error("at least one series term is required")]
    NoTerms,
    #[error("s must be finite, got {0}")]
    InvalidArgument(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `∫₀^∞ exp(−(t³/3 + s t² + s² t)) dt`.
pub fn kernel_q(s: f64, spec: &QuadSpec) -> Result<f64, AsymptError> {
    if !s.is_finite() {
        return Err(AsymptError::InvalidArgument(s));
    }
    let scale = if s == 0.0 {
        3f64.cbrt()
    } else {
        3f64.cbrt().min(1.0 / (s * s))
    };
    let mut breaks = vec![scale, 10.0 * scale];
    if s < 0.0 {
        breaks.extend([-s - 2.0, -s, -s + 2.0]);
    }
    let r = integrate_half_line_scaled(
        |t| (-t * (s * s + t * (s + t / 3.0))).exp(),
        scale,
        &breaks,
        spec,
    )?;
    Ok(r.value)
}

/// `dQ/ds = −∫₀^∞ (t² + 2st) exp(−(t³/3 + s t² + s² t)) dt`.
pub fn kernel_q_derivative(s: f64, spec: &QuadSpec) -> Result<f64, AsymptError> {
    if !s.is_finite() {
        return Err(AsymptError::InvalidArgument(s));
    }
    let scale = if s == 0.0 {
        3f64.cbrt()
    } else {
        3f64.cbrt().min(1.0 / (s * s))
    };
    let mut breaks = vec![scale, 10.0 * scale];
    if s < 0.0 {
        breaks.extend([-2.0 * s, -s - 2.0, -s, -s + 2.0]);
    }
    let r = integrate_half_line_scaled(
        |t| -(t * (t + 2.0 * s)) * (-t * (s * s + t * (s + t / 3.0))).exp(),
        scale,
        &breaks,
        spec,
    )?;
    Ok(r.value)
}

/// `[2Q(0) − Q(s) − Q(−s)] / s²`, extended by its limit 0 at `s = 0`.
///
/// Evaluated from the combined integrand
/// `e^{−t³/3} [2(1 − e^{−s²t}) − 4 e^{−s²t} sinh²(s t²/2)]`, which keeps the
/// small-`s` cancellation inside a single quadrature.
pub fn pair_integrand(s: f64, spec: &QuadSpec) -> Result<f64, AsymptError> {
    if !s.is_finite() {
        return Err(AsymptError::InvalidArgument(s));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let s = s.abs();
    let s2 = s * s;
    let f = |t: f64| {
        let base = -t * t * t / 3.0;
        let damp = base - s2 * t;
        let y = s * t * t;
        let rotation = if y <= 1.0 {
            let h = (0.5 * y).sinh();
            4.0 * damp.exp() * h * h
        } else {
            (damp + y).exp() - 2.0 * damp.exp() + (damp - y).exp()
        };
        2.0 * base.exp() * -(-s2 * t).exp_m1() - rotation
    };
    let breaks = [1.0 / s2, 10.0 / s2, 1.0, 3.0, s];
    let r = integrate_half_line_scaled(f, 1.0, &breaks, spec)?;
    Ok(r.value / s2)
}

fn c_prefactor() -> f64 {
    3f64.powf(5.0 / 6.0) / (PI.sqrt() * 2f64.powf(2.0 / 3.0) * gamma(1.0 / 6.0))
}

/// The universal small-ν constant `c`.
pub fn constant_c(spec: &QuadSpec) -> Result<f64, AsymptError> {
    spec.validate()?;
    let mut failure = None;
    let r = integrate_half_line_scaled(
        |s| match pair_integrand(s, spec) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        1.0,
        &[0.5, 1.0, 2.0, 4.0, 10.0],
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(c_prefactor() * r?.value)
}

/// `√π 2^{1/3} 3^{−5/6} Γ(1/6)`.
pub fn a0() -> f64 {
    PI.sqrt() * 2f64.cbrt() * 3f64.powf(-5.0 / 6.0) * gamma(1.0 / 6.0)
}

/// `aₙ = a₀ 12^{n/3} Γ(1/6 + n/3) / (Γ(1/6) n!)`, the magnitude of the
/// `ν^{2(n−1)/3}` coefficient of `C⁻¹`.
pub fn small_nu_coefficient(n: usize) -> f64 {
    let n_f = n as f64;
    let ln = (n_f / 3.0) * 12f64.ln() + ln_gamma(1.0 / 6.0 + n_f / 3.0)
        - ln_gamma(1.0 / 6.0)
        - ln_gamma(n_f + 1.0);
    a0() * ln.exp()
}

/// `bₙ = ((−1)ⁿ/n!) √π Γ(3n + ½) / 12ⁿ`.
pub fn large_nu_coefficient(n: usize) -> f64 {
    if n == 0 {
        return PI;
    }
    let n_f = n as f64;
    let ln = 0.5 * PI.ln() + ln_gamma(3.0 * n_f + 0.5) - ln_gamma(n_f + 1.0) - n_f * 12f64.ln();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * ln.exp()
}

/// Partial sum of `C⁻¹ = Σ (−1)ⁿ aₙ ν^{2(n−1)/3}` (positive energy).
pub fn series_c_inverse_small_nu(nu: f64, n_terms: usize) -> Result<f64, AsymptError> {
    series_c_inverse_small_nu_signed(nu, n_terms, Sign::Positive)
}

/// As [`series_c_inverse_small_nu`]; for negative energy every term enters
/// with a plus sign.
pub fn series_c_inverse_small_nu_signed(
    nu: f64,
    n_terms: usize,
    sign: Sign,
) -> Result<f64, AsymptError> {
    if n_terms == 0 {
        return Err(AsymptError::NoTerms);
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(AsymptError::OutOfRange {
            nu,
            range: "0 < nu < 1",
        });
    }
    let alternate = sign != Sign::Negative;
    let step = nu.powf(2.0 / 3.0);
    let mut power = 1.0 / step;
    let mut sum = 0.0;
    for n in 0..n_terms {
        let sgn = if alternate && n % 2 == 1 { -1.0 } else { 1.0 };
        sum += sgn * small_nu_coefficient(n) * power;
        power *= step;
    }
    Ok(sum)
}

/// `C = 1 / Σ bₙ ν^{−2n−1}` truncated after `n_terms` terms (positive energy).
pub fn series_c_large_nu(nu: f64, n_terms: usize) -> Result<f64, AsymptError> {
    if n_terms == 0 {
        return Err(AsymptError::NoTerms);
    }
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(AsymptError::OutOfRange {
            nu,
            range: "nu > 1",
        });
    }
    let inv2 = 1.0 / (nu * nu);
    let mut power = 1.0 / nu;
    let mut sum = 0.0;
    for n in 0..n_terms {
        sum += large_nu_coefficient(n) * power;
        power *= inv2;
    }
    Ok(1.0 / sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c_small_nu: f64,
    pub a0: f64,
    /// `a₀ … a₄`.
    pub a: Vec<f64>,
    /// `b₀ … b₄`.
    pub b: Vec<f64>,
    /// `2^{1/3} c`, the coefficient of `ν^{−1/3}` in `γ/ω`.
    pub c_quoted_check: f64,
}

impl AsymptoticConstants {
    pub fn compute(spec: &QuadSpec) -> Result<Self, AsymptError> {
        Ok(Self::from_c(constant_c(spec)?))
    }

    /// Builds the table around an already computed `c`.
    pub fn from_c(c: f64) -> Self {
        Self {
            c_small_nu: c,
            a0: a0(),
            a: (0..SMALL_NU_TERMS).map(small_nu_coefficient).collect(),
            b: (0..LARGE_NU_TERMS).map(large_nu_coefficient).collect(),
            c_quoted_check: 2f64.cbrt() * c,
        }
    }

    /// Constants at the default quadrature settings, computed once per
    /// process.
    pub fn standard() -> Result<&'static Self, AsymptError> {
        static CELL: OnceLock<Result<AsymptoticConstants, AsymptError>> = OnceLock::new();
        CELL.get_or_init(|| Self::compute(&QuadSpec::default()))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// `γ = c σ^{2/3}`, valid as ν → 0 for either sign of λ.
///
/// `abs_error` is the order-of-magnitude indicator `γ ν^{2/3}`.
pub fn gamma_asympt_small_nu(p: &SpectralPoint, c: f64) -> GammaEstimate {
    let gamma = c * p.sigma().powf(2.0 / 3.0);
    GammaEstimate::new(
        p,
        gamma,
        Method::AsymptoticSmallNu,
        gamma * p.nu().powf(2.0 / 3.0),
    )
}

fn large_nu_pos(p: &SpectralPoint) -> GammaEstimate {
    let nu = p.nu();
    let omega = p.omega();
    let gamma = p.sigma().powi(2) / (8.0 * omega * omega) * (1.0 - 15.0 / 16.0 / (nu * nu));
    GammaEstimate::new(p, gamma, Method::AsymptoticLargeNuPos, gamma / nu.powi(4))
}

fn large_nu_neg(p: &SpectralPoint) -> GammaEstimate {
    GammaEstimate::new(
        p,
        p.omega(),
        Method::AsymptoticLargeNuNeg,
        p.omega() / p.nu(),
    )
}

fn require_large(p: &SpectralPoint, expected: Sign) -> Result<(), AsymptError> {
    if p.sign() != expected {
        return Err(AsymptError::WrongSign {
            expected,
            got: p.sign(),
        });
    }
    if p.nu() < 1.0 {
        return Err(AsymptError::OutOfRange {
            nu: p.nu(),
            range: "nu >= 1",
        });
    }
    Ok(())
}

/// `γ = (σ²/8ω²)(1 − (15/16)ν⁻²)`; `abs_error` is `γ ν⁻⁴`.
pub fn gamma_asympt_large_nu_pos(p: &SpectralPoint) -> Result<GammaEstimate, AsymptError> {
    require_large(p, Sign::Positive)?;
    Ok(large_nu_pos(p))
}

/// `γ = ω`; `abs_error` is `ω/ν`.
pub fn gamma_asympt_large_nu_neg(p: &SpectralPoint) -> Result<GammaEstimate, AsymptError> {
    require_large(p, Sign::Negative)?;
    Ok(large_nu_neg(p))
}

/// The asymptote appropriate to a sweep point: small-ν below `ν = 1`,
/// otherwise the large-ν formula of the point's sign.
pub fn gamma_asympt(p: &SpectralPoint, c: f64) -> GammaEstimate {
    match p.sign() {
        _ if p.nu() < 1.0 => gamma_asympt_small_nu(p, c),
        Sign::Negative => large_nu_neg(p),
        _ => large_nu_pos(p),
    }
}

/// Evaluates γ by the route matching the point's regime under the default
/// thresholds: small-ν formula, exact quadrature in the bulk, or the
/// large-ν formula of the point's sign.
pub fn gamma_uniform(
    p: &SpectralPoint,
    cfg: &ExactConfig,
    c: f64,
) -> Result<GammaEstimate, AsymptError> {
    gamma_uniform_with(p, cfg, c, &RegimeThresholds::default())
}

/// [`gamma_uniform`] with explicit regime thresholds. Only the bulk branch
/// can fail, and only through the quadrature.
pub fn gamma_uniform_with(
    p: &SpectralPoint,
    cfg: &ExactConfig,
    c: f64,
    thresholds: &RegimeThresholds,
) -> Result<GammaEstimate, AsymptError> {
    let estimate = match classify_regime(p, thresholds).kind {
        RegimeKind::SmallNu => gamma_asympt_small_nu(p, c),
        RegimeKind::LargeNuPos => large_nu_pos(p),
        RegimeKind::LargeNuNeg => large_nu_neg(p),
        RegimeKind::Bulk => gamma_exact(p, cfg)?,
    };
    Ok(estimate.into_uniform())
}
