//! Parameter points, estimates and regime classification shared by every
//! computation route.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("sigma must be finite and positive, got {0}")]
    InvalidSigma(f64),
    #[error("lambda must be finite, got {0}")]
    InvalidLambda(f64),
    #[error("invalid regime thresholds: nu_lo = {nu_lo}, nu_hi_pos = {nu_hi_pos}, nu_hi_neg = {nu_hi_neg}")]
    InvalidThresholds {
        nu_lo: f64,
        nu_hi_pos: f64,
        nu_hi_neg: f64,
    },
}

/// Sign of the energy λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(lambda: f64) -> Self {
        if lambda > 0.0 {
            Sign::Positive
        } else if lambda < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    /// `+1`, `-1` or `0`.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
            Sign::Zero => "zero",
        })
    }
}

/// The parameter pair (λ, σ) with the derived frequency ω = √|λ| and the
/// dimensionless ν = 2ω³/σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    lambda: f64,
    sigma: f64,
    omega: f64,
    nu: f64,
    sign: Sign,
}

impl SpectralPoint {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self, ModelError> {
        if !lambda.is_finite() {
            return Err(ModelError::InvalidLambda(lambda));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ModelError::InvalidSigma(sigma));
        }
        let omega = lambda.abs().sqrt();
        let nu = 2.0 * omega.powi(3) / (sigma * sigma);
        if !nu.is_finite() {
            return Err(ModelError::InvalidSigma(sigma));
        }
        Ok(Self {
            lambda,
            sigma,
            omega,
            nu,
            sign: Sign::of(lambda),
        })
    }

    /// Builds the point realizing frequency `omega`, energy sign `sign` and
    /// dimensionless parameter `nu`, i.e. σ = √(2ω³/ν).
    pub fn from_omega_nu(omega: f64, sign: Sign, nu: f64) -> Result<Self, ModelError> {
        if !(omega.is_finite() && omega > 0.0) || sign == Sign::Zero {
            return Err(ModelError::InvalidLambda(sign.factor() * omega * omega));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(ModelError::InvalidSigma(f64::NAN));
        }
        let sigma = (2.0 * omega.powi(3) / nu).sqrt();
        Self::new(sign.factor() * omega * omega, sigma)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }
}

/// Convenience wrapper over [`SpectralPoint::new`].
pub fn make_spectral_point(lambda: f64, sigma: f64) -> Result<SpectralPoint, ModelError> {
    SpectralPoint::new(lambda, sigma)
}

/// Computation route that produced a [`GammaEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactQuadrature,
    AsymptoticSmallNu,
    AsymptoticLargeNuPos,
    AsymptoticLargeNuNeg,
    MonteCarlo,
    Uniform,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactQuadrature => "exact_quadrature",
            Method::AsymptoticSmallNu => "asymptotic_small_nu",
            Method::AsymptoticLargeNuPos => "asymptotic_large_nu_pos",
            Method::AsymptoticLargeNuNeg => "asymptotic_large_nu_neg",
            Method::MonteCarlo => "monte_carlo",
            Method::Uniform => "uniform",
        })
    }
}

/// A value of the Lyapunov exponent γ together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// γ/ω; `None` at the band edge ω = 0.
    pub gamma_over_omega: Option<f64>,
    pub method: Method,
    /// The route actually evaluated when `method` is [`Method::Uniform`].
    pub sub_method: Option<Method>,
    pub abs_error: f64,
}

impl GammaEstimate {
    pub fn new(point: &SpectralPoint, gamma: f64, method: Method, abs_error: f64) -> Self {
        let omega = point.omega();
        Self {
            gamma,
            gamma_over_omega: (omega > 0.0).then(|| gamma / omega),
            method,
            sub_method: None,
            abs_error: abs_error.abs(),
        }
    }

    /// Re-tags an estimate as coming from the uniform evaluator.
    pub fn into_uniform(mut self) -> Self {
        self.sub_method = Some(self.method);
        self.method = Method::Uniform;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    SmallNu,
    Bulk,
    LargeNuPos,
    LargeNuNeg,
}

/// Boundaries between the asymptotic windows and the bulk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub nu_lo: f64,
    pub nu_hi_pos: f64,
    pub nu_hi_neg: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            nu_lo: 1e-3,
            nu_hi_pos: 6.0,
            nu_hi_neg: 40.0,
        }
    }
}

impl RegimeThresholds {
    pub fn new(nu_lo: f64, nu_hi_pos: f64, nu_hi_neg: f64) -> Result<Self, ModelError> {
        let t = Self {
            nu_lo,
            nu_hi_pos,
            nu_hi_neg,
        };
        let ok = nu_lo > 0.0 && nu_lo.is_finite() && nu_hi_pos > nu_lo && nu_hi_neg > nu_lo;
        if ok && nu_hi_pos.is_finite() && nu_hi_neg.is_finite() {
            Ok(t)
        } else {
            Err(ModelError::InvalidThresholds {
                nu_lo,
                nu_hi_pos,
                nu_hi_neg,
            })
        }
    }

    /// Upper boundary applying to energies of the given sign.
    pub fn nu_hi(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Negative => self.nu_hi_neg,
            _ => self.nu_hi_pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub nu_lo: f64,
    pub nu_hi: f64,
}

/// Assigns a point to an asymptotic window or the bulk. Boundary values
/// belong to the asymptotic window; λ = 0 is always small-ν.
pub fn classify_regime(point: &SpectralPoint, thresholds: &RegimeThresholds) -> Regime {
    let nu_lo = thresholds.nu_lo;
    let nu_hi = thresholds.nu_hi(point.sign());
    let nu = point.nu();
    let kind = match point.sign() {
        Sign::Zero => RegimeKind::SmallNu,
        _ if nu <= nu_lo => RegimeKind::SmallNu,
        Sign::Positive if nu >= nu_hi => RegimeKind::LargeNuPos,
        Sign::Negative if nu >= nu_hi => RegimeKind::LargeNuNeg,
        _ => RegimeKind::Bulk,
    };
    Regime { kind, nu_lo, nu_hi }
}
