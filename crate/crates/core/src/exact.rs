//! Lyapunov exponent as an average of explicit rational functions against
//! the stationary phase density.
//!
//! ```text
//! λ > 0:  γ = (ω/ν) ∫ p(x) (1 − x²)/(1 + x²)² dx
//! λ < 0:  γ = (ω/ν) ∫ p(x) (1 − x²)/(1 + x²)² dx − 2ω ∫ p(x) x/(1 + x²) dx
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityError, DensityKernel, DriftPotential, NormalizedDensity};
use crate::model::{GammaEstimate, Method, Sign, SpectralPoint};
use crate::quad::QuadSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error(
        "nu = {nu} (sign {sign}) is outside the exact range [{lo}, {hi}]; use the asymptotic route"
    )]
    OutOfRange {
        nu: f64,
        sign: Sign,
        lo: f64,
        hi: f64,
    },
    #[error("wrong energy sign for this routine: expected {expected}, got {got}")]
    WrongSign { expected: Sign, got: Sign },
    #[error("exact quadrature produced a non-positive exponent {gamma}")]
    NonPositive { gamma: f64 },
    #[error("invalid exact configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub quad: QuadSpec,
    pub nu_exact_range: (f64, f64),
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            quad: QuadSpec::default().with_max_subdivisions(200),
            nu_exact_range: (1e-6, 1e4),
        }
    }
}

impl ExactConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.quad = self.quad.with_rel_tol(rel_tol);
        self
    }

    pub fn validate(&self) -> Result<(), ExactError> {
        let (lo, hi) = self.nu_exact_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(ExactError::InvalidConfig(format!(
                "nu range must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        self.quad
            .validate()
            .map_err(|e| ExactError::InvalidConfig(e.to_string()))
    }

    pub fn contains(&self, nu: f64) -> bool {
        let (lo, hi) = self.nu_exact_range;
        nu >= lo && nu <= hi
    }
}

fn density_for(
    p: &SpectralPoint,
    cfg: &ExactConfig,
    expected: Sign,
) -> Result<NormalizedDensity, ExactError> {
    cfg.validate()?;
    if p.sign() != expected {
        return Err(ExactError::WrongSign {
            expected,
            got: p.sign(),
        });
    }
    if !cfg.contains(p.nu()) {
        let (lo, hi) = cfg.nu_exact_range;
        return Err(ExactError::OutOfRange {
            nu: p.nu(),
            sign: p.sign(),
            lo,
            hi,
        });
    }
    let kernel = DensityKernel::new(DriftPotential::new(p.sign(), p.nu())?, cfg.quad);
    Ok(NormalizedDensity::new(kernel)?)
}

/// `(ω/ν)∫p(1−x²)/(1+x²)²` with its error estimate.
fn rotation_term(d: &NormalizedDensity, omega: f64, nu: f64) -> Result<(f64, f64), ExactError> {
    let r = d.integrate_against(|x| {
        let x2 = x * x;
        let den = 1.0 + x2;
        (1.0 - x2) / (den * den)
    })?;
    let rel = d.c_rel_err() + d.inner_rel_err();
    let scale = omega / nu;
    Ok((
        scale * r.value,
        scale * (r.err_estimate + rel * r.value.abs()),
    ))
}

fn finish(p: &SpectralPoint, gamma: f64, err: f64) -> Result<GammaEstimate, ExactError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ExactError::NonPositive { gamma });
    }
    Ok(GammaEstimate::new(p, gamma, Method::ExactQuadrature, err))
}

pub fn gamma_exact_pos(p: &SpectralPoint, cfg: &ExactConfig) -> Result<GammaEstimate, ExactError> {
    let d = density_for(p, cfg, Sign::Positive)?;
    let (gamma, err) = rotation_term(&d, p.omega(), p.nu())?;
    finish(p, gamma, err)
}

pub fn gamma_exact_neg(p: &SpectralPoint, cfg: &ExactConfig) -> Result<GammaEstimate, ExactError> {
    let d = density_for(p, cfg, Sign::Negative)?;
    let (i1, e1) = rotation_term(&d, p.omega(), p.nu())?;
    let r = d.integrate_against(|x| x / (1.0 + x * x))?;
    let rel = d.c_rel_err() + d.inner_rel_err();
    let i2 = -2.0 * p.omega() * r.value;
    let e2 = 2.0 * p.omega() * (r.err_estimate + rel * r.value.abs());
    finish(p, i1 + i2, e1 + e2)
}

/// Dispatches on the sign of λ.
pub fn gamma_exact(p: &SpectralPoint, cfg: &ExactConfig) -> Result<GammaEstimate, ExactError> {
    match p.sign() {
        Sign::Positive => gamma_exact_pos(p, cfg),
        Sign::Negative => gamma_exact_neg(p, cfg),
        Sign::Zero => {
            let (lo, hi) = cfg.nu_exact_range;
            Err(ExactError::OutOfRange {
                nu: 0.0,
                sign: Sign::Zero,
                lo,
                hi,
            })
        }
    }
}
