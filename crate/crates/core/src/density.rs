//! Stationary density of the phase process.
//!
//! For the drift potential `Φ` the density is `p(x) = C q(x)` with the
//! shifted tail integral
//!
//! ```text
//! q(x) = ∫₀^∞ exp(−ν[s·A(x) + s²x + s³/3]) ds,   A = 1 + x² (λ > 0),  A = x² − 1 (λ < 0)
//! ```
//!
//! and `C⁻¹ = √(2π/ν) · 2∫₀^∞ exp(−2Φ(u²)) du`. Every quantity is evaluated
//! as a log-magnitude plus a bounded remainder integral, so neither
//! `exp(Φ(x))` nor `exp(4ν/3)` is ever formed.

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::model::Sign;
use crate::quad::{
    integrate_half_line_scaled, integrate_real_line_with_breaks, QuadError, QuadResult, QuadSpec,
};

/// Above this ν a negative-energy kernel reports values in log form.
pub const LOG_MODE_NU: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("invalid density parameter: {0}")]
    InvalidParameter(String),
    #[error("log mode is required for negative energy at nu = {nu} > {LOG_MODE_NU}")]
    LogModeRequired { nu: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPotential {
    sign: Sign,
    nu: f64,
}

impl DriftPotential {
    pub fn new(sign: Sign, nu: f64) -> Result<Self, DensityError> {
        if sign == Sign::Zero {
            return Err(DensityError::InvalidParameter(
                "the density needs a nonzero energy".into(),
            ));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(DensityError::InvalidParameter(format!(
                "nu must be finite and positive, got {nu}"
            )));
        }
        Ok(Self { sign, nu })
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `ν(x + x³/3)` or `ν(x³/3 − x)`.
    pub fn value(&self, x: f64) -> f64 {
        let cubic = x * x * x / 3.0;
        match self.sign {
            Sign::Negative => self.nu * (cubic - x),
            _ => self.nu * (cubic + x),
        }
    }

    /// The coefficient `A(x)` with `Φ′(x) = ν A(x)`.
    pub fn slope_factor(&self, x: f64) -> f64 {
        match self.sign {
            Sign::Negative => x * x - 1.0,
            _ => 1.0 + x * x,
        }
    }

    /// `Φ(x + s) − Φ(x)`, in the nested form that avoids cancellation.
    fn increment(&self, x: f64, a: f64, s: f64) -> f64 {
        self.nu * s * (a + s * (x + s / 3.0))
    }

    /// Maximum over `s ≥ 0` of `−(Φ(x + s) − Φ(x))`.
    fn increment_peak(&self, x: f64) -> f64 {
        if self.sign == Sign::Negative && x < 1.0 {
            (self.nu * (1.0 - x) * (1.0 - x) * (2.0 + x) / 3.0).max(0.0)
        } else {
            0.0
        }
    }
}

pub fn potential_value(pot: &DriftPotential, x: f64) -> f64 {
    pot.value(x)
}

/// A value that is either plain or a natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    Linear(f64),
    Log(f64),
}

impl DensityValue {
    pub fn ln(self) -> f64 {
        match self {
            DensityValue::Linear(v) => v.ln(),
            DensityValue::Log(l) => l,
        }
    }

    /// The plain value; may overflow to `inf` or underflow to 0 in log mode.
    pub fn value(self) -> f64 {
        match self {
            DensityValue::Linear(v) => v,
            DensityValue::Log(l) => l.exp(),
        }
    }

    fn from_ln(ln: f64, log_mode: bool) -> Self {
        if log_mode {
            DensityValue::Log(ln)
        } else {
            DensityValue::Linear(ln.exp())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityKernel {
    pub potential: DriftPotential,
    pub spec: QuadSpec,
    log_mode: bool,
}

impl DensityKernel {
    /// Log mode is switched on whenever it is required.
    pub fn new(potential: DriftPotential, spec: QuadSpec) -> Self {
        Self {
            potential,
            spec,
            log_mode: Self::log_mode_required(&potential),
        }
    }

    pub fn log_mode_required(potential: &DriftPotential) -> bool {
        potential.sign == Sign::Negative && potential.nu > LOG_MODE_NU
    }

    pub fn with_log_mode(mut self, log_mode: bool) -> Result<Self, DensityError> {
        if !log_mode && Self::log_mode_required(&self.potential) {
            return Err(DensityError::LogModeRequired {
                nu: self.potential.nu,
            });
        }
        self.log_mode = log_mode;
        Ok(self)
    }

    pub fn log_mode(&self) -> bool {
        self.log_mode
    }

    pub fn nu(&self) -> f64 {
        self.potential.nu
    }

    pub fn sign(&self) -> Sign {
        self.potential.sign
    }
}

fn peak_breaks(center: f64, width: f64, out: &mut Vec<f64>) {
    for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
        out.push(center + k * width);
    }
}

/// `(ln q(x), relative error)`.
fn ln_q_with_error(pot: &DriftPotential, x: f64, spec: &QuadSpec) -> Result<(f64, f64), QuadError> {
    let nu = pot.nu;
    let a = pot.slope_factor(x);
    let mut scale = (3.0 / nu).cbrt();
    if a > 0.0 {
        scale = scale.min(1.0 / (nu * a));
    }
    if x != 0.0 {
        scale = scale.min(1.0 / (nu * x.abs()).sqrt());
    }
    let shift = pot.increment_peak(x);
    let mut breaks = vec![scale, 10.0 * scale];
    let peak = pot.nu * (1.0 - x) * (1.0 - x) * (2.0 + x) / 3.0;
    if pot.sign == Sign::Negative && x < 1.0 && peak > -60.0 {
        let width = 1.0 / (2.0 * nu).sqrt();
        peak_breaks(1.0 - x, width.min(0.5 * (1.0 - x)), &mut breaks);
        if x < -1.0 {
            breaks.push(-1.0 - x);
        }
    }
    let r = integrate_half_line_scaled(
        |s| (-pot.increment(x, a, s) - shift).exp(),
        scale,
        &breaks,
        spec,
    )?;
    Ok((shift + r.value.ln(), r.err_estimate / r.value))
}

/// `(ln C, relative error)`.
fn ln_c_with_error(pot: &DriftPotential, spec: &QuadSpec) -> Result<(f64, f64), QuadError> {
    let nu = pot.nu;
    let (shift, scale, breaks) = match pot.sign {
        Sign::Negative => {
            let width = 1.0 / (4.0 * nu.sqrt());
            let mut b = Vec::new();
            peak_breaks(1.0, width.min(0.25), &mut b);
            b.push(1.0 + 20.0 * width);
            (4.0 * nu / 3.0, (1.5 / nu).powf(1.0 / 6.0).min(1.0), b)
        }
        _ => (
            0.0,
            (1.5 / nu).powf(1.0 / 6.0).min(1.0 / (2.0 * nu).sqrt()),
            Vec::new(),
        ),
    };
    let mut breaks = breaks;
    breaks.extend([scale, 10.0 * scale]);
    let r = integrate_half_line_scaled(
        |u| {
            let x = u * u;
            (-2.0 * pot.value(x) - shift).exp()
        },
        scale,
        &breaks,
        spec,
    )?;
    let ln_c_inv = 0.5 * (2.0 * std::f64::consts::PI / nu).ln()
        + std::f64::consts::LN_2
        + shift
        + r.value.ln();
    Ok((-ln_c_inv, r.err_estimate / r.value))
}

/// The shifted tail integral `q(x)`, or `ln q(x)` in log mode.
pub fn unnormalized_density(k: &DensityKernel, x: f64) -> Result<DensityValue, DensityError> {
    if !x.is_finite() {
        return Err(DensityError::InvalidParameter(format!(
            "x must be finite, got {x}"
        )));
    }
    let (ln_q, _) = ln_q_with_error(&k.potential, x, &k.spec)?;
    Ok(DensityValue::from_ln(ln_q, k.log_mode))
}

/// The normalization constant `C`, or `ln C` in log mode.
pub fn normalization_constant(k: &DensityKernel) -> Result<DensityValue, DensityError> {
    let (ln_c, _) = ln_c_with_error(&k.potential, &k.spec)?;
    Ok(DensityValue::from_ln(ln_c, k.log_mode))
}

/// `|C·∫q − 1|`, comparing the closed-form constant with direct
/// normalization of `q`.
pub fn normalization_cross_check(k: &DensityKernel) -> Result<f64, DensityError> {
    let density = NormalizedDensity::new(*k)?;
    let total = density.integrate_against(|_| 1.0)?;
    Ok((total.value - 1.0).abs())
}

/// Largest pointwise residual of the constant-flux form of the stationary
/// equation, `(1/ν)p′ − A(x)p + C/ν = 0`, over `grid`. Each residual is
/// scaled by `|p′|/ν + |A p| + C/ν`; `p′` comes from a five-point central
/// difference with step `h`.
pub fn stationarity_residual(k: &DensityKernel, grid: &[f64], h: f64) -> Result<f64, DensityError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(DensityError::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    let density = NormalizedDensity::new(*k)?;
    let nu = k.nu();
    let flux = density.ln_c().exp() / nu;
    let mut worst: f64 = 0.0;
    for &x in grid {
        let p = |y: f64| density.pdf(y);
        let dp =
            (p(x - 2.0 * h)? - 8.0 * p(x - h)? + 8.0 * p(x + h)? - p(x + 2.0 * h)?) / (12.0 * h);
        let ap = k.potential.slope_factor(x) * p(x)?;
        let residual = dp / nu - ap + flux;
        let scale = (dp / nu).abs() + ap.abs() + flux;
        worst = worst.max(residual.abs() / scale);
    }
    Ok(worst)
}

/// The normalized density `p = C q` with `ln q` memoized on evaluation
/// points, so several functionals of `p` share inner quadratures.
#[derive(Debug)]
pub struct NormalizedDensity {
    kernel: DensityKernel,
    ln_c: f64,
    c_rel_err: f64,
    cache: RefCell<HashMap<u64, (f64, f64)>>,
    inner_rel_err: RefCell<f64>,
}

impl NormalizedDensity {
    pub fn new(kernel: DensityKernel) -> Result<Self, DensityError> {
        let (ln_c, c_rel_err) = ln_c_with_error(&kernel.potential, &kernel.spec)?;
        Ok(Self {
            kernel,
            ln_c,
            c_rel_err,
            cache: RefCell::new(HashMap::new()),
            inner_rel_err: RefCell::new(0.0),
        })
    }

    pub fn kernel(&self) -> &DensityKernel {
        &self.kernel
    }

    pub fn ln_c(&self) -> f64 {
        self.ln_c
    }

    /// Relative error estimate of `C`.
    pub fn c_rel_err(&self) -> f64 {
        self.c_rel_err
    }

    /// Largest relative error of any inner integral evaluated so far.
    pub fn inner_rel_err(&self) -> f64 {
        *self.inner_rel_err.borrow()
    }

    pub fn ln_q(&self, x: f64) -> Result<f64, DensityError> {
        if let Some(&(v, _)) = self.cache.borrow().get(&x.to_bits()) {
            return Ok(v);
        }
        let (v, rel) = ln_q_with_error(&self.kernel.potential, x, &self.kernel.spec)?;
        self.cache.borrow_mut().insert(x.to_bits(), (v, rel));
        let mut worst = self.inner_rel_err.borrow_mut();
        *worst = worst.max(rel);
        Ok(v)
    }

    pub fn pdf(&self, x: f64) -> Result<f64, DensityError> {
        Ok((self.ln_c + self.ln_q(x)?).exp())
    }

    /// Points splitting the real line where `p` changes character.
    pub fn outer_breaks(&self) -> Vec<f64> {
        let nu = self.kernel.nu();
        let mut b = vec![-1.0, 0.0, 1.0];
        let scale = nu.powf(-1.0 / 3.0);
        if scale > 2.0 {
            for k in [0.3, 1.0, 3.0, 10.0] {
                b.push(k * scale);
                b.push(-k * scale);
            }
        }
        if self.kernel.sign() == Sign::Negative {
            let width = 1.0 / (2.0 * nu).sqrt();
            if width < 0.3 {
                peak_breaks(-1.0, width, &mut b);
            }
        }
        b
    }

    /// `∫ p(x) g(x) dx` over the real line.
    pub fn integrate_against<G>(&self, g: G) -> Result<QuadResult, DensityError>
    where
        G: Fn(f64) -> f64,
    {
        let mut failure: Option<DensityError> = None;
        let result = integrate_real_line_with_breaks(
            |x| {
                let w = g(x);
                if w == 0.0 {
                    return 0.0;
                }
                match self.pdf(x) {
                    Ok(p) => p * w,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &self.outer_breaks(),
            &self.kernel.spec,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(result?)
    }
}
