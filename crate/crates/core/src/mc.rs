//! Monte Carlo estimate of γ from the phase process
//!
//! ```text
//! dz = ω(1 + z²) dx − (σ/ω) dw     (λ > 0)
//! dz = ω(z² − 1) dx − (σ/ω) dw     (λ < 0)
//! ```
//!
//! accumulating the drift of `ln r`,
//! `(ω/ν)(1 − z²)/(1 + z²)²`, plus `−2ωz/(1 + z²)` when λ < 0.
//!
//! Each chain walks a fixed base grid of step `H = step_max/ω`. Base
//! Brownian increments come from one random stream; they are split
//! dyadically by Brownian bridges into `2^step_halvings` fine increments
//! using a second stream, and further split on demand near explosions
//! using a third. Runs that differ only in `step_halvings` therefore see
//! the same Brownian path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asympt::{gamma_asympt, gamma_uniform, AsymptoticConstants};
use crate::exact::ExactConfig;
use crate::model::{Sign, SpectralPoint};

/// Deepest on-demand bridge refinement of one fine step.
const MAX_SPLIT_DEPTH: u32 = 48;
/// Per-step increment bound: away from the origin a step moves `z` by at
/// most about this fraction of `|z|`.
const GROWTH_CAP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),
    #[error("chain {chain} produced a non-finite state at base step {step}")]
    ChainFailure { chain: usize, step: u64 },
    #[error("{failed} of {total} chains failed")]
    TooManyFailures { failed: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub point: SpectralPoint,
    /// Base step in units of `1/ω`.
    pub step_max: f64,
    /// Number of dyadic halvings of the base step.
    pub step_halvings: u32,
    /// x-extent of each chain, burn-in included.
    pub length: f64,
    pub chains: usize,
    pub seed: u64,
    pub z_reset: f64,
    pub burn_in: f64,
    pub z0: f64,
}

impl McConfig {
    /// Defaults: `step_max = 1e-3`, 64 chains, `length = 10⁴/γ_guess`,
    /// `z_reset = 10⁶`, burn-in 5% of the length, `z0 = 0`. The guess is the
    /// uniform evaluator, or the asymptote if that fails.
    pub fn new(point: SpectralPoint) -> Self {
        let guess = AsymptoticConstants::standard()
            .ok()
            .and_then(|k| gamma_uniform(&point, &ExactConfig::default(), k.c_small_nu).ok())
            .map(|g| g.gamma)
            .unwrap_or_else(|| gamma_asympt(&point, 0.289_308_259_834_239_26).gamma);
        let length = 1e4 / guess;
        Self {
            point,
            step_max: 1e-3,
            step_halvings: 0,
            length,
            chains: 64,
            seed: 0,
            z_reset: 1e6,
            burn_in: 0.05 * length,
            z0: 0.0,
        }
    }

    /// Sets the length and resets the burn-in to 5% of it.
    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self.burn_in = 0.05 * length;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_step_max(mut self, step_max: f64) -> Self {
        self.step_max = step_max;
        self
    }

    pub fn with_step_halvings(mut self, halvings: u32) -> Self {
        self.step_halvings = halvings;
        self
    }

    pub fn with_z0(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_z_reset(mut self, z_reset: f64) -> Self {
        self.z_reset = z_reset;
        self
    }

    fn base_step(&self) -> f64 {
        self.step_max / self.point.omega()
    }

    fn base_steps(&self) -> (u64, u64) {
        let h = self.base_step();
        (
            (self.length / h).round() as u64,
            (self.burn_in / h).round() as u64,
        )
    }

    pub fn validate(&self) -> Result<(), McError> {
        let bad = |m: String| Err(McError::InvalidConfig(m));
        if self.point.sign() == Sign::Zero {
            return bad("the phase process needs a nonzero energy".into());
        }
        if self.chains < 2 {
            return bad(format!(
                "at least 2 chains are needed for a standard error, got {}",
                self.chains
            ));
        }
        if !(self.step_max.is_finite() && self.step_max > 0.0 && self.step_max <= 0.1) {
            return bad(format!(
                "step_max must lie in (0, 0.1], got {}",
                self.step_max
            ));
        }
        if self.step_halvings > 20 {
            return bad(format!(
                "step_halvings must be at most 20, got {}",
                self.step_halvings
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return bad(format!(
                "length must be finite and positive, got {}",
                self.length
            ));
        }
        if !(self.burn_in.is_finite() && self.burn_in >= 0.0 && self.burn_in < self.length) {
            return bad(format!(
                "burn_in must lie in [0, length), got {}",
                self.burn_in
            ));
        }
        if !(self.z_reset.is_finite() && self.z_reset > 1.0) {
            return bad(format!(
                "z_reset must be finite and above 1, got {}",
                self.z_reset
            ));
        }
        if !(self.z0.is_finite() && self.z0.abs() < self.z_reset) {
            return bad(format!(
                "z0 must be finite with |z0| < z_reset, got {}",
                self.z0
            ));
        }
        let (n, burn) = self.base_steps();
        if n <= burn {
            return bad("length leaves no base steps after burn-in".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOutcome {
    /// Drift of `ln r` integrated over the post-burn-in extent.
    pub lnr_integral: f64,
    pub resets: u64,
    pub effective_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub gamma_hat: f64,
    pub std_error: f64,
    pub chains_used: usize,
    pub chains_failed: usize,
    pub resets_total: u64,
    pub effective_length: f64,
}

struct Chain<'a> {
    cfg: &'a McConfig,
    omega: f64,
    noise: f64,
    rotation_weight: f64,
    negative: bool,
    z: f64,
    resets: u64,
    lnr: f64,
    excursion: ChaCha8Rng,
}

impl Chain<'_> {
    fn cap(&self) -> f64 {
        GROWTH_CAP / (self.omega * (1.0 + self.z.abs()))
    }

    fn lnr_drift(&self) -> f64 {
        let z = self.z;
        let z2 = z * z;
        let den = 1.0 + z2;
        let mut d = self.rotation_weight * (1.0 - z2) / (den * den);
        if self.negative {
            d -= 2.0 * self.omega * z / den;
        }
        d
    }

    /// Advances over an interval of length `h` carrying Brownian increment
    /// `dw`, splitting it while the step exceeds the local cap.
    fn advance(&mut self, h: f64, dw: f64, accumulate: bool, depth: u32) {
        if h > self.cap() && depth < MAX_SPLIT_DEPTH {
            let xi: f64 = self.excursion.sample(StandardNormal);
            let first = 0.5 * dw + 0.5 * h.sqrt() * xi;
            self.advance(0.5 * h, first, accumulate, depth + 1);
            self.advance(0.5 * h, dw - first, accumulate, depth + 1);
            return;
        }
        if accumulate {
            self.lnr += self.lnr_drift() * h;
        }
        let z = self.z;
        let drift = if self.negative {
            z * z - 1.0
        } else {
            z * z + 1.0
        };
        self.z = z + self.omega * drift * h - self.noise * dw;
        if self.z.abs() > self.cfg.z_reset {
            self.z = -self.z.signum() * self.cfg.z_reset;
            self.resets += 1;
        }
    }
}

fn stream_rng(seed: u64, chain: usize, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3 * chain as u64 + lane);
    rng
}

/// Fills `out` with the `out.len()` (a power of two) dyadic sub-increments
/// of an increment `dw` over an interval of length `h`.
fn bridge_split(dw: f64, h: f64, out: &mut [f64], rng: &mut ChaCha8Rng) {
    if out.len() == 1 {
        out[0] = dw;
        return;
    }
    let xi: f64 = rng.sample(StandardNormal);
    let first = 0.5 * dw + 0.5 * h.sqrt() * xi;
    let (left, right) = out.split_at_mut(out.len() / 2);
    bridge_split(first, 0.5 * h, left, rng);
    bridge_split(dw - first, 0.5 * h, right, rng);
}

/// Simulates chain `chain` of the configuration.
pub fn simulate_chain(cfg: &McConfig, chain: usize) -> Result<ChainOutcome, McError> {
    cfg.validate()?;
    let p = cfg.point;
    let omega = p.omega();
    let mut base_rng = stream_rng(cfg.seed, chain, 0);
    let mut halving_rng = stream_rng(cfg.seed, chain, 1);
    let mut state = Chain {
        cfg,
        omega,
        noise: p.sigma() / omega,
        rotation_weight: omega / p.nu(),
        negative: p.sign() == Sign::Negative,
        z: cfg.z0,
        resets: 0,
        lnr: 0.0,
        excursion: stream_rng(cfg.seed, chain, 2),
    };
    let big_h = cfg.base_step();
    let sqrt_big_h = big_h.sqrt();
    let fine = 1usize << cfg.step_halvings;
    let h = big_h / fine as f64;
    let mut increments = vec![0.0; fine];
    let (n, burn) = cfg.base_steps();
    for step in 0..n {
        let xi: f64 = base_rng.sample(StandardNormal);
        bridge_split(sqrt_big_h * xi, big_h, &mut increments, &mut halving_rng);
        let accumulate = step >= burn;
        for &dw in &increments {
            state.advance(h, dw, accumulate, 0);
        }
        if !state.z.is_finite() || !state.lnr.is_finite() {
            return Err(McError::ChainFailure { chain, step });
        }
    }
    Ok(ChainOutcome {
        lnr_integral: state.lnr,
        resets: state.resets,
        effective_length: (n - burn) as f64 * big_h,
    })
}

/// Runs all chains in parallel and averages the per-chain growth rates.
/// Chains that fail are dropped unless more than 10% of them fail.
pub fn estimate_gamma_mc(cfg: &McConfig) -> Result<McResult, McError> {
    cfg.validate()?;
    let outcomes: Vec<Result<ChainOutcome, McError>> = (0..cfg.chains)
        .into_par_iter()
        .map(|i| simulate_chain(cfg, i))
        .collect();
    let ok: Vec<&ChainOutcome> = outcomes.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failed = cfg.chains - ok.len();
    if failed * 10 > cfg.chains || ok.len() < 2 {
        return Err(McError::TooManyFailures {
            failed,
            total: cfg.chains,
        });
    }
    let rates: Vec<f64> = ok
        .iter()
        .map(|o| o.lnr_integral / o.effective_length)
        .collect();
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(McResult {
        gamma_hat: mean,
        std_error: (var / n).sqrt(),
        chains_used: ok.len(),
        chains_failed: failed,
        resets_total: ok.iter().map(|o| o.resets).sum(),
        effective_length: ok[0].effective_length,
    })
}
