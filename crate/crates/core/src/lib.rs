//! Lyapunov exponent of the one-dimensional Schrödinger operator with a
//! white-noise potential, `γ(λ, σ) = ω f(ν)` with `ω = √|λ|` and
//! `ν = 2ω³/σ²`.
//!
//! - [`exact`]: nested quadrature over the stationary phase density
//!   ([`density`]).
//! - [`asympt`]: small- and large-ν expansions and a regime-switching
//!   evaluator.
//! - [`mc`]: an independent Monte Carlo estimate from the phase SDE.
//! - [`report`]: sweeps, tables and regime-threshold checks.

pub mod asympt;
pub mod density;
pub mod exact;
pub mod mc;
pub mod model;
pub mod quad;
pub mod report;
