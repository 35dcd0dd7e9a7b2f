//! Acceptance criteria for the workspace. Each criterion evaluates the
//! public API of `lyapunov-core` and returns a verdict with the observed
//! figures; [`CRITERIA`] lists them in order.

#[path = "../../core/tests/common/mod.rs"]
pub mod reference;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lyapunov_core::asympt::{
    a0, constant_c, gamma_asympt_large_nu_pos, gamma_asympt_small_nu, large_nu_coefficient,
};
use lyapunov_core::density::{
    normalization_cross_check, stationarity_residual, DensityKernel, DriftPotential,
};
use lyapunov_core::exact::{gamma_exact, ExactConfig};
use lyapunov_core::mc::{estimate_gamma_mc, McConfig};
use lyapunov_core::model::{make_spectral_point, Sign, SpectralPoint};
use lyapunov_core::quad::QuadSpec;
use statrs::function::gamma::gamma;

use reference::{gamma_over_omega_airy, log_grid};

/// Relative tolerance of the exact route.
const QUAD_TOL: f64 = 1e-10;

/// Verdict of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn exact_over_omega(sign: Sign, nu: f64) -> f64 {
    let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
    gamma_exact(&p, &ExactConfig::default()).unwrap().gamma
}

fn c_value() -> f64 {
    constant_c(&QuadSpec::default()).unwrap()
}

/// Largest |exact − cσ^{2/3}|/exact on eight log-spaced ν in [1e-4, 1e-3].
fn small_nu_claim(sign: Sign, threshold: f64, budget: Duration) -> Outcome {
    let start = Instant::now();
    let c = c_value();
    let mut worst = (0.0, 0.0);
    let mut oracle_gap: f64 = 0.0;
    let mut over = Vec::new();
    for nu in log_grid(1e-4, 1e-3, 8) {
        let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
        let exact = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
        let asym = gamma_asympt_small_nu(&p, c).gamma;
        let rel = (exact - asym).abs() / exact;
        oracle_gap = oracle_gap.max((exact / gamma_over_omega_airy(sign, nu) - 1.0).abs());
        if rel > threshold {
            over.push(format!("nu={nu:.4e}: {:.4}%", 100.0 * rel));
        }
        if rel > worst.0 {
            worst = (rel, nu);
        }
    }
    let elapsed = start.elapsed();
    let pass = over.is_empty() && elapsed < budget && oracle_gap < 1e-8;
    outcome(
        pass,
        format!(
            "max rel err {:.4}% at nu={:.4e} (threshold {:.2}%); exact vs Airy closed form within {oracle_gap:.1e}; {elapsed:.1?}{}",
            100.0 * worst.0,
            worst.1,
            100.0 * threshold,
            if over.is_empty() { String::new() } else { format!("; over threshold: {}", over.join(", ")) }
        ),
    )
}

pub fn criterion_1() -> Outcome {
    small_nu_claim(Sign::Positive, 0.007, Duration::from_secs(60))
}

pub fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0, 0.0);
    for nu in log_grid(6.0, 100.0, 8) {
        let p = SpectralPoint::from_omega_nu(1.0, Sign::Positive, nu).unwrap();
        let exact = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
        let asym = gamma_asympt_large_nu_pos(&p).unwrap().gamma;
        let rel = (exact - asym).abs() / exact;
        if rel > worst.0 {
            worst = (rel, nu);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst.0 <= 0.004 && elapsed < Duration::from_secs(30),
        format!(
            "max rel err {:.4}% at nu={:.4e} (threshold 0.4%); {elapsed:.1?}",
            100.0 * worst.0,
            worst.1
        ),
    )
}

pub fn criterion_3() -> Outcome {
    small_nu_claim(Sign::Negative, 0.008, Duration::from_secs(60))
}

pub fn criterion_4() -> Outcome {
    let mut worst = (0.0, 0.0);
    let mut log_mode_ok = true;
    let mut oracle_gap: f64 = 0.0;
    let mut norm_gap: f64 = 0.0;
    for nu in log_grid(40.0, 1000.0, 8) {
        let g = exact_over_omega(Sign::Negative, nu);
        let rel = (g - 1.0).abs();
        if rel > worst.0 {
            worst = (rel, nu);
        }
        if nu > 200.0 {
            let k = DensityKernel::new(
                DriftPotential::new(Sign::Negative, nu).unwrap(),
                QuadSpec::default(),
            );
            log_mode_ok &= k.log_mode();
            norm_gap = norm_gap.max(normalization_cross_check(&k).unwrap());
            oracle_gap =
                oracle_gap.max((g / gamma_over_omega_airy(Sign::Negative, nu) - 1.0).abs());
        }
    }
    outcome(
        worst.0 <= 0.007 && log_mode_ok && oracle_gap < 1e-8 && norm_gap < 1e-6,
        format!(
            "max |gamma/omega - 1| {:.4}% at nu={:.4e} (threshold 0.7%); nu>200: log mode {}, Airy gap {oracle_gap:.1e}, normalization gap {norm_gap:.1e}",
            100.0 * worst.0,
            worst.1,
            if log_mode_ok { "on" } else { "OFF" }
        ),
    )
}

pub fn criterion_5() -> Outcome {
    let quoted = 2f64.cbrt() * c_value();
    let a0_closed = PI.sqrt() * 2f64.powf(1.0 / 3.0) * 3f64.powf(-5.0 / 6.0) * gamma(1.0 / 6.0);
    let a0_gap = (a0() - a0_closed).abs() / a0_closed;
    let b0_gap = (large_nu_coefficient(0) - PI).abs();
    let b0_from_gamma = (PI.sqrt() * gamma(0.5) - PI).abs();
    outcome(
        (quoted - 0.3645).abs() <= 0.0005 && a0_gap < 1e-14 && b0_gap <= 1e-12 && b0_from_gamma <= 1e-12,
        format!("2^(1/3) c = {quoted:.10} (target 0.3645 +/- 0.0005); a0 = {:.12} (rel gap {a0_gap:.1e}); |b0 - pi| = {b0_gap:.1e}", a0()),
    )
}

pub fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in [0.01, 1.0, 10.0] {
            let values: Vec<f64> = [0.5f64, 1.0, 3.0]
                .iter()
                .map(|&omega| {
                    let sigma = (2.0 * omega * omega * omega / nu).sqrt();
                    let p = make_spectral_point(sign.factor() * omega * omega, sigma).unwrap();
                    gamma_exact(&p, &ExactConfig::default())
                        .unwrap()
                        .gamma_over_omega
                        .unwrap()
                })
                .collect();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(0.0, f64::max);
            worst = worst.max((hi - lo) / lo);
        }
    }
    outcome(
        worst <= 10.0 * QUAD_TOL,
        format!(
            "max relative spread of gamma/omega across (omega, sigma) {worst:.2e} (limit {:.0e})",
            10.0 * QUAD_TOL
        ),
    )
}

pub fn criterion_7() -> Outcome {
    let spec = QuadSpec::default().with_max_subdivisions(200);
    let mut norm_worst = (0.0, 0.0, Sign::Positive);
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in log_grid(1e-6, 1e3, 10) {
            let k = DensityKernel::new(DriftPotential::new(sign, nu).unwrap(), spec);
            let gap = normalization_cross_check(&k).unwrap();
            if gap > norm_worst.0 {
                norm_worst = (gap, nu, sign);
            }
        }
    }
    let mut flux_worst: f64 = 0.0;
    let grid: Vec<f64> = (0..41).map(|i| -6.0 + 0.3 * i as f64).collect();
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in [0.01, 0.3, 1.0, 5.0, 20.0] {
            let k = DensityKernel::new(DriftPotential::new(sign, nu).unwrap(), spec);
            let h = 1e-2 * (1.0 / (2.0 * nu).sqrt()).min(1.0);
            flux_worst = flux_worst.max(stationarity_residual(&k, &grid, h).unwrap());
        }
    }
    outcome(
        norm_worst.0 <= 1e-6 && flux_worst < 1e-4,
        format!(
            "max |C*int q - 1| {:.1e} (at nu={:.1e}, sign {}; limit 1e-6); max constant-flux residual {flux_worst:.1e} (limit 1e-4)",
            norm_worst.0, norm_worst.1, norm_worst.2
        ),
    )
}

pub fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for lambda in [1.0, -1.0] {
        let p = make_spectral_point(lambda, 2f64.sqrt()).unwrap();
        let exact = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
        let r = estimate_gamma_mc(&McConfig::new(p)).unwrap();
        let z = (r.gamma_hat - exact) / r.std_error;
        let rel_se = r.std_error / r.gamma_hat;
        pass &= z.abs() <= 3.0 && rel_se <= 0.02;
        lines.push(format!(
            "lambda={lambda}: mc {:.6} +/- {:.6} vs exact {exact:.6} ({z:+.2} se, se/gamma {:.2}%)",
            r.gamma_hat,
            r.std_error,
            100.0 * rel_se
        ));
    }
    let elapsed = start.elapsed();
    let short = McConfig::new(make_spectral_point(1.0, 2f64.sqrt()).unwrap())
        .with_length(200.0)
        .with_chains(4)
        .with_seed(11);
    let deterministic = estimate_gamma_mc(&short).unwrap() == estimate_gamma_mc(&short).unwrap();
    pass &= deterministic && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "{}; fixed seed reproducible: {deterministic}; {elapsed:.1?} at default settings",
            lines.join("; ")
        ),
    )
}

/// Least-squares slope of ln y against ln x.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |a, (x, y)| (a.0 + x.ln(), a.1 + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |a, (x, y)| {
        let dx = x.ln() - mx;
        (a.0 + dx * (y.ln() - my), a.1 + dx * dx)
    });
    num / den
}

pub fn criterion_9() -> Outcome {
    let c = c_value();
    let mut slopes = Vec::new();
    for sign in [Sign::Positive, Sign::Negative] {
        let pts: Vec<(f64, f64)> = log_grid(1e-6, 1e-3, 8)
            .into_iter()
            .map(|nu| {
                let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
                let exact = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
                (
                    nu,
                    (exact - gamma_asympt_small_nu(&p, c).gamma).abs() / exact,
                )
            })
            .collect();
        slopes.push(log_log_slope(&pts));
    }
    let large: Vec<(f64, f64)> = log_grid(10.0, 100.0, 8)
        .into_iter()
        .map(|nu| {
            let p = SpectralPoint::from_omega_nu(1.0, Sign::Positive, nu).unwrap();
            let exact = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
            (
                nu,
                (exact - gamma_asympt_large_nu_pos(&p).unwrap().gamma).abs() / exact,
            )
        })
        .collect();
    let decay = -log_log_slope(&large);
    let small_ok = slopes.iter().all(|s| (s - 2.0 / 3.0).abs() <= 0.15);
    outcome(
        small_ok && decay >= 3.5,
        format!(
            "small-nu deviation exponent {:.3} (lambda>0), {:.3} (lambda<0), target 2/3 +/- 0.15; large-nu residual decay exponent {decay:.3} (need >= 3.5)",
            slopes[0], slopes[1]
        ),
    )
}

pub type Criterion = (&'static str, fn() -> Outcome);

/// The nine criteria, numbered from 1 in this order.
pub const CRITERIA: [Criterion; 9] = [
    ("small-nu regime, lambda>0, <= 0.7%", criterion_1),
    ("large-nu regime, lambda>0, <= 0.4%", criterion_2),
    ("small-nu regime, lambda<0, <= 0.8%", criterion_3),
    ("large-nu regime, lambda<0, <= 0.7%", criterion_4),
    ("constant reproduction", criterion_5),
    ("scaling law", criterion_6),
    ("normalization and stationarity", criterion_7),
    ("Monte Carlo concordance", criterion_8),
    ("error-slope regression", criterion_9),
];
