//! The crate's quadrature routes against references computed without it.

mod common;

use std::f64::consts::PI;

use lyapunov_core::asympt::{
    a0, constant_c, series_c_inverse_small_nu_signed, series_c_large_nu, small_nu_coefficient,
};
use lyapunov_core::density::{
    normalization_constant, unnormalized_density, DensityKernel, DriftPotential,
};
use lyapunov_core::exact::{gamma_exact, ExactConfig};
use lyapunov_core::model::{Sign, SpectralPoint};
use lyapunov_core::quad::QuadSpec;
use statrs::function::gamma::gamma;

use common::{airy_maclaurin, gamma_over_omega_airy, growing_ratio, log_grid, oscillatory_ratio};

fn kernel(sign: Sign, nu: f64) -> DensityKernel {
    DensityKernel::new(DriftPotential::new(sign, nu).unwrap(), QuadSpec::default())
}

/// Composite Simpson for `q(x)` on `[0, 40]`.
fn q_simpson(sign: Sign, nu: f64, x: f64) -> f64 {
    let a = x * x + sign.factor();
    let f = |s: f64| (-nu * (s * a + s * s * x + s * s * s / 3.0)).exp();
    let n = 400_000;
    let h = 40.0 / n as f64;
    let mut sum = f(0.0) + f(40.0);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn airy_at_origin() {
    let (ai, aip, bi, bip) = airy_maclaurin(0.0);
    assert!((ai - 0.355_028_053_887_817_2).abs() < 1e-15);
    assert!((aip + 0.258_819_403_792_806_8).abs() < 1e-15);
    assert!((bi - 0.614_926_627_446_000_7).abs() < 1e-15);
    assert!((bip - 0.448_288_357_353_826_4).abs() < 1e-15);
}

#[test]
fn airy_wronskian() {
    for x in [-6.0, -2.5, -0.3, 0.7, 3.0] {
        let (ai, aip, bi, bip) = airy_maclaurin(x);
        let w = ai * bip - aip * bi;
        assert!((w - 1.0 / PI).abs() < 1e-11, "{x}: {w}");
    }
}

#[test]
fn airy_expansions_overlap_the_series() {
    for sign in [Sign::Positive, Sign::Negative] {
        let nu: f64 = 20.0;
        let xi = -sign.factor() * nu.powf(2.0 / 3.0);
        let (ai, aip, bi, bip) = airy_maclaurin(xi);
        let series = nu.powf(-1.0 / 3.0) * (ai * aip + bi * bip) / (ai * ai + bi * bi);
        let asym = match sign {
            Sign::Positive => oscillatory_ratio(nu),
            _ => growing_ratio(nu),
        };
        assert!(
            (series / asym - 1.0).abs() < 1e-8,
            "{sign}: {series} vs {asym}"
        );
    }
}

#[test]
fn exact_matches_airy_closed_form() {
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in log_grid(1e-6, 1e4, 31) {
            let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
            let got = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma;
            let want = gamma_over_omega_airy(sign, nu);
            assert!(
                (got / want - 1.0).abs() < 1e-8,
                "sign {sign} nu {nu:e}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn exact_error_estimate_covers_the_true_error() {
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in [1e-4, 0.3, 7.0, 500.0] {
            let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
            let e = gamma_exact(&p, &ExactConfig::default()).unwrap();
            let truth = gamma_over_omega_airy(sign, nu);
            assert!(
                (e.gamma - truth).abs() <= e.abs_error.max(1e-14 * truth),
                "sign {sign} nu {nu}"
            );
        }
    }
}

#[test]
fn tail_integral_matches_simpson() {
    for sign in [Sign::Positive, Sign::Negative] {
        for nu in [0.2, 1.0, 3.0] {
            for x in [-2.5, -1.0, 0.0, 0.4, 3.0] {
                let got = unnormalized_density(&kernel(sign, nu), x).unwrap().value();
                let want = q_simpson(sign, nu, x);
                assert!(
                    (got / want - 1.0).abs() < 1e-9,
                    "sign {sign} nu {nu} x {x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn constant_matches_airy_closed_form() {
    let closed = 3f64.cbrt() * gamma(2.0 / 3.0) / (2f64.powf(4.0 / 3.0) * gamma(1.0 / 3.0));
    let c = constant_c(&QuadSpec::default()).unwrap();
    assert!((c / closed - 1.0).abs() < 1e-9, "{c} vs {closed}");
}

#[test]
fn small_nu_coefficients_follow_the_gamma_ratio() {
    assert!((a0() - 4.976_053_951_059_534).abs() < 1e-12);
    let mut want = a0();
    for n in 1..8usize {
        let k = n as f64;
        // Γ(x + 1/3) ratio built up one step at a time from Γ(1/6).
        want *= 12f64.cbrt() / k * gamma(1.0 / 6.0 + k / 3.0) / gamma(1.0 / 6.0 + (k - 1.0) / 3.0);
        let got = small_nu_coefficient(n);
        assert!((got / want - 1.0).abs() < 1e-12, "n {n}: {got} vs {want}");
    }
}

#[test]
fn small_nu_series_matches_the_normalization() {
    for sign in [Sign::Positive, Sign::Negative] {
        let nu = 1e-5;
        let c = normalization_constant(&kernel(sign, nu)).unwrap().value();
        let series = series_c_inverse_small_nu_signed(nu, 5, sign).unwrap();
        assert!(
            (c * series - 1.0).abs() < 1e-8,
            "sign {sign}: {}",
            c * series
        );
    }
}

#[test]
fn large_nu_series_matches_the_normalization() {
    for nu in [50.0, 200.0] {
        let c = normalization_constant(&kernel(Sign::Positive, nu))
            .unwrap()
            .value();
        let series = series_c_large_nu(nu, 5).unwrap();
        assert!((c / series - 1.0).abs() < 1e-8, "nu {nu}: {c} vs {series}");
    }
}
