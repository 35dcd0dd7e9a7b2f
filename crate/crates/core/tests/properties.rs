//! Invariants of the exact route, the density and the regime map.

mod common;

use lyapunov_core::asympt::{gamma_uniform, AsymptoticConstants};
use lyapunov_core::density::{DensityKernel, DriftPotential, NormalizedDensity};
use lyapunov_core::exact::{gamma_exact, ExactConfig};
use lyapunov_core::model::{
    classify_regime, make_spectral_point, RegimeKind, RegimeThresholds, Sign, SpectralPoint,
};
use lyapunov_core::quad::QuadSpec;
use lyapunov_core::report::log_spaced;
use proptest::prelude::*;

use common::{gamma_over_omega_airy, log_grid};

fn sign_strategy() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Positive), Just(Sign::Negative)]
}

fn exact_over_omega(sign: Sign, nu: f64) -> f64 {
    let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
    gamma_exact(&p, &ExactConfig::default()).unwrap().gamma
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_is_positive_and_matches_airy(sign in sign_strategy(), log_nu in -6.0f64..4.0) {
        let nu = 10f64.powf(log_nu);
        let g = exact_over_omega(sign, nu);
        prop_assert!(g > 0.0 && g.is_finite());
        let want = gamma_over_omega_airy(sign, nu);
        prop_assert!((g / want - 1.0).abs() < 1e-8, "nu {nu}: {g} vs {want}");
    }

    #[test]
    fn gamma_over_omega_depends_only_on_nu(
        sign in sign_strategy(),
        log_nu in -3.0f64..3.0,
        log_omega in -1.0f64..1.0,
    ) {
        let nu = 10f64.powf(log_nu);
        let omega = 10f64.powf(log_omega);
        let sigma = (2.0 * omega.powi(3) / nu).sqrt();
        let p = make_spectral_point(sign.factor() * omega * omega, sigma).unwrap();
        let g = gamma_exact(&p, &ExactConfig::default()).unwrap().gamma_over_omega.unwrap();
        let reference = exact_over_omega(sign, nu);
        prop_assert!((g / reference - 1.0).abs() < 1e-9, "{g} vs {reference}");
    }

    #[test]
    fn density_is_positive_and_finite(sign in sign_strategy(), log_nu in -6.0f64..3.0, x in -1e3f64..1e3) {
        let k = DensityKernel::new(DriftPotential::new(sign, 10f64.powf(log_nu)).unwrap(), QuadSpec::default());
        let d = NormalizedDensity::new(k).unwrap();
        let ln_p = d.ln_c() + d.ln_q(x).unwrap();
        prop_assert!(ln_p.is_finite(), "ln pdf({x}) = {ln_p}");
        let p = d.pdf(x).unwrap();
        prop_assert!(p.is_finite() && p >= 0.0, "pdf({x}) = {p}");
        // Below the smallest normal double only the log is meaningful.
        if ln_p > f64::MIN_POSITIVE.ln() {
            prop_assert!(p > 0.0, "pdf({x}) = {p} with ln pdf = {ln_p}");
        }
    }

    #[test]
    fn regime_map_is_total(lambda in -1e3f64..1e3, log_sigma in -3.0f64..3.0) {
        let p = make_spectral_point(lambda, 10f64.powf(log_sigma)).unwrap();
        let t = RegimeThresholds::default();
        let r = classify_regime(&p, &t);
        let nu = p.nu();
        let want = match p.sign() {
            Sign::Zero => RegimeKind::SmallNu,
            _ if nu <= t.nu_lo => RegimeKind::SmallNu,
            Sign::Positive if nu >= t.nu_hi_pos => RegimeKind::LargeNuPos,
            Sign::Negative if nu >= t.nu_hi_neg => RegimeKind::LargeNuNeg,
            _ => RegimeKind::Bulk,
        };
        prop_assert_eq!(r.kind, want);
    }

    #[test]
    fn log_spaced_grid_is_increasing_with_exact_ends(lo in 1e-6f64..1.0, span in 1.01f64..1e4, n in 2usize..60) {
        let hi = lo * span;
        let g = log_spaced(lo, hi, n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], hi);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn positive_energy_exponent_decreases_in_nu() {
    let values: Vec<f64> = log_grid(1e-6, 1e4, 50)
        .into_iter()
        .map(|nu| exact_over_omega(Sign::Positive, nu))
        .collect();
    for (i, w) in values.windows(2).enumerate() {
        assert!(
            w[1] < w[0],
            "not decreasing at grid index {i}: {} -> {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn uniform_evaluator_is_continuous_at_the_seams() {
    let c = AsymptoticConstants::standard().unwrap().c_small_nu;
    let t = RegimeThresholds::default();
    let seams = [
        (Sign::Positive, t.nu_lo),
        (Sign::Negative, t.nu_lo),
        (Sign::Positive, t.nu_hi_pos),
        (Sign::Negative, t.nu_hi_neg),
    ];
    for (sign, nu) in seams {
        let at = |nu: f64| {
            let p = SpectralPoint::from_omega_nu(1.0, sign, nu).unwrap();
            gamma_uniform(&p, &ExactConfig::default(), c).unwrap().gamma
        };
        let (below, above) = (at(nu * (1.0 - 1e-9)), at(nu * (1.0 + 1e-9)));
        let jump = (below - above).abs() / below.max(above);
        assert!(jump <= 0.01, "sign {sign} nu {nu}: jump {jump}");
    }
}
