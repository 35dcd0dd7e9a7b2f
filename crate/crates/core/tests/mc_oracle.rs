//! Monte Carlo estimates against the exact route.

use lyapunov_core::exact::{gamma_exact, ExactConfig};
use lyapunov_core::mc::{estimate_gamma_mc, McConfig, McResult};
use lyapunov_core::model::{make_spectral_point, SpectralPoint};

fn exact(p: &SpectralPoint) -> f64 {
    gamma_exact(p, &ExactConfig::default()).unwrap().gamma
}

fn short_run(p: SpectralPoint, seed: u64) -> McConfig {
    McConfig::new(p)
        .with_length(250.0 / exact(&p))
        .with_chains(16)
        .with_seed(seed)
}

fn assert_close(r: &McResult, want: f64, label: &str) {
    let z = (r.gamma_hat - want) / r.std_error;
    assert!(
        z.abs() <= 4.0,
        "{label}: {} +/- {} vs {want} ({z:+.2} se)",
        r.gamma_hat,
        r.std_error
    );
}

#[test]
fn agrees_with_exact_across_energies() {
    for (lambda, sigma) in [
        (1.0, 2f64.sqrt()),
        (-1.0, 2f64.sqrt()),
        (-4.0, 1.0),
        (0.25, 0.5),
    ] {
        let p = make_spectral_point(lambda, sigma).unwrap();
        let r = estimate_gamma_mc(&short_run(p, 3)).unwrap();
        assert_eq!(r.chains_failed, 0);
        assert_close(&r, exact(&p), &format!("lambda {lambda} sigma {sigma}"));
    }
}

#[test]
fn initial_condition_is_forgotten() {
    let p = make_spectral_point(1.0, 2f64.sqrt()).unwrap();
    let want = exact(&p);
    for z0 in [-50.0, 0.0, 3.0, 1e4] {
        let r = estimate_gamma_mc(&short_run(p, 5).with_z0(z0)).unwrap();
        assert_close(&r, want, &format!("z0 {z0}"));
    }
}

#[test]
fn step_halving_keeps_the_estimate() {
    let p = make_spectral_point(-1.0, 2f64.sqrt()).unwrap();
    let want = exact(&p);
    for (step_max, halvings) in [(1e-2, 0), (1e-2, 3), (1e-3, 1)] {
        let cfg = short_run(p, 9)
            .with_step_max(step_max)
            .with_step_halvings(halvings);
        let r = estimate_gamma_mc(&cfg).unwrap();
        assert_close(&r, want, &format!("step {step_max} halvings {halvings}"));
    }
}
