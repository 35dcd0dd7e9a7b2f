//! Independent references for the exact route: γ/ω in closed form through
//! Airy functions,
//!
//! γ/ω = ν^{-1/3} (Ai Ai′ + Bi Bi′)/(Ai² + Bi²)  at  ξ = −sign·ν^{2/3},
//!
//! evaluated by the Maclaurin series for moderate |ξ| and by the standard
//! large-argument expansions otherwise. Nothing here touches the crate's
//! quadrature.

#![allow(dead_code)]

use statrs::function::gamma::gamma;

use lyapunov_core::model::Sign;

/// (Ai, Ai′, Bi, Bi′) from the Maclaurin series.
pub fn airy_maclaurin(x: f64) -> (f64, f64, f64, f64) {
    let c1 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
    let c2 = 3f64.powf(-1.0 / 3.0) / gamma(1.0 / 3.0);
    let x3 = x * x * x;
    let (mut tf, mut tg) = (1.0, x);
    let (mut f, mut g) = (1.0, x);
    // Derivatives: f′ = Σ 3k t_k / x, g′ = 1 + Σ (3k+1) t_k / x, kept as
    // series in x² to stay finite at x = 0.
    let (mut df, mut dg) = (0.0, 1.0);
    let (mut uf, mut ug) = (x * x / 2.0, x * x * x / 3.0);
    df += uf;
    dg += ug;
    for k in 1..400 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        if k > 1 {
            uf *= x3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            ug *= x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
            df += uf;
            dg += ug;
        }
        if tf.abs() + tg.abs() + uf.abs() + ug.abs()
            < 1e-18 * (f.abs() + g.abs() + df.abs() + dg.abs())
        {
            break;
        }
    }
    let sqrt3 = 3f64.sqrt();
    (
        c1 * f - c2 * g,
        c1 * df - c2 * dg,
        sqrt3 * (c1 * f + c2 * g),
        sqrt3 * (c1 * df + c2 * dg),
    )
}

/// Large ν, λ > 0: Ai² + Bi² at −x has the expansion
/// (π√x)⁻¹ Σ c_k x^{−3k} with c_k = (−1)^k (1·3···(6k−1))/(k! 96^k).
pub fn oscillatory_ratio(nu: f64) -> f64 {
    let x = nu.powf(2.0 / 3.0);
    let (mut s, mut ds) = (1.0, 0.0);
    let mut c = 1.0;
    for k in 1..8 {
        let kf = k as f64;
        c *= -(6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (96.0 * kf);
        s += c * x.powf(-3.0 * kf);
        ds += 1.5 * kf * c * x.powf(-3.0 * kf - 1.0);
    }
    nu.powf(-1.0 / 3.0) * (0.25 / x + ds / s)
}

/// Large ν, λ < 0: Bi′/Bi at ζ = 2ν/3 from the exponentially growing
/// expansions; the Ai terms are smaller by e^{−2ζ}.
pub fn growing_ratio(nu: f64) -> f64 {
    let zeta = 2.0 * nu / 3.0;
    let (mut u, mut su, mut sv) = (1.0, 1.0, 1.0);
    for k in 1..12 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let p = zeta.powi(-k);
        su += u * p;
        sv += v * p;
    }
    sv / su
}

/// γ/ω from the Airy closed form.
pub fn gamma_over_omega_airy(sign: Sign, nu: f64) -> f64 {
    match sign {
        Sign::Positive if nu > 20.0 => oscillatory_ratio(nu),
        Sign::Negative if nu > 20.0 => growing_ratio(nu),
        _ => {
            let xi = -sign.factor() * nu.powf(2.0 / 3.0);
            let (ai, aip, bi, bip) = airy_maclaurin(xi);
            nu.powf(-1.0 / 3.0) * (ai * aip + bi * bip) / (ai * ai + bi * bi)
        }
    }
}

/// `n` log-spaced points on the closed interval `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}
