//! Globally adaptive 21-point Gauss–Kronrod quadrature on a finite interval.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{checked_eval, QuadError, QuadResult, QuadSpec};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_887_628_540,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn qk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError>
where
    F: FnMut(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked_eval(f, center)?;

    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = checked_eval(f, center - dx)?;
        let f2 = checked_eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let width = half.abs();
    let res_abs = res_abs * width;
    let res_asc = res_asc * width;
    let err = rescale_error((res_k - res_g) * half, res_abs, res_asc);

    Ok(Segment {
        a,
        b,
        value: res_k * half,
        err,
        abs_value: res_abs,
    })
}

fn splittable(seg: &Segment) -> bool {
    let mid = 0.5 * (seg.a + seg.b);
    let scale = seg.a.abs().max(seg.b.abs()).max(f64::MIN_POSITIVE);
    mid > seg.a && mid < seg.b && (seg.b - seg.a) > 1e3 * f64::EPSILON * scale
}

/// Integrates `f` over the finite interval `[a, b]` with bisection driven by
/// the largest local error estimate.
pub(crate) fn integrate<F>(
    f: &mut F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let first = qk21(f, lo, hi)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(first);

    loop {
        let (value, err, abs_value) = heap
            .iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0, 0.0), |acc, s| {
                (acc.0 + s.value, acc.1 + s.err, acc.2 + s.abs_value)
            });
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        // Below this the estimate is roundoff, not truncation.
        let floor = 100.0 * f64::EPSILON * abs_value;
        if err <= tol || err <= floor {
            return Ok(QuadResult {
                value: sign * value,
                err_estimate: err,
                evaluations,
            });
        }
        let segments = heap.len() + frozen.len();
        let worst = match heap.pop() {
            Some(s) if segments < spec.max_subdivisions => s,
            other => {
                if let Some(s) = other {
                    heap.push(s);
                }
                return Err(QuadError::NonConvergence {
                    best: QuadResult {
                        value: sign * value,
                        err_estimate: err,
                        evaluations,
                    },
                    subdivisions: segments,
                });
            }
        };
        if !splittable(&worst) {
            frozen.push(worst);
            if heap.is_empty() {
                return Err(QuadError::NonConvergence {
                    best: QuadResult {
                        value: sign * value,
                        err_estimate: err,
                        evaluations,
                    },
                    subdivisions: segments,
                });
            }
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = qk21(f, worst.a, mid)?;
        let right = qk21(f, mid, worst.b)?;
        evaluations += 42;
        heap.push(left);
        heap.push(right);
    }
}
