//! Double-exponential (tanh-sinh / exp-sinh) rules with step halving.
//!
//! A map sends the trapezoid variable `t` to an abscissa `x(t)` with weight
//! `x'(t)`; the trapezoid sum in `t` converges doubly exponentially for
//! integrands analytic near the integration path. Each level halves the step
//! and only evaluates the new odd nodes.

use std::f64::consts::FRAC_PI_2;

use super::{QuadError, QuadResult, QuadSpec};

/// Initial trapezoid step in `t`.
const H0: f64 = 0.5;
/// Hard ceiling on halvings regardless of `max_subdivisions`.
const MAX_LEVELS: usize = 12;
const MIN_LEVELS: usize = 2;
/// Terms whose log falls this far below the running maximum end a walk.
const TAIL_LOG_DROP: f64 = 60.0;

/// A change of variables `t -> (x(t), ln x'(t))`; `None` past the last
/// representable node.
pub(crate) trait DeMap {
    fn node(&self, t: f64) -> Option<(f64, f64)>;
}

/// `x = a + exp(pi/2 sinh t)` for `[a, inf)`.
pub(crate) struct ExpSinh {
    pub a: f64,
}

impl DeMap for ExpSinh {
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let e = FRAC_PI_2 * t.sinh();
        if !(-740.0..=709.0).contains(&e) {
            return None;
        }
        let x = self.a + e.exp();
        if x == self.a || !x.is_finite() {
            return None;
        }
        Some((x, (FRAC_PI_2 * t.cosh()).ln() + e))
    }
}

/// Returns `delta = 1 - |tanh(pi/2 sinh t)|` computed without cancellation.
fn tanh_sinh_complement(t: f64) -> Option<f64> {
    let s = FRAC_PI_2 * t.abs().sinh();
    let e = (-2.0 * s).exp();
    let delta = 2.0 * e / (1.0 + e);
    (delta > 0.0).then_some(delta)
}

/// tanh-sinh on a finite interval `[a, b]`.
pub(crate) struct TanhSinhInterval {
    pub a: f64,
    pub b: f64,
}

impl DeMap for TanhSinhInterval {
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let delta = tanh_sinh_complement(t)?;
        let half = 0.5 * (self.b - self.a);
        let x = if t >= 0.0 {
            self.b - half * delta
        } else {
            self.a + half * delta
        };
        if x <= self.a || x >= self.b {
            return None;
        }
        let ln_w = half.ln() + (FRAC_PI_2 * t.cosh()).ln() + (delta * (2.0 - delta)).ln();
        Some((x, ln_w))
    }
}

/// tanh-sinh on the compactified half line `x = a + (1+u)/(1-u)`.
pub(crate) struct TanhSinhHalfLine {
    pub a: f64,
}

impl DeMap for TanhSinhHalfLine {
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let delta = tanh_sinh_complement(t)?;
        // one_minus_u is 1 - u for the signed u = tanh(pi/2 sinh t).
        let (offset, one_minus_u) = if t >= 0.0 {
            ((2.0 - delta) / delta, delta)
        } else {
            (delta / (2.0 - delta), 2.0 - delta)
        };
        let x = self.a + offset;
        if x == self.a || !x.is_finite() {
            return None;
        }
        let ln_w =
            (FRAC_PI_2 * t.cosh()).ln() + (delta * (2.0 - delta)).ln() + std::f64::consts::LN_2
                - 2.0 * one_minus_u.ln();
        Some((x, ln_w))
    }
}

/// tanh-sinh on the compactified real line `x = u / (1 - u^2)`.
pub(crate) struct TanhSinhRealLine;

impl DeMap for TanhSinhRealLine {
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let delta = tanh_sinh_complement(t)?;
        let u = 1.0 - delta;
        let one_minus_u2 = delta * (2.0 - delta);
        let x = u / one_minus_u2;
        if !x.is_finite() {
            return None;
        }
        let ln_w = (FRAC_PI_2 * t.cosh()).ln() + (1.0 + u * u).ln() - one_minus_u2.ln();
        Some((t.signum() * x, ln_w))
    }
}

/// Log-domain running sum `ln(sum exp(l_i))`.
#[derive(Debug, Clone, Copy)]
struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl LogAccumulator {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, l: f64) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if l <= self.max {
            self.scaled += (l - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - l).exp() + 1.0;
            self.max = l;
        }
    }

    fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Evaluates the log of one weighted term, or `None` when the map is exhausted.
trait TermSink {
    /// Returns the natural log of `|w f|` for the node at `t`.
    fn visit(&mut self, t: f64) -> Result<Option<f64>, QuadError>;
}

/// Walks level-0 nodes outward from `t = 0` until the tail is negligible;
/// returns the last `t` visited on each side.
fn walk_level0<S: TermSink>(sink: &mut S, running_max: &mut f64) -> Result<(f64, f64), QuadError> {
    if let Some(l) = sink.visit(0.0)? {
        *running_max = running_max.max(l);
    }
    let mut bounds = [0.0_f64; 2];
    for (side, dir) in [1.0_f64, -1.0].into_iter().enumerate() {
        let mut negligible_run = 0;
        let mut j = 1;
        loop {
            let t = dir * j as f64 * H0;
            match sink.visit(t)? {
                None => break,
                Some(l) => {
                    bounds[side] = t;
                    if *running_max > f64::NEG_INFINITY && l < *running_max - TAIL_LOG_DROP {
                        negligible_run += 1;
                        if negligible_run >= 2 {
                            break;
                        }
                    } else {
                        negligible_run = 0;
                    }
                    *running_max = running_max.max(l);
                }
            }
            j += 1;
        }
    }
    Ok((bounds[1], bounds[0]))
}

fn level_cap(spec: &QuadSpec) -> usize {
    spec.max_subdivisions.clamp(MIN_LEVELS, MAX_LEVELS)
}

struct LinearSink<'a, M, F> {
    map: &'a M,
    f: &'a mut F,
    sum: f64,
    abs_sum: f64,
    evaluations: usize,
}

impl<M: DeMap, F: FnMut(f64) -> f64> TermSink for LinearSink<'_, M, F> {
    fn visit(&mut self, t: f64) -> Result<Option<f64>, QuadError> {
        let Some((x, ln_w)) = self.map.node(t) else {
            return Ok(None);
        };
        let fx = (self.f)(x);
        self.evaluations += 1;
        if !fx.is_finite() {
            return Err(QuadError::NonFiniteIntegrand { x });
        }
        if fx == 0.0 {
            return Ok(Some(f64::NEG_INFINITY));
        }
        let l = ln_w + fx.abs().ln();
        let term = fx.signum() * l.exp();
        self.sum += term;
        self.abs_sum += term.abs();
        Ok(Some(l))
    }
}

pub(crate) fn integrate<M, F>(map: &M, f: &mut F, spec: &QuadSpec) -> Result<QuadResult, QuadError>
where
    M: DeMap,
    F: FnMut(f64) -> f64,
{
    let mut sink = LinearSink {
        map,
        f,
        sum: 0.0,
        abs_sum: 0.0,
        evaluations: 0,
    };
    let mut running_max = f64::NEG_INFINITY;
    let (t_lo, t_hi) = walk_level0(&mut sink, &mut running_max)?;

    let mut h = H0;
    let mut previous = h * sink.sum;
    let mut err = f64::INFINITY;
    let levels = level_cap(spec);
    for level in 1..=levels {
        h *= 0.5;
        let steps = (t_hi / h).ceil() as i64;
        let steps_lo = (t_lo / h).floor() as i64;
        let mut j = steps_lo | 1;
        while j <= steps {
            let t = j as f64 * h;
            if t >= t_lo && t <= t_hi {
                sink.visit(t)?;
            }
            j += 2;
        }
        let current = h * sink.sum;
        err = (current - previous).abs();
        previous = current;
        let tol = spec.abs_tol.max(spec.rel_tol * current.abs());
        let floor = 100.0 * f64::EPSILON * h * sink.abs_sum;
        if level >= MIN_LEVELS && (err <= tol || err <= floor) {
            return Ok(QuadResult {
                value: current,
                err_estimate: err,
                evaluations: sink.evaluations,
            });
        }
    }
    Err(QuadError::NonConvergence {
        best: QuadResult {
            value: previous,
            err_estimate: err,
            evaluations: sink.evaluations,
        },
        subdivisions: levels,
    })
}

struct LogSink<'a, M, F> {
    map: &'a M,
    log_f: &'a mut F,
    acc: LogAccumulator,
    evaluations: usize,
}

impl<M: DeMap, F: FnMut(f64) -> f64> TermSink for LogSink<'_, M, F> {
    fn visit(&mut self, t: f64) -> Result<Option<f64>, QuadError> {
        let Some((x, ln_w)) = self.map.node(t) else {
            return Ok(None);
        };
        let lf = (self.log_f)(x);
        self.evaluations += 1;
        if lf.is_nan() || lf == f64::INFINITY {
            return Err(QuadError::NonFiniteIntegrand { x });
        }
        let l = ln_w + lf;
        self.acc.add(l);
        Ok(Some(l))
    }
}

/// Log-domain counterpart of [`integrate`]: `log_f` returns `ln f(x)` and the
/// result is `ln` of the integral, accumulated with a max shift.
pub(crate) fn log_integrate<M, F>(
    map: &M,
    log_f: &mut F,
    spec: &QuadSpec,
) -> Result<(f64, QuadResult), QuadError>
where
    M: DeMap,
    F: FnMut(f64) -> f64,
{
    let mut sink = LogSink {
        map,
        log_f,
        acc: LogAccumulator::new(),
        evaluations: 0,
    };
    let mut running_max = f64::NEG_INFINITY;
    let (t_lo, t_hi) = walk_level0(&mut sink, &mut running_max)?;

    let mut h = H0;
    let mut previous = h.ln() + sink.acc.ln();
    let mut err = f64::INFINITY;
    let levels = level_cap(spec);
    for level in 1..=levels {
        h *= 0.5;
        let steps = (t_hi / h).ceil() as i64;
        let steps_lo = (t_lo / h).floor() as i64;
        let mut j = steps_lo | 1;
        while j <= steps {
            let t = j as f64 * h;
            if t >= t_lo && t <= t_hi {
                sink.visit(t)?;
            }
            j += 2;
        }
        let current = h.ln() + sink.acc.ln();
        if current == f64::NEG_INFINITY && level >= MIN_LEVELS {
            return Ok((
                current,
                QuadResult {
                    value: 0.0,
                    err_estimate: 0.0,
                    evaluations: sink.evaluations,
                },
            ));
        }
        err = (current - previous).abs();
        previous = current;
        if level >= MIN_LEVELS && err <= spec.rel_tol.max(4.0 * f64::EPSILON) {
            return Ok((
                current,
                QuadResult {
                    value: current,
                    err_estimate: err,
                    evaluations: sink.evaluations,
                },
            ));
        }
    }
    Err(QuadError::NonConvergence {
        best: QuadResult {
            value: previous,
            err_estimate: err,
            evaluations: sink.evaluations,
        },
        subdivisions: levels,
    })
}
