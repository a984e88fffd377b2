//! Asynchronous sigma-delta modulator (ASDM).
//!
//! The integrator starts at `y(0) = -delta` with the feedback pushing it
//! upwards. On `[t_k, t_{k+1}]` it integrates `input(t) + (-1)^k b`; the
//! Schmitt trigger fires when `y` reaches `+delta` on even intervals and
//! `-delta` on odd ones, so every interval satisfies the t-transform
//!
//! ```text
//! int_{t_k}^{t_{k+1}} (input(s) + (-1)^k b) ds = (-1)^k 2 delta.
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::recovery::{self, Reconstruction, RecoveryConfig};
use crate::signal::Waveform;

/// Schmitt trigger threshold `delta` (integrator units) and feedback level `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsdmParams {
    delta: f64,
    bias: f64,
}

impl AsdmParams {
    pub fn new(delta: f64, bias: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
        }
        if !(bias > 0.0 && bias.is_finite()) {
            return Err(Error::Parameter(format!("b must be positive, got {bias}")));
        }
        Ok(Self { delta, bias })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Interval bounds `[2 delta / (b + bound), 2 delta / (b - bound)]` for
    /// inputs with `|input| <= bound < b`.
    pub fn interval_bounds(&self, bound: f64) -> (f64, f64) {
        let two_delta = 2.0 * self.delta;
        let upper = if bound < self.bias { two_delta / (self.bias - bound) } else { f64::INFINITY };
        (two_delta / (self.bias + bound), upper)
    }

    /// Integration step `min(pi / (64 omega), T_min / 16)` for an input
    /// bounded by `input_bound`.
    pub fn default_step(&self, omega: f64, input_bound: f64) -> f64 {
        let (t_min, _) = self.interval_bounds(input_bound.abs());
        (PI / (64.0 * omega)).min(t_min / 16.0)
    }
}

/// Trigger times `t_0 < t_1 < ... < t_K`; `t_0` is the start of encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerTimes {
    times: Vec<f64>,
}

impl TriggerTimes {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InsufficientData("trigger list is empty".into()));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::Parameter(format!("non-finite trigger time at index {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone { index: i + 1 });
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of stored instants including `t_0`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Triggers emitted after `t_0`.
    pub fn trigger_count(&self) -> usize {
        self.times.len() - 1
    }

    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    /// Smallest inter-trigger gap (`T_min`), if there are two instants.
    pub fn min_gap(&self) -> Option<f64> {
        self.gaps().reduce(f64::min)
    }

    /// Largest inter-trigger gap (`T_max`), if there are two instants.
    pub fn max_gap(&self) -> Option<f64> {
        self.gaps().reduce(f64::max)
    }

    /// Interval midpoints `(t_k + t_{k+1}) / 2`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Per-trigger sequences derived from the trigger times alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    /// `q_k = (-1)^k 2 delta - (-1)^k b (t_{k+1} - t_k)` for `k = 0..K-1`.
    pub q: Vec<f64>,
    /// `X(t_k) = sum_{m<k} q_m` for `k = 0..K`, with `X(t_0) = 0`.
    pub integral: Vec<f64>,
}

/// `(-1)^k`
#[inline]
pub(crate) fn alt(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn just_below(t: f64) -> f64 {
    if t > 0.0 {
        f64::from_bits(t.to_bits() - 1)
    } else {
        t
    }
}

/// Simulate the ASDM on `[0, duration]` with a fixed Simpson step.
///
/// The integrand depends on time only, so each fixed step is one Simpson
/// panel (the fourth-order scheme) and steps are cut at the input's jump
/// discontinuities. A threshold crossing inside a step is located by
/// bisection on the partial-panel integral down to floating-point
/// resolution, after which `y` is reset exactly to the threshold.
/// No trigger is emitted for the final partial interval.
pub fn encode_asdm<W: Waveform + ?Sized>(
    input: &W,
    params: &AsdmParams,
    duration: f64,
    step: f64,
) -> Result<TriggerTimes> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Parameter(format!("duration must be positive, got {duration}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    let delta = params.delta;
    let breaks = input.breakpoints();
    // right end uses the left limit so panels ending on a jump see the pre-jump value
    let panel = |a: f64, b: f64| {
        let h = b - a;
        h / 6.0 * (input.value(a) + 4.0 * input.value(0.5 * (a + b)) + input.value(just_below(b)))
    };

    let mut times = vec![0.0];
    let mut t = 0.0;
    let mut y = -delta;
    let mut k = 0usize;
    let mut next_break = breaks.partition_point(|&b| b <= t);
    while t < duration {
        let feedback = alt(k) * params.bias;
        let target = alt(k) * delta;
        let mut t_next = (t + step).min(duration);
        while next_break < breaks.len() && breaks[next_break] <= t {
            next_break += 1;
        }
        if next_break < breaks.len() && breaks[next_break] < t_next {
            t_next = breaks[next_break];
        }
        let level = |s: f64| y + panel(t, s) + feedback * (s - t) - target;
        let crossed = |v: f64| if k.is_multiple_of(2) { v >= 0.0 } else { v <= 0.0 };
        let end_level = level(t_next);
        if crossed(end_level) {
            let (mut lo, mut hi) = (t, t_next);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if crossed(level(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            times.push(hi);
            t = hi;
            y = target;
            k += 1;
        } else {
            y = end_level + target;
            t = t_next;
        }
    }
    TriggerTimes::new(times)
}

/// Largest t-transform residual
/// `|int_{t_k}^{t_{k+1}} (input + (-1)^k b) - (-1)^k 2 delta|` over all intervals.
///
/// The integrals use composite Gauss-Legendre quadrature split at the
/// input's discontinuities, independent of the encoder's Simpson rule.
pub fn t_transform_residual<W: Waveform + ?Sized>(
    input: &W,
    triggers: &TriggerTimes,
    params: &AsdmParams,
    max_panel: f64,
) -> Result<f64> {
    if triggers.len() < 2 {
        return Err(Error::InsufficientData("need at least two trigger instants".into()));
    }
    let f = |t: f64| input.value(t);
    let breaks = input.breakpoints();
    Ok(triggers
        .times()
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let area = quad::composite_split(&f, w[0], w[1], max_panel, breaks);
            let s = alt(k);
            (area + s * params.bias * (w[1] - w[0]) - s * 2.0 * params.delta).abs()
        })
        .fold(0.0, f64::max))
}

/// Largest input amplitude `b - 2 delta omega / pi` for which trigger gaps
/// stay below the Nyquist interval.
pub fn dynamic_range(params: &AsdmParams, omega: f64) -> Result<f64> {
    let g_max = params.bias - 2.0 * params.delta * omega / PI;
    if g_max <= 0.0 {
        return Err(Error::Config(format!(
            "b = {} <= 2 delta omega / pi = {}",
            params.bias,
            2.0 * params.delta * omega / PI
        )));
    }
    Ok(g_max)
}

/// Local integrals `q_k` and their running sum `X(t_k)`.
pub fn sample_series(triggers: &TriggerTimes, params: &AsdmParams) -> Result<SampleSeries> {
    if triggers.len() < 2 {
        return Err(Error::InsufficientData("need at least two trigger instants".into()));
    }
    let q: Vec<f64> = triggers
        .gaps()
        .enumerate()
        .map(|(k, gap)| alt(k) * (2.0 * params.delta - params.bias * gap))
        .collect();
    let mut integral = Vec::with_capacity(q.len() + 1);
    let mut acc = 0.0;
    integral.push(acc);
    for v in &q {
        acc += v;
        integral.push(acc);
    }
    Ok(SampleSeries { q, integral })
}

/// Classical ASDM decoding assuming no folds.
///
/// Runs the local-average iteration on the `q_k` directly. No density
/// check is made: a saturated encoder leaves long gaps and the result is
/// simply a poor (possibly divergent) estimate.
pub fn classical_decode(
    triggers: &TriggerTimes,
    params: &AsdmParams,
    omega: f64,
    config: &RecoveryConfig,
    reference: Option<&dyn Waveform>,
) -> Result<Reconstruction> {
    if triggers.len() < 2 {
        return Err(Error::InsufficientData("classical decoding needs at least two trigger instants".into()));
    }
    let series = sample_series(triggers, params)?;
    recovery::reconstruct_unchecked(&series.q, triggers, omega, config, reference)
}
