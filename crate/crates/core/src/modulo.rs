//! Ideal modulo and the modulo-hysteresis encoder.
//!
//! The hysteresis encoder folds whenever the running output `x = g - C`
//! reaches `+lambda` or `-lambda`. Each fold moves the offset `C` by
//! `2 lambda_h` in the crossing direction, which resets the output to
//! `-(lambda - h)` after an upward fold and `+(lambda - h)` after a
//! downward one.

use crate::error::{Error, Result};
use crate::signal::{BandlimitedSignal, DenseWaveform, Waveform};

/// Threshold `lambda` and hysteresis `h` of the modulo-hysteresis fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuloParams {
    lambda: f64,
    hysteresis: f64,
}

impl ModuloParams {
    pub fn new(lambda: f64, hysteresis: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(0.0..lambda).contains(&hysteresis) {
            return Err(Error::Parameter(format!(
                "hysteresis must lie in [0, lambda), got h = {hysteresis}, lambda = {lambda}"
            )));
        }
        Ok(Self { lambda, hysteresis })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn hysteresis(&self) -> f64 {
        self.hysteresis
    }

    /// `lambda - h / 2`; every fold moves the offset by twice this.
    pub fn lambda_h(&self) -> f64 {
        self.lambda - 0.5 * self.hysteresis
    }

    /// `min(h, 2 lambda_h)`, the smallest input excursion between folds.
    pub fn h_star(&self) -> f64 {
        self.hysteresis.min(2.0 * self.lambda_h())
    }
}

/// `2 lambda ([[value / 2 lambda + 1/2]] - 1/2)`, with `[[.]]` the
/// fractional part. The result lies in `[-lambda, lambda)`.
pub fn ideal_modulo(value: f64, lambda: f64) -> f64 {
    let u = value / (2.0 * lambda) + 0.5;
    let frac = u - u.floor();
    2.0 * lambda * (frac - 0.5)
}

/// Folding times and directions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FoldRecord {
    times: Vec<f64>,
    signs: Vec<i8>,
}

impl FoldRecord {
    pub fn new(times: Vec<f64>, signs: Vec<i8>) -> Result<Self> {
        if times.len() != signs.len() {
            return Err(Error::Shape(format!("{} fold times but {} signs", times.len(), signs.len())));
        }
        if let Some(bad) = signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::Parameter(format!("fold sign must be +1 or -1, got {bad}")));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone { index: i + 1 });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("non-finite fold time".into()));
        }
        Ok(Self { times, signs })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Signed fold count up to and including `t`, i.e. `sum s_r 1[tau_r <= t]`.
    pub fn level(&self, t: f64) -> i64 {
        let n = self.times.partition_point(|&tau| tau <= t);
        self.signs[..n].iter().map(|&s| s as i64).sum()
    }

    /// Smallest gap between consecutive folds, if there are at least two.
    pub fn min_gap(&self) -> Option<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }
}

/// Output `x(t) = g(t) - 2 lambda_h sum_r s_r 1[tau_r, inf)(t)` of the
/// modulo-hysteresis encoder.
#[derive(Debug, Clone)]
pub struct FoldedSignal<W = BandlimitedSignal> {
    input: W,
    folds: FoldRecord,
    lambda_h: f64,
}

impl<W: Waveform> FoldedSignal<W> {
    pub fn new(input: W, folds: FoldRecord, lambda_h: f64) -> Self {
        Self { input, folds, lambda_h }
    }

    pub fn input(&self) -> &W {
        &self.input
    }

    pub fn folds(&self) -> &FoldRecord {
        &self.folds
    }

    pub fn lambda_h(&self) -> f64 {
        self.lambda_h
    }

    /// The residue `eps_g(t)` (the staircase removed from the input).
    pub fn residue(&self, t: f64) -> f64 {
        2.0 * self.lambda_h * self.folds.level(t) as f64
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.input.value(t) - self.residue(t)
    }

    pub fn sample(&self, start: f64, end: f64, step: f64) -> Result<DenseWaveform> {
        DenseWaveform::from_fn(start, end, step, |t| self.eval(t))
    }
}

impl<W: Waveform> Waveform for FoldedSignal<W> {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn breakpoints(&self) -> &[f64] {
        self.folds.times()
    }
}

/// Bisection to this width (seconds) when locating folds.
const FOLD_TIME_TOL: f64 = 1e-13;

/// Run the modulo-hysteresis fold over `[0, support_end]` of `sig`.
///
/// Crossings are bracketed on a scan grid of 128 points per Nyquist
/// interval and refined by bisection well below `1e-9` s. A value that
/// lands exactly on a threshold counts as a fold.
pub fn encode_hysteresis(
    sig: &BandlimitedSignal,
    params: &ModuloParams,
) -> Result<(FoldRecord, FoldedSignal)> {
    fold_waveform(sig.clone(), params, sig.support_end(), sig.grid_spacing() / 128.0)
}

/// [`encode_hysteresis`] for any input waveform over `[0, end]`.
pub fn fold_waveform<W: Waveform>(
    input: W,
    params: &ModuloParams,
    end: f64,
    scan_step: f64,
) -> Result<(FoldRecord, FoldedSignal<W>)> {
    let folds = fold_times(&input, params, end, scan_step)?;
    let folded = FoldedSignal::new(input, folds.clone(), params.lambda_h());
    Ok((folds, folded))
}

/// Fold times of an arbitrary input over `[0, end]`, scanning with `scan_step`.
pub fn fold_times<W: Waveform + ?Sized>(
    input: &W,
    params: &ModuloParams,
    end: f64,
    scan_step: f64,
) -> Result<FoldRecord> {
    if !(scan_step > 0.0 && end > 0.0) {
        return Err(Error::Parameter(format!(
            "scan step and horizon must be positive, got {scan_step} and {end}"
        )));
    }
    let lambda = params.lambda();
    let g0 = input.value(0.0);
    if g0.abs() >= lambda {
        return Err(Error::UnsupportedStart { value: g0.abs(), lambda });
    }
    let jump = 2.0 * params.lambda_h();
    let n_steps = (end / scan_step).ceil() as usize;
    let step = end / n_steps as f64;

    let mut times: Vec<f64> = Vec::new();
    let mut signs = Vec::new();
    let mut offset = 0.0;
    let mut a = 0.0;
    let mut i = 1;
    while i <= n_steps {
        let b = if i == n_steps { end } else { i as f64 * step };
        let x_b = input.value(b) - offset;
        let sign = if x_b >= lambda {
            1i8
        } else if x_b <= -lambda {
            -1i8
        } else {
            a = b;
            i += 1;
            continue;
        };
        let level = offset + sign as f64 * lambda;
        let reached = |t: f64| {
            let g = input.value(t);
            if sign > 0 {
                g >= level
            } else {
                g <= level
            }
        };
        let (mut lo, mut hi) = (a, b);
        while hi - lo > FOLD_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if reached(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if times.last().is_some_and(|&last| hi <= last) {
            // sitting exactly on the opposite threshold right after a reset (h = 0)
            a = b;
            i += 1;
            continue;
        }
        times.push(hi);
        signs.push(sign);
        offset += sign as f64 * jump;
        // re-examine the same scan point against the new offset
        a = hi;
    }
    FoldRecord::new(times, signs)
}

/// `E_g(t) = 2 lambda_h sum_r s_r max(0, t - tau_r)` at each time.
pub fn residue_samples(folds: &FoldRecord, lambda_h: f64, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let ramp: f64 = folds
                .times()
                .iter()
                .zip(folds.signs())
                .take_while(|(&tau, _)| tau < t)
                .map(|(&tau, &s)| s as f64 * (t - tau))
                .sum();
            2.0 * lambda_h * ramp
        })
        .collect()
}

/// Lower bound `h* / (omega g_sup)` on the gap between consecutive folds.
pub fn min_fold_separation(params: &ModuloParams, omega: f64, g_sup: f64) -> Result<f64> {
    if !(omega > 0.0 && g_sup > 0.0) {
        return Err(Error::Parameter(format!("omega and g_sup must be positive, got {omega} and {g_sup}")));
    }
    Ok(params.h_star() / (omega * g_sup))
}
