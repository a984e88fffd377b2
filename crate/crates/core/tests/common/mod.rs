//! Strategies, independent oracles and checks shared by the property
//! suites and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::{E, PI};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use meds::asdm::{encode_asdm, AsdmParams, TriggerTimes};
use meds::harness::{simulate, ExperimentConfig};
use meds::modulo::{encode_hysteresis, min_fold_separation, ModuloParams};
use meds::recovery::{
    bound_dng, detect_and_estimate, final_error_bound, local_average_reconstruct, mu_beta, nonuniform_diff,
    threshold_psi, RecoveryConfig,
};
use meds::signal::{make_random_bandlimited, Waveform};

/// Randomized cases per property.
pub const CASES: u32 = 256;

pub fn config() -> Config {
    Config { cases: CASES, failure_persistence: None, ..Config::default() }
}

/// Seeded runner so acceptance output is reproducible.
pub fn runner() -> TestRunner {
    TestRunner::new_with_rng(config(), TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

type Check = std::result::Result<(), TestCaseError>;

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

// ---------------------------------------------------------------------------
// oracles

/// Composite 5-point Gauss-Legendre rule, split at `breaks`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panel: f64, breaks: &[f64]) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / panel).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let mid = w[0] + (i as f64 + 0.5) * h;
            total += 0.5 * h * X.iter().zip(W).map(|(x, wt)| wt * f(mid + 0.5 * h * x)).sum::<f64>();
        }
    }
    total
}

/// Trapezoid L2 norm of samples on a uniform grid.
pub fn l2(samples: &[f64], step: f64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let sq: f64 = samples.iter().map(|v| v * v).sum();
    (step * (sq - 0.5 * (samples[0].powi(2) + samples[n - 1].powi(2)))).sqrt()
}

/// `sum_j 1 / prod_{i != j} |t_j - t_i|` over one window.
fn divided_difference_weight(t: &[f64]) -> f64 {
    (0..t.len())
        .map(|j| {
            let p: f64 = (0..t.len()).filter(|&i| i != j).map(|i| (t[j] - t[i]).abs()).product();
            1.0 / p
        })
        .sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Times from a start and a list of gaps.
fn cumulative(start: f64, gaps: &[f64]) -> Vec<f64> {
    let mut t = vec![start];
    for g in gaps {
        let last = *t.last().unwrap();
        t.push(last + g);
    }
    t
}

fn gap_range(t: &[f64]) -> (f64, f64) {
    t.windows(2).map(|w| w[1] - w[0]).fold((f64::INFINITY, 0.0), |(lo, hi), g| (lo.min(g), hi.max(g)))
}

/// `mu_l^N` and `beta_l^N` over every index, straight from the recursion.
fn mu_beta_oracle(t: &[f64], l: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let len = t.len();
    let mut mu: Vec<f64> =
        (0..len).map(|k| if k + 1 == l && k + 2 < len { 1.0 / (t[k + 2] - t[k]) } else { 0.0 }).collect();
    let mut beta: Vec<f64> =
        (0..len).map(|k| if k == l && k + 2 < len { 1.0 / (t[k + 2] - t[k]) } else { 0.0 }).collect();
    for order in 2..n {
        let step =
            |s: &[f64]| -> Vec<f64> {
                (0..len)
                    .map(|k| {
                        if k + order + 1 < len {
                            (s[k + 1] - s[k]) / (t[k + order + 1] - t[k])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            };
        mu = step(&mu);
        beta = step(&beta);
    }
    (mu, beta)
}

// ---------------------------------------------------------------------------
// t-transform residual

#[derive(Debug, Clone)]
pub struct EncodingCase {
    pub seed: u64,
    pub omega: f64,
    pub amplitude_ratio: f64,
    pub delta: f64,
}

pub fn encoding_case() -> impl Strategy<Value = EncodingCase> {
    (any::<u64>(), 80.0..200.0, 0.3..8.0, 1e-3..3e-3).prop_map(|(seed, omega, amplitude_ratio, delta)| {
        EncodingCase { seed, omega, amplitude_ratio, delta }
    })
}

pub fn check_t_transform(c: EncodingCase) -> Check {
    let (lambda, h, b, duration) = (4.38, 2.19, 9.0, 0.05);
    let sig = ok(make_random_bandlimited(c.seed, c.omega, duration, c.amplitude_ratio * lambda))?;
    let modulo = ok(ModuloParams::new(lambda, h))?;
    let asdm = ok(AsdmParams::new(c.delta, b))?;
    let (_, folded) = ok(encode_hysteresis(&sig, &modulo))?;
    let trig = ok(encode_asdm(&folded, &asdm, duration, asdm.default_step(c.omega, lambda)))?;
    prop_assert!(trig.len() > 2);
    let f = |t: f64| folded.value(t);
    let breaks = folded.breakpoints().to_vec();
    let mut worst: f64 = 0.0;
    for (k, w) in trig.times().windows(2).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let area = integrate(&f, w[0], w[1], PI / (8.0 * c.omega), &breaks);
        worst = worst.max((area + sign * b * (w[1] - w[0]) - sign * 2.0 * c.delta).abs());
    }
    prop_assert!(worst < 1e-6 * c.delta, "residual {worst:e} vs {:e}", 1e-6 * c.delta);
    Ok(())
}

// ---------------------------------------------------------------------------
// fold separation

#[derive(Debug, Clone)]
pub struct SeparationCase {
    pub seed: u64,
    pub omega: f64,
    pub lambda: f64,
    pub h_fraction: f64,
    pub amplitude_ratio: f64,
}

pub fn separation_case() -> impl Strategy<Value = SeparationCase> {
    (any::<u64>(), 50.0..300.0, 0.5..5.0, 0.05..0.95, 1.05..15.0).prop_map(
        |(seed, omega, lambda, h_fraction, amplitude_ratio)| SeparationCase {
            seed,
            omega,
            lambda,
            h_fraction,
            amplitude_ratio,
        },
    )
}

pub fn check_fold_separation(c: SeparationCase) -> Check {
    let h = c.h_fraction * c.lambda;
    let sig = ok(make_random_bandlimited(c.seed, c.omega, 0.1, c.amplitude_ratio * c.lambda))?;
    let params = ok(ModuloParams::new(c.lambda, h))?;
    let (folds, _) = ok(encode_hysteresis(&sig, &params))?;
    let g_sup = sig.max_abs().1;
    let h_star = h.min(2.0 * c.lambda - h);
    let bound = h_star / (c.omega * g_sup);
    let lib = ok(min_fold_separation(&params, c.omega, g_sup))?;
    prop_assert!((lib - bound).abs() <= 1e-12 * bound);
    if let Some(gap) = folds.min_gap() {
        prop_assert!(gap >= bound * (1.0 - 1e-9), "gap {gap:e} below {bound:e}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// D^N exactness

#[derive(Debug, Clone)]
pub struct PolyCase {
    pub order: usize,
    pub times: Vec<f64>,
    pub coeffs: Vec<f64>,
}

pub fn poly_case() -> impl Strategy<Value = PolyCase> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (Just(n), prop::collection::vec(1.0..4.0f64, n..=n + 2), prop::collection::vec(-1.0..1.0f64, n))
        })
        .prop_map(|(order, gaps, coeffs)| {
            let total: f64 = gaps.iter().sum();
            let scaled: Vec<f64> = gaps.iter().map(|g| 2.0 * g / total).collect();
            PolyCase { order, times: cumulative(-1.0, &scaled), coeffs }
        })
}

pub fn check_dn_exactness(c: PolyCase) -> Check {
    let n = c.order;
    let p = |t: f64| c.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a);
    let values: Vec<f64> = c.times.iter().map(|&t| p(t)).collect();
    let d = ok(nonuniform_diff(&values, &c.times, n))?;
    prop_assert_eq!(d.len(), c.times.len() - n);
    for (k, dk) in d.iter().enumerate() {
        let window = &c.times[k..=k + n];
        let scale =
            values[k..=k + n].iter().fold(0.0f64, |m, v| m.max(v.abs())) * divided_difference_weight(window);
        prop_assert!(dk.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE), "k={k}: {dk:e} vs scale {scale:e}");
    }
    let powers: Vec<f64> = c.times.iter().map(|t| t.powi(n as i32)).collect();
    for (k, dk) in ok(nonuniform_diff(&powers, &c.times, n))?.iter().enumerate() {
        prop_assert!((dk - 1.0).abs() <= 1e-9, "k={k}: D^N t^N = {dk}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bound on D^N G

#[derive(Debug, Clone)]
pub struct DngCase {
    pub seed: u64,
    pub omega: f64,
    pub amplitude: f64,
    pub order: usize,
    pub gap_fraction: f64,
    pub gap_ratio: f64,
    pub jitter: Vec<f64>,
}

pub fn dng_case() -> impl Strategy<Value = DngCase> {
    (
        any::<u64>(),
        50.0..300.0,
        0.5..40.0,
        2usize..=4,
        0.05..0.9,
        1.0..3.0,
        prop::collection::vec(0.0..1.0f64, 20..60),
    )
        .prop_map(|(seed, omega, amplitude, order, gap_fraction, gap_ratio, jitter)| DngCase {
            seed,
            omega,
            amplitude,
            order,
            gap_fraction,
            gap_ratio,
            jitter,
        })
}

pub fn check_dng_bound(c: DngCase) -> Check {
    let t_floor = c.gap_fraction * PI / c.omega / c.gap_ratio;
    let gaps: Vec<f64> = c.jitter.iter().map(|u| t_floor * (1.0 + (c.gap_ratio - 1.0) * u)).collect();
    let times = cumulative(0.5 * t_floor, &gaps);
    let duration = times.last().unwrap() + PI / c.omega;
    let sig = ok(make_random_bandlimited(c.seed, c.omega, duration, c.amplitude))?;
    let f = |t: f64| sig.eval(t);
    let mut big_g = vec![integrate(&f, 0.0, times[0], PI / (8.0 * c.omega), &[])];
    for w in times.windows(2) {
        let next = big_g.last().unwrap() + integrate(&f, w[0], w[1], PI / (8.0 * c.omega), &[]);
        big_g.push(next);
    }
    let (t_min, t_max) = gap_range(&times);
    let g_sup = c.amplitude;
    let n = c.order;
    let bound = (t_max / t_min * c.omega * E).powi(n as i32) * g_sup / (c.omega * factorial(n));
    let lib = bound_dng(c.omega, n, t_min, t_max, g_sup);
    prop_assert!((lib - bound).abs() <= 1e-12 * bound);
    let d = ok(nonuniform_diff(&big_g, &times, n))?;
    let worst = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    prop_assert!(worst <= bound, "max |D^N G| = {worst:e} > {bound:e}");
    Ok(())
}

// ---------------------------------------------------------------------------
// mu / beta

#[derive(Debug, Clone)]
pub struct MuBetaCase {
    pub order: usize,
    pub times: Vec<f64>,
    pub pivot: usize,
}

pub fn mu_beta_case() -> impl Strategy<Value = MuBetaCase> {
    (2usize..=6, 1e-4..1e-2, 1.0..4.0)
        .prop_flat_map(|(n, t_min, ratio)| {
            (
                Just(n),
                prop::collection::vec(t_min..t_min * ratio, 2 * n + 1..2 * n + 12),
                any::<prop::sample::Index>(),
            )
        })
        .prop_map(|(order, gaps, idx)| {
            let times = cumulative(0.0, &gaps);
            // valid pivots: order - 1 ..= len - order - 1
            let lo = order - 1;
            let hi = times.len() - order - 1;
            let pivot = lo + idx.index(hi - lo + 1);
            MuBetaCase { order, times, pivot }
        })
}

pub fn check_mu_beta(c: MuBetaCase) -> Check {
    let (n, l) = (c.order, c.pivot as i64);
    let table = ok(mu_beta(&c.times, c.pivot, n))?;
    let (mu, beta) = mu_beta_oracle(&c.times, c.pivot, n);
    for k in 0..c.times.len() {
        let (m, b) = (table.mu(k as i64), table.beta(k as i64));
        prop_assert!((m - mu[k]).abs() <= 1e-9 * mu[k].abs().max(1e-300), "mu[{k}] {m} vs {}", mu[k]);
        prop_assert!((b - beta[k]).abs() <= 1e-9 * beta[k].abs().max(1e-300), "beta[{k}] {b} vs {}", beta[k]);
    }
    let expect_mu: Vec<i64> = (l - n as i64 + 1..=l - 1).collect();
    let expect_beta: Vec<i64> = (l - n as i64 + 2..=l).collect();
    prop_assert_eq!(table.mu_support(), expect_mu);
    prop_assert_eq!(table.beta_support(), expect_beta);

    for k in l - n as i64 - 1..=l + 1 {
        prop_assert!(table.mu(k) * table.mu(k + 1) <= 0.0);
        prop_assert!(table.beta(k) * table.beta(k + 1) <= 0.0);
        prop_assert!(table.mu(k) * table.beta(k) <= 0.0);
    }

    let (t_min, t_max) = gap_range(&c.times);
    let nf = factorial(n);
    let lower = 1.0 / (nf * t_max.powi(n as i32 - 1)) * (1.0 - 1e-12);
    let upper = 1.0 / (nf * t_min.powi(n as i32 - 1)) * (1.0 + 1e-12);
    for k in [l - n as i64 + 2, l] {
        let v = table.beta(k).abs();
        prop_assert!(v >= lower && v <= upper, "|beta[{k}]| = {v:e} not in [{lower:e}, {upper:e}]");
    }
    for k in [l - n as i64 + 1, l - 1] {
        let v = table.mu(k).abs();
        prop_assert!(v >= lower && v <= upper, "|mu[{k}]| = {v:e} not in [{lower:e}, {upper:e}]");
    }
    let mid = (n as f64 - 2.0) / (nf * t_min.powi(n as i32 - 1)) * (1.0 + 1e-12);
    prop_assert!(table.mu(l - n as i64 + 2).abs() <= mid);
    prop_assert!(table.beta(l - 1).abs() <= mid);
    Ok(())
}

// ---------------------------------------------------------------------------
// single-fold sign and time estimates

#[derive(Debug, Clone)]
pub struct FoldCase {
    pub order: usize,
    pub gaps: Vec<f64>,
    pub fold_at: prop::sample::Index,
    pub p: f64,
    pub positive: bool,
    pub lambda_h: f64,
    pub smooth_fraction: f64,
    pub freq: f64,
    pub phase: f64,
}

pub fn fold_case() -> impl Strategy<Value = FoldCase> {
    (2usize..=4, 1e-4..1e-3, 1.0..2.5)
        .prop_flat_map(|(n, t_min, ratio)| {
            (
                Just(n),
                prop::collection::vec(t_min..t_min * ratio, 40..80),
                any::<prop::sample::Index>(),
                0.0..1.0,
                any::<bool>(),
                0.5..5.0,
                0.0..0.95,
                10.0..300.0,
                0.0..2.0 * PI,
            )
        })
        .prop_map(|(order, gaps, fold_at, p, positive, lambda_h, smooth_fraction, freq, phase)| FoldCase {
            order,
            gaps,
            fold_at,
            p,
            positive,
            lambda_h,
            smooth_fraction,
            freq,
            phase,
        })
}

pub fn check_single_fold(c: FoldCase) -> Check {
    let n = c.order;
    let times = cumulative(0.0, &c.gaps);
    let len = times.len();
    // keep D^N E_g inside the range where the threshold is defined
    let lo = n + 2;
    let hi = len - n - 4;
    let k1 = lo + c.fold_at.index(hi - lo + 1);
    let tau = times[k1 + 1] - c.p * (times[k1 + 1] - times[k1]);
    let s = if c.positive { 1.0 } else { -1.0 };

    let psi = ok(threshold_psi(&times, n, c.lambda_h))?;
    let smooth: Vec<f64> = times.iter().map(|&t| (c.freq * t + c.phase).sin()).collect();
    let d_smooth = ok(nonuniform_diff(&smooth, &times, n))?;
    // scale the smooth part so |D^N G| < Psi holds strictly everywhere
    let room = d_smooth
        .iter()
        .zip(&psi)
        .filter(|(d, p)| p.is_finite() && d.abs() > 0.0)
        .map(|(d, p)| p / d.abs())
        .fold(f64::INFINITY, f64::min);
    let amp = if room.is_finite() { c.smooth_fraction * room } else { 0.0 };

    let x: Vec<f64> = times
        .iter()
        .zip(&smooth)
        .map(|(&t, g)| amp * g - 2.0 * c.lambda_h * s * (t - tau).max(0.0))
        .collect();
    let filtered = ok(nonuniform_diff(&x, &times, n))?;
    let found = ok(detect_and_estimate(&filtered, &psi, &times, n))?;
    prop_assert_eq!(found.len(), 1, "expected one fold, got {:?}", found.folds);
    let f = found.folds[0];
    prop_assert_eq!(f64::from(f.sign), s);
    let (_, t_max) = gap_range(&times);
    let limit = if f.k_max - f.k_min == n - 2 { t_max } else { 0.5 * t_max };
    let err = (f.tau - tau).abs();
    prop_assert!(err <= limit * (1.0 + 1e-12), "|tau error| {err:e} > {limit:e} (gap {})", f.k_max - f.k_min);
    Ok(())
}

// ---------------------------------------------------------------------------
// reconstruction error bound

#[derive(Debug, Clone)]
pub struct RecoveryCase {
    pub seed: u64,
    pub delta: f64,
    pub amplitude: f64,
}

pub fn recovery_case() -> impl Strategy<Value = RecoveryCase> {
    (any::<u64>(), 1e-3..2.5e-3, 8.0..35.0).prop_map(|(seed, delta, amplitude)| RecoveryCase {
        seed,
        delta,
        amplitude,
    })
}

/// Returns whether the run passed detection (and so was checked).
pub fn check_error_bound(c: &RecoveryCase) -> std::result::Result<bool, TestCaseError> {
    let cfg = ExperimentConfig {
        seed: c.seed,
        delta: c.delta,
        amplitude: c.amplitude,
        duration: 0.08,
        ..ExperimentConfig::default()
    };
    let run = ok(simulate(&cfg, false))?;
    if !run.folds_recovered() {
        return Ok(false);
    }
    let report = run.meds.as_ref().unwrap();
    let w = report.waveform();
    let truth: Vec<f64> = w.times().map(|t| run.input.value(t)).collect();
    let diff: Vec<f64> = truth.iter().zip(w.samples()).map(|(a, b)| a - b).collect();
    let (g_norm, err) = (l2(&truth, w.step()), l2(&diff, w.step()));

    let (lambda_h, b, lambda, omega) = (cfg.lambda - cfg.hysteresis / 2.0, cfg.bias, cfg.lambda, cfg.omega);
    let r = run.folds.len() as f64;
    let iters = report.reconstruction.iterations();
    let ratio = 2.0 * c.delta * omega / (PI * (b - lambda));
    let bound = 4.0 * lambda_h * 2.0 * c.delta * r * (omega * PI).sqrt()
        / (PI * (b - lambda) - 2.0 * c.delta * omega)
        + ratio.powi(iters as i32 + 1) * g_norm;
    let lib = ok(final_error_bound(lambda_h, c.delta, run.folds.len(), omega, b, lambda, iters, g_norm))?;
    prop_assert!((lib - bound).abs() <= 1e-9 * bound);
    prop_assert!(err <= bound, "||g - g_n|| = {err:e} > bound {bound:e}");
    Ok(true)
}

pub fn check_error_bound_case(c: RecoveryCase) -> Check {
    check_error_bound(&c).map(|_| ())
}

// ---------------------------------------------------------------------------
// per-iteration contraction

#[derive(Debug, Clone)]
pub struct ContractionCase {
    pub omega: f64,
    pub delta: f64,
    pub bias: f64,
    pub bumps: Vec<(f64, f64)>,
}

pub fn contraction_case() -> impl Strategy<Value = ContractionCase> {
    (100.0..200.0, 3e-3..6e-3, 2.5..4.0, prop::collection::vec((0.0..8.0, -1.0..1.0f64), 1..4))
        .prop_map(|(omega, delta, bias, bumps)| ContractionCase { omega, delta, bias, bumps })
}

/// `(sin(x) / x)^4` with `x = omega t / 4`: bandlimited to `omega`, decays as `t^-4`.
fn bump(omega: f64, t: f64) -> f64 {
    let x = 0.25 * omega * t;
    if x.abs() < 1e-8 {
        1.0
    } else {
        (x.sin() / x).powi(4)
    }
}

/// Margin (in Nyquist intervals) of quiet input around the bumps.
const MARGIN: f64 = 30.0;

/// Errors below this fraction of `||g||` sit at the floor set by the finite
/// record and are not compared.
pub const CONTRACTION_FLOOR: f64 = 1e-4;

/// Errors `||g - g_n||` for `n = -1, 0, 1, ...` (the first entry is `||g||`)
/// and the contraction limit `T_max omega / pi`.
pub fn contraction_errors(
    c: &ContractionCase,
    margin: f64,
) -> std::result::Result<(Vec<f64>, f64), TestCaseError> {
    let nyq = PI / c.omega;
    let total: f64 = c.bumps.iter().map(|(_, a)| a.abs()).sum::<f64>().max(1e-3);
    let bumps: Vec<(f64, f64)> = c.bumps.iter().map(|&(pos, a)| (nyq * (margin + pos), a / total)).collect();
    let omega = c.omega;
    let g = move |t: f64| bumps.iter().map(|(s, a)| a * bump(omega, t - s)).sum::<f64>();
    let end = nyq * (2.0 * margin + 8.0);
    let asdm = ok(AsdmParams::new(c.delta, c.bias))?;
    let trig: TriggerTimes = ok(encode_asdm(&g, &asdm, end, asdm.default_step(c.omega, 1.0)))?;
    let inc: Vec<f64> = trig.times().windows(2).map(|w| integrate(&g, w[0], w[1], nyq / 8.0, &[])).collect();
    let cfg = RecoveryConfig { iterations: 6, tolerance: 0.0, ..RecoveryConfig::default() };
    let rec = ok(local_average_reconstruct(&inc, &trig, c.omega, &cfg, Some(&g)))?;
    let w = &rec.waveform;
    let g_norm = l2(&w.times().map(&g).collect::<Vec<_>>(), w.step());
    let limit = trig.max_gap().unwrap() * c.omega / PI;
    let errs = std::iter::once(g_norm).chain(rec.trace.iter().map(|r| r.error_l2.unwrap())).collect();
    Ok((errs, limit))
}

pub fn check_contraction(c: ContractionCase) -> Check {
    let (errs, limit) = contraction_errors(&c, MARGIN)?;
    let g_norm = errs[0];
    for (n, e) in errs.windows(2).enumerate() {
        if e[0] <= CONTRACTION_FLOOR * g_norm {
            break;
        }
        prop_assert!(e[1] <= limit * e[0], "step {n}: {:e} > {limit:.4} * {:e}", e[1], e[0]);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// in-range inputs

#[derive(Debug, Clone)]
pub struct InRangeCase {
    pub seed: u64,
    pub amplitude_ratio: f64,
    pub delta: f64,
}

pub fn in_range_case() -> impl Strategy<Value = InRangeCase> {
    (any::<u64>(), 0.2..0.95, 1e-3..3e-3).prop_map(|(seed, amplitude_ratio, delta)| InRangeCase {
        seed,
        amplitude_ratio,
        delta,
    })
}

/// Largest allowed trigger disagreement: twice the encoder's crossing
/// resolution.
pub const CROSSING_TOL: f64 = 2e-12;

pub fn check_backward_compatible(c: InRangeCase) -> Check {
    let base = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        seed: c.seed,
        amplitude: c.amplitude_ratio * base.lambda,
        delta: c.delta,
        duration: 0.05,
        ..base
    };
    let run = ok(simulate(&cfg, true))?;
    prop_assert!(run.folds.is_empty());
    let (asdm_trig, baseline) = run.baseline.as_ref().unwrap();
    let meds_t = run.meds_triggers.times();
    prop_assert_eq!(meds_t.len(), asdm_trig.len());
    for (a, b) in meds_t.iter().zip(asdm_trig.times()) {
        prop_assert!((a - b).abs() <= CROSSING_TOL, "{a} vs {b}");
    }
    let meds = ok(run.meds.as_ref())?;
    prop_assert!(meds.detection.is_empty());
    let base_rec = ok(baseline.as_ref())?;
    let (m, b) = (meds.waveform().samples(), base_rec.waveform.samples());
    prop_assert_eq!(m.len(), b.len());
    let diff: Vec<f64> = m.iter().zip(b).map(|(x, y)| x - y).collect();
    let step = meds.waveform().step();
    let rel = l2(&diff, step) / l2(b, step);
    prop_assert!(rel <= 1e-6, "relative difference {rel:e}");
    Ok(())
}
