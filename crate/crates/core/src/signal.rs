//! Bandlimited test signals, dense sampled waveforms and norms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad;

/// `sin(omega t) / (pi t)`, continuously extended with `omega / pi` at zero.
#[inline]
pub fn sinc(omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        omega / PI
    } else {
        (omega * t).sin() / (PI * t)
    }
}

/// Anything that can be evaluated as a function of time.
///
/// `breakpoints` lists jump discontinuities (sorted) so integrators can
/// split panels there. Smooth inputs keep the default empty list.
pub trait Waveform {
    fn value(&self, t: f64) -> f64;

    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

impl<F: Fn(f64) -> f64> Waveform for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Finite sinc series `A * sum_n c_n sinc_omega(t - n pi / omega)`.
///
/// Coefficient `coefficients[i]` sits on grid node `first_index + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedSignal {
    coefficients: Vec<f64>,
    first_index: i64,
    omega: f64,
    scale: f64,
    support_end: f64,
}

impl BandlimitedSignal {
    pub fn new(
        coefficients: Vec<f64>,
        first_index: i64,
        omega: f64,
        scale: f64,
        support_end: f64,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Parameter(format!("bandwidth must be positive, got {omega}")));
        }
        if !(support_end > 0.0 && support_end.is_finite()) {
            return Err(Error::Parameter(format!("support end must be positive, got {support_end}")));
        }
        if coefficients.is_empty() {
            return Err(Error::Parameter("coefficient list is empty".into()));
        }
        if !scale.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("non-finite coefficient or scale".into()));
        }
        Ok(Self { coefficients, first_index, omega, scale, support_end })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// Nyquist spacing `pi / omega`.
    pub fn grid_spacing(&self) -> f64 {
        PI / self.omega
    }

    /// Time of grid node `n`.
    pub fn node(&self, n: i64) -> f64 {
        n as f64 * self.grid_spacing()
    }

    /// Same series with a different amplitude scale.
    pub fn with_scale(&self, scale: f64) -> Self {
        Self { scale, ..self.clone() }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let spacing = self.grid_spacing();
        let mut acc = 0.0;
        for (i, c) in self.coefficients.iter().enumerate() {
            let center = (self.first_index + i as i64) as f64 * spacing;
            acc += c * sinc(self.omega, t - center);
        }
        self.scale * acc
    }

    /// `G(b) - G(a)` by composite Gauss-Legendre quadrature.
    ///
    /// Panels are a quarter Nyquist interval wide, which keeps the
    /// absolute error many orders below `1e-10 (b - a) max|g|`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        quad::composite(&|t| self.eval(t), a, b, 0.25 * self.grid_spacing())
    }

    /// Location and value of `max |g|` over `[0, support_end]`.
    ///
    /// Scans 64 points per Nyquist interval, then refines the best grid
    /// point by golden-section search on its two neighbouring cells.
    pub fn max_abs(&self) -> (f64, f64) {
        max_abs_on(&|t| self.eval(t), 0.0, self.support_end, self.grid_spacing() / 64.0)
    }

    /// Evaluate on a uniform grid.
    pub fn sample(&self, start: f64, end: f64, step: f64) -> Result<DenseWaveform> {
        DenseWaveform::from_fn(start, end, step, |t| self.eval(t))
    }

    /// Default norm grid over the support: 32 points per Nyquist interval.
    pub fn dense(&self) -> Result<DenseWaveform> {
        self.sample(0.0, self.support_end, self.grid_spacing() / 32.0)
    }
}

impl Waveform for BandlimitedSignal {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

fn max_abs_on<F: Fn(f64) -> f64>(f: &F, start: f64, end: f64, step: f64) -> (f64, f64) {
    let n = ((end - start) / step).ceil().max(1.0) as usize;
    let h = (end - start) / n as f64;
    let (mut best_i, mut best) = (0usize, f(start).abs());
    for i in 1..=n {
        let v = f(start + i as f64 * h).abs();
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let center = start + best_i as f64 * h;
    let lo = (center - h).max(start);
    let hi = (center + h).min(end);
    let (t, v) = golden_max(|t| f(t).abs(), lo, hi);
    if v > best {
        (t, v)
    } else {
        (center, best)
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Random sinc series on `[0, duration]`, normalised to `max|g| = amplitude`.
///
/// Coefficients are drawn from `U[-1, 1]` for every grid node strictly
/// inside `(0, duration)`; the nodes at and below zero, and beyond the
/// support, carry no energy. Node zero therefore contributes nothing and
/// `g(0) = 0` exactly, so the modulo encoder always starts in range.
pub fn make_random_bandlimited(
    seed: u64,
    omega: f64,
    duration: f64,
    amplitude: f64,
) -> Result<BandlimitedSignal> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Parameter(format!("bandwidth must be positive, got {omega}")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Parameter(format!("duration must be positive, got {duration}")));
    }
    let spacing = PI / omega;
    let last = ((duration / spacing).ceil() as i64 - 1).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients: Vec<f64> = (1..=last).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let raw = BandlimitedSignal::new(coefficients, 1, omega, 1.0, duration)?;
    let (_, peak) = raw.max_abs();
    if peak == 0.0 {
        return Err(Error::Domain("generated signal is identically zero".into()));
    }
    let coefficients = raw.coefficients.iter().map(|c| c / peak).collect();
    BandlimitedSignal::new(coefficients, 1, omega, amplitude, duration)
}

/// `amplitude sin(omega (t - onset))`, a pure tone at the band edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub omega: f64,
    pub onset: f64,
}

impl Sinusoid {
    pub fn new(amplitude: f64, omega: f64, onset: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite() && amplitude.is_finite() && onset.is_finite()) {
            return Err(Error::Parameter(format!(
                "sinusoid needs finite amplitude and onset and positive omega, got {amplitude}, {onset}, {omega}"
            )));
        }
        Ok(Self { amplitude, omega, onset })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * (t - self.onset)).sin()
    }
}

impl Waveform for Sinusoid {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

/// Samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseWaveform {
    start: f64,
    step: f64,
    samples: Vec<f64>,
}

impl DenseWaveform {
    pub fn new(start: f64, step: f64, samples: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { start, step, samples })
    }

    /// Grid covering `[start, end]` with spacing `step` (the last node is
    /// dropped if it would overshoot `end` by more than rounding).
    pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
        }
        if end < start {
            return Err(Error::Parameter(format!("grid end {end} before start {start}")));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| start + i as f64 * step).collect())
    }

    pub fn from_fn<F: Fn(f64) -> f64>(start: f64, end: f64, step: f64, f: F) -> Result<Self> {
        let samples = Self::grid(start, end, step)?.into_iter().map(f).collect();
        Self::new(start, step, samples)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |i| self.time(i))
    }

    /// L2 norm by the trapezoidal rule.
    pub fn l2_norm(&self) -> f64 {
        trapezoid_sq(self.samples.iter().copied(), self.step).sqrt()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.samples.len() == other.samples.len()
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.start - other.start).abs() <= 1e-12 * self.step.max(self.start.abs())
    }
}

fn trapezoid_sq<I: Iterator<Item = f64>>(values: I, step: f64) -> f64 {
    let sq: Vec<f64> = values.map(|v| v * v).collect();
    match sq.len() {
        0 => 0.0,
        1 => 0.0,
        n => step * (sq.iter().sum::<f64>() - 0.5 * (sq[0] + sq[n - 1])),
    }
}

/// `100 * ||reference - estimate|| / ||reference||` in percent.
pub fn relative_error(reference: &DenseWaveform, estimate: &DenseWaveform) -> Result<f64> {
    if !reference.same_grid(estimate) {
        return Err(Error::Shape(format!(
            "grids differ: {} samples from {} step {} vs {} samples from {} step {}",
            reference.len(),
            reference.start,
            reference.step,
            estimate.len(),
            estimate.start,
            estimate.step
        )));
    }
    let norm = reference.l2_norm();
    if norm == 0.0 {
        return Err(Error::Domain("reference has zero norm".into()));
    }
    let diff =
        trapezoid_sq(reference.samples.iter().zip(&estimate.samples).map(|(a, b)| a - b), reference.step)
            .sqrt();
    Ok(100.0 * diff / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_at_zero_is_omega_over_pi() {
        let s = BandlimitedSignal::new(vec![1.0], 0, PI, 1.0, 1.0).unwrap();
        assert_eq!(s.eval(0.0), 1.0);
    }

    #[test]
    fn interpolates_at_nodes() {
        let s = BandlimitedSignal::new(vec![0.3, -0.7, 0.1, 0.9], -1, 150.0, 2.5, 0.1).unwrap();
        for (i, c) in s.coefficients().iter().enumerate() {
            let n = i as i64 - 1;
            let want = 2.5 * c * 150.0 / PI;
            assert!((s.eval(s.node(n)) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn matches_naive_summation() {
        let s = make_random_bandlimited(3, 150.0, 0.13, 10.0).unwrap();
        for &t in &[-0.01, 0.0123, 0.05, 0.0999, 0.2] {
            let mut acc = 0.0;
            for (i, c) in s.coefficients().iter().enumerate() {
                let center = (s.first_index() + i as i64) as f64 * PI / 150.0;
                let d = t - center;
                acc += c * if d == 0.0 { 150.0 / PI } else { (150.0 * d).sin() / (PI * d) };
            }
            assert!((s.eval(t) - 10.0 * acc).abs() < 1e-12);
        }
    }

    #[test]
    fn random_signal_has_requested_peak() {
        let s = make_random_bandlimited(11, 150.0, 0.13, 34.6).unwrap();
        let (_, peak) = s.max_abs();
        assert!((peak - 34.6).abs() < 1e-9);
        // no node at the origin, so g(0) is zero up to rounding
        assert!(s.eval(0.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_gives_zero_signal() {
        let s = make_random_bandlimited(11, 150.0, 0.13, 0.0).unwrap();
        assert_eq!(s.eval(0.042), 0.0);
        assert_eq!(s.integrate(0.0, 0.1), 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = make_random_bandlimited(5, 150.0, 0.13, 1.0).unwrap();
        let b = make_random_bandlimited(5, 150.0, 0.13, 1.0).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        let c = make_random_bandlimited(6, 150.0, 0.13, 1.0).unwrap();
        assert_ne!(a.coefficients(), c.coefficients());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_random_bandlimited(1, 0.0, 0.1, 1.0).is_err());
        assert!(make_random_bandlimited(1, 10.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn integral_of_empty_interval_is_zero() {
        let s = make_random_bandlimited(1, 150.0, 0.13, 5.0).unwrap();
        assert_eq!(s.integrate(0.05, 0.05), 0.0);
    }

    #[test]
    fn integral_matches_refined_simpson() {
        let s = make_random_bandlimited(21, 150.0, 0.13, 7.0).unwrap();
        let (a, b) = (0.003, 0.117);
        // composite Simpson at a hundred times the quadrature panel density
        let panels = 2 * 100 * ((b - a) / (0.25 * s.grid_spacing())).ceil() as usize;
        let h = (b - a) / panels as f64;
        let mut acc = s.eval(a) + s.eval(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * s.eval(a + i as f64 * h);
        }
        let simpson = acc * h / 3.0;
        let tol = 1e-10 * (b - a) * 7.0;
        assert!((s.integrate(a, b) - simpson).abs() < tol);
    }

    #[test]
    fn relative_error_basics() {
        let r = DenseWaveform::from_fn(0.0, 1.0, 0.01, |t| (3.0 * t).sin()).unwrap();
        assert_eq!(relative_error(&r, &r).unwrap(), 0.0);
        let twice = DenseWaveform::new(0.0, 0.01, r.samples().iter().map(|v| 2.0 * v).collect()).unwrap();
        assert!((relative_error(&r, &twice).unwrap() - 100.0).abs() < 1e-12);
        let other = DenseWaveform::from_fn(0.0, 1.0, 0.02, |t| t).unwrap();
        assert!(matches!(relative_error(&r, &other), Err(Error::Shape(_))));
        let zero = DenseWaveform::from_fn(0.0, 1.0, 0.01, |_| 0.0).unwrap();
        assert!(matches!(relative_error(&zero, &r), Err(Error::Domain(_))));
    }
}
