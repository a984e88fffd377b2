//! Iterative reconstruction from local averages.
//!
//! Every iterate is a sinc series centred on the interval midpoints, so the
//! iteration runs on coefficient vectors:
//! `a_{n+1} = a_n + a_0 - M a_n` with
//! `M[j][k] = integral over [t_j, t_{j+1}] of sinc(u - s_k)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::asdm::TriggerTimes;
use crate::error::{Error, Result};
use crate::quad;
use crate::signal::{relative_error, sinc, DenseWaveform, Waveform};

use super::RecoveryConfig;

/// Cap on the iteration count when only a tolerance is configured.
const MAX_ITERATIONS: usize = 10_000;

/// A finite sinc series `sum_k a_k sinc(t - s_k)` with a truncation radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SincSeries {
    centers: Vec<f64>,
    coefficients: Vec<f64>,
    omega: f64,
    radius: f64,
}

impl SincSeries {
    pub fn new(centers: Vec<f64>, coefficients: Vec<f64>, omega: f64, radius: f64) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::Shape(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coefficients.len()
            )));
        }
        if !(omega > 0.0 && radius > 0.0) {
            return Err(Error::Parameter(format!(
                "omega and radius must be positive, got {omega} and {radius}"
            )));
        }
        Ok(Self { centers, coefficients, omega, radius })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eval(&self, t: f64) -> f64 {
        synth(&self.centers, &self.coefficients, self.omega, self.radius, t)
    }
}

impl Waveform for SincSeries {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

fn synth(centers: &[f64], coefficients: &[f64], omega: f64, radius: f64, t: f64) -> f64 {
    centers
        .iter()
        .zip(coefficients)
        .filter(|(s, _)| (t - **s).abs() <= radius)
        .map(|(s, a)| a * sinc(omega, t - s))
        .sum()
}

/// Diagnostics for one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// L2 norm of `g_n - g_{n-1}` on the output grid (`g_0` norm for n = 0).
    pub update_norm: f64,
    /// `||g - g_n||` on the output grid when a reference is known.
    pub error_l2: Option<f64>,
    /// The same error relative to `||g||`, in percent.
    pub error_percent: Option<f64>,
}

/// Result of the local-average iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub series: SincSeries,
    pub waveform: DenseWaveform,
    pub trace: Vec<IterationRecord>,
}

impl Reconstruction {
    /// Number of iterations run after the initial estimate.
    pub fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iteration)
    }

    /// Relative error of the final iterate, if a reference was given.
    pub fn error_percent(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.error_percent)
    }
}

/// `(L sinc(. - s_k))_j` for every pair within the truncation radius.
fn local_average_matrix(times: &[f64], centers: &[f64], omega: f64, radius: f64) -> Vec<Vec<f64>> {
    let panel = PI / (4.0 * omega);
    (0..centers.len())
        .into_par_iter()
        .map(|j| {
            let (a, b) = (times[j], times[j + 1]);
            centers
                .iter()
                .map(|&s| {
                    if (centers[j] - s).abs() > radius + (b - a) {
                        0.0
                    } else {
                        quad::composite(&|u: f64| sinc(omega, u - s), a, b, panel)
                    }
                })
                .collect()
        })
        .collect()
}

/// Synthesis operator sampled on the output grid.
fn synthesis_matrix(grid: &[f64], centers: &[f64], omega: f64, radius: f64) -> Vec<Vec<f64>> {
    grid.par_iter()
        .map(|&t| {
            centers.iter().map(|&s| if (t - s).abs() <= radius { sinc(omega, t - s) } else { 0.0 }).collect()
        })
        .collect()
}

fn apply(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    matrix.iter().map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum()).collect()
}

fn output_grid(times: &[f64], omega: f64, config: &RecoveryConfig) -> Result<(f64, f64, Vec<f64>)> {
    let step = config.grid_step.unwrap_or(PI / (32.0 * omega));
    let (start, end) = config.span.unwrap_or((times[0], times[times.len() - 1]));
    let grid = DenseWaveform::grid(start, end, step)?;
    Ok((start, step, grid))
}

/// Local-average reconstruction with no density check.
///
/// `increments[k]` is the integral of the input over `[t_k, t_{k+1}]`.
pub fn reconstruct_unchecked(
    increments: &[f64],
    triggers: &TriggerTimes,
    omega: f64,
    config: &RecoveryConfig,
    reference: Option<&dyn Waveform>,
) -> Result<Reconstruction> {
    config.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Parameter(format!("omega must be positive, got {omega}")));
    }
    let times = triggers.times();
    if increments.len() + 1 != times.len() {
        return Err(Error::Shape(format!(
            "{} increments for {} trigger instants",
            increments.len(),
            times.len()
        )));
    }
    if increments.is_empty() {
        return Err(Error::InsufficientData("need at least one interval".into()));
    }
    let radius = config.radius * PI / omega;
    let centers = triggers.midpoints();
    let (start, step, grid) = output_grid(times, omega, config)?;
    let m = local_average_matrix(times, &centers, omega, radius);
    let p = synthesis_matrix(&grid, &centers, omega, radius);

    let reference_samples: Option<DenseWaveform> = reference
        .map(|r| DenseWaveform::new(start, step, grid.iter().map(|&t| r.value(t)).collect()))
        .transpose()?;
    let norm_of =
        |coeffs: &[f64]| -> Result<f64> { Ok(DenseWaveform::new(start, step, apply(&p, coeffs))?.l2_norm()) };
    let record = |iteration: usize, update_norm: f64, coeffs: &[f64]| -> Result<IterationRecord> {
        let (error_l2, error_percent) = match &reference_samples {
            Some(refw) => {
                let est = DenseWaveform::new(start, step, apply(&p, coeffs))?;
                let diff: Vec<f64> = refw.samples().iter().zip(est.samples()).map(|(a, b)| a - b).collect();
                let l2 = DenseWaveform::new(start, step, diff)?.l2_norm();
                let pct = relative_error(refw, &est).ok();
                (Some(l2), pct)
            }
            None => (None, None),
        };
        Ok(IterationRecord { iteration, update_norm, error_l2, error_percent })
    };

    let a0 = increments.to_vec();
    let g0_norm = norm_of(&a0)?;
    let mut a = a0.clone();
    let mut trace = vec![record(0, g0_norm, &a)?];
    let cap = if config.iterations == 0 { MAX_ITERATIONS } else { config.iterations };
    for n in 1..=cap {
        let la = apply(&m, &a);
        let update: Vec<f64> = a0.iter().zip(&la).map(|(x0, y)| x0 - y).collect();
        for (ai, ui) in a.iter_mut().zip(&update) {
            *ai += ui;
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!("non-finite coefficients at iteration {n}")));
        }
        let update_norm = norm_of(&update)?;
        trace.push(record(n, update_norm, &a)?);
        if config.tolerance > 0.0 && update_norm < config.tolerance * g0_norm {
            break;
        }
    }

    let samples = apply(&p, &a);
    let waveform = DenseWaveform::new(start, step, samples)?;
    let series = SincSeries::new(centers, a, omega, radius)?;
    Ok(Reconstruction { series, waveform, trace })
}

/// Largest gap allowed for a convergent iteration.
pub fn density_limit(omega: f64) -> f64 {
    PI / omega
}

/// Local-average reconstruction, rejecting trigger records with a gap of
/// `pi/omega` or more.
pub fn local_average_reconstruct(
    increments: &[f64],
    triggers: &TriggerTimes,
    omega: f64,
    config: &RecoveryConfig,
    reference: Option<&dyn Waveform>,
) -> Result<Reconstruction> {
    let limit = density_limit(omega);
    if let Some(max_gap) = triggers.max_gap() {
        if max_gap >= limit {
            return Err(Error::Density { max_gap, limit });
        }
    }
    reconstruct_unchecked(increments, triggers, omega, config, reference)
}
