//! Recovery of the input from MEDS trigger times.
//!
//! The pipeline filters the running sum of the ASDM samples with a
//! nonuniform difference of order `N`, flags folds against a
//! trigger-dependent threshold, rebuilds the fold residue and finally runs
//! the local-average iteration on the corrected increments.

mod bounds;
mod detect;
mod diff;
mod reconstruct;

pub use bounds::{bound_dng, check_sufficient_conditions, final_error_bound, Condition, ConditionReport};
pub use detect::{
    detect_and_estimate, detect_folds, estimate_fold, estimate_residue, DetectedFold, DetectionResult,
};
pub use diff::{mu_beta, nonuniform_diff, threshold_psi, MuBetaTable};
pub use reconstruct::{
    density_limit, local_average_reconstruct, reconstruct_unchecked, IterationRecord, Reconstruction,
    SincSeries,
};

use crate::asdm::{dynamic_range, sample_series, AsdmParams, TriggerTimes};
use crate::error::{Error, Result};
use crate::modulo::ModuloParams;
use crate::signal::{DenseWaveform, Waveform};

/// Settings for detection and reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    /// Order `N` of the nonuniform difference.
    pub order: usize,
    /// Iteration cap; `0` runs until the tolerance is met.
    pub iterations: usize,
    /// Stop once the update norm falls below `tolerance * ||g_0||`; `0`
    /// disables early exit.
    pub tolerance: f64,
    /// Output grid spacing; `None` means `pi / (32 omega)`.
    pub grid_step: Option<f64>,
    /// Sinc truncation radius in units of `pi / omega`; infinite by default.
    /// A finite radius saves memory on long records at a small accuracy cost.
    pub radius: f64,
    /// Output interval; `None` means first to last trigger.
    pub span: Option<(f64, f64)>,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            order: 3,
            iterations: 30,
            tolerance: 1e-10,
            grid_step: None,
            radius: f64::INFINITY,
            span: None,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Parameter(format!("order must be at least 2, got {}", self.order)));
        }
        if self.iterations == 0 && !(self.tolerance > 0.0) {
            return Err(Error::Parameter("need a positive iteration count or a positive tolerance".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Parameter(format!("tolerance must be >= 0, got {}", self.tolerance)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Parameter(format!("radius must be positive, got {}", self.radius)));
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
            }
        }
        if let Some((a, b)) = self.span {
            if !(a < b) {
                return Err(Error::Parameter(format!("empty output span [{a}, {b}]")));
            }
        }
        Ok(())
    }
}

/// Everything produced by one recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub order: usize,
    pub lambda_h: f64,
    /// `D^N X(t_k)`.
    pub filtered: Vec<f64>,
    /// Detection threshold aligned with `filtered`.
    pub threshold: Vec<f64>,
    pub detection: DetectionResult,
    /// Estimated residue at every trigger.
    pub residue: Vec<f64>,
    pub reconstruction: Reconstruction,
    pub min_gap: f64,
    pub max_gap: f64,
}

impl RecoveryReport {
    pub fn waveform(&self) -> &DenseWaveform {
        &self.reconstruction.waveform
    }

    pub fn fold_count(&self) -> usize {
        self.detection.len()
    }

    /// Relative error of the final iterate in percent, if a reference was given.
    pub fn error_percent(&self) -> Option<f64> {
        self.reconstruction.error_percent()
    }
}

/// Recover the input from MEDS trigger times.
///
/// Requires `lambda <= b - 2 delta omega / pi` so the folded signal stays in
/// the ASDM's dynamic range. With no detected folds this reduces to
/// classical ASDM decoding.
pub fn recover(
    triggers: &TriggerTimes,
    asdm: &AsdmParams,
    modulo: &ModuloParams,
    omega: f64,
    config: &RecoveryConfig,
    reference: Option<&dyn Waveform>,
) -> Result<RecoveryReport> {
    config.validate()?;
    let range = dynamic_range(asdm, omega)?;
    if modulo.lambda() > range {
        return Err(Error::Config(format!(
            "lambda = {} exceeds the ASDM dynamic range b - 2 delta omega / pi = {range}",
            modulo.lambda()
        )));
    }
    let order = config.order;
    let times = triggers.times();
    if times.len() <= order + 2 {
        return Err(Error::InsufficientData(format!(
            "order {order} needs more than {} trigger instants, got {}",
            order + 2,
            times.len()
        )));
    }
    let lambda_h = modulo.lambda_h();
    let series = sample_series(triggers, asdm)?;
    let filtered = nonuniform_diff(&series.integral, times, order)?;
    let threshold = threshold_psi(times, order, lambda_h)?;
    let detection = detect_and_estimate(&filtered, &threshold, times, order)?;
    let residue = estimate_residue(&detection, times, lambda_h);

    let increments: Vec<f64> = if detection.is_empty() {
        series.q.clone()
    } else {
        let g: Vec<f64> = series.integral.iter().zip(&residue).map(|(x, e)| x + e).collect();
        g.windows(2).map(|w| w[1] - w[0]).collect()
    };
    let reconstruction = local_average_reconstruct(&increments, triggers, omega, config, reference)?;

    Ok(RecoveryReport {
        order,
        lambda_h,
        filtered,
        threshold,
        detection,
        residue,
        reconstruction,
        min_gap: triggers.min_gap().unwrap_or(0.0),
        max_gap: triggers.max_gap().unwrap_or(0.0),
    })
}
