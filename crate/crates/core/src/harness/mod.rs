//! Experiment orchestration: synthetic runs, threshold sweeps and
//! recovery from external trigger files.

mod config;

pub use config::{ExperimentConfig, SignalKind, OUT_DIR_ENV};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::asdm::{classical_decode, encode_asdm, TriggerTimes};
use crate::csv;
use crate::error::{Error, Result};
use crate::modulo::{fold_waveform, FoldRecord};
use crate::recovery::{
    check_sufficient_conditions, density_limit, final_error_bound, recover, DetectionResult, Reconstruction,
    RecoveryReport,
};
use crate::signal::{make_random_bandlimited, BandlimitedSignal, DenseWaveform, Sinusoid, Waveform};

/// A synthetic input.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Bandlimited(BandlimitedSignal),
    Sinusoid(Sinusoid),
}

impl Waveform for Input {
    fn value(&self, t: f64) -> f64 {
        match self {
            Self::Bandlimited(s) => s.eval(t),
            Self::Sinusoid(s) => s.eval(t),
        }
    }
}

/// Build the input described by `cfg`.
pub fn make_input(cfg: &ExperimentConfig) -> Result<Input> {
    Ok(match cfg.signal {
        SignalKind::Bandlimited => {
            Input::Bandlimited(make_random_bandlimited(cfg.seed, cfg.omega, cfg.duration, cfg.amplitude)?)
        }
        SignalKind::Sinusoid => Input::Sinusoid(Sinusoid::new(cfg.amplitude, cfg.omega, 0.0)?),
    })
}

/// `100 ||tau - tau_est|| / ||tau||`; `None` unless every fold was found.
pub fn fold_time_error(truth: &FoldRecord, detected: &DetectionResult) -> Option<f64> {
    if truth.is_empty() || truth.len() != detected.len() {
        return None;
    }
    let num: f64 = truth.times().iter().zip(detected.times()).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = truth.times().iter().map(|a| a * a).sum();
    Some(100.0 * (num / den).sqrt())
}

/// Outcome of one synthetic experiment.
#[derive(Debug)]
pub struct SyntheticRun {
    pub config: ExperimentConfig,
    pub input: Input,
    /// True fold times and signs.
    pub folds: FoldRecord,
    pub meds_triggers: TriggerTimes,
    /// MEDS recovery; a detection failure is kept rather than propagated.
    pub meds: Result<RecoveryReport>,
    /// Standalone ASDM encoding and classical decoding of the same input.
    pub baseline: Option<(TriggerTimes, Result<Reconstruction>)>,
}

impl SyntheticRun {
    pub fn err_meds(&self) -> Option<f64> {
        self.meds.as_ref().ok().and_then(|r| r.error_percent())
    }

    pub fn err_asdm(&self) -> Option<f64> {
        self.baseline.as_ref().and_then(|(_, r)| r.as_ref().ok()).and_then(|r| r.error_percent())
    }

    pub fn err_tau(&self) -> Option<f64> {
        self.meds.as_ref().ok().and_then(|r| fold_time_error(&self.folds, &r.detection))
    }

    /// Every fold found with the right sign.
    pub fn folds_recovered(&self) -> bool {
        match &self.meds {
            Ok(r) => r.detection.signs() == self.folds.signs(),
            Err(_) => false,
        }
    }

    /// Plain-text summary. Contains no timing, so a fixed config gives
    /// identical bytes.
    pub fn report(&self) -> String {
        let cfg = &self.config;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
        kv("signal", format!("{:?}", cfg.signal).to_lowercase());
        kv("seed", cfg.seed.to_string());
        kv("omega", cfg.omega.to_string());
        kv("reconstruction_omega", cfg.reconstruction_omega().to_string());
        kv("duration", cfg.duration.to_string());
        kv("amplitude", cfg.amplitude.to_string());
        kv("lambda", cfg.lambda.to_string());
        kv("h", cfg.hysteresis.to_string());
        kv("delta", cfg.delta.to_string());
        kv("b", cfg.bias.to_string());
        kv("order", cfg.order.to_string());
        kv("iterations", cfg.iterations.to_string());
        kv("true_folds", self.folds.len().to_string());
        kv("meds_triggers", self.meds_triggers.trigger_count().to_string());
        kv("meds_max_gap", opt(self.meds_triggers.max_gap()));
        kv("density_limit", format!("{:.6}", density_limit(cfg.reconstruction_omega())));
        match &self.meds {
            Ok(r) => {
                kv("detection", "ok".into());
                kv("detected_folds", r.fold_count().to_string());
                kv("signs_match", self.folds_recovered().to_string());
                kv("err_tau_percent", opt(self.err_tau()));
                kv("err_meds_percent", opt(self.err_meds()));
            }
            Err(e) => {
                kv("detection", format!("failed: {e}"));
                kv("err_meds_percent", "n/a".into());
            }
        }
        if let Some((trig, rec)) = &self.baseline {
            kv("asdm_triggers", trig.trigger_count().to_string());
            kv("asdm_max_gap", opt(trig.max_gap()));
            match rec {
                Ok(_) => kv("err_asdm_percent", opt(self.err_asdm())),
                Err(e) => kv("err_asdm_percent", format!("failed: {e}")),
            }
            if let (Some(a), Some(m)) = (self.err_asdm(), self.err_meds()) {
                kv("asdm_over_meds", format!("{:.3}", a / m));
            }
        }
        if let (Ok(asdm), Ok(modulo)) = (cfg.asdm_params(), cfg.modulo_params()) {
            if let Ok(c) = check_sufficient_conditions(&asdm, &modulo, cfg.omega, cfg.amplitude, cfg.order) {
                kv("sufficient_conditions", if c.all_pass() { "pass" } else { "fail" }.into());
            }
        }
        s
    }
}

/// Encode, recover and (optionally) run the ASDM baseline. No file output.
pub fn simulate(cfg: &ExperimentConfig, with_baseline: bool) -> Result<SyntheticRun> {
    cfg.validate()?;
    let input = make_input(cfg)?;
    let modulo = cfg.modulo_params()?;
    let asdm = cfg.asdm_params()?;
    let (folds, folded) = fold_waveform(input.clone(), &modulo, cfg.duration, PI / cfg.omega / 128.0)?;
    // one step for both encoders so in-range inputs give the same stream
    let step = asdm.default_step(cfg.omega, cfg.amplitude.max(cfg.lambda));
    let meds_triggers = encode_asdm(&folded, &asdm, cfg.duration, step)?;
    let rec_omega = cfg.reconstruction_omega();
    let rcfg = cfg.recovery_config();
    let meds = recover(&meds_triggers, &asdm, &modulo, rec_omega, &rcfg, Some(&input));
    let baseline = if with_baseline {
        let trig = encode_asdm(&input, &asdm, cfg.duration, step)?;
        let rec = classical_decode(&trig, &asdm, rec_omega, &rcfg, Some(&input));
        Some((trig, rec))
    } else {
        None
    };
    Ok(SyntheticRun { config: cfg.clone(), input, folds, meds_triggers, meds, baseline })
}

/// Sample `w` on the points of `grid`.
fn on_grid(grid: &DenseWaveform, w: &dyn Waveform) -> Result<DenseWaveform> {
    DenseWaveform::new(grid.start(), grid.step(), grid.times().map(|t| w.value(t)).collect())
}

/// [`simulate`] with the baseline, then write the report and CSVs into
/// `cfg.output_dir`:
///
/// | file | contents |
/// |---|---|
/// | `report.txt` | [`SyntheticRun::report`] |
/// | `config.txt` | the config, reloadable |
/// | `input.csv` | `g` on the output grid |
/// | `folded.csv` | `x` on the output grid |
/// | `recovered.csv` | MEDS estimate |
/// | `baseline.csv` | classical ASDM estimate |
/// | `triggers.csv`, `asdm_triggers.csv` | trigger times |
/// | `folds.csv`, `detected.csv` | true and estimated folds |
/// | `trace.csv`, `filtered.csv` | iteration trace, `D^N X` with `Psi` |
pub fn run_synthetic(cfg: &ExperimentConfig) -> Result<SyntheticRun> {
    let run = simulate(cfg, true)?;
    write_synthetic(&run, &cfg.output_dir)?;
    Ok(run)
}

/// Write the outputs of a finished run into `dir`.
pub fn write_synthetic(run: &SyntheticRun, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let put = |name: &str, body: String| csv::write_atomic(&dir.join(name), &body);
    put("report.txt", run.report())?;
    put("config.txt", run.config.to_text())?;
    put("triggers.csv", csv::triggers_csv(&run.meds_triggers))?;
    put("folds.csv", csv::folds_csv(&run.folds))?;

    let times = run.meds_triggers.times();
    let rec_omega = run.config.reconstruction_omega();
    let grid = DenseWaveform::from_fn(times[0], times[times.len() - 1], PI / (32.0 * rec_omega), |_| 0.0)?;
    put("input.csv", csv::waveform_csv(&on_grid(&grid, &run.input)?))?;
    let lambda_h = run.config.modulo_params()?.lambda_h();
    let folded = |t: f64| run.input.value(t) - 2.0 * lambda_h * run.folds.level(t) as f64;
    put("folded.csv", csv::waveform_csv(&on_grid(&grid, &folded)?))?;

    if let Ok(report) = &run.meds {
        put("recovered.csv", csv::waveform_csv(report.waveform()))?;
        put("detected.csv", csv::detected_csv(&report.detection))?;
        put("trace.csv", csv::trace_csv(&report.reconstruction.trace))?;
        put("filtered.csv", filtered_csv(report))?;
    }
    if let Some((trig, rec)) = &run.baseline {
        put("asdm_triggers.csv", csv::triggers_csv(trig))?;
        if let Ok(rec) = rec {
            put("baseline.csv", csv::waveform_csv(&rec.waveform))?;
        }
    }
    Ok(())
}

fn filtered_csv(report: &RecoveryReport) -> String {
    let mut s = String::from("k,filtered,threshold\n");
    for (k, (f, p)) in report.filtered.iter().zip(&report.threshold).enumerate() {
        let _ = writeln!(s, "{k},{f},{p}");
    }
    s
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    /// `+inf` when recovery failed.
    pub err_meds: f64,
    /// `+inf` unless every fold was found.
    pub err_tau: f64,
    pub trigger_count: usize,
    pub true_folds: usize,
    pub detected_folds: usize,
    /// `ok`, `missed` (wrong fold count or sign) or the error message.
    pub status: String,
}

/// `count` evenly spaced values from `min` to `max` inclusive.
pub fn delta_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Repeat the synthetic experiment (without baseline) for each `delta`.
///
/// Configurations run in parallel. A failed recovery becomes a row with
/// infinite error; only invalid sweep bounds abort the sweep.
pub fn run_delta_sweep(
    cfg: &ExperimentConfig,
    delta_min: f64,
    delta_max: f64,
    count: usize,
) -> Result<Vec<SweepRow>> {
    if !(delta_min > 0.0 && delta_min < delta_max && count > 0) {
        return Err(Error::Config(format!(
            "need 0 < delta_min < delta_max and count > 0, got {delta_min}, {delta_max}, {count}"
        )));
    }
    let rows = delta_grid(delta_min, delta_max, count)
        .into_par_iter()
        .map(|delta| sweep_row(&cfg.with_delta(delta)))
        .collect();
    Ok(rows)
}

fn sweep_row(cfg: &ExperimentConfig) -> SweepRow {
    let failed = |status: String, triggers: usize, folds: usize| SweepRow {
        delta: cfg.delta,
        err_meds: f64::INFINITY,
        err_tau: f64::INFINITY,
        trigger_count: triggers,
        true_folds: folds,
        detected_folds: 0,
        status,
    };
    let run = match simulate(cfg, false) {
        Ok(run) => run,
        Err(e) => return failed(e.to_string(), 0, 0),
    };
    let triggers = run.meds_triggers.trigger_count();
    match &run.meds {
        Ok(report) => SweepRow {
            delta: cfg.delta,
            err_meds: run.err_meds().unwrap_or(f64::INFINITY),
            err_tau: run.err_tau().unwrap_or(f64::INFINITY),
            trigger_count: triggers,
            true_folds: run.folds.len(),
            detected_folds: report.fold_count(),
            status: if run.folds_recovered() { "ok" } else { "missed" }.into(),
        },
        Err(e) => failed(e.to_string(), triggers, run.folds.len()),
    }
}

pub const SWEEP_HEADER: &str = "delta,err_meds,err_tau,trigger_count,true_folds,detected_folds,status";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let status = r.status.replace([',', '\n'], ";");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{status}",
            r.delta, r.err_meds, r.err_tau, r.trigger_count, r.true_folds, r.detected_folds
        );
    }
    s
}

/// Result of recovering from an external trigger file.
#[derive(Debug)]
pub struct IngestOutcome {
    pub triggers: TriggerTimes,
    pub report: RecoveryReport,
    /// Err against the reference waveform, when one was supplied.
    pub error_percent: Option<f64>,
}

impl IngestOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "triggers = {}", self.triggers.trigger_count());
        let _ = writeln!(s, "detected_folds = {}", self.report.fold_count());
        let _ =
            writeln!(s, "err_percent = {}", self.error_percent.map_or("n/a".into(), |e| format!("{e:.6}")));
        s
    }
}

/// Run recovery on a `k,t` trigger CSV, scoring against an optional
/// `t,value` reference CSV (linearly interpolated).
pub fn ingest_and_recover(
    triggers_path: &Path,
    reference_path: Option<&Path>,
    cfg: &ExperimentConfig,
) -> Result<IngestOutcome> {
    cfg.validate()?;
    let triggers = csv::read_triggers(csv::open(triggers_path)?)?;
    let reference = match reference_path {
        Some(p) => {
            let (t, v) = csv::read_pairs(csv::open(p)?)?;
            Some(csv::SampledWaveform::new(t, v)?)
        }
        None => None,
    };
    let report = recover(
        &triggers,
        &cfg.asdm_params()?,
        &cfg.modulo_params()?,
        cfg.reconstruction_omega(),
        &cfg.recovery_config(),
        reference.as_ref().map(|r| r as &dyn Waveform),
    )?;
    let error_percent = report.error_percent();
    Ok(IngestOutcome { triggers, report, error_percent })
}

/// Bound on `||g - g_n||` for a finished run, if the parameters allow one.
pub fn error_bound(run: &SyntheticRun) -> Option<f64> {
    let cfg = &run.config;
    let report = run.meds.as_ref().ok()?;
    let g_norm = report
        .reconstruction
        .trace
        .first()
        .and_then(|r| r.error_l2.zip(r.error_percent))
        .map(|(l2, pct)| if pct > 0.0 { 100.0 * l2 / pct } else { 0.0 })?;
    final_error_bound(
        report.lambda_h,
        cfg.delta,
        report.fold_count(),
        cfg.reconstruction_omega(),
        cfg.bias,
        cfg.lambda,
        report.reconstruction.iterations(),
        g_norm,
    )
    .ok()
}

/// Process exit code for an error: 2 detection, 4 file I/O or ingestion,
/// 3 for every other precondition or configuration failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Detection(_) => 2,
        Error::Io(_) | Error::Parse { .. } | Error::NonMonotone { .. } => 4,
        _ => 3,
    }
}
