//! Plain-text CSV exchange formats.
//!
//! Floats are written with `{}` formatting, which prints the shortest
//! string that parses back to the same value, so every file round-trips
//! exactly. Each file starts with a fixed header line.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::asdm::TriggerTimes;
use crate::error::{Error, Result};
use crate::modulo::FoldRecord;
use crate::recovery::{DetectedFold, DetectionResult, IterationRecord};
use crate::signal::{DenseWaveform, Waveform};

pub const WAVEFORM_HEADER: &str = "t,value";
pub const FOLDS_HEADER: &str = "tau,s";
pub const TRIGGERS_HEADER: &str = "k,t";
pub const DETECTED_HEADER: &str = "tau_est,s_est,k_m,k_M";
pub const TRACE_HEADER: &str = "iteration,update_norm,error_l2,error_percent";

/// Write `contents` next to `path` and rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

fn render<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn waveform_csv(w: &DenseWaveform) -> String {
    render(WAVEFORM_HEADER, w.times().zip(w.samples()).map(|(t, v)| format!("{t},{v}")))
}

pub fn pairs_csv(times: &[f64], values: &[f64]) -> String {
    render(WAVEFORM_HEADER, times.iter().zip(values).map(|(t, v)| format!("{t},{v}")))
}

pub fn folds_csv(folds: &FoldRecord) -> String {
    render(FOLDS_HEADER, folds.times().iter().zip(folds.signs()).map(|(t, s)| format!("{t},{s}")))
}

pub fn triggers_csv(triggers: &TriggerTimes) -> String {
    render(TRIGGERS_HEADER, triggers.times().iter().enumerate().map(|(k, t)| format!("{k},{t}")))
}

pub fn detected_csv(detection: &DetectionResult) -> String {
    render(
        DETECTED_HEADER,
        detection.folds.iter().map(|f| format!("{},{},{},{}", f.tau, f.sign, f.k_min, f.k_max)),
    )
}

pub fn trace_csv(trace: &[IterationRecord]) -> String {
    render(
        TRACE_HEADER,
        trace.iter().map(|r| {
            format!("{},{},{},{}", r.iteration, r.update_norm, opt(r.error_l2), opt(r.error_percent))
        }),
    )
}

/// Data rows of a CSV with the expected header, split on commas.
fn rows<R: Read>(reader: R, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let first = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (i + 1, line);
                }
            }
            None => return Err(Error::Parse { line: 0, msg: "empty file".into() }),
        }
    };
    if first.1.trim() != header {
        return Err(Error::Parse {
            line: first.0,
            msg: format!("expected header `{header}`, found `{}`", first.1.trim()),
        });
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{field}`") })
}

fn finite(line: usize, field: &str) -> Result<f64> {
    let v: f64 = num(line, field)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse { line, msg: format!("non-finite value `{field}`") })
    }
}

/// `(t, value)` pairs; times must be strictly increasing.
pub fn read_pairs<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, f) in rows(reader, WAVEFORM_HEADER)? {
        let t = finite(line, &f[0])?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::NonMonotone { index: times.len() });
            }
        }
        times.push(t);
        values.push(num(line, &f[1])?);
    }
    Ok((times, values))
}

/// A waveform CSV on a uniform grid.
pub fn read_waveform<R: Read>(reader: R) -> Result<DenseWaveform> {
    let (times, values) = read_pairs(reader)?;
    match times.len() {
        0 => Err(Error::InsufficientData("waveform file has no samples".into())),
        1 => DenseWaveform::new(times[0], 1.0, values),
        n => {
            let step = (times[n - 1] - times[0]) / (n - 1) as f64;
            let uniform = times
                .iter()
                .enumerate()
                .all(|(i, t)| (t - (times[0] + i as f64 * step)).abs() <= 1e-9 * step);
            if !uniform {
                return Err(Error::Parse { line: 0, msg: "waveform grid is not uniform".into() });
            }
            DenseWaveform::new(times[0], step, values)
        }
    }
}

/// Trigger times; the `k` column must count up from zero.
pub fn read_triggers<R: Read>(reader: R) -> Result<TriggerTimes> {
    let mut times: Vec<f64> = Vec::new();
    for (line, f) in rows(reader, TRIGGERS_HEADER)? {
        let k: usize = num(line, &f[0])?;
        if k != times.len() {
            return Err(Error::Parse { line, msg: format!("expected index {}, found {k}", times.len()) });
        }
        let t = finite(line, &f[1])?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::NonMonotone { index: k });
            }
        }
        times.push(t);
    }
    TriggerTimes::new(times)
}

pub fn read_folds<R: Read>(reader: R) -> Result<FoldRecord> {
    let mut times = Vec::new();
    let mut signs = Vec::new();
    for (line, f) in rows(reader, FOLDS_HEADER)? {
        times.push(finite(line, &f[0])?);
        signs.push(num(line, &f[1])?);
    }
    FoldRecord::new(times, signs)
}

pub fn read_detected<R: Read>(reader: R) -> Result<DetectionResult> {
    let mut folds = Vec::new();
    for (line, f) in rows(reader, DETECTED_HEADER)? {
        folds.push(DetectedFold {
            tau: finite(line, &f[0])?,
            sign: num(line, &f[1])?,
            k_min: num(line, &f[2])?,
            k_max: num(line, &f[3])?,
        });
    }
    Ok(DetectionResult { folds })
}

/// Open a file, mapping failures to I/O errors.
pub fn open(path: &Path) -> Result<fs::File> {
    Ok(fs::File::open(path)?)
}

/// Piecewise-linear waveform through sampled points, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledWaveform {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::Shape(format!("{} times and {} values", times.len(), values.len())));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotone { index: i + 1 });
        }
        Ok(Self { times, values })
    }

    /// `100 ||self - estimate|| / ||self||` over the sample points inside
    /// `[lo, hi]`, trapezoidal weights.
    pub fn relative_error(&self, estimate: &dyn Waveform, lo: f64, hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64, f64)> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(&t, &v)| (t, v, estimate.value(t)))
            .collect();
        if pts.len() < 2 {
            return Err(Error::InsufficientData("fewer than two reference points in span".into()));
        }
        let (mut num_sq, mut den_sq) = (0.0, 0.0);
        for w in pts.windows(2) {
            let dt = w[1].0 - w[0].0;
            num_sq += 0.5 * dt * ((w[0].1 - w[0].2).powi(2) + (w[1].1 - w[1].2).powi(2));
            den_sq += 0.5 * dt * (w[0].1.powi(2) + w[1].1.powi(2));
        }
        if den_sq == 0.0 {
            return Err(Error::Domain("reference has zero norm".into()));
        }
        Ok(100.0 * (num_sq / den_sq).sqrt())
    }
}

impl Waveform for SampledWaveform {
    fn value(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return 0.0;
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i >= n {
            return self.values[n - 1];
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}
