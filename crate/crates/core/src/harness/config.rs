//! Flat `key=value` experiment configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::asdm::{dynamic_range, AsdmParams};
use crate::error::{Error, Result};
use crate::modulo::ModuloParams;
use crate::recovery::RecoveryConfig;

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "MEDS_OUT_DIR";

/// Which synthetic input to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Random sinc series drawn from `seed`.
    Bandlimited,
    /// `amplitude sin(omega t)`.
    Sinusoid,
}

impl SignalKind {
    fn name(self) -> &'static str {
        match self {
            Self::Bandlimited => "bandlimited",
            Self::Sinusoid => "sinusoid",
        }
    }
}

/// Everything one experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Input bandwidth in rad/s.
    pub omega: f64,
    pub duration: f64,
    /// Peak input amplitude.
    pub amplitude: f64,
    pub signal: SignalKind,
    pub lambda: f64,
    pub hysteresis: f64,
    pub delta: f64,
    pub bias: f64,
    pub order: usize,
    pub iterations: usize,
    /// Bandwidth of the reconstruction space; `None` uses `omega`.
    pub recovery_omega: Option<f64>,
    pub output_dir: PathBuf,
    pub sweep_delta_min: f64,
    pub sweep_delta_max: f64,
    pub sweep_count: usize,
}

impl Default for ExperimentConfig {
    /// The random bandlimited experiment at seed 23.
    fn default() -> Self {
        Self {
            seed: 23,
            omega: 150.0,
            duration: 0.13,
            amplitude: 34.6,
            signal: SignalKind::Bandlimited,
            lambda: 4.38,
            hysteresis: 2.19,
            delta: 2.5e-3,
            bias: 9.0,
            order: 3,
            iterations: 30,
            recovery_omega: None,
            output_dir: PathBuf::from("meds_out"),
            sweep_delta_min: 1.225e-3,
            sweep_delta_max: 3.675e-3,
            sweep_count: 10,
        }
    }
}

impl ExperimentConfig {
    /// Band-edge sinusoid with the low-voltage encoder settings.
    ///
    /// A tone exactly at `omega` converges slowly in `PW_omega` over a
    /// finite record, so reconstruction uses a 10% wider band and more
    /// iterations.
    pub fn sinusoid() -> Self {
        Self {
            omega: 125.0,
            duration: 0.077,
            amplitude: 4.51,
            signal: SignalKind::Sinusoid,
            lambda: 1.53,
            hysteresis: 1.51,
            delta: 2.07e-4,
            bias: 2.22,
            order: 2,
            iterations: 300,
            recovery_omega: Some(137.5),
            ..Self::default()
        }
    }

    /// Parse `key=value` lines on top of [`ExperimentConfig::default`].
    ///
    /// `#` starts a comment. A `preset` key, if present, must come first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, found `{line}`", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            if key == "preset" && !seen.is_empty() {
                return Err(Error::Config(format!("line {}: `preset` must come first", i + 1)));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", i + 1)),
                other => other,
            })?;
            seen.push(key.to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Set one key. Does not re-validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "preset" => {
                *self = match value {
                    "bandlimited" => Self::default(),
                    "sinusoid" => Self::sinusoid(),
                    _ => return Err(Error::Config(format!("unknown preset `{value}`"))),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "omega" => self.omega = num(key, value)?,
            "duration" => self.duration = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "signal" => {
                self.signal = match value {
                    "bandlimited" => SignalKind::Bandlimited,
                    "sinusoid" => SignalKind::Sinusoid,
                    _ => return Err(Error::Config(format!("unknown signal `{value}`"))),
                }
            }
            "modulo.lambda" => self.lambda = num(key, value)?,
            "modulo.h" => self.hysteresis = num(key, value)?,
            "asdm.delta" => self.delta = num(key, value)?,
            "asdm.b" => self.bias = num(key, value)?,
            "recovery.order" => self.order = num(key, value)?,
            "recovery.iterations" => self.iterations = num(key, value)?,
            "recovery.omega" => {
                self.recovery_omega = if value == "auto" { None } else { Some(num(key, value)?) }
            }
            "output.dir" => self.output_dir = PathBuf::from(value),
            "sweep.delta_min" => self.sweep_delta_min = num(key, value)?,
            "sweep.delta_max" => self.sweep_delta_max = num(key, value)?,
            "sweep.count" => self.sweep_count = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Replace the output directory with `$MEDS_OUT_DIR` when it is set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    /// Check positivity, the hysteresis range and `lambda <= b - 2 delta omega / pi`.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega", self.omega),
            ("duration", self.duration),
            ("amplitude", self.amplitude),
            ("modulo.lambda", self.lambda),
            ("modulo.h", self.hysteresis),
            ("asdm.delta", self.delta),
            ("asdm.b", self.bias),
            ("recovery.omega", self.recovery_omega.unwrap_or(1.0)),
            ("sweep.delta_min", self.sweep_delta_min),
            ("sweep.delta_max", self.sweep_delta_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")));
            }
        }
        if self.order < 2 {
            return Err(Error::Config(format!("`recovery.order` must be >= 2, got {}", self.order)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("`recovery.iterations` must be >= 1".into()));
        }
        if self.sweep_delta_min >= self.sweep_delta_max {
            return Err(Error::Config(format!(
                "`sweep.delta_min` = {} must be below `sweep.delta_max` = {}",
                self.sweep_delta_min, self.sweep_delta_max
            )));
        }
        if self.sweep_count == 0 {
            return Err(Error::Config("`sweep.count` must be >= 1".into()));
        }
        self.modulo_params().map_err(config_error)?;
        let range =
            dynamic_range(&self.asdm_params().map_err(config_error)?, self.omega).map_err(config_error)?;
        if self.lambda > range {
            return Err(Error::Config(format!(
                "modulo.lambda = {} exceeds b - 2 delta omega / pi = {range}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn modulo_params(&self) -> Result<ModuloParams> {
        ModuloParams::new(self.lambda, self.hysteresis)
    }

    pub fn asdm_params(&self) -> Result<AsdmParams> {
        AsdmParams::new(self.delta, self.bias)
    }

    pub fn reconstruction_omega(&self) -> f64 {
        self.recovery_omega.unwrap_or(self.omega)
    }

    pub fn recovery_config(&self) -> RecoveryConfig {
        RecoveryConfig { order: self.order, iterations: self.iterations, ..Default::default() }
    }

    /// The same experiment at a different threshold `delta`.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }

    /// Canonical text form; [`ExperimentConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("seed", self.seed.to_string());
        kv("signal", self.signal.name().into());
        kv("omega", self.omega.to_string());
        kv("duration", self.duration.to_string());
        kv("amplitude", self.amplitude.to_string());
        kv("modulo.lambda", self.lambda.to_string());
        kv("modulo.h", self.hysteresis.to_string());
        kv("asdm.delta", self.delta.to_string());
        kv("asdm.b", self.bias.to_string());
        kv("recovery.order", self.order.to_string());
        kv("recovery.iterations", self.iterations.to_string());
        kv("recovery.omega", self.recovery_omega.map_or("auto".into(), |w| w.to_string()));
        kv("output.dir", self.output_dir.display().to_string());
        kv("sweep.delta_min", self.sweep_delta_min.to_string());
        kv("sweep.delta_max", self.sweep_delta_max.to_string());
        kv("sweep.count", self.sweep_count.to_string());
        s
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}
