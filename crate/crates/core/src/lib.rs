//! Modulo event-driven sampling (MEDS).
//!
//! A modulo-hysteresis fold in series with an asynchronous sigma-delta
//! modulator (ASDM) turns a high dynamic range bandlimited input into a
//! stream of trigger times. This crate simulates both stages, recovers the
//! input from the trigger times alone, and ships an experiment harness.
//!
//! The building blocks are split by stage:
//!
//! * [`signal`]: sinc-series test signals, quadrature and norms.
//! * [`modulo`]: ideal modulo and the modulo-hysteresis encoder.
//! * [`asdm`]: the event-driven encoder and its sample model.
//! * [`recovery`]: fold detection and local-average reconstruction.
//! * [`harness`]: experiment configuration, runs and CSV output.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asdm;
pub mod csv;
pub mod error;
pub mod harness;
pub mod modulo;
mod quad;
pub mod recovery;
pub mod signal;

pub use asdm::{AsdmParams, SampleSeries, TriggerTimes};
pub use error::{Error, Result};
pub use harness::ExperimentConfig;
pub use modulo::{FoldRecord, FoldedSignal, ModuloParams};
pub use recovery::{RecoveryConfig, RecoveryReport};
pub use signal::{BandlimitedSignal, DenseWaveform, Sinusoid, Waveform};
