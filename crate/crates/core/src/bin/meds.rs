//! `meds` command-line front end.
//!
//! Exit codes: 0 success, 2 fold detection failure, 3 precondition or
//! configuration failure, 4 I/O or ingestion failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use meds::asdm::{classical_decode, encode_asdm};
use meds::csv;
use meds::harness::{
    exit_code, ingest_and_recover, make_input, run_delta_sweep, run_synthetic, sweep_csv, ExperimentConfig,
};
use meds::recovery::check_sufficient_conditions;
use meds::{Error, Result};

#[derive(Parser)]
#[command(name = "meds", version, about = "Modulo event-driven sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value config file; defaults apply to missing keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set asdm.delta=2e-3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory. Beats `MEDS_OUT_DIR` and `output.dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic experiment: MEDS and standalone ASDM on the same input.
    Simulate(Common),
    /// Recover from a trigger CSV (`k,t`).
    Recover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        triggers: PathBuf,
        /// Reference waveform CSV (`t,value`) for scoring.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Repeat the synthetic experiment over a range of `delta`.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        delta_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Evaluate the sufficient recovery conditions.
    Check {
        #[command(flatten)]
        common: Common,
        /// Exit with code 3 if any condition fails.
        #[arg(long)]
        strict: bool,
    },
    /// Classical ASDM encode and decode with no modulo stage.
    Baseline(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.apply_env();
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let run = run_synthetic(&cfg)?;
            print!("{}", run.report());
            eprintln!("wrote {}", cfg.output_dir.display());
            run.meds.map(|_| ())
        }
        Command::Recover { common, triggers, reference } => {
            let cfg = load(&common)?;
            let outcome = ingest_and_recover(&triggers, reference.as_deref(), &cfg)?;
            let dir = &cfg.output_dir;
            std::fs::create_dir_all(dir)?;
            let report = &outcome.report;
            csv::write_atomic(&dir.join("recovered.csv"), &csv::waveform_csv(report.waveform()))?;
            csv::write_atomic(&dir.join("detected.csv"), &csv::detected_csv(&report.detection))?;
            csv::write_atomic(&dir.join("trace.csv"), &csv::trace_csv(&report.reconstruction.trace))?;
            csv::write_atomic(&dir.join("report.txt"), &outcome.summary())?;
            print!("{}", outcome.summary());
            Ok(())
        }
        Command::Sweep { common, delta_min, delta_max, count } => {
            let cfg = load(&common)?;
            let rows = run_delta_sweep(
                &cfg,
                delta_min.unwrap_or(cfg.sweep_delta_min),
                delta_max.unwrap_or(cfg.sweep_delta_max),
                count.unwrap_or(cfg.sweep_count),
            )?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let table = sweep_csv(&rows);
            csv::write_atomic(&cfg.output_dir.join("sweep.csv"), &table)?;
            print!("{table}");
            Ok(())
        }
        Command::Check { common, strict } => {
            let cfg = load(&common)?;
            let r = check_sufficient_conditions(
                &cfg.asdm_params()?,
                &cfg.modulo_params()?,
                cfg.omega,
                cfg.amplitude,
                cfg.order,
            )?;
            let line = |name: &str, c: meds::recovery::Condition| {
                println!("{name}: {:e} vs {:e} {}", c.lhs, c.rhs, if c.pass { "pass" } else { "fail" });
            };
            println!("order = {}, g_sup = {}, C = {:.6}, kappa = {:.6e}", r.order, r.g_sup, r.c, r.kappa);
            line("threshold", r.s1);
            line("separation", r.s2);
            line("delta", r.delta_bound);
            if strict && !r.all_pass() {
                return Err(Error::Config("sufficient conditions not met".into()));
            }
            Ok(())
        }
        Command::Baseline(common) => {
            let cfg = load(&common)?;
            let input = make_input(&cfg)?;
            let asdm = cfg.asdm_params()?;
            let step = asdm.default_step(cfg.omega, cfg.amplitude.max(cfg.lambda));
            let trig = encode_asdm(&input, &asdm, cfg.duration, step)?;
            let rec = classical_decode(
                &trig,
                &asdm,
                cfg.reconstruction_omega(),
                &cfg.recovery_config(),
                Some(&input),
            )?;
            let dir = &cfg.output_dir;
            std::fs::create_dir_all(dir)?;
            csv::write_atomic(&dir.join("asdm_triggers.csv"), &csv::triggers_csv(&trig))?;
            csv::write_atomic(&dir.join("baseline.csv"), &csv::waveform_csv(&rec.waveform))?;
            println!("asdm_triggers = {}", trig.trigger_count());
            match rec.error_percent() {
                Some(e) => println!("err_asdm_percent = {e:.6}"),
                None => println!("err_asdm_percent = n/a"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
