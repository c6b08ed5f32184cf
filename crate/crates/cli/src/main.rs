//! `stochwave` command-line driver.

mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stochwave::harness::report::{self, Manifest};
use stochwave::harness::{self, BackendKind, ExperimentConfig};
use stochwave::{Error, Result};

use settings::{parse_width, FileConfig};

#[derive(Parser)]
#[command(name = "stochwave", version, about = "Energy-preserving schemes for the stochastic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single trajectory: per-step energy and the final coefficients.
    Simulate(Common),
    /// Strong error against step size, with fitted rate.
    RateTime(Common),
    /// Strong error against mesh size, with fitted rate.
    RateSpace(Common),
    /// Mean energy against time next to the trace formula.
    Trace(Common),
    /// Per-step energy residual of one noisy trajectory.
    EnergyCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Quick property checks of the numerical core.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// JSON file with flat configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (falls back to STOCHWAVE_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendKind>,
    /// Galerkin dimension; 0 switches the noise off.
    #[arg(long)]
    modes: Option<usize>,
    /// FEM mesh width, e.g. 2^-5 or 0.03125.
    #[arg(long, value_parser = parse_width, allow_hyphen_values = true)]
    mesh: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Noise covariance decay exponent s in Q = Lambda^-s.
    #[arg(long)]
    q_exponent: Option<f64>,
    /// Regularity exponent gamma, needs gamma < s + 1/2.
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of noise modes; 0 means no noise.
    #[arg(long)]
    noise_modes: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn parse_backend(s: &str) -> std::result::Result<BackendKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let flags = FileConfig {
            backend: self.backend,
            modes: self.modes,
            mesh: self.mesh,
            tau: self.tau,
            t_final: self.t_final,
            samples: self.samples,
            workers: self.workers,
            seed: self.seed,
            q_exponent: self.q_exponent,
            gamma: self.gamma,
            noise_modes: self.noise_modes,
            out: self.out.clone(),
            ..FileConfig::default()
        };
        let merged = file.overlay(flags);
        let env_seed = match std::env::var("STOCHWAVE_SEED") {
            Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| Error::InvalidConfig {
                assumption: "seed",
                message: format!("STOCHWAVE_SEED must be an unsigned integer, got '{s}'"),
            })?),
            Err(_) => None,
        };
        let cfg = merged.resolve(env_seed)?;
        let out = merged.out.unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = match &cli.command {
        Command::Simulate(c) | Command::RateTime(c) | Command::RateSpace(c) | Command::Trace(c) => c.verbose,
        Command::EnergyCheck { common, .. } => common.verbose,
        Command::Selftest => 0,
    };
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let (class, code) = classify(&e);
            eprintln!("error[{class}]: {}", one_line(&e));
            ExitCode::from(code)
        }
    }
}

fn classify(e: &Error) -> (&'static str, u8) {
    match e.root() {
        Error::InvalidConfig { .. } => ("config", 2),
        Error::NonConvergence { .. } => ("nonconvergence", 3),
        Error::Io(_) => ("io", 4),
        Error::Json(_) => ("io", 4),
        Error::Degenerate(_) => ("degenerate", 1),
        _ => ("internal", 1),
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', " ")
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate(c) => simulate(&c),
        Command::RateTime(c) => rate(&c, "rate-time"),
        Command::RateSpace(c) => rate(&c, "rate-space"),
        Command::Trace(c) => trace(&c),
        Command::EnergyCheck { common, steps } => energy_check(&common, steps),
        Command::Selftest => Ok(selftest()),
    }
}

fn create(dir: &Path, name: &str) -> Result<std::fs::File> {
    std::fs::create_dir_all(dir)?;
    Ok(std::fs::File::create(dir.join(name))?)
}

fn finish(out: &Path, command: &str, cfg: &ExperimentConfig, summary: serde_json::Value) -> Result<()> {
    let mut m = Manifest::new(command, cfg);
    m.summary = Some(summary);
    std::fs::create_dir_all(out)?;
    let path = report::write_manifest(out, &m)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn simulate(c: &Common) -> Result<ExitCode> {
    let (cfg, out) = c.resolve()?;
    let (space, states) = harness::simulate(&cfg)?;
    let rows = report::trajectory_rows(&space, &states, cfg.tau, &cfg.drift)?;
    report::write_trajectory(create(&out, report::TRAJECTORY_FILE)?, &rows)?;
    let last = states.last().expect("trajectory holds the initial state");
    report::write_coefficients(create(&out, report::FINAL_STATE_FILE)?, &report::coefficient_rows(last))?;
    let final_energy = rows.last().map_or(f64::NAN, |r| r.energy);
    println!("steps={} final_energy={final_energy:.12e}", rows.len() - 1);
    finish(&out, "simulate", &cfg, serde_json::json!({ "final_energy": final_energy }))?;
    Ok(ExitCode::SUCCESS)
}

fn rate(c: &Common, command: &str) -> Result<ExitCode> {
    let (cfg, out) = c.resolve()?;
    let report = if command == "rate-time" {
        harness::temporal_study(&cfg)?
    } else {
        harness::spatial_study(&cfg)?
    };
    report::save_rate_report(&out, &report)?;
    for l in &report.levels {
        println!(
            "level={} scale={:.6e} err_u={:.6e} err_v={:.6e} stderr={:.3e}",
            l.level, l.scale, l.err_u, l.err_v, l.stderr
        );
    }
    println!("slope={:.4} half_width={:.4}", report.fit.slope, report.fit.half_width);
    finish(&out, command, &cfg, serde_json::to_value(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn trace(c: &Common) -> Result<ExitCode> {
    let (cfg, out) = c.resolve()?;
    let report = harness::trace_study(&cfg)?;
    report::save_trace_report(&out, &report)?;
    println!(
        "trace={:.6e} reference_slope={:.6e} fitted_slope={:.6e} max_dev_se={:.3}",
        report.trace,
        report.reference_slope,
        report.fitted_slope,
        report.max_standardized_deviation()
    );
    let summary = serde_json::json!({
        "trace": report.trace,
        "reference_slope": report.reference_slope,
        "fitted_slope": report.fitted_slope,
        "fitted_slope_stderr": report.fitted_slope_stderr,
        "initial_energy": report.initial_energy,
    });
    finish(&out, "trace", &cfg, summary)?;
    Ok(ExitCode::SUCCESS)
}

fn energy_check(c: &Common, steps: usize) -> Result<ExitCode> {
    let (cfg, out) = c.resolve()?;
    let audit = harness::energy_audit(&cfg, steps)?;
    println!(
        "steps={} max_residual={:.3e} threshold={:.3e} max_iterations={}",
        audit.steps, audit.max_residual, audit.threshold, audit.max_iterations
    );
    let summary = serde_json::json!({
        "steps": audit.steps,
        "max_residual": audit.max_residual,
        "threshold": audit.threshold,
        "max_iterations": audit.max_iterations,
    });
    finish(&out, "energy-check", &cfg, summary)?;
    if audit.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error[energy]: residual {:.3e} above {:.3e}", audit.max_residual, audit.threshold);
        Ok(ExitCode::from(1))
    }
}

fn selftest() -> ExitCode {
    let results = stochwave::checks::run_all();
    let mut ok = true;
    for r in &results {
        let tag = if r.passed() { "PASS" } else { "FAIL" };
        println!("{tag} {} observed={:.3e} tolerance={:.1e}", r.name, r.observed, r.tolerance);
        ok &= r.passed();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
