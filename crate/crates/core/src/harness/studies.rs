use serde::{Deserialize, Serialize};

use crate::backend::Galerkin;
use crate::error::{check_len, Error, Result};
use crate::field::State;
use crate::noise::{sample_increments, SeedPlan};
use crate::spectral::weighted_norm;
use crate::stepper::{energy, hamiltonian_residual, StepOperators, Stepper};

use super::config::{CompareOn, ExperimentConfig};
use super::rate::{rate_fit, RateFit};
use super::run_samples;
use super::space::Space;

/// Per-sample terminal errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleError {
    /// `||u - U||_{L2}`
    pub e_u: f64,
    /// `||v - V||` in the negative-order norm `H^{-1}`
    pub e_v: f64,
    /// `||v - V||_{L2}`
    pub e_v_l2: f64,
}

/// `(||u - U||, ||v - V||_{H^{-1}})` for a reference already expressed on the test space.
pub fn strong_error<B: Galerkin + ?Sized>(reference: &State, test: &State, backend: &B) -> Result<(f64, f64)> {
    let e = strong_error_components(reference, test, backend)?;
    Ok((e.e_u, e.e_v))
}

pub fn strong_error_components<B: Galerkin + ?Sized>(
    reference: &State,
    test: &State,
    backend: &B,
) -> Result<SampleError> {
    check_len(backend.dim(), reference.dim())?;
    check_len(backend.dim(), test.dim())?;
    let du = reference.u.sub(&test.u)?;
    let dv = reference.v.sub(&test.v)?;
    Ok(SampleError {
        e_u: du.l2(),
        e_v: weighted_norm(dv.coeffs(), backend.eigenvalues(), -1.0),
        e_v_l2: dv.l2(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Temporal,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorComponent {
    Displacement,
    /// `H^{-1}` velocity error.
    Velocity,
    VelocityL2,
    /// `e_u + e_v`.
    Total,
}

/// Root-mean-square errors over samples at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelError {
    pub level: usize,
    /// `tau` (temporal) or `h` (spatial).
    pub scale: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub err_v_l2: f64,
    pub err_total: f64,
    /// Standard error of `err_total`.
    pub stderr: f64,
}

impl LevelError {
    pub fn component(&self, c: ErrorComponent) -> f64 {
        match c {
            ErrorComponent::Displacement => self.err_u,
            ErrorComponent::Velocity => self.err_v,
            ErrorComponent::VelocityL2 => self.err_v_l2,
            ErrorComponent::Total => self.err_total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub study: StudyKind,
    pub levels: Vec<LevelError>,
    /// Fit of `err_total` against the scale.
    pub fit: RateFit,
}

impl RateReport {
    pub fn fit_component(&self, c: ErrorComponent) -> Result<RateFit> {
        let pts: Vec<(f64, f64)> = self.levels.iter().map(|l| (l.scale, l.component(c))).collect();
        rate_fit(&pts)
    }

    /// Errors do not grow as the scale shrinks, up to `k` standard errors.
    pub fn is_monotone(&self, k: f64) -> bool {
        let mut lv = self.levels.clone();
        lv.sort_by(|a, b| b.scale.total_cmp(&a.scale));
        lv.windows(2)
            .all(|w| w[1].err_total <= w[0].err_total + k * (w[0].stderr + w[1].stderr))
    }
}

/// RMS over samples and the delta-method standard error of the RMS.
fn rms_with_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let sq: Vec<f64> = values.iter().map(|e| e * e).collect();
    let mean = sq.iter().sum::<f64>() / m;
    let rms = mean.sqrt();
    if values.len() < 2 || rms == 0.0 {
        return (rms, 0.0);
    }
    let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (rms, (var / m).sqrt() / (2.0 * rms))
}

fn aggregate(level: usize, scale: f64, errors: &[SampleError]) -> LevelError {
    let pick = |f: fn(&SampleError) -> f64| errors.iter().map(f).collect::<Vec<_>>();
    let (err_u, _) = rms_with_stderr(&pick(|e| e.e_u));
    let (err_v, _) = rms_with_stderr(&pick(|e| e.e_v));
    let (err_v_l2, _) = rms_with_stderr(&pick(|e| e.e_v_l2));
    let (err_total, stderr) = rms_with_stderr(&pick(|e| e.e_u + e.e_v));
    LevelError {
        level,
        scale,
        err_u,
        err_v,
        err_v_l2,
        err_total,
        stderr,
    }
}

fn finish(study: StudyKind, levels: Vec<LevelError>) -> Result<RateReport> {
    if levels.iter().all(|l| l.err_total == 0.0) {
        return Err(Error::Degenerate(
            "all errors vanish (no noise and a stationary initial state?)".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.scale, l.err_total)).collect();
    let fit = rate_fit(&pts)?;
    Ok(RateReport { study, levels, fit })
}

fn in_context(sample: usize, level: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let level = level.into();
    move |e| Error::SampleFailed {
        sample,
        level,
        source: Box::new(e),
    }
}

/// Strong error at `T` for each step in `tau_levels` against `tau_reference`
/// on a fixed space.
pub fn temporal_study(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate_temporal()?;
    let noise_modes = cfg.noise.modes.unwrap_or(cfg.resolution);
    let space = Space::build(cfg.backend, cfg.resolution, noise_modes)?;
    let model = cfg.noise.model(noise_modes)?;
    let plan = SeedPlan::new(cfg.seed);
    let x0 = space.initial_state(&cfg.initial)?;
    let n_ref = cfg.steps_for(cfg.tau_reference)?;
    let ref_ops = StepOperators::for_backend(&space, cfg.tau_reference)?;
    let levels: Vec<(usize, StepOperators)> = cfg
        .tau_levels
        .iter()
        .map(|&tau| {
            let factor = (tau / cfg.tau_reference).round() as usize;
            Ok((factor, StepOperators::for_backend(&space, tau)?))
        })
        .collect::<Result<_>>()?;

    let per_sample = run_samples(cfg.workers, cfg.samples, |sample| {
        let table = sample_increments(&model, &plan, sample as u64, n_ref, cfg.tau_reference)?;
        let mut reference = Stepper::new(&space, &ref_ops, &cfg.drift, cfg.solver)?;
        let x_ref = reference
            .integrate(&x0, &table, |_, _| {})
            .map_err(in_context(sample, format!("tau={}", cfg.tau_reference)))?;
        levels
            .iter()
            .map(|(factor, ops)| {
                let coarse = table.coarsen_time(*factor)?;
                let mut stepper = Stepper::new(&space, ops, &cfg.drift, cfg.solver)?;
                let x = stepper
                    .integrate(&x0, &coarse, |_, _| {})
                    .map_err(in_context(sample, format!("tau={}", ops.tau)))?;
                strong_error_components(&x_ref, &x, &space)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let levels = cfg
        .tau_levels
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let errs: Vec<SampleError> = per_sample.iter().map(|s| s[i]).collect();
            aggregate(i, tau, &errs)
        })
        .collect();
    finish(StudyKind::Temporal, levels)
}

/// Strong error at `T` for each space in `space_levels` against
/// `space_reference`, all with step `tau`. See [`CompareOn`] for where the
/// difference is measured.
pub fn spatial_study(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate_spatial()?;
    let noise_modes = cfg.noise.modes.unwrap_or(cfg.space_reference);
    let reference = Space::build(cfg.backend, cfg.space_reference, noise_modes)?;
    let coarse: Vec<Space> = cfg
        .space_levels
        .iter()
        .map(|&r| Space::build(cfg.backend, r, noise_modes))
        .collect::<Result<_>>()?;
    let model = cfg.noise.model(noise_modes)?;
    let plan = SeedPlan::new(cfg.seed);
    let steps = cfg.steps_for(cfg.tau)?;
    let ref_ops = StepOperators::for_backend(&reference, cfg.tau)?;
    let ref_x0 = reference.initial_state(&cfg.initial)?;
    let coarse_ops: Vec<StepOperators> = coarse
        .iter()
        .map(|s| StepOperators::for_backend(s, cfg.tau))
        .collect::<Result<_>>()?;
    let coarse_x0: Vec<State> = coarse
        .iter()
        .map(|s| s.initial_state(&cfg.initial))
        .collect::<Result<_>>()?;

    let per_sample = run_samples(cfg.workers, cfg.samples, |sample| {
        let table = sample_increments(&model, &plan, sample as u64, steps, cfg.tau)?;
        let mut stepper = Stepper::new(&reference, &ref_ops, &cfg.drift, cfg.solver)?;
        let x_ref = stepper
            .integrate(&ref_x0, &table, |_, _| {})
            .map_err(in_context(sample, format!("space={}", cfg.space_reference)))?;
        coarse
            .iter()
            .zip(&coarse_ops)
            .zip(&coarse_x0)
            .zip(&cfg.space_levels)
            .map(|(((space, ops), x0), &level)| {
                let seen = match space {
                    Space::Spectral(b) => table.restrict_modes(b.modes().min(table.modes()))?,
                    Space::Fem(_) => table.clone(),
                };
                let mut stepper = Stepper::new(space, ops, &cfg.drift, cfg.solver)?;
                let x = stepper
                    .integrate(x0, &seen, |_, _| {})
                    .map_err(in_context(sample, format!("space={level}")))?;
                match cfg.compare_on {
                    CompareOn::Reference => {
                        let lifted = space.embed_into(&reference, &x)?;
                        strong_error_components(&x_ref, &lifted, &reference)
                    }
                    CompareOn::Coarse => {
                        let on_coarse = space.restrict_from(&reference, &x_ref)?;
                        strong_error_components(&on_coarse, &x, space)
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let levels = coarse
        .iter()
        .enumerate()
        .map(|(i, space)| {
            let errs: Vec<SampleError> = per_sample.iter().map(|s| s[i]).collect();
            aggregate(i, space.h(), &errs)
        })
        .collect();
    finish(StudyKind::Spatial, levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    #[serde(rename = "mean_J")]
    pub mean_j: f64,
    pub stderr: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    pub initial_energy: f64,
    /// `Tr(P_h Q P_h)`
    pub trace: f64,
    /// `Tr(P_h Q P_h) / 2`
    pub reference_slope: f64,
    /// Least-squares slope of the sample mean energy against `t`.
    pub fitted_slope: f64,
    pub fitted_slope_stderr: f64,
}

impl TraceReport {
    /// Largest `|mean - reference|` in units of the standard error (rows with
    /// zero standard error must match exactly).
    pub fn max_standardized_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let d = (r.mean_j - r.reference).abs();
                if r.stderr > 0.0 {
                    d / r.stderr
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Sample mean of `J(U^n, V^n)` at every `t_n` next to `J_0 + t_n Tr(P_h Q P_h) / 2`.
pub fn trace_study(cfg: &ExperimentConfig) -> Result<TraceReport> {
    cfg.validate_trace()?;
    let noise_modes = cfg.noise.modes.unwrap_or(cfg.resolution);
    let space = Space::build(cfg.backend, cfg.resolution, noise_modes)?;
    let model = cfg.noise.model(noise_modes)?;
    let plan = SeedPlan::new(cfg.seed);
    let steps = cfg.steps_for(cfg.tau)?;
    let ops = StepOperators::for_backend(&space, cfg.tau)?;
    let x0 = space.initial_state(&cfg.initial)?;
    let initial_energy = energy(&x0, &cfg.drift, &space)?;
    let trace = space.noise_trace(&model.q);

    let energies = run_samples(cfg.workers, cfg.samples, |sample| {
        let table = sample_increments(&model, &plan, sample as u64, steps, cfg.tau)?;
        let mut stepper = Stepper::new(&space, &ops, &cfg.drift, cfg.solver)?;
        let mut out = Vec::with_capacity(steps + 1);
        stepper
            .integrate(&x0, &table, |_, x| {
                out.push(crate::stepper::energy_unchecked(x.u.coeffs(), x.v.coeffs(), &cfg.drift, &space))
            })
            .map_err(in_context(sample, format!("tau={}", cfg.tau)))?;
        Ok(out)
    })?;

    let m = cfg.samples as f64;
    let rows: Vec<TraceRow> = (0..=steps)
        .map(|n| {
            let t = n as f64 * cfg.tau;
            let vals: Vec<f64> = energies.iter().map(|e| e[n]).collect();
            let mean = vals.iter().sum::<f64>() / m;
            let stderr = if cfg.samples > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
            } else {
                0.0
            };
            TraceRow {
                t,
                mean_j: mean,
                stderr,
                reference: initial_energy + 0.5 * trace * t,
            }
        })
        .collect();

    let (fitted_slope, fitted_slope_stderr) = linear_slope(&rows);
    Ok(TraceReport {
        rows,
        initial_energy,
        trace,
        reference_slope: 0.5 * trace,
        fitted_slope,
        fitted_slope_stderr,
    })
}

fn linear_slope(rows: &[TraceRow]) -> (f64, f64) {
    let n = rows.len() as f64;
    if rows.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    let mt = rows.iter().map(|r| r.t).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.mean_j).sum::<f64>() / n;
    let stt: f64 = rows.iter().map(|r| (r.t - mt).powi(2)).sum();
    let sty: f64 = rows.iter().map(|r| (r.t - mt) * (r.mean_j - my)).sum();
    let slope = sty / stt;
    let ssr: f64 = rows
        .iter()
        .map(|r| (r.mean_j - my - slope * (r.t - mt)).powi(2))
        .sum();
    (slope, (ssr / (n - 2.0) / stt).sqrt())
}

/// Per-step Hamiltonian residuals along one noisy trajectory (sample 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub steps: usize,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `100 tol (1 + max_n |J_n|)`
    pub threshold: f64,
    pub max_iterations: usize,
}

impl EnergyAudit {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.threshold
    }
}

pub fn energy_audit(cfg: &ExperimentConfig, steps: usize) -> Result<EnergyAudit> {
    cfg.validate_common()?;
    if steps == 0 {
        return Err(Error::config("time grid", "need at least one step"));
    }
    let noise_modes = cfg.noise.modes.unwrap_or(cfg.resolution);
    let space = Space::build(cfg.backend, cfg.resolution, noise_modes)?;
    let model = cfg.noise.model(noise_modes)?;
    let ops = StepOperators::for_backend(&space, cfg.tau)?;
    let table = sample_increments(&model, &SeedPlan::new(cfg.seed), 0, steps, cfg.tau)?;
    let mut stepper = Stepper::new(&space, &ops, &cfg.drift, cfg.solver)?;
    let mut x = space.initial_state(&cfg.initial)?;
    let mut residuals = Vec::with_capacity(steps);
    let mut max_energy = energy(&x, &cfg.drift, &space)?.abs();
    let mut max_iterations = 0;
    for n in 0..steps {
        let dw = space.project_noise(table.row(n));
        let (next, stats) = stepper.step(&x, &dw).map_err(|e| Error::StepFailed {
            step: n,
            source: Box::new(e),
        })?;
        residuals.push(hamiltonian_residual(&x, &next, &dw, &cfg.drift, &space)?);
        max_energy = max_energy.max(energy(&next, &cfg.drift, &space)?.abs());
        max_iterations = max_iterations.max(stats.iterations);
        x = next;
    }
    Ok(EnergyAudit {
        steps,
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
        threshold: 100.0 * cfg.solver.tol * (1.0 + max_energy),
        max_iterations,
    })
}

/// One trajectory (sample 0) on the fixed space with step `tau`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(Space, Vec<State>)> {
    cfg.validate_trace()?;
    let noise_modes = cfg.noise.modes.unwrap_or(cfg.resolution);
    let space = Space::build(cfg.backend, cfg.resolution, noise_modes)?;
    let model = cfg.noise.model(noise_modes)?;
    let steps = cfg.steps_for(cfg.tau)?;
    let ops = StepOperators::for_backend(&space, cfg.tau)?;
    let table = sample_increments(&model, &SeedPlan::new(cfg.seed), 0, steps, cfg.tau)?;
    let x0 = space.initial_state(&cfg.initial)?;
    let states = crate::stepper::trajectory(&x0, &table, &ops, &cfg.drift, &space, cfg.solver)?;
    Ok((space, states))
}
