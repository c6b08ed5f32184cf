use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::nonlinearity::CubicDrift;
use crate::stepper::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Spectral,
    Fem,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(BackendKind::Spectral),
            "fem" => Ok(BackendKind::Fem),
            other => Err(Error::config("backend", format!("unknown backend '{other}'"))),
        }
    }
}

/// `Q = Lambda^{-s}` truncated to `modes` sine modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub s: f64,
    pub gamma: f64,
    /// `None`: as many modes as the finest space in the study. `Some(0)`: no noise.
    pub modes: Option<usize>,
}

impl NoiseSpec {
    pub fn model(&self, default_modes: usize) -> Result<NoiseModel> {
        NoiseModel::power_law(self.s, self.modes.unwrap_or(default_modes), self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialData {
    Zero,
    /// `u0 = amplitude P_h e_index`, `v0 = 0`.
    Mode { index: usize, amplitude: f64 },
}

/// Where spatial errors are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareOn {
    /// Coarse solutions embedded in the reference space: the full error,
    /// including the part of the solution the coarse space cannot represent.
    #[default]
    Reference,
    /// Reference truncated or L2-projected onto each coarse space: only the
    /// error within the coarse space.
    Coarse,
}

/// Resolution values are sine mode counts `J` for the spectral backend and
/// interior node counts for the finite element backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub backend: BackendKind,
    /// Space for temporal and trace studies.
    pub resolution: usize,
    pub space_levels: Vec<usize>,
    pub space_reference: usize,
    #[serde(default)]
    pub compare_on: CompareOn,
    /// Step for spatial and trace studies.
    pub tau: f64,
    pub tau_levels: Vec<f64>,
    pub tau_reference: f64,
    pub t_final: f64,
    pub samples: usize,
    pub noise: NoiseSpec,
    pub drift: CubicDrift,
    pub seed: u64,
    pub solver: SolverConfig,
    pub workers: usize,
    pub initial: InitialData,
}

pub(crate) fn dyadic(k: i32) -> f64 {
    2f64.powi(-k)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            backend: BackendKind::Spectral,
            resolution: 64,
            space_levels: vec![4, 8, 16, 32],
            space_reference: 256,
            compare_on: CompareOn::Reference,
            tau: dyadic(8),
            tau_levels: (2..=6).map(dyadic).collect(),
            tau_reference: dyadic(9),
            t_final: 1.0,
            samples: 200,
            noise: NoiseSpec {
                s: 0.5005,
                gamma: 1.0,
                modes: None,
            },
            drift: CubicDrift::default(),
            seed: 20_240_601,
            solver: SolverConfig::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            initial: InitialData::Zero,
        }
    }
}

impl ExperimentConfig {
    /// Finite element defaults: meshes `h = 2^-2 .. 2^-5` against `h = 2^-8`.
    pub fn fem() -> Self {
        ExperimentConfig {
            backend: BackendKind::Fem,
            resolution: 63,
            space_levels: vec![3, 7, 15, 31],
            space_reference: 255,
            ..ExperimentConfig::default()
        }
    }

    pub fn steps_for(&self, tau: f64) -> Result<usize> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::config("time grid", format!("step size must be positive, got {tau}")));
        }
        let n = (self.t_final / tau).round();
        if n < 1.0 || (n * tau - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::config(
                "time grid",
                format!("T = {} is not an integer multiple of tau = {tau}", self.t_final),
            ));
        }
        Ok(n as usize)
    }

    /// Checks shared by every study: drift, noise regularity, solver, horizon.
    pub fn validate_common(&self) -> Result<()> {
        if !self.drift.is_zero() {
            self.drift.validate()?;
        }
        self.solver.validate()?;
        self.noise.model(1)?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("time grid", format!("horizon must be positive, got {}", self.t_final)));
        }
        if self.samples == 0 {
            return Err(Error::config("Monte Carlo", "need at least one sample"));
        }
        if self.workers == 0 {
            return Err(Error::config("worker pool", "need at least one worker"));
        }
        if self.resolution == 0 || self.space_reference == 0 || self.space_levels.contains(&0) {
            return Err(Error::config("space", "resolutions must be positive"));
        }
        if let InitialData::Mode { index, amplitude } = self.initial {
            if index == 0 || !amplitude.is_finite() {
                return Err(Error::config("initial data", "mode index must be >= 1 and amplitude finite"));
            }
        }
        Ok(())
    }

    pub fn validate_temporal(&self) -> Result<()> {
        self.validate_common()?;
        if self.tau_levels.len() < 3 {
            return Err(Error::config("rate fit", "need at least three step sizes"));
        }
        check_tau(self.tau_reference)?;
        let n_ref = self.steps_for(self.tau_reference)?;
        for &tau in &self.tau_levels {
            check_tau(tau)?;
            if tau <= self.tau_reference {
                return Err(Error::config(
                    "time refinement",
                    format!("reference step {} must be finer than {tau}", self.tau_reference),
                ));
            }
            let ratio = (tau / self.tau_reference).round();
            if (ratio * self.tau_reference - tau).abs() > 1e-12 * tau || !(ratio as u64).is_power_of_two() {
                return Err(Error::config(
                    "time refinement",
                    format!("step {tau} is not a dyadic multiple of the reference {}", self.tau_reference),
                ));
            }
            let n = self.steps_for(tau)?;
            if n * ratio as usize != n_ref {
                return Err(Error::config("time refinement", "step counts do not nest"));
            }
        }
        Ok(())
    }

    pub fn validate_spatial(&self) -> Result<()> {
        self.validate_common()?;
        check_tau(self.tau)?;
        self.steps_for(self.tau)?;
        if self.space_levels.len() < 3 {
            return Err(Error::config("rate fit", "need at least three spatial levels"));
        }
        for &level in &self.space_levels {
            if level >= self.space_reference {
                return Err(Error::config(
                    "spatial refinement",
                    format!("reference {} must be finer than level {level}", self.space_reference),
                ));
            }
            if self.backend == BackendKind::Fem && !(self.space_reference + 1).is_multiple_of(level + 1) {
                return Err(Error::config(
                    "spatial refinement",
                    format!("mesh with {level} interior nodes is not nested in the reference mesh"),
                ));
            }
        }
        Ok(())
    }

    pub fn validate_trace(&self) -> Result<()> {
        self.validate_common()?;
        check_tau(self.tau)?;
        self.steps_for(self.tau)?;
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 2.0) {
        return Err(Error::config(
            "step-size bound",
            format!("step size must satisfy 0 < tau < 2, got {tau}"),
        ));
    }
    Ok(())
}
