//! Flat JSON configuration and flag overrides.
//!
//! Every key is optional. Precedence: command-line flag, then config file,
//! then (for the seed only) `STOCHWAVE_SEED`, then the built-in defaults of
//! the chosen backend.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stochwave::harness::{BackendKind, CompareOn, ExperimentConfig, InitialData};
use stochwave::{CubicDrift, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<BackendKind>,
    /// Galerkin dimension: sine modes, or interior nodes for FEM. `0` switches the noise off.
    pub modes: Option<usize>,
    /// FEM mesh width for temporal and trace runs.
    pub mesh: Option<f64>,
    pub space_levels: Option<Vec<usize>>,
    pub space_reference: Option<usize>,
    /// FEM mesh widths, alternative to `space_levels`.
    pub mesh_levels: Option<Vec<f64>>,
    pub mesh_reference: Option<f64>,
    /// `reference` (default) or `coarse`: where spatial errors are measured.
    pub compare_on: Option<CompareOn>,
    pub tau: Option<f64>,
    pub tau_levels: Option<Vec<f64>>,
    pub tau_reference: Option<f64>,
    pub t_final: Option<f64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub q_exponent: Option<f64>,
    pub gamma: Option<f64>,
    /// Number of noise modes; `0` means no noise.
    pub noise_modes: Option<usize>,
    pub a3: Option<f64>,
    pub a2: Option<f64>,
    pub a1: Option<f64>,
    pub a0: Option<f64>,
    pub c1: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub initial_mode: Option<usize>,
    pub initial_amplitude: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| invalid("config file", format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            backend, modes, mesh, space_levels, space_reference, mesh_levels, mesh_reference, compare_on, tau,
            tau_levels, tau_reference, t_final, samples, workers, seed, q_exponent, gamma,
            noise_modes, a3, a2, a1, a0, c1, tol, max_iter, damping, initial_mode,
            initial_amplitude, out
        )
    }

    pub fn resolve(&self, env_seed: Option<u64>) -> Result<ExperimentConfig> {
        let backend = self.backend.unwrap_or(BackendKind::Spectral);
        let mut c = match backend {
            BackendKind::Spectral => ExperimentConfig::default(),
            BackendKind::Fem => ExperimentConfig::fem(),
        };
        match self.modes {
            Some(0) => c.noise.modes = Some(0),
            Some(j) => c.resolution = j,
            None => {}
        }
        if let Some(h) = self.mesh {
            c.resolution = fem_nodes(backend, h)?;
        }
        if let Some(levels) = &self.space_levels {
            c.space_levels = levels.clone();
        }
        if let Some(r) = self.space_reference {
            c.space_reference = r;
        }
        if let Some(levels) = &self.mesh_levels {
            c.space_levels = levels.iter().map(|&h| fem_nodes(backend, h)).collect::<Result<_>>()?;
        }
        if let Some(h) = self.mesh_reference {
            c.space_reference = fem_nodes(backend, h)?;
        }
        set(&mut c.compare_on, self.compare_on);
        set(&mut c.tau, self.tau);
        if let Some(t) = &self.tau_levels {
            c.tau_levels = t.clone();
        }
        set(&mut c.tau_reference, self.tau_reference);
        set(&mut c.t_final, self.t_final);
        set(&mut c.samples, self.samples);
        set(&mut c.workers, self.workers);
        if let Some(seed) = self.seed.or(env_seed) {
            c.seed = seed;
        }
        set(&mut c.noise.s, self.q_exponent);
        set(&mut c.noise.gamma, self.gamma);
        if self.noise_modes.is_some() {
            c.noise.modes = self.noise_modes;
        }

        let mut drift = CubicDrift {
            a3: self.a3.unwrap_or(c.drift.a3),
            a2: self.a2.unwrap_or(c.drift.a2),
            a1: self.a1.unwrap_or(c.drift.a1),
            a0: self.a0.unwrap_or(c.drift.a0),
            c1: 0.0,
        };
        drift.c1 = self.c1.unwrap_or_else(|| drift.lower_bound_constant());
        c.drift = drift;

        set(&mut c.solver.tol, self.tol);
        set(&mut c.solver.max_iter, self.max_iter);
        set(&mut c.solver.damping, self.damping);

        c.initial = match (self.initial_mode, self.initial_amplitude) {
            (None, None) => InitialData::Zero,
            (index, amplitude) => InitialData::Mode {
                index: index.unwrap_or(1),
                amplitude: amplitude.unwrap_or(1.0),
            },
        };
        c.validate_common()?;
        Ok(c)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn invalid(what: &'static str, message: String) -> Error {
    Error::InvalidConfig {
        assumption: what,
        message,
    }
}

/// Interior node count of the uniform mesh with width `h`.
fn fem_nodes(backend: BackendKind, h: f64) -> Result<usize> {
    if backend != BackendKind::Fem {
        return Err(invalid("finite element mesh", "mesh widths need --backend fem".into()));
    }
    Ok(stochwave::Mesh1D::from_width(h)?.n_interior())
}

/// Accepts `2^-k` as well as plain floats.
pub fn parse_width(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let k: i32 = exp.parse().map_err(|_| format!("bad exponent in '{s}'"))?;
        return Ok(2f64.powi(k));
    }
    t.parse::<f64>().map_err(|_| format!("expected a width like 0.125 or 2^-3, got '{s}'"))
}
