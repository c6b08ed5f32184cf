//! Q-Wiener increments with `Q e_j = q_j e_j`, `q_j = lambda_j^{-s}`.
//!
//! Gaussians are derived counter-style: the normal for
//! `(sample, step, mode)` is produced by a ChaCha8 stream selected by the
//! sample index, positioned at word `4 * (step * MODE_STRIDE + mode)`, and
//! consumes exactly two 64-bit words (Box-Muller, cosine branch). The values
//! therefore depend only on the master seed and the three indices.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;

/// Upper bound on noise modes per step in the counter layout.
pub const MODE_STRIDE: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Decay exponent of `q_j = lambda_j^{-s}`; `None` for explicit weights.
    pub s: Option<f64>,
    /// Claimed regularity index.
    pub gamma: f64,
    /// `q_j` for `j = 1..=modes`.
    pub q: Vec<f64>,
}

/// Outcome of the Hilbert-Schmidt regularity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsCheck {
    /// `sum_{j <= J} lambda_j^{gamma - 1} q_j`.
    pub partial_sum: f64,
    /// The untruncated series diverges.
    pub diverges: bool,
}

fn lambda(j: usize) -> f64 {
    (j as f64 * PI).powi(2)
}

impl NoiseModel {
    /// `q_j = ((j pi)^2)^{-s}` for `j <= modes`. Requires `gamma >= 1` and
    /// `gamma < s + 1/2` unless `modes == 0` (no noise).
    pub fn power_law(s: f64, modes: usize, gamma: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::config("noise regularity condition", format!("decay exponent s = {s} must be >= 0")));
        }
        let model = NoiseModel {
            s: Some(s),
            gamma,
            q: (1..=modes).map(|j| lambda(j).powf(-s)).collect(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Explicit nonnegative weights.
    pub fn with_weights(q: Vec<f64>, gamma: f64) -> Result<Self> {
        if q.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::config("noise regularity condition", "covariance weights must be finite and >= 0"));
        }
        let model = NoiseModel { s: None, gamma, q };
        model.validate()?;
        Ok(model)
    }

    pub fn none() -> Self {
        NoiseModel {
            s: None,
            gamma: 1.0,
            q: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::config(
                "noise regularity condition",
                format!("regularity index gamma = {} must be >= 1 in one dimension", self.gamma),
            ));
        }
        if let Some(s) = self.s {
            if self.gamma >= s + 0.5 {
                return Err(Error::config(
                    "noise regularity condition",
                    format!(
                        "Lambda^((gamma-1)/2) Q^(1/2) is not Hilbert-Schmidt: need gamma < s + 1/2, got gamma = {}, s = {s}",
                        self.gamma
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.q.len()
    }

    /// No noise at all (`Q = 0`).
    pub fn is_zero(&self) -> bool {
        self.q.iter().all(|&w| w == 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Truncated `||Lambda^{(gamma-1)/2} Q^{1/2}||_HS^2`, warning when the full series diverges.
pub fn hs_norm_check(model: &NoiseModel) -> HsCheck {
    let partial_sum = model
        .q
        .iter()
        .enumerate()
        .map(|(j, &q)| lambda(j + 1).powf(model.gamma - 1.0) * q)
        .sum();
    // with q_j ~ j^{-2s} the terms behave like j^{2(gamma - 1 - s)}
    let diverges = match model.s {
        Some(s) => !model.is_zero() && model.gamma >= s + 0.5,
        None => false,
    };
    if diverges {
        log::warn!(
            "noise regularity: sum lambda_j^(gamma-1) q_j diverges for gamma = {}, s = {:?}; truncated value {partial_sum}",
            model.gamma,
            model.s
        );
    }
    HsCheck { partial_sum, diverges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master_seed: u64,
}

impl SeedPlan {
    pub fn new(master_seed: u64) -> Self {
        SeedPlan { master_seed }
    }

    /// Stream positioned at the first normal of `(sample, step)`.
    fn row_stream(&self, sample: u64, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(sample);
        rng.set_word_pos(4 * (step as u128) * (MODE_STRIDE as u128));
        rng
    }

    /// The standard normal assigned to `(sample, step, mode)`.
    pub fn gaussian(&self, sample: u64, step: u64, mode: u64) -> f64 {
        assert!(mode < MODE_STRIDE);
        let mut rng = self.row_stream(sample, step);
        rng.set_word_pos(4 * (step as u128 * MODE_STRIDE as u128 + mode as u128));
        box_muller(&mut rng)
    }
}

#[inline]
fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Increments `W(t_{n+1}) - W(t_n)` in sine-mode coordinates, one row per step.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTable {
    steps: usize,
    modes: usize,
    tau: f64,
    data: Vec<f64>,
}

impl IncrementTable {
    pub fn zeros(steps: usize, modes: usize, tau: f64) -> Self {
        IncrementTable {
            steps,
            modes,
            tau,
            data: vec![0.0; steps * modes],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        let modes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != modes) {
            return Err(Error::DimensionMismatch {
                expected: modes,
                got: rows.iter().map(Vec::len).find(|&l| l != modes).unwrap_or(0),
            });
        }
        Ok(IncrementTable {
            steps: rows.len(),
            modes,
            tau,
            data: rows.concat(),
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.modes..(n + 1) * self.modes]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.steps).map(|n| self.data[n * self.modes + j]).collect()
    }

    /// Block sums over `factor` consecutive steps (pairwise summation, so
    /// coarsening by 2 twice equals coarsening by 4 bit for bit).
    pub fn coarsen_time(&self, factor: usize) -> Result<IncrementTable> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(Error::config(
                "time refinement",
                format!("factor {factor} does not divide {} steps", self.steps),
            ));
        }
        let steps = self.steps / factor;
        let mut data = vec![0.0; steps * self.modes];
        let mut block = vec![0.0; factor];
        for n in 0..steps {
            for j in 0..self.modes {
                for (k, b) in block.iter_mut().enumerate() {
                    *b = self.data[(n * factor + k) * self.modes + j];
                }
                data[n * self.modes + j] = pairwise_sum(&block);
            }
        }
        Ok(IncrementTable {
            steps,
            modes: self.modes,
            tau: self.tau * factor as f64,
            data,
        })
    }

    /// Leading `modes` columns.
    pub fn restrict_modes(&self, modes: usize) -> Result<IncrementTable> {
        if modes > self.modes {
            return Err(Error::config(
                "spatial refinement",
                format!("cannot restrict {} noise modes to {modes}", self.modes),
            ));
        }
        let mut data = Vec::with_capacity(self.steps * modes);
        for n in 0..self.steps {
            data.extend_from_slice(&self.row(n)[..modes]);
        }
        Ok(IncrementTable {
            steps: self.steps,
            modes,
            tau: self.tau,
            data,
        })
    }
}

/// Entry `(n, j) = sqrt(q_j tau) xi_{n,j}` with `xi` standard normal.
pub fn sample_increments(
    model: &NoiseModel,
    plan: &SeedPlan,
    sample_id: u64,
    steps: usize,
    tau: f64,
) -> Result<IncrementTable> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::config("time grid", format!("step size must be positive, got {tau}")));
    }
    if steps == 0 {
        return Err(Error::config("time grid", "need at least one step"));
    }
    let modes = model.modes();
    if modes as u64 > MODE_STRIDE {
        return Err(Error::config("noise", "too many noise modes"));
    }
    let scale: Vec<f64> = model.q.iter().map(|q| (q * tau).sqrt()).collect();
    let mut data = vec![0.0; steps * modes];
    for n in 0..steps {
        let mut rng = plan.row_stream(sample_id, n as u64);
        for (j, s) in scale.iter().enumerate() {
            data[n * modes + j] = s * box_muller(&mut rng);
        }
    }
    Ok(IncrementTable {
        steps,
        modes,
        tau,
        data,
    })
}
