//! Monte Carlo experiments: strong convergence in time and space, and the
//! linear growth of the expected energy.
//!
//! Every sample draws one increment table at the reference resolution; the
//! coarser runs see block sums (time) or leading modes / L2 projections
//! (space) of the same table, so errors measure discretization only.

mod config;
mod rate;
pub mod report;
mod space;
mod studies;

pub use config::{BackendKind, CompareOn, ExperimentConfig, InitialData, NoiseSpec};
pub use rate::{rate_fit, RateFit};
pub use space::Space;
pub use studies::{
    energy_audit, simulate, spatial_study, strong_error, strong_error_components, temporal_study,
    trace_study, EnergyAudit, ErrorComponent, LevelError, RateReport, SampleError, StudyKind,
    TraceReport, TraceRow,
};

use crate::error::{Error, Result};

/// Runs `work(sample)` for every sample on a pool of `workers` threads.
/// Results come back in sample order whatever the scheduling.
pub fn run_samples<T, F>(workers: usize, samples: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("worker pool", e.to_string()))?;
    pool.install(|| (0..samples).into_par_iter().map(&work).collect())
}
