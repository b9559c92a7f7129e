//! Statistical experiments over sampled starting points: Weyl averages,
//! target measures, pair correlations, counting errors, the convergence /
//! divergence dichotomy, and star discrepancy.
//!
//! Every sample draws from its own generator seeded by
//! [`derive_seed`](crate::measures::derive_seed)`(master, sample_id)`, so
//! results do not depend on the thread count.

mod counting;
mod dichotomy;
mod discrepancy;
mod target;
mod weyl;

pub use counting::{
    checkpoints, counting_experiment, phi, run_sample, CountingReport, ExperimentConfig, FitResult, SampleRecord,
    VarianceRow, DEFAULT_LOG_POWER,
};
pub use dichotomy::{dichotomy_experiment, DichotomyRow, DichotomySummary, Regime};
pub use discrepancy::{star_discrepancy, Discrepancy, GRID_2D};
pub use target::{
    measure_of_target_fourier, measure_of_target_mc, pair_correlation, FourierMeasure, McEstimate, PairRow,
};
pub use weyl::{del_series_term, weyl_sum};

use crate::error::{LabError, Result};

/// Run `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(LabError::invalid("threads", "thread count must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::invalid("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
