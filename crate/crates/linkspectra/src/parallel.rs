//! Rayon-backed parallelism, capped by `LINKSPECTRA_THREADS`.

use linkspectra_core::synth::TrialRunner;
use linkspectra_core::{GraphBasis, RealMatrix};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "LINKSPECTRA_THREADS";

/// Thread cap from the environment; `None` means the rayon default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs trials on a dedicated pool. Results come back in trial order, so
/// output does not depend on the thread count.
pub struct RayonRunner {
    pool: ThreadPool,
}

impl RayonRunner {
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(thread_cap()?)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl TrialRunner for RayonRunner {
    fn run(&self, trials: usize, trial: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        self.pool.install(|| (0..trials).into_par_iter().map(trial).collect())
    }
}

/// `X = L Φᵀ` with rows analysed in parallel.
pub fn analyze_rows(l: &RealMatrix, basis: &GraphBasis) -> RealMatrix {
    let m = l.cols();
    let rows: Vec<Vec<f64>> = (0..l.rows()).into_par_iter().map(|t| basis.analyze_values(l.row(t))).collect();
    RealMatrix::from_vec(l.rows(), m, rows.concat()).expect("rows have M entries")
}

#[cfg(test)]
mod tests {
    use super::*;
    use linkspectra_core::synth::Sequential;
    use linkspectra_core::PartitionTree;
    use std::sync::Arc;

    #[test]
    fn runner_matches_sequential() {
        let f = |i: usize| (i as f64).sin();
        let par = RayonRunner::new(Some(3)).unwrap();
        assert_eq!(par.threads(), 3);
        assert_eq!(par.run(1000, &f), Sequential.run(1000, &f));
    }

    #[test]
    fn rows_match_core() {
        let basis = GraphBasis::coarsest(Arc::new(PartitionTree::identity(32).unwrap()));
        let l = RealMatrix::from_fn(7, 32, |t, k| ((t * 31 + k * 7) % 5) as f64);
        let x = linkspectra_core::spectra::time_structure(&l, &basis).unwrap();
        assert_eq!(analyze_rows(&l, &basis), x);
    }
}
