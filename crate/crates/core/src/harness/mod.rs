//! Monte-Carlo experiments built on the solvers: energy estimates,
//! coupled stability, time-step convergence, weak residuals, temporal
//! translation moduli and the vanishing diffusion–capillarity limit.
//!
//! Every member `i` of an ensemble is driven by the Wiener path with seed
//! `seed0 + i`, shared by all solvers and parameter levels that member
//! touches. Statistics are reduced with pairwise summation in seed order,
//! so results do not depend on scheduling.

mod convergence;
mod energy;
mod limit;
mod stability;

pub use convergence::{
    strong_order_study, translation_study, weak_residual_study, StrongOrderReport,
    TranslationReport, WeakResidualReport, WEAK_RESIDUAL_FLOOR,
};
pub use energy::{run_ensemble, BoundInputs, EnergyOptions, EnergyReport};
pub use limit::{
    compactness_gaps, dyadic_ladder, kinetic_compactness, limit_study, CompactnessTable, Level,
    LimitMode, LimitOptions, LimitStudyReport,
};
pub use stability::{stability_experiment, stability_sweep, StabilityPoint, StabilitySweep};

use serde::Serialize;

use crate::ensemble::par_map;
use crate::error::{Error, Result};
use crate::report::{PathFailure, Series};
use crate::solver::SolutionPath;
use crate::stats::Stats;

/// Size, master seed and worker count of a Monte-Carlo ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ensemble {
    pub n_paths: usize,
    pub seed0: u64,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Ensemble {
    pub fn new(n_paths: usize, seed0: u64) -> Self {
        Self {
            n_paths,
            seed0,
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_paths as u64).map(|i| self.seed0.wrapping_add(i)).collect()
    }

    /// Runs `f` once per seed, in parallel, keeping seed order. Runtime
    /// aborts are collected as failures; any other error is returned.
    pub fn run<T, F>(&self, f: F) -> Result<(Vec<T>, Vec<PathFailure>)>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one path".into()));
        }
        let seeds = self.seeds();
        let results = par_map(seeds.len(), self.threads, |i| f(seeds[i]));
        let mut ok = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (seed, r) in seeds.into_iter().zip(results) {
            match r {
                Ok(v) => ok.push(v),
                Err(e) if e.is_runtime_abort() => failures.push(PathFailure {
                    seed,
                    message: e.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }
        Ok((ok, failures))
    }
}

/// Statistics of `samples[path][i]` across paths, for every index `i`.
fn stats_by_index(samples: &[Vec<f64>], len: usize) -> Vec<Stats> {
    (0..len)
        .map(|i| {
            let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            Stats::from_samples(&xs)
        })
        .collect()
}

/// Series with a leading key column followed by mean and SE columns for
/// each named statistic.
fn stats_series(name: &str, key: &str, keys: &[f64], columns: &[(&str, &[Stats])]) -> Series {
    let mut header = vec![key.to_string()];
    for (c, _) in columns {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_se"));
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut s = Series::new(name, &refs);
    for (i, &k) in keys.iter().enumerate() {
        let mut row = vec![k];
        for (_, st) in columns {
            row.push(st[i].mean);
            row.push(st[i].se.unwrap_or(f64::NAN));
        }
        s.push(row);
    }
    s
}

/// One row per snapshot of a single path: time, norms and dissipation.
pub fn path_series(name: &str, path: &SolutionPath) -> Series {
    let mut s = Series::new(name, &["t", "l2_sq", "h1_sq", "dissipation", "sup_abs"]);
    for ((t, u), d) in path.times.iter().zip(&path.snapshots).zip(&path.diagnostics) {
        let sup = u.to_grid().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        s.push(vec![*t, u.l2_norm_sq(), u.sobolev_norm_sq(1.0), d.dissipation, sup]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_collects_aborts_and_propagates_input_errors() {
        let ens = Ensemble::new(4, 10).with_threads(Some(2));
        let (ok, failed) = ens
            .run(|s| {
                if s == 12 {
                    Err(Error::BlowUp { time: 0.5, norm: 1e7 })
                } else {
                    Ok(s)
                }
            })
            .unwrap();
        assert_eq!(ok, vec![10, 11, 13]);
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].seed, 12);
        let err = ens.run(|_| -> Result<()> { Err(Error::InvalidParameter("x".into())) });
        assert!(err.is_err());
        assert!(Ensemble::new(0, 0).run(Ok).is_err());
    }
}
