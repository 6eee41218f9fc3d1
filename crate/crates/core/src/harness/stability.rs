//! Two solutions driven by the same noise: growth of their distance
//! relative to the initial distance.

use serde::Serialize;

use super::Ensemble;
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::noise::NoiseModel;
use crate::report::{PathFailure, Report, Series};
use crate::solver::{Galerkin, SolverConfig};
use crate::spectral::SpectralField;
use crate::stats::Stats;
use crate::wiener::sample_wiener;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityPoint {
    /// `‖u₀ − v₀‖²`.
    pub initial_gap_sq: f64,
    /// `sup_t ‖u − v‖²` over the snapshot times.
    pub sup_gap_sq: Stats,
    /// `E sup_t ‖u − v‖² / ‖u₀ − v₀‖²`.
    pub ratio: f64,
    pub ratio_se: Option<f64>,
    /// Set when `u₀ = v₀`; the ratio is then reported as 0.
    pub identical_data: bool,
    pub failures: Vec<PathFailure>,
}

/// Coupled stability ratio for one pair of initial data.
pub fn stability_experiment(
    config: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    v0: &SpectralField,
    ensemble: &Ensemble,
) -> Result<StabilityPoint> {
    let solver = Galerkin::new(config, flux, noise)?;
    let (u0, v0) = (solver.project(u0)?, solver.project(v0)?);
    let initial_gap_sq = u0.axpy(-1.0, &v0).l2_norm_sq();
    if initial_gap_sq == 0.0 {
        let zero = Stats::from_samples(&vec![0.0; ensemble.n_paths.max(1)]);
        return Ok(StabilityPoint {
            initial_gap_sq,
            sup_gap_sq: zero,
            ratio: 0.0,
            ratio_se: zero.se,
            identical_data: true,
            failures: Vec::new(),
        });
    }
    let (sups, failures) = ensemble.run(|seed| {
        let w = sample_wiener(seed, config.dt, config.t_end)?;
        let a = solver.simulate(&u0, &w)?;
        let b = solver.simulate(&v0, &w)?;
        Ok(a.snapshots
            .iter()
            .zip(&b.snapshots)
            .map(|(x, y)| x.axpy(-1.0, y).l2_norm_sq())
            .fold(0.0, f64::max))
    })?;
    let sup_gap_sq = Stats::from_samples(&sups);
    Ok(StabilityPoint {
        initial_gap_sq,
        ratio: sup_gap_sq.mean / initial_gap_sq,
        ratio_se: sup_gap_sq.se.map(|s| s / initial_gap_sq),
        sup_gap_sq,
        identical_data: false,
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySweep {
    /// `‖u₀ − v₀‖` for each point.
    pub scales: Vec<f64>,
    pub points: Vec<StabilityPoint>,
    /// `max ratio / min ratio`.
    pub variation: f64,
    pub max_variation: f64,
    pub seeds: Vec<u64>,
}

impl StabilitySweep {
    pub fn passed(&self) -> bool {
        self.variation < self.max_variation && self.points.iter().all(|p| p.failures.is_empty())
    }

    pub fn to_report(&self, experiment: &str, config_echo: serde_json::Value) -> Report {
        let mut r = Report::new(experiment, config_echo, self.seeds.clone());
        let mut s = Series::new("stability", &["scale", "initial_gap_sq", "sup_gap_sq_mean", "sup_gap_sq_se", "ratio", "ratio_se"]);
        for (scale, p) in self.scales.iter().zip(&self.points) {
            s.push(vec![
                *scale,
                p.initial_gap_sq,
                p.sup_gap_sq.mean,
                p.sup_gap_sq.se.unwrap_or(f64::NAN),
                p.ratio,
                p.ratio_se.unwrap_or(f64::NAN),
            ]);
        }
        r.per_time_series.push(s);
        r.flag("ratio_variation", self.variation < self.max_variation);
        r.note("variation", self.variation);
        r.note("max_variation", self.max_variation);
        r.failures = self.points.iter().flat_map(|p| p.failures.clone()).collect();
        r
    }
}

/// Runs [`stability_experiment`] for `v₀ = u₀ + s · d/‖d‖` over the given
/// scales `s`; every scale reuses the same seeds.
#[allow(clippy::too_many_arguments)]
pub fn stability_sweep(
    config: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    direction: &SpectralField,
    scales: &[f64],
    ensemble: &Ensemble,
    max_variation: f64,
) -> Result<StabilitySweep> {
    let norm = direction.l2_norm_sq().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("perturbation direction is zero".into()));
    }
    if scales.is_empty() || scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidParameter("perturbation scales must be positive".into()));
    }
    let points = scales
        .iter()
        .map(|&s| {
            let v0 = u0.axpy(s / norm, direction);
            stability_experiment(config, flux, noise, u0, &v0, ensemble)
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(StabilitySweep {
        scales: scales.to_vec(),
        points,
        variation: hi / lo,
        max_variation,
        seeds: ensemble.seeds(),
    })
}
