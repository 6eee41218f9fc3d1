//! The vanishing diffusion–capillarity limit: a ladder of `(ε_k, δ_k)`
//! levels driven by common noise, compared with a finite-volume reference
//! or with each other.

use serde::Serialize;

use super::{stats_by_index, stats_series, Ensemble};
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::fv::{l1_distance, FvScheme, FvState};
use crate::kinetic::auto_lambda_max;
use crate::noise::NoiseModel;
use crate::report::{PathFailure, Report};
use crate::solver::{Galerkin, SolutionPath, SolverConfig};
use crate::spectral::SpectralField;
use crate::stats::{loglog_slope, strictly_decreasing, trapezoid, Stats};
use crate::wiener::sample_wiener;

/// One rung of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub k: u32,
    pub epsilon: f64,
    pub delta: f64,
}

/// `ε_k = 2^{−k}`, `δ_k = ratio · ε_k²` for `k` in `ks`.
pub fn dyadic_ladder(ks: impl IntoIterator<Item = u32>, delta_ratio: f64) -> Vec<Level> {
    ks.into_iter()
        .map(|k| {
            let epsilon = 0.5f64.powi(k as i32);
            Level {
                k,
                epsilon,
                delta: delta_ratio * epsilon * epsilon,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LimitMode {
    /// Compare every level with the finite-volume solution of the limit
    /// equation on `fv_cells` cells per axis with step `fv_dt`.
    Reference { fv_cells: usize, fv_dt: f64 },
    /// Compare consecutive levels.
    SelfConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitOptions {
    pub mode: LimitMode,
    /// Upper bound on `δ_k / ε_k²`.
    pub scaling_bound: f64,
    /// Optional bound on the last error.
    pub threshold: Option<f64>,
    /// Use the flux regularised at level `k` for level `k`.
    pub regularize: bool,
}

impl LimitOptions {
    pub fn new(mode: LimitMode) -> Self {
        Self {
            mode,
            scaling_bound: 1.0,
            threshold: None,
            regularize: false,
        }
    }
}

/// Velocity-average gaps between consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessTable {
    /// `E‖⟨h_k − h_{k+1}, ρ⟩‖²_{L²((0,T)×M)}` for consecutive pairs.
    pub gaps: Vec<Stats>,
    pub decreasing: bool,
}

/// Per-path gaps `‖a_k − a_{k+1}‖²_{L²((0,T)×M)}` between consecutive
/// levels, where `levels[k][i][x]` is the velocity average of level `k` at
/// time `times[i]` and cell `x` of volume `cell_volume`. The time integral
/// uses the trapezoid rule.
pub fn compactness_gaps(
    levels: &[Vec<Vec<f64>>],
    times: &[f64],
    cell_volume: f64,
) -> Result<Vec<f64>> {
    levels
        .windows(2)
        .map(|w| l2_gap_sq(&w[0], &w[1], times, cell_volume))
        .collect()
}

fn l2_gap_sq(a: &[Vec<f64>], b: &[Vec<f64>], times: &[f64], vol: f64) -> Result<f64> {
    if a.len() != times.len() || b.len() != times.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: a.len().min(b.len()),
        });
    }
    let per_time: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * vol)
        .collect();
    Ok(trapezoid(times, &per_time))
}

/// Aggregates per-path gaps from [`compactness_gaps`].
pub fn kinetic_compactness(per_path: &[Vec<f64>]) -> CompactnessTable {
    let len = per_path.first().map_or(0, Vec::len);
    let gaps = stats_by_index(per_path, len);
    let means: Vec<f64> = gaps.iter().map(|s| s.mean).collect();
    CompactnessTable {
        decreasing: strictly_decreasing(&means),
        gaps,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitStudyReport {
    pub levels: Vec<Level>,
    pub mode: LimitMode,
    pub times: Vec<f64>,
    /// Reference mode: `E‖u_k − u_ref‖_{L¹((0,T)×M)}` per level.
    /// Self-convergence: `E‖u_k − u_{k+1}‖_{L¹((0,T)×M)}` per pair.
    pub errors: Vec<Stats>,
    /// Slope of `log error` against `log ε_k`; no rate is claimed, this is
    /// descriptive only.
    pub fitted_rate: f64,
    /// Reference mode: `E‖⟨h_k − h_ref, ρ⟩‖²_{L²((0,T)×M)}` per level with
    /// `ρ = ½χ_{[−L, L]}`.
    pub reference_gaps: Option<Vec<Stats>>,
    pub compactness: CompactnessTable,
    /// Velocity box for `ρ`: `1.25 · max |u|` over all levels and paths,
    /// so `⟨h, ρ⟩ = u` on every compared sample.
    pub lambda_max: f64,
    pub errors_decreasing: bool,
    pub below_threshold: Option<bool>,
    pub seeds: Vec<u64>,
    pub failures: Vec<PathFailure>,
}

impl LimitStudyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.errors_decreasing
            && self.below_threshold.unwrap_or(true)
            && self.compactness.decreasing
    }

    pub fn to_report(&self, experiment: &str, config_echo: serde_json::Value) -> Report {
        let mut r = Report::new(experiment, config_echo, self.seeds.clone());
        let ks: Vec<f64> = self.levels.iter().map(|l| l.k as f64).collect();
        let error_keys = match self.mode {
            LimitMode::Reference { .. } => &ks[..],
            LimitMode::SelfConvergence => &ks[..ks.len() - 1],
        };
        let mut errors = stats_series("limit_errors", "k", error_keys, &[("l1_error", &self.errors)]);
        if let Some(g) = &self.reference_gaps {
            errors.columns.extend(["average_gap_mean", "average_gap_se"].map(String::from));
            for (row, s) in errors.rows.iter_mut().zip(g) {
                row.extend([s.mean, s.se.unwrap_or(f64::NAN)]);
            }
        }
        r.per_time_series.push(errors);
        r.per_time_series.push(stats_series(
            "compactness",
            "k",
            &ks[..ks.len() - 1],
            &[("consecutive_gap", &self.compactness.gaps)],
        ));
        r.flag("errors_strictly_decreasing", self.errors_decreasing);
        r.flag("velocity_average_gaps_decreasing", self.compactness.decreasing);
        if let Some(b) = self.below_threshold {
            r.flag("final_error_below_threshold", b);
        }
        r.note("levels", &self.levels);
        r.note("mode", self.mode);
        r.note("fitted_rate", self.fitted_rate);
        r.note("lambda_max", self.lambda_max);
        r.note(
            "criterion",
            "monotone decrease over the ladder is an empirical proxy; convergence holds along a subsequence and no rate is asserted",
        );
        r.failures = self.failures.clone();
        r
    }
}

/// Per-path outcome: L¹ errors, reference gaps, consecutive gaps, sup|u|,
/// snapshot times.
type PathOutcome = (Vec<f64>, Vec<f64>, Vec<f64>, f64, Vec<f64>);

/// Runs every level of the ladder on each member's Brownian path and
/// measures convergence in `L¹((0,T)×M)` and of velocity averages.
///
/// `base` fixes the lattice, step, horizon and snapshot stride; each level
/// substitutes its own `(ε, δ)`.
pub fn limit_study(
    levels: &[Level],
    base: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    ensemble: &Ensemble,
    options: &LimitOptions,
) -> Result<LimitStudyReport> {
    if levels.len() < 2 {
        return Err(Error::InvalidParameter("a ladder needs at least two levels".into()));
    }
    let configs: Vec<SolverConfig> = levels
        .iter()
        .map(|l| {
            let mut c = base.clone();
            c.epsilon = l.epsilon;
            c.delta = l.delta;
            c.validate()?;
            c.validate_scaling(options.scaling_bound)?;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let fluxes: Vec<FluxModel> = levels
        .iter()
        .map(|l| if options.regularize { flux.regularize(l.k) } else { flux.clone() })
        .collect();
    let solvers = configs
        .iter()
        .zip(&fluxes)
        .map(|(c, f)| Galerkin::new(c, f, noise))
        .collect::<Result<Vec<_>>>()?;
    let u0 = solvers[0].project(u0)?;
    let grid = u0.grid().clone();
    let n = grid.n_per_axis();
    let spacing = base.dt * base.sample_every as f64;

    let reference = match options.mode {
        LimitMode::Reference { fv_cells, fv_dt } => {
            if fv_cells % n != 0 {
                return Err(Error::MeshMismatch(format!(
                    "FV mesh {fv_cells} is not a multiple of the spectral lattice {n}"
                )));
            }
            let stride = (spacing / fv_dt).round();
            if stride < 1.0 || (stride * fv_dt - spacing).abs() > 1e-9 * spacing {
                return Err(Error::InvalidParameter(format!(
                    "snapshot spacing {spacing} is not a multiple of the FV step {fv_dt}"
                )));
            }
            let scheme = FvScheme::new(flux, noise, fv_cells)?;
            let fv_u0 = FvState::from_spectral(&u0, fv_cells)?;
            Some((scheme, fv_u0, fv_dt, stride as usize))
        }
        LimitMode::SelfConvergence => None,
    };
    let fine_dt = match options.mode {
        LimitMode::Reference { fv_dt, .. } => fv_dt.min(base.dt),
        LimitMode::SelfConvergence => base.dt,
    };

    let (outcomes, failures) = ensemble.run(|seed| -> Result<PathOutcome> {
        let w = sample_wiener(seed, fine_dt, base.t_end)?;
        let paths = solvers
            .iter()
            .map(|s| s.simulate(&u0, &w))
            .collect::<Result<Vec<SolutionPath>>>()?;
        let times = paths[0].times.clone();
        let mut sup = paths.iter().map(SolutionPath::sup_abs).fold(0.0, f64::max);
        match &reference {
            Some((scheme, fv_u0, fv_dt, stride)) => {
                let fv = scheme.simulate(fv_u0, &w, *fv_dt, base.t_end, *stride)?;
                if fv.snapshots.len() != times.len()
                    || fv.times().iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-9)
                {
                    return Err(Error::MeshMismatch(
                        "FV and Galerkin snapshot times differ".into(),
                    ));
                }
                // the comparison mesh is the spectral lattice, in cell averages
                let factor = fv.snapshots[0].mesh_n / n;
                let ref_avg: Vec<FvState> = fv
                    .snapshots
                    .iter()
                    .map(|s| s.coarsened(factor))
                    .collect::<Result<_>>()?;
                sup = ref_avg.iter().map(FvState::sup_abs).fold(sup, f64::max);
                let mut errors = Vec::with_capacity(paths.len());
                let mut level_avg = Vec::with_capacity(paths.len());
                for p in &paths {
                    let cells = p
                        .snapshots
                        .iter()
                        .map(|s| FvState::from_spectral(s, n))
                        .collect::<Result<Vec<_>>>()?;
                    let e = p
                        .snapshots
                        .iter()
                        .zip(&fv.snapshots)
                        .map(|(s, r)| l1_distance(&FvState::from_spectral(s, r.mesh_n)?, r))
                        .collect::<Result<Vec<f64>>>()?;
                    errors.push(trapezoid(&times, &e));
                    sup = cells.iter().map(FvState::sup_abs).fold(sup, f64::max);
                    level_avg.push(cells.into_iter().map(|c| c.cells).collect::<Vec<_>>());
                }
                let ref_cells: Vec<Vec<f64>> = ref_avg.into_iter().map(|c| c.cells).collect();
                let vol = grid.quad_weight();
                let ref_gaps = level_avg
                    .iter()
                    .map(|a| l2_gap_sq(a, &ref_cells, &times, vol))
                    .collect::<Result<Vec<f64>>>()?;
                let gaps = compactness_gaps(&level_avg, &times, vol)?;
                Ok((errors, ref_gaps, gaps, sup, times))
            }
            None => {
                let samples: Vec<Vec<Vec<f64>>> = paths
                    .iter()
                    .map(|p| p.snapshots.iter().map(SpectralField::to_grid).collect())
                    .collect();
                let w = grid.quad_weight();
                let errors = samples
                    .windows(2)
                    .map(|pair| {
                        let per_time: Vec<f64> = pair[0]
                            .iter()
                            .zip(&pair[1])
                            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * w)
                            .collect();
                        trapezoid(&times, &per_time)
                    })
                    .collect();
                let gaps = compactness_gaps(&samples, &times, w)?;
                Ok((errors, Vec::new(), gaps, sup, times))
            }
        }
    })?;

    let times = outcomes.first().map(|o| o.4.clone()).unwrap_or_default();
    let n_err = match options.mode {
        LimitMode::Reference { .. } => levels.len(),
        LimitMode::SelfConvergence => levels.len() - 1,
    };
    let err_samples: Vec<Vec<f64>> = outcomes.iter().map(|o| o.0.clone()).collect();
    let errors = stats_by_index(&err_samples, n_err);
    let reference_gaps = reference.as_ref().map(|_| {
        let s: Vec<Vec<f64>> = outcomes.iter().map(|o| o.1.clone()).collect();
        stats_by_index(&s, levels.len())
    });
    let gap_samples: Vec<Vec<f64>> = outcomes.iter().map(|o| o.2.clone()).collect();
    let compactness = kinetic_compactness(&gap_samples);
    let sup = outcomes.iter().map(|o| o.3).fold(0.0, f64::max);

    let means: Vec<f64> = errors.iter().map(|s| s.mean).collect();
    let eps: Vec<f64> = levels.iter().take(n_err).map(|l| l.epsilon).collect();
    let fitted_rate = if means.iter().all(|&m| m > 0.0) {
        loglog_slope(&eps, &means)
    } else {
        f64::NAN
    };
    Ok(LimitStudyReport {
        levels: levels.to_vec(),
        mode: options.mode,
        errors_decreasing: !outcomes.is_empty() && strictly_decreasing(&means),
        below_threshold: options
            .threshold
            .map(|t| means.last().is_some_and(|&m| m <= t)),
        times,
        errors,
        fitted_rate,
        reference_gaps,
        compactness,
        lambda_max: auto_lambda_max(sup),
        seeds: ensemble.seeds(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialCondition;

    #[test]
    fn ladder_values() {
        let l = dyadic_ladder(2..=4, 1.0);
        assert_eq!(l.len(), 3);
        assert_eq!(l[0].epsilon, 0.25);
        assert_eq!(l[2].delta, 1.0 / 256.0);
    }

    #[test]
    fn scaling_violation_rejected() {
        let base = SolverConfig::new(0.1, 0.01, 1, 16, 1e-3, 0.01);
        let u0 = InitialCondition::sine(1.0).to_field(&base.grid().unwrap());
        let bad: Vec<Level> = [2u32, 3]
            .iter()
            .map(|&k| Level { k, epsilon: 0.5f64.powi(k as i32), delta: 0.5f64.powi(k as i32) })
            .collect();
        let opts = LimitOptions::new(LimitMode::SelfConvergence);
        let err = limit_study(&bad, &base, &FluxModel::burgers1d(), &NoiseModel::zero(), &u0, &Ensemble::new(2, 0), &opts).unwrap_err();
        assert!(err.to_string().contains("delta/epsilon^2 exceeds bound"), "{err}");
        let zero = vec![Level { k: 0, epsilon: 0.0, delta: 0.0 }, Level { k: 1, epsilon: 0.1, delta: 0.01 }];
        assert!(limit_study(&zero, &base, &FluxModel::burgers1d(), &NoiseModel::zero(), &u0, &Ensemble::new(2, 0), &opts).is_err());
    }

    #[test]
    fn compactness_trivial_cases() {
        let times = [0.0, 0.5, 1.0];
        let a = vec![vec![0.3, -0.2]; 3];
        let same = compactness_gaps(&[a.clone(), a.clone(), a.clone()], &times, 0.5).unwrap();
        assert_eq!(same, vec![0.0, 0.0]);
        let zeros = vec![vec![0.0, 0.0]; 3];
        assert_eq!(compactness_gaps(&[zeros.clone(), zeros], &times, 0.5).unwrap(), vec![0.0]);
        let b = vec![vec![1.3, -0.2]; 3];
        // (1.0)² · 0.5 per time, integrated over [0, 1]
        assert!((compactness_gaps(&[a, b], &times, 0.5).unwrap()[0] - 0.5).abs() < 1e-15);
        let t = kinetic_compactness(&[vec![3.0, 2.0, 1.0], vec![3.0, 2.0, 1.0]]);
        assert!(t.decreasing);
        assert_eq!(t.gaps[1].se, Some(0.0));
    }

    #[test]
    fn additive_noise_reference_gap_is_small() {
        // f = 0, Φ ≡ σ₀: both solvers add the same Brownian motion to the
        // mean and only the small diffusion separates them
        let base = SolverConfig::new(0.1, 0.01, 1, 16, 1e-4, 0.1).with_sample_every(100);
        let u0 = InitialCondition::sine(0.5).to_field(&base.grid().unwrap());
        let levels = dyadic_ladder(6..=7, 1.0);
        let opts = LimitOptions {
            threshold: Some(1e-2),
            ..LimitOptions::new(LimitMode::Reference { fv_cells: 64, fv_dt: 1e-4 })
        };
        let r = limit_study(&levels, &base, &FluxModel::zero(1), &NoiseModel::constant(0.3), &u0, &Ensemble::new(2, 0), &opts).unwrap();
        assert!(r.errors.iter().all(|s| s.mean < 1e-2), "{:?}", r.errors);
        assert_eq!(r.below_threshold, Some(true));
        assert!(r.errors_decreasing);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn burgers_ladder_small() {
        let base = SolverConfig::new(0.1, 0.01, 1, 32, 2e-4, 0.2).with_sample_every(50);
        let u0 = InitialCondition::sine(1.0).to_field(&base.grid().unwrap());
        let opts = LimitOptions::new(LimitMode::Reference { fv_cells: 256, fv_dt: 1e-4 });
        let r = limit_study(&dyadic_ladder(2..=4, 1.0), &base, &FluxModel::burgers1d(), &NoiseModel::linear(0.2), &u0, &Ensemble::new(2, 1), &opts).unwrap();
        assert_eq!(r.errors.len(), 3);
        assert_eq!(r.compactness.gaps.len(), 2);
        assert_eq!(r.times.len(), 21);
        assert!(r.lambda_max >= 1.0);
        let rep = r.to_report("limit-study", serde_json::Value::Null);
        assert_eq!(rep.per_time_series[0].rows.len(), 3);
    }
}
