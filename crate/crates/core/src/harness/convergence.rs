//! Time-step convergence, weak-form residuals and the temporal
//! translation modulus of the kinetic function.

use serde::Serialize;

use super::{stats_by_index, stats_series, Ensemble};
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::kinetic::{auto_lambda_max, default_sobolev_order, kinetic_of, TranslationTable};
use crate::noise::NoiseModel;
use crate::report::{PathFailure, Report};
use crate::solver::{weak_residual, Galerkin, SolutionPath, SolverConfig};
use crate::spectral::SpectralField;
use crate::stats::{loglog_slope, Stats};
use crate::wiener::sample_wiener;

#[derive(Debug, Clone, Serialize)]
pub struct StrongOrderReport {
    pub dts: Vec<f64>,
    pub dt_reference: f64,
    /// `‖u_dt(T) − u_ref(T)‖²` per step size.
    pub error_sq: Vec<Stats>,
    /// `(E‖u_dt(T) − u_ref(T)‖²)^{1/2}`.
    pub rms_error: Vec<f64>,
    /// Least-squares slope of `log rms_error` against `log dt`.
    pub slope: f64,
    pub seeds: Vec<u64>,
    pub failures: Vec<PathFailure>,
}

impl StrongOrderReport {
    pub fn slope_within(&self, target: f64, tolerance: f64) -> bool {
        self.failures.is_empty() && (self.slope - target).abs() <= tolerance
    }

    pub fn to_report(
        &self,
        experiment: &str,
        config_echo: serde_json::Value,
        target: f64,
        tolerance: f64,
    ) -> Report {
        let mut r = Report::new(experiment, config_echo, self.seeds.clone());
        let mut s = stats_series("strong_order", "dt", &self.dts, &[("error_sq", &self.error_sq)]);
        s.columns.push("rms_error".into());
        for (row, e) in s.rows.iter_mut().zip(&self.rms_error) {
            row.push(*e);
        }
        r.per_time_series.push(s);
        r.flag("strong_order", self.slope_within(target, tolerance));
        r.note("slope", self.slope);
        r.note("dt_reference", self.dt_reference);
        r.failures = self.failures.clone();
        r
    }
}

/// Strong error at `T` of the scheme at each `dt` against a run at
/// `dt_reference` driven by the same fine Brownian path.
pub fn strong_order_study(
    config: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    dts: &[f64],
    dt_reference: f64,
    ensemble: &Ensemble,
) -> Result<StrongOrderReport> {
    if dts.len() < 2 {
        return Err(Error::InvalidParameter("need at least two step sizes".into()));
    }
    let solver_at = |dt: f64| {
        let mut c = config.clone();
        c.dt = dt;
        c.sample_every = usize::MAX;
        Galerkin::new(&c, flux, noise)
    };
    let reference = solver_at(dt_reference)?;
    let coarse = dts.iter().map(|&dt| solver_at(dt)).collect::<Result<Vec<_>>>()?;
    let u0 = reference.project(u0)?;
    let (errors, failures) = ensemble.run(|seed| {
        let w = sample_wiener(seed, dt_reference, config.t_end)?;
        let exact = reference.simulate(&u0, &w)?;
        coarse
            .iter()
            .map(|s| {
                let p = s.simulate(&u0, &w)?;
                Ok(p.terminal().axpy(-1.0, exact.terminal()).l2_norm_sq())
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let error_sq = stats_by_index(&errors, dts.len());
    let rms_error: Vec<f64> = error_sq.iter().map(|s| s.mean.sqrt()).collect();
    Ok(StrongOrderReport {
        slope: loglog_slope(dts, &rms_error),
        dts: dts.to_vec(),
        dt_reference,
        error_sq,
        rms_error,
        seeds: ensemble.seeds(),
        failures,
    })
}

/// Residuals below this are treated as exact zeros: their ratio carries
/// no information about the step size.
pub const WEAK_RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct WeakResidualReport {
    pub dts: Vec<f64>,
    pub test_functions: Vec<String>,
    /// `residuals[i][j]`: test function `i`, step `dts[j]`, pathwise
    /// maximum over the step lattice.
    pub residuals: Vec<Vec<Stats>>,
    /// Mean residual at the first step over the mean at the last.
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    pub failures: Vec<PathFailure>,
}

impl WeakResidualReport {
    /// Each test function either shrinks by `min_ratio` or sits at the
    /// floor at both ends of the refinement.
    pub fn per_function_pass(&self, min_ratio: f64) -> Vec<bool> {
        self.residuals
            .iter()
            .zip(&self.ratios)
            .map(|(r, &q)| {
                let (a, b) = (r[0].mean, r[r.len() - 1].mean);
                q >= min_ratio || (a < WEAK_RESIDUAL_FLOOR && b < WEAK_RESIDUAL_FLOOR)
            })
            .collect()
    }

    pub fn to_report(&self, experiment: &str, config_echo: serde_json::Value, min_ratio: f64) -> Report {
        let mut r = Report::new(experiment, config_echo, self.seeds.clone());
        let cols: Vec<(&str, &[Stats])> = Vec::new();
        let mut s = stats_series("weak_residual", "dt", &self.dts, &cols);
        for (name, res) in self.test_functions.iter().zip(&self.residuals) {
            s.columns.push(format!("{name}_mean"));
            s.columns.push(format!("{name}_se"));
            for (row, st) in s.rows.iter_mut().zip(res) {
                row.push(st.mean);
                row.push(st.se.unwrap_or(f64::NAN));
            }
        }
        r.per_time_series.push(s);
        for ((name, ok), q) in self
            .test_functions
            .iter()
            .zip(self.per_function_pass(min_ratio))
            .zip(&self.ratios)
        {
            r.flag(&format!("residual_decay_{name}"), ok);
            r.note(&format!("ratio_{name}"), q);
        }
        r.failures = self.failures.clone();
        r
    }
}

/// Pathwise weak-form residuals for each test function and step size;
/// all step sizes share each member's Brownian path.
pub fn weak_residual_study(
    config: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    test_functions: &[(String, SpectralField)],
    dts: &[f64],
    ensemble: &Ensemble,
) -> Result<WeakResidualReport> {
    if dts.is_empty() || test_functions.is_empty() {
        return Err(Error::InvalidParameter("need step sizes and test functions".into()));
    }
    let fine = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let solvers = dts
        .iter()
        .map(|&dt| {
            let mut c = config.clone();
            c.dt = dt;
            c.sample_every = 1;
            Galerkin::new(&c, flux, noise)
        })
        .collect::<Result<Vec<_>>>()?;
    let u0 = solvers[0].project(u0)?;
    let (per_path, failures) = ensemble.run(|seed| {
        let w = sample_wiener(seed, fine, config.t_end)?;
        let paths = solvers
            .iter()
            .map(|s| s.simulate(&u0, &w))
            .collect::<Result<Vec<SolutionPath>>>()?;
        let mut out = Vec::with_capacity(test_functions.len() * dts.len());
        for (_, phi) in test_functions {
            for p in &paths {
                out.push(weak_residual(p, phi, flux, noise)?);
            }
        }
        Ok(out)
    })?;
    let flat = stats_by_index(&per_path, test_functions.len() * dts.len());
    let residuals: Vec<Vec<Stats>> = flat.chunks(dts.len()).map(|c| c.to_vec()).collect();
    let ratios = residuals
        .iter()
        .map(|r| r[0].mean / r[r.len() - 1].mean)
        .collect();
    Ok(WeakResidualReport {
        dts: dts.to_vec(),
        test_functions: test_functions.iter().map(|(n, _)| n.clone()).collect(),
        residuals,
        ratios,
        seeds: ensemble.seeds(),
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    pub thetas: Vec<f64>,
    pub modulus: Vec<Stats>,
    pub slope: f64,
    pub lambda_max: f64,
    pub m_lambda: usize,
    pub order: u32,
    /// Lattice samples with `|u| > L`; zero by construction of `L`.
    pub clipped: usize,
    pub seeds: Vec<u64>,
    pub failures: Vec<PathFailure>,
}

impl TranslationReport {
    pub fn to_report(&self, experiment: &str, config_echo: serde_json::Value, min_slope: f64) -> Report {
        let mut r = Report::new(experiment, config_echo, self.seeds.clone());
        r.per_time_series
            .push(stats_series("translation", "theta", &self.thetas, &[("modulus", &self.modulus)]));
        r.flag("translation_slope", self.failures.is_empty() && self.slope >= min_slope);
        r.note("slope", self.slope);
        r.note("lambda_max", self.lambda_max);
        r.note("m_lambda", self.m_lambda);
        r.note("sobolev_order", self.order);
        r.failures = self.failures.clone();
        r
    }
}

/// `E sup_{τ ≤ θ} ∫ ‖h(t+τ) − h(t)‖_{H^{−N}} dt` for `θ = lag · Δ`, where
/// `Δ` is the snapshot spacing. The velocity box is `1.25 · max |u|` over
/// the ensemble, shared by all paths.
#[allow(clippy::too_many_arguments)]
pub fn translation_study(
    config: &SolverConfig,
    flux: &FluxModel,
    noise: &NoiseModel,
    u0: &SpectralField,
    lags: &[usize],
    m_lambda: usize,
    order: Option<u32>,
    ensemble: &Ensemble,
) -> Result<TranslationReport> {
    if lags.len() < 2 || lags.contains(&0) {
        return Err(Error::InvalidParameter("need at least two positive lags".into()));
    }
    let solver = Galerkin::new(config, flux, noise)?;
    let u0 = solver.project(u0)?;
    let order = order.unwrap_or_else(|| default_sobolev_order(config.dim));
    let (paths, failures) = ensemble.run(|seed| {
        let w = sample_wiener(seed, config.dt, config.t_end)?;
        solver.simulate(&u0, &w)
    })?;
    let spacing = config.dt * config.sample_every as f64;
    let thetas: Vec<f64> = lags.iter().map(|&l| l as f64 * spacing).collect();
    let sup = paths.iter().map(SolutionPath::sup_abs).fold(0.0, f64::max);
    let lambda_max = auto_lambda_max(sup);
    let per_path = crate::ensemble::par_map(paths.len(), ensemble.threads, |i| {
        let h = kinetic_of(&paths[i], lambda_max, m_lambda)?;
        let table = TranslationTable::new(&h, order)?;
        let m = thetas
            .iter()
            .map(|&th| table.modulus(th))
            .collect::<Result<Vec<f64>>>()?;
        Ok((m, h.clipped))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let clipped = per_path.iter().map(|p| p.1).sum();
    let values: Vec<Vec<f64>> = per_path.into_iter().map(|p| p.0).collect();
    let modulus = stats_by_index(&values, thetas.len());
    let means: Vec<f64> = modulus.iter().map(|s| s.mean).collect();
    Ok(TranslationReport {
        slope: loglog_slope(&thetas, &means),
        thetas,
        modulus,
        lambda_max,
        m_lambda,
        order,
        clipped,
        seeds: ensemble.seeds(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialCondition;
    use std::f64::consts::PI;

    #[test]
    fn strong_error_vanishes_without_noise_or_flux() {
        // the linear part is integrated exactly, so every step size agrees
        let c = SolverConfig::new(0.05, 0.0025, 1, 16, 1e-3, 0.1);
        let u0 = InitialCondition::sine(1.0).to_field(&c.grid().unwrap());
        let r = strong_order_study(&c, &FluxModel::zero(1), &NoiseModel::zero(), &u0, &[1e-2, 5e-3], 1e-3, &Ensemble::new(2, 0)).unwrap();
        assert!(r.rms_error.iter().all(|&e| e < 1e-14), "{:?}", r.rms_error);
    }

    #[test]
    fn strong_order_of_linear_noise_is_one_half() {
        let c = SolverConfig::new(0.05, 0.0025, 1, 16, 1e-3, 0.5);
        let u0 = InitialCondition::Constant { value: 1.0 }.to_field(&c.grid().unwrap());
        let r = strong_order_study(&c, &FluxModel::zero(1), &NoiseModel::linear(0.5), &u0, &[1e-1, 2.5e-2, 6.25e-3], 1.5625e-3, &Ensemble::new(200, 0)).unwrap();
        assert!(r.slope_within(0.5, 0.15), "slope {}", r.slope);
    }

    #[test]
    fn weak_residual_mass_is_exact_and_modes_decay() {
        let c = SolverConfig::new(0.05, 0.0025, 1, 32, 1e-3, 0.2);
        let g = c.grid().unwrap();
        let u0 = InitialCondition::sine(1.0).to_field(&g);
        let tests = vec![
            ("one".to_string(), SpectralField::from_fn(&g, |_| 1.0)),
            ("cos2pix".to_string(), SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).cos())),
        ];
        let r = weak_residual_study(&c, &FluxModel::burgers1d(), &NoiseModel::linear(0.2), &u0, &tests, &[4e-3, 1e-3], &Ensemble::new(3, 0)).unwrap();
        assert!(r.residuals[0].iter().all(|s| s.mean < WEAK_RESIDUAL_FLOOR));
        assert!(r.per_function_pass(1.5).iter().all(|&b| b), "{:?}", r.ratios);
    }

    #[test]
    fn translation_grows_with_lag() {
        let c = SolverConfig::new(0.05, 0.0025, 1, 32, 1e-3, 0.32).with_sample_every(10);
        let u0 = InitialCondition::sine(1.0).to_field(&c.grid().unwrap());
        let r = translation_study(&c, &FluxModel::burgers1d(), &NoiseModel::linear(0.2), &u0, &[1, 2, 4, 8], 16, None, &Ensemble::new(2, 0)).unwrap();
        assert_eq!(r.clipped, 0);
        assert_eq!(r.order, 4);
        assert!(r.modulus.windows(2).all(|w| w[1].mean >= w[0].mean));
        assert!(r.slope > 0.0);
    }
}
