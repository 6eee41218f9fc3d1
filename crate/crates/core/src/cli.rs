//! Run configuration (TOML) and experiment dispatch. The binary only
//! parses flags and calls [`run`]; everything here is usable as a library.
//!
//! Exit codes: 0 pass, 1 experiment failure, 2 runtime abort (blow-up, loss
//! of finiteness), 3 invalid configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{check_geometry_compat, nondegeneracy_measure, random_band_limited, FluxModel, FluxParams};
use crate::harness::{
    dyadic_ladder, limit_study, path_series, run_ensemble, stability_sweep, translation_study,
    EnergyOptions, Ensemble, Level, LimitMode, LimitOptions,
};
use crate::initial::InitialCondition;
use crate::kinetic::{auto_lambda_max, dissipation_density, kinetic_of, truncation_reconstruct};
use crate::noise::NoiseModel;
use crate::report::{Report, Series};
use crate::solver::{Galerkin, SolverConfig};
use crate::spectral::TorusGrid;
use crate::wiener::sample_wiener;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    EnergyCheck,
    StabilityCheck,
    LimitStudy,
    KineticDiag,
    Nondegeneracy,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::EnergyCheck => "energy-check",
            Self::StabilityCheck => "stability-check",
            Self::LimitStudy => "limit-study",
            Self::KineticDiag => "kinetic-diag",
            Self::Nondegeneracy => "nondegeneracy",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    /// Defaults to `burgers1d` in 1D and `stream2d-smooth` in 2D.
    pub preset: Option<String>,
    pub amplitude: Option<f64>,
    pub sigma0: Option<f64>,
    pub lambda_box: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_noise")]
    pub preset: String,
    pub strength: Option<f64>,
}

fn default_noise() -> String {
    "noise-linear".into()
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            preset: default_noise(),
            strength: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    #[serde(default = "three")]
    pub se_factor: f64,
    pub c0_override: Option<f64>,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            se_factor: 3.0,
            c0_override: None,
        }
    }
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "ten")]
    pub max_variation: f64,
    /// Perturbation direction: random trigonometric polynomial.
    #[serde(default = "four")]
    pub direction_max_mode: i64,
    #[serde(default = "seven")]
    pub direction_seed: u64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            scales: default_scales(),
            max_variation: 10.0,
            direction_max_mode: 4,
            direction_seed: 7,
        }
    }
}

fn default_scales() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}
fn ten() -> f64 {
    10.0
}
fn four() -> i64 {
    4
}
fn seven() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    /// Dyadic levels `ε_k = 2^{−k}`, `δ_k = delta_ratio · ε_k²`.
    #[serde(default = "default_ks")]
    pub ks: Vec<u32>,
    #[serde(default = "one")]
    pub delta_ratio: f64,
    /// Explicit ladder; replaces `ks` and `delta_ratio` when given.
    pub ladder: Option<Vec<Level>>,
    #[serde(default = "one")]
    pub scaling_bound: f64,
    #[serde(flatten)]
    pub mode: LimitModeSection,
    pub threshold: Option<f64>,
    /// Regularise the flux at level `k` (defaults to true for 2D presets).
    pub regularize: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitModeSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_fv_cells")]
    pub fv_cells: usize,
    #[serde(default = "default_fv_dt")]
    pub fv_dt: f64,
}

impl Default for LimitSection {
    fn default() -> Self {
        Self {
            ks: default_ks(),
            delta_ratio: 1.0,
            ladder: None,
            scaling_bound: 1.0,
            mode: LimitModeSection {
                mode: default_mode(),
                fv_cells: default_fv_cells(),
                fv_dt: default_fv_dt(),
            },
            threshold: None,
            regularize: None,
        }
    }
}

fn default_ks() -> Vec<u32> {
    vec![2, 3, 4, 5, 6]
}
fn one() -> f64 {
    1.0
}
fn default_mode() -> String {
    "reference".into()
}
fn default_fv_cells() -> usize {
    1024
}
fn default_fv_dt() -> f64 {
    5e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticSection {
    #[serde(default = "default_m_lambda")]
    pub m_lambda: usize,
    /// Lags in snapshot spacings.
    #[serde(default = "default_lags")]
    pub lags: Vec<usize>,
    /// Negative Sobolev order; defaults to `ceil(d/2 + 3)`.
    pub order: Option<u32>,
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
}

impl Default for KineticSection {
    fn default() -> Self {
        Self {
            m_lambda: default_m_lambda(),
            lags: default_lags(),
            order: None,
            min_slope: default_min_slope(),
        }
    }
}

fn default_m_lambda() -> usize {
    32
}
fn default_lags() -> Vec<usize> {
    vec![2, 4, 8, 16]
}
fn default_min_slope() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondegeneracySection {
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    #[serde(default = "default_sphere")]
    pub samples: usize,
    /// `λ` range; defaults to the flux's certified box.
    pub lambda_range: Option<[f64; 2]>,
}

impl Default for NondegeneracySection {
    fn default() -> Self {
        Self {
            etas: default_etas(),
            samples: default_sphere(),
            lambda_range: None,
        }
    }
}

fn default_etas() -> Vec<f64> {
    vec![0.1, 0.03, 0.01, 0.003, 0.001]
}
fn default_sphere() -> usize {
    64
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Worker threads; does not affect results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    /// Output directory; not part of the echo so reports from different
    /// directories compare equal.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    pub solver: SolverConfig,
    #[serde(default)]
    pub flux: FluxSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default = "default_initial")]
    pub initial: InitialCondition,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub limit: LimitSection,
    #[serde(default)]
    pub kinetic: KineticSection,
    #[serde(default)]
    pub nondegeneracy: NondegeneracySection,
}

fn default_paths() -> usize {
    16
}

fn default_initial() -> InitialCondition {
    InitialCondition::sine(1.0)
}

/// Scalar overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(e) = o.experiment {
            self.experiment = e;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = o.paths {
            self.paths = p;
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    pub fn ensemble(&self) -> Ensemble {
        Ensemble::new(self.paths, self.seed).with_threads(self.threads)
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        self.solver.grid()
    }

    pub fn flux(&self) -> Result<FluxModel> {
        let grid = self.grid()?;
        let default = if self.solver.dim == 1 { "burgers1d" } else { "stream2d-smooth" };
        let name = self.flux.preset.as_deref().unwrap_or(default);
        let f = FluxModel::preset(
            name,
            Some(&grid),
            FluxParams {
                amplitude: self.flux.amplitude,
                sigma0: self.flux.sigma0,
                lambda_box: self.flux.lambda_box,
            },
        )?;
        if f.dim() != self.solver.dim {
            return Err(Error::Config(format!(
                "flux preset `{name}` is {}-dimensional but solver.dim = {}",
                f.dim(),
                self.solver.dim
            )));
        }
        Ok(f)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::preset(&self.noise.preset, self.noise.strength)
    }

    pub fn levels(&self) -> Vec<Level> {
        match &self.limit.ladder {
            Some(l) => l.clone(),
            None => dyadic_ladder(self.limit.ks.iter().copied(), self.limit.delta_ratio),
        }
    }

    pub fn limit_options(&self) -> Result<LimitOptions> {
        let mode = match self.limit.mode.mode.as_str() {
            "reference" => LimitMode::Reference {
                fv_cells: self.limit.mode.fv_cells,
                fv_dt: self.limit.mode.fv_dt,
            },
            "self-convergence" => LimitMode::SelfConvergence,
            other => {
                return Err(Error::Config(format!(
                    "limit.mode `{other}` (expected `reference` or `self-convergence`)"
                )))
            }
        };
        Ok(LimitOptions {
            mode,
            scaling_bound: self.limit.scaling_bound,
            threshold: self.limit.threshold,
            regularize: self.limit.regularize.unwrap_or(self.solver.dim == 2),
        })
    }

    /// Every physical and structural constraint, checked before any
    /// computation.
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.paths == 0 {
            return Err(Error::Config("paths must be >= 1".into()));
        }
        let flux = self.flux()?;
        let noise = self.noise()?;
        noise.validate(self.solver.dim, flux.lambda_box())?;
        let grid = self.grid()?;
        Galerkin::new(&self.solver, &flux, &noise)?.project(&self.initial.to_field(&grid))?;
        match self.experiment {
            Experiment::LimitStudy => {
                let levels = self.levels();
                if levels.len() < 2 {
                    return Err(Error::Config("limit.ks needs at least two levels".into()));
                }
                for l in &levels {
                    let mut c = self.solver.clone();
                    c.epsilon = l.epsilon;
                    c.delta = l.delta;
                    c.validate()?;
                    c.validate_scaling(self.limit.scaling_bound)?;
                }
                self.limit_options()?;
            }
            Experiment::StabilityCheck => {
                if self.stability.scales.is_empty() || self.stability.scales.iter().any(|&s| !(s > 0.0)) {
                    return Err(Error::Config("stability.scales must be positive".into()));
                }
            }
            Experiment::KineticDiag => {
                if self.kinetic.m_lambda < 8 {
                    return Err(Error::Config("kinetic.m_lambda must be >= 8".into()));
                }
                if self.kinetic.lags.len() < 2 || self.kinetic.lags.contains(&0) {
                    return Err(Error::Config("kinetic.lags needs two or more positive lags".into()));
                }
            }
            Experiment::Nondegeneracy => {
                if self.nondegeneracy.etas.is_empty() || self.nondegeneracy.etas.iter().any(|&e| !(e >= 0.0)) {
                    return Err(Error::Config("nondegeneracy.etas must be nonnegative".into()));
                }
            }
            Experiment::Simulate | Experiment::EnergyCheck => {}
        }
        Ok(())
    }
}

/// Parses and validates TOML text. Unknown keys are errors.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Abort = 2,
    ConfigError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_report(r: &Report) -> Self {
        if r.aborted() {
            Self::Abort
        } else if r.passed() {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn of_error(e: &Error) -> Self {
        if e.is_runtime_abort() || matches!(e, Error::Io(_) | Error::Json(_)) {
            Self::Abort
        } else {
            Self::ConfigError
        }
    }
}

/// Runs the configured experiment and returns its report.
pub fn dispatch(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let echo = serde_json::to_value(config)?;
    let flux = config.flux()?;
    let noise = config.noise()?;
    let grid = config.grid()?;
    let u0 = config.initial.to_field(&grid);
    let ens = config.ensemble();
    let s = &config.solver;
    let name = config.experiment.name();
    Ok(match config.experiment {
        Experiment::Simulate => simulate(config, &flux, &noise, echo)?,
        Experiment::EnergyCheck => {
            let opts = EnergyOptions {
                se_factor: config.energy.se_factor,
                c0_override: config.energy.c0_override,
            };
            run_ensemble(s, &flux, &noise, &u0, &ens, &opts)?.to_report(name, echo)
        }
        Experiment::StabilityCheck => {
            let st = &config.stability;
            let dir = random_band_limited(&grid, st.direction_max_mode, st.direction_seed);
            stability_sweep(s, &flux, &noise, &u0, &dir, &st.scales, &ens, st.max_variation)?
                .to_report(name, echo)
        }
        Experiment::LimitStudy => {
            limit_study(&config.levels(), s, &flux, &noise, &u0, &ens, &config.limit_options()?)?
                .to_report(name, echo)
        }
        Experiment::KineticDiag => kinetic_diag(config, &flux, &noise, echo)?,
        Experiment::Nondegeneracy => nondegeneracy(config, &flux, echo)?,
    })
}

fn simulate(config: &RunConfig, flux: &FluxModel, noise: &NoiseModel, echo: serde_json::Value) -> Result<Report> {
    let grid = config.grid()?;
    let solver = Galerkin::new(&config.solver, flux, noise)?;
    let u0 = solver.project(&config.initial.to_field(&grid))?;
    let ens = config.ensemble();
    let (paths, failures) = ens.run(|seed| {
        let w = sample_wiener(seed, config.solver.dt, config.solver.t_end)?;
        Ok((seed, solver.simulate(&u0, &w)?))
    })?;
    let mut r = Report::new(config.experiment.name(), echo, ens.seeds());
    let mut cols = vec!["index".to_string(), "x".to_string()];
    if grid.dim() == 2 {
        cols.push("y".into());
    }
    cols.extend(paths.iter().map(|(seed, _)| format!("u_seed{seed}")));
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut terminal = Series::new("terminal", &refs);
    let values: Vec<Vec<f64>> = paths.iter().map(|(_, p)| p.terminal().to_grid()).collect();
    for (i, x) in grid.points().enumerate() {
        let mut row = vec![i as f64, x[0]];
        if grid.dim() == 2 {
            row.push(x[1]);
        }
        row.extend(values.iter().map(|v| v[i]));
        terminal.push(row);
    }
    for (seed, p) in &paths {
        r.per_time_series.push(path_series(&format!("path_seed{seed}"), p));
    }
    r.per_time_series.push(terminal);
    r.flag("completed", failures.is_empty());
    r.failures = failures;
    Ok(r)
}

fn kinetic_diag(config: &RunConfig, flux: &FluxModel, noise: &NoiseModel, echo: serde_json::Value) -> Result<Report> {
    let grid = config.grid()?;
    let u0 = config.initial.to_field(&grid);
    let k = &config.kinetic;
    let name = config.experiment.name();
    let tr = translation_study(&config.solver, flux, noise, &u0, &k.lags, k.m_lambda, k.order, &config.ensemble())?;
    let mut r = tr.to_report(name, echo, k.min_slope);

    // identities on the first member
    let solver = Galerkin::new(&config.solver, flux, noise)?;
    let w = sample_wiener(config.seed, config.solver.dt, config.solver.t_end)?;
    match solver.simulate(&solver.project(&u0)?, &w) {
        Ok(path) => {
            let lambda_max = auto_lambda_max(path.sup_abs());
            let h = kinetic_of(&path, lambda_max, k.m_lambda)?;
            let rec = truncation_reconstruct(&h);
            let worst = path
                .snapshots
                .iter()
                .zip(&rec)
                .flat_map(|(s, t)| {
                    s.to_grid()
                        .into_iter()
                        .zip(t.clone())
                        .map(|(u, v)| (u.clamp(-lambda_max, lambda_max) - v).abs())
                        .collect::<Vec<_>>()
                })
                .fold(0.0, f64::max);
            r.flag("kinetic_values_valid", h.is_valid());
            r.flag("truncation_within_one_cell", worst <= h.lambda_step() * (1.0 + 1e-12));
            r.note("truncation_max_error", worst);
            r.note("lambda_step", h.lambda_step());
            let d = dissipation_density(&path, lambda_max, k.m_lambda)?;
            let mut s = Series::new("dissipation_measure", &["lambda_lo", "lambda_hi", "mass"]);
            for (i, m) in d.bins.iter().enumerate() {
                s.push(vec![d.lambda_edges[i], d.lambda_edges[i + 1], *m]);
            }
            r.note("dissipation_total", d.total);
            r.per_time_series.push(s);
        }
        Err(e) if e.is_runtime_abort() => r.failures.push(crate::report::PathFailure {
            seed: config.seed,
            message: e.to_string(),
        }),
        Err(e) => return Err(e),
    }
    Ok(r)
}

fn nondegeneracy(config: &RunConfig, flux: &FluxModel, echo: serde_json::Value) -> Result<Report> {
    let grid = config.grid()?;
    let nd = &config.nondegeneracy;
    let range = nd
        .lambda_range
        .map(|[a, b]| (a, b))
        .unwrap_or((-flux.lambda_box(), flux.lambda_box()));
    let mut r = Report::new(config.experiment.name(), echo, Vec::new());
    let mut s = Series::new("nondegeneracy", &["eta", "restricted", "literal", "lambda_measure"]);
    let mut degenerate = false;
    for &eta in &nd.etas {
        let e = nondegeneracy_measure(flux, &grid, range, eta, nd.samples)?;
        degenerate |= e.degenerate;
        s.push(vec![e.eta, e.restricted, e.literal, e.lambda_measure]);
    }
    r.per_time_series.push(s);
    let geo = check_geometry_compat(flux, &grid)?;
    r.note("max_divergence", geo.max_divergence);
    r.note("stokes_residual", geo.stokes_residual);
    r.flag("nondegenerate", !degenerate);
    r.flag("geometry_compatible", geo.max_divergence < 1e-10 && geo.stokes_residual < 1e-8);
    Ok(r)
}

/// Dispatches, writes the report into `config.out` (default `out`) and maps
/// the outcome to an exit status. Diagnostics go to stderr.
pub fn run(config: &RunConfig) -> ExitStatus {
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match dispatch(config) {
        Ok(report) => {
            if let Err(e) = report.write(&out) {
                eprintln!("error: writing report to {}: {e}", out.display());
                return ExitStatus::Abort;
            }
            for f in &report.failures {
                eprintln!("path with seed {} aborted: {}", f.seed, f.message);
            }
            let status = ExitStatus::of_report(&report);
            for (k, v) in &report.pass_flags {
                eprintln!("{k}: {}", if *v { "PASS" } else { "FAIL" });
            }
            status
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::of_error(&e)
        }
    }
}
