//! WebAssembly bindings for the browser demo. Every entry point takes a JSON
//! parameter object and returns JSON; the `*_json` functions are the
//! native-testable core of each binding.

use dyncap::flux::FluxModel;
use dyncap::harness::{run_ensemble, EnergyOptions, Ensemble};
use dyncap::initial::InitialCondition;
use dyncap::kinetic::{auto_lambda_max, KineticField};
use dyncap::noise::NoiseModel;
use dyncap::solver::{Galerkin, SolverConfig};
use dyncap::wiener::sample_wiener;
use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Shared demo parameters: 1D Burgers flux, linear multiplicative noise,
/// sine initial datum.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoParams {
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub amplitude: f64,
    pub noise: f64,
    pub seed: u64,
    pub paths: usize,
    pub m_lambda: usize,
    /// Upper bound on returned snapshots.
    pub max_frames: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            delta: 0.0025,
            n: 64,
            dt: 1e-3,
            t_end: 0.5,
            amplitude: 1.0,
            noise: 0.2,
            seed: 0,
            paths: 32,
            m_lambda: 64,
            max_frames: 50,
        }
    }
}

type Res<T> = Result<T, String>;

fn parse(params: &str) -> Res<DemoParams> {
    if params.trim().is_empty() {
        return Ok(DemoParams::default());
    }
    serde_json::from_str(params).map_err(|e| e.to_string())
}

impl DemoParams {
    fn config(&self) -> SolverConfig {
        let steps = (self.t_end / self.dt).round().max(1.0) as usize;
        let stride = steps.div_ceil(self.max_frames.max(1)).max(1);
        SolverConfig::new(self.epsilon, self.delta, 1, self.n, self.dt, self.t_end).with_sample_every(stride)
    }
}

#[derive(Serialize)]
struct PathView {
    x: Vec<f64>,
    times: Vec<f64>,
    frames: Vec<Vec<f64>>,
    l2_sq: Vec<f64>,
    dissipation: Vec<f64>,
}

fn simulate(p: &DemoParams) -> Res<dyncap::solver::SolutionPath> {
    let cfg = p.config();
    let grid = cfg.grid().map_err(|e| e.to_string())?;
    let (flux, noise) = (FluxModel::burgers1d(), NoiseModel::linear(p.noise));
    let g = Galerkin::new(&cfg, &flux, &noise).map_err(|e| e.to_string())?;
    let u0 = g
        .project(&InitialCondition::sine(p.amplitude).to_field(&grid))
        .map_err(|e| e.to_string())?;
    let w = sample_wiener(p.seed, cfg.dt, cfg.t_end).map_err(|e| e.to_string())?;
    g.simulate(&u0, &w).map_err(|e| e.to_string())
}

/// One path: snapshots on the lattice with `L²` norm and dissipation.
pub fn simulate_path_json(params: &str) -> Res<String> {
    let p = parse(params)?;
    let path = simulate(&p)?;
    let grid = path.terminal().grid().clone();
    let view = PathView {
        x: grid.points().map(|x| x[0]).collect(),
        times: path.times.clone(),
        frames: path.snapshots.iter().map(|s| s.to_grid()).collect(),
        l2_sq: path.snapshots.iter().map(|s| s.l2_norm_sq()).collect(),
        dissipation: path.diagnostics.iter().map(|d| d.dissipation).collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Ensemble energy against its closed-form bound.
pub fn energy_check_json(params: &str) -> Res<String> {
    let p = parse(params)?;
    let cfg = p.config();
    let grid = cfg.grid().map_err(|e| e.to_string())?;
    let u0 = InitialCondition::sine(p.amplitude).to_field(&grid);
    let r = run_ensemble(
        &cfg,
        &FluxModel::burgers1d(),
        &NoiseModel::linear(p.noise),
        &u0,
        &Ensemble::new(p.paths, p.seed),
        &EnergyOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let out = json!({
        "times": r.times,
        "energy_mean": r.energy.iter().map(|s| s.mean).collect::<Vec<_>>(),
        "energy_se": r.energy.iter().map(|s| s.se_or_zero()).collect::<Vec<_>>(),
        "bound": r.c0,
        "passed": r.pass_energy,
        "failures": r.failures.len(),
    });
    Ok(out.to_string())
}

/// `sign(u(T, x) − λ)` on the `(x, λ)` lattice, row-major in `x`.
pub fn kinetic_image_json(params: &str) -> Res<String> {
    let p = parse(params)?;
    let path = simulate(&p)?;
    let terminal = path.terminal();
    let samples = vec![terminal.to_grid()];
    let lambda_max = auto_lambda_max(samples[0].iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    let h = KineticField::from_samples(
        vec![path.times[path.times.len() - 1]],
        terminal.grid().clone(),
        &samples,
        lambda_max,
        p.m_lambda,
    )
    .map_err(|e| e.to_string())?;
    let out = json!({
        "n": terminal.grid().len(),
        "m_lambda": h.m_lambda,
        "lambda_max": lambda_max,
        "values": h.values,
        "u": samples[0],
    });
    Ok(out.to_string())
}

fn js(r: Res<String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = simulatePath)]
pub fn simulate_path(params: &str) -> Result<String, JsValue> {
    js(simulate_path_json(params))
}

#[wasm_bindgen(js_name = energyCheck)]
pub fn energy_check(params: &str) -> Result<String, JsValue> {
    js(energy_check_json(params))
}

#[wasm_bindgen(js_name = kineticImage)]
pub fn kinetic_image(params: &str) -> Result<String, JsValue> {
    js(kinetic_image_json(params))
}
