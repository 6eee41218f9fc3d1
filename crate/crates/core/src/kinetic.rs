//! Kinetic diagnostics: `h(t, x, λ) = sign(u(t, x) − λ)` on a truncated
//! velocity box, velocity averages, the dissipation measure, negative
//! Sobolev norms on `M × [−L, L]` and the temporal translation modulus.
//!
//! The `λ` lattice is cell-centred: `λ_l = −L + (l + ½) Δλ`, `Δλ = 2L/m`.

use rustdct::DctPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::SolutionPath;
use crate::spectral::{forward_transform, lambda_sq, TorusGrid};

/// `sign(u − λ)` with `sign(0) = +1`.
pub fn kinetic_value(u: f64, lambda: f64) -> i8 {
    if u >= lambda {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone)]
pub struct KineticField {
    pub times: Vec<f64>,
    /// Spatial lattice; sample points may be offset from the grid nodes
    /// (e.g. cell centres), which does not affect any diagnostic here.
    pub grid: TorusGrid,
    pub lambda_max: f64,
    pub m_lambda: usize,
    /// `values[(t * grid.len() + x) * m_lambda + l]`.
    pub values: Vec<i8>,
    /// Number of `(t, x)` samples with `|u| > L`.
    pub clipped: usize,
}

impl KineticField {
    /// Builds `h` from lattice samples of `u`, one vector per time.
    pub fn from_samples(
        times: Vec<f64>,
        grid: TorusGrid,
        samples: &[Vec<f64>],
        lambda_max: f64,
        m_lambda: usize,
    ) -> Result<Self> {
        if m_lambda < 8 {
            return Err(Error::InvalidParameter(format!("m_lambda = {m_lambda} < 8")));
        }
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("L = {lambda_max} must be positive")));
        }
        if samples.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: samples.len(),
            });
        }
        let mut values = Vec::with_capacity(samples.len() * grid.len() * m_lambda);
        let mut clipped = 0;
        let dl = 2.0 * lambda_max / m_lambda as f64;
        for s in samples {
            if s.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: s.len(),
                });
            }
            for &u in s {
                if u.abs() > lambda_max {
                    clipped += 1;
                }
                values.extend((0..m_lambda).map(|l| {
                    kinetic_value(u, -lambda_max + (l as f64 + 0.5) * dl)
                }));
            }
        }
        Ok(Self {
            times,
            grid,
            lambda_max,
            m_lambda,
            values,
            clipped,
        })
    }

    pub fn lambda_step(&self) -> f64 {
        2.0 * self.lambda_max / self.m_lambda as f64
    }

    pub fn lambda_points(&self) -> Vec<f64> {
        let dl = self.lambda_step();
        (0..self.m_lambda)
            .map(|l| -self.lambda_max + (l as f64 + 0.5) * dl)
            .collect()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// `h(t_i, x_j, ·)`.
    pub fn column(&self, i: usize, j: usize) -> &[i8] {
        let start = (i * self.grid.len() + j) * self.m_lambda;
        &self.values[start..start + self.m_lambda]
    }

    /// `{±1}`-valued and nonincreasing in `λ` everywhere.
    pub fn is_valid(&self) -> bool {
        self.values.chunks(self.m_lambda).all(|col| {
            col.iter().all(|&v| v == 1 || v == -1) && col.windows(2).all(|w| w[1] <= w[0])
        })
    }
}

/// `h` for every snapshot of a Galerkin path.
pub fn kinetic_of(path: &SolutionPath, lambda_max: f64, m_lambda: usize) -> Result<KineticField> {
    let grid = path.terminal().grid().clone();
    let samples: Vec<Vec<f64>> = path.snapshots.iter().map(|s| s.to_grid()).collect();
    KineticField::from_samples(path.times.clone(), grid, &samples, lambda_max, m_lambda)
}

/// Default velocity box: `1.25 · max |u|`.
pub fn auto_lambda_max(sup_abs: f64) -> f64 {
    (1.25 * sup_abs).max(1e-12)
}

/// `∫ h(t, x, λ) ρ(λ) dλ` for `ρ` given on the `λ` lattice; indexed
/// `[time][x]`.
pub fn velocity_average(h: &KineticField, rho: &[f64]) -> Result<Vec<Vec<f64>>> {
    if rho.len() != h.m_lambda {
        return Err(Error::DimensionMismatch {
            expected: h.m_lambda,
            got: rho.len(),
        });
    }
    let dl = h.lambda_step();
    Ok((0..h.n_times())
        .map(|i| {
            (0..h.grid.len())
                .map(|j| {
                    h.column(i, j)
                        .iter()
                        .zip(rho)
                        .map(|(&v, &r)| v as f64 * r)
                        .sum::<f64>()
                        * dl
                })
                .collect()
        })
        .collect())
}

/// `ρ = ½ χ_{[−L, L]}` on the lattice.
pub fn half_indicator(h: &KineticField) -> Vec<f64> {
    vec![0.5; h.m_lambda]
}

/// `⟨sign(u − ·), ½χ_{[−L, L]}⟩ = clamp(u, −L, L)`, evaluated exactly.
pub fn indicator_average(u: f64, lambda_max: f64) -> f64 {
    u.clamp(-lambda_max, lambda_max)
}

/// `T_L(u) = ½ ∫_{−L}^{L} h dλ` by the midpoint rule; within `L/m` of
/// `clamp(u, −L, L)`.
pub fn truncation_reconstruct(h: &KineticField) -> Vec<Vec<f64>> {
    velocity_average(h, &half_indicator(h)).expect("matching lattice")
}

/// Dissipation density `ε |∇u|²` and its `λ`-binned measure.
#[derive(Debug, Clone, Serialize)]
pub struct DissipationMeasure {
    /// `[time][x]`.
    pub density: Vec<Vec<f64>>,
    pub lambda_edges: Vec<f64>,
    /// Mass per `λ` cell; values of `u` outside the box go to the end cells.
    pub bins: Vec<f64>,
    /// `ε ∫₀ᵀ ‖∇u‖² dt` with the left-point rule in time.
    pub total: f64,
}

pub fn dissipation_density(
    path: &SolutionPath,
    lambda_max: f64,
    m_lambda: usize,
) -> Result<DissipationMeasure> {
    if m_lambda == 0 || !(lambda_max > 0.0) {
        return Err(Error::InvalidParameter("empty λ box".into()));
    }
    let eps = path.config.epsilon;
    let grid = path.terminal().grid().clone();
    let w = grid.quad_weight();
    let dl = 2.0 * lambda_max / m_lambda as f64;
    let mut bins = vec![0.0; m_lambda];
    let mut total = 0.0;
    let mut density = Vec::with_capacity(path.snapshots.len());
    for (i, snap) in path.snapshots.iter().enumerate() {
        let grads: Vec<Vec<f64>> = snap.gradient().iter().map(|g| g.to_grid()).collect();
        let d: Vec<f64> = (0..grid.len())
            .map(|j| eps * grads.iter().map(|g| g[j] * g[j]).sum::<f64>())
            .collect();
        if i + 1 < path.snapshots.len() {
            let dt = path.times[i + 1] - path.times[i];
            let u = snap.to_grid();
            for (j, &dj) in d.iter().enumerate() {
                let mass = dj * w * dt;
                let l = ((u[j] + lambda_max) / dl).floor().clamp(0.0, (m_lambda - 1) as f64);
                bins[l as usize] += mass;
                total += mass;
            }
        }
        density.push(d);
    }
    Ok(DissipationMeasure {
        density,
        lambda_edges: (0..=m_lambda).map(|l| -lambda_max + l as f64 * dl).collect(),
        bins,
        total,
    })
}

/// Smallest integer `N ≥ d/2 + 3`.
pub fn default_sobolev_order(dim: usize) -> u32 {
    (dim as f64 / 2.0 + 3.0).ceil() as u32
}

/// Coefficients `w^{1/2} ĝ(k, ℓ)` of `g` on `M × [−L, L]`: Fourier in `x`,
/// orthonormal cosine series in `λ`, `w = (1 + (2π|k|)² + (πℓ/L)²)^{−N}`.
/// `‖g‖_{H^{−N}}` is the Euclidean norm of the result.
pub struct NegSobolev {
    grid: TorusGrid,
    m_lambda: usize,
    lambda_max: f64,
    weights: Vec<f64>,
    dct: std::sync::Arc<dyn rustdct::TransformType2And3<f64>>,
}

impl NegSobolev {
    pub fn new(grid: &TorusGrid, lambda_max: f64, m_lambda: usize, order: u32) -> Self {
        let mut weights = Vec::with_capacity(grid.len() * m_lambda);
        for i in 0..grid.len() {
            let k2 = lambda_sq(grid.wavevector(i));
            for l in 0..m_lambda {
                let q = std::f64::consts::PI * l as f64 / lambda_max;
                weights.push((k2 + q * q).powi(-(order as i32)).sqrt());
            }
        }
        Self {
            grid: grid.clone(),
            m_lambda,
            lambda_max,
            weights,
            dct: DctPlanner::new().plan_dct2(m_lambda),
        }
    }

    /// `g` indexed `[x * m_lambda + l]` on the lattice.
    pub fn weighted_coefficients(&self, g: &[f64]) -> Result<Vec<f64>> {
        let (nx, m) = (self.grid.len(), self.m_lambda);
        if g.len() != nx * m {
            return Err(Error::DimensionMismatch {
                expected: nx * m,
                got: g.len(),
            });
        }
        // cosine transform in λ, scaled so Σ|c_ℓ|² = ∫ |g|² dλ
        let dl = 2.0 * self.lambda_max / m as f64;
        let s0 = (dl / m as f64).sqrt();
        let s1 = (2.0 * dl / m as f64).sqrt();
        let mut lam = vec![0.0; nx * m];
        for (x, col) in g.chunks(m).enumerate() {
            let out = &mut lam[x * m..(x + 1) * m];
            out.copy_from_slice(col);
            self.dct.process_dct2(out);
            out[0] *= s0;
            out[1..].iter_mut().for_each(|v| *v *= s1);
        }
        // Fourier in x for each ℓ
        let mut out = vec![0.0; 2 * nx * m];
        let mut buf = vec![0.0; nx];
        for l in 0..m {
            for x in 0..nx {
                buf[x] = lam[x * m + l];
            }
            let f = forward_transform(&self.grid, &buf)?;
            for (k, c) in f.coeffs().iter().enumerate() {
                let w = self.weights[k * m + l];
                out[2 * (k * m + l)] = w * c.re;
                out[2 * (k * m + l) + 1] = w * c.im;
            }
        }
        Ok(out)
    }

    pub fn norm(&self, g: &[f64]) -> Result<f64> {
        Ok(euclid(&self.weighted_coefficients(g)?))
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn euclid_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `‖g‖_{H^{−N}(M × [−L, L])}` for `g` sampled on the `(x, λ)` lattice.
pub fn neg_sobolev_norm(
    g: &[f64],
    grid: &TorusGrid,
    lambda_max: f64,
    m_lambda: usize,
    order: u32,
) -> Result<f64> {
    NegSobolev::new(grid, lambda_max, m_lambda, order).norm(g)
}

/// Per-snapshot weighted coefficients of `h`, reusable across lags.
pub struct TranslationTable {
    times: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl TranslationTable {
    pub fn new(h: &KineticField, order: u32) -> Result<Self> {
        let ns = NegSobolev::new(&h.grid, h.lambda_max, h.m_lambda, order);
        let per = h.grid.len() * h.m_lambda;
        let coeffs = (0..h.n_times())
            .map(|i| {
                let g: Vec<f64> = h.values[i * per..(i + 1) * per].iter().map(|&v| v as f64).collect();
                ns.weighted_coefficients(&g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: h.times.clone(),
            coeffs,
        })
    }

    fn spacing(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::InvalidParameter("need at least two snapshots".into()));
        }
        Ok(self.times[1] - self.times[0])
    }

    /// `∫₀^{T−τ} ‖h(t+τ) − h(t)‖ dt` for `τ = lag · Δ`, left-point rule.
    pub fn lag_integral(&self, lag: usize) -> Result<f64> {
        let dt = self.spacing()?;
        let m = self.times.len() - 1;
        if lag > m {
            return Err(Error::InvalidParameter(format!("lag {lag} beyond {m} snapshots")));
        }
        Ok((0..m - lag)
            .map(|i| euclid_diff(&self.coeffs[i + lag], &self.coeffs[i]))
            .sum::<f64>()
            * dt)
    }

    /// `sup_{0 < τ ≤ θ} ∫₀^{T−τ} ‖h(t+τ) − h(t)‖_{H^{−N}} dt`.
    pub fn modulus(&self, theta: f64) -> Result<f64> {
        let dt = self.spacing()?;
        let horizon = self.times[self.times.len() - 1] - self.times[0];
        if theta < 0.0 || theta > horizon * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} outside [0, T = {horizon}]"
            )));
        }
        let lags = (theta / dt).round();
        if (lags * dt - theta).abs() > 1e-9 * dt.max(theta) {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} is not a multiple of the snapshot spacing {dt}"
            )));
        }
        let mut best: f64 = 0.0;
        for lag in 1..=lags as usize {
            best = best.max(self.lag_integral(lag)?);
        }
        Ok(best)
    }
}

pub fn translation_modulus(h: &KineticField, theta: f64, order: u32) -> Result<f64> {
    TranslationTable::new(h, order)?.modulus(theta)
}
