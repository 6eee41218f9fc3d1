//! Separable geometry-compatible fluxes `f(x, λ) = a(x) g(λ)` with
//! `div a = 0`, their Gaussian regularisations `f_k`, and the
//! non-degeneracy estimator.
//!
//! In 2D the direction field is the perpendicular gradient of a stream
//! function, `a = (−∂₂ψ, ∂₁ψ)`, so the divergence vanishes mode by mode.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{divergence, SpectralField, TorusGrid};

/// The `λ`-profile `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// `g(λ) = λ`.
    Linear,
    /// `g(λ) = λ²/2`.
    Quadratic,
}

impl Profile {
    pub fn value(self, lambda: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear => lambda,
            Profile::Quadratic => 0.5 * lambda * lambda,
        }
    }

    pub fn deriv(self, lambda: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear => 1.0,
            Profile::Quadratic => lambda,
        }
    }

    /// Engquist–Osher split `g = g(0) + g⁺ + g⁻` with
    /// `g⁺(u) = ∫₀ᵘ max(g', 0)` and `g⁻(u) = ∫₀ᵘ min(g', 0)`.
    pub fn eo_split(self, u: f64) -> (f64, f64) {
        match self {
            Profile::Zero => (0.0, 0.0),
            Profile::Linear => (u, 0.0),
            Profile::Quadratic => {
                let p = u.max(0.0);
                let m = u.min(0.0);
                (0.5 * p * p, 0.5 * m * m)
            }
        }
    }

    /// `sup_{|λ| ≤ r} |g'(λ)|`.
    pub fn deriv_sup(self, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear => 1.0,
            Profile::Quadratic => r,
        }
    }

    /// `sup_{|λ| ≤ r} |g(λ)|`.
    pub fn value_sup(self, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear => r,
            Profile::Quadratic => 0.5 * r * r,
        }
    }

    /// Polynomial degree, `None` for the zero profile.
    pub fn degree(self) -> Option<usize> {
        match self {
            Profile::Zero => None,
            Profile::Linear => Some(1),
            Profile::Quadratic => Some(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Constant([f64; 2]),
    /// Stream function on a grid; `a = (−∂₂ψ, ∂₁ψ)`.
    Stream(SpectralField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    name: String,
    dim: usize,
    direction: Direction,
    profile: Profile,
    /// Base width `σ₀`; level `k` uses `σ₀ 2^{−k}`.
    sigma0: f64,
    /// Accumulated Gaussian mollification width.
    sigma: f64,
    /// Bounds are certified on the box `|λ| ≤ lambda_box`.
    lambda_box: f64,
}

pub const PRESETS: &[&str] = &[
    "zero",
    "burgers1d",
    "linear1d",
    "stream2d-smooth",
    "stream2d-rough",
];

/// Periodic tent with slopes ±1 and kinks at 0 and 1/2.
fn tent(x: f64) -> f64 {
    (x.rem_euclid(1.0) - 0.5).abs() - 0.25
}

/// Preset knobs; `None` keeps the documented default.
#[derive(Debug, Clone, Copy, Default)]
pub struct FluxParams {
    pub amplitude: Option<f64>,
    pub sigma0: Option<f64>,
    pub lambda_box: Option<f64>,
}

impl FluxModel {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        direction: Direction,
        profile: Profile,
        sigma0: f64,
        lambda_box: f64,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("flux dim must be 1 or 2, got {dim}")));
        }
        if let Direction::Stream(psi) = &direction {
            if dim != 2 || psi.grid().dim() != 2 {
                return Err(Error::InvalidParameter(
                    "stream-function directions are two-dimensional".into(),
                ));
            }
        }
        if !(lambda_box > 0.0) || !(sigma0 >= 0.0) {
            return Err(Error::InvalidParameter(
                "lambda_box must be positive and sigma0 nonnegative".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            dim,
            direction,
            profile,
            sigma0,
            sigma: 0.0,
            lambda_box,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, Direction::Constant([0.0; 2]), Profile::Zero, 0.0, 4.0)
            .expect("valid zero flux")
    }

    pub fn burgers1d() -> Self {
        Self::preset("burgers1d", None, FluxParams::default()).expect("valid preset")
    }

    /// Named preset. 2D presets need the grid their stream function lives on.
    pub fn preset(name: &str, grid: Option<&TorusGrid>, params: FluxParams) -> Result<Self> {
        let lambda_box = params.lambda_box.unwrap_or(4.0);
        let need_grid = || {
            grid.filter(|g| g.dim() == 2).ok_or_else(|| {
                Error::Config(format!("flux preset `{name}` needs a two-dimensional grid"))
            })
        };
        match name {
            "zero" => Ok(Self::zero(grid.map_or(1, |g| g.dim()))),
            "burgers1d" => Self::new(
                name,
                1,
                Direction::Constant([params.amplitude.unwrap_or(1.0), 0.0]),
                Profile::Quadratic,
                params.sigma0.unwrap_or(0.0),
                lambda_box,
            ),
            "linear1d" => Self::new(
                name,
                1,
                Direction::Constant([params.amplitude.unwrap_or(1.0), 0.0]),
                Profile::Linear,
                params.sigma0.unwrap_or(0.0),
                lambda_box,
            ),
            "stream2d-smooth" => {
                let g = need_grid()?;
                let amp = params.amplitude.unwrap_or(1.0 / (2.0 * PI));
                let psi = SpectralField::from_fn(g, |x| {
                    amp * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
                });
                Self::new(
                    name,
                    2,
                    Direction::Stream(psi),
                    Profile::Quadratic,
                    params.sigma0.unwrap_or(0.0),
                    lambda_box,
                )
            }
            "stream2d-rough" => {
                let g = need_grid()?;
                let amp = params.amplitude.unwrap_or(1.0);
                let psi = SpectralField::from_fn(g, |x| amp * (tent(x[0]) + tent(x[1])));
                Self::new(
                    name,
                    2,
                    Direction::Stream(psi),
                    Profile::Quadratic,
                    params.sigma0.unwrap_or(0.2),
                    lambda_box,
                )
            }
            other => Err(Error::Config(format!(
                "unknown flux preset `{other}` (expected one of {PRESETS:?})"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn regularization_width(&self) -> f64 {
        self.sigma
    }

    pub fn lambda_box(&self) -> f64 {
        self.lambda_box
    }

    pub fn is_zero(&self) -> bool {
        match &self.direction {
            _ if self.profile == Profile::Zero => true,
            Direction::Constant(a) => a[0] == 0.0 && a[1] == 0.0,
            Direction::Stream(psi) => psi.coeffs().iter().all(|c| c.norm() == 0.0),
        }
    }

    /// Spectral components of `a` on `grid`.
    pub fn direction_spectral(&self, grid: &TorusGrid) -> Result<Vec<SpectralField>> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: grid.dim(),
            });
        }
        match &self.direction {
            Direction::Constant(a) => Ok((0..self.dim)
                .map(|i| SpectralField::from_fn(grid, |_| a[i]))
                .collect()),
            Direction::Stream(psi) => {
                let psi = psi.resampled(grid)?;
                let grad = psi.gradient();
                Ok(vec![grad[1].scaled(-1.0), grad[0].clone()])
            }
        }
    }

    /// Lattice samples of each component of `a`.
    pub fn direction_samples(&self, grid: &TorusGrid) -> Result<Vec<Vec<f64>>> {
        match &self.direction {
            Direction::Constant(a) => {
                if grid.dim() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: grid.dim(),
                    });
                }
                Ok((0..self.dim).map(|i| vec![a[i]; grid.len()]).collect())
            }
            Direction::Stream(_) => Ok(self
                .direction_spectral(grid)?
                .iter()
                .map(|c| c.to_grid())
                .collect()),
        }
    }

    /// Native grid of the stream function, if any.
    pub fn native_grid(&self) -> Option<&TorusGrid> {
        match &self.direction {
            Direction::Stream(psi) => Some(psi.grid()),
            Direction::Constant(_) => None,
        }
    }

    fn sup_direction(&self) -> f64 {
        match &self.direction {
            Direction::Constant(a) => (a[0] * a[0] + a[1] * a[1]).sqrt(),
            Direction::Stream(psi) => {
                let comps = self
                    .direction_samples(psi.grid())
                    .expect("native grid matches");
                (0..psi.grid().len())
                    .map(|j| comps.iter().map(|c| c[j] * c[j]).sum::<f64>().sqrt())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// `C` with `|f'(x, λ)| ≤ C` on the certified box.
    pub fn lipschitz_bound(&self) -> f64 {
        self.sup_direction() * self.profile.deriv_sup(self.lambda_box)
    }

    /// `C` with `|f(x, λ)| ≤ C (1 + |λ|)` on the certified box.
    pub fn growth_bound(&self) -> f64 {
        let r = self.lambda_box;
        let per_lambda = match self.profile {
            Profile::Zero => 0.0,
            Profile::Linear => 1.0,
            Profile::Quadratic => 0.5 * r * r / (1.0 + r),
        };
        self.sup_direction() * per_lambda
    }

    /// `‖sup_λ |f(·, λ)|‖²_{L²(M)}` over the certified box.
    pub fn sup_flux_l2_sq(&self) -> f64 {
        let gsup = self.profile.value_sup(self.lambda_box);
        let a2 = match &self.direction {
            Direction::Constant(a) => a[0] * a[0] + a[1] * a[1],
            Direction::Stream(psi) => {
                let comps = self.direction_samples(psi.grid()).expect("native grid");
                psi.grid()
                    .integrate(&(0..psi.grid().len())
                        .map(|j| comps.iter().map(|c| c[j] * c[j]).sum())
                        .collect::<Vec<f64>>())
            }
        };
        a2 * gsup * gsup
    }

    /// Gaussian mollification of the direction with width `width`,
    /// multiplier `exp(−σ²|2πk|²/2)`. Widths compose in quadrature.
    pub fn mollify(&self, width: f64) -> FluxModel {
        let mut out = self.clone();
        out.sigma = (self.sigma * self.sigma + width * width).sqrt();
        if let Direction::Stream(psi) = &self.direction {
            let s2 = width * width;
            out.direction = Direction::Stream(psi.map_modes(|k, c| {
                let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
                c * (-0.5 * s2 * 4.0 * PI * PI * k2).exp()
            }));
        }
        out
    }

    /// `f_k`: mollification with width `σ₀ 2^{−k}`.
    pub fn regularize(&self, k_level: u32) -> FluxModel {
        self.mollify(self.sigma0 * 0.5f64.powi(k_level as i32))
    }

    /// `‖sup_λ |f(·,λ) − f_k(·,λ)|‖_{L¹(M)}` on the certified box, by
    /// lattice quadrature on `grid`. Both fluxes must share the profile.
    pub fn l1_gap(&self, other: &FluxModel, grid: &TorusGrid) -> Result<f64> {
        if self.profile != other.profile {
            return Err(Error::InvalidParameter("l1_gap needs a common profile".into()));
        }
        let a = self.direction_samples(grid)?;
        let b = other.direction_samples(grid)?;
        let diff: Vec<f64> = (0..grid.len())
            .map(|j| {
                a.iter()
                    .zip(&b)
                    .map(|(p, q)| (p[j] - q[j]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(grid.integrate(&diff) * self.profile.value_sup(self.lambda_box))
    }
}

/// Outcome of [`check_geometry_compat`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeometryReport {
    /// `max |div f(x, λ)|` over the lattice and a `λ`-lattice.
    pub max_divergence: f64,
    /// `|∫ ⟨f(x,u), ∇u⟩ dV|` for a random smooth `u`.
    pub stokes_residual: f64,
}

/// Spectral divergence check plus one discrete Stokes residual.
pub fn check_geometry_compat(flux: &FluxModel, grid: &TorusGrid) -> Result<GeometryReport> {
    let comps = flux.direction_spectral(grid)?;
    let div = divergence(&comps).to_grid();
    let div_sup = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r = flux.lambda_box();
    let g_sup = (0..=32)
        .map(|i| flux.profile().value(-r + 2.0 * r * i as f64 / 32.0).abs())
        .fold(0.0, f64::max);
    let u = random_band_limited(grid, 4, 0x5eed);
    Ok(GeometryReport {
        max_divergence: div_sup * g_sup,
        stokes_residual: stokes_residual(flux, &u)?,
    })
}

/// Random real trigonometric polynomial with modes `max_i |k_i| ≤ max_mode`
/// and unit-order amplitude.
pub fn random_band_limited(grid: &TorusGrid, max_mode: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        if k[0].abs() <= max_mode && k[1].abs() <= max_mode && !grid.is_nyquist(i) {
            let scale = 1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64);
            f.coeffs_mut()[i] = Complex64::new(
                rng.random_range(-1.0..1.0) * scale,
                rng.random_range(-1.0..1.0) * scale,
            );
        }
    }
    f.enforce_hermitian();
    f
}

/// `∫_M ⟨f(x, u), ∇u⟩ dV`, evaluated on a padded lattice fine enough that
/// the quadrature is exact for polynomial profiles and band-limited `u`.
pub fn stokes_residual(flux: &FluxModel, u: &SpectralField) -> Result<f64> {
    let grid = match flux.native_grid() {
        Some(g) if g.n_per_axis() > u.grid().n_per_axis() => g.clone(),
        _ => u.grid().clone(),
    };
    let band = (0..u.grid().len())
        .filter(|&i| u.coeffs()[i].norm() > 0.0)
        .map(|i| {
            let k = u.grid().wavevector(i);
            k[0].abs().max(k[1].abs())
        })
        .max()
        .unwrap_or(0) as usize;
    let deg = flux.profile().degree().unwrap_or(0) + 1;
    let need = grid.n_per_axis() + 2 * deg * band + 2;
    let padded = TorusGrid::new(grid.dim(), need + need % 2)?;
    let a = flux.direction_spectral(&padded)?;
    let up = u.resampled(&padded)?;
    let us = up.to_grid();
    let grads: Vec<Vec<f64>> = up.gradient().iter().map(|g| g.to_grid()).collect();
    let a_s: Vec<Vec<f64>> = a.iter().map(|c| c.to_grid()).collect();
    let integrand: Vec<f64> = (0..padded.len())
        .map(|j| {
            let g = flux.profile().value(us[j]);
            (0..padded.dim()).map(|d| a_s[d][j] * g * grads[d][j]).sum()
        })
        .collect();
    Ok(padded.integrate(&integrand).abs())
}

/// Non-degeneracy estimate for one thickness `η`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NondegeneracyEstimate {
    pub eta: f64,
    /// Sphere restricted to `|ξ'| ≥ 0.1`.
    pub restricted: f64,
    /// Whole sphere, including `ξ' = 0`.
    pub literal: f64,
    /// `|Λ|`, the saturation value of both.
    pub lambda_measure: f64,
    /// The exact level sets (`η = 0`) of the restricted symbol have
    /// positive measure.
    pub degenerate: bool,
}

/// Minimum `|ξ'|` on the restricted sphere.
pub const MIN_XI_PRIME: f64 = 0.1;

/// Points on `S^d ⊂ R^{d+1}`, first coordinate `ξ₀`.
fn sphere_samples(dim: usize, samples: usize) -> Vec<[f64; 3]> {
    match dim {
        1 => (0..samples)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / samples as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..samples)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / samples as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    [z, r * t.cos(), r * t.sin()]
                })
                .collect()
        }
    }
}

/// `sup_C meas{λ : |s(λ) − C| ≤ η}` for the piecewise-linear interpolant of
/// `s` on a uniform `λ`-lattice with spacing `h`.
fn max_level_measure(s: &[f64], h: f64, eta: f64) -> f64 {
    let seg_measure = |c: f64| -> f64 {
        let (lo, hi) = (c - eta, c + eta);
        s.windows(2)
            .map(|w| {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                if b - a <= 1e-14 * (1.0 + a.abs()) {
                    if (w[0] - c).abs() <= eta * (1.0 + 1e-12) + 1e-15 {
                        h
                    } else {
                        0.0
                    }
                } else {
                    let overlap = (b.min(hi) - a.max(lo)).max(0.0);
                    h * overlap / (b - a)
                }
            })
            .sum()
    };
    s.iter()
        .flat_map(|&v| [v - eta, v + eta])
        .map(seg_measure)
        .fold(0.0, f64::max)
}

/// Numerical version of the non-degeneracy integral
/// `∫_K sup_{ξ ∈ S^d} sup_C meas{λ ∈ Λ : |ξ₀ + f'(x,λ)·ξ' − C| ≤ η} dx`
/// with `K` the whole torus, sampled on at most 16 points per axis of `grid`
/// (a single point when the direction is constant).
pub fn nondegeneracy_measure(
    flux: &FluxModel,
    grid: &TorusGrid,
    lambda_range: (f64, f64),
    eta: f64,
    samples: usize,
) -> Result<NondegeneracyEstimate> {
    nondegeneracy_measure_with(flux, grid, lambda_range, eta, samples, 129)
}

pub fn nondegeneracy_measure_with(
    flux: &FluxModel,
    grid: &TorusGrid,
    lambda_range: (f64, f64),
    eta: f64,
    samples: usize,
    lambda_points: usize,
) -> Result<NondegeneracyEstimate> {
    let (lo, hi) = lambda_range;
    if !(hi > lo) || lambda_points < 2 {
        return Err(Error::InvalidParameter("empty λ-grid".into()));
    }
    if !(eta >= 0.0) || samples == 0 {
        return Err(Error::InvalidParameter(
            "eta must be nonnegative and samples positive".into(),
        ));
    }
    let h = (hi - lo) / (lambda_points - 1) as f64;
    let lambdas: Vec<f64> = (0..lambda_points).map(|i| lo + h * i as f64).collect();
    let gprime: Vec<f64> = lambdas.iter().map(|&l| flux.profile().deriv(l)).collect();
    let dirs: Vec<[f64; 3]> = sphere_samples(grid.dim(), samples)
        .into_iter()
        .filter(|x| (x[1] * x[1] + x[2] * x[2]).sqrt() >= MIN_XI_PRIME)
        .collect();
    let a = flux.direction_samples(grid)?;
    let stride = (grid.n_per_axis() / 16).max(1);
    let uniform = matches!(flux.direction(), Direction::Constant(_));
    let xs: Vec<usize> = (0..if uniform { 1 } else { grid.len() })
        .filter(|&j| {
            let n = grid.n_per_axis();
            (j % n).is_multiple_of(stride) && (j / n).is_multiple_of(stride)
        })
        .collect();

    let mut restricted = 0.0;
    let mut exact = 0.0;
    let mut symbol = vec![0.0; lambda_points];
    for &j in &xs {
        let mut best: f64 = 0.0;
        let mut best_exact: f64 = 0.0;
        for xi in &dirs {
            let b: f64 = (0..grid.dim()).map(|d| a[d][j] * xi[d + 1]).sum();
            for (s, gp) in symbol.iter_mut().zip(&gprime) {
                *s = xi[0] + gp * b;
            }
            best = best.max(max_level_measure(&symbol, h, eta));
            best_exact = best_exact.max(max_level_measure(&symbol, h, 0.0));
        }
        restricted += best;
        exact += best_exact;
    }
    let npts = xs.len() as f64;
    restricted /= npts;
    exact /= npts;
    let lambda_measure = hi - lo;
    // ξ' = 0 makes the symbol constant, so the whole box is one level set
    let literal = restricted.max(lambda_measure);
    Ok(NondegeneracyEstimate {
        eta,
        restricted,
        literal,
        lambda_measure,
        degenerate: exact > 1e-9 * lambda_measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward_transform;

    fn grid2(n: usize) -> TorusGrid {
        TorusGrid::new(2, n).unwrap()
    }

    #[test]
    fn constant_direction_is_divergence_free() {
        let g = TorusGrid::new(1, 32).unwrap();
        let r = check_geometry_compat(&FluxModel::burgers1d(), &g).unwrap();
        assert_eq!(r.max_divergence, 0.0);
        assert!(r.stokes_residual < 1e-12);
    }

    #[test]
    fn stream_presets_are_divergence_free() {
        let g = grid2(32);
        for name in ["stream2d-smooth", "stream2d-rough"] {
            let f = FluxModel::preset(name, Some(&g), FluxParams::default()).unwrap();
            let r = check_geometry_compat(&f, &g).unwrap();
            assert!(r.max_divergence < 1e-10, "{name}: {}", r.max_divergence);
            assert!(r.stokes_residual < 1e-8, "{name}: {}", r.stokes_residual);
        }
    }

    #[test]
    fn unit_stream_function_stokes_residual() {
        let g = grid2(32);
        let psi = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin());
        let f = FluxModel::new("t", 2, Direction::Stream(psi), Profile::Quadratic, 0.0, 4.0).unwrap();
        let u = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        assert!(stokes_residual(&f, &u).unwrap() < 1e-8);
        let r = check_geometry_compat(&f, &g).unwrap();
        assert!(r.max_divergence < 1e-10);
    }

    #[test]
    fn constant_direction_unchanged_by_regularisation() {
        let f = FluxModel::burgers1d();
        let fk = f.regularize(3);
        assert_eq!(f.direction(), fk.direction());
        let g = TorusGrid::new(1, 16).unwrap();
        assert_eq!(f.l1_gap(&fk, &g).unwrap(), 0.0);
    }

    #[test]
    fn smooth_direction_regularisation_matches_multiplier() {
        let g = grid2(16);
        let params = FluxParams {
            sigma0: Some(0.05),
            ..Default::default()
        };
        let f = FluxModel::preset("stream2d-smooth", Some(&g), params).unwrap();
        for k in [0u32, 4, 10] {
            let fk = f.regularize(k);
            let sigma = 0.05 * 0.5f64.powi(k as i32);
            // only |k| = (1,1) is present: a_k = m a with m = exp(-σ²(2π)²·2/2)
            let m = (-sigma * sigma * 4.0 * PI * PI).exp();
            let a = f.direction_samples(&g).unwrap();
            let ak = fk.direction_samples(&g).unwrap();
            let err = (0..g.len())
                .map(|j| (ak[0][j] - m * a[0][j]).abs().max((ak[1][j] - m * a[1][j]).abs()))
                .fold(0.0, f64::max);
            assert!(err < 1e-14);
            let tail = (1.0 - m) * 1.0; // |a| ≤ 1 for the default amplitude
            if tail < 1e-6 {
                let gap = (0..g.len())
                    .map(|j| (ak[0][j] - a[0][j]).abs().max((ak[1][j] - a[1][j]).abs()))
                    .fold(0.0, f64::max);
                assert!(gap < 1e-6);
            }
        }
    }

    #[test]
    fn rough_regularisation_gap_shrinks_with_level() {
        let g = grid2(64);
        let f = FluxModel::preset("stream2d-rough", Some(&g), FluxParams::default()).unwrap();
        let gaps: Vec<f64> = (0..=6).map(|k| f.l1_gap(&f.regularize(k), &g).unwrap()).collect();
        assert!(gaps[4] < gaps[0]);
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0], "{gaps:?}");
        }
    }

    #[test]
    fn mollification_widths_compose_in_quadrature() {
        let g = grid2(32);
        let f = FluxModel::preset("stream2d-rough", Some(&g), FluxParams::default()).unwrap();
        let twice = f.mollify(0.03).mollify(0.04);
        let once = f.mollify(0.05);
        let (Direction::Stream(a), Direction::Stream(b)) = (twice.direction(), once.direction()) else {
            panic!("stream directions expected");
        };
        let err = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!((twice.regularization_width() - 0.05).abs() < 1e-15);
        let r = check_geometry_compat(&twice, &g).unwrap();
        assert!(r.max_divergence < 1e-10);
    }

    #[test]
    fn lipschitz_and_growth_bounds_hold_on_samples() {
        let g = grid2(32);
        for name in ["stream2d-smooth", "stream2d-rough"] {
            let f = FluxModel::preset(name, Some(&g), FluxParams::default()).unwrap();
            let a = f.direction_samples(&g).unwrap();
            let lip = f.lipschitz_bound();
            let growth = f.growth_bound();
            let r = f.lambda_box();
            for (ax, ay) in a[0].iter().zip(&a[1]) {
                let amag = ax.hypot(*ay);
                for l in 0..=20 {
                    let lam = -r + 2.0 * r * l as f64 / 20.0;
                    assert!(amag * f.profile().deriv(lam).abs() <= lip * (1.0 + 1e-12));
                    assert!(amag * f.profile().value(lam).abs() <= growth * (1.0 + lam.abs()) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn burgers_measure_halves_with_eta() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = FluxModel::burgers1d();
        let m: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&eta| nondegeneracy_measure(&f, &g, (-1.0, 1.0), eta, 720).unwrap().restricted)
            .collect();
        // brute-force bound 2η / min|ξ₁| with min|ξ₁| ≥ 0.1
        for (mm, eta) in m.iter().zip([0.1, 0.05, 0.025]) {
            assert!(*mm <= 2.0 * eta / MIN_XI_PRIME + 1e-12);
        }
        assert!((m[1] / m[2] - 2.0).abs() < 0.05, "{m:?}");
        assert!(m[0] >= m[1] && m[1] >= m[2]);
        let e = nondegeneracy_measure(&f, &g, (-1.0, 1.0), 0.05, 720).unwrap();
        assert!(!e.degenerate);
        assert_eq!(e.literal, 2.0);
    }

    #[test]
    fn linear_flux_is_flagged() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = FluxModel::preset("linear1d", None, FluxParams::default()).unwrap();
        let e = nondegeneracy_measure(&f, &g, (-1.0, 1.0), 0.01, 360).unwrap();
        assert!((e.restricted - 2.0).abs() < 1e-12);
        assert!(e.degenerate);
    }

    #[test]
    fn zero_thickness_gives_zero_for_nondegenerate_flux() {
        let g = TorusGrid::new(1, 8).unwrap();
        let e = nondegeneracy_measure_with(&FluxModel::burgers1d(), &g, (-1.0, 1.0), 0.0, 64, 9)
            .unwrap();
        assert_eq!(e.restricted, 0.0);
    }

    #[test]
    fn empty_lambda_grid_rejected() {
        let g = TorusGrid::new(1, 8).unwrap();
        let f = FluxModel::burgers1d();
        assert!(nondegeneracy_measure(&f, &g, (1.0, 1.0), 0.1, 10).is_err());
        assert!(nondegeneracy_measure_with(&f, &g, (0.0, 1.0), 0.1, 10, 1).is_err());
    }

    #[test]
    fn measure_is_monotone_in_eta() {
        let g = grid2(16);
        let f = FluxModel::preset("stream2d-smooth", Some(&g), FluxParams::default()).unwrap();
        let mut prev = f64::INFINITY;
        for eta in [0.2, 0.1, 0.05, 0.0] {
            let e = nondegeneracy_measure_with(&f, &g, (-1.0, 1.0), eta, 64, 33).unwrap();
            assert!(e.restricted <= prev + 1e-12);
            prev = e.restricted;
        }
    }

    #[test]
    fn two_d_presets_need_grid() {
        assert!(FluxModel::preset("stream2d-smooth", None, FluxParams::default()).is_err());
        assert!(FluxModel::preset("nope", None, FluxParams::default()).is_err());
    }

    #[test]
    fn sampled_divergence_is_spectral_zero_for_rough_preset() {
        let g = grid2(64);
        let f = FluxModel::preset("stream2d-rough", Some(&g), FluxParams::default()).unwrap();
        let comps = f.direction_spectral(&g).unwrap();
        let samples: Vec<Vec<f64>> = comps.iter().map(|c| c.to_grid()).collect();
        let re: Vec<SpectralField> = samples
            .iter()
            .map(|s| forward_transform(&g, s).unwrap())
            .collect();
        let div = divergence(&re).to_grid();
        assert!(div.iter().all(|v| v.abs() < 1e-10));
    }
}
