//! Finite-volume reference solver for the limiting conservation law
//! `du + div f(x, u) dt = Φ(x, u) dW`.
//!
//! Each step is split: a conservative Engquist–Osher update for the flux,
//! then a pathwise Milstein update for the noise. In 2D the face-normal
//! velocities come from differences of the stream function at cell corners,
//! so the discrete divergence of `a` vanishes exactly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::flux::{Direction, FluxModel, Profile};
use crate::noise::NoiseModel;
use crate::spectral::SpectralField;
use crate::wiener::{step_count, WienerPath};

pub const CFL: f64 = 0.45;

/// Cell averages on a uniform periodic mesh, row-major in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct FvState {
    pub dim: usize,
    pub mesh_n: usize,
    pub t: f64,
    pub cells: Vec<f64>,
}

impl FvState {
    pub fn new(dim: usize, mesh_n: usize, cells: Vec<f64>) -> Result<Self> {
        if !(dim == 1 || dim == 2) || mesh_n < 2 {
            return Err(Error::InvalidGrid(format!("dim {dim}, mesh {mesh_n}")));
        }
        if cells.len() != mesh_n.pow(dim as u32) {
            return Err(Error::DimensionMismatch {
                expected: mesh_n.pow(dim as u32),
                got: cells.len(),
            });
        }
        if cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: 0.0 });
        }
        Ok(Self {
            dim,
            mesh_n,
            t: 0.0,
            cells,
        })
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(dim: usize, mesh_n: usize, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let h = 1.0 / mesh_n as f64;
        let cells = (0..mesh_n.pow(dim as u32))
            .map(|c| f(centre(dim, mesh_n, c, h)))
            .collect();
        Self::new(dim, mesh_n, cells)
    }

    /// Exact cell averages of a spectral field. The spectral lattice and the
    /// mesh must divide one another.
    pub fn from_spectral(field: &SpectralField, mesh_n: usize) -> Result<Self> {
        let ns = field.grid().n_per_axis();
        if !ns.is_multiple_of(mesh_n) && !mesh_n.is_multiple_of(ns) {
            return Err(Error::MeshMismatch(format!(
                "spectral lattice {ns} and FV mesh {mesh_n} do not divide each other"
            )));
        }
        let h = 1.0 / mesh_n as f64;
        let sinc = |k: i64| {
            let z = std::f64::consts::PI * k as f64 * h;
            if k == 0 {
                1.0
            } else {
                z.sin() / z
            }
        };
        let cells = field.sample_shifted(mesh_n, [0.5, 0.5], |k| sinc(k[0]) * sinc(k[1]))?;
        Self::new(field.grid().dim(), mesh_n, cells)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.mesh_n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `∫ u dx`.
    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn sup_abs(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete total variation, `h^{d−1} Σ |jumps|`.
    pub fn total_variation(&self) -> f64 {
        let n = self.mesh_n;
        let mut tv = 0.0;
        match self.dim {
            1 => {
                for i in 0..n {
                    tv += (self.cells[(i + 1) % n] - self.cells[i]).abs();
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let c = self.cells[i * n + j];
                        tv += (self.cells[((i + 1) % n) * n + j] - c).abs();
                        tv += (self.cells[i * n + (j + 1) % n] - c).abs();
                    }
                }
                tv *= self.spacing();
            }
        }
        tv
    }

    /// Averages blocks of `factor^dim` cells.
    pub fn coarsened(&self, factor: usize) -> Result<FvState> {
        if factor == 0 || !self.mesh_n.is_multiple_of(factor) {
            return Err(Error::MeshMismatch(format!(
                "factor {factor} does not divide mesh {}",
                self.mesh_n
            )));
        }
        let m = self.mesh_n / factor;
        let n = self.mesh_n;
        let cells = match self.dim {
            1 => (0..m)
                .map(|i| self.cells[i * factor..(i + 1) * factor].iter().sum::<f64>() / factor as f64)
                .collect(),
            _ => {
                let mut out = vec![0.0; m * m];
                for i in 0..n {
                    for j in 0..n {
                        out[(i / factor) * m + j / factor] += self.cells[i * n + j];
                    }
                }
                let w = 1.0 / (factor * factor) as f64;
                out.iter_mut().for_each(|v| *v *= w);
                out
            }
        };
        Ok(FvState {
            dim: self.dim,
            mesh_n: m,
            t: self.t,
            cells,
        })
    }
}

fn centre(dim: usize, n: usize, c: usize, h: f64) -> [f64; 2] {
    match dim {
        1 => [(c as f64 + 0.5) * h, 0.0],
        _ => [((c / n) as f64 + 0.5) * h, ((c % n) as f64 + 0.5) * h],
    }
}

/// `∫ |a − b| dx`. States on different meshes are compared on the coarser
/// one after block averaging; the meshes must divide one another.
pub fn l1_distance(a: &FvState, b: &FvState) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let (fine, coarse) = if a.mesh_n >= b.mesh_n { (a, b) } else { (b, a) };
    if fine.mesh_n % coarse.mesh_n != 0 {
        return Err(Error::MeshMismatch(format!(
            "meshes {} and {} do not divide each other",
            a.mesh_n, b.mesh_n
        )));
    }
    let f = fine.coarsened(fine.mesh_n / coarse.mesh_n)?;
    Ok(f.cells
        .iter()
        .zip(&coarse.cells)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * coarse.cell_volume())
}

/// `∫ |u − b| dx` after conservative restriction of `u` to the mesh of `b`.
pub fn l1_distance_spectral(u: &SpectralField, b: &FvState) -> Result<f64> {
    l1_distance(&FvState::from_spectral(u, b.mesh_n)?, b)
}

/// Engquist–Osher flux for `a g(u)` across a face with normal velocity `a`.
fn eo_flux(profile: Profile, a: f64, left: f64, right: f64) -> f64 {
    let (lp, lm) = profile.eo_split(left);
    let (rp, rm) = profile.eo_split(right);
    let g0 = profile.value(0.0);
    if a >= 0.0 {
        a * (g0 + lp + rm)
    } else {
        a * (g0 + lm + rp)
    }
}

/// Precomputed face velocities and cell centres for one mesh.
pub struct FvScheme<'a> {
    dim: usize,
    mesh_n: usize,
    profile: Profile,
    noise: &'a NoiseModel,
    /// Normal velocity on the face after each cell, per axis.
    faces: Vec<Vec<f64>>,
    centres: Vec<[f64; 2]>,
    max_speed: f64,
}

impl<'a> FvScheme<'a> {
    pub fn new(flux: &FluxModel, noise: &'a NoiseModel, mesh_n: usize) -> Result<Self> {
        let dim = flux.dim();
        FvState::new(dim, mesh_n, vec![0.0; mesh_n.pow(dim as u32)])?;
        let n = mesh_n;
        let h = 1.0 / n as f64;
        let faces: Vec<Vec<f64>> = match flux.direction() {
            Direction::Constant(a) => (0..dim).map(|d| vec![a[d]; n.pow(dim as u32)]).collect(),
            Direction::Stream(psi) => {
                if dim != 2 {
                    return Err(Error::InvalidParameter("stream direction needs 2D".into()));
                }
                // psi at corners (I h, J h)
                let c = psi.sample_shifted(n, [0.0, 0.0], |_| 1.0)?;
                let at = |i: usize, j: usize| c[(i % n) * n + j % n];
                let mut ax = vec![0.0; n * n];
                let mut ay = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        ax[i * n + j] = -(at(i + 1, j + 1) - at(i + 1, j)) / h;
                        ay[i * n + j] = (at(i + 1, j + 1) - at(i, j + 1)) / h;
                    }
                }
                vec![ax, ay]
            }
        };
        let max_speed = faces
            .iter()
            .map(|f| f.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum();
        let centres = (0..n.pow(dim as u32)).map(|c| centre(dim, n, c, h)).collect();
        Ok(Self {
            dim,
            mesh_n,
            profile: if flux.is_zero() { Profile::Zero } else { flux.profile() },
            noise,
            faces,
            centres,
            max_speed,
        })
    }

    /// Largest step satisfying the CFL condition for `state`.
    pub fn max_stable_dt(&self, state: &FvState) -> f64 {
        let s = self.max_speed * self.profile.deriv_sup(state.sup_abs());
        if s == 0.0 {
            f64::INFINITY
        } else {
            CFL / (self.mesh_n as f64 * s)
        }
    }

    fn check(&self, state: &FvState) -> Result<()> {
        if state.dim != self.dim || state.mesh_n != self.mesh_n {
            return Err(Error::MeshMismatch(format!(
                "state {}D/{} vs scheme {}D/{}",
                state.dim, state.mesh_n, self.dim, self.mesh_n
            )));
        }
        Ok(())
    }

    /// Conservative flux update only.
    pub fn transport_step(&self, state: &FvState, dt: f64) -> Result<FvState> {
        self.check(state)?;
        let limit = self.max_stable_dt(state);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let mut next = state.clone();
        next.t += dt;
        if self.profile == Profile::Zero {
            return Ok(next);
        }
        let n = self.mesh_n;
        let r = dt * n as f64;
        let u = &state.cells;
        for (axis, faces) in self.faces.iter().enumerate() {
            let neighbour = |c: usize| -> usize {
                match (self.dim, axis) {
                    (1, _) => (c + 1) % n,
                    (_, 0) => (c + n) % (n * n),
                    _ => (c / n) * n + (c % n + 1) % n,
                }
            };
            let fluxes: Vec<f64> = (0..u.len())
                .map(|c| eo_flux(self.profile, faces[c], u[c], u[neighbour(c)]))
                .collect();
            for (c, flux) in fluxes.iter().enumerate() {
                next.cells[c] -= r * flux;
                next.cells[neighbour(c)] += r * flux;
            }
        }
        Ok(next)
    }

    /// Pathwise Milstein update `u + Φ ΔW + ½ Φ ∂_λΦ (ΔW² − dt)`.
    pub fn noise_step(&self, state: &mut FvState, dw: f64, dt: f64) {
        if self.noise.is_zero() {
            return;
        }
        for (v, &x) in state.cells.iter_mut().zip(&self.centres) {
            let p = self.noise.phi(x, *v);
            let dp = self.noise.dphi(x, *v);
            *v += p * dw + 0.5 * p * dp * (dw * dw - dt);
        }
    }

    pub fn step(&self, state: &FvState, dw: f64, dt: f64) -> Result<FvState> {
        let mut next = self.transport_step(state, dt)?;
        self.noise_step(&mut next, dw, dt);
        if next.cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: next.t });
        }
        Ok(next)
    }

    /// Runs to `t_end` with step `dt`, driven by `path` coarsened to `dt`;
    /// keeps every `sample_every`-th state plus the initial one.
    pub fn simulate(
        &self,
        u0: &FvState,
        path: &WienerPath,
        dt: f64,
        t_end: f64,
        sample_every: usize,
    ) -> Result<FvPath> {
        let steps = step_count(dt, t_end)?;
        let coarse = path.with_step(dt)?;
        if coarse.steps() < steps {
            return Err(Error::InvalidParameter(format!(
                "Wiener path horizon {} shorter than T = {t_end}",
                path.horizon()
            )));
        }
        let stride = sample_every.max(1);
        let mut u = u0.clone();
        u.t = 0.0;
        let mut snapshots = vec![u.clone()];
        for n in 0..steps {
            u = self.step(&u, coarse.increment(n), dt)?;
            u.t = (n + 1) as f64 * dt;
            if (n + 1) % stride == 0 || n + 1 == steps {
                snapshots.push(u.clone());
            }
        }
        Ok(FvPath { snapshots })
    }
}

/// One split step of the scheme; builds the face data on each call.
pub fn fv_step(
    state: &FvState,
    dw: f64,
    flux: &FluxModel,
    noise: &NoiseModel,
    dt: f64,
) -> Result<FvState> {
    FvScheme::new(flux, noise, state.mesh_n)?.step(state, dw, dt)
}

#[derive(Debug, Clone)]
pub struct FvPath {
    pub snapshots: Vec<FvState>,
}

impl FvPath {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn terminal(&self) -> &FvState {
        self.snapshots.last().expect("initial snapshot present")
    }

    /// `t,cell_index,value` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,cell_index,value")?;
        for s in &self.snapshots {
            for (i, v) in s.cells.iter().enumerate() {
                writeln!(w, "{},{},{}", s.t, i, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn burgers_scheme(noise: &NoiseModel, n: usize) -> FvScheme<'_> {
        FvScheme::new(&FluxModel::burgers1d(), noise, n).unwrap()
    }

    fn run(scheme: &FvScheme, mut u: FvState, dt: f64, t_end: f64) -> FvState {
        for _ in 0..step_count(dt, t_end).unwrap() {
            u = scheme.step(&u, 0.0, dt).unwrap();
        }
        u
    }

    #[test]
    fn zero_flux_zero_noise_is_identity() {
        let noise = NoiseModel::zero();
        let scheme = FvScheme::new(&FluxModel::zero(1), &noise, 64).unwrap();
        let u = FvState::from_fn(1, 64, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let v = scheme.step(&u, 0.3, 0.1).unwrap();
        assert_eq!(u.cells, v.cells);
    }

    #[test]
    fn burgers_shock_moves_at_half_speed() {
        let n = 512;
        let noise = NoiseModel::zero();
        let scheme = burgers_scheme(&noise, n);
        // u = 1 on [0.2, 0.5): shock starts at 0.5, rarefaction head reaches
        // 0.6 by t = 0.4, shock at 0.7
        let u0 = FvState::from_fn(1, n, |x| if (0.2..0.5).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let u = run(&scheme, u0, 5e-4, 0.4);
        let h = 1.0 / n as f64;
        let cross = (0..n)
            .map(|i| (i as f64 + 0.5) * h)
            .zip(&u.cells)
            .filter(|(x, _)| (0.62..0.9).contains(x))
            .find(|(_, &v)| v < 0.5)
            .map(|(x, _)| x)
            .unwrap();
        assert!((cross - 0.7).abs() <= h, "shock at {cross}");
    }

    #[test]
    fn burgers_rarefaction_matches_similarity_solution() {
        let n = 512;
        let noise = NoiseModel::zero();
        let scheme = burgers_scheme(&noise, n);
        let u0 = FvState::from_fn(1, n, |x| if x[0] < 0.5 { -1.0 } else { 1.0 }).unwrap();
        let t = 0.25;
        let u = run(&scheme, u0, 5e-4, t);
        // fan centred at 0.5, stationary shock at 0 ≡ 1
        let exact = |x: f64| ((x - 0.5) / t).clamp(-1.0, 1.0);
        let h = 1.0 / n as f64;
        let err: f64 = (0..n)
            .map(|i| {
                // cell average of the exact solution by midpoint subcells
                let m = 16;
                let avg = (0..m)
                    .map(|s| exact((i as f64 + (s as f64 + 0.5) / m as f64) * h))
                    .sum::<f64>()
                    / m as f64;
                (u.cells[i] - avg).abs() * h
            })
            .sum();
        assert!(err < 2e-2, "L1 error {err}");
    }

    #[test]
    fn cfl_violation_rejected() {
        let noise = NoiseModel::zero();
        let scheme = burgers_scheme(&noise, 100);
        let u = FvState::from_fn(1, 100, |_| 2.0).unwrap();
        assert!((scheme.max_stable_dt(&u) - 0.45 / 200.0).abs() < 1e-15);
        assert!(matches!(scheme.step(&u, 0.0, 0.01), Err(Error::Cfl { .. })));
    }

    #[test]
    fn l1_distance_examples() {
        let a = FvState::from_fn(1, 64, |x| x[0].sin()).unwrap();
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let c1 = FvState::from_fn(2, 8, |_| 0.3).unwrap();
        let c2 = FvState::from_fn(2, 16, |_| -0.45).unwrap();
        assert!((l1_distance(&c1, &c2).unwrap() - 0.75).abs() < 1e-14);
        let g = TorusGrid::new(1, 32).unwrap();
        let s = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let zero = FvState::from_fn(1, 1024, |_| 0.0).unwrap();
        let d = l1_distance_spectral(&s, &zero).unwrap();
        assert!((d - 2.0 / PI).abs() < 1e-3, "{d}");
        let odd = FvState::from_fn(1, 24, |_| 0.0).unwrap();
        assert!(l1_distance_spectral(&s, &odd).is_err());
        assert!(l1_distance(&FvState::from_fn(1, 12, |_| 0.0).unwrap(), &zero).is_err());
    }

    #[test]
    fn restriction_gives_exact_cell_averages() {
        let g = TorusGrid::new(1, 16).unwrap();
        let s = SpectralField::from_fn(&g, |x| (2.0 * PI * 3.0 * x[0]).cos() + 0.25);
        for m in [4, 8, 16, 64] {
            let fv = FvState::from_spectral(&s, m).unwrap();
            let h = 1.0 / m as f64;
            for (i, v) in fv.cells.iter().enumerate() {
                let a = i as f64 * h;
                let exact = 0.25
                    + ((2.0 * PI * 3.0 * (a + h)).sin() - (2.0 * PI * 3.0 * a).sin())
                        / (2.0 * PI * 3.0 * h);
                assert!((v - exact).abs() < 1e-13, "m={m} i={i}");
            }
        }
        let g2 = TorusGrid::new(2, 8).unwrap();
        let s2 = SpectralField::from_fn(&g2, |x| (2.0 * PI * x[1]).sin() + 1.0);
        let fv = FvState::from_spectral(&s2, 16).unwrap();
        assert!((fv.mass() - 1.0).abs() < 1e-14);
        // cell (0, j): average over x2 ∈ [j h, (j+1) h] of sin(2π x2)
        let h = 1.0 / 16.0;
        let want = 1.0 + ((2.0 * PI * 3.0 * h).cos() - (2.0 * PI * 4.0 * h).cos()) / (2.0 * PI * h);
        assert!((fv.cells[3] - want).abs() < 1e-13);
    }

    #[test]
    fn stream_faces_are_divergence_free() {
        let g = TorusGrid::new(2, 32).unwrap();
        for name in ["stream2d-smooth", "stream2d-rough"] {
            let flux = FluxModel::preset(name, Some(&g), Default::default()).unwrap();
            let noise = NoiseModel::zero();
            let scheme = FvScheme::new(&flux, &noise, 32).unwrap();
            // constants are steady
            let u = FvState::from_fn(2, 32, |_| 0.7).unwrap();
            let v = scheme.step(&u, 0.0, 0.2 * scheme.max_stable_dt(&u)).unwrap();
            let dev = v.cells.iter().fold(0.0f64, |m, c| m.max((c - 0.7).abs()));
            assert!(dev < 1e-12, "{name}: {dev}");
        }
    }

    #[test]
    fn additive_noise_shifts_every_cell() {
        let noise = NoiseModel::constant(0.3);
        let scheme = burgers_scheme(&noise, 64);
        let u = FvState::from_fn(1, 64, |_| 0.1).unwrap();
        let v = scheme.step(&u, 0.5, 1e-3).unwrap();
        assert!(v.cells.iter().all(|c| (c - 0.25).abs() < 1e-15));
    }

    #[test]
    fn milstein_is_exact_for_linear_noise_one_step() {
        // u Φ = c u: Milstein gives u(1 + c dW + c²(dW² − dt)/2)
        let noise = NoiseModel::linear(0.4);
        let scheme = FvScheme::new(&FluxModel::zero(1), &noise, 8).unwrap();
        let u = FvState::from_fn(1, 8, |_| 2.0).unwrap();
        let (dw, dt) = (0.3, 0.01);
        let v = scheme.step(&u, dw, dt).unwrap();
        let want = 2.0 * (1.0 + 0.4 * dw + 0.08 * (dw * dw - dt));
        assert!((v.cells[0] - want).abs() < 1e-15);
    }

    #[test]
    fn csv_rows() {
        let noise = NoiseModel::zero();
        let scheme = burgers_scheme(&noise, 4);
        let p = crate::wiener::sample_wiener(0, 0.01, 0.02).unwrap();
        let u = FvState::from_fn(1, 4, |_| 0.0).unwrap();
        let path = scheme.simulate(&u, &p, 0.01, 0.02, 1).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1 + 3 * 4);
        assert!(s.starts_with("t,cell_index,value\n0,0,0\n"));
    }

    fn arb_cells(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.5f64..1.5, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn deterministic_step_is_conservative_tvd_and_monotone(
            a in arb_cells(48),
            bump in prop::collection::vec(0.0f64..0.5, 48),
        ) {
            let noise = NoiseModel::zero();
            let scheme = burgers_scheme(&noise, 48);
            let u = FvState::new(1, 48, a.clone()).unwrap();
            let w = FvState::new(1, 48, a.iter().zip(&bump).map(|(x, y)| x + y).collect()).unwrap();
            let dt = scheme.max_stable_dt(&w).min(scheme.max_stable_dt(&u));
            let su = scheme.step(&u, 0.0, dt).unwrap();
            let sw = scheme.step(&w, 0.0, dt).unwrap();
            prop_assert!((su.mass() - u.mass()).abs() < 1e-12);
            prop_assert!(su.total_variation() <= u.total_variation() + 1e-12);
            for (x, y) in su.cells.iter().zip(&sw.cells) {
                prop_assert!(x <= &(y + 1e-14));
            }
        }

        #[test]
        fn two_dimensional_step_is_conservative(a in arb_cells(256)) {
            let g = TorusGrid::new(2, 16).unwrap();
            let flux = FluxModel::preset("stream2d-rough", Some(&g), Default::default()).unwrap();
            let noise = NoiseModel::zero();
            let scheme = FvScheme::new(&flux, &noise, 16).unwrap();
            let u = FvState::new(2, 16, a).unwrap();
            let v = scheme.step(&u, 0.0, scheme.max_stable_dt(&u)).unwrap();
            prop_assert!((v.mass() - u.mass()).abs() < 1e-12);
            prop_assert!(v.sup_abs() <= u.sup_abs() + 1e-12);
        }

        #[test]
        fn l1_is_a_metric(a in arb_cells(32), b in arb_cells(32), c in arb_cells(32)) {
            let (a, b, c) = (
                FvState::new(1, 32, a).unwrap(),
                FvState::new(1, 32, b).unwrap(),
                FvState::new(1, 32, c).unwrap(),
            );
            let ab = l1_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, l1_distance(&b, &a).unwrap());
            prop_assert!(ab <= l1_distance(&a, &c).unwrap() + l1_distance(&c, &b).unwrap() + 1e-14);
        }
    }
}
