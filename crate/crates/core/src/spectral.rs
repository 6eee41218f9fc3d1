//! Flat-torus spectral machinery.
//!
//! The compact manifold is the unit torus `[0,1)^d`, `d ∈ {1, 2}`, with the
//! Laplace–Beltrami eigenbasis `e_k(x) = exp(2πi k·x)`. The operator
//! `Λ² = I − Δ` is diagonal with eigenvalue `1 + (2π|k|)²` on `e_k`.
//!
//! Coefficients are stored in FFT order (index `i` maps to wavenumber `i` for
//! `i ≤ n/2`, `i − n` otherwise), row-major in 2D. They are normalised so that
//! `coeff(k) = ∫ u ē_k dx`, i.e. the orthonormal-basis coordinates of `u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Wavevector; the second component is zero on `T¹`.
pub type Wavevector = [i64; 2];

/// Eigenvalue of `Λ² = I − Δ` on the mode `k`.
pub fn lambda_sq(k: Wavevector) -> f64 {
    let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
    1.0 + 4.0 * PI * PI * k2
}

/// Uniform lattice on the unit torus, with cached FFT plans.
#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis must be even and >= 4, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self { dim, n, fwd, inv })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quad_weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavevector(&self, flat: usize) -> Wavevector {
        match self.dim {
            1 => [self.wavenumber(flat), 0],
            _ => [self.wavenumber(flat / self.n), self.wavenumber(flat % self.n)],
        }
    }

    fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k.abs() > half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    /// Flat index of a wavevector, if representable on this grid.
    pub fn flat_of(&self, k: Wavevector) -> Option<usize> {
        match self.dim {
            1 if k[1] != 0 => None,
            1 => self.axis_index(k[0]),
            _ => {
                let i0 = self.axis_index(k[0])?;
                let i1 = self.axis_index(k[1])?;
                Some(i0 * self.n + i1)
            }
        }
    }

    /// Flat index of `−k`; the Nyquist component maps to itself.
    pub fn partner(&self, flat: usize) -> usize {
        let n = self.n;
        match self.dim {
            1 => (n - flat) % n,
            _ => {
                let (i0, i1) = (flat / n, flat % n);
                ((n - i0) % n) * n + (n - i1) % n
            }
        }
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = (self.n / 2) as i64;
        let k = self.wavevector(flat);
        k[0] == half || (self.dim == 2 && k[1] == half)
    }

    /// Largest retained wavenumber per axis under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    pub fn in_band(&self, flat: usize) -> bool {
        let k = self.wavevector(flat);
        let c = self.dealias_cutoff();
        k[0].abs() <= c && k[1].abs() <= c
    }

    /// Physical coordinates of a lattice point.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [flat as f64 * h, 0.0],
            _ => [(flat / self.n) as f64 * h, (flat % self.n) as f64 * h],
        }
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |j| self.point(j))
    }

    /// Samples `f` on the lattice.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Quadrature `∫ u dx` of a lattice function.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.quad_weight()
    }

    fn fft_nd(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(buf);
        if self.dim == 2 {
            transpose(buf, self.n);
            plan.process(buf);
            transpose(buf, self.n);
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Fourier coefficients of a real field on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Forward transform of lattice samples. The result is exactly Hermitian.
pub fn forward_transform(grid: &TorusGrid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_nd(&mut buf, &grid.fwd);
    let w = grid.quad_weight();
    for c in &mut buf {
        *c *= w;
    }
    let mut field = SpectralField {
        grid: grid.clone(),
        coeffs: buf,
    };
    field.enforce_hermitian();
    Ok(field)
}

/// Inverse transform back to lattice samples.
pub fn inverse_transform(field: &SpectralField) -> Vec<f64> {
    field.to_grid()
}

impl SpectralField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Builds a field from coefficients in FFT order. Fails on length mismatch.
    pub fn from_coeffs(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        forward_transform(grid, &grid.sample(f)).expect("sampled on the grid")
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the mode `k`, zero if `k` is not on the grid.
    pub fn coeff(&self, k: Wavevector) -> Complex64 {
        self.grid
            .flat_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn to_grid(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_nd(&mut buf, &self.grid.inv);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Symmetrises `coeff(−k) = conj(coeff(k))`.
    pub fn enforce_hermitian(&mut self) {
        for i in 0..self.coeffs.len() {
            let p = self.grid.partner(i);
            if p < i {
                continue;
            }
            if p == i {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[p].conj());
                self.coeffs[i] = avg;
                self.coeffs[p] = avg.conj();
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        (0..self.coeffs.len()).all(|i| {
            let p = self.grid.partner(i);
            (self.coeffs[i] - self.coeffs[p].conj()).norm() <= tol * scale
        })
    }

    /// `Σ |coeff|²`, equal to `∫ u²` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `‖u‖²_{H^s} = Σ λ_k^{2s} |û_k|²`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| lambda_sq(self.grid.wavevector(i)).powf(s) * c.norm_sqr())
            .sum()
    }

    /// `‖∇u‖²_{L²} = Σ (λ_k² − 1) |û_k|²`.
    pub fn grad_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (lambda_sq(self.grid.wavevector(i)) - 1.0) * c.norm_sqr())
            .sum()
    }

    /// `∫ u v dx` for real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn map_modes(&self, f: impl Fn(Wavevector, Complex64) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.wavevector(i), c))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Partial derivatives; Nyquist modes are dropped so that each component
    /// stays Hermitian.
    pub fn gradient(&self) -> Vec<SpectralField> {
        (0..self.grid.dim)
            .map(|axis| {
                let mut g = self.map_modes(|k, c| c * Complex64::new(0.0, 2.0 * PI * k[axis] as f64));
                for i in 0..g.coeffs.len() {
                    if self.grid.is_nyquist(i) {
                        g.coeffs[i] = Complex64::default();
                    }
                }
                g
            })
            .collect()
    }

    pub fn laplacian(&self) -> SpectralField {
        self.map_modes(|k, c| c * (1.0 - lambda_sq(k)))
    }

    /// Keeps only the modes inside the two-thirds band.
    pub fn dealiased(&self) -> SpectralField {
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            if !self.grid.in_band(i) {
                out.coeffs[i] = Complex64::default();
            }
        }
        out
    }

    /// Keeps only modes with `max_i |k_i| ≤ m`.
    pub fn truncated(&self, m: i64) -> SpectralField {
        self.map_modes(|k, c| {
            if k[0].abs() <= m && k[1].abs() <= m {
                c
            } else {
                Complex64::default()
            }
        })
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        self.map_modes(|_, c| c * a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Same field re-expressed on a grid with `n' ≥ n` (zero padding) or
    /// `n' < n` (truncation). Nyquist modes of the source are split evenly
    /// when padding so the result stays real.
    pub fn resampled(&self, target: &TorusGrid) -> Result<SpectralField> {
        if target.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                got: target.dim(),
            });
        }
        let mut out = SpectralField::zeros(target);
        let src_half = (self.grid.n / 2) as i64;
        let tgt_half = (target.n / 2) as i64;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavevector(i);
            let nyq_axes = k.iter().take(self.grid.dim).filter(|v| v.abs() == src_half).count();
            if target.n == self.grid.n {
                out.coeffs[i] = c;
                continue;
            }
            if nyq_axes == 0 {
                // ±n'/2 both land on the target Nyquist slot
                if k[0].abs() <= tgt_half && k[1].abs() <= tgt_half {
                    let j = target.flat_of(k).expect("inside target band");
                    out.coeffs[j] += c;
                }
                continue;
            }
            if target.n < self.grid.n {
                continue;
            }
            // split the Nyquist mode between ±n/2 on the larger grid
            let share = c / (1u32 << nyq_axes) as f64;
            let signs0: &[i64] = if k[0].abs() == src_half { &[1, -1] } else { &[1] };
            let signs1: &[i64] = if self.grid.dim == 2 && k[1].abs() == src_half {
                &[1, -1]
            } else {
                &[1]
            };
            for s0 in signs0 {
                for s1 in signs1 {
                    let kk = [k[0] * s0, k[1] * s1];
                    if let Some(j) = target.flat_of(kk) {
                        out.coeffs[j] += share;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Values of the filtered field `Σ w(k) c_k e_k` at the points
    /// `(i + shift)/mesh_n` of a uniform mesh with `mesh_n` points per axis.
    /// Exact for any `mesh_n`: the field is first padded past its own
    /// Nyquist frequency.
    pub fn sample_shifted(
        &self,
        mesh_n: usize,
        shift: [f64; 2],
        weight: impl Fn(Wavevector) -> f64,
    ) -> Result<Vec<f64>> {
        if mesh_n == 0 {
            return Err(Error::InvalidGrid("mesh needs at least one cell".into()));
        }
        let mut np = mesh_n * (self.grid.n / mesh_n + 1);
        if np % 2 == 1 {
            np *= 2;
        }
        let padded = self.resampled(&TorusGrid::new(self.grid.dim, np)?)?;
        let h = 1.0 / mesh_n as f64;
        let shifted = padded.map_modes(|k, c| {
            let phase = 2.0 * PI * (k[0] as f64 * shift[0] + k[1] as f64 * shift[1]) * h;
            c * Complex64::from_polar(weight(k), phase)
        });
        let vals = shifted.to_grid();
        let stride = np / mesh_n;
        Ok(match self.grid.dim {
            1 => vals.iter().step_by(stride).copied().collect(),
            _ => (0..mesh_n)
                .flat_map(|i| (0..mesh_n).map(move |j| (i, j)))
                .map(|(i, j)| vals[i * stride * np + j * stride])
                .collect(),
        })
    }
}

/// Divergence of a vector field given by spectral components.
pub fn divergence(components: &[SpectralField]) -> SpectralField {
    let grid = components[0].grid().clone();
    let mut out = SpectralField::zeros(&grid);
    for (axis, comp) in components.iter().enumerate() {
        for (i, c) in comp.coeffs.iter().enumerate() {
            if grid.is_nyquist(i) {
                continue;
            }
            let k = grid.wavevector(i);
            out.coeffs[i] += c * Complex64::new(0.0, 2.0 * PI * k[axis] as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(grid: &TorusGrid, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_no_nyquist(grid: &TorusGrid, seed: u64) -> SpectralField {
        let f = forward_transform(grid, &random_samples(grid, seed)).unwrap();
        let mut g = f.clone();
        for i in 0..g.coeffs.len() {
            if grid.is_nyquist(i) {
                g.coeffs[i] = Complex64::default();
            }
        }
        g
    }

    #[test]
    fn lambda_sq_values() {
        assert_eq!(lambda_sq([0, 0]), 1.0);
        assert!((lambda_sq([1, 0]) - 40.478_417_604_357_43).abs() < 1e-10);
        let expected = 1.0 + 4.0 * PI * PI * 25.0;
        assert!((lambda_sq([3, 4]) - expected).abs() < 1e-10);
        assert!((expected - 987.96).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(1, 7).is_err());
        assert!(TorusGrid::new(2, 2).is_err());
    }

    #[test]
    fn quadrature_of_one_is_volume() {
        for (d, n) in [(1, 16), (2, 8)] {
            let g = TorusGrid::new(d, n).unwrap();
            assert!((g.integrate(&vec![1.0; g.len()]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_and_cosine_transforms() {
        let g = TorusGrid::new(1, 16).unwrap();
        let c = forward_transform(&g, &[2.5; 16]).unwrap();
        assert!((c.coeff([0, 0]).re - 2.5).abs() < 1e-14);
        assert!(c.coeffs()[1..].iter().all(|z| z.norm() < 1e-14));

        let cosf = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        for i in 0..16 {
            let k = g.wavevector(i)[0];
            let want = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((cosf.coeffs()[i] - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for (d, n, seed) in [(1, 64, 1), (2, 16, 2), (2, 32, 3)] {
            let g = TorusGrid::new(d, n).unwrap();
            let s = random_samples(&g, seed);
            let f = forward_transform(&g, &s).unwrap();
            assert!(f.is_hermitian(0.0));
            let back = f.to_grid();
            let err = s.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "round trip error {err}");
            let quad: f64 = g.integrate(&s.iter().map(|v| v * v).collect::<Vec<_>>());
            assert!((f.l2_norm_sq() - quad).abs() <= 1e-12 * quad);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = TorusGrid::new(1, 8).unwrap();
        assert!(matches!(
            forward_transform(&g, &[0.0; 7]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sobolev_norms_of_simple_fields() {
        let g = TorusGrid::new(1, 32).unwrap();
        let c = SpectralField::from_fn(&g, |_| 3.0);
        for s in [-2.0, 0.0, 1.0, 2.5] {
            assert!((c.sobolev_norm_sq(s) - 9.0).abs() < 1e-12);
        }
        let u = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        let l1 = 1.0 + 4.0 * PI * PI;
        assert!((u.sobolev_norm_sq(1.0) - l1 / 2.0).abs() < 1e-12);
        assert!((u.sobolev_norm_sq(-1.0) - 1.0 / (2.0 * l1)).abs() < 1e-15);
        assert!((u.sobolev_norm_sq(0.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gradient_and_laplacian() {
        let g = TorusGrid::new(1, 32).unwrap();
        let c = SpectralField::from_fn(&g, |_| 1.7);
        assert!(c.gradient()[0].coeffs().iter().all(|z| z.norm() == 0.0));

        let s = SpectralField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let lap = s.laplacian().to_grid();
        for (j, v) in lap.iter().enumerate() {
            let x = j as f64 / 32.0;
            assert!((v + 4.0 * PI * PI * (2.0 * PI * x).sin()).abs() < 1e-11);
        }

        for (d, n) in [(1, 32), (2, 16)] {
            let g = TorusGrid::new(d, n).unwrap();
            let u = random_no_nyquist(&g, 7);
            let dg = divergence(&u.gradient());
            let lap = u.laplacian();
            let scale = lap.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in dg.coeffs().iter().zip(lap.coeffs()) {
                assert!((a - b).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn laplacian_on_basis_mode() {
        let g = TorusGrid::new(2, 16).unwrap();
        let k = [2, -3];
        let mut e = SpectralField::zeros(&g);
        e.coeffs_mut()[g.flat_of(k).unwrap()] = Complex64::new(1.0, 0.0);
        let lap = e.laplacian();
        assert_eq!(lap.coeff(k), Complex64::new(1.0 - lambda_sq(k), 0.0));
    }

    #[test]
    fn laplacian_is_self_adjoint() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = forward_transform(&g, &random_samples(&g, 11)).unwrap();
        let v = forward_transform(&g, &random_samples(&g, 12)).unwrap();
        let lu = u.laplacian().to_grid();
        let lv = v.laplacian().to_grid();
        let us = u.to_grid();
        let vs = v.to_grid();
        let a = g.integrate(&lu.iter().zip(&vs).map(|(p, q)| p * q).collect::<Vec<_>>());
        let b = g.integrate(&us.iter().zip(&lv).map(|(p, q)| p * q).collect::<Vec<_>>());
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn truncation_keeps_low_projections() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = forward_transform(&g, &random_samples(&g, 5)).unwrap();
        let m = 3;
        let t = u.truncated(m);
        for i in 0..g.len() {
            let k = g.wavevector(i);
            if k[0].abs() <= m && k[1].abs() <= m {
                assert_eq!(t.coeffs()[i], u.coeffs()[i]);
            }
        }
    }

    #[test]
    fn partner_is_involution() {
        for (d, n) in [(1, 8), (2, 8)] {
            let g = TorusGrid::new(d, n).unwrap();
            for i in 0..g.len() {
                assert_eq!(g.partner(g.partner(i)), i);
                let k = g.wavevector(i);
                let p = g.wavevector(g.partner(i));
                if !g.is_nyquist(i) {
                    assert_eq!(p, [-k[0], -k[1]]);
                }
            }
        }
    }

    #[test]
    fn dealias_cutoff_rule() {
        assert_eq!(TorusGrid::new(1, 64).unwrap().dealias_cutoff(), 21);
        assert_eq!(TorusGrid::new(1, 32).unwrap().dealias_cutoff(), 10);
        assert_eq!(TorusGrid::new(1, 4).unwrap().dealias_cutoff(), 1);
    }

    #[test]
    fn resampling_preserves_values() {
        let g = TorusGrid::new(1, 16).unwrap();
        let fine = TorusGrid::new(1, 64).unwrap();
        let u = forward_transform(&g, &random_samples(&g, 3)).unwrap();
        let up = u.resampled(&fine).unwrap();
        assert!(up.is_hermitian(1e-15));
        let us = u.to_grid();
        let ups = up.to_grid();
        for j in 0..16 {
            assert!((us[j] - ups[4 * j]).abs() < 1e-12);
        }
        let back = up.resampled(&g).unwrap();
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn forward_inverse_identity(seed in 0u64..1000, n in prop::sample::select(vec![4usize, 8, 12, 32])) {
                let g = TorusGrid::new(1, n).unwrap();
                let s = random_samples(&g, seed);
                let back = forward_transform(&g, &s).unwrap().to_grid();
                for (a, b) in s.iter().zip(&back) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
