//! Seeded scalar Brownian paths with refinement-consistent coarsening.
//!
//! A path stores the cumulative values `W(t_i)` on a uniform fine lattice.
//! Coarsening subsamples those values, so every coarse increment is the
//! partial sum of the fine increments it covers and `W(T)` is shared exactly
//! by all resolutions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WienerPath {
    seed: u64,
    dt: f64,
    values: Vec<f64>,
}

/// Number of steps of size `dt` covering `[0, t_end]`; rejects horizons
/// that are not an integer multiple of `dt` (relative slack 1e-9).
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {t_end}")));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end || steps < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {t_end} is not a multiple of dt {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Draws `N(0, dt)` increments from a ChaCha8 stream seeded with `seed`.
pub fn sample_wiener(seed: u64, dt_fine: f64, t_end: f64) -> Result<WienerPath> {
    let steps = step_count(dt_fine, t_end)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = dt_fine.sqrt();
    let mut values = Vec::with_capacity(steps + 1);
    let mut w = 0.0;
    values.push(w);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        values.push(w);
    }
    Ok(WienerPath {
        seed,
        dt: dt_fine,
        values,
    })
}

impl WienerPath {
    /// Builds a path from explicit cumulative values, `values[0]` must be 0.
    pub fn from_values(seed: u64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "path needs W(0) = 0 and at least one step".into(),
            ));
        }
        Ok(Self { seed, dt, values })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increment(&self, step: usize) -> f64 {
        self.values[step + 1] - self.values[step]
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }

    /// Path on the lattice with step `factor * dt`.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::InvalidParameter(format!(
                "coarsening factor {factor} does not divide {} fine steps",
                self.steps()
            )));
        }
        Ok(WienerPath {
            seed: self.seed,
            dt: self.dt * factor as f64,
            values: self.values.iter().step_by(factor).copied().collect(),
        })
    }

    /// Coarsens to step `dt`, which must be a multiple of the fine step.
    pub fn with_step(&self, dt: f64) -> Result<WienerPath> {
        let ratio = dt / self.dt;
        let factor = ratio.round();
        if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
            return Err(Error::InvalidParameter(format!(
                "step {dt} is not a multiple of the fine step {}",
                self.dt
            )));
        }
        self.coarsen(factor as usize)
    }

    /// Restriction to the first `steps` steps.
    pub fn truncated(&self, steps: usize) -> Result<WienerPath> {
        if steps == 0 || steps > self.steps() {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate {} steps to {steps}",
                self.steps()
            )));
        }
        Ok(WienerPath {
            seed: self.seed,
            dt: self.dt,
            values: self.values[..=steps].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarsen_by_one_is_identity() {
        let p = sample_wiener(3, 1e-3, 1.0).unwrap();
        assert_eq!(p.coarsen(1).unwrap(), p);
    }

    #[test]
    fn coarse_terminal_value_is_shared() {
        let p = sample_wiener(9, 1e-3, 1.0).unwrap();
        for f in [2, 5, 10, 100, 1000] {
            let c = p.coarsen(f).unwrap();
            assert_eq!(c.terminal(), p.terminal());
            assert_eq!(c.steps(), 1000 / f);
        }
    }

    #[test]
    fn coarse_increments_are_partial_sums() {
        let p = sample_wiener(1, 1e-2, 1.0).unwrap();
        let c = p.coarsen(4).unwrap();
        for j in 0..c.steps() {
            let s: f64 = (4 * j..4 * j + 4).map(|i| p.increment(i)).sum();
            assert!((c.increment(j) - s).abs() < 1e-14);
        }
    }

    #[test]
    fn non_dividing_factor_rejected() {
        let p = sample_wiener(1, 0.1, 1.0).unwrap();
        assert!(p.coarsen(3).is_err());
        assert!(p.coarsen(0).is_err());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = sample_wiener(42, 1e-3, 0.5).unwrap();
        let b = sample_wiener(42, 1e-3, 0.5).unwrap();
        assert_eq!(a, b);
        let c = sample_wiener(43, 1e-3, 0.5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn increment_variance_matches_dt() {
        let dt = 1e-3;
        let p = sample_wiener(2024, dt, 100.0).unwrap();
        assert_eq!(p.steps(), 100_000);
        let n = p.steps() as f64;
        let mean: f64 = p.increments().sum::<f64>() / n;
        let var: f64 = p.increments().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(var > 0.97 * dt && var < 1.03 * dt, "var/dt = {}", var / dt);
    }

    #[test]
    fn horizon_must_be_multiple_of_step() {
        assert!(sample_wiener(0, 0.3, 1.0).is_err());
        assert!(sample_wiener(0, -1.0, 1.0).is_err());
        let p = sample_wiener(0, 0.1, 1.0).unwrap();
        assert!(p.with_step(0.25).is_err());
        assert_eq!(p.with_step(0.2).unwrap().steps(), 5);
    }
}
