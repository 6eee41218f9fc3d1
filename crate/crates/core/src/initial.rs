//! Initial data described by a few parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::flux::random_band_limited;
use crate::spectral::{SpectralField, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `offset + amplitude · sin(2π k·x)`.
    Sine {
        amplitude: f64,
        #[serde(default = "first_mode")]
        mode: [i64; 2],
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude · cos(2π k·x)`.
    Cosine {
        amplitude: f64,
        #[serde(default = "first_mode")]
        mode: [i64; 2],
        #[serde(default)]
        offset: f64,
    },
    Constant { value: f64 },
    /// Random trigonometric polynomial with `max_i |k_i| ≤ max_mode`,
    /// normalised to unit `L²` norm and scaled by `amplitude`.
    Random {
        amplitude: f64,
        max_mode: i64,
        seed: u64,
    },
    /// Pointwise sum of the listed parts.
    Sum { parts: Vec<InitialCondition> },
}

fn first_mode() -> [i64; 2] {
    [1, 0]
}

impl InitialCondition {
    pub fn sine(amplitude: f64) -> Self {
        Self::Sine {
            amplitude,
            mode: first_mode(),
            offset: 0.0,
        }
    }

    pub fn to_field(&self, grid: &TorusGrid) -> SpectralField {
        let phase = |k: [i64; 2], x: [f64; 2]| 2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
        match *self {
            Self::Sum { ref parts } => parts
                .iter()
                .fold(SpectralField::zeros(grid), |acc, p| acc.axpy(1.0, &p.to_field(grid))),
            Self::Sine {
                amplitude,
                mode,
                offset,
            } => SpectralField::from_fn(grid, |x| offset + amplitude * phase(mode, x).sin()),
            Self::Cosine {
                amplitude,
                mode,
                offset,
            } => SpectralField::from_fn(grid, |x| offset + amplitude * phase(mode, x).cos()),
            Self::Constant { value } => SpectralField::from_fn(grid, |_| value),
            Self::Random {
                amplitude,
                max_mode,
                seed,
            } => {
                let f = random_band_limited(grid, max_mode, seed);
                let norm = f.l2_norm_sq().sqrt();
                if norm == 0.0 {
                    f
                } else {
                    f.scaled(amplitude / norm)
                }
            }
        }
    }
}
