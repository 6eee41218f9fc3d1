//! Noise coefficients `Φ(x, λ)` multiplying the scalar Wiener increment.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseKind {
    Zero,
    /// `Φ ≡ σ₀`.
    Constant { sigma: f64 },
    /// `Φ = c λ`.
    Linear { c: f64 },
    /// `Φ = c tanh λ`, bounded in `λ`.
    Bounded { c: f64 },
    /// `Φ = a sin(2π x₁)`, independent of `λ`.
    SpatialSine { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseModel {
    pub name: String,
    pub kind: NoiseKind,
}

pub const PRESETS: &[&str] = &["noise-zero", "noise-const", "noise-linear", "noise-bounded"];

impl NoiseModel {
    pub fn new(kind: NoiseKind) -> Self {
        let name = match kind {
            NoiseKind::Zero => "noise-zero",
            NoiseKind::Constant { .. } => "noise-const",
            NoiseKind::Linear { .. } => "noise-linear",
            NoiseKind::Bounded { .. } => "noise-bounded",
            NoiseKind::SpatialSine { .. } => "noise-spatial-sine",
        };
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn zero() -> Self {
        Self::new(NoiseKind::Zero)
    }

    pub fn constant(sigma: f64) -> Self {
        Self::new(NoiseKind::Constant { sigma })
    }

    pub fn linear(c: f64) -> Self {
        Self::new(NoiseKind::Linear { c })
    }

    /// Looks up a preset by name; `strength` overrides its default amplitude.
    pub fn preset(name: &str, strength: Option<f64>) -> Result<Self> {
        let kind = match name {
            "noise-zero" => NoiseKind::Zero,
            "noise-const" => NoiseKind::Constant {
                sigma: strength.unwrap_or(0.3),
            },
            "noise-linear" => NoiseKind::Linear {
                c: strength.unwrap_or(0.2),
            },
            "noise-bounded" => NoiseKind::Bounded {
                c: strength.unwrap_or(0.2),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown noise preset `{other}` (expected one of {PRESETS:?})"
                )))
            }
        };
        Ok(Self::new(kind))
    }

    pub fn is_zero(&self) -> bool {
        match self.kind {
            NoiseKind::Zero => true,
            NoiseKind::Constant { sigma } => sigma == 0.0,
            NoiseKind::Linear { c } | NoiseKind::Bounded { c } => c == 0.0,
            NoiseKind::SpatialSine { amplitude } => amplitude == 0.0,
        }
    }

    pub fn phi(&self, x: [f64; 2], lambda: f64) -> f64 {
        match self.kind {
            NoiseKind::Zero => 0.0,
            NoiseKind::Constant { sigma } => sigma,
            NoiseKind::Linear { c } => c * lambda,
            NoiseKind::Bounded { c } => c * lambda.tanh(),
            NoiseKind::SpatialSine { amplitude } => amplitude * (2.0 * PI * x[0]).sin(),
        }
    }

    /// `∂_λ Φ`.
    pub fn dphi(&self, _x: [f64; 2], lambda: f64) -> f64 {
        match self.kind {
            NoiseKind::Zero | NoiseKind::Constant { .. } | NoiseKind::SpatialSine { .. } => 0.0,
            NoiseKind::Linear { c } => c,
            NoiseKind::Bounded { c } => c / lambda.cosh().powi(2),
        }
    }

    /// Constant `C_Φ` with `|Φ(x, λ)| ≤ C_Φ (1 + |λ|)`.
    pub fn linear_growth_const(&self) -> f64 {
        match self.kind {
            NoiseKind::Zero => 0.0,
            NoiseKind::Constant { sigma } => sigma.abs(),
            NoiseKind::Linear { c } | NoiseKind::Bounded { c } => c.abs(),
            NoiseKind::SpatialSine { amplitude } => amplitude.abs(),
        }
    }

    /// `‖sup_λ |Φ(·, λ)|‖_{L²(M)}` when finite.
    pub fn sup_bound(&self) -> Option<f64> {
        match self.kind {
            NoiseKind::Zero => Some(0.0),
            NoiseKind::Constant { sigma } => Some(sigma.abs()),
            NoiseKind::Linear { c } => (c == 0.0).then_some(0.0),
            NoiseKind::Bounded { c } => Some(c.abs()),
            NoiseKind::SpatialSine { amplitude } => Some(amplitude.abs() / 2f64.sqrt()),
        }
    }

    /// `sup_λ |∂_λ Φ|`, uniform in `x`.
    pub fn derivative_bound(&self) -> f64 {
        match self.kind {
            NoiseKind::Linear { c } | NoiseKind::Bounded { c } => c.abs(),
            _ => 0.0,
        }
    }

    /// Checks the growth and derivative bounds on a lattice over
    /// `[0,1)^dim × [−lambda_max, lambda_max]`; returns the largest observed
    /// ratio `|Φ| / (1 + |λ|)`.
    pub fn validate(&self, dim: usize, lambda_max: f64) -> Result<f64> {
        let c = self.linear_growth_const();
        let pts = 16;
        let nl = 65;
        let mut worst: f64 = 0.0;
        for i in 0..pts {
            for j in 0..if dim == 2 { pts } else { 1 } {
                let x = [i as f64 / pts as f64, j as f64 / pts as f64];
                for l in 0..nl {
                    let lam = -lambda_max + 2.0 * lambda_max * l as f64 / (nl - 1) as f64;
                    let ratio = self.phi(x, lam).abs() / (1.0 + lam.abs());
                    worst = worst.max(ratio);
                    if !self.dphi(x, lam).is_finite() {
                        return Err(Error::constraint("noise derivative bound", "non-finite ∂_λΦ"));
                    }
                }
            }
        }
        if worst > c * (1.0 + 1e-12) {
            return Err(Error::constraint(
                "noise growth |Φ| <= C_Φ(1+|λ|)",
                format!("observed ratio {worst} exceeds C_Φ = {c}"),
            ));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let m = NoiseModel::preset(name, None).unwrap();
            m.validate(2, 10.0).unwrap();
        }
        assert!(NoiseModel::preset("noise-unknown", None).is_err());
    }

    #[test]
    fn growth_constants() {
        assert_eq!(NoiseModel::linear(0.2).linear_growth_const(), 0.2);
        assert_eq!(NoiseModel::constant(-0.3).linear_growth_const(), 0.3);
        assert_eq!(NoiseModel::linear(0.2).sup_bound(), None);
        assert_eq!(NoiseModel::preset("noise-bounded", None).unwrap().sup_bound(), Some(0.2));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = NoiseModel::preset("noise-bounded", Some(0.7)).unwrap();
        for lam in [-2.0, -0.3, 0.0, 0.9, 3.0] {
            let h = 1e-6;
            let fd = (m.phi([0.0; 2], lam + h) - m.phi([0.0; 2], lam - h)) / (2.0 * h);
            assert!((fd - m.dphi([0.0; 2], lam)).abs() < 1e-8);
        }
    }
}
