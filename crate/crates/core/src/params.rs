//! Global model parameters and their validity constraints.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Global parameters of the model.
///
/// The representation parameter `alpha` and the nonzero constant `tau` fix
/// the gamma-matrix construction; `beta = -alpha * tau^2` is derived, so the
/// combination `1 + alpha * beta = 1 - alpha^2 * tau^2` is positive for every
/// valid parameter set. `curvature_r` is the constant curvature scale `R`
/// with `kappa = sqrt(R)`; `lambda` is the free ordering parameter that the
/// model is ultimately independent of; `mass` is the rest mass in units with
/// hbar = c = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub tau: f64,
    pub lambda: f64,
    pub mass: f64,
    pub curvature_r: f64,
}

impl ModelParams {
    /// Validates and constructs the parameter set.
    ///
    /// Requirements: `tau != 0`, `alpha^2 * tau^2 < 1` (so the metric keeps
    /// its (+,-) signature and `sqrt(1 + alpha*beta)` is real), `mass >= 0`,
    /// `curvature_r >= 0`, and all inputs finite.
    pub fn new(alpha: f64, tau: f64, lambda: f64, mass: f64, curvature_r: f64) -> Result<Self> {
        let p = Self {
            alpha,
            tau,
            lambda,
            mass,
            curvature_r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("tau", self.tau),
            ("lambda", self.lambda),
            ("mass", self.mass),
            ("curvature_r", self.curvature_r),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
        }
        if self.tau == 0.0 {
            return Err(Error::InvalidParams("tau must be nonzero".into()));
        }
        let at2 = self.alpha * self.alpha * self.tau * self.tau;
        if at2 >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha^2 tau^2 = {at2} must be < 1"
            )));
        }
        if self.mass < 0.0 {
            return Err(Error::InvalidParams("mass must be >= 0".into()));
        }
        if self.curvature_r < 0.0 {
            return Err(Error::InvalidParams("curvature_r must be >= 0".into()));
        }
        Ok(())
    }

    /// Derived second representation parameter, `beta = -alpha * tau^2`.
    pub fn beta(&self) -> f64 {
        -self.alpha * self.tau * self.tau
    }

    /// `1 + alpha * beta = 1 - alpha^2 * tau^2`, positive for valid params.
    pub fn one_plus_ab(&self) -> f64 {
        1.0 - self.alpha * self.alpha * self.tau * self.tau
    }

    /// `sqrt(1 + alpha * beta)`.
    pub fn sqrt_one_plus_ab(&self) -> f64 {
        self.one_plus_ab().sqrt()
    }

    /// Inverse curvature length, `kappa = sqrt(R)`.
    pub fn kappa(&self) -> f64 {
        self.curvature_r.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_reference_parameters() {
        let p = ModelParams::new(0.0, 1.0, 0.0, 1.0, 0.2).unwrap();
        assert_eq!(p.beta(), -0.0);
        assert_eq!(p.one_plus_ab(), 1.0);
        assert_eq!(p.kappa(), 0.2f64.sqrt());
    }

    #[test]
    fn beta_follows_alpha_tau() {
        let p = ModelParams::new(0.2, 1.5, 0.0, 1.0, 0.2).unwrap();
        assert!((p.beta() - (-0.2 * 2.25)).abs() < 1e-15);
        assert!((p.one_plus_ab() - (1.0 + 0.2 * p.beta())).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_tau() {
        assert!(ModelParams::new(0.0, 0.0, 0.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn rejects_degenerate_clifford_combination() {
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.0, 0.2).is_err());
        assert!(ModelParams::new(0.5, 3.0, 0.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn rejects_negative_curvature_or_mass() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, -1.0, 0.2).is_err());
        assert!(ModelParams::new(0.0, 1.0, 0.0, 1.0, -0.2).is_err());
    }
}
