//! The height functions phi_eps and alpha, the smoothed integral transform,
//! and the dynamical exponent rho.

pub mod alpha;
pub mod integral;
pub mod phi;

use crate::algebra::Dims;
use crate::error::{Error, Result};

pub use alpha::{alpha, AlphaResult, Witness};
pub use integral::{alpha_tilde, rho_estimate, AlphaTilde, RhoEstimate};
pub use phi::{delta_k, phi_eps, phi_from_lns};

/// Parameters of the height machinery.
#[derive(Debug, Clone)]
pub struct HeightParams {
    pub epsilon: f64,
    pub theta: f64,
    pub delta: f64,
    /// Per-block norm cutoff for the decomposable scan behind alpha.
    pub cutoff_r: f64,
    /// Quadrature horizon for the smoothed integral.
    pub t_max: f64,
    /// Quadrature step.
    pub h: f64,
}

impl HeightParams {
    /// Defaults: theta just below its ceiling d/(d+1), a small smoothing
    /// exponent, unit cutoff, and a short horizon suitable for sampling.
    pub fn for_dims(dims: Dims) -> Self {
        let d = dims.d() as f64;
        HeightParams {
            epsilon: 0.1,
            theta: d / (d + 1.0) - 0.01,
            delta: 0.02,
            cutoff_r: 1.0,
            t_max: 8.0,
            h: 0.1,
        }
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        let d = dims.d() as f64;
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Invalid(format!("epsilon {} not in (0,1]", self.epsilon)));
        }
        if !(self.theta > 0.0 && self.theta < d / (d + 1.0)) {
            return Err(Error::Invalid(format!(
                "theta {} not in (0, {})",
                self.theta,
                d / (d + 1.0)
            )));
        }
        if !(self.delta > 0.0 && self.delta < self.theta) {
            return Err(Error::Invalid(format!(
                "delta {} not in (0, theta={})",
                self.delta, self.theta
            )));
        }
        if !(self.cutoff_r > 0.0 && self.t_max > 0.0 && self.h > 0.0 && self.h < self.t_max) {
            return Err(Error::Invalid("cutoff_r, t_max, h must be positive with h < t_max".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for (n, d) in [(2, 1), (3, 2), (4, 2)] {
            let dims = Dims::new(n, d).unwrap();
            HeightParams::for_dims(dims).validate(dims).unwrap();
        }
    }

    #[test]
    fn bad_params_rejected() {
        let dims = Dims::new(2, 1).unwrap();
        let mut p = HeightParams::for_dims(dims);
        p.theta = 0.6; // >= d/(d+1) = 0.5
        assert!(p.validate(dims).is_err());
        let mut p2 = HeightParams::for_dims(dims);
        p2.delta = p2.theta;
        assert!(p2.validate(dims).is_err());
        let mut p3 = HeightParams::for_dims(dims);
        p3.epsilon = 0.0;
        assert!(p3.validate(dims).is_err());
    }
}
