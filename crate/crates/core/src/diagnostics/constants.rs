//! Constants of the regularity criteria.

use serde::{Deserialize, Serialize};

use crate::diagnostics::entropy::SPLIT_LEVEL;
use crate::error::{Error, Result};
use crate::grid::{GradPhi, ScalarField};

/// Exponent of the entropy split `{n ≤ A}` bound, `n^{4/3} = n^{1 + 2δ}`.
pub const SPLIT_DELTA: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// `108 ‖c̃(·,−1)‖∞`
    pub lambda0: f64,
    /// `‖∇φ‖∞ + 1`
    pub lambda1: f64,
    /// `min{1/20, α0/(4 + 6α0)}`
    pub alpha: f64,
    pub alpha0: f64,
    /// `‖c̃(·,−1)‖∞ = ‖c(·,−1)‖∞ + 1`
    pub c_tilde_sup: f64,
    pub split_level: f64,
    pub split_delta: f64,
}

impl Constants {
    pub fn from_sups(c_sup: f64, gradphi_sup: f64, alpha0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "α0 = {alpha0} must be positive"
            )));
        }
        if !(c_sup >= 0.0 && gradphi_sup >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sup norms must be non-negative (c: {c_sup}, ∇φ: {gradphi_sup})"
            )));
        }
        let c_tilde_sup = c_sup + 1.0;
        Ok(Self {
            lambda0: 108.0 * c_tilde_sup,
            lambda1: gradphi_sup + 1.0,
            alpha: (1.0 / 20.0_f64).min(alpha0 / (4.0 + 6.0 * alpha0)),
            alpha0,
            c_tilde_sup,
            split_level: SPLIT_LEVEL,
            split_delta: SPLIT_DELTA,
        })
    }

    /// `K = ‖c̃(·,−1)‖∞`, the weight of the velocity terms in the local
    /// energy inequality.
    pub fn energy_weight(&self) -> f64 {
        self.c_tilde_sup
    }
}

pub fn lambda_constants(c_init: &ScalarField, gradphi: &GradPhi, alpha0: f64) -> Result<Constants> {
    c_init.check_finite("c")?;
    let min = c_init.min();
    if min < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "initial oxygen has negative value {min}"
        )));
    }
    Constants::from_sups(c_init.max_abs(), gradphi.sup_norm(), alpha0)
}
