//! Whole-box a priori functionals `U(t)` and `V(t)` of weak solutions.
//!
//! `U = ‖n‖_{L¹∩L log L} + ‖∇√c‖² + ‖u‖²` and
//! `V = ‖∇√(n+1)‖² + ‖∇²√c‖² + ‖∇u‖² + ∫ c⁻¹|∇√c|⁴ + ∫ n|∇√c|²`.
//! Terms carrying an inverse power of `c` are `None` when `c ≤ 0` somewhere.

use serde::{Deserialize, Serialize};

use crate::diagnostics::entropy::luxemburg_norm;
use crate::error::Result;
use crate::grid::{GradPhi, SnapshotSeries, State};
use crate::sampling::{norm_sq, window_integral, DerivedFields};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriTerms {
    pub t: f64,
    pub n_l1: f64,
    pub n_llogl: f64,
    pub grad_sqrt_c_sq: Option<f64>,
    pub u_sq: f64,
    pub grad_sqrt_n1_sq: f64,
    pub hess_sqrt_c_sq: Option<f64>,
    pub grad_u_sq: f64,
    pub c_inv_grad_sqrt_c_4: Option<f64>,
    pub n_grad_sqrt_c_sq: Option<f64>,
}

impl AprioriTerms {
    /// `U(t)`, or `None` when a `c⁻¹`-weighted term is unbounded.
    pub fn u_total(&self) -> Option<f64> {
        Some(self.n_l1 + self.n_llogl + self.grad_sqrt_c_sq? + self.u_sq)
    }

    /// `V(t)`, or `None` when a `c⁻¹`-weighted term is unbounded.
    pub fn v_total(&self) -> Option<f64> {
        Some(
            self.grad_sqrt_n1_sq
                + self.hess_sqrt_c_sq?
                + self.grad_u_sq
                + self.c_inv_grad_sqrt_c_4?
                + self.n_grad_sqrt_c_sq?,
        )
    }
}

/// `(t, U(t), ∫_{t_first}^t V)` per snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriRecord {
    pub t: f64,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub v_integral: Option<f64>,
}

/// Evaluates every constituent of `U` and `V` on one state.
pub fn apriori_terms(state: &State) -> Result<AprioriTerms> {
    let grid = state.grid();
    let d = DerivedFields::compute(state, &GradPhi::default())?;
    let w = grid.cell_volume();
    let c_positive = state.c.values.iter().all(|&c| c > 0.0);
    let mut acc = [0.0_f64; 8];
    for idx in 0..grid.len() {
        let s = d.point(idx);
        acc[0] += s.n.abs();
        acc[1] += s.u_sq();
        acc[2] += norm_sq(s.grad_n) / (4.0 * (s.n + 1.0).max(f64::MIN_POSITIVE));
        acc[3] += s.grad_u_sq();
        if c_positive {
            let c = s.c;
            let g2 = norm_sq(s.grad_c) / (4.0 * c);
            acc[4] += g2;
            let mut h2 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let v = s.hess_c[a][b] / (2.0 * c.sqrt())
                        - s.grad_c[a] * s.grad_c[b] / (4.0 * c * c.sqrt());
                    h2 += v * v;
                }
            }
            acc[5] += h2;
            acc[6] += g2 * g2 / c;
            acc[7] += s.n * g2;
        }
    }
    let opt = |v: f64| c_positive.then_some(v * w);
    Ok(AprioriTerms {
        t: state.t,
        n_l1: acc[0] * w,
        n_llogl: luxemburg_norm(&state.n.values, w),
        grad_sqrt_c_sq: opt(acc[4]),
        u_sq: acc[1] * w,
        grad_sqrt_n1_sq: acc[2] * w,
        hess_sqrt_c_sq: opt(acc[5]),
        grad_u_sq: acc[3] * w,
        c_inv_grad_sqrt_c_4: opt(acc[6]),
        n_grad_sqrt_c_sq: opt(acc[7]),
    })
}

/// Accumulates `(U, ∫V)` across successive states with the trapezoid rule.
#[derive(Debug, Clone, Default)]
pub struct AprioriAccumulator {
    times: Vec<f64>,
    v: Vec<f64>,
    unbounded: bool,
}

impl AprioriAccumulator {
    pub fn push(&mut self, terms: &AprioriTerms) -> AprioriRecord {
        let v = terms.v_total();
        match v {
            Some(v) => {
                self.times.push(terms.t);
                self.v.push(v);
            }
            None => self.unbounded = true,
        }
        let v_integral = (!self.unbounded).then(|| {
            let t0 = self.times[0];
            window_integral(&self.times, &self.v, t0, terms.t)
        });
        AprioriRecord {
            t: terms.t,
            u: terms.u_total(),
            v,
            v_integral,
        }
    }
}

/// `(U(t), ∫V)` at every snapshot of a series.
pub fn global_apriori(series: &SnapshotSeries) -> Result<Vec<AprioriRecord>> {
    let mut acc = AprioriAccumulator::default();
    series
        .snapshots()
        .iter()
        .map(|s| Ok(acc.push(&apriori_terms(s)?)))
        .collect()
}
