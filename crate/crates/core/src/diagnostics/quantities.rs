//! The nine scale-invariant quantities on a parabolic cylinder `Q_r`:
//!
//! ```text
//! A_u = r⁻¹ sup_t ∫|u|²        E_u = r⁻¹ ∫∫|∇u|²
//! A_c = r⁻¹ sup_t ∫|∇c|²       E_c = r⁻¹ ∫∫|∇²c|²
//! A_n = r⁻¹ sup_t ∫n           E_n = r⁻¹ ∫∫|∇√n|²
//! C_u = r⁻² ∫∫|u|³             C̃_u = r⁻² ∫∫|u − (u)_r|³
//! D   = r⁻² ∫∫|p|^{3/2}
//! ```
//!
//! `(u)_r` is the ball mean of `u` at each time.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::ParabolicCylinder;
use crate::integrate::{cylinder_slices, Resolution};
use crate::sampling::{norm_sq, window_integral, window_sup, CylinderSource, Slice};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantityReport {
    pub r: f64,
    #[serde(rename = "A_u")]
    pub a_u: f64,
    #[serde(rename = "E_u")]
    pub e_u: f64,
    #[serde(rename = "A_c")]
    pub a_c: f64,
    #[serde(rename = "E_c")]
    pub e_c: f64,
    #[serde(rename = "A_n")]
    pub a_n: f64,
    #[serde(rename = "E_n")]
    pub e_n: f64,
    #[serde(rename = "C_u")]
    pub c_u: f64,
    #[serde(rename = "C_u_tilde")]
    pub c_u_tilde: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub resolution: Resolution,
}

impl QuantityReport {
    pub const NAMES: [&'static str; 9] = [
        "A_u",
        "E_u",
        "A_c",
        "E_c",
        "A_n",
        "E_n",
        "C_u",
        "C_u_tilde",
        "D",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.a_u,
            self.e_u,
            self.a_c,
            self.e_c,
            self.a_n,
            self.e_n,
            self.c_u,
            self.c_u_tilde,
            self.d,
        ]
    }
}

const SLICE_TERMS: usize = 9;

/// Per-slice spatial integrals, in report order.
fn slice_terms(slice: &Slice) -> [f64; SLICE_TERMS] {
    let mean = slice.mean_velocity();
    let mut acc = [0.0; SLICE_TERMS];
    for p in &slice.points {
        let s = &p.state;
        let u2 = s.u_sq();
        acc[0] += u2;
        acc[1] += s.grad_u_sq();
        acc[2] += norm_sq(s.grad_c);
        acc[3] += s.hess_c.iter().flatten().map(|v| v * v).sum::<f64>();
        acc[4] += s.n.abs();
        acc[5] += s.grad_sqrt_n_sq();
        acc[6] += u2 * u2.sqrt();
        let w = [s.u[0] - mean[0], s.u[1] - mean[1], s.u[2] - mean[2]];
        acc[7] += norm_sq(w).powf(1.5);
        acc[8] += s.p.abs().powf(1.5);
    }
    acc.map(|v| v * slice.weight)
}

/// All nine quantities on `q`.
pub fn quantities(source: &dyn CylinderSource, q: &ParabolicCylinder) -> Result<QuantityReport> {
    let slices = cylinder_slices(source, q)?;
    let times: Vec<f64> = slices.iter().map(|s| s.t).collect();
    let terms: Vec<[f64; SLICE_TERMS]> = slices.iter().map(slice_terms).collect();
    let column = |k: usize| terms.iter().map(|t| t[k]).collect::<Vec<f64>>();
    let (lo, hi) = (q.t_start(), q.t0);
    let sup = |k: usize| window_sup(&times, &column(k), lo, hi).max(0.0);
    let int = |k: usize| window_integral(&times, &column(k), lo, hi);
    let r = q.radius;
    Ok(QuantityReport {
        r,
        a_u: sup(0) / r,
        e_u: int(1) / r,
        a_c: sup(2) / r,
        e_c: int(3) / r,
        a_n: sup(4) / r,
        e_n: int(5) / r,
        c_u: int(6) / (r * r),
        c_u_tilde: int(7) / (r * r),
        d: int(8) / (r * r),
        resolution: Resolution::for_cylinder(source, q),
    })
}
