//! The parabolic scaling
//!
//! ```text
//! n_λ(x,t) = λ² n(λx, λ²t)   c_λ(x,t) = c(λx, λ²t)
//! u_λ(x,t) = λ u(λx, λ²t)    p_λ(x,t) = λ² p(λx, λ²t)
//! ```
//!
//! applied to closed-form states, plus a few analytic generators used to
//! exercise scale invariance.

use crate::error::{Error, Result};
use crate::sampling::{ClosedForm, PointState};

/// A closed-form state rescaled by `λ`; derivatives follow by the chain rule.
#[derive(Debug, Clone)]
pub struct Scaled<G> {
    pub inner: G,
    pub lambda: f64,
}

pub fn scale_transform<G: ClosedForm>(generator: G, lambda: f64) -> Result<Scaled<G>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scaling factor {lambda} must be positive"
        )));
    }
    Ok(Scaled {
        inner: generator,
        lambda,
    })
}

impl<G: ClosedForm> ClosedForm for Scaled<G> {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        let l = self.lambda;
        let l2 = l * l;
        let s = self.inner.eval(x.map(|v| l * v), l2 * t);
        let m3 = |m: [[f64; 3]; 3], f: f64| m.map(|row| row.map(|v| v * f));
        PointState {
            n: l2 * s.n,
            grad_n: s.grad_n.map(|v| l2 * l * v),
            c: s.c,
            grad_c: s.grad_c.map(|v| l * v),
            hess_c: m3(s.hess_c, l2),
            u: s.u.map(|v| l * v),
            grad_u: m3(s.grad_u, l2),
            p: l2 * s.p,
            // keeps −n∇φ scaling like ∂t u
            gradphi: s.gradphi.map(|v| l * v),
        }
    }
}

/// Decaying trigonometric modes with a Taylor–Green velocity.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigGenerator;

impl ClosedForm for TrigGenerator {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        let (sx, cx) = x[0].sin_cos();
        let (sy, cy) = x[1].sin_cos();
        let (sz, cz) = x[2].sin_cos();
        let en = (-t).exp();
        let (a, b) = (1.2, 0.5);
        let theta = x[0] + 2.0 * x[1] - x[2];
        let g = [1.0, 2.0, -1.0];
        let ec = 0.5 * (-0.5 * t).exp();
        let eu = (-2.0 * t).exp();
        let mut hess_c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                hess_c[i][j] = -ec * theta.cos() * g[i] * g[j];
            }
        }
        PointState {
            n: a + b * sx * sy * sz * en,
            grad_n: [cx * sy * sz, sx * cy * sz, sx * sy * cz].map(|v| b * en * v),
            c: 1.0 + ec * theta.cos(),
            grad_c: g.map(|v| -ec * theta.sin() * v),
            hess_c,
            u: [eu * sx * cy * cz, -eu * cx * sy * cz, 0.0],
            grad_u: [
                [cx * cy * cz, -sx * sy * cz, -sx * cy * sz].map(|v| eu * v),
                [sx * sy * cz, -cx * cy * cz, cx * sy * sz].map(|v| eu * v),
                [0.0; 3],
            ],
            p: (-4.0 * t).exp() * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) / 4.0 + 0.3 * sz,
            gradphi: [0.0, 0.0, 1.0],
        }
    }
}

/// Heat-kernel density, Gaussian oxygen and a localized swirl.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianGenerator;

impl ClosedForm for GaussianGenerator {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let s = 2.0 + t;
        let n = 3.0 * s.powf(-1.5) * (-r2 / (4.0 * s)).exp();
        let c = 0.8 * (-r2 / 2.0).exp();
        let e = (-r2 / 2.0).exp();
        let amp = 1.0 + t;
        let rot = [-x[1], x[0], 0.0];
        let drot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        let mut hess_c = [[0.0; 3]; 3];
        let mut grad_u = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                hess_c[a][b] = c * (x[a] * x[b] - delta);
                grad_u[a][b] = amp * e * (drot[a][b] - rot[a] * x[b]);
            }
        }
        PointState {
            n,
            grad_n: x.map(|v| -n * v / (2.0 * s)),
            c,
            grad_c: x.map(|v| -c * v),
            hess_c,
            u: rot.map(|v| amp * e * v),
            grad_u,
            p: (1.0 + t * t) * (x[0] * x[0] - x[1] * x[1] + 0.5),
            gradphi: [0.3, 0.0, 1.0],
        }
    }
}

/// Low-degree polynomial fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolynomialGenerator;

impl ClosedForm for PolynomialGenerator {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        let [a, b, c] = x;
        PointState {
            n: 1.0 + a * a + 2.0 * b * b + c * c + t * t,
            grad_n: [2.0 * a, 4.0 * b, 2.0 * c],
            c: 2.0 + a * b + c * c * c + t,
            grad_c: [b, a, 3.0 * c * c],
            hess_c: [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 6.0 * c]],
            u: [b + t, c * a, a * a],
            grad_u: [[0.0, 1.0, 0.0], [c, 0.0, a], [2.0 * a, 0.0, 0.0]],
            p: a * b * c + t,
            gradphi: [0.0, 0.0, 1.0],
        }
    }
}
