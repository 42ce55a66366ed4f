//! `n ln n` integrals, the high/low density split, and the Luxemburg norm of
//! the Zygmund class `L log L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::sampling::x_ln_x;

/// Density level separating the low and high parts of the split.
pub const SPLIT_LEVEL: f64 = 100.0;

/// Entropy integrals of `n` over a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyNorms {
    /// `∫ n`
    pub mass: f64,
    /// `∫ n |ln n|`
    pub n_abs_ln_n: f64,
    /// `∫ |n ln n|^{3/2}`
    pub n_ln_n_32: f64,
    /// `∫_{n ≤ 100} n^{4/3}`
    pub split_low: f64,
    /// `∫_{n > 100} n^{5/3}`
    pub split_high: f64,
}

/// Entropy integrals of `n` over `B_r(x0)` (grid-node quadrature).
pub fn entropy_norms(n: &ScalarField, x0: [f64; 3], r: f64) -> Result<EntropyNorms> {
    n.check_finite("n")?;
    let grid = n.grid;
    if r >= 0.5 * grid.length() {
        return Err(Error::CylinderExceedsBox {
            radius: r,
            half_box: 0.5 * grid.length(),
        });
    }
    let mut out = EntropyNorms {
        mass: 0.0,
        n_abs_ln_n: 0.0,
        n_ln_n_32: 0.0,
        split_low: 0.0,
        split_high: 0.0,
    };
    for (idx, _) in grid.ball_nodes(x0, r) {
        let v = n.values[idx];
        if v < 0.0 {
            return Err(Error::Positivity {
                field: "n".into(),
                min: v,
                tol: 0.0,
            });
        }
        let nl = x_ln_x(v).abs();
        out.mass += v;
        out.n_abs_ln_n += nl;
        out.n_ln_n_32 += nl.powf(1.5);
        if v <= SPLIT_LEVEL {
            out.split_low += v.powf(4.0 / 3.0);
        } else {
            out.split_high += v.powf(5.0 / 3.0);
        }
    }
    let w = grid.cell_volume();
    out.mass *= w;
    out.n_abs_ln_n *= w;
    out.n_ln_n_32 *= w;
    out.split_low *= w;
    out.split_high *= w;
    Ok(out)
}

/// Golden-section maximisation of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximum of `n^α |ln n|` over `n ∈ (0, 1)`, searched in `s = ln n`.
/// Returns `(argmax n, max)`; analytically `(e^{-1/α}, 1/(αe))`.
pub fn max_n_alpha_abs_ln(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    let f = |s: f64| (alpha * s).exp() * (-s);
    let (s, v) = golden_max(f, -50.0 / alpha, 0.0, 1e-12 / alpha.min(1.0));
    Ok((s.exp(), v))
}

/// Split constants `(K_low, K_high)` with
/// `|n ln n|^{3/2} ≤ K_low n^{4/3}` for `n ∈ (0, 100]` and
/// `|n ln n|^{3/2} ≤ K_high n^{5/3}` for `n > 100`, found by 1-D maximisation
/// in `s = ln n`.
pub fn split_constants() -> (f64, f64) {
    let smax = SPLIT_LEVEL.ln();
    let low = |s: f64| (s / 6.0).exp() * s.abs().powf(1.5);
    let high = |s: f64| (-s / 6.0).exp() * s.abs().powf(1.5);
    // low ratio is unimodal on s < 0 and increasing on [0, ln 100]
    let (_, below_one) = golden_max(low, -200.0, 0.0, 1e-10);
    let k_low = below_one.max(low(smax));
    // high ratio is unimodal on s > ln 100 (peak at s = 9)
    let (_, k_high) = golden_max(high, smax, 400.0, 1e-10);
    (k_low, k_high.max(high(smax)))
}

/// `A(t) = t log⁺ t`.
#[inline]
pub fn zygmund_a(t: f64) -> f64 {
    if t >= 1.0 {
        t * t.ln()
    } else {
        0.0
    }
}

/// Luxemburg norm `inf{k : Σ A(|f_i|/k) w ≤ 1}` by geometric bisection on
/// `[1e-12, 1e12]` to relative tolerance `1e-8`.
pub fn luxemburg_norm(values: &[f64], weight: f64) -> f64 {
    let modular = |k: f64| values.iter().map(|v| zygmund_a(v.abs() / k)).sum::<f64>() * weight;
    let (mut lo, mut hi) = (1e-12_f64, 1e12_f64);
    if values.iter().all(|v| *v == 0.0) || modular(lo) <= 1.0 {
        return 0.0;
    }
    if modular(hi) > 1.0 {
        return f64::INFINITY;
    }
    while hi / lo > 1.0 + 1e-8 {
        let mid = (lo * hi).sqrt();
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
