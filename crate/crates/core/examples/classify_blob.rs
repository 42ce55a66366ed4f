//! Classifies the origin under a swirling velocity blob of width `σ` and
//! growing amplitude. Density, oxygen and pressure are zero, so only the
//! velocity terms drive the criteria.
//!
//! ```text
//! cargo run --release --example classify_blob -- [sigma]
//! ```

use ckns::diagnostics::constants::Constants;
use ckns::regularity::{classify_thm15, classify_thm19, Thresholds};
use ckns::sampling::{ClosedFormSource, PointState};

/// `u = A σ⁻² (−y, x, 0) e^{−|x|²/2σ²}`, divergence free.
pub fn blob(amp: f64, sigma: f64) -> impl Fn([f64; 3], f64) -> PointState + Sync {
    move |x: [f64; 3], _t: f64| {
        let s2 = sigma * sigma;
        let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * s2)).exp();
        let rot = [-x[1], x[0], 0.0];
        let drot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        let k = amp / s2;
        let mut grad_u = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                grad_u[a][b] = k * e * (drot[a][b] - rot[a] * x[b] / s2);
            }
        }
        PointState {
            u: rot.map(|v| k * e * v),
            grad_u,
            ..Default::default()
        }
    }
}

fn main() -> ckns::Result<()> {
    let sigma: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0.1);
    let k = Constants::from_sups(0.0, 0.0, 1.0)?;
    let eps = Thresholds::default();
    println!("σ = {sigma}, ε1 = ε3 = {:e}", eps.eps1);
    println!(
        "{:>10} {:>12} {:>12} {:>14} {:>12} {:>12} {:>14}",
        "A", "thm15 lhs", "threshold", "verdict", "thm19 lhs", "threshold", "verdict"
    );
    for amp in [1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0] {
        let src = ClosedFormSource::new(blob(amp, sigma), 8, 16);
        let a = classify_thm15(&src, [0.0; 3], 0.0, &k, &eps)?;
        let b = classify_thm19(&src, [0.0; 3], 0.0, &k, &eps, 1..=5)?;
        println!(
            "{amp:>10.0e} {:>12.4e} {:>12.4e} {:>14} {:>12.4e} {:>12.4e} {:>14}",
            a.lhs_value,
            a.threshold,
            format!("{:?}", a.verdict),
            b.lhs_value,
            b.threshold,
            format!("{:?}", b.verdict)
        );
    }
    Ok(())
}
