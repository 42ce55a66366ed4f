//! Compares the nine scale-invariant quantities of a closed-form field on
//! `Q_λr(λx, λ²t)` with those of its rescaling on `Q_r(x, t)`.
//!
//! ```text
//! cargo run --release --example scale_invariance
//! ```

use ckns::diagnostics::quantities::{quantities, QuantityReport};
use ckns::grid::ParabolicCylinder;
use ckns::sampling::ClosedFormSource;
use ckns::scaling::{scale_transform, GaussianGenerator};

fn main() -> ckns::Result<()> {
    let (x0, t0, r) = ([0.1, -0.2, 0.3], -0.05, 0.2);
    for lambda in [2.0, 4.0] {
        let small = ParabolicCylinder::new(x0, t0, r)?;
        let big = ParabolicCylinder::new(x0.map(|v| lambda * v), lambda * lambda * t0, lambda * r)?;
        let a = quantities(
            &ClosedFormSource::new(scale_transform(GaussianGenerator, lambda)?, 16, 32),
            &small,
        )?;
        let b = quantities(&ClosedFormSource::new(GaussianGenerator, 16, 32), &big)?;
        println!("λ = {lambda}");
        for ((name, va), vb) in QuantityReport::NAMES.iter().zip(a.values()).zip(b.values()) {
            let rel = (va - vb).abs() / va.abs().max(vb.abs()).max(f64::MIN_POSITIVE);
            println!("  {name:>9} {va:>16.10e} {vb:>16.10e} {rel:>10.2e}");
        }
    }
    Ok(())
}
