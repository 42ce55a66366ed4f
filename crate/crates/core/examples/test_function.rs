//! Prints the pointwise bounds and the caloric residual convergence of the
//! backward heat kernel test functions `φ_n`.
//!
//! ```text
//! cargo run --release --example test_function
//! ```

use ckns::diagnostics::test_function::{dyadic_radius, phi_properties_check, psi_n};

fn main() -> ckns::Result<()> {
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>12} {:>12} {:>7}",
        "n", "r_n", "c1 bound", "c1 seen", "c2 seen", "c2 bound", "FD res h", "FD res h/2", "ratio"
    );
    for level in 2..=6 {
        let p = phi_properties_check(level)?;
        println!(
            "{level:>3} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>12.3e} {:>12.3e} {:>7.3}",
            dyadic_radius(level),
            p.c1_bound,
            p.c1_empirical,
            p.c2_empirical,
            p.c2_bound,
            p.caloric_residual,
            p.caloric_residual_half,
            p.caloric_ratio
        );
    }
    let v = psi_n([0.0; 3], -1e-3, 4)?;
    println!(
        "Ψ_4 at (0, -1e-3): value {:.6e}, ∂tΨ + ΔΨ = {:.3e}",
        v.value,
        v.heat()
    );
    Ok(())
}
