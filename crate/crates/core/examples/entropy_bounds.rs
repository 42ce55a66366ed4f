//! Entropy integrals of a concentrating density and the elementary maxima
//! used to bound them.
//!
//! ```text
//! cargo run --release --example entropy_bounds
//! ```

use std::f64::consts::E;

use ckns::diagnostics::entropy::{
    entropy_norms, luxemburg_norm, max_n_alpha_abs_ln, split_constants,
};
use ckns::grid::{Grid, ScalarField};

fn main() -> ckns::Result<()> {
    let (arg, max) = max_n_alpha_abs_ln(1.0 / 20.0)?;
    println!(
        "max n^(1/20)|ln n| = {max:.9} at n = {arg:.6e} (20/e = {:.9})",
        20.0 / E
    );
    let (low, high) = split_constants();
    println!("split constants: {low:.6}, {high:.6}");

    let grid = Grid::cubic(64, 2.0)?;
    let w = grid.cell_volume();
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "σ", "∫n", "∫n|ln n|", "∫|n ln n|^1.5", "Luxemburg", "split hi"
    );
    for sigma in [0.4, 0.2, 0.1, 0.05] {
        let n = ScalarField::from_fn(grid, 0.0, |x| {
            let r2 = (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2) + (x[2] - 1.0).powi(2);
            (-r2 / (2.0 * sigma * sigma)).exp() / sigma.powi(3)
        });
        let e = entropy_norms(&n, [1.0; 3], 0.8)?;
        let lux = luxemburg_norm(&n.values, w);
        println!(
            "{sigma:>8.3} {:>12.5} {:>12.5} {:>12.5e} {:>12.5} {:>12.5e}",
            e.mass, e.n_abs_ln_n, e.n_ln_n_32, lux, e.split_high
        );
    }
    Ok(())
}
