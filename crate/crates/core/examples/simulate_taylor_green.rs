//! Runs the Taylor–Green preset with buoyancy and prints the monitor:
//! mass, positivity, divergence and the a priori energies.
//!
//! ```text
//! cargo run --release --example simulate_taylor_green -- [N]
//! ```

use std::f64::consts::PI;

use ckns::grid::{GradPhi, Grid};
use ckns::solver::presets::InitialCondition;
use ckns::solver::{run, SolverConfig};

fn main() -> ckns::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(32);
    let grid = Grid::cubic(n, 2.0 * PI)?;
    let mut cfg = SolverConfig::new(grid);
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    cfg.retain_states = false;
    let initial = InitialCondition::TaylorGreen {
        velocity: 1.0,
        n_mean: 1.0,
        n_amp: 0.1,
        c0: 1.0,
    }
    .build(grid, cfg.t_start)?;

    let out = run(&cfg, initial)?;
    println!(
        "{:>6} {:>10} {:>16} {:>10} {:>10} {:>10} {:>10}",
        "step", "t", "mass", "min n", "max c", "|div u|", "|u|max"
    );
    let every = (out.monitor.len() / 12).max(1);
    for m in out.monitor.iter().step_by(every).chain(out.monitor.last()) {
        println!(
            "{:>6} {:>10.5} {:>16.12} {:>10.6} {:>10.6} {:>10.2e} {:>10.4}",
            m.step, m.t, m.mass, m.min_n, m.max_c, m.divergence, m.u_max
        );
    }
    println!(
        "{} steps, max |mass drift| {:.2e}",
        out.steps.len(),
        out.max_abs_mass_drift()
    );
    if let Some(why) = out.aborted {
        println!("aborted: {why}");
    }
    Ok(())
}
