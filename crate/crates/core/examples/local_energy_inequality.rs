//! Streams a Taylor–Green run through the local energy inequality with
//! `ψ = φ_5` and prints the margin and the identity residuals.
//!
//! ```text
//! cargo run --release --example local_energy_inequality -- [N]
//! ```

use std::f64::consts::PI;

use ckns::diagnostics::constants::lambda_constants;
use ckns::diagnostics::energy::{EnergyAccumulator, Placement};
use ckns::diagnostics::test_function::PhiN;
use ckns::grid::{GradPhi, Grid};
use ckns::sampling::Sampling;
use ckns::solver::presets::InitialCondition;
use ckns::solver::{run_with_observer, FineWindow, SolverConfig};

fn main() -> ckns::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(32);
    let grid = Grid::cubic(n, 2.0 * PI)?;
    let mut cfg = SolverConfig::new(grid);
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    cfg.fine = Some(FineWindow {
        start: -1.0 / 64.0,
        dt: 1.0 / 4096.0,
    });
    cfg.output_stride = usize::MAX;
    cfg.retain_states = false;
    let initial = InitialCondition::TaylorGreen {
        velocity: 1.0,
        n_mean: 1.0,
        n_amp: 0.1,
        c0: 1.0,
    }
    .build(grid, cfg.t_start)?;
    let k = lambda_constants(&initial.c, &cfg.gradphi, 1.0)?;

    let psi = PhiN::new(5);
    let at = Placement {
        center: [1.0, 2.0, 0.5],
        t0: 0.0,
    };
    let sampling = Sampling::Spectral {
        points_per_radius: 32,
    };
    let mut acc = EnergyAccumulator::new(
        &psi,
        at,
        cfg.t_end,
        &k,
        cfg.gradphi.clone(),
        sampling,
        grid.length(),
    )?;
    let started = std::time::Instant::now();
    run_with_observer(&cfg, initial, &mut acc)?;

    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>10} {:>10} {:>10}",
        "t", "lhs", "rhs", "margin", "T rel", "J rel", "vel rel"
    );
    for r in acc.records().iter().step_by(8).chain(acc.records().last()) {
        println!(
            "{:>10.6} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.2e} {:>10.2e} {:>10.2e}",
            r.t,
            r.lhs,
            r.rhs,
            r.margin,
            r.n_identity.relative(),
            r.c_identity.relative(),
            r.velocity_identity.relative()
        );
    }
    let worst = acc
        .records()
        .iter()
        .map(|r| r.margin / r.rhs.abs().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    println!("worst margin/|rhs| = {worst:.4}");
    if let Some(last) = acc.records().last() {
        for (name, v) in &last.terms {
            println!("  {name:>4} = {v:+.6e}");
        }
    }
    println!("elapsed {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}
