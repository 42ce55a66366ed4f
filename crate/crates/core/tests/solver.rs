use std::f64::consts::PI;

use ckns::grid::{GradPhi, Grid, ScalarField, State, VectorField};
use ckns::solver::presets::InitialCondition;
use ckns::solver::{run, step, PositivityPolicy, SolverConfig, TimeStep};
use ckns::spectral::Spectral;

fn energy(u: &VectorField) -> f64 {
    let w = u.grid.cell_volume();
    u.components
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v * v)
        .sum::<f64>()
        * w
}

#[test]
fn constant_oxygen_without_cells_is_steady() {
    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let cfg = SolverConfig::new(grid);
    let mut s = State::zeros(grid, -1.0);
    s.c = ScalarField::constant(grid, -1.0, 0.7);
    let (next, _) = step(&s, 1e-3, &cfg).unwrap();
    for (a, b) in next.c.values.iter().zip(&s.c.values) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(next.n.max_abs() < 1e-12);
    assert!(next.u.max_norm() < 1e-12);
}

#[test]
fn taylor_green_mode_decays_at_heat_rate() {
    // planar Taylor-Green: u·∇u is a gradient and is projected out exactly
    let grid = Grid::planar(32, 2.0 * PI).unwrap();
    let cfg = SolverConfig::new(grid);
    let mut s = State::zeros(grid, -1.0);
    s.u = VectorField::from_fn(grid, -1.0, |x| {
        [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
    });
    let dt = 1e-3;
    let e0 = energy(&s.u);
    let (next, _) = step(&s, dt, &cfg).unwrap();
    let ratio = energy(&next.u) / e0;
    let expected = (-2.0 * 2.0 * dt).exp();
    assert!(
        (ratio / expected - 1.0).abs() < 1e-6,
        "ratio {ratio} expected {expected}"
    );
}

#[test]
fn uniform_consumption_follows_exponential_decay() {
    let grid = Grid::cubic(8, 1.0).unwrap();
    let mut cfg = SolverConfig::new(grid);
    let (n0, c0, dt) = (2.0, 1.5, 1e-3);
    cfg.dt = TimeStep::Fixed(dt);
    cfg.t_end = -0.5;
    cfg.output_stride = 100;
    let mut s = State::zeros(grid, -1.0);
    s.n = ScalarField::constant(grid, -1.0, n0);
    s.c = ScalarField::constant(grid, -1.0, c0);
    let out = run(&cfg, s).unwrap();
    let last = out.series.snapshots().last().unwrap();
    let exact = c0 * (-n0 * 0.5_f64).exp();
    for v in &last.c.values {
        // Heun: global error ≈ (n0·dt)²/6 · n0·T · c
        assert!((v / exact - 1.0).abs() < 1e-6);
    }
    for v in &last.n.values {
        assert!((v - n0).abs() < 1e-12);
    }
}

fn perturbed_run(dt: f64) -> State {
    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let mut cfg = SolverConfig::new(grid);
    cfg.dt = TimeStep::Fixed(dt);
    cfg.t_end = -0.9;
    cfg.output_stride = 1_000_000;
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    let ic = InitialCondition::PerturbedUniform {
        n_mean: 1.0,
        c_mean: 1.0,
        amplitude: 0.3,
        velocity: 0.5,
        max_mode: 2,
        seed: 11,
    };
    let out = run(&cfg, ic.build(grid, -1.0).unwrap()).unwrap();
    out.series.snapshots().last().unwrap().clone()
}

fn max_diff(a: &State, b: &State) -> f64 {
    let mut m = 0.0_f64;
    for (x, y) in a.n.values.iter().zip(&b.n.values) {
        m = m.max((x - y).abs());
    }
    for (x, y) in a.c.values.iter().zip(&b.c.values) {
        m = m.max((x - y).abs());
    }
    for k in 0..3 {
        for (x, y) in a.u.components[k].iter().zip(&b.u.components[k]) {
            m = m.max((x - y).abs());
        }
    }
    m
}

#[test]
fn heun_scheme_is_second_order() {
    let dt = 0.02;
    let reference = perturbed_run(dt / 4.0);
    let coarse = max_diff(&perturbed_run(dt), &reference);
    let fine = max_diff(&perturbed_run(dt / 2.0), &reference);
    let ratio = coarse / fine;
    // against a dt/4 reference the exact ratio for order 2 is (1 - 1/16)/(1/4 - 1/16) = 5
    assert!(
        ratio > 3.5,
        "error ratio {ratio} (coarse {coarse:e}, fine {fine:e})"
    );
}

#[test]
fn smooth_run_conserves_mass_and_respects_bounds() {
    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let mut cfg = SolverConfig::new(grid);
    cfg.t_end = -0.8;
    cfg.positivity = PositivityPolicy::Reject;
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    let ic = InitialCondition::TaylorGreen {
        velocity: 1.0,
        n_mean: 1.0,
        n_amp: 0.1,
        c0: 1.0,
    };
    let out = run(&cfg, ic.build(grid, -1.0).unwrap()).unwrap();
    assert!(out.aborted.is_none());
    let m0 = out.monitor[0].mass;
    assert!(out.max_abs_mass_drift() <= 1e-8 * m0);
    let c0 = out.monitor[0].max_c;
    for rec in &out.monitor {
        assert!(rec.max_c <= c0 + 1e-8);
        assert!(rec.min_n >= -1e-12);
        assert!(rec.divergence <= 1e-10 * rec.u_max.max(1e-300));
    }
    // pressure is consistent with the final velocity
    let last = out.series.snapshots().last().unwrap();
    let res = ckns::pressure::global_residual(&last.p, &last.u, &last.n, &cfg.gradphi).unwrap();
    assert!(res < 1e-10);
    let sp = Spectral::for_grid(grid);
    assert!(sp.max_divergence(&last.u).unwrap() <= 1e-10 * last.u.max_norm());
}

#[test]
fn quiescent_run_is_constant() {
    let grid = Grid::cubic(8, 1.0).unwrap();
    let mut cfg = SolverConfig::new(grid);
    cfg.dt = TimeStep::Fixed(0.01);
    cfg.t_end = -0.9;
    let ic = InitialCondition::Quiescent { n0: 0.0, c0: 1.0 };
    let out = run(&cfg, ic.build(grid, -1.0).unwrap()).unwrap();
    assert_eq!(out.series.len(), 11);
    for s in out.series.snapshots() {
        assert!(s.c.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }
}

#[test]
fn reject_policy_stops_on_negative_density() {
    let grid = Grid::planar(16, 1.0).unwrap();
    let mut cfg = SolverConfig::new(grid);
    cfg.dt = TimeStep::Fixed(1e-4);
    cfg.t_end = -0.999;
    cfg.positivity = PositivityPolicy::Reject;
    let mut s = State::zeros(grid, -1.0);
    // a single spike has Gibbs undershoot on the spectral grid
    s.n.values[0] = 10.0;
    s.c = ScalarField::constant(grid, -1.0, 1.0);
    let out = run(&cfg, s).unwrap();
    assert!(out.aborted.is_some());
    assert!(!out.series.is_empty());
}
