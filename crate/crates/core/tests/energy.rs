use std::f64::consts::PI;

use ckns::diagnostics::constants::{lambda_constants, Constants};
use ckns::diagnostics::energy::{local_energy_residual, EnergyAccumulator, Placement};
use ckns::diagnostics::test_function::{Bump, PhiN, TestFunction};
use ckns::grid::{GradPhi, Grid, ScalarField};
use ckns::sampling::{ClosedFormSource, PointState, Sampling, SeriesSource};
use ckns::solver::presets::InitialCondition;
use ckns::solver::{run_with_observer, FineWindow, SolverConfig};

const ORIGIN: Placement = Placement {
    center: [0.0; 3],
    t0: 0.0,
};

fn constants(c_sup: f64) -> Constants {
    Constants::from_sups(c_sup, 0.0, 1.0).unwrap()
}

/// `c = 1 + ½ e^{−|k|²(t+1)} cos(k·x)` solves the heat equation.
fn heat_mode_c(x: [f64; 3], t: f64) -> PointState {
    let k = [2.0, 1.0, 0.0];
    let k2 = 5.0;
    let e = 0.5 * (-k2 * (t + 1.0)).exp();
    let th = k[0] * x[0] + k[1] * x[1];
    let mut hess_c = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            hess_c[a][b] = -e * th.cos() * k[a] * k[b];
        }
    }
    PointState {
        c: 1.0 + e * th.cos(),
        grad_c: k.map(|v| -e * th.sin() * v),
        hess_c,
        ..Default::default()
    }
}

/// `n = 1 + ½ e^{−t−1} sin x` with `c = 0`, `u = 0`.
fn heat_mode_n(x: [f64; 3], t: f64) -> PointState {
    let e = 0.5 * (-(t + 1.0)).exp();
    PointState {
        n: 1.0 + e * x[0].sin(),
        grad_n: [e * x[0].cos(), 0.0, 0.0],
        ..Default::default()
    }
}

#[test]
fn zero_solution_gives_zero_groups() {
    let src = ClosedFormSource::new(
        |_: [f64; 3], _: f64| PointState {
            c: 0.7,
            ..Default::default()
        },
        8,
        16,
    );
    let psi = Bump::new(0.9).unwrap();
    let r = local_energy_residual(&src, &psi, ORIGIN, -0.1, &constants(0.7)).unwrap();
    for (name, v) in &r.terms {
        assert_eq!(*v, 0.0, "{name}");
    }
    assert_eq!(r.margin, 0.0);
    assert_eq!(r.velocity_weight, 112.0 * 1.7);
}

#[test]
fn heat_mode_in_oxygen_satisfies_inequality_and_identity() {
    let src = ClosedFormSource::new(heat_mode_c, 24, 20);
    let psi = Bump::new(0.5).unwrap();
    for &t in &[-0.1, 0.0] {
        let r = local_energy_residual(&src, &psi, ORIGIN, t, &constants(1.5)).unwrap();
        assert!(r.holds(0.05), "t = {t}: margin {} rhs {}", r.margin, r.rhs);
        assert!(
            r.c_identity.relative() < 1e-3,
            "J balance {:?}",
            r.c_identity
        );
        assert!(r.terms["L3"] > 0.0);
    }
}

#[test]
fn heat_mode_in_density_balances_entropy_and_mass() {
    let src = ClosedFormSource::new(heat_mode_n, 24, 20);
    let psi = Bump::new(0.5).unwrap();
    let r = local_energy_residual(&src, &psi, ORIGIN, -0.1, &constants(0.0)).unwrap();
    assert!(
        r.n_identity.relative() < 1e-3,
        "T balance {:?}",
        r.n_identity
    );
    assert!(
        r.mass_identity.relative() < 1e-3,
        "K balance {:?}",
        r.mass_identity
    );
}

#[test]
fn test_function_reaching_the_boundary_is_rejected() {
    struct Wide;
    impl TestFunction for Wide {
        fn eval(&self, _: [f64; 3], _: f64) -> ckns::diagnostics::test_function::TestValue {
            ckns::diagnostics::test_function::TestValue {
                value: 1.0,
                ..Default::default()
            }
        }
        fn support_radius(&self) -> f64 {
            0.5
        }
        fn support_start(&self) -> f64 {
            -1.0
        }
    }
    let src = ClosedFormSource::new(heat_mode_c, 4, 4);
    let err = local_energy_residual(&src, &Wide, ORIGIN, -0.1, &constants(0.0)).unwrap_err();
    assert!(err.to_string().contains("parabolic boundary"));
}

#[test]
fn streaming_matches_stored_series() {
    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let mut cfg = SolverConfig::new(grid);
    cfg.t_end = 0.0;
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    cfg.fine = Some(FineWindow {
        start: -0.02,
        dt: 1e-3,
    });
    let ic = InitialCondition::TaylorGreen {
        velocity: 1.0,
        n_mean: 1.0,
        n_amp: 0.1,
        c0: 1.0,
    };
    let initial = ic.build(grid, -1.0).unwrap();
    let k = lambda_constants(&initial.c, &cfg.gradphi, 1.0).unwrap();
    let psi = PhiN::new(5);
    let at = Placement {
        center: [1.0, 2.0, 0.5],
        t0: 0.0,
    };
    let sampling = Sampling::Spectral {
        points_per_radius: 6,
    };
    let mut acc = EnergyAccumulator::new(
        &psi,
        at,
        0.0,
        &k,
        cfg.gradphi.clone(),
        sampling,
        grid.length(),
    )
    .unwrap();
    let out = run_with_observer(&cfg, initial, &mut acc).unwrap();
    let last = acc.records().last().unwrap().clone();
    assert!((last.t - 0.0).abs() < 1e-12);

    let src = SeriesSource::new(&out.series, sampling).unwrap();
    let r = local_energy_residual(&src, &psi, at, 0.0, &k).unwrap();
    for (name, v) in &r.terms {
        let w = last.terms[name];
        assert!(
            (v - w).abs() <= 1e-9 * (1.0 + v.abs()),
            "{name}: {v} vs {w}"
        );
    }
}

#[test]
fn constants_follow_the_formulas() {
    let grid = Grid::cubic(8, 1.0).unwrap();
    let k = lambda_constants(
        &ScalarField::zeros(grid, -1.0),
        &GradPhi::Constant([0.0; 3]),
        1.0,
    )
    .unwrap();
    assert_eq!((k.lambda0, k.lambda1, k.alpha), (108.0, 1.0, 1.0 / 20.0));
    let k = lambda_constants(
        &ScalarField::constant(grid, -1.0, 1.0),
        &GradPhi::Constant([0.0, 2.0, 0.0]),
        1.0,
    )
    .unwrap();
    assert_eq!((k.lambda0, k.lambda1), (216.0, 3.0));
    let k = Constants::from_sups(0.0, 0.0, 0.1).unwrap();
    assert!((k.alpha - 0.1 / 4.6).abs() < 1e-15);
    assert!(lambda_constants(
        &ScalarField::constant(grid, -1.0, -0.1),
        &GradPhi::Constant([0.0; 3]),
        1.0
    )
    .is_err());
}
