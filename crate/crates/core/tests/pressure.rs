use std::f64::consts::PI;

use ckns::grid::{GradPhi, Grid, ScalarField, VectorField};
use ckns::pressure::{
    d_decay_monitor, decompose_local, decompose_local_with_mean, global_residual, mean_value_check,
    newtonian_potential, newtonian_potential_direct, solve_pressure_global,
};
use ckns::sampling::{ClosedFormSource, PointState};

fn taylor_green(grid: Grid) -> VectorField {
    VectorField::from_fn(grid, 0.0, |x| {
        [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
    })
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn taylor_green_pressure_matches_closed_form() {
    let grid = Grid::cubic(32, 2.0 * PI).unwrap();
    let u = taylor_green(grid);
    let n = ScalarField::zeros(grid, 0.0);
    let p = solve_pressure_global(&u, &n, &GradPhi::default()).unwrap();
    let exact = ScalarField::from_fn(grid, 0.0, |x| {
        0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
    });
    assert!(max_diff(&p, &exact) / exact.max_abs() < 1e-8);
    assert!(global_residual(&p, &u, &n, &GradPhi::default()).unwrap() < 1e-10);
}

#[test]
fn trivial_sources_give_zero_pressure() {
    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let u = VectorField::zeros(grid, 0.0);
    let p = solve_pressure_global(&u, &ScalarField::zeros(grid, 0.0), &GradPhi::default()).unwrap();
    assert_eq!(p.max_abs(), 0.0);
    let n = ScalarField::constant(grid, 0.0, 2.0);
    let p = solve_pressure_global(&u, &n, &GradPhi::Constant([0.3, 0.0, 1.0])).unwrap();
    assert!(p.max_abs() < 1e-14);
}

#[test]
fn buoyancy_pressure_balances_its_source() {
    let grid = Grid::cubic(32, 2.0 * PI).unwrap();
    let u = taylor_green(grid);
    let n = ScalarField::from_fn(grid, 0.0, |x| 1.0 + 0.2 * (x[0] + x[2]).sin());
    let g = GradPhi::Constant([0.0, 0.0, 1.0]);
    let p = solve_pressure_global(&u, &n, &g).unwrap();
    assert!(global_residual(&p, &u, &n, &g).unwrap() < 1e-10);
}

/// Compact source with a smooth profile and no symmetry.
fn blob(grid: Grid, center: [f64; 3], a: f64) -> ScalarField {
    ScalarField::from_fn(grid, 0.0, |x| {
        let d = grid.displacement(x, center);
        let r2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (a * a);
        if r2 < 1.0 {
            (1.0 - r2).powi(3) * (1.0 + d[0] - 0.5 * d[1] * d[2])
        } else {
            0.0
        }
    })
}

#[test]
fn padded_convolution_equals_direct_sum() {
    let grid = Grid::cubic(16, 2.0).unwrap();
    let center = [0.9, 1.1, 1.3];
    let f = blob(grid, center, 0.6);
    let fast = newtonian_potential(&f, center).unwrap();
    let slow = newtonian_potential_direct(&f, center).unwrap();
    assert!(max_diff(&fast, &slow) <= 1e-12 * slow.max_abs());
}

#[test]
fn potential_of_uniform_ball_matches_closed_form() {
    // −Δp1 = 1 on B_a gives p1 = (3a² − r²)/6 inside
    let grid = Grid::cubic(64, 2.0).unwrap();
    let center = [1.0; 3];
    let a = 0.5;
    let f = ScalarField::from_fn(grid, 0.0, |x| {
        let d = grid.displacement(x, center);
        if d.iter().map(|v| v * v).sum::<f64>() < a * a {
            1.0
        } else {
            0.0
        }
    });
    let p1 = newtonian_potential(&f, center).unwrap();
    let mut worst = 0.0_f64;
    for (idx, d) in grid.ball_nodes(center, 0.6 * a) {
        let r2 = d.iter().map(|v| v * v).sum::<f64>();
        let exact = (3.0 * a * a - r2) / 6.0;
        worst = worst.max((p1.values[idx] - exact).abs() / exact);
    }
    assert!(worst < 0.02, "worst relative error {worst}");
}

struct Case {
    u: VectorField,
    n: ScalarField,
    gradphi: GradPhi,
    p: ScalarField,
}

fn coupled_case(npts: usize) -> Case {
    let grid = Grid::cubic(npts, 2.0 * PI).unwrap();
    let u = taylor_green(grid);
    let n = ScalarField::from_fn(grid, 0.0, |x| 1.0 + 0.3 * (x[0] + x[2]).sin());
    let gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    let p = solve_pressure_global(&u, &n, &gradphi).unwrap();
    Case { u, n, gradphi, p }
}

#[test]
fn local_decomposition_converges_under_refinement() {
    let center = [PI; 3];
    let rho = 2.8;
    let mut residuals = Vec::new();
    let mut last_relative = f64::NAN;
    for npts in [64, 128] {
        let c = coupled_case(npts);
        let d = decompose_local(&c.p, &c.u, &c.n, &c.gradphi, center, rho).unwrap();
        let back: Vec<f64> =
            d.p1.values
                .iter()
                .zip(&d.p2.values)
                .map(|(a, b)| a + b)
                .collect();
        let gap = back
            .iter()
            .zip(&c.p.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap <= 1e-12 * (1.0 + c.p.max_abs()));
        assert!(d.harmonic_residual.is_finite() && d.p1_laplacian_sup > 0.0);
        residuals.push(d.harmonic_residual);
        last_relative = d.relative_residual();
    }
    assert!(
        residuals[1] <= 0.5 * residuals[0],
        "residuals {residuals:?}"
    );
    assert!(last_relative <= 1e-3, "relative residual {last_relative}");
}

#[test]
fn mean_free_velocity_ignores_mean_subtraction() {
    let c = coupled_case(64);
    let center = [PI; 3];
    let a = decompose_local(&c.p, &c.u, &c.n, &c.gradphi, center, 2.8).unwrap();
    assert!(a.mean_velocity.iter().all(|v| v.abs() < 1e-14));
    let b = decompose_local_with_mean(&c.p, &c.u, &c.n, &c.gradphi, center, 2.8, [0.0; 3]).unwrap();
    assert!(max_diff(&a.p1, &b.p1) <= 1e-12);
}

#[test]
fn quiescent_decomposition_leaves_p_in_p2() {
    let grid = Grid::cubic(64, 2.0 * PI).unwrap();
    let p = ScalarField::from_fn(grid, 0.0, |x| x[0].sin() * x[1].cos());
    let u = VectorField::zeros(grid, 0.0);
    let n = ScalarField::zeros(grid, 0.0);
    let d = decompose_local(&p, &u, &n, &GradPhi::default(), [PI; 3], 2.8).unwrap();
    assert_eq!(d.p1.max_abs(), 0.0);
    assert_eq!(d.p2, p);
    // |Δp| = 2|p| peaks at 2 inside B_{1.4}(π, π, π)
    assert!(
        (d.harmonic_residual
            - 2.0
                * grid
                    .ball_nodes([PI; 3], 1.4)
                    .iter()
                    .map(|(i, _)| p.values[*i].abs())
                    .fold(0.0, f64::max))
        .abs()
            < 1e-4
    );
}

#[test]
fn decomposition_rejects_bad_balls() {
    let c = coupled_case(64);
    let too_big = decompose_local(&c.p, &c.u, &c.n, &c.gradphi, [PI; 3], 3.2).unwrap_err();
    assert!(matches!(
        too_big,
        ckns::error::Error::CylinderExceedsBox { .. }
    ));
    let too_small = decompose_local(&c.p, &c.u, &c.n, &c.gradphi, [PI; 3], 1.0).unwrap_err();
    assert!(matches!(too_small, ckns::error::Error::UnderResolved(_)));
}

#[test]
fn mean_value_ratios_match_harmonic_polynomials() {
    let center = [PI; 3];
    let (r, rho) = (0.8, 2.0);
    let mut ratios = Vec::new();
    for npts in [64, 128] {
        let grid = Grid::cubic(npts, 2.0 * PI).unwrap();
        let x1 = ScalarField::from_fn(grid, 0.0, |x| grid.displacement(x, center)[0]);
        ratios.push(mean_value_check(&x1, center, r, rho, 2.0, 2.0, 0).unwrap());
        let one = ScalarField::constant(grid, 0.0, 1.0);
        assert_eq!(
            mean_value_check(&one, center, r, rho, 2.0, 2.0, 1).unwrap(),
            0.0
        );
        let quad = ScalarField::from_fn(grid, 0.0, |x| {
            let d = grid.displacement(x, center);
            d[0] * d[0] - d[1] * d[1]
        });
        let c = mean_value_check(&quad, center, r, rho, f64::INFINITY, 2.0, 1).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }
    let exact = r * (rho - r).powf(1.5) / rho.powf(2.5);
    for c in &ratios {
        assert!((c - exact).abs() / exact < 0.03, "{c} vs {exact}");
    }
    assert!((ratios[0] - ratios[1]).abs() / ratios[1] < 0.02);

    let grid = Grid::cubic(16, 2.0 * PI).unwrap();
    let f = ScalarField::constant(grid, 0.0, 1.0);
    assert!(mean_value_check(&f, center, 1.0, 1.0, 2.0, 2.0, 0).is_err());
    assert!(mean_value_check(&f, center, 1.0, 1.1, 2.0, 2.0, 0).is_err());
}

#[test]
fn unit_pressure_decays_as_volume() {
    let src = ClosedFormSource::new(
        |_: [f64; 3], _: f64| PointState {
            p: 1.0,
            ..Default::default()
        },
        16,
        16,
    );
    let theta0 = 0.2;
    let table = d_decay_monitor(&src, [0.0; 3], 0.0, theta0, 0.5, 3).unwrap();
    assert!(!table.truncated);
    assert_eq!(table.rows.len(), 4);
    for row in &table.rows {
        let vol = 4.0 * PI / 3.0 * row.radius.powi(3);
        assert!((row.d - vol).abs() / vol < 0.03, "D {} vs {vol}", row.d);
        assert_eq!(row.g, 0.0);
    }
    for w in table.rows.windows(2) {
        assert!((w[1].d / w[0].d - theta0.powi(3)).abs() < 1e-9);
        // G = 0 leaves the pure ½-decay comparison
        assert!((w[1].bound_rhs.unwrap() - 0.5 * w[0].d).abs() < 1e-15);
    }

    let zero = ClosedFormSource::new(|_: [f64; 3], _: f64| PointState::default(), 8, 16);
    let table = d_decay_monitor(&zero, [0.0; 3], 0.0, theta0, 0.5, 2).unwrap();
    assert!(table
        .rows
        .iter()
        .all(|r| r.d == 0.0 && r.g == 0.0 && r.ratio == Some(0.0) || r.k == 0));
    assert!(d_decay_monitor(&zero, [0.0; 3], 0.0, 0.3, 0.5, 2).is_err());
}
