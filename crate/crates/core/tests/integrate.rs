use ckns::grid::{Grid, ScalarField};
use ckns::integrate::*;

#[test]
fn unit_ball_volume_within_band() {
    // h = r/16
    let grid = Grid::cubic(64, 4.0).unwrap();
    let one = ScalarField::constant(grid, 0.0, 1.0);
    let v = integrate_ball(&one, [2.0; 3], 1.0).unwrap();
    let exact = 4.0 * std::f64::consts::PI / 3.0;
    assert!((v.value / exact - 1.0).abs() < 0.03);
    assert!(!v.under_resolved);
}

#[test]
fn second_moment_within_band() {
    let grid = Grid::cubic(64, 4.0).unwrap();
    let f = ScalarField::from_fn(grid, 0.0, |x| (x[0] - 2.0).powi(2));
    let v = integrate_ball(&f, [2.0; 3], 1.0).unwrap();
    let exact = 4.0 * std::f64::consts::PI / 15.0;
    assert!((v.value / exact - 1.0).abs() < 0.03);
}

#[test]
fn zero_integrand_is_exactly_zero() {
    let grid = Grid::cubic(16, 4.0).unwrap();
    let f = ScalarField::zeros(grid, 0.0);
    assert_eq!(integrate_ball(&f, [1.0; 3], 1.0).unwrap().value, 0.0);
}

#[test]
fn oversized_ball_is_rejected() {
    let grid = Grid::cubic(16, 4.0).unwrap();
    let f = ScalarField::zeros(grid, 0.0);
    let err = integrate_ball(&f, [1.0; 3], 2.0).unwrap_err();
    assert!(err.to_string().contains("cylinder exceeds box"));
}

#[test]
fn coarse_ball_is_flagged() {
    let grid = Grid::cubic(16, 4.0).unwrap();
    let f = ScalarField::constant(grid, 0.0, 1.0);
    assert!(integrate_ball(&f, [1.0; 3], 1.0).unwrap().under_resolved);
}
