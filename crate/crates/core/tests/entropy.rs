use ckns::diagnostics::entropy::*;
use ckns::grid::{Grid, ScalarField};

#[test]
fn alpha_maximum_matches_closed_form() {
    let (n, v) = max_n_alpha_abs_ln(0.05).unwrap();
    assert!((v - 20.0 / std::f64::consts::E).abs() < 1e-9);
    assert!((n / (-20.0f64).exp() - 1.0).abs() < 1e-6);
}

#[test]
fn split_constants_match_closed_forms() {
    let (k_low, k_high) = split_constants();
    let expected_low = 100f64.powf(1.0 / 6.0) * 100f64.ln().powf(1.5);
    assert!((k_low - expected_low).abs() < 1e-9);
    assert!((k_high - 27.0 * (-1.5f64).exp()).abs() < 1e-9);
}

#[test]
fn luxemburg_of_constant_e_on_unit_volume() {
    // (e/k) ln(e/k) = 1 ⇒ e/k = e^{W(1)} ⇒ k = e^{1-Ω}
    let omega = 0.567_143_290_409_783_8_f64;
    let k = luxemburg_norm(&[std::f64::consts::E], 1.0);
    assert!((k - (1.0 - omega).exp()).abs() < 1e-7);
}

#[test]
fn luxemburg_of_zero_is_zero() {
    assert_eq!(luxemburg_norm(&[0.0; 4], 1.0), 0.0);
}

#[test]
fn entropy_of_unit_density_vanishes() {
    let grid = Grid::cubic(32, 4.0).unwrap();
    let n = ScalarField::constant(grid, 0.0, 1.0);
    let e = entropy_norms(&n, [2.0; 3], 1.0).unwrap();
    assert_eq!(e.n_abs_ln_n, 0.0);
    assert_eq!(e.n_ln_n_32, 0.0);
    assert!(e.mass > 0.0);
}

#[test]
fn negative_density_is_rejected() {
    let grid = Grid::cubic(16, 4.0).unwrap();
    let n = ScalarField::constant(grid, 0.0, -1.0);
    assert!(entropy_norms(&n, [2.0; 3], 1.0).is_err());
}
