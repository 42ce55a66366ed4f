use ckns::sampling::*;

#[test]
fn window_integral_clips_partial_intervals() {
    let times = [0.0, 1.0, 2.0];
    let values = [0.0, 1.0, 2.0];
    // ∫_{0.5}^{1.5} t dt = 1
    assert!((window_integral(&times, &values, 0.5, 1.5) - 1.0).abs() < 1e-15);
    assert!((window_integral(&times, &values, 0.0, 2.0) - 2.0).abs() < 1e-15);
}

#[test]
fn window_sup_ignores_bracketing_nodes() {
    let times = [0.0, 1.0, 2.0];
    let values = [9.0, 1.0, 2.0];
    assert_eq!(window_sup(&times, &values, 0.5, 2.0), 2.0);
}

#[test]
fn x_ln_x_is_continuous_at_zero_and_vanishes_at_one() {
    assert_eq!(x_ln_x(0.0), 0.0);
    assert_eq!(x_ln_x(1.0), 0.0);
    assert!(x_ln_x(1e-300).abs() < 1e-296);
}
