use ckns::diagnostics::test_function::*;
use ckns::error::Error;

#[test]
fn kernel_values_at_reference_points() {
    for n in 1..6 {
        let rn = dyadic_radius(n);
        let v0 = psi_n([0.0; 3], 0.0, n).unwrap().value;
        assert!((v0 / rn.powi(-3) - 1.0).abs() < 1e-14);
        let v1 = psi_n([0.0; 3], -rn * rn, n).unwrap().value;
        assert!((v1 / (2.0 * rn * rn).powf(-1.5) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn kernel_rejects_late_times() {
    assert!(psi_n([0.0; 3], 0.25, 1).is_err());
}

#[test]
fn smoothstep_derivatives_match_differences() {
    let h = 1e-6;
    for &s in &[0.1, 0.3, 0.5, 0.77, 0.95] {
        let (v, d1, d2) = smoothstep(s);
        let (vp, d1p, _) = smoothstep(s + h);
        let (vm, d1m, _) = smoothstep(s - h);
        assert!(((vp - vm) / (2.0 * h) - d1).abs() < 1e-6);
        assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-5);
        assert!((0.0..=1.0).contains(&v));
    }
    assert!((smoothstep(0.5).0 - 0.5).abs() < 1e-15);
}

#[test]
fn cutoff_derivatives_match_differences() {
    let c = Cutoff::standard();
    let h = 1e-6;
    let x = [0.05, 0.06, 0.03];
    let t = -0.008;
    let v = c.eval(x, t);
    let mut lap = 0.0;
    for a in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[a] += h;
        xm[a] -= h;
        let fd = (c.eval(xp, t).value - c.eval(xm, t).value) / (2.0 * h);
        assert!((fd - v.grad[a]).abs() < 1e-5);
        let h2 = 1e-4;
        let mut xp = x;
        let mut xm = x;
        xp[a] += h2;
        xm[a] -= h2;
        lap += (c.eval(xp, t).value - 2.0 * v.value + c.eval(xm, t).value) / (h2 * h2);
    }
    assert!((lap - v.lap).abs() < 1e-2 * v.lap.abs().max(1.0));
    let fdt = (c.eval(x, t + h).value - c.eval(x, t - h).value) / (2.0 * h);
    assert!((fdt - v.dt).abs() < 1e-4 * v.dt.abs().max(1.0));
}

#[test]
fn cutoff_plateau_and_support() {
    let c = Cutoff::standard();
    assert_eq!(c.eval([0.06, 0.0, 0.0], -0.003).value, 1.0);
    assert_eq!(c.eval([0.13, 0.0, 0.0], -0.001).value, 0.0);
    assert_eq!(c.eval([0.0; 3], -0.02).value, 0.0);
}

#[test]
fn phi_n_properties_hold() {
    let p = phi_properties_check(5).unwrap();
    assert!(p.bounds_hold, "{p:?}");
    assert!(p.caloric_ratio >= 3.5, "{p:?}");
    assert!(
        p.plateau_residual < 1e-9 * dyadic_radius(5).powi(-5),
        "{p:?}"
    );
}

#[test]
fn phi_n_vanishes_on_unit_boundary() {
    assert!(check_support(&PhiN::new(5), 0.0).is_ok());
    assert!(check_support(&Bump::new(0.9).unwrap(), -0.1).is_ok());
}

#[test]
fn wide_bump_violates_support() {
    let wide = Bump::new(3.0).unwrap();
    assert!(matches!(
        check_support(&wide, 0.0),
        Err(Error::SupportViolation(_))
    ));
}
