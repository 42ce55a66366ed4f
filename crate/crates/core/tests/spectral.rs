use ckns::grid::{Grid, ScalarField, VectorField};
use ckns::spectral::*;
use std::f64::consts::PI;

fn grid3(n: usize, l: f64) -> Grid {
    Grid::cubic(n, l).unwrap()
}

#[test]
fn roundtrip_is_identity() {
    let g = Grid::new([8, 4, 16], 3.0).unwrap();
    let s = Spectral::new(g);
    let f: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
    let back = s.inverse(s.forward(&f));
    for (a, b) in f.iter().zip(&back) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn gradient_of_constant_is_zero() {
    let g = grid3(8, 2.0);
    let s = Spectral::for_grid(g);
    let grad = s.gradient(&ScalarField::constant(g, 0.0, 5.0)).unwrap();
    assert!(grad.max_norm() < 1e-12);
}

#[test]
fn gradient_of_sine_mode() {
    let l = 3.0;
    let g = grid3(16, l);
    let s = Spectral::for_grid(g);
    let w = 2.0 * PI / l;
    let f = ScalarField::from_fn(g, 0.0, |x| (w * x[0]).sin());
    let grad = s.gradient(&f).unwrap();
    let err = (0..g.len())
        .map(|i| (grad.components[0][i] - w * (w * g.coord(i)[0]).cos()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-10, "err = {err}");
    assert!(grad.components[1].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn laplacian_of_sine_mode() {
    let l = 2.5;
    let g = grid3(16, l);
    let s = Spectral::for_grid(g);
    let w = 2.0 * PI / l;
    let f = ScalarField::from_fn(g, 0.0, |x| (w * x[0]).sin());
    let lap = s.laplacian(&f).unwrap();
    let scale = w * w;
    for i in 0..g.len() {
        assert!((lap.values[i] + scale * f.values[i]).abs() <= 1e-10 * scale);
    }
}

#[test]
fn divergence_of_constant_vector_is_zero() {
    let g = grid3(8, 1.0);
    let s = Spectral::for_grid(g);
    let v = VectorField::constant(g, 0.0, [1.0, 2.0, 3.0]);
    assert!(s.divergence(&v).unwrap().max_abs() < 1e-12);
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    let g = grid3(16, 2.0 * PI);
    let s = Spectral::for_grid(g);
    let f = ScalarField::from_fn(g, 0.0, |x| {
        (x[0]).sin() * (2.0 * x[1]).cos() + (x[2]).cos().powi(2)
    });
    let lhs = s.divergence(&s.gradient(&f).unwrap()).unwrap();
    let rhs = s.laplacian(&f).unwrap();
    let scale = rhs.max_abs();
    for i in 0..g.len() {
        assert!((lhs.values[i] - rhs.values[i]).abs() <= 1e-10 * scale);
    }
}

#[test]
fn rejects_non_finite_input() {
    let g = grid3(4, 1.0);
    let s = Spectral::for_grid(g);
    let mut f = ScalarField::zeros(g, 0.0);
    f.values[3] = f64::NAN;
    assert!(s.gradient(&f).is_err());
    assert!(s.laplacian(&f).is_err());
}

#[test]
fn projection_removes_divergence() {
    let g = grid3(16, 2.0 * PI);
    let s = Spectral::for_grid(g);
    let v = VectorField::from_fn(g, 0.0, |x| {
        [x[0].sin() * x[1].cos(), x[1].sin(), (x[2] + x[0]).cos()]
    });
    let mut spec = [0, 1, 2].map(|a| s.forward(&v.components[a]));
    s.project(&mut spec);
    let comps = spec.map(|c| s.inverse(c));
    let w = VectorField::new(g, 0.0, comps).unwrap();
    assert!(s.max_divergence(&w).unwrap() <= 1e-12 * w.max_norm().max(1.0));
}

#[test]
fn planar_mode_has_no_z_derivative() {
    let g = Grid::planar(16, 2.0 * PI).unwrap();
    let s = Spectral::for_grid(g);
    let f = ScalarField::from_fn(g, 0.0, |x| x[0].sin() * x[1].sin());
    let lap = s.laplacian(&f).unwrap();
    for i in 0..g.len() {
        assert!((lap.values[i] + 2.0 * f.values[i]).abs() < 1e-12);
    }
}
