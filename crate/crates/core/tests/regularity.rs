use std::f64::consts::PI;

use ckns::diagnostics::constants::Constants;
use ckns::grid::ParabolicCylinder;
use ckns::regularity::{
    classify_thm15, classify_thm16, classify_thm19, criterion_lhs, dyadic_sweep,
    flag_singular_candidates, vitali_cover, Criterion, Thresholds, Verdict,
};
use ckns::sampling::{ClosedFormSource, PointState};
use proptest::prelude::*;

fn unit_constants() -> Constants {
    Constants::from_sups(0.0, 0.0, 1.0).unwrap()
}

fn source(f: fn([f64; 3], f64) -> PointState) -> ClosedFormSource<fn([f64; 3], f64) -> PointState> {
    ClosedFormSource::new(f, 8, 16)
}

fn zero(_: [f64; 3], _: f64) -> PointState {
    PointState::default()
}

fn moving(_: [f64; 3], _: f64) -> PointState {
    PointState {
        u: [0.6, 0.0, 0.8],
        ..Default::default()
    }
}

fn moving_twice(_: [f64; 3], _: f64) -> PointState {
    PointState {
        u: [1.2, 0.0, 1.6],
        ..Default::default()
    }
}

fn unit_density(_: [f64; 3], _: f64) -> PointState {
    PointState {
        n: 1.0,
        ..Default::default()
    }
}

#[test]
fn zero_solution_is_regular_under_every_criterion() {
    let src = source(zero);
    let k = unit_constants();
    let eps = Thresholds::default();
    let v = classify_thm15(&src, [0.0; 3], 0.0, &k, &eps).unwrap();
    assert_eq!((v.lhs_value, v.verdict), (0.0, Verdict::Regular));
    for variant in [Criterion::Thm16I, Criterion::Thm16Ii] {
        let v = classify_thm16(&src, [0.0; 3], 0.0, variant, &k, &eps).unwrap();
        assert!(v.is_regular());
        assert_eq!(v.constant_c, Some(1.0));
    }
    let v = classify_thm19(&src, [0.0; 3], 0.0, &k, &eps, 1..=5).unwrap();
    assert!(v.is_regular());
    assert_eq!(v.radii_used, vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0]);
}

#[test]
fn thresholds_follow_the_exponents() {
    let k = unit_constants();
    assert_eq!((k.lambda0, k.lambda1, k.alpha0), (108.0, 1.0, 1.0));
    let eps = Thresholds {
        eps1: 1.0,
        eps3: 1.0,
        c: 1.0,
    };
    let t = eps.threshold(Criterion::Thm15, &k);
    assert!((t / 108f64.powi(-8) - 1.0).abs() < 1e-12);
    let two = Constants {
        lambda0: 2.0,
        lambda1: 1.0,
        ..k
    };
    assert!((eps.eps2(&two) / 2f64.powi(-27) - 1.0).abs() < 1e-12);
    assert!((eps.eps2_prime(&two) / 2f64.powf(-135.0 / 4.0) - 1.0).abs() < 1e-12);
    assert!((eps.threshold(Criterion::Thm19, &two) / 2f64.powi(-5) - 1.0).abs() < 1e-12);
}

#[test]
fn doubling_velocity_quadruples_the_energy_term() {
    let k = unit_constants();
    let eps = Thresholds::default();
    let a = classify_thm15(&source(moving), [0.0; 3], 0.0, &k, &eps).unwrap();
    let b = classify_thm15(&source(moving_twice), [0.0; 3], 0.0, &k, &eps).unwrap();
    assert!((b.lhs_value / a.lhs_value - 4.0).abs() < 1e-12);
    // sup_t ∫_{B1} |u|² = 4π/3
    assert!((a.lhs_value - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0) < 0.03);
    assert_eq!(a.verdict, Verdict::NotConcluded);
}

#[test]
fn unit_density_fills_the_cylinder_volume() {
    let k = unit_constants();
    let v = classify_thm16(
        &source(unit_density),
        [0.0; 3],
        0.0,
        Criterion::Thm16I,
        &k,
        &Thresholds::default(),
    )
    .unwrap();
    let vol = 4.0 * PI / 3.0;
    assert!((v.lhs_value - vol).abs() / vol < 0.03, "{}", v.lhs_value);
    assert!(classify_thm16(
        &source(unit_density),
        [0.0; 3],
        0.0,
        Criterion::Thm19,
        &k,
        &Thresholds::default()
    )
    .is_err());
}

#[test]
fn constant_velocity_limsup_proxy_decays_as_r_squared() {
    let k = unit_constants();
    let v = classify_thm19(
        &source(moving),
        [0.0; 3],
        0.0,
        &k,
        &Thresholds::default(),
        1..=5,
    )
    .unwrap();
    for w in v.values.windows(2) {
        let ratio = w[0].value / w[1].value;
        assert!((ratio - 0.25).abs() < 0.03 * 0.25, "ratio {ratio}");
    }
    for rv in &v.values {
        let exact = 4.0 * PI / 3.0 * rv.r * rv.r;
        assert!((rv.value - exact).abs() / exact < 0.03);
    }
    let few = classify_thm19(
        &source(moving),
        [0.0; 3],
        0.0,
        &k,
        &Thresholds::default(),
        1..=2,
    )
    .unwrap();
    assert_eq!(few.verdict, Verdict::NotConcluded);
    assert_eq!(few.flags.len(), 1);
}

/// `n ≡ r^{−3/2}` on `B_r`: `r⁻¹ ∫_{B_r} |n ln n| = (4π/3) r^{1/2} · (3/2)|ln r|`.
#[test]
fn log_weight_of_singular_density_scale() {
    let r: f64 = 1.0 / 16.0;
    let src = ClosedFormSource::new(
        move |_: [f64; 3], _: f64| PointState {
            n: r.powf(-1.5),
            ..Default::default()
        },
        8,
        16,
    );
    let q = ParabolicCylinder::new([0.0; 3], 0.0, r).unwrap();
    let lhs = criterion_lhs(&src, &q, Criterion::Thm19).unwrap();
    let vol = 4.0 * PI / 3.0 * r.powi(3);
    let n = r.powf(-1.5);
    let exact = vol * (n + n * n.ln().abs()) / r;
    assert!((lhs - exact).abs() / exact < 0.03);
    // the log factor is |ln r^{−3/2}| = 3|ln r^{1/2}|
    assert!((n.ln().abs() - 3.0 * r.sqrt().ln().abs()).abs() < 1e-12);
}

#[test]
fn raising_a_threshold_never_loses_regularity() {
    let k = unit_constants();
    let src = source(moving);
    let mut was_regular = false;
    for eps1 in [1e-3, 1e6, 1e12, 1e18, 1e24] {
        let eps = Thresholds {
            eps1,
            ..Default::default()
        };
        let v = classify_thm15(&src, [0.0; 3], 0.0, &k, &eps).unwrap();
        assert!(!was_regular || v.is_regular());
        was_regular = v.is_regular();
    }
    assert!(was_regular);
}

#[test]
fn dyadic_sweep_rows() {
    let t = dyadic_sweep(&source(zero), [0.0; 3], 0.0, 5).unwrap();
    let radii: Vec<f64> = t.rows.iter().map(|r| r.r).collect();
    assert_eq!(radii, vec![0.5, 0.25, 0.125, 0.0625, 0.03125]);
    assert!(t.rows.iter().all(|r| r.value == 0.0));
    let t = dyadic_sweep(&source(moving), [0.0; 3], 0.0, 5).unwrap();
    let exact = 4.0 * PI / 3.0;
    for row in &t.rows {
        assert!((row.value - exact).abs() / exact < 0.03, "{}", row.value);
    }
}

fn blob(x: [f64; 3], _: f64) -> PointState {
    let s2 = 0.02;
    let amp = 1e4;
    let r2 = x.iter().map(|v| v * v).sum::<f64>();
    let n = amp * (-r2 / (2.0 * s2)).exp() + 1e-6;
    PointState {
        n,
        grad_n: x.map(|v| -(n - 1e-6) * v / s2),
        ..Default::default()
    }
}

#[test]
fn flagged_centers_match_direct_evaluation() {
    let src = ClosedFormSource::new(blob as fn([f64; 3], f64) -> PointState, 8, 16);
    let centers: Vec<[f64; 3]> = (-3..=3).map(|i| [i as f64 * 0.15, 0.0, 0.0]).collect();
    let threshold = 1e3;
    let flagged =
        flag_singular_candidates(&src, &centers, 0.0, Criterion::Thm19, threshold, 2..=4).unwrap();
    let expected: Vec<[f64; 3]> = centers
        .iter()
        .copied()
        .filter(|&c| {
            (2..=4).all(|k| {
                let q = ParabolicCylinder::new(c, 0.0, 0.5_f64.powi(k)).unwrap();
                criterion_lhs(&src, &q, Criterion::Thm19).unwrap() > threshold
            })
        })
        .collect();
    let got: Vec<[f64; 3]> = flagged.iter().map(|q| q.center).collect();
    assert_eq!(got, expected);
    assert!(!got.is_empty() && got.len() < centers.len());
    assert!(got.iter().all(|c| c[0].abs() < 0.2));
    assert!(flagged.iter().all(|q| q.radius == 1.0 / 16.0));

    assert!(
        flag_singular_candidates(&src, &centers, 0.0, Criterion::Thm19, f64::INFINITY, 2..=4)
            .unwrap()
            .is_empty()
    );
    assert!(
        flag_singular_candidates(&source(zero), &centers, 0.0, Criterion::Thm19, 0.0, 2..=4)
            .unwrap()
            .is_empty()
    );
    assert!(flag_singular_candidates(&src, &[], 0.0, Criterion::Thm19, 0.0, 2..=4).is_err());
}

#[test]
fn vitali_small_cases() {
    let q = ParabolicCylinder::new([0.0; 3], 0.0, 0.5).unwrap();
    let est = vitali_cover(&[q]);
    assert_eq!(est.chosen, vec![q]);
    assert!((est.premeasure - 0.5f64.powf(5.0 / 3.0)).abs() < 1e-15);

    let big = ParabolicCylinder::new([0.0; 3], 0.0, 1.0).unwrap();
    let est = vitali_cover(&[q, big]);
    assert_eq!(est.chosen, vec![big]);
    assert_eq!(est.premeasure, 1.0);

    let est = vitali_cover(&[]);
    assert!(est.chosen.is_empty() && est.premeasure == 0.0);
}

/// Brute-force checks of the covering postconditions, written against the
/// set geometry `B_r(x) × (t − r², t + r²)`.
fn check_cover(flagged: &[ParabolicCylinder]) {
    let est = vitali_cover(flagged);
    let dist = |a: [f64; 3], b: [f64; 3]| {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    for (i, a) in est.chosen.iter().enumerate() {
        for b in &est.chosen[i + 1..] {
            let apart_x = dist(a.center, b.center) >= a.radius + b.radius;
            let apart_t = (a.t0 - b.t0).abs() >= a.radius.powi(2) + b.radius.powi(2);
            assert!(apart_x || apart_t, "{a:?} meets {b:?}");
        }
    }
    for q in flagged {
        let covered = est.chosen.iter().any(|c| {
            let r = 5.0 * c.radius;
            dist(c.center, q.center) + q.radius <= r * (1.0 + 1e-12)
                && (c.t0 - q.t0).abs() + q.radius.powi(2) <= r * r * (1.0 + 1e-12)
        });
        assert!(covered, "{q:?} not covered");
    }
    let sum: f64 = est.chosen.iter().map(|c| c.radius.powf(5.0 / 3.0)).sum();
    assert!((est.premeasure - sum).abs() <= 1e-12 * sum.max(1.0));
}

fn arb_cylinder() -> impl Strategy<Value = ParabolicCylinder> {
    (
        -1.0..1.0f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
        -0.5..0.5f64,
        0.01..0.5f64,
    )
        .prop_map(|(x, y, z, t, r)| ParabolicCylinder::new([x, y, z], t, r).unwrap())
}

proptest! {
    #[test]
    fn vitali_postconditions_hold(family in prop::collection::vec(arb_cylinder(), 0..24)) {
        check_cover(&family);
    }

    #[test]
    fn premeasure_scales_with_the_covering(family in prop::collection::vec(arb_cylinder(), 1..12), lambda in 0.1..4.0f64) {
        let scaled: Vec<ParabolicCylinder> = family
            .iter()
            .map(|q| ParabolicCylinder::new(q.center.map(|v| lambda * v), lambda * lambda * q.t0, lambda * q.radius).unwrap())
            .collect();
        let a = vitali_cover(&family).premeasure;
        let b = vitali_cover(&scaled).premeasure;
        prop_assert!((b - lambda.powf(5.0 / 3.0) * a).abs() <= 1e-9 * b);
    }
}

#[test]
fn eight_seeded_cylinders_pass_the_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let family: Vec<ParabolicCylinder> = (0..8)
        .map(|_| {
            let c = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            ParabolicCylinder::new(c, rng.random_range(-0.5..0.5), rng.random_range(0.05..0.6))
                .unwrap()
        })
        .collect();
    check_cover(&family);
}

#[test]
fn criterion_names_round_trip() {
    for c in Criterion::ALL {
        assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            format!("\"{}\"", c.name())
        );
    }
}
