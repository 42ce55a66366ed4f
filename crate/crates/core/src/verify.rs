//! Property checks behind `ckns verify` and the acceptance suite.
//!
//! Each check returns a [`CheckResult`]. Checks made of several
//! sub-conditions report the worst `measured / allowed` ratio against a
//! tolerance of 1 and spell out the raw numbers in `detail`.

use std::f64::consts::{E, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::constants::{lambda_constants, Constants};
use crate::diagnostics::energy::{EnergyAccumulator, Placement};
use crate::diagnostics::entropy::max_n_alpha_abs_ln;
use crate::diagnostics::quantities::{quantities, QuantityReport};
use crate::diagnostics::test_function::{dyadic_radius, phi_properties_check, psi_n, PhiN};
use crate::error::Result;
use crate::grid::{GradPhi, Grid, ParabolicCylinder, ScalarField, State, VectorField};
use crate::pressure::{decompose_local, solve_pressure_global};
use crate::regularity::{
    classify_thm15, classify_thm16, classify_thm19, dyadic_sweep, vitali_cover, Criterion,
    RegularityVerdict, Thresholds,
};
use crate::report::{CheckResult, EnergyEntry};
use crate::sampling::{ClosedForm, ClosedFormSource, CylinderSource, PointState, Sampling};
use crate::scaling::{scale_transform, GaussianGenerator, PolynomialGenerator, TrigGenerator};
use crate::solver::presets::InitialCondition;
use crate::solver::{run_with_observer, FineWindow, PositivityPolicy, SolverConfig, StepInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Runs the solver checks on a 32³ grid instead of 64³.
    pub fast: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub checks: Vec<CheckResult>,
    /// Energy inequality records of the solver check, term by term.
    pub energy: Option<EnergyEntry>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn guarded(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::failed(name, &e))
}

/// Worst of several `(label, measured / allowed)` ratios.
fn worst_ratio(name: &str, parts: &[(String, f64)]) -> CheckResult {
    let worst = parts.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let nan = parts.iter().any(|(_, r)| r.is_nan());
    let detail = parts
        .iter()
        .map(|(l, _)| l.as_str())
        .collect::<Vec<_>>()
        .join("; ");
    let mut c = CheckResult::at_most(name, if nan { f64::NAN } else { worst }, 1.0, detail);
    c.passed &= !nan;
    c
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub const SCALING: &str = "1 scaling invariance";
pub const CALORIC: &str = "2 caloric test function";
pub const ENTROPY: &str = "3 entropy maxima";
pub const CONSERVATION: &str = "4 conservation, positivity, maximum principle";
pub const ENERGY: &str = "5 local energy inequality";
pub const PRESSURE: &str = "6 pressure decomposition";
pub const VITALI: &str = "7 Vitali cover";
pub const CLASSIFIER: &str = "8 classifier soundness";
pub const SWEEP: &str = "9 dyadic sweep";

fn quantities_of<G: ClosedForm>(g: G, q: &ParabolicCylinder) -> Result<QuantityReport> {
    quantities(&ClosedFormSource::new(g, 16, 32), q)
}

/// `q(scaled, r) = q(original, λr)` for the nine quantities, three
/// generators and `λ ∈ {2, 4}`.
pub fn scaling_invariance() -> CheckResult {
    guarded(SCALING, || {
        let tol = 1e-6;
        let (x0, t0, r) = ([0.1, -0.2, 0.3], -0.05, 0.2);
        let mut worst = 0.0_f64;
        let mut at = String::new();
        let mut compare = |gen: &str, lambda: f64, a: QuantityReport, b: QuantityReport| {
            for ((name, va), vb) in QuantityReport::NAMES.iter().zip(a.values()).zip(b.values()) {
                let d = rel_diff(va, vb);
                if d > worst || at.is_empty() {
                    worst = worst.max(d);
                    at = format!("{gen} λ={lambda} {name}");
                }
            }
        };
        for lambda in [2.0, 4.0] {
            let small = ParabolicCylinder::new(x0, t0, r)?;
            let big =
                ParabolicCylinder::new(x0.map(|v| lambda * v), lambda * lambda * t0, lambda * r)?;
            compare(
                "trig",
                lambda,
                quantities_of(scale_transform(TrigGenerator, lambda)?, &small)?,
                quantities_of(TrigGenerator, &big)?,
            );
            compare(
                "gaussian",
                lambda,
                quantities_of(scale_transform(GaussianGenerator, lambda)?, &small)?,
                quantities_of(GaussianGenerator, &big)?,
            );
            compare(
                "polynomial",
                lambda,
                quantities_of(scale_transform(PolynomialGenerator, lambda)?, &small)?,
                quantities_of(PolynomialGenerator, &big)?,
            );
        }
        Ok(CheckResult::at_most(
            SCALING,
            worst,
            tol,
            format!(
                "max relative difference over 3 generators × 2 factors × 9 quantities, at {at}"
            ),
        ))
    })
}

/// Second-order convergence of the finite-difference heat residual of `Ψ_n`
/// and the pointwise bounds of `Ψ_n` on `Q_{r_n}`, for `n = 2..=6`.
pub fn caloric_test_function() -> CheckResult {
    guarded(CALORIC, || {
        let mut parts = Vec::new();
        let mut worst_ratio_seen = f64::INFINITY;
        let mut worst_bound = 0.0_f64;
        for level in 2..=6 {
            let p = phi_properties_check(level)?;
            worst_ratio_seen = worst_ratio_seen.min(p.caloric_ratio);
            let rn = dyadic_radius(level);
            let lower = rn.powi(-3) * 2f64.powf(-1.5) * (-0.25f64).exp();
            let upper = rn.powi(-3);
            let m = 8;
            for i in 0..=m {
                // radial offsets up to |x| = r_n along a skew direction
                let s = rn * i as f64 / m as f64;
                let x = [s * 0.6, s * 0.0, s * 0.8];
                for j in 0..=m {
                    let t = -rn * rn * j as f64 / m as f64;
                    let v = psi_n(x, t, level)?.value;
                    // a bound violation shows up as a ratio above 1
                    worst_bound = worst_bound.max(lower / v).max(v / upper);
                }
            }
        }
        parts.push((
            format!("min FD residual reduction {worst_ratio_seen:.3} (need ≥ 3.5)"),
            3.5 / worst_ratio_seen,
        ));
        parts.push((
            format!("max bound ratio {worst_bound:.6} (need ≤ 1)"),
            worst_bound,
        ));
        Ok(worst_ratio(CALORIC, &parts))
    })
}

/// `max n^{1/20}|ln n|` on `(0, 1)` against `20/e` at `e^{−20}`.
pub fn entropy_maxima() -> CheckResult {
    guarded(ENTROPY, || {
        let (arg, max) = max_n_alpha_abs_ln(1.0 / 20.0)?;
        let dmax = (max - 20.0 / E).abs();
        let darg = (arg / (-20.0f64).exp() - 1.0).abs();
        Ok(worst_ratio(
            ENTROPY,
            &[
                (format!("|max − 20/e| = {dmax:.2e} (≤ 1e-6)"), dmax / 1e-6),
                (
                    format!("|argmax/e^-20 − 1| = {darg:.2e} (≤ 1e-4)"),
                    darg / 1e-4,
                ),
            ],
        ))
    })
}

/// The smooth Taylor–Green run of the solver checks.
pub fn smooth_run_config(n: usize) -> Result<(SolverConfig, State)> {
    let grid = Grid::cubic(n, 2.0 * PI)?;
    let mut cfg = SolverConfig::new(grid);
    cfg.positivity = PositivityPolicy::Reject;
    cfg.gradphi = GradPhi::Constant([0.0, 0.0, 1.0]);
    cfg.fine = Some(FineWindow {
        start: -1.0 / 64.0,
        dt: 1.0 / 4096.0,
    });
    cfg.retain_states = false;
    let initial = InitialCondition::TaylorGreen {
        velocity: 1.0,
        n_mean: 1.0,
        n_amp: 0.1,
        c0: 1.0,
    }
    .build(grid, cfg.t_start)?;
    Ok((cfg, initial))
}

/// Criteria 4 and 5 on one run: conservation, positivity, maximum
/// principle and divergence, and the local energy inequality with `φ_5`
/// at `(1, 2, 0.5, 0)`, streamed step by step.
pub fn smooth_run_checks(n: usize) -> (CheckResult, CheckResult, Option<EnergyEntry>) {
    let fail = |e: &crate::Error| {
        (
            CheckResult::failed(CONSERVATION, e),
            CheckResult::failed(ENERGY, e),
            None,
        )
    };
    let (cfg, initial) = match smooth_run_config(n) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let k: Constants = match lambda_constants(&initial.c, &cfg.gradphi, 1.0) {
        Ok(k) => k,
        Err(e) => return fail(&e),
    };
    let c0_max = initial
        .c
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let psi = PhiN::new(5);
    let at = Placement {
        center: [1.0, 2.0, 0.5],
        t0: 0.0,
    };
    let sampling = Sampling::Spectral {
        points_per_radius: 32,
    };
    let started = Instant::now();
    let mut acc = match EnergyAccumulator::new(
        &psi,
        at,
        cfg.t_end,
        &k,
        cfg.gradphi.clone(),
        sampling,
        cfg.grid.length(),
    ) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let mut observer =
        |s: &State, info: &StepInfo| crate::solver::StepObserver::observe(&mut acc, s, info);
    let out = match run_with_observer(&cfg, initial, &mut observer) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let elapsed = started.elapsed().as_secs_f64();

    let m0 = out.monitor.first().map_or(0.0, |m| m.mass);
    let drift = out.max_abs_mass_drift() / m0.abs().max(f64::MIN_POSITIVE);
    let min_n = out
        .steps
        .iter()
        .map(|s| s.min_n_pre_clip)
        .fold(f64::INFINITY, f64::min);
    let max_c = out
        .monitor
        .iter()
        .map(|m| m.max_c)
        .fold(f64::NEG_INFINITY, f64::max);
    let div = out
        .monitor
        .iter()
        .map(|m| m.divergence / (1e-10 * m.u_max.max(f64::MIN_POSITIVE)))
        .fold(0.0, f64::max);
    let mut parts = vec![
        (
            format!("relative mass drift {drift:.2e} (≤ 1e-8)"),
            drift / 1e-8,
        ),
        (
            format!("min n {min_n:.2e} (≥ -1e-12)"),
            (-min_n).max(0.0) / 1e-12,
        ),
        (
            format!("max c − max c0 = {:.2e} (≤ 1e-8)", max_c - c0_max),
            (max_c - c0_max).max(0.0) / 1e-8,
        ),
        (format!("divergence / (1e-10 ‖u‖∞) = {div:.2e}"), div),
        (format!("runtime {elapsed:.0} s (< 600 s)"), elapsed / 600.0),
        (format!("{} steps", out.steps.len()), 0.0),
    ];
    if let Some(reason) = &out.aborted {
        parts.push((format!("run aborted: {reason}"), f64::INFINITY));
    }
    let conservation = worst_ratio(CONSERVATION, &parts);

    let records = acc.into_records();
    let worst = records
        .iter()
        .map(|r| r.margin / r.rhs.abs().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    let energy = if records.is_empty() {
        CheckResult::at_most(ENERGY, f64::INFINITY, 0.05, "no energy records")
    } else {
        let mut c = CheckResult::at_most(
            ENERGY,
            (-worst).max(0.0),
            0.05,
            format!(
                "min margin/|rhs| = {worst:.3e} over {} sampled times with ψ = φ_5",
                records.len()
            ),
        );
        c.passed &= out.aborted.is_none();
        c
    };
    let entry = EnergyEntry {
        center: at.center,
        t0: at.t0,
        level: 5,
        worst_ratio: worst,
        records,
    };
    (conservation, energy, Some(entry))
}

fn taylor_green_velocity(grid: Grid) -> VectorField {
    VectorField::from_fn(grid, 0.0, |x| {
        [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
    })
}

/// Analytic Taylor–Green pressure, the harmonic residual under grid
/// doubling and the exactness of `p1 + p2 = p`.
pub fn pressure_oracles() -> CheckResult {
    guarded(PRESSURE, || {
        let grid = Grid::cubic(32, 2.0 * PI)?;
        let u = taylor_green_velocity(grid);
        let zero = ScalarField::zeros(grid, 0.0);
        let p = solve_pressure_global(&u, &zero, &GradPhi::default())?;
        let exact = ScalarField::from_fn(grid, 0.0, |x| {
            0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
        });
        let tg_err = p
            .values
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / exact.max_abs();

        let (center, rho) = ([PI; 3], 2.8);
        let mut residuals = Vec::new();
        let mut gap = 0.0_f64;
        for n in [64, 128] {
            let grid = Grid::cubic(n, 2.0 * PI)?;
            let u = taylor_green_velocity(grid);
            let dens = ScalarField::from_fn(grid, 0.0, |x| 1.0 + 0.3 * (x[0] + x[2]).sin());
            let g = GradPhi::Constant([0.0, 0.0, 1.0]);
            let p = solve_pressure_global(&u, &dens, &g)?;
            let d = decompose_local(&p, &u, &dens, &g, center, rho)?;
            let scale = 1.0 + p.max_abs();
            for ((a, b), c) in d.p1.values.iter().zip(&d.p2.values).zip(&p.values) {
                gap = gap.max((a + b - c).abs() / scale);
            }
            residuals.push(d.harmonic_residual);
        }
        let reduction = residuals[0] / residuals[1];
        Ok(worst_ratio(
            PRESSURE,
            &[
                (
                    format!("Taylor–Green relative error {tg_err:.2e} (≤ 1e-8)"),
                    tg_err / 1e-8,
                ),
                (
                    format!(
                        "sup|Δp2| on B_ρ/2: {:.2e} → {:.2e}, reduction {reduction:.1}× (≥ 2×)",
                        residuals[0], residuals[1]
                    ),
                    2.0 / reduction,
                ),
                (format!("|p1 + p2 − p| = {gap:.2e} (≤ 1e-12)"), gap / 1e-12),
            ],
        ))
    })
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `B_r(x) × (t − r², t + r²)` of two cylinders intersect.
fn meet(a: &ParabolicCylinder, b: &ParabolicCylinder) -> bool {
    dist(a.center, b.center) < a.radius + b.radius
        && (a.t0 - b.t0).abs() < a.radius.powi(2) + b.radius.powi(2)
}

fn inside_five_fold(big: &ParabolicCylinder, small: &ParabolicCylinder) -> bool {
    let r = 5.0 * big.radius;
    dist(big.center, small.center) + small.radius <= r * (1.0 + 1e-12)
        && (big.t0 - small.t0).abs() + small.radius.powi(2) <= r * r * (1.0 + 1e-12)
}

/// Exhaustive check of a chosen subfamily: pairwise disjoint, every member
/// of the family inside a 5-enlargement, and no rejected member disjoint
/// from every chosen one of at least its radius.
pub fn vitali_oracle(
    family: &[ParabolicCylinder],
    chosen: &[ParabolicCylinder],
) -> std::result::Result<(), String> {
    for (i, a) in chosen.iter().enumerate() {
        if !family.contains(a) {
            return Err(format!("{a:?} is not in the family"));
        }
        for b in &chosen[i + 1..] {
            if meet(a, b) {
                return Err(format!("{a:?} meets {b:?}"));
            }
        }
    }
    for q in family {
        if !chosen.iter().any(|c| inside_five_fold(c, q)) {
            return Err(format!("{q:?} lies in no 5-enlargement"));
        }
        if !chosen.contains(q) && !chosen.iter().any(|c| c.radius >= q.radius && meet(c, q)) {
            return Err(format!("{q:?} was skipped without a larger blocker"));
        }
    }
    Ok(())
}

fn random_family(rng: &mut ChaCha8Rng) -> Vec<ParabolicCylinder> {
    let len = rng.random_range(1..=8);
    (0..len)
        .map(|_| {
            let c = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            ParabolicCylinder::new(c, rng.random_range(-0.5..0.5), rng.random_range(0.02..0.6))
                .expect("positive radius")
        })
        .collect()
}

/// 100 seeded families of at most 8 cylinders through the oracle, and the
/// `λ^{5/3}` scaling of the premeasure.
pub fn vitali_check(seed: u64) -> CheckResult {
    guarded(VITALI, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        let mut worst_scaling = 0.0_f64;
        for i in 0..100 {
            let family = random_family(&mut rng);
            let est = vitali_cover(&family);
            if let Err(e) = vitali_oracle(&family, &est.chosen) {
                failures.push(format!("instance {i}: {e}"));
            }
            for lambda in [0.5, 2.0, 3.0] {
                let scaled: Vec<ParabolicCylinder> = family
                    .iter()
                    .map(|q| {
                        ParabolicCylinder::new(
                            q.center.map(|v| lambda * v),
                            lambda * lambda * q.t0,
                            lambda * q.radius,
                        )
                    })
                    .collect::<Result<_>>()?;
                let b = vitali_cover(&scaled).premeasure;
                worst_scaling =
                    worst_scaling.max(rel_diff(b, lambda.powf(5.0 / 3.0) * est.premeasure));
            }
        }
        let oracle = failures.len() as f64;
        let mut detail = format!("{} of 100 instances fail the oracle; premeasure scaling error {worst_scaling:.2e} (≤ 1e-12)", failures.len());
        if let Some(f) = failures.first() {
            detail.push_str(&format!("; first: {f}"));
        }
        Ok(worst_ratio(
            VITALI,
            &[(detail, (oracle * 1e12).max(worst_scaling / 1e-12))],
        ))
    })
}

/// Trigonometric fields with random amplitudes and a random shift.
#[derive(Debug, Clone, Copy)]
pub struct RandomField {
    pub shift: [f64; 3],
    pub amp_n: f64,
    pub amp_c: f64,
    pub amp_u: f64,
}

impl RandomField {
    pub fn sample(rng: &mut ChaCha8Rng) -> Self {
        Self {
            shift: [
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
            ],
            amp_n: rng.random_range(0.1..10.0),
            amp_c: rng.random_range(0.1..10.0),
            amp_u: rng.random_range(0.1..10.0),
        }
    }
}

impl ClosedForm for RandomField {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        let s = TrigGenerator.eval(
            [
                x[0] + self.shift[0],
                x[1] + self.shift[1],
                x[2] + self.shift[2],
            ],
            t,
        );
        let (a, g, b) = (self.amp_n, self.amp_c, self.amp_u);
        PointState {
            n: a * s.n,
            grad_n: s.grad_n.map(|v| a * v),
            c: g * s.c,
            grad_c: s.grad_c.map(|v| g * v),
            hess_c: s.hess_c.map(|row| row.map(|v| g * v)),
            u: s.u.map(|v| b * v),
            grad_u: s.grad_u.map(|row| row.map(|v| b * v)),
            p: b * b * s.p,
            gradphi: s.gradphi,
        }
    }
}

fn classify(
    source: &dyn CylinderSource,
    criterion: Criterion,
    k: &Constants,
    eps: &Thresholds,
) -> Result<RegularityVerdict> {
    match criterion {
        Criterion::Thm15 => classify_thm15(source, [0.0; 3], 0.0, k, eps),
        Criterion::Thm16I | Criterion::Thm16Ii => {
            classify_thm16(source, [0.0; 3], 0.0, criterion, k, eps)
        }
        Criterion::Thm19 => classify_thm19(source, [0.0; 3], 0.0, k, eps, 1..=5),
    }
}

/// The zero solution is regular for tiny thresholds under every criterion,
/// and raising the thresholds never turns a regular verdict irregular.
pub fn classifier_soundness(seed: u64) -> CheckResult {
    guarded(CLASSIFIER, || {
        let k = Constants::from_sups(0.0, 0.0, 1.0)?;
        let zero = ClosedFormSource::new(|_: [f64; 3], _: f64| PointState::default(), 8, 16);
        let mut not_regular = Vec::new();
        for eps in [1e-300, 1e-12, 1.0] {
            let th = Thresholds {
                eps1: eps,
                eps3: eps,
                c: 1.0,
            };
            for criterion in Criterion::ALL {
                if !classify(&zero, criterion, &k, &th)?.is_regular() {
                    not_regular.push(format!("{} at ε = {eps:e}", criterion.name()));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ladder = [1e-6, 1e-2, 1e2, 1e6, 1e10, 1e20, 1e40];
        let mut violations = Vec::new();
        let mut flips = 0;
        for i in 0..20 {
            let field = RandomField::sample(&mut rng);
            let src = ClosedFormSource::new(field, 8, 16);
            for criterion in Criterion::ALL {
                let mut was_regular = false;
                for eps in ladder {
                    let th = Thresholds {
                        eps1: eps,
                        eps3: eps,
                        c: 1.0,
                    };
                    let regular = classify(&src, criterion, &k, &th)?.is_regular();
                    if was_regular && !regular {
                        violations
                            .push(format!("instance {i} {} at ε = {eps:e}", criterion.name()));
                    }
                    flips += usize::from(!was_regular && regular);
                    was_regular = regular;
                }
            }
        }
        let mut detail = format!(
            "zero solution: {} irregular verdicts of 12; monotonicity: {} violations over 20 fields × 4 criteria ({flips} transitions to regular)",
            not_regular.len(),
            violations.len()
        );
        for v in not_regular.iter().chain(&violations).take(3) {
            detail.push_str(&format!("; {v}"));
        }
        let bad = (not_regular.len() + violations.len()) as f64;
        Ok(CheckResult::at_most(CLASSIFIER, bad, 0.0, detail))
    })
}

/// The induction quantity of a constant velocity is the same at every
/// dyadic scale `k = 1..=5`.
pub fn dyadic_sweep_check() -> CheckResult {
    guarded(SWEEP, || {
        let src = ClosedFormSource::new(
            |_: [f64; 3], _: f64| PointState {
                u: [0.6, 0.0, 0.8],
                ..Default::default()
            },
            8,
            16,
        );
        let table = dyadic_sweep(&src, [0.0; 3], 0.0, 5)?;
        let values: Vec<f64> = table.rows.iter().map(|r| r.value).collect();
        if values.len() < 5 {
            return Ok(CheckResult::at_most(
                SWEEP,
                f64::INFINITY,
                0.03,
                "sweep truncated before k = 5",
            ));
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let variation = (max - min) / max;
        Ok(CheckResult::at_most(
            SWEEP,
            variation,
            0.03,
            format!("values {values:.4?}, (max − min)/max over k = 1..5"),
        ))
    })
}

/// Every check in order.
pub fn run_all(opts: VerifyOptions) -> Verification {
    let seed = 20;
    let mut checks = vec![
        scaling_invariance(),
        caloric_test_function(),
        entropy_maxima(),
    ];
    let (conservation, energy, entry) = smooth_run_checks(if opts.fast { 32 } else { 64 });
    checks.push(conservation);
    checks.push(energy);
    checks.push(pressure_oracles());
    checks.push(vitali_check(seed));
    checks.push(classifier_soundness(seed));
    checks.push(dyadic_sweep_check());
    Verification {
        checks,
        energy: entry,
    }
}
