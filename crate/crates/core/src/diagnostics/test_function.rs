//! Test functions for the local energy inequality: the backward heat kernel
//! `Ψ_n`, the plateau cutoff `ξ`, their product `φ_n = Ψ_n ξ`, and a generic
//! space-time bump.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `r_k = 2^{-k}`.
#[inline]
pub fn dyadic_radius(k: i32) -> f64 {
    2f64.powi(-k)
}

/// Value and derivatives of a test function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TestValue {
    pub value: f64,
    pub grad: [f64; 3],
    pub dt: f64,
    pub lap: f64,
}

impl TestValue {
    /// `∂t ψ + Δψ`.
    #[inline]
    pub fn heat(&self) -> f64 {
        self.dt + self.lap
    }
}

/// A space-time test function centred at the origin.
pub trait TestFunction: Sync {
    fn eval(&self, x: [f64; 3], t: f64) -> TestValue;

    /// Radius outside which the function vanishes.
    fn support_radius(&self) -> f64;

    /// Time at or before which the function vanishes.
    fn support_start(&self) -> f64;
}

/// `e^{-1/s}` and its first two derivatives, flushed to zero near `s = 0`.
fn g_and_derivs(s: f64) -> (f64, f64, f64) {
    if s <= 1e-3 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / s).exp();
    let s2 = s * s;
    (g, g / s2, g * (1.0 / (s2 * s2) - 2.0 / (s2 * s)))
}

/// The C^∞ step `S(s) = g(s)/(g(s) + g(1−s))` with `S(0) = 0`, `S(1) = 1`,
/// returned with `S'` and `S''`.
pub fn smoothstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (f, f1, f2) = g_and_derivs(s);
    let (h, hm1, hm2) = g_and_derivs(1.0 - s);
    // derivatives of h(s) = g(1 − s)
    let (h1, h2) = (-hm1, hm2);
    let d = f + h;
    let d1 = f1 + h1;
    let num = f1 * h - f * h1;
    let num1 = f2 * h - f * h2;
    (
        f / d,
        num / (d * d),
        num1 / (d * d) - 2.0 * num * d1 / (d * d * d),
    )
}

/// `ξ(x,t) = η(|x|)·τ(t)`: equal to 1 on `Q_a` and 0 outside `Q_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub plateau: f64,
    pub support: f64,
}

impl Cutoff {
    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau > 0.0 && support > plateau) {
            return Err(Error::InvalidArgument(format!(
                "cutoff needs 0 < plateau ({plateau}) < support ({support})"
            )));
        }
        Ok(Self { plateau, support })
    }

    /// The paper's choice for `φ_n`: plateau `Q_{r_4}`, support `Q_{r_3}`.
    pub fn standard() -> Self {
        Self {
            plateau: dyadic_radius(4),
            support: dyadic_radius(3),
        }
    }

    pub fn eval(&self, x: [f64; 3], t: f64) -> TestValue {
        let (a, b) = (self.plateau, self.support);
        let rho = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        // space: η = 1 − S((ρ − a)/(b − a))
        let w = b - a;
        let (s, s1, s2) = smoothstep((rho - a) / w);
        let eta = 1.0 - s;
        let eta1 = -s1 / w;
        let eta2 = -s2 / (w * w);
        let (grad_eta, lap_eta) = if rho > 0.0 && eta1 != 0.0 {
            (x.map(|v| eta1 * v / rho), eta2 + 2.0 * eta1 / rho)
        } else {
            ([0.0; 3], eta2)
        };
        // time: τ = S((t + b²)/(b² − a²)); plateau for t ≥ −a²
        let wt = b * b - a * a;
        let (tau, tau1, _) = smoothstep((t + b * b) / wt);
        TestValue {
            value: eta * tau,
            grad: grad_eta.map(|v| v * tau),
            dt: eta * tau1 / wt,
            lap: lap_eta * tau,
        }
    }
}

/// `Ψ_n(x,t) = (r_n² − t)^{-3/2} exp(−|x|²/(4(r_n² − t)))`.
pub fn psi_n(x: [f64; 3], t: f64, level: i32) -> Result<TestValue> {
    let rn = dyadic_radius(level);
    let s = rn * rn - t;
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Ψ_{level} needs t < r_n² = {}",
            rn * rn
        )));
    }
    Ok(kernel(x, s))
}

fn kernel(x: [f64; 3], s: f64) -> TestValue {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let v = s.powf(-1.5) * (-r2 / (4.0 * s)).exp();
    let q = r2 / (4.0 * s * s) - 1.5 / s;
    TestValue {
        value: v,
        grad: x.map(|xi| -xi / (2.0 * s) * v),
        dt: -v * q,
        lap: v * q,
    }
}

/// `φ_n = Ψ_n ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiN {
    pub level: i32,
    pub cutoff: Cutoff,
}

impl PhiN {
    pub fn new(level: i32) -> Self {
        Self {
            level,
            cutoff: Cutoff::standard(),
        }
    }

    pub fn r_n(&self) -> f64 {
        dyadic_radius(self.level)
    }
}

/// Product rule, using `(∂t + Δ)Ψ = 0`: `(∂t+Δ)(Ψξ) = Ψ(∂t+Δ)ξ + 2∇Ψ·∇ξ`.
fn product(psi: TestValue, xi: TestValue) -> TestValue {
    let cross: f64 = (0..3).map(|a| psi.grad[a] * xi.grad[a]).sum();
    TestValue {
        value: psi.value * xi.value,
        grad: [0, 1, 2].map(|a| psi.value * xi.grad[a] + xi.value * psi.grad[a]),
        dt: psi.dt * xi.value + psi.value * xi.dt,
        lap: psi.lap * xi.value + 2.0 * cross + psi.value * xi.lap,
    }
}

impl TestFunction for PhiN {
    fn eval(&self, x: [f64; 3], t: f64) -> TestValue {
        let xi = self.cutoff.eval(x, t);
        if xi.value == 0.0 && xi.grad == [0.0; 3] && xi.dt == 0.0 && xi.lap == 0.0 {
            return TestValue::default();
        }
        let rn = self.r_n();
        product(kernel(x, rn * rn - t), xi)
    }

    fn support_radius(&self) -> f64 {
        self.cutoff.support
    }

    fn support_start(&self) -> f64 {
        -self.cutoff.support * self.cutoff.support
    }
}

/// A smooth bump equal to 1 on `Q_{R/2}` and vanishing outside `Q_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub cutoff: Cutoff,
}

impl Bump {
    pub fn new(radius: f64) -> Result<Self> {
        Ok(Self {
            cutoff: Cutoff::new(0.5 * radius, radius)?,
        })
    }
}

impl TestFunction for Bump {
    fn eval(&self, x: [f64; 3], t: f64) -> TestValue {
        self.cutoff.eval(x, t)
    }

    fn support_radius(&self) -> f64 {
        self.cutoff.support
    }

    fn support_start(&self) -> f64 {
        -self.cutoff.support * self.cutoff.support
    }
}

/// Any test function supported in `Q_{R}` with `R ≤ 1` vanishes on the
/// parabolic boundary of `Q_1^t = B_1 × (−1, t)`; this confirms it
/// numerically on the sphere `|x| = 1` and at `t = −1`.
pub fn check_support(psi: &dyn TestFunction, t: f64) -> Result<()> {
    let tol = 1e-12;
    let scale = psi.eval([0.0; 3], t.min(0.0)).value.abs().max(1.0);
    let dirs = fibonacci_sphere(200);
    let steps = 32;
    for j in 0..=steps {
        let tj = -1.0 + (t + 1.0) * j as f64 / steps as f64;
        for d in &dirs {
            let v = psi.eval(*d, tj).value.abs();
            if v > tol * scale {
                return Err(Error::SupportViolation(format!(
                    "|ψ| = {v:e} at |x| = 1, t = {tj}"
                )));
            }
        }
    }
    for k in 0..=20 {
        for d in &dirs {
            let x = d.map(|v| v * k as f64 / 20.0);
            let v = psi.eval(x, -1.0).value.abs();
            if v > tol * scale {
                return Err(Error::SupportViolation(format!(
                    "|ψ| = {v:e} at t = -1, x = {x:?}"
                )));
            }
        }
    }
    Ok(())
}

fn fibonacci_sphere(m: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [rho * th.cos(), rho * th.sin(), z]
        })
        .collect()
}

/// Outcome of the property checks for `φ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiProperties {
    pub level: i32,
    /// `min r_n³ φ_n` over sample points of `Q_{r_n}`.
    pub c1_empirical: f64,
    /// `max r_n³ φ_n` over sample points of `Q_{r_n}`.
    pub c2_empirical: f64,
    /// `2^{-3/2} e^{-1/4} · min ξ` on `Q_{r_n}`.
    pub c1_bound: f64,
    pub c2_bound: f64,
    pub bounds_hold: bool,
    /// Max finite-difference `|∂tΨ + ΔΨ|` at steps `(h, dt)` and `(h/2, dt/2)`.
    pub caloric_residual: f64,
    pub caloric_residual_half: f64,
    pub caloric_ratio: f64,
    /// Max analytic `|∂tφ + Δφ|` on `Q_{r_4}`.
    pub plateau_residual: f64,
}

/// Finite-difference `∂tΨ + ΔΨ` with central differences of step `(h, dt)`.
fn fd_heat(f: &impl Fn([f64; 3], f64) -> f64, x: [f64; 3], t: f64, h: f64, dt: f64) -> f64 {
    let f0 = f(x, t);
    let mut lap = 0.0;
    for a in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[a] += h;
        xm[a] -= h;
        lap += (f(xp, t) - 2.0 * f0 + f(xm, t)) / (h * h);
    }
    lap + (f(x, t + dt) - f(x, t - dt)) / (2.0 * dt)
}

/// Checks the bounds, the caloric identity and the plateau identity of
/// `φ_n` on sample points of `Q_{r_n}` (and `Q_{r_4}`).
pub fn phi_properties_check(level: i32) -> Result<PhiProperties> {
    if level < 2 {
        return Err(Error::InvalidArgument(format!(
            "level {level} must be at least 2"
        )));
    }
    let phi = PhiN::new(level);
    let rn = phi.r_n();
    let m = 6;
    let mut samples = Vec::new();
    for i in 0..=m {
        for j in 0..=m {
            for k in 0..=m {
                let x = [i, j, k].map(|v| rn * (-1.0 + 2.0 * v as f64 / m as f64) * 0.577);
                for l in 0..=m {
                    // t ∈ [−r_n², 0]
                    let t = -rn * rn * l as f64 / m as f64;
                    samples.push((x, t));
                }
            }
        }
    }
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0_f64;
    let mut xi_min = f64::INFINITY;
    for &(x, t) in &samples {
        let v = phi.eval(x, t).value * rn.powi(3);
        c1 = c1.min(v);
        c2 = c2.max(v);
        xi_min = xi_min.min(phi.cutoff.eval(x, t).value);
    }
    let c1_bound = 2f64.powf(-1.5) * (-0.25f64).exp() * xi_min;
    let c2_bound = 1.0;

    let psi = |x: [f64; 3], t: f64| kernel(x, rn * rn - t).value;
    let (h, dt) = (rn / 8.0, rn * rn / 16.0);
    let interior: Vec<_> = samples
        .iter()
        .filter(|(_, t)| *t <= -0.1 * rn * rn)
        .copied()
        .collect();
    let res = |h: f64, dt: f64| {
        interior
            .iter()
            .map(|&(x, t)| fd_heat(&psi, x, t, h, dt).abs())
            .fold(0.0, f64::max)
    };
    let r1 = res(h, dt);
    let r2 = res(h / 2.0, dt / 2.0);

    let r4 = dyadic_radius(4);
    let mut plateau = 0.0_f64;
    for &(x, t) in &samples {
        let xs = x.map(|v| v / rn * r4 * 0.999);
        let ts = t / (rn * rn) * r4 * r4 * 0.999;
        plateau = plateau.max(phi.eval(xs, ts).heat().abs());
    }
    Ok(PhiProperties {
        level,
        c1_empirical: c1,
        c2_empirical: c2,
        c1_bound,
        c2_bound,
        bounds_hold: c1 >= c1_bound && c2 <= c2_bound * (1.0 + 1e-12),
        caloric_residual: r1,
        caloric_residual_half: r2,
        caloric_ratio: r1 / r2,
        plateau_residual: plateau,
    })
}
