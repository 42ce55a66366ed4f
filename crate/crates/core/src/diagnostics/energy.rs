//! The local energy inequality
//!
//! ```text
//! ∫n ln n ψ(t) + 2∫∫|∇√n|²ψ + 2∫|∇√c̃|²ψ(t) + 4/7∫∫|∇²√c̃|²ψ
//!   + 2∫∫|∇√c̃|² n ψ + 1/4∫∫c̃⁻¹|∇√c̃|⁴ψ + 112K∫|u|²ψ(t) + 112K∫∫|∇u|²ψ
//! ≤ I1 + … + I11
//! ```
//!
//! with `K = ‖c̃(·,−1)‖∞`, integrals over `B_1 × (−1, t)`, and
//!
//! ```text
//! I1 = ∫∫n ln n (∂t+Δ)ψ        I2 = ∫∫n ln n u·∇ψ          I3 = ∫∫n ln n ∇c·∇ψ
//! I4 = ∫∫n ∇c·∇ψ               I5 = 2∫∫|∇√c̃|²(∂t+Δ)ψ      I6 = 2∫∫|∇√c̃|² u·∇ψ
//! I7 = −4/7∫∫|∇√c̃|²∇√c̃·∇ψ/√c̃
//! I8 = 112K∫∫|u|²(∂t+Δ)ψ        I9 = 112K∫∫|u|² u·∇ψ
//! I10 = 112K∫∫(p − p̄) u·∇ψ     I11 = −224K∫∫n∇φ·u ψ
//! ```
//!
//! Besides the inequality, the residuals of the exact identities behind it
//! are reported: the `n ln n` identity `T1 + … + T4 = 0`, the `√c̃` identity
//! `J1 + … + J6 = 0`, the localized mass balance `∫nψ(t) = K1 + K2 + K3`
//! and the localized kinetic energy balance. On a solution they vanish up
//! to discretization error.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::constants::Constants;
use crate::diagnostics::test_function::{check_support, TestFunction, TestValue};
use crate::error::{Error, Result};
use crate::grid::{GradPhi, State};
use crate::sampling::{
    dot, norm_sq, sample_state, time_tol, CylinderSource, PointState, SamplePoint, Sampling, Slice,
};
use crate::solver::{StepInfo, StepObserver};

/// Where the test function sits: `ψ` is evaluated at `(x − center, t − t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub center: [f64; 3],
    pub t0: f64,
}

/// Residual of an exact identity, with the sum of the absolute values of
/// its expanded integrals as a scale.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Balance {
    pub residual: f64,
    pub scale: f64,
}

impl Balance {
    fn of(parts: &[f64]) -> Self {
        Self {
            residual: parts.iter().sum(),
            scale: parts.iter().map(|v| v.abs()).sum(),
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual.abs() / self.scale
        } else {
            self.residual.abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResidual {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
    /// `112K`
    pub velocity_weight: f64,
    /// `L1..L8`, `I1..I11`, `T1..T4`, `J1..J6`, `K1..K3`.
    pub terms: BTreeMap<String, f64>,
    pub n_identity: Balance,
    pub c_identity: Balance,
    pub mass_identity: Balance,
    pub velocity_identity: Balance,
}

impl EnergyResidual {
    /// `margin ≥ −tol·|rhs|`.
    pub fn holds(&self, tol_rel: f64) -> bool {
        self.margin >= -tol_rel * self.rhs.abs()
    }
}

// Raw space-time densities, before the coefficients are applied.
const GSN_PSI: usize = 0; // |∇√n|²ψ
const HESS2_PSI: usize = 1; // |∇²√c̃|²ψ
const A2_N_PSI: usize = 2; // |a|² n ψ, a = ∇√c̃
const A4_PSI: usize = 3; // c̃⁻¹|a|⁴ψ
const GU2_PSI: usize = 4; // |∇u|²ψ
const NLNN_HEAT: usize = 5;
const NLNN_U_GPSI: usize = 6;
const NLNN_GC_GPSI: usize = 7;
const N_GC_GPSI: usize = 8;
const A2_HEAT: usize = 9;
const A2_U_GPSI: usize = 10;
const A3_GPSI: usize = 11; // |a|² a·∇ψ / √c̃
const U2_HEAT: usize = 12;
const U2_U_GPSI: usize = 13;
const P_U_GPSI: usize = 14; // (p − p̄) u·∇ψ
const NPHI_U_PSI: usize = 15; // n ∇φ·u ψ
const NLNN_DT: usize = 16;
const NLNN_LAP: usize = 17;
const GC_GN_PSI: usize = 18;
const A2_DT: usize = 19;
const A_GU_A_PSI: usize = 20; // ∇u:(a⊗a) ψ
const A2_LAPS_PSI: usize = 21; // |a|² Δ√c̃ ψ / √c̃
const A2_LAP: usize = 22;
const J6_PSI: usize = 23; // ∇(n/√c̃)·a ψ
const N_HEAT: usize = 24;
const N_U_GPSI: usize = 25;
const DENSITIES: usize = 26;

// Instantaneous integrals at the current time.
const NLNN_PSI: usize = 0;
const A2_PSI: usize = 1;
const U2_PSI: usize = 2;
const N_PSI: usize = 3;
const INSTANT: usize = 4;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

fn is_zero(w: &TestValue) -> bool {
    w.value == 0.0 && w.grad == [0.0; 3] && w.dt == 0.0 && w.lap == 0.0
}

/// Adds `scale ×` the pointwise densities at one point.
fn add_densities(
    dens: &mut [f64; DENSITIES],
    s: &PointState,
    w: &TestValue,
    p_mean: f64,
    scale: f64,
) {
    let (v, g, heat) = (w.value, w.grad, w.heat());
    let ct = s.c_tilde();
    let sct = ct.sqrt();
    let nlnn = s.n_ln_n();
    let a = s.grad_sqrt_ct();
    let a2 = norm_sq(a);
    let hess = s.hess_sqrt_ct();
    let lap_sct = hess[0][0] + hess[1][1] + hess[2][2];
    let hess2: f64 = hess.iter().flatten().map(|x| x * x).sum();
    let u_g = dot(s.u, g);
    let gc_g = dot(s.grad_c, g);
    let u2 = s.u_sq();
    let mut a_gu_a = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            a_gu_a += s.grad_u[j][i] * a[i] * a[j];
        }
    }
    let grad_n_over = [0, 1, 2].map(|i| s.grad_n[i] / sct - s.n * a[i] / ct);

    let mut d = [0.0; DENSITIES];
    d[GSN_PSI] = s.grad_sqrt_n_sq() * v;
    d[HESS2_PSI] = hess2 * v;
    d[A2_N_PSI] = a2 * s.n * v;
    d[A4_PSI] = a2 * a2 / ct * v;
    d[GU2_PSI] = s.grad_u_sq() * v;
    d[NLNN_HEAT] = nlnn * heat;
    d[NLNN_U_GPSI] = nlnn * u_g;
    d[NLNN_GC_GPSI] = nlnn * gc_g;
    d[N_GC_GPSI] = s.n * gc_g;
    d[A2_HEAT] = a2 * heat;
    d[A2_U_GPSI] = a2 * u_g;
    d[A3_GPSI] = a2 * dot(a, g) / sct;
    d[U2_HEAT] = u2 * heat;
    d[U2_U_GPSI] = u2 * u_g;
    d[P_U_GPSI] = (s.p - p_mean) * u_g;
    d[NPHI_U_PSI] = s.n * dot(s.gradphi, s.u) * v;
    d[NLNN_DT] = nlnn * w.dt;
    d[NLNN_LAP] = nlnn * w.lap;
    d[GC_GN_PSI] = dot(s.grad_c, s.grad_n) * v;
    d[A2_DT] = a2 * w.dt;
    d[A_GU_A_PSI] = a_gu_a * v;
    d[A2_LAPS_PSI] = a2 * lap_sct / sct * v;
    d[A2_LAP] = a2 * w.lap;
    d[J6_PSI] = dot(grad_n_over, a) * v;
    d[N_HEAT] = s.n * heat;
    d[N_U_GPSI] = s.n * u_g;
    for (acc, x) in dens.iter_mut().zip(d) {
        *acc += scale * x;
    }
}

fn lerp_point(a: &PointState, b: &PointState, s: f64) -> PointState {
    let l = |x: f64, y: f64| x + s * (y - x);
    let l3 = |x: [f64; 3], y: [f64; 3]| [0, 1, 2].map(|i| l(x[i], y[i]));
    let l33 = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| [0, 1, 2].map(|i| l3(x[i], y[i]));
    PointState {
        n: l(a.n, b.n),
        grad_n: l3(a.grad_n, b.grad_n),
        c: l(a.c, b.c),
        grad_c: l3(a.grad_c, b.grad_c),
        hess_c: l33(a.hess_c, b.hess_c),
        u: l3(a.u, b.u),
        grad_u: l33(a.grad_u, b.grad_u),
        p: l(a.p, b.p),
        gradphi: l3(a.gradphi, b.gradphi),
    }
}

fn check_aligned(a: &Slice, b: &Slice) -> Result<()> {
    if a.points.len() != b.points.len() || a.weight != b.weight || !(b.t > a.t) {
        return Err(Error::InvalidArgument(format!(
            "ball samples at t = {} and t = {} do not share one lattice",
            a.t, b.t
        )));
    }
    Ok(())
}

/// `∫_lo^hi` of every density between two ball samples. The fields are
/// interpolated linearly in time while `ψ` is evaluated exactly at Gauss
/// nodes, so the fast time variation of the kernel is resolved even when
/// the snapshot spacing is not small against it.
fn interval_densities(
    a: &Slice,
    b: &Slice,
    lo: f64,
    hi: f64,
    psi: &dyn TestFunction,
    t0: f64,
) -> Result<[f64; DENSITIES]> {
    check_aligned(a, b)?;
    let mut dens = [0.0; DENSITIES];
    if hi <= lo {
        return Ok(dens);
    }
    let (pa, pb) = (a.mean_pressure(), b.mean_pressure());
    let mut pieces = Vec::new();
    subdivide(psi, t0, lo, hi, 0, &mut pieces);
    for (plo, phi) in pieces {
        for (xi, wi) in GAUSS {
            let t = plo + (phi - plo) * xi;
            let s = (t - a.t) / (b.t - a.t);
            let p_mean = pa + s * (pb - pa);
            let scale = wi * (phi - plo) * a.weight;
            for (qa, qb) in a.points.iter().zip(&b.points) {
                let w = psi.eval(qa.offset, t - t0);
                if is_zero(&w) {
                    continue;
                }
                add_densities(
                    &mut dens,
                    &lerp_point(&qa.state, &qb.state, s),
                    &w,
                    p_mean,
                    scale,
                );
            }
        }
    }
    Ok(dens)
}

/// `ψ² + (∂tψ)² + (Δψ)²` summed over a few points along a radius; a cheap
/// smooth stand-in for the time dependence of every density.
fn probe(psi: &dyn TestFunction, tau: f64) -> f64 {
    let r = psi.support_radius();
    [0.0, 0.25, 0.5, 0.75]
        .iter()
        .map(|f| {
            let w = psi.eval([f * r, 0.0, 0.0], tau);
            w.value * w.value + w.dt * w.dt + w.lap * w.lap
        })
        .sum()
}

fn gauss_probe(psi: &dyn TestFunction, t0: f64, lo: f64, hi: f64) -> f64 {
    GAUSS
        .iter()
        .map(|(x, w)| w * probe(psi, lo + (hi - lo) * x - t0))
        .sum::<f64>()
        * (hi - lo)
}

/// Bisects `[lo, hi]` until a Gauss rule integrates the probe to relative
/// accuracy 1e-6. Near the support start the time cutoff grows like
/// `e^{−1/s}`, which one Gauss rule per snapshot interval cannot follow.
fn subdivide(
    psi: &dyn TestFunction,
    t0: f64,
    lo: f64,
    hi: f64,
    depth: u32,
    out: &mut Vec<(f64, f64)>,
) {
    let mid = 0.5 * (lo + hi);
    let whole = gauss_probe(psi, t0, lo, hi);
    let halves = gauss_probe(psi, t0, lo, mid) + gauss_probe(psi, t0, mid, hi);
    if depth >= 16 || (whole - halves).abs() <= 1e-6 * halves.abs() {
        out.push((lo, hi));
    } else {
        subdivide(psi, t0, lo, mid, depth + 1, out);
        subdivide(psi, t0, mid, hi, depth + 1, out);
    }
}

/// Instantaneous integrals on one ball sample at its own time.
fn instant_terms(slice: &Slice, psi: &dyn TestFunction, t0: f64) -> [f64; INSTANT] {
    let mut inst = [0.0; INSTANT];
    for pt in &slice.points {
        let v = psi.eval(pt.offset, slice.t - t0).value;
        if v == 0.0 {
            continue;
        }
        let s = &pt.state;
        inst[NLNN_PSI] += s.n_ln_n() * v;
        inst[A2_PSI] += norm_sq(s.grad_sqrt_ct()) * v;
        inst[U2_PSI] += s.u_sq() * v;
        inst[N_PSI] += s.n * v;
    }
    inst.map(|x| x * slice.weight)
}

fn lerp_slice(a: &Slice, b: &Slice, t: f64) -> Slice {
    let s = (t - a.t) / (b.t - a.t);
    Slice {
        t,
        weight: a.weight,
        points: a
            .points
            .iter()
            .zip(&b.points)
            .map(|(qa, qb)| SamplePoint {
                offset: qa.offset,
                state: lerp_point(&qa.state, &qb.state, s),
            })
            .collect(),
    }
}

/// Builds the report from time-integrated densities and the instantaneous
/// integrals at `t`.
fn assemble(t: f64, d: &[f64; DENSITIES], s: &[f64; INSTANT], k: f64) -> EnergyResidual {
    let w = 112.0 * k;
    let lhs_terms = [
        s[NLNN_PSI],
        2.0 * d[GSN_PSI],
        2.0 * s[A2_PSI],
        4.0 / 7.0 * d[HESS2_PSI],
        2.0 * d[A2_N_PSI],
        0.25 * d[A4_PSI],
        w * s[U2_PSI],
        w * d[GU2_PSI],
    ];
    let rhs_terms = [
        d[NLNN_HEAT],
        d[NLNN_U_GPSI],
        d[NLNN_GC_GPSI],
        d[N_GC_GPSI],
        2.0 * d[A2_HEAT],
        2.0 * d[A2_U_GPSI],
        -4.0 / 7.0 * d[A3_GPSI],
        w * d[U2_HEAT],
        w * d[U2_U_GPSI],
        w * d[P_U_GPSI],
        -2.0 * w * d[NPHI_U_PSI],
    ];
    let t_terms = [
        s[NLNN_PSI] - d[NLNN_DT],
        -d[NLNN_U_GPSI],
        4.0 * d[GSN_PSI] - d[NLNN_LAP],
        -d[GC_GN_PSI] - d[N_GC_GPSI] - d[NLNN_GC_GPSI],
    ];
    let j_terms = [
        0.5 * s[A2_PSI] - 0.5 * d[A2_DT],
        d[A_GU_A_PSI] - 0.5 * d[A2_U_GPSI],
        d[A2_LAPS_PSI] + d[A3_GPSI],
        d[HESS2_PSI] - 0.5 * d[A2_LAP],
        0.5 * d[A2_N_PSI] + 0.25 * d[GC_GN_PSI],
        -0.5 * d[J6_PSI],
    ];
    let k_terms = [d[N_HEAT], d[N_U_GPSI], d[N_GC_GPSI]];

    let mut terms = BTreeMap::new();
    let mut put = |prefix: &str, vals: &[f64]| {
        for (i, v) in vals.iter().enumerate() {
            terms.insert(format!("{prefix}{}", i + 1), *v);
        }
    };
    put("L", &lhs_terms);
    put("I", &rhs_terms);
    put("T", &t_terms);
    put("J", &j_terms);
    put("K", &k_terms);

    let lhs: f64 = lhs_terms.iter().sum();
    let rhs: f64 = rhs_terms.iter().sum();
    EnergyResidual {
        t,
        lhs,
        rhs,
        margin: rhs - lhs,
        velocity_weight: w,
        terms,
        n_identity: Balance::of(&[
            s[NLNN_PSI],
            -d[NLNN_DT],
            -d[NLNN_U_GPSI],
            4.0 * d[GSN_PSI],
            -d[NLNN_LAP],
            -d[GC_GN_PSI],
            -d[N_GC_GPSI],
            -d[NLNN_GC_GPSI],
        ]),
        c_identity: Balance::of(&[
            0.5 * s[A2_PSI],
            -0.5 * d[A2_DT],
            d[A_GU_A_PSI],
            -0.5 * d[A2_U_GPSI],
            d[A2_LAPS_PSI],
            d[A3_GPSI],
            d[HESS2_PSI],
            -0.5 * d[A2_LAP],
            0.5 * d[A2_N_PSI],
            0.25 * d[GC_GN_PSI],
            -0.5 * d[J6_PSI],
        ]),
        mass_identity: Balance::of(&[s[N_PSI], -k_terms[0], -k_terms[1], -k_terms[2]]),
        velocity_identity: Balance::of(&[
            s[U2_PSI],
            2.0 * d[GU2_PSI],
            -d[U2_HEAT],
            -d[U2_U_GPSI],
            -2.0 * d[P_U_GPSI],
            2.0 * d[NPHI_U_PSI],
        ]),
    }
}

fn check_placement(
    psi: &dyn TestFunction,
    at: &Placement,
    t: f64,
    box_length: Option<f64>,
) -> Result<()> {
    check_support(psi, t - at.t0)?;
    let r = psi.support_radius();
    if let Some(l) = box_length {
        if r >= 0.5 * l {
            return Err(Error::CylinderExceedsBox {
                radius: r,
                half_box: 0.5 * l,
            });
        }
    }
    Ok(())
}

/// Evaluates every group of the inequality at time `t` from a stored
/// source. `ψ` must vanish on the parabolic boundary of `B_1 × (−1, t)`.
pub fn local_energy_residual(
    source: &dyn CylinderSource,
    psi: &dyn TestFunction,
    at: Placement,
    t: f64,
    k: &Constants,
) -> Result<EnergyResidual> {
    check_placement(psi, &at, t, source.box_length())?;
    let t_lo = at.t0 + psi.support_start();
    let weight = k.energy_weight();
    if t <= t_lo {
        return Ok(assemble(t, &[0.0; DENSITIES], &[0.0; INSTANT], weight));
    }
    let radius = psi.support_radius();
    let nodes = source.time_nodes(t_lo, t)?;
    let tol = time_tol(t_lo, t);
    let mut dens = [0.0; DENSITIES];
    let mut inst = None;
    let mut prev: Option<Slice> = None;
    for node in &nodes {
        let cur = source.sample_ball(node, at.center, radius)?;
        if let Some(a) = &prev {
            let part = interval_densities(a, &cur, a.t.max(t_lo), cur.t.min(t), psi, at.t0)?;
            for (d, x) in dens.iter_mut().zip(part) {
                *d += x;
            }
            if a.t < t - tol && cur.t > t + tol {
                inst = Some(instant_terms(&lerp_slice(a, &cur, t), psi, at.t0));
            }
        }
        if (cur.t - t).abs() <= tol {
            inst = Some(instant_terms(&cur, psi, at.t0));
        }
        prev = Some(cur);
    }
    let inst =
        inst.ok_or_else(|| Error::InvalidArgument(format!("no ball sample brackets t = {t}")))?;
    Ok(assemble(t, &dens, &inst, weight))
}

/// Streams solver states into the inequality, reporting a residual at
/// every observed time past the support start of `ψ`.
pub struct EnergyAccumulator<'a> {
    psi: &'a dyn TestFunction,
    at: Placement,
    weight: f64,
    gradphi: GradPhi,
    sampling: Sampling,
    t_lo: f64,
    /// Last state seen before the support start, sampled only if needed.
    pending: Option<State>,
    prev: Option<Slice>,
    last_t: Option<f64>,
    integrals: [f64; DENSITIES],
    records: Vec<EnergyResidual>,
}

impl<'a> EnergyAccumulator<'a> {
    /// `t_end` is the last time that will be observed; the support check
    /// runs against it once up front.
    pub fn new(
        psi: &'a dyn TestFunction,
        at: Placement,
        t_end: f64,
        k: &Constants,
        gradphi: GradPhi,
        sampling: Sampling,
        box_length: f64,
    ) -> Result<Self> {
        check_placement(psi, &at, t_end, Some(box_length))?;
        Ok(Self {
            psi,
            at,
            weight: k.energy_weight(),
            gradphi,
            sampling,
            t_lo: at.t0 + psi.support_start(),
            pending: None,
            prev: None,
            last_t: None,
            integrals: [0.0; DENSITIES],
            records: Vec::new(),
        })
    }

    fn sample(&self, state: &State) -> Result<Slice> {
        sample_state(
            state,
            &self.gradphi,
            self.at.center,
            self.psi.support_radius(),
            self.sampling,
        )
    }

    pub fn push(&mut self, state: &State) -> Result<()> {
        let t = state.n.time;
        if let Some(last) = self.last_t {
            if t <= last {
                return Err(Error::InvalidArgument(format!(
                    "states must arrive in increasing time order ({t} after {last})"
                )));
            }
        }
        self.last_t = Some(t);
        if t <= self.t_lo {
            self.pending = Some(state.clone());
            return Ok(());
        }
        let cur = self.sample(state)?;
        let prev = match self.prev.take() {
            Some(p) => Some(p),
            None => self.pending.take().map(|s| self.sample(&s)).transpose()?,
        };
        if let Some(a) = &prev {
            let part = interval_densities(a, &cur, a.t.max(self.t_lo), t, self.psi, self.at.t0)?;
            for (d, x) in self.integrals.iter_mut().zip(part) {
                *d += x;
            }
        }
        let inst = instant_terms(&cur, self.psi, self.at.t0);
        self.records
            .push(assemble(t, &self.integrals, &inst, self.weight));
        self.prev = Some(cur);
        Ok(())
    }

    pub fn records(&self) -> &[EnergyResidual] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EnergyResidual> {
        self.records
    }
}

impl StepObserver for EnergyAccumulator<'_> {
    fn observe(&mut self, state: &State, _: &StepInfo) -> Result<()> {
        self.push(state)
    }
}
