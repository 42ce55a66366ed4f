//! ε-regularity criteria as one-sided point classifiers, dyadic sweeps, and
//! the Vitali covering estimate of the parabolic Hausdorff premeasure.
//!
//! A criterion either proves a point regular or says nothing; no verdict is
//! ever "singular".

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::constants::Constants;
use crate::error::{Error, Result};
use crate::grid::ParabolicCylinder;
use crate::integrate::{cylinder_slices, Resolution};
use crate::sampling::{norm_sq, window_integral, window_sup, CylinderSource, PointState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Thm15,
    #[serde(rename = "thm16_i")]
    Thm16I,
    #[serde(rename = "thm16_ii")]
    Thm16Ii,
    Thm19,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Thm15,
        Criterion::Thm16I,
        Criterion::Thm16Ii,
        Criterion::Thm19,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Thm15 => "thm15",
            Self::Thm16I => "thm16_i",
            Self::Thm16Ii => "thm16_ii",
            Self::Thm19 => "thm19",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    /// Accepts the names with or without underscores (`thm16_i`, `thm16i`).
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('_', "") == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown criterion `{s}`, expected thm15, thm16i, thm16ii or thm19"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    NotConcluded,
}

/// Smallness constants of the criteria. The theory only asserts that they
/// exist, so they are configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub eps1: f64,
    pub eps3: f64,
    /// The unnamed constant in `ε2` and `ε2′`.
    pub c: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps1: 1e-3,
            eps3: 1e-3,
            c: 1.0,
        }
    }
}

impl Thresholds {
    /// `ε2 = ε1³ / (C (Λ0Λ1)^{15 + 12α0})`
    pub fn eps2(&self, k: &Constants) -> f64 {
        self.eps1.powi(3) / (self.c * (k.lambda0 * k.lambda1).powf(15.0 + 12.0 * k.alpha0))
    }

    /// `ε2′ = ε1^{15/4} / (C (Λ0Λ1)^{75/4 + 15α0})`
    pub fn eps2_prime(&self, k: &Constants) -> f64 {
        self.eps1.powf(3.75) / (self.c * (k.lambda0 * k.lambda1).powf(18.75 + 15.0 * k.alpha0))
    }

    pub fn threshold(&self, criterion: Criterion, k: &Constants) -> f64 {
        let lam = k.lambda0 * k.lambda1;
        match criterion {
            Criterion::Thm15 => self.eps1 / lam.powf(4.0 + 4.0 * k.alpha0),
            Criterion::Thm16I => self.eps2(k),
            Criterion::Thm16Ii => self.eps2_prime(k),
            Criterion::Thm19 => self.eps3 / lam.powf(4.0 + k.alpha0),
        }
    }
}

/// Criterion value at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusValue {
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub center: [f64; 3],
    pub t0: f64,
    pub criterion: Criterion,
    #[serde(with = "crate::report::nonfinite")]
    pub lhs_value: f64,
    #[serde(with = "crate::report::nonfinite")]
    pub threshold: f64,
    pub verdict: Verdict,
    pub radii_used: Vec<f64>,
    /// Every radius evaluated, including those not used for the verdict.
    pub values: Vec<RadiusValue>,
    /// The constant `C` behind `ε2`/`ε2′`, when it enters the threshold.
    pub constant_c: Option<f64>,
    pub flags: Vec<String>,
}

impl RegularityVerdict {
    pub fn is_regular(&self) -> bool {
        self.verdict == Verdict::Regular
    }
}

fn verdict_of(lhs: f64, threshold: f64) -> Verdict {
    if lhs <= threshold {
        Verdict::Regular
    } else {
        Verdict::NotConcluded
    }
}

/// `n + |n ln n| + |∇√c̃|² + |u|²`
fn energy_density(s: &PointState) -> f64 {
    s.n.abs() + s.n_ln_n().abs() + norm_sq(s.grad_sqrt_ct()) + s.u_sq()
}

/// `|∇√n|² + |∇u|² + |∇²√c̃|²`
fn dissipation_density(s: &PointState) -> f64 {
    s.grad_sqrt_n_sq() + s.grad_u_sq() + s.hess_sqrt_ct_sq()
}

fn thm16_i_density(s: &PointState) -> f64 {
    let n = s.n.max(0.0);
    let log = if n > 0.0 { n.ln().abs() } else { 0.0 };
    n.powf(1.5) * (log + 1.0).powf(1.5)
        + norm_sq(s.grad_sqrt_ct()).powf(1.5)
        + s.u_sq().powf(1.5)
        + s.p.abs().powf(1.5)
}

fn thm16_ii_density(s: &PointState) -> f64 {
    let e = 5.0 / 3.0;
    s.n.max(0.0).powf(e) + norm_sq(s.grad_sqrt_ct()).powf(e) + s.u_sq().powf(e) + s.p.abs().powf(e)
}

/// `sup_t ∫_B f` and `∫∫_Q g` for a list of point densities.
fn cylinder_parts<const S: usize, const I: usize>(
    source: &dyn CylinderSource,
    q: &ParabolicCylinder,
    sup: [fn(&PointState) -> f64; S],
    int: [fn(&PointState) -> f64; I],
) -> Result<([f64; S], [f64; I])> {
    let slices = cylinder_slices(source, q)?;
    let times: Vec<f64> = slices.iter().map(|s| s.t).collect();
    let (lo, hi) = (q.t_start(), q.t0);
    let column = |f: fn(&PointState) -> f64| -> Vec<f64> {
        slices
            .iter()
            .map(|s| s.integrate(|p| f(&p.state)))
            .collect()
    };
    Ok((
        sup.map(|f| window_sup(&times, &column(f), lo, hi).max(0.0)),
        int.map(|f| window_integral(&times, &column(f), lo, hi)),
    ))
}

/// Energy part `sup_t ∫_{B_r} (n + |n ln n| + |∇√c̃|² + |u|²)` and dissipation
/// part `∫∫_{Q_r} (|∇√n|² + |∇u|² + |∇²√c̃|²)`, unnormalized.
pub fn energy_parts(source: &dyn CylinderSource, q: &ParabolicCylinder) -> Result<(f64, f64)> {
    let ([e], [d]) = cylinder_parts(source, q, [energy_density], [dissipation_density])?;
    Ok((e, d))
}

/// Scale-normalized left-hand side of `criterion` on `q`. At `r = 1` these are
/// the quantities of the criteria verbatim; at smaller radii each term carries
/// the power of `r` that makes it scale-invariant.
pub fn criterion_lhs(
    source: &dyn CylinderSource,
    q: &ParabolicCylinder,
    criterion: Criterion,
) -> Result<f64> {
    let r = q.radius;
    fn p32(s: &PointState) -> f64 {
        s.p.abs().powf(1.5)
    }
    match criterion {
        Criterion::Thm15 => {
            let ([e], [d, p]) =
                cylinder_parts(source, q, [energy_density], [dissipation_density, p32])?;
            Ok((e + d) / r + p / (r * r))
        }
        Criterion::Thm16I => {
            let ([], [v]) = cylinder_parts(source, q, [], [thm16_i_density])?;
            Ok(v / (r * r))
        }
        Criterion::Thm16Ii => {
            let ([], [v]) = cylinder_parts(source, q, [], [thm16_ii_density])?;
            Ok(v / r.powf(5.0 / 3.0))
        }
        Criterion::Thm19 => {
            let (e, d) = energy_parts(source, q)?;
            Ok((e + d) / r)
        }
    }
}

/// Whether `q` fits the box and meets the resolution contract.
pub fn cylinder_resolved(source: &dyn CylinderSource, q: &ParabolicCylinder) -> bool {
    let res = Resolution::for_cylinder(source, q);
    res.resolved() && res.box_margin.is_none_or(|m| m > 0.0)
}

fn unit_verdict(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    criterion: Criterion,
    threshold: f64,
    constant_c: Option<f64>,
) -> Result<RegularityVerdict> {
    let q = ParabolicCylinder::new(center, t0, 1.0)?;
    let mut flags = Vec::new();
    if !cylinder_resolved(source, &q) {
        flags.push("unit cylinder under-resolved".to_string());
    }
    let lhs = criterion_lhs(source, &q, criterion)?;
    Ok(RegularityVerdict {
        center,
        t0,
        criterion,
        lhs_value: lhs,
        threshold,
        verdict: verdict_of(lhs, threshold),
        radii_used: vec![1.0],
        values: vec![RadiusValue { r: 1.0, value: lhs }],
        constant_c,
        flags,
    })
}

/// Energy-class criterion on the unit cylinder ending at `(center, t0)`.
pub fn classify_thm15(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    k: &Constants,
    eps: &Thresholds,
) -> Result<RegularityVerdict> {
    unit_verdict(
        source,
        center,
        t0,
        Criterion::Thm15,
        eps.threshold(Criterion::Thm15, k),
        None,
    )
}

/// Integrability criterion in its `L^{3/2}`-class (`Thm16I`) or
/// `L^{5/3}`-class (`Thm16Ii`) form on the unit cylinder.
pub fn classify_thm16(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    variant: Criterion,
    k: &Constants,
    eps: &Thresholds,
) -> Result<RegularityVerdict> {
    if !matches!(variant, Criterion::Thm16I | Criterion::Thm16Ii) {
        return Err(Error::InvalidArgument(format!(
            "{} is not a variant of thm16",
            variant.name()
        )));
    }
    unit_verdict(
        source,
        center,
        t0,
        variant,
        eps.threshold(variant, k),
        Some(eps.c),
    )
}

/// Pressure-free limsup criterion, with the limsup replaced by the max over
/// the three smallest resolved dyadic radii `2^{−k}`, `k ∈ k_range`.
pub fn classify_thm19(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    k: &Constants,
    eps: &Thresholds,
    k_range: RangeInclusive<i32>,
) -> Result<RegularityVerdict> {
    let threshold = eps.threshold(Criterion::Thm19, k);
    let mut values = Vec::new();
    for kk in k_range {
        let q = ParabolicCylinder::new(center, t0, 0.5_f64.powi(kk))?;
        if cylinder_resolved(source, &q) {
            values.push(RadiusValue {
                r: q.radius,
                value: criterion_lhs(source, &q, Criterion::Thm19)?,
            });
        }
    }
    values.sort_by(|a, b| a.r.total_cmp(&b.r));
    let mut flags = Vec::new();
    let (lhs, radii_used) = if values.len() < 3 {
        flags.push(format!("only {} resolved radii, need 3", values.len()));
        (f64::INFINITY, values.iter().map(|v| v.r).collect())
    } else {
        let used = &values[..3];
        (
            used.iter().map(|v| v.value).fold(0.0, f64::max),
            used.iter().map(|v| v.r).collect(),
        )
    };
    Ok(RegularityVerdict {
        center,
        t0,
        criterion: Criterion::Thm19,
        lhs_value: lhs,
        threshold,
        verdict: verdict_of(lhs, threshold),
        radii_used,
        values,
        constant_c: None,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: i32,
    pub r: f64,
    /// `r⁻³ sup_t ∫_{B_r} (n + |n ln n| + |∇√c̃|² + |u|²)`
    pub energy: f64,
    /// `r⁻³ ∫∫_{Q_r} (|∇√n|² + |∇²√c̃|² + |∇u|²)`
    pub dissipation: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub center: [f64; 3],
    pub t0: f64,
    pub rows: Vec<SweepRow>,
    /// Set when levels were dropped as under-resolved.
    pub truncated: bool,
}

/// The induction quantity on `r_k = 2^{−k}`, `k = 1..=levels`.
pub fn dyadic_sweep(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    levels: i32,
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    let mut truncated = false;
    for k in 1..=levels {
        let r = 0.5_f64.powi(k);
        let q = ParabolicCylinder::new(center, t0, r)?;
        if !cylinder_resolved(source, &q) {
            log::warn!("dyadic sweep truncated at k = {k}: r = {r} is under-resolved");
            truncated = true;
            break;
        }
        let (e, d) = energy_parts(source, &q)?;
        let scale = r.powi(-3);
        rows.push(SweepRow {
            k,
            r,
            energy: e * scale,
            dissipation: d * scale,
            value: (e + d) * scale,
        });
    }
    Ok(SweepTable {
        center,
        t0,
        rows,
        truncated,
    })
}

/// Cylinders at `centers` (all ending at `t0`) where `criterion` exceeds
/// `threshold` at every resolved radius `2^{−k}`, `k ∈ k_range`. Each flagged
/// cylinder carries the smallest resolved radius.
pub fn flag_singular_candidates(
    source: &dyn CylinderSource,
    centers: &[[f64; 3]],
    t0: f64,
    criterion: Criterion,
    threshold: f64,
    k_range: RangeInclusive<i32>,
) -> Result<Vec<ParabolicCylinder>> {
    if centers.is_empty() {
        return Err(Error::InvalidArgument("no centers to classify".into()));
    }
    let found: Vec<Option<ParabolicCylinder>> = centers
        .par_iter()
        .map(|&center| -> Result<Option<ParabolicCylinder>> {
            let mut smallest = None;
            for k in k_range.clone() {
                let q = ParabolicCylinder::new(center, t0, 0.5_f64.powi(k))?;
                if !cylinder_resolved(source, &q) {
                    continue;
                }
                if criterion_lhs(source, &q, criterion)? <= threshold {
                    return Ok(None);
                }
                if smallest
                    .as_ref()
                    .is_none_or(|s: &ParabolicCylinder| q.radius < s.radius)
                {
                    smallest = Some(q);
                }
            }
            if smallest.is_none() {
                log::warn!("no resolved radius at center {center:?}; not classified");
            }
            Ok(smallest)
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetEstimate {
    pub flagged: Vec<ParabolicCylinder>,
    pub chosen: Vec<ParabolicCylinder>,
    /// `Σ_{chosen} r^{5/3}`
    pub premeasure: f64,
    /// Largest flagged radius, the scale of the covering.
    pub delta: f64,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm_sq([a[0] - b[0], a[1] - b[1], a[2] - b[2]]).sqrt()
}

/// Cylinders enter the covering with their metric-ball extent
/// `B_r(x) × (t − r², t + r²)` in the metric `max(|Δx|, √|Δt|)`.
fn disjoint(a: &ParabolicCylinder, b: &ParabolicCylinder) -> bool {
    distance(a.center, b.center) >= a.radius + b.radius
        || (a.t0 - b.t0).abs() >= a.radius * a.radius + b.radius * b.radius
}

/// Whether `small` lies inside the `factor`-enlargement of `big`.
pub fn enlargement_contains(
    big: &ParabolicCylinder,
    factor: f64,
    small: &ParabolicCylinder,
) -> bool {
    let r = factor * big.radius;
    distance(big.center, small.center) + small.radius <= r * (1.0 + 1e-12)
        && (big.t0 - small.t0).abs() + small.radius * small.radius <= r * r * (1.0 + 1e-12)
}

fn covering_order(a: &ParabolicCylinder, b: &ParabolicCylinder) -> Ordering {
    b.radius
        .total_cmp(&a.radius)
        .then_with(|| a.center[0].total_cmp(&b.center[0]))
        .then_with(|| a.center[1].total_cmp(&b.center[1]))
        .then_with(|| a.center[2].total_cmp(&b.center[2]))
        .then_with(|| a.t0.total_cmp(&b.t0))
}

/// Greedy Vitali selection: largest radius first, keeping each cylinder
/// disjoint from those already chosen.
pub fn vitali_cover(flagged: &[ParabolicCylinder]) -> SingularSetEstimate {
    let mut order: Vec<ParabolicCylinder> = flagged.to_vec();
    order.sort_by(covering_order);
    let mut chosen: Vec<ParabolicCylinder> = Vec::new();
    for q in order {
        if chosen.iter().all(|c| disjoint(c, &q)) {
            chosen.push(q);
        }
    }
    SingularSetEstimate {
        flagged: flagged.to_vec(),
        premeasure: chosen.iter().map(|q| q.radius.powf(5.0 / 3.0)).sum(),
        delta: flagged.iter().map(|q| q.radius).fold(0.0, f64::max),
        chosen,
    }
}
