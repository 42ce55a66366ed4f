//! Pointwise access to solution states on balls and cylinders.
//!
//! Every diagnostic reduces to sums of pointwise integrands over a ball at a
//! set of time nodes. A [`CylinderSource`] hands out those ball samples
//! either from stored snapshots (native grid nodes, or a refined local
//! lattice obtained by band-limited interpolation) or from a closed-form
//! generator evaluated exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GradPhi, Grid, SnapshotSeries, State};
use crate::interp::LatticeInterpolator;
use crate::spectral::Spectral;

/// Primitive values and derivatives of `(n, c, u, p)` at one point.
///
/// `grad_u[a][b] = ∂_b u_a`; `hess_c[a][b] = ∂_a ∂_b c`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointState {
    pub n: f64,
    pub grad_n: [f64; 3],
    pub c: f64,
    pub grad_c: [f64; 3],
    pub hess_c: [[f64; 3]; 3],
    pub u: [f64; 3],
    pub grad_u: [[f64; 3]; 3],
    pub p: f64,
    pub gradphi: [f64; 3],
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm_sq(a: [f64; 3]) -> f64 {
    dot(a, a)
}

/// `s ln s` extended continuously by 0 at `s = 0`.
#[inline]
pub fn x_ln_x(s: f64) -> f64 {
    if s > 0.0 {
        s * s.ln()
    } else {
        0.0
    }
}

impl PointState {
    /// `c̃ = c + 1`.
    #[inline]
    pub fn c_tilde(&self) -> f64 {
        self.c + 1.0
    }

    #[inline]
    pub fn n_ln_n(&self) -> f64 {
        x_ln_x(self.n)
    }

    /// `|∇√n|² = |∇n|² / (4n)`, taken as 0 where `n ≤ 0`.
    #[inline]
    pub fn grad_sqrt_n_sq(&self) -> f64 {
        if self.n > 0.0 {
            norm_sq(self.grad_n) / (4.0 * self.n)
        } else {
            0.0
        }
    }

    /// `∇√c̃ = ∇c / (2√c̃)`.
    #[inline]
    pub fn grad_sqrt_ct(&self) -> [f64; 3] {
        let s = 0.5 / self.c_tilde().sqrt();
        [self.grad_c[0] * s, self.grad_c[1] * s, self.grad_c[2] * s]
    }

    /// `∇²√c̃ = ∇²c / (2√c̃) − ∇c⊗∇c / (4 c̃^{3/2})`.
    pub fn hess_sqrt_ct(&self) -> [[f64; 3]; 3] {
        let ct = self.c_tilde();
        let a = 0.5 / ct.sqrt();
        let b = 0.25 / (ct * ct.sqrt());
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = a * self.hess_c[i][j] - b * self.grad_c[i] * self.grad_c[j];
            }
        }
        h
    }

    #[inline]
    pub fn hess_sqrt_ct_sq(&self) -> f64 {
        self.hess_sqrt_ct().iter().flatten().map(|v| v * v).sum()
    }

    #[inline]
    pub fn grad_u_sq(&self) -> f64 {
        self.grad_u.iter().flatten().map(|v| v * v).sum()
    }

    #[inline]
    pub fn u_sq(&self) -> f64 {
        norm_sq(self.u)
    }
}

/// A sample point inside a ball: displacement from the ball center and the
/// state there.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint {
    pub offset: [f64; 3],
    pub state: PointState,
}

/// All sample points of one ball at one time, with a uniform quadrature
/// weight per point.
#[derive(Debug, Clone)]
pub struct Slice {
    pub t: f64,
    pub weight: f64,
    pub points: Vec<SamplePoint>,
}

impl Slice {
    /// `Σ f(point) · weight` in point order.
    pub fn integrate(&self, f: impl Fn(&SamplePoint) -> f64) -> f64 {
        self.points.iter().map(f).sum::<f64>() * self.weight
    }

    /// Spatial mean of `u` over the slice points.
    pub fn mean_velocity(&self) -> [f64; 3] {
        if self.points.is_empty() {
            return [0.0; 3];
        }
        let mut m = [0.0; 3];
        for p in &self.points {
            for a in 0..3 {
                m[a] += p.state.u[a];
            }
        }
        let k = self.points.len() as f64;
        m.map(|v| v / k)
    }

    pub fn mean_pressure(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.state.p).sum::<f64>() / self.points.len() as f64
    }
}

/// How stored snapshots are sampled on a ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sampling {
    /// Grid nodes inside the ball (sharp indicator, weight `h³`).
    Native,
    /// A lattice of spacing `r / points_per_radius` centred on the ball
    /// center, filled by band-limited interpolation of the grid fields.
    Spectral { points_per_radius: usize },
}

/// A time node offered by a source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNode {
    pub t: f64,
    pub index: usize,
}

/// Producer of ball samples over time.
pub trait CylinderSource: Sync {
    /// Periodic box length, if the source lives on a box.
    fn box_length(&self) -> Option<f64>;

    /// Sampling spacing used on a ball of radius `radius`.
    fn spacing(&self, radius: f64) -> f64;

    /// Whether the source is planar (2D mode).
    fn is_2d(&self) -> bool;

    /// Time nodes covering `[t_lo, t_hi]`: every node inside the window
    /// plus, when `t_lo` is not itself a node, the last node before it.
    fn time_nodes(&self, t_lo: f64, t_hi: f64) -> Result<Vec<TimeNode>>;

    /// Largest gap between time nodes across the window.
    fn dt_max(&self, t_lo: f64, t_hi: f64) -> f64;

    fn sample_ball(&self, node: &TimeNode, center: [f64; 3], radius: f64) -> Result<Slice>;

    /// Initial-time sup of `c` (for `Λ0`), when known.
    fn initial_c_sup(&self) -> Option<f64>;

    fn gradphi_sup(&self) -> f64;
}

/// Time tolerance when matching window edges to nodes.
pub(crate) fn time_tol(t_lo: f64, t_hi: f64) -> f64 {
    1e-12 * (1.0 + t_lo.abs().max(t_hi.abs()))
}

/// Integral over `[t_lo, t_hi]` of the piecewise-linear interpolant through
/// `(times[i], values[i])` (trapezoid rule with clipped end intervals).
pub fn window_integral(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..times.len().saturating_sub(1) {
        let (a, b) = (times[i], times[i + 1]);
        let lo = a.max(t_lo);
        let hi = b.min(t_hi);
        if hi <= lo {
            continue;
        }
        let lerp = |t: f64| values[i] + (values[i + 1] - values[i]) * (t - a) / (b - a);
        total += 0.5 * (lerp(lo) + lerp(hi)) * (hi - lo);
    }
    total
}

/// Maximum of `values` over nodes lying inside `[t_lo, t_hi]`.
pub fn window_sup(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> f64 {
    let tol = time_tol(t_lo, t_hi);
    times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t_lo - tol && t <= t_hi + tol)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Derived grid fields of one snapshot, in the component order of
/// [`PointState`].
pub(crate) struct DerivedFields {
    /// n, ∂n(3), c, ∂c(3), ∂∂c(9), u(3), ∂u(9), p, ∇φ(3)
    pub comps: Vec<Vec<f64>>,
}

pub(crate) const N_COMPONENTS: usize = 1 + 3 + 1 + 3 + 9 + 3 + 9 + 1 + 3;

impl DerivedFields {
    pub fn compute(state: &State, gradphi: &GradPhi) -> Result<Self> {
        let grid = state.grid();
        let sp = Spectral::for_grid(grid);
        state.check_finite()?;
        let grad_n = sp.gradient(&state.n)?;
        let grad_c = sp.gradient(&state.c)?;
        let hess_c = sp.hessian(&state.c)?;
        let grad_u = sp.vector_gradient(&state.u)?;
        let mut comps = Vec::with_capacity(N_COMPONENTS);
        comps.push(state.n.values.clone());
        comps.extend(grad_n.components);
        comps.push(state.c.values.clone());
        comps.extend(grad_c.components);
        for row in hess_c {
            comps.extend(row);
        }
        comps.extend(state.u.components.iter().cloned());
        for row in grad_u {
            comps.extend(row);
        }
        comps.push(state.p.values.clone());
        match gradphi {
            GradPhi::Constant(g) => {
                for v in g {
                    comps.push(vec![*v; grid.len()]);
                }
            }
            GradPhi::Field(f) => comps.extend(f.components.iter().cloned()),
        }
        debug_assert_eq!(comps.len(), N_COMPONENTS);
        Ok(Self { comps })
    }

    pub fn point(&self, idx: usize) -> PointState {
        let v: [f64; N_COMPONENTS] = std::array::from_fn(|c| self.comps[c][idx]);
        point_from_components(&v)
    }

    pub fn bytes(grid: &Grid) -> usize {
        grid.len() * N_COMPONENTS * std::mem::size_of::<f64>()
    }
}

/// Assembles a [`PointState`] from a flat component vector.
pub(crate) fn point_from_components(v: &[f64]) -> PointState {
    let mut s = PointState {
        n: v[0],
        ..Default::default()
    };
    s.grad_n.copy_from_slice(&v[1..4]);
    s.c = v[4];
    s.grad_c.copy_from_slice(&v[5..8]);
    for a in 0..3 {
        s.hess_c[a].copy_from_slice(&v[8 + 3 * a..11 + 3 * a]);
    }
    s.u.copy_from_slice(&v[17..20]);
    for a in 0..3 {
        s.grad_u[a].copy_from_slice(&v[20 + 3 * a..23 + 3 * a]);
    }
    s.p = v[29];
    s.gradphi.copy_from_slice(&v[30..33]);
    s
}

const CACHE_BUDGET_BYTES: usize = 1 << 30;

/// Ball samples drawn from a stored [`SnapshotSeries`].
pub struct SeriesSource<'a> {
    series: &'a SnapshotSeries,
    sampling: Sampling,
    cache: Mutex<HashMap<usize, Arc<DerivedFields>>>,
    capacity: usize,
}

impl<'a> SeriesSource<'a> {
    pub fn new(series: &'a SnapshotSeries, sampling: Sampling) -> Result<Self> {
        let grid = series
            .grid()
            .ok_or_else(|| Error::InvalidArgument("empty snapshot series".into()))?;
        if let Sampling::Spectral { points_per_radius } = sampling {
            if points_per_radius == 0 {
                return Err(Error::InvalidArgument(
                    "points_per_radius must be positive".into(),
                ));
            }
        }
        let capacity = (CACHE_BUDGET_BYTES / DerivedFields::bytes(&grid)).max(2);
        Ok(Self {
            series,
            sampling,
            cache: Mutex::new(HashMap::new()),
            capacity,
        })
    }

    pub fn series(&self) -> &SnapshotSeries {
        self.series
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    fn grid(&self) -> Grid {
        self.series.grid().expect("non-empty series")
    }

    fn derived(&self, index: usize) -> Result<Arc<DerivedFields>> {
        if let Some(d) = self.cache.lock().expect("cache poisoned").get(&index) {
            return Ok(Arc::clone(d));
        }
        let d = Arc::new(DerivedFields::compute(
            &self.series.snapshots()[index],
            &self.series.gradphi,
        )?);
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() >= self.capacity {
            // evict the entry furthest from the requested index
            if let Some(&far) = cache.keys().max_by_key(|&&k| k.abs_diff(index)) {
                cache.remove(&far);
            }
        }
        cache.insert(index, Arc::clone(&d));
        Ok(d)
    }
}

impl CylinderSource for SeriesSource<'_> {
    fn box_length(&self) -> Option<f64> {
        Some(self.grid().length())
    }

    fn spacing(&self, radius: f64) -> f64 {
        match self.sampling {
            Sampling::Native => self.grid().max_spacing(),
            Sampling::Spectral { points_per_radius } => radius / points_per_radius as f64,
        }
    }

    fn is_2d(&self) -> bool {
        self.grid().is_2d()
    }

    fn time_nodes(&self, t_lo: f64, t_hi: f64) -> Result<Vec<TimeNode>> {
        series_time_nodes(self.series, t_lo, t_hi)
    }

    fn dt_max(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.series.dt_max_in(t_lo, t_hi)
    }

    fn sample_ball(&self, node: &TimeNode, center: [f64; 3], radius: f64) -> Result<Slice> {
        let derived = self.derived(node.index)?;
        Ok(sample_derived(
            self.grid(),
            &derived,
            node.t,
            center,
            radius,
            self.sampling,
        ))
    }

    fn initial_c_sup(&self) -> Option<f64> {
        self.series.snapshots().first().map(|s| s.c.max())
    }

    fn gradphi_sup(&self) -> f64 {
        self.series.gradphi.sup_norm()
    }
}

/// Ball samples of a single state, as a [`SeriesSource`] would draw them.
pub fn sample_state(
    state: &State,
    gradphi: &GradPhi,
    center: [f64; 3],
    radius: f64,
    sampling: Sampling,
) -> Result<Slice> {
    let derived = DerivedFields::compute(state, gradphi)?;
    Ok(sample_derived(
        state.grid(),
        &derived,
        state.n.time,
        center,
        radius,
        sampling,
    ))
}

fn sample_derived(
    grid: Grid,
    derived: &DerivedFields,
    t: f64,
    center: [f64; 3],
    radius: f64,
    sampling: Sampling,
) -> Slice {
    match sampling {
        Sampling::Native => {
            let points = grid
                .ball_nodes(center, radius)
                .into_iter()
                .map(|(idx, offset)| SamplePoint {
                    offset,
                    state: derived.point(idx),
                })
                .collect();
            Slice {
                t,
                weight: grid.cell_volume(),
                points,
            }
        }
        Sampling::Spectral { points_per_radius } => {
            let interp = LatticeInterpolator::new(grid, center, radius, points_per_radius);
            let values: Vec<Vec<f64>> = derived
                .comps
                .par_iter()
                .map(|c| interp.interpolate(c))
                .collect();
            let mut points = Vec::new();
            let mut buf = vec![0.0; N_COMPONENTS];
            for (li, offset) in interp.offsets().iter().enumerate() {
                if norm_sq(*offset) >= radius * radius {
                    continue;
                }
                for (b, comp) in buf.iter_mut().zip(&values) {
                    *b = comp[li];
                }
                points.push(SamplePoint {
                    offset: *offset,
                    state: point_from_components(&buf),
                });
            }
            Slice {
                t,
                weight: interp.cell_volume(),
                points,
            }
        }
    }
}

pub(crate) fn series_time_nodes(
    series: &SnapshotSeries,
    t_lo: f64,
    t_hi: f64,
) -> Result<Vec<TimeNode>> {
    let times = series.times();
    let (first, last) = match (times.first(), times.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::InvalidArgument("empty snapshot series".into())),
    };
    let tol = time_tol(t_lo, t_hi);
    if first > t_lo + tol || last < t_hi - tol {
        return Err(Error::TimeNotCovered {
            start: t_lo,
            end: t_hi,
            first,
            last,
        });
    }
    let mut nodes = Vec::new();
    for (index, &t) in times.iter().enumerate() {
        let next_inside = times.get(index + 1).is_some_and(|&tn| tn > t_lo + tol);
        let inside = t >= t_lo - tol && t <= t_hi + tol;
        let bracket_below = t < t_lo - tol && next_inside;
        let bracket_above = t > t_hi + tol && index > 0 && times[index - 1] < t_hi - tol;
        if inside || bracket_below || bracket_above {
            nodes.push(TimeNode { t, index });
        }
    }
    Ok(nodes)
}

/// An analytically evaluable state `(n, c, u, p)` with its derivatives.
pub trait ClosedForm: Sync {
    fn eval(&self, x: [f64; 3], t: f64) -> PointState;
}

impl<F> ClosedForm for F
where
    F: Fn([f64; 3], f64) -> PointState + Sync,
{
    fn eval(&self, x: [f64; 3], t: f64) -> PointState {
        self(x, t)
    }
}

/// Samples a [`ClosedForm`] on a lattice of spacing `r / points_per_radius`
/// centred on the ball center, at `time_steps + 1` uniform time nodes per
/// window. Lattices for radii `r` and `λr` map onto each other exactly.
pub struct ClosedFormSource<G> {
    pub generator: G,
    pub points_per_radius: usize,
    pub time_steps: usize,
    pub planar: bool,
    pub initial_c_sup: Option<f64>,
    pub gradphi_sup: f64,
}

impl<G: ClosedForm> ClosedFormSource<G> {
    pub fn new(generator: G, points_per_radius: usize, time_steps: usize) -> Self {
        Self {
            generator,
            points_per_radius,
            time_steps,
            planar: false,
            initial_c_sup: None,
            gradphi_sup: 0.0,
        }
    }
}

impl<G: ClosedForm> CylinderSource for ClosedFormSource<G> {
    fn box_length(&self) -> Option<f64> {
        None
    }

    fn spacing(&self, radius: f64) -> f64 {
        radius / self.points_per_radius as f64
    }

    fn is_2d(&self) -> bool {
        self.planar
    }

    fn time_nodes(&self, t_lo: f64, t_hi: f64) -> Result<Vec<TimeNode>> {
        if self.time_steps == 0 {
            return Err(Error::InvalidArgument("time_steps must be positive".into()));
        }
        if t_hi == t_lo {
            return Ok(vec![TimeNode { t: t_hi, index: 0 }]);
        }
        let m = self.time_steps;
        Ok((0..=m)
            .map(|j| TimeNode {
                t: t_lo + (t_hi - t_lo) * j as f64 / m as f64,
                index: j,
            })
            .collect())
    }

    fn dt_max(&self, t_lo: f64, t_hi: f64) -> f64 {
        (t_hi - t_lo) / self.time_steps.max(1) as f64
    }

    fn sample_ball(&self, node: &TimeNode, center: [f64; 3], radius: f64) -> Result<Slice> {
        let p = self.points_per_radius as i64;
        if p <= 0 {
            return Err(Error::InvalidArgument(
                "points_per_radius must be positive".into(),
            ));
        }
        let h = radius / p as f64;
        let kz = if self.planar { 0 } else { p };
        let mut offsets = Vec::new();
        for i in -p..=p {
            for j in -p..=p {
                for k in -kz..=kz {
                    let o = [i as f64 * h, j as f64 * h, k as f64 * h];
                    if norm_sq(o) < radius * radius {
                        offsets.push(o);
                    }
                }
            }
        }
        let points = offsets
            .par_iter()
            .map(|&offset| {
                let x = [
                    center[0] + offset[0],
                    center[1] + offset[1],
                    center[2] + offset[2],
                ];
                SamplePoint {
                    offset,
                    state: self.generator.eval(x, node.t),
                }
            })
            .collect();
        let weight = if self.planar { h * h } else { h * h * h };
        Ok(Slice {
            t: node.t,
            weight,
            points,
        })
    }

    fn initial_c_sup(&self) -> Option<f64> {
        self.initial_c_sup
    }

    fn gradphi_sup(&self) -> f64 {
        self.gradphi_sup
    }
}
