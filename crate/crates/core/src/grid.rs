//! Periodic grids and the field containers sampled on them.
//!
//! Layout is row-major with `x` slowest: node `(i, j, k)` lives at
//! `(i * ny + j) * nz + k`. A grid with `nz == 1` is the 2D mode; formulas
//! downstream keep their 3D exponents but integrate with an area element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic sampling of the box `[0, L)^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: [usize; 3],
    length: f64,
}

impl Grid {
    pub fn new(dims: [usize; 3], length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length {length} must be positive"
            )));
        }
        for (axis, &n) in dims.iter().enumerate() {
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "dimension {n} on axis {axis} is not a power of two"
                )));
            }
        }
        if dims[0] < 2 || dims[1] < 2 {
            return Err(Error::InvalidGrid("x and y need at least two nodes".into()));
        }
        Ok(Self { dims, length })
    }

    /// Cubic grid with `n` nodes per axis.
    pub fn cubic(n: usize, length: f64) -> Result<Self> {
        Self::new([n, n, n], length)
    }

    /// 2D grid (`nz = 1`).
    pub fn planar(n: usize, length: f64) -> Result<Self> {
        Self::new([n, n, 1], length)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_2d(&self) -> bool {
        self.dims[2] == 1
    }

    /// Number of spatial dimensions actually resolved (2 or 3).
    pub fn spatial_dims(&self) -> usize {
        if self.is_2d() {
            2
        } else {
            3
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.length / self.dims[0] as f64,
            self.length / self.dims[1] as f64,
            self.length / self.dims[2] as f64,
        ]
    }

    /// Largest spacing over the resolved axes.
    pub fn max_spacing(&self) -> f64 {
        let h = self.spacing();
        if self.is_2d() {
            h[0].max(h[1])
        } else {
            h[0].max(h[1]).max(h[2])
        }
    }

    /// Quadrature weight of one node: `h^3`, or `h^2` in 2D mode.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        if self.is_2d() {
            h[0] * h[1]
        } else {
            h[0] * h[1] * h[2]
        }
    }

    pub fn box_volume(&self) -> f64 {
        self.cell_volume() * self.len() as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        let h = self.spacing();
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    /// Minimal-image displacement `x - x0` on the periodic box.
    #[inline]
    pub fn displacement(&self, x: [f64; 3], x0: [f64; 3]) -> [f64; 3] {
        let l = self.length;
        let mut d = [0.0; 3];
        for a in 0..3 {
            if a == 2 && self.is_2d() {
                continue;
            }
            let mut v = x[a] - x0[a];
            v -= l * (v / l).round();
            d[a] = v;
        }
        d
    }

    /// Node indices with `|x - x0| < r` (periodic), in ascending order.
    pub fn ball_nodes(&self, x0: [f64; 3], r: f64) -> Vec<(usize, [f64; 3])> {
        let h = self.spacing();
        let [nx, ny, nz] = self.dims;
        let span = |n: usize, h: f64| -> (i64, i64) {
            let m = (r / h).ceil() as i64 + 1;
            (-m.min(n as i64), m.min(n as i64))
        };
        let mut out = Vec::new();
        let r2 = r * r;
        // enumerate offsets around the nearest node so each node is visited once
        let base = [
            (x0[0] / h[0]).round() as i64,
            (x0[1] / h[1]).round() as i64,
            if self.is_2d() {
                0
            } else {
                (x0[2] / h[2]).round() as i64
            },
        ];
        let (ax0, ax1) = span(nx, h[0]);
        let (ay0, ay1) = span(ny, h[1]);
        let (az0, az1) = if self.is_2d() { (0, 0) } else { span(nz, h[2]) };
        let mut seen = std::collections::BTreeSet::new();
        for di in ax0..=ax1 {
            for dj in ay0..=ay1 {
                for dk in az0..=az1 {
                    let i = (base[0] + di).rem_euclid(nx as i64) as usize;
                    let j = (base[1] + dj).rem_euclid(ny as i64) as usize;
                    let k = (base[2] + dk).rem_euclid(nz as i64) as usize;
                    let idx = self.index(i, j, k);
                    let d = self.displacement(self.coord(idx), x0);
                    let dist2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    if dist2 < r2 && seen.insert(idx) {
                        out.push((idx, d));
                    }
                }
            }
        }
        out.sort_by_key(|&(idx, _)| idx);
        out
    }
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            field: name.to_string(),
            index,
        }),
        None => Ok(()),
    }
}

/// Scalar samples on a grid at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub time: f64,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, time, values })
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self {
            grid,
            time,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, time: f64, value: f64) -> Self {
        Self {
            grid,
            time,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.coord(idx))).collect();
        Self { grid, time, values }
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        check_finite(name, &self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann sum over the whole box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Three-component vector samples on a grid at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub time: f64,
    pub components: [Vec<f64>; 3],
}

impl VectorField {
    pub fn new(grid: Grid, time: f64, components: [Vec<f64>; 3]) -> Result<Self> {
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component of length {} for a grid of {} nodes",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self {
            grid,
            time,
            components,
        })
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self::constant(grid, time, [0.0; 3])
    }

    pub fn constant(grid: Grid, time: f64, value: [f64; 3]) -> Self {
        let n = grid.len();
        Self {
            grid,
            time,
            components: [vec![value[0]; n], vec![value[1]; n], vec![value[2]; n]],
        }
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let n = grid.len();
        let mut components = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for idx in 0..n {
            let v = f(grid.coord(idx));
            for a in 0..3 {
                components[a][idx] = v[a];
            }
        }
        Self {
            grid,
            time,
            components,
        }
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        for (a, c) in self.components.iter().enumerate() {
            check_finite(&format!("{name}[{a}]"), c)?;
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.components[0][idx],
            self.components[1][idx],
            self.components[2][idx],
        ]
    }

    /// `max |v|` over nodes (Euclidean norm per node).
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).fold(0.0_f64, |m, idx| {
            let v = self.at(idx);
            m.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
        })
    }
}

/// The potential gradient `∇φ` driving buoyancy. Only the gradient enters the
/// dynamics, so `φ` itself is never stored.
#[derive(Debug, Clone, PartialEq)]
pub enum GradPhi {
    Constant([f64; 3]),
    Field(VectorField),
}

impl Default for GradPhi {
    fn default() -> Self {
        GradPhi::Constant([0.0; 3])
    }
}

impl GradPhi {
    pub fn sup_norm(&self) -> f64 {
        match self {
            GradPhi::Constant(g) => (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt(),
            GradPhi::Field(f) => f.max_norm(),
        }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        match self {
            GradPhi::Constant(g) => *g,
            GradPhi::Field(f) => f.at(idx),
        }
    }

    pub fn to_field(&self, grid: Grid) -> VectorField {
        match self {
            GradPhi::Constant(g) => VectorField::constant(grid, 0.0, *g),
            GradPhi::Field(f) => f.clone(),
        }
    }
}

/// One time instant of `(n, c, u, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub n: ScalarField,
    pub c: ScalarField,
    pub u: VectorField,
    pub p: ScalarField,
}

impl State {
    pub fn new(n: ScalarField, c: ScalarField, u: VectorField, p: ScalarField) -> Result<Self> {
        let grid = n.grid;
        if c.grid != grid || u.grid != grid || p.grid != grid {
            return Err(Error::GridMismatch(
                "state fields on different grids".into(),
            ));
        }
        let t = n.time;
        let mut s = Self { t, n, c, u, p };
        s.set_time(t);
        Ok(s)
    }

    pub fn zeros(grid: Grid, t: f64) -> Self {
        Self {
            t,
            n: ScalarField::zeros(grid, t),
            c: ScalarField::zeros(grid, t),
            u: VectorField::zeros(grid, t),
            p: ScalarField::zeros(grid, t),
        }
    }

    pub fn grid(&self) -> Grid {
        self.n.grid
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
        self.n.time = t;
        self.c.time = t;
        self.u.time = t;
        self.p.time = t;
    }

    pub fn check_finite(&self) -> Result<()> {
        self.n.check_finite("n")?;
        self.c.check_finite("c")?;
        self.u.check_finite("u")?;
        self.p.check_finite("p")
    }
}

/// Time-ordered snapshots on one grid, plus the forcing they were produced
/// with.
#[derive(Debug, Clone, Default)]
pub struct SnapshotSeries {
    snapshots: Vec<State>,
    pub gradphi: GradPhi,
}

impl SnapshotSeries {
    pub fn new(snapshots: Vec<State>, gradphi: GradPhi) -> Result<Self> {
        let mut s = Self {
            snapshots: Vec::with_capacity(snapshots.len()),
            gradphi,
        };
        for snap in snapshots {
            s.push(snap)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, state: State) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if state.grid() != last.grid() {
                return Err(Error::GridMismatch("snapshot on a different grid".into()));
            }
            if state.t <= last.t {
                return Err(Error::InvalidArgument(format!(
                    "snapshot times must increase strictly ({} after {})",
                    state.t, last.t
                )));
            }
        }
        self.snapshots.push(state);
        Ok(())
    }

    pub fn snapshots(&self) -> &[State] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn grid(&self) -> Option<Grid> {
        self.snapshots.first().map(State::grid)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first_time(&self) -> Option<f64> {
        self.snapshots.first().map(|s| s.t)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.snapshots.last().map(|s| s.t)
    }

    /// Largest gap between consecutive snapshot times.
    pub fn dt_max(&self) -> f64 {
        self.snapshots
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .fold(0.0, f64::max)
    }

    /// Largest gap restricted to snapshots that bracket `[t_lo, t_hi]`.
    pub fn dt_max_in(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.snapshots
            .windows(2)
            .filter(|w| w[1].t > t_lo && w[0].t < t_hi)
            .map(|w| w[1].t - w[0].t)
            .fold(0.0, f64::max)
    }
}

/// `Q_r(z0) = B_r(x0) × (t0 − r², t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub center: [f64; 3],
    pub t0: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center: [f64; 3], t0: f64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radius {radius} must be positive"
            )));
        }
        Ok(Self { center, t0, radius })
    }

    pub fn t_start(&self) -> f64 {
        self.t0 - self.radius * self.radius
    }

    /// Rejects cylinders whose ball does not fit strictly inside the box.
    pub fn check_fits(&self, grid: &Grid) -> Result<()> {
        let half_box = 0.5 * grid.length();
        if self.radius >= half_box {
            return Err(Error::CylinderExceedsBox {
                radius: self.radius,
                half_box,
            });
        }
        Ok(())
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..*self }
    }
}
