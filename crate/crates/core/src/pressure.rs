//! Pressure recovery and its local Newtonian-potential decomposition.

use num_complex::Complex64;
use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::diagnostics::quantities::quantities;
use crate::diagnostics::test_function::smoothstep;
use crate::error::{Error, Result};
use crate::grid::{GradPhi, Grid, ParabolicCylinder, ScalarField, VectorField};
use crate::integrate::Resolution;
use crate::sampling::CylinderSource;
use crate::spectral::{Spectral, Spectrum};

/// Spectrum of the pressure source `∂i∂j(u_i u_j) + ∇·(n∇φ)`.
fn pressure_source(sp: &Spectral, u: &VectorField, n: &ScalarField, gradphi: &GradPhi) -> Spectrum {
    let grid = sp.grid();
    let len = grid.len();
    let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let products: Vec<Spectrum> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let ua = &u.components[a];
            let ub = &u.components[b];
            let prod: Vec<f64> = ua.iter().zip(ub).map(|(x, y)| x * y).collect();
            let spec = sp.forward(&prod);
            if a == b {
                sp.d2(&spec, a, a)
            } else {
                // off-diagonal pairs appear twice in the double sum
                sp.d2(&spec, a, b).into_iter().map(|z| z * 2.0).collect()
            }
        })
        .collect();
    let buoyancy: Vec<Spectrum> = (0..3)
        .into_par_iter()
        .map(|a| {
            let f: Vec<f64> = (0..len).map(|i| n.values[i] * gradphi.at(i)[a]).collect();
            sp.d1(&sp.forward(&f), a)
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    for s in products.iter().chain(&buoyancy) {
        total
            .par_iter_mut()
            .zip(s.par_iter())
            .for_each(|(t, v)| *t += v);
    }
    total
}

/// Zero-mean periodic solution of `-Δp = ∂i∂j(u_i u_j) + ∇·(n∇φ)`.
pub fn solve_pressure_global(
    u: &VectorField,
    n: &ScalarField,
    gradphi: &GradPhi,
) -> Result<ScalarField> {
    if u.grid != n.grid {
        return Err(Error::GridMismatch("u and n on different grids".into()));
    }
    u.check_finite("u")?;
    n.check_finite("n")?;
    if let GradPhi::Field(f) = gradphi {
        if f.grid != n.grid {
            return Err(Error::GridMismatch("gradphi on a different grid".into()));
        }
        f.check_finite("gradphi")?;
    }
    let sp = Spectral::for_grid(n.grid);
    let source = pressure_source(&sp, u, n, gradphi);
    ScalarField::new(n.grid, n.time, sp.inverse(sp.solve_neg_laplacian(&source)))
}

/// Relative spectral residual `‖Δp + source‖ / ‖source‖` (max over modes).
pub fn global_residual(
    p: &ScalarField,
    u: &VectorField,
    n: &ScalarField,
    gradphi: &GradPhi,
) -> Result<f64> {
    let sp = Spectral::for_grid(n.grid);
    let source = pressure_source(&sp, u, n, gradphi);
    let lap = sp.laplacian_spec(&sp.forward(&p.values));
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (idx, (l, s)) in lap.iter().zip(&source).enumerate() {
        if sp.wavenumber_sq(idx) == 0.0 {
            continue;
        }
        num = num.max((l + s).norm());
        den = den.max(s.norm());
    }
    Ok(if den == 0.0 { num } else { num / den })
}

/// `∫_{[−½,½]³} |y|⁻¹ dy`, the self-cell weight of the Newtonian kernel.
fn self_cell_integral() -> f64 {
    let s3 = 3.0_f64.sqrt();
    3.0 * ((s3 + 1.0) / (s3 - 1.0)).ln() - 0.5 * std::f64::consts::PI
}

/// Cell weight `h³ G(mh)` of the kernel `G(x) = 1/(4π|x|)` at lattice offset `m`.
fn kernel_weight(m: [i64; 3], h: f64) -> f64 {
    let r2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
    let four_pi = 4.0 * std::f64::consts::PI;
    if r2 == 0.0 {
        h * h * self_cell_integral() / four_pi
    } else {
        h * h / (four_pi * r2.sqrt())
    }
}

fn check_3d_cubic(f: &ScalarField) -> Result<usize> {
    let g = f.grid;
    let [nx, ny, nz] = g.dims();
    if g.is_2d() || nx != ny || ny != nz {
        return Err(Error::InvalidArgument(
            "the Newtonian potential needs a cubic 3D grid".into(),
        ));
    }
    Ok(nx)
}

/// Lattice offset of node `idx` from the node nearest `center`, in `[−N/2, N/2)`.
fn offset(f: &ScalarField, center: [f64; 3], idx: usize) -> [i64; 3] {
    let g = f.grid;
    let n = g.dims()[0] as i64;
    let h = g.spacing()[0];
    let ijk = g.unravel(idx);
    let mut m = [0; 3];
    for a in 0..3 {
        let base = (center[a] / h).round() as i64;
        m[a] = (ijk[a] as i64 - base + n / 2).rem_euclid(n) - n / 2;
    }
    m
}

/// Free-space Newtonian potential `∫ f(y)/(4π|x−y|) dy` of a source that
/// vanishes outside `B_ρ(center)`, by zero-padded convolution on a doubled box.
///
/// The result is defined at every node of `f`'s grid, with nodes placed at
/// their minimal-image offset from `center`.
pub fn newtonian_potential(f: &ScalarField, center: [f64; 3]) -> Result<ScalarField> {
    let n = check_3d_cubic(f)?;
    f.check_finite("source")?;
    let grid = f.grid;
    let h = grid.spacing()[0];
    let m = 2 * n;
    let padded = Grid::new([m; 3], 2.0 * grid.length())?;
    let sp = Spectral::for_grid(padded);
    let wrap = |v: i64| v.rem_euclid(m as i64) as usize;

    let mut src = vec![0.0; padded.len()];
    for (idx, &v) in f.values.iter().enumerate() {
        if v != 0.0 {
            let o = offset(f, center, idx);
            src[padded.index(wrap(o[0]), wrap(o[1]), wrap(o[2]))] = v;
        }
    }
    let half = n as i64;
    let kernel: Vec<f64> = (0..padded.len())
        .into_par_iter()
        .map(|idx| {
            let ijk = padded.unravel(idx);
            let o = ijk.map(|i| {
                if (i as i64) < half {
                    i as i64
                } else {
                    i as i64 - m as i64
                }
            });
            kernel_weight(o, h)
        })
        .collect();
    let a = sp.forward(&src);
    let b = sp.forward(&kernel);
    let prod: Spectrum = a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).collect();
    let conv = sp.inverse(prod);

    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let o = offset(f, center, idx);
            conv[padded.index(wrap(o[0]), wrap(o[1]), wrap(o[2]))]
        })
        .collect();
    ScalarField::new(grid, f.time, values)
}

/// Direct `O(N²)` summation of the same lattice sum as [`newtonian_potential`].
pub fn newtonian_potential_direct(f: &ScalarField, center: [f64; 3]) -> Result<ScalarField> {
    check_3d_cubic(f)?;
    f.check_finite("source")?;
    let grid = f.grid;
    let h = grid.spacing()[0];
    let sources: Vec<([i64; 3], f64)> = f
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(idx, &v)| (offset(f, center, idx), v))
        .collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = offset(f, center, idx);
            sources
                .iter()
                .map(|(y, v)| v * kernel_weight([x[0] - y[0], x[1] - y[1], x[2] - y[2]], h))
                .sum()
        })
        .collect();
    ScalarField::new(grid, f.time, values)
}

/// Periodic neighbor of `idx` shifted by `k` along `axis`.
#[inline]
fn neighbor(grid: &Grid, idx: usize, axis: usize, k: i64) -> usize {
    let mut ijk = grid.unravel(idx);
    let n = grid.dims()[axis] as i64;
    ijk[axis] = (ijk[axis] as i64 + k).rem_euclid(n) as usize;
    grid.index(ijk[0], ijk[1], ijk[2])
}

/// Fourth-order central `∂_axis f` at a node.
fn fd_d1(f: &ScalarField, idx: usize, axis: usize) -> f64 {
    let g = &f.grid;
    let h = g.spacing()[axis];
    let v = |k| f.values[neighbor(g, idx, axis, k)];
    (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h)
}

/// Fourth-order central `∂_a ∂_b f` at a node.
fn fd_d2(f: &ScalarField, idx: usize, a: usize, b: usize) -> f64 {
    let g = &f.grid;
    if a == b {
        let h = g.spacing()[a];
        let v = |k| f.values[neighbor(g, idx, a, k)];
        return (-v(2) + 16.0 * v(1) - 30.0 * v(0) + 16.0 * v(-1) - v(-2)) / (12.0 * h * h);
    }
    const W: [(i64, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
    let (ha, hb) = (g.spacing()[a], g.spacing()[b]);
    let mut s = 0.0;
    for &(i, wi) in &W {
        let row = neighbor(g, idx, a, i);
        for &(j, wj) in &W {
            s += wi * wj * f.values[neighbor(g, row, b, j)];
        }
    }
    s / (144.0 * ha * hb)
}

/// Fourth-order finite-difference Laplacian at a node.
pub fn fd_laplacian(f: &ScalarField, idx: usize) -> f64 {
    (0..f.grid.spatial_dims())
        .map(|a| fd_d2(f, idx, a, a))
        .sum()
}

/// Local split `p = p1 + p2` on a ball `B_ρ`: `p1` is the Newtonian potential
/// of the localized source and `p2` is harmonic on `B_{ρ/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureDecomposition {
    pub p1: ScalarField,
    pub p2: ScalarField,
    pub center: [f64; 3],
    pub rho: f64,
    /// `(u)_ρ`, subtracted from `u` in the source.
    pub mean_velocity: [f64; 3],
    /// `sup |Δp2|` over the nodes of `B_{ρ/2}`.
    pub harmonic_residual: f64,
    /// `sup |Δp1|` over the same nodes, the natural scale of the residual.
    pub p1_laplacian_sup: f64,
}

/// Scalar part of a [`PressureDecomposition`], for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub center: [f64; 3],
    pub rho: f64,
    pub mean_velocity: [f64; 3],
    pub harmonic_residual: f64,
    pub p1_laplacian_sup: f64,
}

impl PressureDecomposition {
    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            center: self.center,
            rho: self.rho,
            mean_velocity: self.mean_velocity,
            harmonic_residual: self.harmonic_residual,
            p1_laplacian_sup: self.p1_laplacian_sup,
        }
    }

    /// `harmonic_residual / p1_laplacian_sup`, or the raw residual when `p1` is flat.
    pub fn relative_residual(&self) -> f64 {
        if self.p1_laplacian_sup > 0.0 {
            self.harmonic_residual / self.p1_laplacian_sup
        } else {
            self.harmonic_residual
        }
    }
}

/// Radial cutoff `η(|x|)`, 1 on `B_{ρ/2}` and 0 outside `B_ρ`, with gradient
/// and Hessian.
fn eta(d: [f64; 3], rho: f64) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let w = 0.5 * rho;
    let (s, s1, s2) = smoothstep((rho - r) / w);
    if s1 == 0.0 && s2 == 0.0 {
        return (s, [0.0; 3], [[0.0; 3]; 3]);
    }
    let e1 = -s1 / w;
    let e2 = s2 / (w * w);
    let x = d.map(|v| v / r);
    let mut hess = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            hess[a][b] = e2 * x[a] * x[b] + e1 * (delta - x[a] * x[b]) / r;
        }
    }
    (s, x.map(|v| e1 * v), hess)
}

/// Node average of `u` over `B_ρ(center)`.
pub fn ball_mean_velocity(u: &VectorField, center: [f64; 3], rho: f64) -> [f64; 3] {
    let nodes = u.grid.ball_nodes(center, rho);
    let mut m = [0.0; 3];
    for (idx, _) in &nodes {
        let v = u.at(*idx);
        for a in 0..3 {
            m[a] += v[a];
        }
    }
    m.map(|v| {
        if nodes.is_empty() {
            0.0
        } else {
            v / nodes.len() as f64
        }
    })
}

/// [`decompose_local_with_mean`] with `(u)_ρ` the ball mean of `u`.
pub fn decompose_local(
    p: &ScalarField,
    u: &VectorField,
    n: &ScalarField,
    gradphi: &GradPhi,
    center: [f64; 3],
    rho: f64,
) -> Result<PressureDecomposition> {
    decompose_local_with_mean(
        p,
        u,
        n,
        gradphi,
        center,
        rho,
        ball_mean_velocity(u, center, rho),
    )
}

/// `p1 = Γ * [∂i∂j(w_i w_j η) + ∇·(n∇φ η)]` with `w = u − mean` and
/// `Γ = 1/(4π|x|)`; `p2 = p − p1`.
///
/// The source is expanded by the product rule so that `η` is differentiated
/// exactly and only the periodic factors go through the FFT.
pub fn decompose_local_with_mean(
    p: &ScalarField,
    u: &VectorField,
    n: &ScalarField,
    gradphi: &GradPhi,
    center: [f64; 3],
    rho: f64,
    mean: [f64; 3],
) -> Result<PressureDecomposition> {
    let grid = p.grid;
    if u.grid != grid || n.grid != grid {
        return Err(Error::GridMismatch("p, u and n on different grids".into()));
    }
    check_3d_cubic(p)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ρ = {rho} must be positive"
        )));
    }
    if rho >= 0.5 * grid.length() {
        return Err(Error::CylinderExceedsBox {
            radius: rho,
            half_box: 0.5 * grid.length(),
        });
    }
    let h = grid.spacing()[0];
    if 0.5 * rho < 8.0 * h {
        return Err(Error::UnderResolved(format!(
            "cutoff transition ρ/2 = {} spans fewer than 8 cells of width {h}",
            0.5 * rho
        )));
    }
    p.check_finite("p")?;
    u.check_finite("u")?;
    n.check_finite("n")?;
    if let GradPhi::Field(f) = gradphi {
        if f.grid != grid {
            return Err(Error::GridMismatch("gradphi on a different grid".into()));
        }
    }

    let sp = Spectral::for_grid(grid);
    let w: Vec<Vec<f64>> = (0..3)
        .map(|a| u.components[a].iter().map(|v| v - mean[a]).collect())
        .collect();
    let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    // spectra of w_a w_b, then ∂i∂j Σ and the row divergences ∂_j(w_i w_j)
    let q: Vec<(usize, usize, Vec<f64>, Spectrum)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let prod: Vec<f64> = w[a].iter().zip(&w[b]).map(|(x, y)| x * y).collect();
            let spec = sp.forward(&prod);
            (a, b, prod, spec)
        })
        .collect();
    let mut dd = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, b, _, spec) in &q {
        let factor = if a == b { 1.0 } else { 2.0 };
        for (t, v) in dd.iter_mut().zip(sp.d2(spec, *a, *b)) {
            *t += v * factor;
        }
    }
    let spec_of = |a: usize, b: usize| -> &Spectrum {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        &q.iter().find(|e| e.0 == a && e.1 == b).unwrap().3
    };
    let row_div: Vec<Vec<f64>> = (0..3)
        .into_par_iter()
        .map(|i| {
            let mut s = vec![Complex64::new(0.0, 0.0); grid.len()];
            for j in 0..3 {
                for (t, v) in s.iter_mut().zip(sp.d1(spec_of(i, j), j)) {
                    *t += v;
                }
            }
            sp.inverse(s)
        })
        .collect();
    let mut div_flux = vec![Complex64::new(0.0, 0.0); grid.len()];
    for a in 0..3 {
        let f: Vec<f64> = (0..grid.len())
            .map(|i| n.values[i] * gradphi.at(i)[a])
            .collect();
        for (t, v) in div_flux.iter_mut().zip(sp.d1(&sp.forward(&f), a)) {
            *t += v;
        }
    }
    let dd = sp.inverse(dd);
    let div_flux = sp.inverse(div_flux);
    let prod_at = |idx: usize, a: usize, b: usize| -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        q.iter().find(|e| e.0 == a && e.1 == b).unwrap().2[idx]
    };

    let mut source = vec![0.0; grid.len()];
    for (idx, d) in grid.ball_nodes(center, rho) {
        let (e, ge, he) = eta(d, rho);
        if e == 0.0 && ge == [0.0; 3] {
            continue;
        }
        let g = gradphi.at(idx);
        let mut s = e * (dd[idx] + div_flux[idx]);
        for i in 0..3 {
            s += 2.0 * ge[i] * row_div[i][idx] + n.values[idx] * g[i] * ge[i];
            for j in 0..3 {
                s += prod_at(idx, i, j) * he[i][j];
            }
        }
        source[idx] = s;
    }
    let p1 = newtonian_potential(&ScalarField::new(grid, p.time, source)?, center)?;
    let p2 = ScalarField::new(
        grid,
        p.time,
        p.values
            .iter()
            .zip(&p1.values)
            .map(|(a, b)| a - b)
            .collect(),
    )?;
    let inner = grid.ball_nodes(center, 0.5 * rho);
    let sup = |f: &ScalarField| {
        inner
            .iter()
            .map(|(i, _)| fd_laplacian(f, *i).abs())
            .fold(0.0, f64::max)
    };
    Ok(PressureDecomposition {
        harmonic_residual: sup(&p2),
        p1_laplacian_sup: sup(&p1),
        p1,
        p2,
        center,
        rho,
        mean_velocity: mean,
    })
}

/// Pointwise `|∇^k f|` at a node (Euclidean for `k = 1`, Frobenius for `k = 2`).
fn derivative_norm(f: &ScalarField, idx: usize, k: u32) -> f64 {
    let d = f.grid.spatial_dims();
    match k {
        0 => f.values[idx].abs(),
        1 => (0..d).map(|a| fd_d1(f, idx, a).powi(2)).sum::<f64>().sqrt(),
        _ => (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| fd_d2(f, idx, a, b).powi(2))
            .sum::<f64>()
            .sqrt(),
    }
}

fn lattice_norm(values: impl Iterator<Item = f64>, exp: f64, cell: f64) -> f64 {
    if exp.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (values.map(|v| v.powf(exp)).sum::<f64>() * cell).powf(1.0 / exp)
    }
}

/// Empirical constant of the interior estimate for harmonic `f`:
///
/// ```text
/// ‖∇^k f‖_{L^q(B_r)} / ( r^{d/q} (ρ − r)^{−d/p − k} ‖f‖_{L^p(B_ρ)} )
/// ```
///
/// with derivatives by fourth-order differences. `q` or `p` may be infinite.
pub fn mean_value_check(
    f: &ScalarField,
    center: [f64; 3],
    r: f64,
    rho: f64,
    q: f64,
    p: f64,
    k: u32,
) -> Result<f64> {
    let grid = f.grid;
    let h = grid.max_spacing();
    if !(r > 0.0 && r < rho && rho - r >= h) {
        return Err(Error::InvalidArgument(format!(
            "degenerate radii r = {r}, ρ = {rho} (need 0 < r and ρ − r ≥ {h})"
        )));
    }
    if k > 2 {
        return Err(Error::InvalidArgument(format!(
            "derivative order {k} above 2"
        )));
    }
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exponents p = {p}, q = {q} below 1"
        )));
    }
    if rho >= 0.5 * grid.length() {
        return Err(Error::CylinderExceedsBox {
            radius: rho,
            half_box: 0.5 * grid.length(),
        });
    }
    f.check_finite("f")?;
    let cell = grid.cell_volume();
    let num = lattice_norm(
        grid.ball_nodes(center, r)
            .iter()
            .map(|(i, _)| derivative_norm(f, *i, k)),
        q,
        cell,
    );
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = lattice_norm(
        grid.ball_nodes(center, rho)
            .iter()
            .map(|(i, _)| f.values[*i].abs()),
        p,
        cell,
    );
    let d = grid.spatial_dims() as f64;
    let scale = r.powf(d / q) / (rho - r).powf(d / p + k as f64);
    Ok(num / (scale * den))
}

/// One level of the `D`-decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: usize,
    pub radius: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// `G = A_u + E_u + A_n + E_n`
    #[serde(rename = "G")]
    pub g: f64,
    /// `½ D(ρ_{k−1}) + θ0⁻² G(ρ_{k−1})^{3/2}`, absent on the first level.
    pub bound_rhs: Option<f64>,
    /// `D(ρ_k) / bound_rhs`.
    #[serde(with = "crate::report::nonfinite::option")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub theta0: f64,
    pub rows: Vec<DecayRow>,
    /// Set when levels were dropped because their cylinders were under-resolved.
    pub truncated: bool,
}

/// Tabulates `D` along `ρ_k = θ0^k ρ0`, `k = 0..=levels`, on cylinders
/// ending at `(center, t0)`.
pub fn d_decay_monitor(
    source: &dyn CylinderSource,
    center: [f64; 3],
    t0: f64,
    theta0: f64,
    rho0: f64,
    levels: usize,
) -> Result<DecayTable> {
    if !(theta0 > 0.0 && theta0 < 0.25) {
        return Err(Error::InvalidArgument(format!(
            "θ0 = {theta0} must lie in (0, 1/4)"
        )));
    }
    let mut rows: Vec<DecayRow> = Vec::new();
    let mut truncated = false;
    for k in 0..=levels {
        let radius = rho0 * theta0.powi(k as i32);
        let q = ParabolicCylinder::new(center, t0, radius)?;
        if !Resolution::for_cylinder(source, &q).resolved() {
            log::warn!("D-decay table truncated at level {k}: radius {radius} is under-resolved");
            truncated = true;
            break;
        }
        let rep = quantities(source, &q)?;
        let g = rep.a_u + rep.e_u + rep.a_n + rep.e_n;
        let bound_rhs = rows
            .last()
            .map(|prev| 0.5 * prev.d + prev.g.powf(1.5) / (theta0 * theta0));
        let ratio = bound_rhs.map(|b| {
            if b > 0.0 {
                rep.d / b
            } else if rep.d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        });
        rows.push(DecayRow {
            k,
            radius,
            d: rep.d,
            g,
            bound_rhs,
            ratio,
        });
    }
    Ok(DecayTable {
        theta0,
        rows,
        truncated,
    })
}
