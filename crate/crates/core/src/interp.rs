//! Band-limited (trigonometric) interpolation of grid fields onto a small
//! tensor lattice around a point.

use crate::grid::Grid;

/// Periodic Dirichlet kernel for `n` equispaced nodes, `θ = 2π(x - x_j)/L`.
///
/// For even `n` this is the symmetric real interpolant that splits the
/// Nyquist mode into a cosine.
pub fn dirichlet_kernel(theta: f64, n: usize) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let half = 0.5 * theta;
    let s = half.sin();
    if s.abs() < 1e-13 {
        // θ = 2πm: the limit is (-1)^{nm}
        let m = (half / std::f64::consts::PI).round() as i64;
        return if n.is_multiple_of(2) || m % 2 == 0 { 1.0 } else { -1.0 };
    }
    (n as f64 * half).sin() * half.cos() / (s * n as f64)
}

/// Interpolation matrices from a grid onto the lattice
/// `center + h·(i, j, k)`, `|i|, |j|, |k| ≤ P`, `h = radius / P`.
pub struct LatticeInterpolator {
    grid: Grid,
    h: f64,
    counts: [usize; 3],
    offsets_1d: [Vec<f64>; 3],
    /// `mats[a][m * n_a + i]`: weight of grid node `i` at lattice point `m`.
    mats: [Vec<f64>; 3],
}

impl LatticeInterpolator {
    pub fn new(grid: Grid, center: [f64; 3], radius: f64, points_per_radius: usize) -> Self {
        let p = points_per_radius as i64;
        let h = radius / points_per_radius as f64;
        let dims = grid.dims();
        let spacing = grid.spacing();
        let l = grid.length();
        let offsets_1d = [0, 1, 2].map(|a| {
            if a == 2 && grid.is_2d() {
                vec![0.0]
            } else {
                (-p..=p).map(|m| m as f64 * h).collect::<Vec<_>>()
            }
        });
        let mats = [0, 1, 2].map(|a| {
            let n = dims[a];
            let mut m = Vec::with_capacity(offsets_1d[a].len() * n);
            for &o in &offsets_1d[a] {
                let x = center[a] + o;
                for i in 0..n {
                    let theta = 2.0 * std::f64::consts::PI * (x - i as f64 * spacing[a]) / l;
                    m.push(dirichlet_kernel(theta, n));
                }
            }
            m
        });
        let counts = [0, 1, 2].map(|a| offsets_1d[a].len());
        Self {
            grid,
            h,
            counts,
            offsets_1d,
            mats,
        }
    }

    /// Lattice spacing.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Quadrature weight per lattice point (`h³`, or `h²` on planar grids).
    pub fn cell_volume(&self) -> f64 {
        if self.grid.is_2d() {
            self.h * self.h
        } else {
            self.h * self.h * self.h
        }
    }

    /// Lattice offsets from the center in row-major order.
    pub fn offsets(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.counts.iter().product());
        for &x in &self.offsets_1d[0] {
            for &y in &self.offsets_1d[1] {
                for &z in &self.offsets_1d[2] {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    /// Interpolated values at the lattice points, ordered as [`Self::offsets`].
    pub fn interpolate(&self, values: &[f64]) -> Vec<f64> {
        let [nx, ny, nz] = self.grid.dims();
        let [mx, my, mz] = self.counts;
        debug_assert_eq!(values.len(), nx * ny * nz);

        // contract x: (mx, ny, nz)
        let mut t1 = vec![0.0; mx * ny * nz];
        let plane = ny * nz;
        for m in 0..mx {
            let row = &self.mats[0][m * nx..(m + 1) * nx];
            let out = &mut t1[m * plane..(m + 1) * plane];
            for (i, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let src = &values[i * plane..(i + 1) * plane];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }

        // contract y: (mx, my, nz)
        let mut t2 = vec![0.0; mx * my * nz];
        for m in 0..mx {
            for q in 0..my {
                let row = &self.mats[1][q * ny..(q + 1) * ny];
                let out = &mut t2[(m * my + q) * nz..(m * my + q + 1) * nz];
                for (j, &w) in row.iter().enumerate() {
                    let src = &t1[(m * ny + j) * nz..(m * ny + j + 1) * nz];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        }

        // contract z: (mx, my, mz)
        let mut out = vec![0.0; mx * my * mz];
        for line in 0..mx * my {
            let src = &t2[line * nz..(line + 1) * nz];
            for s in 0..mz {
                let row = &self.mats[2][s * nz..(s + 1) * nz];
                out[line * mz + s] = row.iter().zip(src).map(|(w, v)| w * v).sum();
            }
        }
        out
    }
}
