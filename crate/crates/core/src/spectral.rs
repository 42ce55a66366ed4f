//! Fourier transforms and spectral differential calculus on periodic grids.
//!
//! First-derivative symbols zero the Nyquist mode so that odd derivatives of
//! real fields stay real; second-derivative symbols along one axis keep the
//! full `-(k)^2`, which is exact for the Nyquist cosine.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{Grid, ScalarField, VectorField};

pub type Spectrum = Vec<Complex64>;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Transform plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: Grid,
    plans: [Option<AxisPlan>; 3],
    /// First-derivative wavenumbers (Nyquist zeroed).
    k1: [Vec<f64>; 3],
    /// Squared wavenumbers (Nyquist kept).
    k2: [Vec<f64>; 3],
    /// 2/3-rule retention flags per axis.
    keep: [Vec<bool>; 3],
}

static CACHE: OnceLock<Mutex<Vec<Arc<Spectral>>>> = OnceLock::new();

impl Spectral {
    /// Shared instance for `grid` (plans are cached process-wide).
    pub fn for_grid(grid: Grid) -> Arc<Spectral> {
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().expect("spectral cache poisoned");
        if let Some(s) = guard.iter().find(|s| s.grid == grid) {
            return Arc::clone(s);
        }
        let s = Arc::new(Spectral::new(grid));
        guard.push(Arc::clone(&s));
        s
    }

    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let dims = grid.dims();
        let plans = [0, 1, 2].map(|a| {
            (dims[a] > 1).then(|| AxisPlan {
                forward: planner.plan_fft_forward(dims[a]),
                inverse: planner.plan_fft_inverse(dims[a]),
            })
        });
        let two_pi_over_l = 2.0 * std::f64::consts::PI / grid.length();
        let k1 = [0, 1, 2].map(|a| {
            let n = dims[a];
            (0..n)
                .map(|i| {
                    let m = signed_mode(i, n);
                    if n > 1 && 2 * m.unsigned_abs() as usize == n {
                        0.0
                    } else {
                        two_pi_over_l * m as f64
                    }
                })
                .collect()
        });
        let k2 = [0, 1, 2].map(|a| {
            let n = dims[a];
            (0..n)
                .map(|i| {
                    let k = two_pi_over_l * signed_mode(i, n) as f64;
                    k * k
                })
                .collect()
        });
        let keep = [0, 1, 2].map(|a| {
            let n = dims[a];
            (0..n)
                .map(|i| 3 * signed_mode(i, n).unsigned_abs() as usize <= n)
                .collect()
        });
        Self {
            grid,
            plans,
            k1,
            k2,
            keep,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// First-derivative wavenumber vector of the mode stored at `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.grid.unravel(idx);
        [self.k1[0][i], self.k1[1][j], self.k1[2][k]]
    }

    /// `|k|^2` (Nyquist kept) of the mode at `idx`.
    #[inline]
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let [i, j, k] = self.grid.unravel(idx);
        self.k2[0][i] + self.k2[1][j] + self.k2[2][k]
    }

    #[inline]
    fn axis_k2(&self, axis: usize, idx: usize) -> f64 {
        let m = self.grid.unravel(idx);
        self.k2[axis][m[axis]]
    }

    /// Whether the mode at `idx` survives the 2/3 rule.
    #[inline]
    pub fn retained(&self, idx: usize) -> bool {
        let [i, j, k] = self.grid.unravel(idx);
        self.keep[0][i] && self.keep[1][j] && self.keep[2][k]
    }

    pub fn forward(&self, values: &[f64]) -> Spectrum {
        let mut data: Spectrum = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        data
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse(&self, mut data: Spectrum) -> Vec<f64> {
        self.transform(&mut data, false);
        let scale = 1.0 / self.grid.len() as f64;
        data.into_iter().map(|z| z.re * scale).collect()
    }

    pub fn dealias(&self, data: &mut [Complex64]) {
        data.par_iter_mut().enumerate().for_each(|(idx, z)| {
            if !self.retained(idx) {
                *z = Complex64::new(0.0, 0.0);
            }
        });
    }

    /// `∂_axis` applied in spectral space.
    pub fn d1(&self, data: &[Complex64], axis: usize) -> Spectrum {
        data.par_iter()
            .enumerate()
            .map(|(idx, &z)| {
                let k = self.wavevector(idx)[axis];
                Complex64::new(-k * z.im, k * z.re)
            })
            .collect()
    }

    /// `∂_a ∂_b` applied in spectral space.
    pub fn d2(&self, data: &[Complex64], a: usize, b: usize) -> Spectrum {
        data.par_iter()
            .enumerate()
            .map(|(idx, &z)| {
                let sym = if a == b {
                    -self.axis_k2(a, idx)
                } else {
                    let k = self.wavevector(idx);
                    -k[a] * k[b]
                };
                z * sym
            })
            .collect()
    }

    pub fn laplacian_spec(&self, data: &[Complex64]) -> Spectrum {
        data.par_iter()
            .enumerate()
            .map(|(idx, &z)| z * -self.wavenumber_sq(idx))
            .collect()
    }

    /// Solves `-Δ f = g` for zero-mean `f`; the `k = 0` mode of `g` is discarded.
    pub fn solve_neg_laplacian(&self, data: &[Complex64]) -> Spectrum {
        data.par_iter()
            .enumerate()
            .map(|(idx, &z)| {
                let k2 = self.wavenumber_sq(idx);
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z / k2
                }
            })
            .collect()
    }

    /// Leray projection onto divergence-free fields (in place).
    pub fn project(&self, u: &mut [Spectrum; 3]) {
        let [ux, uy, uz] = u;
        ux.par_iter_mut()
            .zip(uy.par_iter_mut())
            .zip(uz.par_iter_mut())
            .enumerate()
            .for_each(|(idx, ((a, b), c))| {
                let k = self.wavevector(idx);
                let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if kk == 0.0 {
                    return;
                }
                let kdotu = *a * k[0] + *b * k[1] + *c * k[2];
                let s = kdotu / kk;
                *a -= s * k[0];
                *b -= s * k[1];
                *c -= s * k[2];
            });
    }

    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        f.check_finite("gradient input")?;
        let spec = self.forward(&f.values);
        let components = [0, 1, 2].map(|a| self.inverse(self.d1(&spec, a)));
        VectorField::new(f.grid, f.time, components)
    }

    pub fn divergence(&self, v: &VectorField) -> Result<ScalarField> {
        v.check_finite("divergence input")?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for a in 0..3 {
            let d = self.d1(&self.forward(&v.components[a]), a);
            acc.par_iter_mut()
                .zip(d.par_iter())
                .for_each(|(s, x)| *s += x);
        }
        ScalarField::new(v.grid, v.time, self.inverse(acc))
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        f.check_finite("laplacian input")?;
        let spec = self.forward(&f.values);
        ScalarField::new(f.grid, f.time, self.inverse(self.laplacian_spec(&spec)))
    }

    /// Symmetric Hessian `∂_a ∂_b f`, stored as a full 3×3 table.
    pub fn hessian(&self, f: &ScalarField) -> Result<[[Vec<f64>; 3]; 3]> {
        f.check_finite("hessian input")?;
        let spec = self.forward(&f.values);
        let mut h: [[Vec<f64>; 3]; 3] = Default::default();
        for a in 0..3 {
            for b in a..3 {
                let v = self.inverse(self.d2(&spec, a, b));
                if a != b {
                    h[b][a] = v.clone();
                }
                h[a][b] = v;
            }
        }
        Ok(h)
    }

    /// `∂_b v_a`, indexed `[a][b]`.
    pub fn vector_gradient(&self, v: &VectorField) -> Result<[[Vec<f64>; 3]; 3]> {
        v.check_finite("vector gradient input")?;
        let mut g: [[Vec<f64>; 3]; 3] = Default::default();
        for a in 0..3 {
            let spec = self.forward(&v.components[a]);
            for b in 0..3 {
                g[a][b] = self.inverse(self.d1(&spec, b));
            }
        }
        Ok(g)
    }

    /// Max-norm of the spectral divergence of `v`.
    pub fn max_divergence(&self, v: &VectorField) -> Result<f64> {
        Ok(self.divergence(v)?.max_abs())
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let [nx, ny, nz] = self.grid.dims();
        // z: contiguous lines
        if let Some(plan) = &self.plans[2] {
            let fft = if forward {
                &plan.forward
            } else {
                &plan.inverse
            };
            data.par_chunks_mut(nz).for_each_init(
                || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                |scratch, line| fft.process_with_scratch(line, scratch),
            );
        }
        // y: strided lines inside each x-slab
        if let Some(plan) = &self.plans[1] {
            let fft = if forward {
                &plan.forward
            } else {
                &plan.inverse
            };
            data.par_chunks_mut(ny * nz).for_each_init(
                || {
                    (
                        vec![Complex64::new(0.0, 0.0); ny],
                        vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                    )
                },
                |(line, scratch), slab| {
                    for k in 0..nz {
                        for j in 0..ny {
                            line[j] = slab[j * nz + k];
                        }
                        fft.process_with_scratch(line, scratch);
                        for j in 0..ny {
                            slab[j * nz + k] = line[j];
                        }
                    }
                },
            );
        }
        // x: transpose so lines are contiguous, transform, transpose back
        if let Some(plan) = &self.plans[0] {
            let fft = if forward {
                &plan.forward
            } else {
                &plan.inverse
            };
            let plane = ny * nz;
            let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
            {
                let src: &[Complex64] = data;
                tmp.par_chunks_mut(nx).enumerate().for_each_init(
                    || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                    |scratch, (jk, line)| {
                        for (i, z) in line.iter_mut().enumerate() {
                            *z = src[i * plane + jk];
                        }
                        fft.process_with_scratch(line, scratch);
                    },
                );
            }
            let t: &[Complex64] = &tmp;
            data.par_chunks_mut(plane)
                .enumerate()
                .for_each(|(i, slab)| {
                    for (jk, z) in slab.iter_mut().enumerate() {
                        *z = t[jk * nx + i];
                    }
                });
        }
    }
}

/// Signed mode number for storage index `i` of an `n`-point transform.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) || n == 1 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
