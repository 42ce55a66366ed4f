//! Named analytic initial conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, State, VectorField};
use crate::spectral::Spectral;

fn one() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    7
}
fn default_modes() -> i32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `n ≡ n0`, `c ≡ c0`, `u ≡ 0`.
    Quiescent {
        #[serde(default)]
        n0: f64,
        #[serde(default = "one")]
        c0: f64,
    },
    /// `n = n_mean + n_amp·sin(kx)`, `c ≡ c0`, and the Taylor–Green vortex
    /// `u = U(sin kx cos ky cos kz, −cos kx sin ky cos kz, 0)`, `k = 2π/L`.
    TaylorGreen {
        #[serde(default = "one")]
        velocity: f64,
        #[serde(default = "one")]
        n_mean: f64,
        #[serde(default = "tenth")]
        n_amp: f64,
        #[serde(default = "one")]
        c0: f64,
    },
    /// Uniform state plus random low-mode perturbations (seeded).
    PerturbedUniform {
        #[serde(default = "one")]
        n_mean: f64,
        #[serde(default = "one")]
        c_mean: f64,
        #[serde(default = "tenth")]
        amplitude: f64,
        #[serde(default = "tenth")]
        velocity: f64,
        #[serde(default = "default_modes")]
        max_mode: i32,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    /// `n = background + amplitude·exp(−|x − center|²/(2σ²))` (periodic
    /// distance), `c ≡ c0`, `u ≡ 0`. `center` defaults to the box center.
    GaussianBlob {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "tenth")]
        sigma: f64,
        #[serde(default)]
        background: f64,
        #[serde(default = "one")]
        c0: f64,
        #[serde(default)]
        center: Option<[f64; 3]>,
    },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quiescent { .. } => "quiescent",
            Self::TaylorGreen { .. } => "taylor_green",
            Self::PerturbedUniform { .. } => "perturbed_uniform",
            Self::GaussianBlob { .. } => "gaussian_blob",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::PerturbedUniform { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Builds the state at time `t` (pressure left zero; the solver
    /// recomputes it).
    pub fn build(&self, grid: Grid, t: f64) -> Result<State> {
        let k = 2.0 * std::f64::consts::PI / grid.length();
        let (n, c, u) = match *self {
            Self::Quiescent { n0, c0 } => (
                ScalarField::constant(grid, t, n0),
                ScalarField::constant(grid, t, c0),
                VectorField::zeros(grid, t),
            ),
            Self::TaylorGreen {
                velocity,
                n_mean,
                n_amp,
                c0,
            } => (
                ScalarField::from_fn(grid, t, |x| n_mean + n_amp * (k * x[0]).sin()),
                ScalarField::constant(grid, t, c0),
                VectorField::from_fn(grid, t, |x| {
                    let (sx, cx) = (k * x[0]).sin_cos();
                    let (sy, cy) = (k * x[1]).sin_cos();
                    let cz = (k * x[2]).cos();
                    [velocity * sx * cy * cz, -velocity * cx * sy * cz, 0.0]
                }),
            ),
            Self::PerturbedUniform {
                n_mean,
                c_mean,
                amplitude,
                velocity,
                max_mode,
                seed,
            } => {
                if !(0.0..1.0).contains(&amplitude) {
                    return Err(Error::Config(format!(
                        "perturbed_uniform amplitude {amplitude} must lie in [0, 1) to keep concentrations positive"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let xi_n = random_modes(grid, max_mode, &mut rng);
                let xi_c = random_modes(grid, max_mode, &mut rng);
                let raw_u = [0, 1, 2].map(|_| random_modes(grid, max_mode, &mut rng));
                let sp = Spectral::for_grid(grid);
                let mut spec = raw_u.map(|v| sp.forward(&v));
                if grid.is_2d() {
                    spec[2]
                        .iter_mut()
                        .for_each(|z| *z = num_complex::Complex64::new(0.0, 0.0));
                }
                sp.project(&mut spec);
                let comps = spec.map(|s| sp.inverse(s));
                let mut u = VectorField::new(grid, t, comps)?;
                let umax = u.max_norm();
                if umax > 0.0 {
                    for comp in u.components.iter_mut() {
                        comp.iter_mut().for_each(|v| *v *= velocity / umax);
                    }
                }
                (
                    ScalarField::new(
                        grid,
                        t,
                        xi_n.iter()
                            .map(|v| n_mean * (1.0 + amplitude * v))
                            .collect(),
                    )?,
                    ScalarField::new(
                        grid,
                        t,
                        xi_c.iter()
                            .map(|v| c_mean * (1.0 + amplitude * v))
                            .collect(),
                    )?,
                    u,
                )
            }
            Self::GaussianBlob {
                amplitude,
                sigma,
                background,
                c0,
                center,
            } => {
                if !(sigma > 0.0) {
                    return Err(Error::Config(format!(
                        "gaussian_blob sigma {sigma} must be positive"
                    )));
                }
                let l = grid.length();
                let x0 =
                    center.unwrap_or([0.5 * l, 0.5 * l, if grid.is_2d() { 0.0 } else { 0.5 * l }]);
                (
                    ScalarField::from_fn(grid, t, |x| {
                        let d = grid.displacement(x, x0);
                        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                        background + amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
                    }),
                    ScalarField::constant(grid, t, c0),
                    VectorField::zeros(grid, t),
                )
            }
        };
        State::new(n, c, u, ScalarField::zeros(grid, t))
    }
}

/// Random superposition of cosines with integer wave numbers
/// `|m_i| ≤ max_mode`, normalised to sup-norm at most 1.
fn random_modes(grid: Grid, max_mode: i32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = 2.0 * std::f64::consts::PI / grid.length();
    let mz = if grid.is_2d() { 0 } else { max_mode };
    let mut modes = Vec::new();
    for i in -max_mode..=max_mode {
        for j in -max_mode..=max_mode {
            for l in -mz..=mz {
                if (i, j, l) == (0, 0, 0) {
                    continue;
                }
                let amp: f64 = rng.random_range(-1.0..1.0);
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                modes.push(([i as f64, j as f64, l as f64], amp, phase));
            }
        }
    }
    let norm: f64 = modes
        .iter()
        .map(|m| m.1.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    (0..grid.len())
        .map(|idx| {
            let x = grid.coord(idx);
            modes
                .iter()
                .map(|(m, a, ph)| a * (k * (m[0] * x[0] + m[1] * x[1] + m[2] * x[2]) + ph).cos())
                .sum::<f64>()
                / norm
        })
        .collect()
}
