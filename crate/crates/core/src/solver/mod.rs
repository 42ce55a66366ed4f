//! Pseudo-spectral time stepping of the chemotaxis-Navier-Stokes system
//!
//! ```text
//! ∂t n + u·∇n − Δn = −∇·(n∇c)
//! ∂t c + u·∇c − Δc = −c n
//! ∂t u + u·∇u − Δu + ∇p = −n∇φ,   ∇·u = 0
//! ```
//!
//! Diffusion is integrated exactly with the Fourier factor `e^{−|k|²dt}`;
//! the remaining terms use Heun's method in the integrating-factor frame.
//! Nonlinear products are dealiased with the 2/3 rule and the velocity
//! tendency is Leray-projected.

pub mod presets;

use log::{debug, info, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::apriori::{apriori_terms, AprioriAccumulator, AprioriRecord};
use crate::error::{Error, Result};
use crate::grid::{GradPhi, Grid, ScalarField, SnapshotSeries, State, VectorField};
use crate::pressure::solve_pressure_global;
use crate::spectral::{Spectral, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PositivityPolicy {
    #[default]
    Clip,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

/// A stretch at the end of the run stepped with a fixed small `dt`, used to
/// resolve the support of a localized test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineWindow {
    pub start: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: TimeStep,
    pub cfl: f64,
    /// Cap on automatic steps.
    pub dt_max: f64,
    pub eps_floor: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub fine: Option<FineWindow>,
    pub gradphi: GradPhi,
    pub positivity: PositivityPolicy,
    pub positivity_tol: f64,
    pub dealias: bool,
    pub output_stride: usize,
    /// Keep output states in memory. When off, the returned series holds
    /// only the initial and the last accepted state; observers see all.
    pub retain_states: bool,
}

impl SolverConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            dt: TimeStep::Auto,
            cfl: 0.4,
            dt_max: 1e-2,
            eps_floor: 1e-8,
            t_start: -1.0,
            t_end: 0.0,
            fine: None,
            gradphi: GradPhi::default(),
            positivity: PositivityPolicy::Clip,
            positivity_tol: 1e-10,
            dealias: true,
            output_stride: 1,
            retain_states: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.t_start < self.t_end) {
            return bad(format!(
                "t_start {} must precede t_end {}",
                self.t_start, self.t_end
            ));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("fixed dt {dt} must be positive"));
            }
        }
        if !(self.cfl > 0.0 && self.dt_max > 0.0 && self.eps_floor > 0.0) {
            return bad("cfl, dt_max and eps_floor must be positive".into());
        }
        if self.output_stride == 0 {
            return bad("output_stride must be positive".into());
        }
        if let Some(f) = self.fine {
            if !(f.dt > 0.0) {
                return bad(format!("fine-window dt {} must be positive", f.dt));
            }
        }
        if let GradPhi::Field(f) = &self.gradphi {
            if f.grid != self.grid {
                return Err(Error::GridMismatch(
                    "gradphi field on a different grid".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `dt = cfl·h / max(‖u‖∞ + ‖∇c‖∞, ε_floor)`, capped by `dt_max`.
pub fn cfl_dt(state: &State, cfg: &SolverConfig) -> Result<f64> {
    Ok(cfl_limit(state, cfg)?.min(cfg.dt_max))
}

fn cfl_dt_from_speed(grid: Grid, speed: f64, cfg: &SolverConfig) -> f64 {
    let h = grid.max_spacing();
    (cfg.cfl * h / speed.max(cfg.eps_floor)).min(cfg.dt_max)
}

/// Spectral integration variables.
#[derive(Clone)]
struct Spectra {
    n: Spectrum,
    c: Spectrum,
    u: [Spectrum; 3],
}

struct Tendency {
    n: Spectrum,
    c: Spectrum,
    u: [Spectrum; 3],
}

/// Per-step diagnostics emitted by the stepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub t: f64,
    pub dt: f64,
    pub mass_pre_clip: f64,
    pub min_n_pre_clip: f64,
    pub min_c_pre_clip: f64,
    pub clipped_mass: f64,
}

struct Stepper<'a> {
    sp: std::sync::Arc<Spectral>,
    cfg: &'a SolverConfig,
    gradphi_field: Option<[Vec<f64>; 3]>,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a SolverConfig) -> Self {
        let gradphi_field = match &cfg.gradphi {
            GradPhi::Constant(_) => None,
            GradPhi::Field(f) => Some(f.components.clone()),
        };
        Self {
            sp: Spectral::for_grid(cfg.grid),
            cfg,
            gradphi_field,
        }
    }

    fn to_spectra(&self, s: &State) -> Spectra {
        let sp = &self.sp;
        let mut u = [0, 1, 2].map(|a| sp.forward(&s.u.components[a]));
        sp.project(&mut u);
        Spectra {
            n: sp.forward(&s.n.values),
            c: sp.forward(&s.c.values),
            u,
        }
    }

    fn truncate(&self, data: &mut Spectrum) {
        if self.cfg.dealias {
            self.sp.dealias(data);
        }
    }

    fn rhs(&self, y: &Spectra) -> Tendency {
        let sp = &self.sp;
        let len = self.cfg.grid.len();
        // physical fields: n, c, u(3), ∇c(3)
        let mut inputs: Vec<Spectrum> = vec![y.n.clone(), y.c.clone()];
        inputs.extend(y.u.iter().cloned());
        for a in 0..3 {
            inputs.push(sp.d1(&y.c, a));
        }
        let phys: Vec<Vec<f64>> = inputs.into_par_iter().map(|s| sp.inverse(s)).collect();
        let (n, c) = (&phys[0], &phys[1]);
        let u = [&phys[2], &phys[3], &phys[4]];
        let gc = [&phys[5], &phys[6], &phys[7]];

        // physical products to transform: flux(3), c-source, uu(6), n∇φ(3 if field)
        let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
        let mut products: Vec<Vec<f64>> = Vec::with_capacity(13);
        for a in 0..3 {
            products.push((0..len).map(|i| n[i] * (u[a][i] + gc[a][i])).collect());
        }
        products.push(
            (0..len)
                .map(|i| {
                    -(u[0][i] * gc[0][i] + u[1][i] * gc[1][i] + u[2][i] * gc[2][i]) - c[i] * n[i]
                })
                .collect(),
        );
        for &(a, b) in &pairs {
            products.push((0..len).map(|i| u[a][i] * u[b][i]).collect());
        }
        if let Some(g) = &self.gradphi_field {
            for comp in g {
                products.push((0..len).map(|i| n[i] * comp[i]).collect());
            }
        }
        let spec: Vec<Spectrum> = products.par_iter().map(|p| sp.forward(p)).collect();

        let mut tn = vec![Complex64::new(0.0, 0.0); len];
        for a in 0..3 {
            let d = sp.d1(&spec[a], a);
            tn.par_iter_mut()
                .zip(d.par_iter())
                .for_each(|(t, v)| *t -= v);
        }
        self.truncate(&mut tn);

        let mut tc = spec[3].clone();
        self.truncate(&mut tc);

        let uu = |a: usize, b: usize| -> &Spectrum {
            let k = pairs
                .iter()
                .position(|&(p, q)| (p, q) == (a.min(b), a.max(b)))
                .expect("pair listed");
            &spec[4 + k]
        };
        let mut tu: [Spectrum; 3] = [0, 1, 2].map(|a| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for b in 0..3 {
                let d = sp.d1(uu(a, b), b);
                acc.par_iter_mut()
                    .zip(d.par_iter())
                    .for_each(|(t, v)| *t -= v);
            }
            match &self.cfg.gradphi {
                GradPhi::Constant(g) => {
                    let ga = g[a];
                    if ga != 0.0 {
                        acc.par_iter_mut()
                            .zip(y.n.par_iter())
                            .for_each(|(t, v)| *t -= v * ga);
                    }
                }
                GradPhi::Field(_) => {
                    acc.par_iter_mut()
                        .zip(spec[10 + a].par_iter())
                        .for_each(|(t, v)| *t -= v);
                }
            }
            acc
        });
        for t in tu.iter_mut() {
            self.truncate(t);
        }
        sp.project(&mut tu);
        Tendency {
            n: tn,
            c: tc,
            u: tu,
        }
    }

    fn decay_factors(&self, dt: f64) -> Vec<f64> {
        (0..self.cfg.grid.len())
            .into_par_iter()
            .map(|idx| (-self.sp.wavenumber_sq(idx) * dt).exp())
            .collect()
    }

    /// One integrating-factor Heun step:
    /// `y* = E(y + dt·a)`, `y⁺ = E·y + dt/2·(E·a + N(y*))`.
    fn advance(&self, y: &Spectra, dt: f64) -> Spectra {
        let e = self.decay_factors(dt);
        let a = self.rhs(y);
        let predict = |y: &Spectrum, a: &Spectrum| -> Spectrum {
            y.par_iter()
                .zip(a.par_iter())
                .zip(e.par_iter())
                .map(|((y, a), e)| (y + a * dt) * e)
                .collect()
        };
        let star = Spectra {
            n: predict(&y.n, &a.n),
            c: predict(&y.c, &a.c),
            u: [0, 1, 2].map(|k| predict(&y.u[k], &a.u[k])),
        };
        let b = self.rhs(&star);
        let correct = |y: &Spectrum, a: &Spectrum, b: &Spectrum| -> Spectrum {
            y.par_iter()
                .zip(a.par_iter())
                .zip(b.par_iter())
                .zip(e.par_iter())
                .map(|(((y, a), b), e)| y * e + (a * e + b) * (0.5 * dt))
                .collect()
        };
        Spectra {
            n: correct(&y.n, &a.n, &b.n),
            c: correct(&y.c, &a.c, &b.c),
            u: [0, 1, 2].map(|k| correct(&y.u[k], &a.u[k], &b.u[k])),
        }
    }

    fn to_state(&self, y: Spectra, t: f64) -> Result<(State, StepInfo, Spectra)> {
        let sp = &self.sp;
        let grid = self.cfg.grid;
        let mut n = sp.inverse(y.n.clone());
        let mut c = sp.inverse(y.c.clone());
        let u = [0, 1, 2].map(|a| sp.inverse(y.u[a].clone()));
        let w = grid.cell_volume();
        let mass_pre_clip = n.iter().sum::<f64>() * w;
        let min_n = n.iter().copied().fold(f64::INFINITY, f64::min);
        let min_c = c.iter().copied().fold(f64::INFINITY, f64::min);
        let mut clipped_mass = 0.0;
        let mut y = y;
        match self.cfg.positivity {
            PositivityPolicy::Reject => {
                let tol = self.cfg.positivity_tol;
                if min_n < -tol {
                    return Err(Error::Positivity {
                        field: "n".into(),
                        min: min_n,
                        tol,
                    });
                }
                if min_c < -tol {
                    return Err(Error::Positivity {
                        field: "c".into(),
                        min: min_c,
                        tol,
                    });
                }
            }
            PositivityPolicy::Clip => {
                if min_n < 0.0 {
                    clipped_mass = -n.iter().filter(|v| **v < 0.0).sum::<f64>() * w;
                    n.iter_mut().for_each(|v| *v = v.max(0.0));
                    y.n = sp.forward(&n);
                    debug!("t = {t}: clipped mass {clipped_mass:e} from n");
                }
                if min_c < 0.0 {
                    c.iter_mut().for_each(|v| *v = v.max(0.0));
                    y.c = sp.forward(&c);
                }
            }
        }
        let nf = ScalarField::new(grid, t, n)?;
        let cf = ScalarField::new(grid, t, c)?;
        let uf = VectorField::new(grid, t, u)?;
        nf.check_finite("n")?;
        cf.check_finite("c")?;
        uf.check_finite("u")?;
        let p = solve_pressure_global(&uf, &nf, &self.cfg.gradphi)?;
        let state = State::new(nf, cf, uf, p)?;
        let info = StepInfo {
            t,
            dt: 0.0,
            mass_pre_clip,
            min_n_pre_clip: min_n,
            min_c_pre_clip: min_c,
            clipped_mass,
        };
        Ok((state, info, y))
    }
}

/// Advances `s` by one step of size `dt`, recomputing the pressure.
pub fn step(s: &State, dt: f64, cfg: &SolverConfig) -> Result<(State, StepInfo)> {
    cfg.validate()?;
    if s.grid() != cfg.grid {
        return Err(Error::GridMismatch(
            "state grid differs from config grid".into(),
        ));
    }
    s.check_finite()?;
    // dt_max is a cap for automatic stepping, not a stability bound
    let speed_limit = cfl_limit(s, cfg)?;
    if dt > speed_limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation {
            dt,
            limit: speed_limit,
        });
    }
    let st = Stepper::new(cfg);
    let y = st.to_spectra(s);
    let y = st.advance(&y, dt);
    let (state, mut info, _) = st.to_state(y, s.t + dt)?;
    info.dt = dt;
    Ok((state, info))
}

/// Stability bound `cfl·h / max(‖u‖∞ + ‖∇c‖∞, ε_floor)` without the `dt_max` cap.
fn cfl_limit(s: &State, cfg: &SolverConfig) -> Result<f64> {
    let sp = Spectral::for_grid(s.grid());
    let speed = s.u.max_norm() + sp.gradient(&s.c)?.max_norm();
    Ok(cfg.cfl * cfg.grid.max_spacing() / speed.max(cfg.eps_floor))
}

/// Per-snapshot monitor record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub min_n: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub divergence: f64,
    pub u_max: f64,
    pub clipped_mass_total: f64,
    pub apriori: AprioriRecord,
}

impl MonitorRecord {
    pub const CSV_HEADER: &'static str =
        "step,t,mass,min_n,min_c,max_c,divergence,u_max,clipped_mass,U,V,int_V";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), |v| format!("{v:.12e}"));
        format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{:.6e},{:.6e},{},{},{}",
            self.step,
            self.t,
            self.mass,
            self.min_n,
            self.min_c,
            self.max_c,
            self.divergence,
            self.u_max,
            self.clipped_mass_total,
            opt(self.apriori.u),
            opt(self.apriori.v),
            opt(self.apriori.v_integral),
        )
    }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: SnapshotSeries,
    pub monitor: Vec<MonitorRecord>,
    pub steps: Vec<StepInfo>,
    /// Set when the run stopped early; the series ends at the last good state.
    pub aborted: Option<String>,
}

impl RunOutput {
    pub fn max_abs_mass_drift(&self) -> f64 {
        let m0 = self.monitor.first().map_or(0.0, |m| m.mass);
        self.steps
            .iter()
            .map(|s| (s.mass_pre_clip - m0).abs())
            .fold(0.0, f64::max)
    }
}

/// Callback invoked after every accepted step with the new state.
pub trait StepObserver {
    fn observe(&mut self, state: &State, info: &StepInfo) -> Result<()>;
}

impl<F: FnMut(&State, &StepInfo) -> Result<()>> StepObserver for F {
    fn observe(&mut self, state: &State, info: &StepInfo) -> Result<()> {
        self(state, info)
    }
}

struct NoObserver;

impl StepObserver for NoObserver {
    fn observe(&mut self, _: &State, _: &StepInfo) -> Result<()> {
        Ok(())
    }
}

/// Runs from `initial` (re-timed to `cfg.t_start`) to `cfg.t_end`.
pub fn run(cfg: &SolverConfig, initial: State) -> Result<RunOutput> {
    run_with_observer(cfg, initial, &mut NoObserver)
}

/// As [`run`], calling `observer` on the initial state and after each step.
///
/// A non-finite field or a positivity rejection stops the run: the error is
/// recorded in [`RunOutput::aborted`] and the series keeps every snapshot up
/// to the last good state.
pub fn run_with_observer(
    cfg: &SolverConfig,
    initial: State,
    observer: &mut dyn StepObserver,
) -> Result<RunOutput> {
    cfg.validate()?;
    if initial.grid() != cfg.grid {
        return Err(Error::GridMismatch(
            "initial state grid differs from config grid".into(),
        ));
    }
    initial.check_finite()?;
    let st = Stepper::new(cfg);
    let mut state = initial;
    state.set_time(cfg.t_start);
    let mut y = st.to_spectra(&state);
    // pressure and projection consistent with the spectral state
    let (s0, info0, y0) = st.to_state(y, cfg.t_start)?;
    state = s0;
    y = y0;

    let mut series = SnapshotSeries::new(Vec::new(), cfg.gradphi.clone())?;
    let mut monitor = Vec::new();
    let mut steps = Vec::new();
    let mut apriori = AprioriAccumulator::default();
    let mut clipped_total = 0.0;
    let mut aborted = None;
    let mut latest: Option<State> = None;

    let record = |state: &State,
                  step: usize,
                  clipped: f64,
                  apriori: &mut AprioriAccumulator|
     -> Result<MonitorRecord> {
        let sp = Spectral::for_grid(state.grid());
        let w = state.grid().cell_volume();
        Ok(MonitorRecord {
            step,
            t: state.t,
            mass: state.n.values.iter().sum::<f64>() * w,
            min_n: state.n.min(),
            min_c: state.c.min(),
            max_c: state.c.max(),
            divergence: sp.max_divergence(&state.u)?,
            u_max: state.u.max_norm(),
            clipped_mass_total: clipped,
            apriori: apriori.push(&apriori_terms(state)?),
        })
    };

    observer.observe(&state, &info0)?;
    monitor.push(record(&state, 0, 0.0, &mut apriori)?);
    series.push(state.clone())?;

    let tol = 1e-12 * (1.0 + cfg.t_end.abs());
    let mut k = 0usize;
    while state.t < cfg.t_end - tol {
        let t = state.t;
        let in_fine = cfg.fine.is_some_and(|f| t >= f.start - tol);
        let mut dt = match (in_fine, cfg.dt) {
            (true, _) => cfg.fine.expect("fine window").dt,
            (false, TimeStep::Fixed(dt)) => dt,
            (false, TimeStep::Auto) => {
                let sp = &st.sp;
                let gc = (0..3)
                    .map(|a| sp.inverse(sp.d1(&y.c, a)))
                    .collect::<Vec<_>>();
                let gmax = (0..cfg.grid.len())
                    .map(|i| {
                        (gc[0][i] * gc[0][i] + gc[1][i] * gc[1][i] + gc[2][i] * gc[2][i]).sqrt()
                    })
                    .fold(0.0, f64::max);
                cfl_dt_from_speed(cfg.grid, state.u.max_norm() + gmax, cfg)
            }
        };
        if !in_fine {
            if let Some(f) = cfg.fine {
                if t + dt > f.start - tol && f.start > t {
                    dt = f.start - t;
                }
            }
        }
        if t + dt > cfg.t_end - tol {
            dt = cfg.t_end - t;
        }
        // the last fine step may have been shortened by rounding; snap to t_end
        let t_new = if (t + dt - cfg.t_end).abs() <= tol {
            cfg.t_end
        } else {
            t + dt
        };
        let y_new = st.advance(&y, dt);
        let (new_state, mut info, y_clipped) = match st.to_state(y_new, t_new) {
            Ok(v) => v,
            Err(e) => {
                warn!("run aborted at t = {t_new}: {e}");
                aborted = Some(e.to_string());
                break;
            }
        };
        k += 1;
        info.dt = dt;
        clipped_total += info.clipped_mass;
        if info.clipped_mass > 0.0 {
            info!(
                "step {k}: clipped mass {:e} (total {clipped_total:e})",
                info.clipped_mass
            );
        }
        steps.push(info);
        state = new_state;
        y = y_clipped;
        observer.observe(&state, &info)?;
        let last = state.t >= cfg.t_end - tol;
        if k.is_multiple_of(cfg.output_stride) || last {
            monitor.push(record(&state, k, clipped_total, &mut apriori)?);
            if cfg.retain_states {
                series.push(state.clone())?;
            }
        }
        if !cfg.retain_states {
            latest = Some(state.clone());
        }
    }
    if let Some(s) = latest {
        series.push(s)?;
    }
    Ok(RunOutput {
        series,
        monitor,
        steps,
        aborted,
    })
}
