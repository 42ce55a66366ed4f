//! Run configuration in TOML.
//!
//! ```toml
//! [grid]
//! n = 64                  # points per axis (power of two)
//! length = 6.283185307179586
//! planar = false
//!
//! [time]
//! t_start = -1.0
//! t_end = 0.0
//! dt = "auto"             # or a fixed step
//! cfl = 0.4
//! dt_max = 0.01
//! fine_start = -0.015625  # optional fixed-step window at the end
//! fine_dt = 0.000244140625
//! positivity = "clip"     # or "reject"
//!
//! [initial]
//! preset = "taylor_green" # quiescent | taylor_green | perturbed_uniform | gaussian_blob
//! velocity = 1.0
//! # file = "start.ckns"   # alternatively, a snapshot file
//!
//! [forcing]
//! gradphi = [0.0, 0.0, 1.0]
//!
//! [output]
//! stride = 1
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GradPhi, Grid, State};
use crate::snapshot_io::read_snapshot;
use crate::solver::presets::InitialCondition;
use crate::solver::{FineWindow, PositivityPolicy, SolverConfig, TimeStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
    #[serde(default)]
    pub planar: bool,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: StepSpec,
    pub cfl: f64,
    pub dt_max: f64,
    pub eps_floor: f64,
    pub fine_start: Option<f64>,
    pub fine_dt: Option<f64>,
    pub positivity: PositivityPolicy,
    pub positivity_tol: f64,
    pub dealias: bool,
}

impl Default for TimeSection {
    fn default() -> Self {
        let d = SolverConfig::new(Grid::cubic(2, 1.0).expect("valid grid"));
        Self {
            t_start: d.t_start,
            t_end: d.t_end,
            dt: StepSpec::Named("auto".into()),
            cfl: d.cfl,
            dt_max: d.dt_max,
            eps_floor: d.eps_floor,
            fine_start: None,
            fine_dt: None,
            positivity: d.positivity,
            positivity_tol: d.positivity_tol,
            dealias: d.dealias,
        }
    }
}

/// `[initial]`: a named preset with parameters, or a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InitialSection {
    File { file: PathBuf },
    Preset(InitialCondition),
}

impl<'de> Deserialize<'de> for InitialSection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let table = toml::Table::deserialize(d)?;
        if let Some(file) = table.get("file") {
            if table.len() > 1 {
                return Err(D::Error::custom(
                    "`file` cannot be combined with preset parameters",
                ));
            }
            let file = file
                .as_str()
                .ok_or_else(|| D::Error::custom("`file` must be a string"))?;
            return Ok(Self::File { file: file.into() });
        }
        InitialCondition::deserialize(toml::Value::Table(table))
            .map(Self::Preset)
            .map_err(|e| D::Error::custom(e.message()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub gradphi: [f64; 3],
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self { gradphi: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Keep every `stride`-th step, plus the final state.
    pub stride: usize,
    pub monitor: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            stride: 1,
            monitor: "monitor.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.grid.planar {
            Grid::planar(self.grid.n, self.grid.length)
        } else {
            Grid::cubic(self.grid.n, self.grid.length)
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let t = &self.time;
        let mut cfg = SolverConfig::new(self.grid()?);
        cfg.t_start = t.t_start;
        cfg.t_end = t.t_end;
        cfg.dt = match &t.dt {
            StepSpec::Fixed(dt) => TimeStep::Fixed(*dt),
            StepSpec::Named(s) if s == "auto" => TimeStep::Auto,
            StepSpec::Named(s) => {
                return Err(Error::Config(format!(
                    "time.dt: expected \"auto\" or a number, got `{s}`"
                )))
            }
        };
        cfg.cfl = t.cfl;
        cfg.dt_max = t.dt_max;
        cfg.eps_floor = t.eps_floor;
        cfg.fine = match (t.fine_start, t.fine_dt) {
            (Some(start), Some(dt)) => Some(FineWindow { start, dt }),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "time.fine_start and time.fine_dt must be given together".into(),
                ))
            }
        };
        cfg.positivity = t.positivity;
        cfg.positivity_tol = t.positivity_tol;
        cfg.dealias = t.dealias;
        cfg.gradphi = GradPhi::Constant(self.forcing.gradphi);
        cfg.output_stride = self.output.stride;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn initial_state(&self) -> Result<State> {
        let grid = self.grid()?;
        match &self.initial {
            InitialSection::Preset(ic) => ic.build(grid, self.time.t_start),
            InitialSection::File { file } => {
                let s = read_snapshot(&self.base_dir.join(file))?;
                if s.grid() != grid {
                    return Err(Error::Config(format!(
                        "initial file {} is not on the [grid] grid",
                        file.display()
                    )));
                }
                Ok(s)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.initial {
            InitialSection::Preset(ic) => ic.seed(),
            InitialSection::File { .. } => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
