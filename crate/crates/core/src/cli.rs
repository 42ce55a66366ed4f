//! The `ckns` command line.
//!
//! ```text
//! ckns simulate  --config run.toml --out run/
//! ckns diagnose  --in run/ --centers grid:4 --radii dyadic:3 [--entropy] [--energy 5]
//! ckns classify  --in run/ --centers grid:4 --criterion thm19 --eps 1e-3 --alpha0 1 --bigC 1
//! ckns hausdorff --in run/ --centers grid:8 --exponent 1.6667 --delta 0.25
//! ckns verify    [--fast]
//! ```
//!
//! Centers are `x,y,z;x,y,z;…` or `grid:K` (a cell-centred `K`-lattice over
//! the box). Radii are `dyadic:K` (`2^{−k}`, `k = 1..=K`) or `list:r1,r2,…`.
//! Reports go to `--report <file>` or standard output.
//!
//! Exit codes: 0 ok, 1 usage or input error, 2 numerical failure,
//! 3 verification failure. `CKN_THREADS` caps the worker threads.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::diagnostics::constants::{lambda_constants, Constants};
use crate::diagnostics::energy::{local_energy_residual, Placement};
use crate::diagnostics::entropy::{entropy_norms, luxemburg_norm};
use crate::diagnostics::quantities::quantities;
use crate::diagnostics::test_function::PhiN;
use crate::error::{Error, Result};
use crate::grid::{Grid, ParabolicCylinder, SnapshotSeries, State};
use crate::regularity::{
    classify_thm15, classify_thm16, classify_thm19, flag_singular_candidates, vitali_cover,
    Criterion, RegularityVerdict, Thresholds,
};
use crate::report::{CylinderEntry, EnergyEntry, EntropyEntry, Report, SingularSetEntry};
use crate::sampling::{Sampling, SeriesSource};
use crate::snapshot_io::{
    read_series, snapshot_name, store_gradphi, write_manifest, write_snapshot, RunManifest,
    SnapshotEntry,
};
use crate::solver::{run_with_observer, StepInfo};
use crate::verify::{run_all, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ckns",
    version,
    about = "Chemotaxis-Navier-Stokes solver and partial-regularity diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write snapshots, manifest and monitor log.
    Simulate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Scale-invariant quantities, entropy and energy terms of a stored run.
    Diagnose(DiagnoseArgs),
    /// Regularity verdicts over a set of centers.
    Classify(ClassifyArgs),
    /// Vitali cover and parabolic premeasure of the flagged set.
    Hausdorff(HausdorffArgs),
    /// Run the property checks.
    Verify {
        /// Solver checks on a 32³ grid.
        #[arg(long)]
        fast: bool,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Run directory written by `simulate`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// `grid:<K>` for a cell-centred `K`-lattice, or `x,y,z;x,y,z;…`.
    #[arg(long)]
    pub centers: CenterSpec,
    /// End time of the cylinders; defaults to the last snapshot.
    #[arg(long)]
    pub t0: Option<f64>,
    /// `native` or `spectral:<points per radius>`.
    #[arg(long, default_value = "spectral:16")]
    pub sampling: SamplingSpec,
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// `dyadic:<K>` for `2^{−k}`, `k = 1..=K`, or `list:r1,r2,…`.
    #[arg(long, default_value = "dyadic:3")]
    pub radii: RadiusSpec,
    /// Entropy norms of `n` at `t0` on every requested ball.
    #[arg(long)]
    pub entropy: bool,
    /// Local energy inequality at `t0` with `ψ = φ_n` for this level.
    #[arg(long)]
    pub energy: Option<i32>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// thm15, thm16_i, thm16_ii or thm19.
    #[arg(long)]
    pub criterion: Criterion,
    /// `ε1` for thm15/thm16 and `ε3` for thm19.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// The constant `C` in the thm16 thresholds.
    #[arg(long = "bigC", default_value_t = 1.0)]
    pub big_c: f64,
    /// Radii `2^{−k}`, `k = 1..=K`, searched by thm19.
    #[arg(long, default_value = "dyadic:5")]
    pub radii: RadiusSpec,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    /// Run directory to flag; alternatively give `--flagged`.
    #[arg(long = "in", requires = "centers")]
    pub input: Option<PathBuf>,
    /// Centers to flag, as for `classify`.
    #[arg(long)]
    pub centers: Option<CenterSpec>,
    /// Table `x,y,z,t,r` of flagged cylinders.
    #[arg(long, conflicts_with = "input")]
    pub flagged: Option<PathBuf>,
    /// Exponent `s` of the premeasure `Σ r^s`.
    #[arg(long, default_value_t = 5.0 / 3.0)]
    pub exponent: f64,
    /// Largest radius allowed in the covering.
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value = "thm19")]
    pub criterion: Criterion,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long = "bigC", default_value_t = 1.0)]
    pub big_c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value = "spectral:16")]
    pub sampling: SamplingSpec,
    /// Finest level `K` of the radii `2^{−k}` tried when flagging.
    #[arg(long, default_value_t = 5)]
    pub levels: i32,
    /// Writes the flagged set as a point/radius table.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Ball centers.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterSpec {
    Points(Vec<[f64; 3]>),
    Lattice(usize),
}

impl FromStr for CenterSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(k) = s.strip_prefix("grid:") {
            let k: usize = k
                .parse()
                .map_err(|_| format!("bad lattice size in `{s}`"))?;
            if k == 0 {
                return Err("lattice size must be positive".into());
            }
            return Ok(Self::Lattice(k));
        }
        let points = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let v: Vec<f64> = p
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad coordinate `{x}` in `{p}`"))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                <[f64; 3]>::try_from(v).map_err(|_| format!("center `{p}` needs three coordinates"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if points.is_empty() {
            return Err("no centers given".into());
        }
        Ok(Self::Points(points))
    }
}

impl CenterSpec {
    pub fn centers(&self, grid: &Grid) -> Vec<[f64; 3]> {
        match self {
            Self::Points(p) => p.clone(),
            Self::Lattice(k) => {
                let dims = grid.dims();
                let axis = |a: usize| -> Vec<f64> {
                    if dims[a] == 1 {
                        vec![0.0]
                    } else {
                        (0..*k)
                            .map(|i| (i as f64 + 0.5) * grid.length() / *k as f64)
                            .collect()
                    }
                };
                let (xs, ys, zs) = (axis(0), axis(1), axis(2));
                let mut out = Vec::new();
                for &x in &xs {
                    for &y in &ys {
                        for &z in &zs {
                            out.push([x, y, z]);
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiusSpec {
    Dyadic(i32),
    List(Vec<f64>),
}

impl FromStr for RadiusSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(k) = s.strip_prefix("dyadic:") {
            let k: i32 = k.parse().map_err(|_| format!("bad level in `{s}`"))?;
            if k < 1 {
                return Err("dyadic level must be at least 1".into());
            }
            return Ok(Self::Dyadic(k));
        }
        if let Some(list) = s.strip_prefix("list:") {
            let r: Vec<f64> = list
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad radius `{x}`"))
                })
                .collect::<std::result::Result<_, _>>()?;
            if r.is_empty() || r.iter().any(|v| !(*v > 0.0)) {
                return Err("radii must be positive".into());
            }
            return Ok(Self::List(r));
        }
        Err(format!("expected dyadic:<K> or list:<r1,r2,…>, got `{s}`"))
    }
}

impl RadiusSpec {
    pub fn radii(&self) -> Vec<f64> {
        match self {
            Self::Dyadic(k) => (1..=*k).map(|k| 0.5_f64.powi(k)).collect(),
            Self::List(r) => r.clone(),
        }
    }

    fn max_level(&self) -> Result<i32> {
        match self {
            Self::Dyadic(k) => Ok(*k),
            Self::List(_) => Err(Error::InvalidArgument(
                "thm19 needs --radii dyadic:<K>".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec(pub Sampling);

impl FromStr for SamplingSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "native" {
            return Ok(Self(Sampling::Native));
        }
        if let Some(p) = s.strip_prefix("spectral:") {
            let points_per_radius: usize =
                p.parse().map_err(|_| format!("bad point count in `{s}`"))?;
            if points_per_radius == 0 {
                return Err("points per radius must be positive".into());
            }
            return Ok(Self(Sampling::Spectral { points_per_radius }));
        }
        Err(format!("expected native or spectral:<N>, got `{s}`"))
    }
}

/// Exit code of a library error: input problems are usage errors, the rest
/// numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::Format(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("CKN_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .is_err()
                {
                    log::debug!("thread pool already initialised");
                }
            }
            _ => log::warn!("ignoring CKN_THREADS = `{v}`"),
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Diagnose(a) => diagnose(&a),
        Command::Classify(a) => classify(&a),
        Command::Hausdorff(a) => hausdorff(&a),
        Command::Verify { fast, report } => verify(fast, report.as_deref()),
    }
}

fn emit(report: &Report, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => report.write(p),
        None => {
            std::io::stdout().write_all(report.to_json()?.as_bytes())?;
            Ok(())
        }
    }
}

/// Runs a configuration, streaming every `stride`-th state into `out`.
pub fn simulate(config: &Path, out: &Path) -> Result<i32> {
    let rc = RunConfig::load(config)?;
    let mut cfg = rc.solver_config()?;
    let initial = rc.initial_state()?;
    let stride = cfg.output_stride;
    cfg.retain_states = false;
    fs::create_dir_all(out)?;

    let mut manifest = RunManifest::new(rc.to_json(), rc.seed());
    manifest.gradphi = store_gradphi(out, &cfg.gradphi)?;
    let tol = 1e-12 * (1.0 + cfg.t_end.abs());
    let t_end = cfg.t_end;
    let started = Instant::now();
    let mut calls = 0usize;
    let mut written: Vec<SnapshotEntry> = Vec::new();
    let mut observer = |s: &State, _: &StepInfo| -> Result<()> {
        let k = calls;
        calls += 1;
        if k == 0 || k.is_multiple_of(stride) || s.t >= t_end - tol {
            let file = snapshot_name(k);
            write_snapshot(&out.join(&file), s)?;
            written.push(SnapshotEntry { file, t: s.t });
        }
        Ok(())
    };
    let result = run_with_observer(&cfg, initial, &mut observer)?;

    // an aborted run ends at its last good state
    if result.aborted.is_some() {
        if let Some(last) = result.series.snapshots().last() {
            if written.last().is_none_or(|e| e.t < last.t) {
                let file = snapshot_name(result.steps.len());
                write_snapshot(&out.join(&file), last)?;
                written.push(SnapshotEntry { file, t: last.t });
            }
        }
    }
    let mut entries = written.into_iter();
    manifest.initial = entries.next();
    manifest.snapshots = entries.collect();
    manifest.steps = result.steps.len();
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.aborted = result.aborted.clone();
    write_manifest(out, &manifest)?;

    let mut csv = String::from(crate::solver::MonitorRecord::CSV_HEADER);
    csv.push('\n');
    for r in &result.monitor {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    fs::write(out.join(&rc.output.monitor), csv)?;

    println!(
        "{} steps, {} snapshots, t = {} .. {}, {:.1} s",
        manifest.steps,
        manifest.snapshots.len() + usize::from(manifest.initial.is_some()),
        cfg.t_start,
        result.series.last_time().unwrap_or(cfg.t_start),
        manifest.wall_clock_seconds
    );
    if let Some(reason) = &result.aborted {
        eprintln!(
            "error: run aborted: {reason}; last good state kept in {}",
            out.display()
        );
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

struct Loaded {
    series: SnapshotSeries,
    constants: Constants,
    t0: f64,
    grid: Grid,
}

fn load(dir: &Path, t0: Option<f64>, alpha0: f64) -> Result<Loaded> {
    let (series, _) = read_series(dir)?;
    let first = series
        .snapshots()
        .first()
        .ok_or_else(|| Error::Format(format!("{}: run has no snapshots", dir.display())))?;
    let grid = first.grid();
    let constants = lambda_constants(&first.c, &series.gradphi, alpha0)?;
    let t0 = t0.unwrap_or_else(|| series.last_time().expect("non-empty series"));
    Ok(Loaded {
        series,
        constants,
        t0,
        grid,
    })
}

fn nearest_state(series: &SnapshotSeries, t: f64) -> &State {
    series
        .snapshots()
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .expect("non-empty series")
}

pub fn diagnose(a: &DiagnoseArgs) -> Result<i32> {
    let s = &a.source;
    let run = load(&s.input, s.t0, s.alpha0)?;
    let source = SeriesSource::new(&run.series, s.sampling.0)?;
    let centers = s.centers.centers(&run.grid);
    let radii = a.radii.radii();
    let mut report = Report::new("diagnose");
    report.source = Some(s.input.display().to_string());
    report.constants = Some(run.constants);

    let mut failures = 0;
    for &center in &centers {
        for &r in &radii {
            let mut entry = CylinderEntry {
                center,
                t0: run.t0,
                r,
                quantities: None,
                flags: Vec::new(),
            };
            match ParabolicCylinder::new(center, run.t0, r).and_then(|q| {
                q.check_fits(&run.grid)?;
                quantities(&source, &q)
            }) {
                Ok(q) => entry.quantities = Some(q),
                Err(e) => {
                    failures += 1;
                    entry.flags.push(e.to_string());
                }
            }
            report.cylinders.push(entry);
        }
    }

    if a.entropy {
        let state = nearest_state(&run.series, run.t0);
        let luxemburg = luxemburg_norm(&state.n.values, run.grid.cell_volume());
        for &center in &centers {
            for &r in &radii {
                match entropy_norms(&state.n, center, r) {
                    Ok(norms) => report.entropy.push(EntropyEntry {
                        center,
                        t: state.t,
                        r,
                        norms,
                        luxemburg,
                    }),
                    Err(e) => log::warn!("entropy at {center:?}, r = {r}: {e}"),
                }
            }
        }
    }

    if let Some(level) = a.energy {
        let psi = PhiN::new(level);
        for &center in &centers {
            let at = Placement { center, t0: run.t0 };
            match local_energy_residual(&source, &psi, at, run.t0, &run.constants) {
                Ok(rec) => report.energy.push(EnergyEntry {
                    center,
                    t0: run.t0,
                    level,
                    worst_ratio: rec.margin / rec.rhs.abs().max(f64::MIN_POSITIVE),
                    records: vec![rec],
                }),
                Err(e) => log::warn!("energy inequality at {center:?}: {e}"),
            }
        }
    }

    emit(&report, a.report.as_deref())?;
    let total = report.cylinders.len();
    if total > 0 && failures == total {
        eprintln!("error: no requested cylinder could be evaluated");
        return Ok(EXIT_NUMERICAL);
    }
    if failures > 0 {
        eprintln!("{failures} of {total} cylinders flagged");
    }
    Ok(EXIT_OK)
}

fn thresholds(criterion: Criterion, eps: f64, big_c: f64) -> Result<Thresholds> {
    if !(eps > 0.0 && big_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--eps {eps} and --bigC {big_c} must be positive"
        )));
    }
    let mut t = Thresholds {
        c: big_c,
        ..Default::default()
    };
    match criterion {
        Criterion::Thm19 => t.eps3 = eps,
        _ => t.eps1 = eps,
    }
    Ok(t)
}

pub fn classify(a: &ClassifyArgs) -> Result<i32> {
    let s = &a.source;
    let run = load(&s.input, s.t0, s.alpha0)?;
    let source = SeriesSource::new(&run.series, s.sampling.0)?;
    let eps = thresholds(a.criterion, a.eps, a.big_c)?;
    let levels = a.radii.max_level().unwrap_or(5);
    let k = &run.constants;
    let mut report = Report::new("classify");
    report.source = Some(s.input.display().to_string());
    report.constants = Some(*k);
    for center in s.centers.centers(&run.grid) {
        let v: RegularityVerdict = match a.criterion {
            Criterion::Thm15 => classify_thm15(&source, center, run.t0, k, &eps)?,
            Criterion::Thm16I | Criterion::Thm16Ii => {
                classify_thm16(&source, center, run.t0, a.criterion, k, &eps)?
            }
            Criterion::Thm19 => {
                if let RadiusSpec::List(_) = a.radii {
                    a.radii.max_level()?;
                }
                classify_thm19(&source, center, run.t0, k, &eps, 1..=levels)?
            }
        };
        report.verdicts.push(v);
    }
    emit(&report, a.report.as_deref())?;
    let regular = report.verdicts.iter().filter(|v| v.is_regular()).count();
    eprintln!(
        "{} criterion: {regular} of {} centers regular ({:.1}%)",
        a.criterion.name(),
        report.verdicts.len(),
        100.0 * regular as f64 / report.verdicts.len().max(1) as f64
    );
    Ok(EXIT_OK)
}

/// `Σ r^s` over a covering.
pub fn premeasure(cover: &[ParabolicCylinder], exponent: f64) -> f64 {
    cover.iter().map(|q| q.radius.powf(exponent)).sum()
}

pub const TABLE_HEADER: &str = "x,y,z,t,r";

/// Reads a flagged-set table with header `x,y,z,t,r`.
pub fn read_flagged(path: &Path) -> Result<Vec<ParabolicCylinder>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().starts_with(TABLE_HEADER) => {}
        _ => {
            return Err(Error::Format(format!(
                "{}: expected header `{TABLE_HEADER}`",
                path.display()
            )))
        }
    }
    lines
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .take(5)
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if v.len() != 5 {
                return Err(Error::Format(format!(
                    "{}:{}: expected 5 columns",
                    path.display(),
                    i + 1
                )));
            }
            ParabolicCylinder::new([v[0], v[1], v[2]], v[3], v[4])
        })
        .collect()
}

/// Writes the flagged set with a `chosen` column marking the cover.
pub fn write_flagged(
    path: &Path,
    flagged: &[ParabolicCylinder],
    chosen: &[ParabolicCylinder],
) -> Result<()> {
    let mut out = format!("{TABLE_HEADER},chosen\n");
    for q in flagged {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            q.center[0],
            q.center[1],
            q.center[2],
            q.t0,
            q.radius,
            u8::from(chosen.contains(q))
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn hausdorff(a: &HausdorffArgs) -> Result<i32> {
    if !(a.delta > 0.0) || !(a.exponent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--delta {} and --exponent {} must be positive",
            a.delta, a.exponent
        )));
    }
    let mut report = Report::new("hausdorff");
    let flagged = match (&a.flagged, &a.input, &a.centers) {
        (Some(path), _, _) => {
            let f = read_flagged(path)?;
            if let Some(q) = f.iter().find(|q| q.radius > a.delta) {
                return Err(Error::InvalidArgument(format!(
                    "flagged radius {} exceeds --delta {}",
                    q.radius, a.delta
                )));
            }
            report.source = Some(path.display().to_string());
            f
        }
        (None, Some(dir), Some(centers)) => {
            let run = load(dir, a.t0, a.alpha0)?;
            let source = SeriesSource::new(&run.series, a.sampling.0)?;
            let threshold =
                thresholds(a.criterion, a.eps, a.big_c)?.threshold(a.criterion, &run.constants);
            // only radii 2^{−k} ≤ δ enter the covering
            let k_min = (-a.delta.log2()).ceil().max(0.0) as i32;
            if k_min > a.levels {
                return Err(Error::InvalidArgument(format!(
                    "no dyadic radius up to level {} is below δ = {}",
                    a.levels, a.delta
                )));
            }
            report.source = Some(dir.display().to_string());
            report.constants = Some(run.constants);
            let centers = centers.centers(&run.grid);
            flag_singular_candidates(
                &source,
                &centers,
                run.t0,
                a.criterion,
                threshold,
                k_min..=a.levels,
            )?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give --flagged <table> or --in <dir> --centers <spec>".into(),
            ))
        }
    };
    let estimate = vitali_cover(&flagged);
    let value = premeasure(&estimate.chosen, a.exponent);
    if let Some(path) = &a.export {
        write_flagged(path, &estimate.flagged, &estimate.chosen)?;
    }
    eprintln!(
        "{} flagged, {} in the cover, P^{:.4} premeasure {value:.6e} at δ = {}",
        estimate.flagged.len(),
        estimate.chosen.len(),
        a.exponent,
        a.delta
    );
    report.singular_set = Some(SingularSetEntry {
        exponent: a.exponent,
        premeasure: value,
        estimate,
    });
    emit(&report, a.report.as_deref())?;
    Ok(EXIT_OK)
}

pub fn verify(fast: bool, report_path: Option<&Path>) -> Result<i32> {
    let v = run_all(VerifyOptions { fast });
    let passed = v.passed();
    for c in &v.checks {
        println!("{}", c.line());
    }
    if let Some(path) = report_path {
        let mut report = Report::new("verify");
        report.checks = v.checks.clone();
        report.energy = v.energy.into_iter().collect();
        report.write(path)?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}
