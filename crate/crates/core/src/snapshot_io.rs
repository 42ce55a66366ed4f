//! Binary snapshots and series directories.
//!
//! A snapshot file is little-endian:
//!
//! ```text
//! b"CKNS"  u32 version  u32 Nx  u32 Ny  u32 Nz  f64 L  f64 t
//! f64[N] n, c, u_x, u_y, u_z, p        (row-major, z fastest)
//! ```
//!
//! A series directory holds one file per snapshot plus `manifest.json`
//! naming the initial state and listing the later snapshots in time order.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GradPhi, Grid, ScalarField, SnapshotSeries, State, VectorField};

pub const MAGIC: &[u8; 4] = b"CKNS";
pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
const GRADPHI_FILE: &str = "gradphi.ckns";

pub fn encode_snapshot(state: &State) -> Vec<u8> {
    let grid = state.grid();
    let mut out = Vec::with_capacity(36 + 48 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in grid.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    let arrays = [
        &state.n.values,
        &state.c.values,
        &state.u.components[0],
        &state.u.components[1],
        &state.u.components[2],
        &state.p.values,
    ];
    for a in arrays {
        for v in a.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format(format!(
                "truncated snapshot: {what} needs bytes {}..{end} of {}",
                self.pos,
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8, what)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<State> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {:?} (\"CKNS\")",
            MAGIC
        )));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}, this reader handles version {FORMAT_VERSION}"
        )));
    }
    let dims = [cur.u32("Nx")?, cur.u32("Ny")?, cur.u32("Nz")?].map(|d| d as usize);
    let length = cur.f64("L")?;
    let t = cur.f64("t")?;
    let grid = Grid::new(dims, length)?;
    let len = grid.len();
    let mut arrays = Vec::with_capacity(6);
    for name in ["n", "c", "u_x", "u_y", "u_z", "p"] {
        let raw = cur.take(8 * len, name)?;
        arrays.push(
            raw.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect::<Vec<f64>>(),
        );
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after snapshot",
            bytes.len() - cur.pos
        )));
    }
    let mut it = arrays.into_iter();
    let mut next = || it.next().expect("six arrays");
    let n = ScalarField::new(grid, t, next())?;
    let c = ScalarField::new(grid, t, next())?;
    let u = VectorField::new(grid, t, [next(), next(), next()])?;
    let p = ScalarField::new(grid, t, next())?;
    State::new(n, c, u, p)
}

pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&encode_snapshot(state))?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(path)?).read_to_end(&mut bytes)?;
    decode_snapshot(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

/// Forcing as stored in a manifest; a field is kept in its own snapshot file
/// with the vector in the `u` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoredGradPhi {
    Constant([f64; 3]),
    File(String),
}

/// Everything needed to reproduce and read back a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub format_version: u32,
    pub generator: String,
    /// Echo of the configuration that produced the run.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub gradphi: StoredGradPhi,
    /// State at `t_start`.
    pub initial: Option<SnapshotEntry>,
    /// Output states after the initial one.
    pub snapshots: Vec<SnapshotEntry>,
    pub steps: usize,
    pub wall_clock_seconds: f64,
    pub aborted: Option<String>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            format: "ckns-run".into(),
            format_version: FORMAT_VERSION,
            generator: concat!("ckns ", env!("CARGO_PKG_VERSION")).into(),
            config,
            seed,
            gradphi: StoredGradPhi::Constant([0.0; 3]),
            initial: None,
            snapshots: Vec::new(),
            steps: 0,
            wall_clock_seconds: 0.0,
            aborted: None,
        }
    }

    /// Every stored entry, the initial state first.
    pub fn entries(&self) -> impl Iterator<Item = &SnapshotEntry> {
        self.initial.iter().chain(&self.snapshots)
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries().map(|s| s.t).collect()
    }
}

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:06}.ckns")
}

/// Writes every snapshot of `series` and the manifest into `dir`; the
/// first snapshot becomes the initial state. `manifest.initial`,
/// `manifest.snapshots` and `manifest.gradphi` are filled in here.
pub fn write_series(dir: &Path, series: &SnapshotSeries, manifest: &mut RunManifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    manifest.initial = None;
    manifest.snapshots.clear();
    for (i, s) in series.snapshots().iter().enumerate() {
        let file = snapshot_name(i);
        write_snapshot(&dir.join(&file), s)?;
        let entry = SnapshotEntry { file, t: s.t };
        if i == 0 {
            manifest.initial = Some(entry);
        } else {
            manifest.snapshots.push(entry);
        }
    }
    manifest.gradphi = store_gradphi(dir, &series.gradphi)?;
    write_manifest(dir, manifest)
}

/// Stores the forcing next to the snapshots of `dir`.
pub fn store_gradphi(dir: &Path, gradphi: &GradPhi) -> Result<StoredGradPhi> {
    Ok(match gradphi {
        GradPhi::Constant(g) => StoredGradPhi::Constant(*g),
        GradPhi::Field(f) => {
            let grid = f.grid;
            let holder = State::new(
                ScalarField::zeros(grid, 0.0),
                ScalarField::zeros(grid, 0.0),
                VectorField::new(grid, 0.0, f.components.clone())?,
                ScalarField::zeros(grid, 0.0),
            )?;
            write_snapshot(&dir.join(GRADPHI_FILE), &holder)?;
            StoredGradPhi::File(GRADPHI_FILE.into())
        }
    })
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(dir.join(MANIFEST), text + "\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST);
    let text =
        fs::read_to_string(&path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text)?;
    if m.format != "ckns-run" {
        return Err(Error::Format(format!(
            "{}: not a ckns run manifest (format `{}`)",
            path.display(),
            m.format
        )));
    }
    if m.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{}: manifest version {} unsupported, expected {FORMAT_VERSION}",
            path.display(),
            m.format_version
        )));
    }
    if m.times().windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Format(format!(
            "{}: snapshot times not strictly increasing",
            path.display()
        )));
    }
    Ok(m)
}

/// Reads a series directory back into memory.
pub fn read_series(dir: &Path) -> Result<(SnapshotSeries, RunManifest)> {
    let manifest = read_manifest(dir)?;
    let gradphi = match &manifest.gradphi {
        StoredGradPhi::Constant(g) => GradPhi::Constant(*g),
        StoredGradPhi::File(f) => GradPhi::Field(read_snapshot(&dir.join(f))?.u),
    };
    let mut series = SnapshotSeries::new(Vec::new(), gradphi)?;
    for e in manifest.entries() {
        let s = read_snapshot(&dir.join(&e.file))?;
        if s.t != e.t {
            return Err(Error::Format(format!(
                "{}: time {} differs from manifest time {}",
                e.file, s.t, e.t
            )));
        }
        series.push(s)?;
    }
    Ok((series, manifest))
}

/// Paths of the snapshot files of a manifest.
pub fn snapshot_paths(dir: &Path, manifest: &RunManifest) -> Vec<PathBuf> {
    manifest.entries().map(|e| dir.join(&e.file)).collect()
}
