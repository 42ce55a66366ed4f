use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ckns::cli::{self, CenterSpec, RadiusSpec};
use ckns::grid::{Grid, ParabolicCylinder, ScalarField, State, VectorField};
use ckns::report::Report;
use ckns::snapshot_io::{
    decode_snapshot, encode_snapshot, read_manifest, read_series, read_snapshot,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ckns"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_cli(args: &[&str]) -> i32 {
    let mut full = vec!["ckns"];
    full.extend_from_slice(args);
    cli::run(full)
}

const QUIESCENT: &str = r#"
[grid]
n = 8
length = 1.0

[time]
t_start = -1.0
t_end = -0.9
dt = 0.01

[initial]
preset = "quiescent"
n0 = 0.0
c0 = 1.0
"#;

#[test]
fn quiescent_run_writes_ten_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUIESCENT);
    let out = tmp.path().join("run");
    assert_eq!(
        run_cli(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let m = read_manifest(&out).unwrap();
    assert_eq!(m.snapshots.len(), 10);
    assert_eq!(m.steps, 10);
    assert!(m.initial.is_some() && m.aborted.is_none());
    assert_eq!(m.config["grid"]["n"], 8);
    let (series, _) = read_series(&out).unwrap();
    assert_eq!(series.len(), 11);
    for s in series.snapshots() {
        assert!(s.n.values.iter().all(|v| *v == 0.0));
        assert!(s.c.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert_eq!(s.u.max_norm(), 0.0);
    }
    let monitor = fs::read_to_string(out.join("monitor.csv")).unwrap();
    assert!(monitor.starts_with("step,t,mass"));
    assert_eq!(monitor.lines().count(), 12);
}

#[test]
fn missing_grid_section_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[initial]\npreset = \"quiescent\"\n");
    let out = bin()
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid"), "{err}");
}

#[test]
fn malformed_value_reports_its_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\nn = \"eight\"\n[initial]\npreset = \"quiescent\"\n",
    );
    let out = bin()
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains('n'), "{err}");
}

#[test]
fn usage_exit_codes() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(
        bin().arg("frobnicate").output().unwrap().status.code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["classify", "--criterion", "thm99"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
}

fn golden_state() -> State {
    let grid = Grid::cubic(2, 1.0).unwrap();
    let t = -0.5;
    let f = |g: fn(f64) -> f64| (0..8).map(|i| g(i as f64)).collect::<Vec<f64>>();
    State::new(
        ScalarField::new(grid, t, f(|i| i + 0.5)).unwrap(),
        ScalarField::new(grid, t, f(|i| 1.0 + i / 8.0)).unwrap(),
        VectorField::new(grid, t, [f(|i| i), f(|i| -i), f(|i| 0.25 * i)]).unwrap(),
        ScalarField::new(grid, t, f(|i| i * i)).unwrap(),
    )
    .unwrap()
}

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_2x2x2.ckns")
}

#[test]
fn snapshot_matches_golden_file() {
    let golden = fs::read(golden_path()).unwrap();
    assert_eq!(encode_snapshot(&golden_state()), golden);
    assert_eq!(read_snapshot(&golden_path()).unwrap(), golden_state());
}

#[test]
fn snapshot_reader_rejects_bad_headers() {
    let golden = fs::read(golden_path()).unwrap();
    let mut bad = golden.clone();
    bad[0] = b'X';
    let e = decode_snapshot(&bad).unwrap_err().to_string();
    assert!(e.contains("bad magic"), "{e}");
    let mut bad = golden.clone();
    bad[4] = 7;
    let e = decode_snapshot(&bad).unwrap_err().to_string();
    assert!(e.contains("unsupported format version 7"), "{e}");
    let e = decode_snapshot(&golden[..golden.len() - 3])
        .unwrap_err()
        .to_string();
    assert!(e.contains("truncated"), "{e}");
}

/// A zero solution on a `2π` box, time-resolved down to `r = 1/8` near `t = 0`.
const ZERO: &str = r#"
[grid]
n = 8

[time]
t_start = -1.0
t_end = 0.0
dt = 0.00390625
fine_start = -0.015625
fine_dt = 0.0009765625

[initial]
preset = "quiescent"
n0 = 0.0
c0 = 0.0
"#;

fn simulate(text: &str) -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("run");
    assert_eq!(
        run_cli(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    (tmp, out)
}

#[test]
fn zero_solution_is_regular_everywhere() {
    let (tmp, run) = simulate(ZERO);
    for criterion in ["thm15", "thm16i", "thm16ii", "thm19"] {
        let report = tmp.path().join(format!("{criterion}.json"));
        let code = run_cli(&[
            "classify",
            "--in",
            run.to_str().unwrap(),
            "--centers",
            "grid:2",
            "--criterion",
            criterion,
            "--eps",
            "1e-12",
            "--radii",
            "dyadic:3",
            "--sampling",
            "spectral:8",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let r = Report::read(&report).unwrap();
        assert_eq!(r.verdicts.len(), 8);
        assert!(
            r.verdicts.iter().all(|v| v.is_regular()),
            "{criterion}: {:?}",
            r.verdicts[0]
        );
    }
}

#[test]
fn zero_solution_diagnostics_vanish() {
    let (tmp, run) = simulate(ZERO);
    let report = tmp.path().join("diag.json");
    let code = run_cli(&[
        "diagnose",
        "--in",
        run.to_str().unwrap(),
        "--centers",
        "3,3,3",
        "--radii",
        "dyadic:2",
        "--entropy",
        "--sampling",
        "spectral:8",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = Report::read(&report).unwrap();
    assert_eq!(r.cylinders.len(), 2);
    for c in &r.cylinders {
        assert!(c.flags.is_empty());
        assert!(c.quantities.unwrap().values().iter().all(|v| *v == 0.0));
    }
    assert_eq!(r.entropy.len(), 2);
    assert!(r
        .entropy
        .iter()
        .all(|e| e.norms.mass == 0.0 && e.luxemburg == 0.0));
    let k = r.constants.unwrap();
    assert_eq!(k.lambda0, 108.0);
}

#[test]
fn oversized_cylinder_is_flagged() {
    let (tmp, run) = simulate(QUIESCENT);
    let report = tmp.path().join("diag.json");
    let code = run_cli(&[
        "diagnose",
        "--in",
        run.to_str().unwrap(),
        "--centers",
        "0.5,0.5,0.5",
        "--radii",
        "list:0.6,0.05",
        "--sampling",
        "native",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = Report::read(&report).unwrap();
    assert!(
        r.cylinders[0].flags[0].contains("cylinder exceeds box"),
        "{:?}",
        r.cylinders[0].flags
    );
    assert!(r.cylinders[0].quantities.is_none());

    // every entry failing is a numerical failure
    let code = run_cli(&[
        "diagnose",
        "--in",
        run.to_str().unwrap(),
        "--centers",
        "0.5,0.5,0.5",
        "--radii",
        "list:0.6",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn report_round_trips() {
    let (tmp, run) = simulate(ZERO);
    let report = tmp.path().join("c.json");
    // with only two radii thm19 cannot conclude and reports an infinite value
    let code = run_cli(&[
        "classify",
        "--in",
        run.to_str().unwrap(),
        "--centers",
        "1,2,3",
        "--criterion",
        "thm19",
        "--radii",
        "dyadic:2",
        "--sampling",
        "spectral:8",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"lhs_value\": \"inf\""));
    let parsed = Report::from_json(&text).unwrap();
    assert_eq!(parsed.verdicts[0].lhs_value, f64::INFINITY);
    assert_eq!(parsed.to_json().unwrap(), text);
    assert_eq!(
        Report::from_json(&parsed.to_json().unwrap()).unwrap(),
        parsed
    );

    let e = Report::from_json(&text.replace("ckns-report", "other"))
        .unwrap_err()
        .to_string();
    assert!(e.contains("not a ckns-report"), "{e}");
}

#[test]
fn empty_flag_set_has_zero_premeasure() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("flagged.csv");
    fs::write(&table, "x,y,z,t,r\n").unwrap();
    let report = tmp.path().join("h.json");
    let code = run_cli(&[
        "hausdorff",
        "--flagged",
        table.to_str().unwrap(),
        "--exponent",
        "1.6667",
        "--delta",
        "0.1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = Report::read(&report).unwrap();
    let s = r.singular_set.unwrap();
    assert_eq!(s.premeasure, 0.0);
    assert!(s.estimate.chosen.is_empty());
}

#[test]
fn flag_table_round_trips_through_hausdorff() {
    let tmp = tempfile::tempdir().unwrap();
    let family = [
        ParabolicCylinder::new([0.0; 3], 0.0, 0.1).unwrap(),
        ParabolicCylinder::new([0.05, 0.0, 0.0], 0.0, 0.05).unwrap(),
        ParabolicCylinder::new([1.0, 0.0, 0.0], 0.0, 0.08).unwrap(),
    ];
    let table = tmp.path().join("in.csv");
    cli::write_flagged(&table, &family, &[]).unwrap();
    assert_eq!(cli::read_flagged(&table).unwrap(), family);
    let export = tmp.path().join("out.csv");
    let report = tmp.path().join("h.json");
    let code = run_cli(&[
        "hausdorff",
        "--flagged",
        table.to_str().unwrap(),
        "--delta",
        "0.1",
        "--exponent",
        "1",
        "--export",
        export.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let s = Report::read(&report).unwrap().singular_set.unwrap();
    assert_eq!(s.estimate.chosen.len(), 2);
    assert!((s.premeasure - 0.18).abs() < 1e-15);
    let chosen_flags: Vec<String> = fs::read_to_string(&export)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_owned())
        .collect();
    assert_eq!(chosen_flags, ["1", "0", "1"]);

    // a radius above δ is not a δ-cover
    assert_eq!(
        run_cli(&[
            "hausdorff",
            "--flagged",
            table.to_str().unwrap(),
            "--delta",
            "0.05"
        ]),
        1
    );
}

#[test]
fn identical_config_gives_identical_bytes() {
    let cfg = r#"
[grid]
n = 16

[time]
t_end = -0.95

[initial]
preset = "perturbed_uniform"
seed = 11
"#;
    let (tmp_a, a) = simulate(cfg);
    let (tmp_b, b) = simulate(cfg);
    let ma = read_manifest(&a).unwrap();
    let mb = read_manifest(&b).unwrap();
    assert_eq!(ma.seed, Some(11));
    assert_eq!(ma.times(), mb.times());
    for e in ma.entries() {
        assert_eq!(
            fs::read(a.join(&e.file)).unwrap(),
            fs::read(b.join(&e.file)).unwrap()
        );
    }
    let mut reports = Vec::new();
    for (tmp, run) in [(&tmp_a, &a), (&tmp_b, &b)] {
        let path = tmp.path().join("d.json");
        let code = run_cli(&[
            "diagnose",
            "--in",
            run.to_str().unwrap(),
            "--centers",
            "3,3,3",
            "--radii",
            "list:0.2",
            "--sampling",
            "spectral:8",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        reports.push(
            fs::read_to_string(&path)
                .unwrap()
                .replace(run.to_str().unwrap(), "RUN"),
        );
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn center_and_radius_specs() {
    let grid = Grid::cubic(8, 2.0).unwrap();
    assert_eq!(
        "grid:2".parse::<CenterSpec>().unwrap().centers(&grid).len(),
        8
    );
    assert_eq!(
        "grid:2".parse::<CenterSpec>().unwrap().centers(&grid)[0],
        [0.5; 3]
    );
    let planar = Grid::planar(8, 2.0).unwrap();
    assert_eq!(
        "grid:3"
            .parse::<CenterSpec>()
            .unwrap()
            .centers(&planar)
            .len(),
        9
    );
    assert_eq!(
        "1,2,3;4,5,6".parse::<CenterSpec>().unwrap(),
        CenterSpec::Points(vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    );
    assert!("1,2".parse::<CenterSpec>().is_err());
    assert_eq!(
        "dyadic:3".parse::<RadiusSpec>().unwrap().radii(),
        vec![0.5, 0.25, 0.125]
    );
    assert!("dyadic:0".parse::<RadiusSpec>().is_err());
    assert!("list:0.1,-1".parse::<RadiusSpec>().is_err());
}
