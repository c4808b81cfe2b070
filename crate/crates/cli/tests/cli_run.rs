use std::path::Path;
use std::process::Command;

use trsw_cli::run::{build_mesh, initial_state, scheme, Simulation, CSV_HEADER};
use trsw_cli::{RunConfig, Snapshot};
use trsw_core::StepController;

const REST: &str = r#"
[testcase]
name = "rest"
depth = 1000.0

[mesh]
kind = "periodic_plane"
nx = 3
ny = 2
lx = 3.0e6
ly = 2.0e6
p = 3

[scheme]
coriolis = { kind = "constant", f0 = 1.0e-4 }

[time]
duration_seconds = 600.0
fixed_dt = 600.0

[output]
snapshot_fields = ["u1", "u2", "h", "hb", "b", "vorticity", "rel_vorticity", "ux"]
"#;

const JET: &str = r#"
[testcase]
name = "galewsky"

[mesh]
kind = "cubed_sphere"
n = 8
p = 3

[scheme]
flux = { mode = "dissipative" }

[time]
duration_seconds = 3600.0

[output]
diagnostics_every = 1
"#;

fn trsw(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_trsw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_HEADER);
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn rest_state_run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REST);
    let out = dir.path().join("out");
    let o = trsw(&["run", &cfg, "--out-root", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let rows = csv_rows(&out.join("diagnostics.csv"));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        for rel in &row[7..12] {
            assert!(rel.parse::<f64>().unwrap().abs() < 1e-13, "{row:?}");
        }
    }
    assert!(out.join("mesh.dump").exists());

    let first = Snapshot::read_file(&out.join("snapshot_000000.dat")).unwrap();
    let last = Snapshot::read_file(&out.join("snapshot_000001.dat")).unwrap();
    assert_eq!(first.n_nodes(), 6 * 16);
    assert_eq!(last.step, 1);
    assert_eq!(last.t, 600.0);
    assert_eq!(first.field("h").unwrap(), last.field("h").unwrap());
    for b in last.field("b").unwrap() {
        assert!((b - 9.80616).abs() < 1e-12);
    }
    for w in last.field("rel_vorticity").unwrap() {
        assert!(w.abs() < 1e-18);
    }

    let mut buf = Vec::new();
    last.write(&mut buf).unwrap();
    assert_eq!(
        buf,
        std::fs::read(out.join("snapshot_000001.dat")).unwrap(),
        "rewriting a read snapshot reproduces the file"
    );
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &REST.replace("p = 3", "p = 3\nsmoothing = 2"));
    let o = trsw(&["run", &cfg]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("smoothing"), "{err}");
}

#[test]
fn unknown_experiment_is_rejected() {
    let o = trsw(&["experiment", "nonsense"]);
    assert!(!o.status.success());
}

#[test]
fn reruns_are_bitwise_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = JET.replace("n = 8", "n = 3").replace("3600.0", "1800.0");
    let cfg = write_config(dir.path(), &text);
    let mut csvs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(threads);
        let o = trsw(&[
            "run",
            &cfg,
            "--threads",
            threads,
            "--out-root",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(out.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn dissipative_jet_hour() {
    let cfg = RunConfig::from_toml(JET).unwrap();
    let mesh = build_mesh(&cfg).unwrap();
    let state = initial_state(&cfg, &mesh).unwrap();
    let ctl = StepController::new(&mesh, cfg.time.cfl, None);
    let mut sim = Simulation::new(&mesh, scheme(&cfg), ctl, state);
    let mut z = sim.initial.entropy;
    while !sim.finished(3600.0) {
        sim.step(3600.0).unwrap();
        let d = sim.diagnostics();
        let drift = d.drifts(&sim.initial);
        assert!(drift.mass.abs() < 1e-12 && drift.buoyancy.abs() < 1e-12);
        // Non-increasing up to the rounding of the sum itself.
        assert!(
            d.entropy - z <= 1e-14 * z,
            "step {}: {} -> {}",
            sim.step,
            z,
            d.entropy
        );
        z = d.entropy;
    }
    assert!(z < sim.initial.entropy);
}
