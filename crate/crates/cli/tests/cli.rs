use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(cmd: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{cmd}.cfg"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_holdervar"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const NORMS: &str = "shape = box\nlower = -0.5\nupper = 0.5\nT = 0.5\nalpha = example:0.5,0.4\nfield = corpus:gaussian\nlevels = 5,9\n";

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run("norms", NORMS, a.path(), &["--seed", "7"]).status.success());
    assert!(run("norms", NORMS, b.path(), &["--seed", "7"]).status.success());
    let fa = read_dir_sorted(&a.path().join("out"));
    assert_eq!(fa, read_dir_sorted(&b.path().join("out")));
    assert!(fa.iter().any(|(n, _)| n == "summary.json"));
}

#[test]
fn kernel_check_is_seeded() {
    let cfg = "dim = 2\nmax_order = 2\nsamples = 10\nlevels = 3,5\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run("kernel-check", cfg, a.path(), &["--seed", "3"]).status.success());
    assert!(run("kernel-check", cfg, b.path(), &["--seed", "3"]).status.success());
    assert_eq!(read_dir_sorted(&a.path().join("out")), read_dir_sorted(&b.path().join("out")));
    let c = tempfile::tempdir().unwrap();
    assert!(run("kernel-check", cfg, c.path(), &["--seed", "4"]).status.success());
    let ident = |d: &Path| fs::read(d.join("out/identities.csv")).unwrap();
    assert_ne!(ident(a.path()), ident(c.path()));
}

#[test]
fn beta_probe_at_alpha_minus_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("example", "gamma = 0.5\nzeta = 0.4\nbeta_probe = 0.25\nlevels = 9\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta_probe"), "{err}");
}

#[test]
fn schauder_sweep_has_row_per_level_and_drifts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "manufactured = sine-heat\nT = 0.25\nnx = 9\nnt = 4\nalpha = constant:0.5\n";
    let out = run("schauder", cfg, dir.path(), &["--levels", "9,13,17"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/schauder.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let global: Vec<_> = rows.iter().filter(|r| &r[0] == "global").collect();
    assert_eq!(global.len(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["config"]["levels"], "9,13,17");
    assert_eq!(summary["results"]["drift_percent"]["global"].as_array().unwrap().len(), 2);
}

#[test]
fn decreasing_levels_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("norms", NORMS, dir.path(), &["--levels", "9,5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("norms", "shape = box\nthis line is broken\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = dir.path().join("n.cfg");
    fs::write(&cfg, NORMS).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holdervar"))
        .args(["norms", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("i/o error"));
}

#[test]
fn every_command_runs() {
    let cases = [
        ("kernel-check", "dim = 2\nkernel = anisotropic:2,0.5,0.5,1\nmax_order = 1\nsamples = 5\nlevels = 3\n"),
        ("potential", "lower = -2\nupper = 2\nT = 0.5\nfield = corpus:narrow-gaussian\nlevels = 9,17\n"),
        ("solve", "manufactured = variable-diffusion\nT = 0.25\nlevels = 9,17\n"),
        ("mollify-check", "shape = ball\nradius = 0.4\nT = 0.4\nnx = 17\nalpha = example:0.5,0.4\nfields = sine\n"),
        ("interp-check", "lower = -0.5\nupper = 0.5\nT = 0.5\nfields = sine,gaussian\nlevels = 9\n"),
        ("example", "levels = 9,17\nsolve = false\n"),
    ];
    for (cmd, cfg) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(cmd, cfg, dir.path(), &[]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).is_empty(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join("out/summary.json").exists());
    }
}
