use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hullvar::make_body;

fn hullvar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hullvar"))
        .args(args)
        .current_dir(dir)
        .env_remove("HULLVAR_OUT_DIR")
        .output()
        .expect("binary runs")
}

const SWEEP: &str = r#"
body = "disk"
k = 0
mode = "coupled"
replications = 12
seed = 5
bootstrap = 50
name = "disk"

[grid]
start = 100.0
stop = 800.0
points = 4
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn missing_config_exits_1_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hullvar(&["sweep", "--config", "absent.toml", "--out-dir", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("out").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn unknown_keys_and_bad_overrides_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", &format!("{SWEEP}\nextra = 1\n"));
    let out = hullvar(&["sweep", "--config", &cfg, "--out-dir", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let cfg = write(tmp.path(), "t.toml", SWEEP);
    let out = hullvar(&["sweep", "--config", &cfg, "--set", "replications=1", "--out-dir", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_outputs_are_complete_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", SWEEP);
    for (dir, threads) in [("a", None), ("b", None), ("c", Some("1"))] {
        let mut args = vec!["sweep", "--config", &cfg, "--out-dir", dir];
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        let out = hullvar(&args, tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["disk.csv", "disk.json", "disk.manifest.json", "disk.poisson.svg", "disk.binomial.svg"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(file)).unwrap(), "{file} differs between runs");
        assert_eq!(a, fs::read(tmp.path().join("c").join(file)).unwrap(), "{file} differs from the serial run");
    }
    let csv = fs::read_to_string(tmp.path().join("a/disk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("a/disk.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["config"]["seed"], 5);
    assert!(tmp.path().join("a/disk.timings.json").exists());

    let out = hullvar(&["report", "a/disk.json", "--out-dir", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("r/disk.report.json").exists());
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", SWEEP);
    hullvar(&["sweep", "--config", &cfg, "--out-dir", "a"], tmp.path());
    hullvar(&["sweep", "--config", &cfg, "--out-dir", "b", "--seed", "6"], tmp.path());
    let a = fs::read(tmp.path().join("a/disk.csv")).unwrap();
    assert_ne!(a, fs::read(tmp.path().join("b/disk.csv")).unwrap());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hullvar"))
        .args(["asa", "--body", "disk"])
        .current_dir(tmp.path())
        .env("HULLVAR_OUT_DIR", "envout")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("envout/asa.json").exists());
}

#[test]
fn asa_prints_the_library_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hullvar(&["asa", "--body", "ellipsoid:2,1,1", "--out-dir", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let q = make_body("ellipsoid:2,1,1".parse().unwrap()).unwrap().affine_surface_area().unwrap();
    assert!(stdout.contains(&q.value.to_string()), "{stdout}");
    assert!(stdout.contains("error estimate"));
    let bad = hullvar(&["asa", "--body", "blob:1", "--out-dir", "o"], tmp.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_2_and_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "h.toml", "body = \"disk\"\nn = 2\nseed = 1\n");
    let out = hullvar(&["sample-hull", "--config", &cfg, "--out-dir", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let manifest = fs::read_to_string(tmp.path().join("o/sample-hull.manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));
}

#[test]
fn remaining_subcommands_run_on_small_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("sample-hull", "body = \"ball:3,1\"\nlambda = 100.0\nk = 1\nseed = 2\n", "sample-hull.hull.json"),
        ("paraboloid", "task = \"scene\"\nseed = 2\n", "paraboloid.scene.json"),
        (
            "paraboloid",
            "task = \"intensity\"\nseed = 2\nname = \"int\"\n[intensity]\ntv_replications = 200\ngof_replications = 200\n",
            "int.intensity.csv",
        ),
        ("sigma2", "route = \"window\"\nseed = 2\n[window]\nl = 16.0\nreps = 200\n", "sigma2.csv"),
        ("depoisson", "body = \"disk\"\nk = 0\ngrid = [100.0, 200.0]\nreplications = 20\nseed = 2\n", "depoisson.svg"),
        ("volvar", "body = \"disk\"\nn = 200\nreplications = 20\nseed = 2\n", "volvar.csv"),
        (
            "th2check",
            "body = \"disk\"\nk = 0\ntest_function = \"bump:1,0;0.5\"\ngrid = [200.0, 400.0]\nreplications = 20\nseed = 2\n\
             [window]\nl = 16.0\nreps = 200\n[profile]\nreps = 100\n",
            "th2check.csv",
        ),
    ];
    for (i, (cmd, text, expected)) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("c{i}.toml"), text);
        let out = hullvar(&[cmd, "--config", &cfg, "--out-dir", "o"], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(tmp.path().join("o").join(expected).exists(), "{cmd} did not write {expected}");
    }
}

#[test]
fn shipped_configs_load_and_run_when_shrunk() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let shrink: &[(&str, &str, &[&str])] = &[
        ("sweep", "disk-sweep.toml", &["replications=10", "grid.stop=2048.0", "grid.points=2"]),
        ("sweep", "ellipsoid-coupled.toml", &["replications=10", "grid.stop=400.0", "grid.points=2"]),
        ("sigma2", "sigma2.toml", &["route=\"window\"", "window.l=12.0", "window.reps=200"]),
        ("depoisson", "depoisson.toml", &["replications=10", "grid=[100.0, 200.0]"]),
        ("volvar", "volvar.toml", &["replications=10", "n=200"]),
        ("th2check", "th2check.toml", &["replications=10", "grid=[300.0]", "window.reps=200", "window.l=12.0", "profile.reps=50"]),
    ];
    for (cmd, file, sets) in shrink {
        let path = configs.join(file);
        let mut args = vec![*cmd, "--config", path.to_str().unwrap(), "--out-dir", "o"];
        for s in *sets {
            args.extend(["--set", s]);
        }
        let out = hullvar(&args, tmp.path());
        assert!(out.status.success(), "{file}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
