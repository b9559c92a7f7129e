use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_torus-lab"));
    c.env_remove("TORUS_LAB_THREADS");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_cmd(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL_COUNT: &str = r#"{
  "measure": {"kind": "lebesgue", "dim": 1},
  "sequence": {"kind": "power", "base": [[2]]},
  "target": {"center": ["1/3"], "radii": {"kind": "constant", "values": [0.25]}},
  "N": 512, "samples": 12, "seed": 9
}"#;

#[test]
fn count_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run_cmd("count", &config("configs/count_doubling.json"), &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    let mut lines = samples.lines();
    assert_eq!(lines.next(), Some("sample_id,seed,N,R,Psi,err,normalized_err"));
    assert_eq!(lines.count(), 50);
    let fit = fs::read_to_string(out.join("fit.csv")).unwrap();
    assert!(fit.starts_with("slope,intercept,r_squared,n_points\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "count");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_COUNT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run_cmd("count", &cfg, &a, &[])), 0);
    assert_eq!(code(&run_cmd("count", &cfg, &b, &["--threads", "3"])), 0);
    for f in ["samples.csv", "fit.csv", "variance.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // overwrite in place
    assert_eq!(code(&run_cmd("count", &cfg, &a, &[])), 0);
    assert_eq!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_COUNT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run_cmd("count", &cfg, &a, &[])), 0);
    assert_eq!(code(&run_cmd("count", &cfg, &b, &["--seed", "10"])), 0);
    assert_ne!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
}

#[test]
fn thread_env_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_COUNT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run_cmd("count", &cfg, &a, &[])), 0);
    let o = bin()
        .env("TORUS_LAB_THREADS", "2")
        .args(["count", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
    let o = bin()
        .env("TORUS_LAB_THREADS", "0")
        .args(["count", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn plot_has_one_polyline_per_sample_plus_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_COUNT);
    let out = tmp.path().join("p");
    assert_eq!(code(&run_cmd("count", &cfg, &out, &["--plot"])), 0);
    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 13);
    assert_eq!(svg.matches("class=\"reference\"").count(), 1);
    assert!(svg.contains("viewBox=\"0 0 960 640\""));
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let bad = write_config(
        tmp.path(),
        "bad.json",
        &SMALL_COUNT.replace("\"samples\"", "\"sample_count\""),
    );
    let o = run_cmd("count", &bad, &out, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sample_count"));
    assert!(!out.join("manifest.json").exists());

    let zero_k = write_config(
        tmp.path(),
        "w.json",
        &SMALL_COUNT.replace("\"N\": 512", "\"N\": 512, \"weyl\": {\"k\": [[0]]}"),
    );
    let o = run_cmd("weyl", &zero_k, &out, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("weyl.k[0]"));

    assert_eq!(code(&run(&["count", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let missing = tmp.path().join("nope.json");
    assert_eq!(code(&run_cmd("count", &missing, &out, &[])), 2);
}

#[test]
fn precision_shortfall_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &SMALL_COUNT.replace("\"N\": 512", "\"N\": 512, \"precision_bits\": 100"),
    );
    let o = run_cmd("count", &cfg, &tmp.path().join("o"), &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1088"));
}

#[test]
fn check_mode_detects_digest_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL_COUNT);
    let out = tmp.path().join("o");
    assert_eq!(code(&run_cmd("count", &cfg, &out, &[])), 0);
    assert_eq!(code(&run_cmd("count", &cfg, &out, &["--check"])), 0);
    fs::write(&cfg, SMALL_COUNT.replace("\"seed\": 9", "\"seed\": 10")).unwrap();
    assert_eq!(code(&run_cmd("count", &cfg, &out, &["--check"])), 1);
    assert_eq!(code(&run_cmd("weyl", &cfg, &out, &["--check"])), 1);
    assert_eq!(
        code(&run_cmd("count", &cfg, &tmp.path().join("empty"), &["--check"])),
        1
    );
}

#[test]
fn verify_lemmas_defaults_fault_and_vacuous() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = run(&["verify-lemmas", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("verify.csv")).unwrap();
    let families: std::collections::BTreeSet<&str> =
        report.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert!(families.len() >= 5, "{families:?}");

    let o = run_cmd("verify-lemmas", &config("configs/verify.json"), &out, &[]);
    assert_eq!(code(&o), 0);

    let o = run_cmd("verify-lemmas", &config("tests/fixtures/verify_fault.json"), &out, &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));

    let zero = write_config(tmp.path(), "z.json", r#"{"verify": {"trials": 0}}"#);
    let o = run_cmd("verify-lemmas", &zero, &out, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(out.join("verify.csv")).unwrap(),
        "family,trial,instance,value,tolerance,passed\n"
    );
}

#[test]
fn decay_on_cantor_reports_flat_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    assert_eq!(
        code(&run_cmd("decay", &config("configs/decay_cantor.json"), &out, &[])),
        0
    );
    let csv = fs::read_to_string(out.join("decay.csv")).unwrap();
    let flat = csv.lines().skip(1).any(|l| {
        let cols: Vec<&str> = l.split(',').collect();
        cols[0] == "cantor" && cols[2].parse::<f64>().is_ok_and(|s| s.abs() < 0.05)
    });
    assert!(flat, "{csv}");
}

#[test]
fn dichotomy_convergent_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{
  "measure": {"kind": "lebesgue", "dim": 1},
  "sequence": {"kind": "power", "base": [[2]]},
  "target": {"center": ["1/3"], "radii": {"kind": "power", "c": 0.5, "exponent": -2}},
  "N": 3000, "samples": 30, "seed": 3,
  "dichotomy": {"regime": "convergent"}
}"#,
    );
    let out = tmp.path().join("d");
    assert_eq!(code(&run_cmd("dichotomy", &cfg, &out, &[])), 0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "verdict").unwrap();
    assert_eq!(row[col], "convergent-consistent");
    assert_eq!(
        fs::read_to_string(out.join("dichotomy.csv")).unwrap().lines().count(),
        31
    );
}

#[test]
fn weyl_and_pairs_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{
  "measure": {"kind": "lebesgue", "dim": 1},
  "sequence": {"kind": "power", "base": [["2"]]},
  "target": {"center": [0], "radii": {"kind": "constant", "values": [0.25]}},
  "N": 256, "samples": 10000, "seed": 4,
  "weyl": {"k": [[1], ["-1"]], "del": true},
  "pairs": {"pairs": [[3, 3], [2, 6]]}
}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run_cmd("pairs", &cfg, out, &[])), 0);
        assert_eq!(code(&run_cmd("weyl", &cfg, out, &[])), 0);
    }
    for f in ["pairs.csv", "pairs_summary.csv", "weyl.csv", "del.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let pairs = fs::read_to_string(a.join("pairs.csv")).unwrap();
    assert!(pairs.starts_with("m,n,estimate,radius,psi_product,ratio\n"));
    assert_eq!(pairs.lines().count(), 3);
    let weyl = fs::read_to_string(a.join("weyl.csv")).unwrap();
    assert_eq!(weyl.lines().count(), 1 + 2 * 10000);
    let del = fs::read_to_string(a.join("del.csv")).unwrap();
    let v: f64 = del.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 1.0 / 65536.0).abs() < 1e-15);
}
