use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uqcurate"))
}

fn smoke() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.conf")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_data_defaults_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["gen-data", "--seed", "3", "--out", s(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 2001);
    assert!(text.starts_with("id,f0,"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = run(&["gen-data", "--seed", "4", "--out", s(&dir.path().join("c.csv"))]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn missing_output_directory_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nope/data.csv");
    let o = run(&["gen-data", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["shift", "--config", s(&smoke()), "--out", s(&dir.path().join("nope"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn print_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["train", "--config", s(&smoke()), "--print-config", "--out", s(dir.path())]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("model.hidden_width = 16"), "{text}");
    assert!(text.contains("curation.n_ale"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn train_learns_separable_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sep.csv");
    let gen = run(&[
        "gen-data",
        "--config",
        s(&smoke()),
        "--set",
        "synthetic.separation=10",
        "--set",
        "synthetic.imbalance=1",
        "--set",
        "synthetic.noisy_fraction=0",
        "--set",
        "synthetic.n_instances=600",
        "--out",
        s(&data),
    ]);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let o = run(&["train", "--config", s(&smoke()), "--data", s(&data), "--uq", "vanilla", "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.json")).unwrap()).unwrap();
    assert!(eval["report"]["f1"].as_f64().unwrap() >= 0.99, "{eval}");
    assert!(dir.path().join("model.json").is_file());
}

#[test]
fn corrupt_csv_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "id,f0,f1,label\na,1,2,0\nb,1,oops,1\n").unwrap();
    let o = run(&["train", "--config", s(&smoke()), "--data", s(&data), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("oops"), "{err}");
}

#[test]
fn unknown_config_key_lists_valid_keys() {
    let o = run(&["shift", "--set", "model.hiden_width=3", "--print-config"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("model.hiden_width") && err.contains("model.hidden_width"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "seed = 1\nnot a pair\n").unwrap();
    let o = run(&["shift", "--config", s(&conf), "--print-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn smoke_compare_is_quick_and_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = run(&["compare", "--config", s(&smoke()), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(start.elapsed().as_secs() < 60);
    let printed = String::from_utf8_lossy(&o.stdout);
    let paths: Vec<&str> = printed.lines().collect();
    assert_eq!(paths.iter().filter(|p| p.ends_with(".csv")).count(), 3);
    for p in paths.iter().filter(|p| p.ends_with(".csv")) {
        let mut rd = csv::Reader::from_path(p).unwrap();
        assert!(rd.records().count() > 0, "{p}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(paths.last().unwrap()).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "compare");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn report_on_separated_columns() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("r.csv");
    std::fs::write(&f, "rep,f1_ehal,f1_elah\n0,4,1\n1,5,2\n2,6,3\n").unwrap();
    let o = run(&["report", s(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["u"].as_f64().unwrap(), 0.0);
    assert_eq!(v["u_a"].as_f64().unwrap(), 9.0);
    // z = (9 - 4.5) / sqrt(5.25), upper normal tail.
    approx::assert_abs_diff_eq!(v["p_value"].as_f64().unwrap(), 0.02476730671781337, epsilon = 1e-9);

    let o = run(&["report", s(&f), "--a", "f1_missing"]);
    assert_eq!(o.status.code(), Some(2));
}
