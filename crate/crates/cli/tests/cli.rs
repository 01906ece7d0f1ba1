use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ehh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ehh(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ehh(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Small and fast: a few hundred samples, a small network, two restarts.
const SMALL: &str = r#"
restarts = 2

[benchmark]
train_len = 400
test_len = 200

[train]
q = 2
neurons = 20
max_cycles = 2
"#;

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    config: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let config = root.join("small.toml");
        std::fs::write(&config, SMALL).unwrap();
        Self {
            _dir: dir,
            root,
            config,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn data(&self) -> PathBuf {
        let d = self.path("data");
        ok(&[
            "gen-benchmark",
            "--config",
            s(&self.config),
            "--seed",
            "4",
            "--out",
            s(&d),
        ]);
        d
    }

    fn trained(&self) -> (PathBuf, PathBuf) {
        let d = self.data();
        let m = self.path("run");
        ok(&[
            "train",
            "--config",
            s(&self.config),
            "--data",
            s(&d.join("train.csv")),
            "--test-data",
            s(&d.join("test.csv")),
            "--out",
            s(&m),
        ]);
        (d, m)
    }
}

#[test]
fn benchmark_files_have_default_lengths_and_are_reproducible() {
    let f = Fixture::new();
    let a = f.path("a");
    let b = f.path("b");
    ok(&["gen-benchmark", "--seed", "7", "--out", s(&a)]);
    ok(&["gen-benchmark", "--seed", "7", "--out", s(&b)]);
    for name in ["train.csv", "test.csv"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap()
        );
    }
    let lines = |p: PathBuf| std::fs::read_to_string(p).unwrap().lines().count();
    // header plus samples
    assert_eq!(lines(a.join("train.csv")), 2001);
    assert_eq!(lines(a.join("test.csv")), 201);
    let c = f.path("c");
    ok(&["gen-benchmark", "--seed", "8", "--out", s(&c)]);
    assert_ne!(
        std::fs::read(a.join("train.csv")).unwrap(),
        std::fs::read(c.join("train.csv")).unwrap()
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let f = Fixture::new();
    let blocker = f.path("blocker");
    std::fs::write(&blocker, "not a directory").unwrap();
    assert_eq!(code(&["gen-benchmark", "--out", s(&blocker.join("sub"))]), 3);
}

#[test]
fn train_eval_and_replay() {
    let f = Fixture::new();
    let (d, m) = f.trained();
    let manifest = read_json(&m.join("manifest.json"));
    assert_eq!(manifest["candidates"].as_array().unwrap().len(), 2);
    assert!(m.join("cycles.csv").exists());

    // one-step fit on the training data matches what training logged
    let report = f.path("eval.json");
    ok(&[
        "eval",
        "--model",
        s(&m.join("model.json")),
        "--data",
        s(&d.join("train.csv")),
        "--out",
        s(&report),
    ]);
    let report = read_json(&report);
    assert_eq!(report["one_step"], manifest["training_fit"]["one_step"]);
    assert_eq!(report["parameters"], manifest["training_fit"]["parameters"]);

    assert_eq!(code(&["replay", s(&m.join("manifest.json"))]), 0);
    assert_eq!(code(&["replay", s(&d.join("manifest.json"))]), 0);

    let mut tampered = manifest.clone();
    for o in tampered["outputs"].as_array_mut().unwrap() {
        if o["role"] == "model" {
            o["sha256"] = Value::String("0".repeat(64));
        }
    }
    let t = f.path("tampered.json");
    std::fs::write(&t, tampered.to_string()).unwrap();
    assert_eq!(code(&["replay", s(&t)]), 8);
}

#[test]
fn zero_cycles_keeps_the_initial_network() {
    let f = Fixture::new();
    let d = f.data();
    let m = f.path("run");
    ok(&[
        "train",
        "--config",
        s(&f.config),
        "--data",
        s(&d.join("train.csv")),
        "--out",
        s(&m),
        "--cycles",
        "0",
        "--restarts",
        "1",
        "--seed",
        "3",
    ]);
    let manifest = read_json(&m.join("manifest.json"));
    assert_eq!(manifest["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn grid_sweep_trains_every_size() {
    let f = Fixture::new();
    let d = f.data();
    let m = f.path("run");
    ok(&[
        "train",
        "--config",
        s(&f.config),
        "--data",
        s(&d.join("train.csv")),
        "--out",
        s(&m),
        "--grid",
        "2x6,2x10",
        "--restarts",
        "1",
    ]);
    let manifest = read_json(&m.join("manifest.json"));
    let stages: Vec<&str> = manifest["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["stage"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["grid", "grid", "restart"]);
    let neurons: Vec<u64> = manifest["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["neurons"].as_u64().unwrap())
        .collect();
    assert_eq!(&neurons[..2], &[18, 22]);
}

#[test]
fn anova_lists_all_groups_when_k_is_large() {
    let f = Fixture::new();
    let (d, m) = f.trained();
    let all = f.path("all.json");
    let two = f.path("two.json");
    let model = m.join("model.json");
    let train = d.join("train.csv");
    ok(&[
        "anova",
        "--model",
        s(&model),
        "--data",
        s(&train),
        "--top-k",
        "1000",
        "--out",
        s(&all),
    ]);
    ok(&[
        "anova",
        "--model",
        s(&model),
        "--data",
        s(&train),
        "--top-k",
        "2",
        "--out",
        s(&two),
    ]);
    let all = read_json(&all);
    let rows = all.as_array().unwrap();
    assert!(rows.len() >= 2 && rows.len() < 1000);
    assert_eq!(read_json(&two).as_array().unwrap()[..], rows[..2]);
    let sigmas: Vec<f64> = rows.iter().map(|r| r["sigma"].as_f64().unwrap()).collect();
    assert!(sigmas.windows(2).all(|w| w[0] >= w[1]));
    assert!(rows[0]["regressors"][0].as_str().unwrap().contains("(k-"));
}

#[test]
fn export_windows_and_short_records() {
    let f = Fixture::new();
    let (d, m) = f.trained();
    let model = m.join("model.json");
    let out = f.path("plot.csv");
    ok(&[
        "export",
        "--model",
        s(&model),
        "--data",
        s(&d.join("test.csv")),
        "--out",
        s(&out),
        "--window",
        "200",
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 201);
    ok(&[
        "export",
        "--model",
        s(&model),
        "--data",
        s(&d.join("test.csv")),
        "--out",
        s(&out),
        "--window",
        "20",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().nth(1).unwrap().starts_with("181,"));

    let short = f.path("short.csv");
    std::fs::write(&short, "u,y\n0.1,0.2\n0.3,0.4\n").unwrap();
    ok(&["export", "--model", s(&model), "--data", s(&short), "--out", s(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "k,y,y_s\n");
}

#[test]
fn zero_weight_model_explains_nothing() {
    let f = Fixture::new();
    let (d, m) = f.trained();
    let mut model = read_json(&m.join("model.json"));
    for w in model["model"]["weights"].as_array_mut().unwrap() {
        *w = Value::from(0.0);
    }
    let zero = f.path("zero.json");
    std::fs::write(&zero, model.to_string()).unwrap();
    let report = f.path("eval.json");
    ok(&[
        "eval",
        "--model",
        s(&zero),
        "--data",
        s(&d.join("test.csv")),
        "--out",
        s(&report),
    ]);
    let report = read_json(&report);
    assert_eq!(report["one_step"]["vaf"], 0.0);
    assert_eq!(report["free_run"]["vaf"], 0.0);
    assert_eq!(report["parameters"]["nonzero_weights"], 0);
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let f = Fixture::new();
    let (d, m) = f.trained();
    // usage
    assert_eq!(code(&["train", "--out", s(&m)]), 2);
    // malformed data
    let bad = f.path("bad.csv");
    std::fs::write(&bad, "u,y\n1.0,2.0\n1.0,abc\n").unwrap();
    assert_eq!(
        code(&["eval", "--model", s(&m.join("model.json")), "--data", s(&bad)]),
        4
    );
    // malformed config
    let toml = f.path("bad.toml");
    std::fs::write(&toml, "restarts = \"many\"").unwrap();
    assert_eq!(
        code(&["gen-benchmark", "--config", s(&toml), "--out", s(&f.path("x"))]),
        4
    );
    // regressor layout that does not fit the network
    let mut model = read_json(&m.join("model.json"));
    model["narx"]["output_lags"] = Value::from(5);
    let wrong = f.path("wrong.json");
    std::fs::write(&wrong, model.to_string()).unwrap();
    assert_eq!(
        code(&["eval", "--model", s(&wrong), "--data", s(&d.join("test.csv"))]),
        5
    );
    // missing file
    assert_eq!(
        code(&["eval", "--model", s(&f.path("none.json")), "--data", s(&bad)]),
        3
    );
}
