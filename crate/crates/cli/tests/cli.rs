use std::path::Path;
use std::process::{Command, Output};

use entchaos_cli::config::ExperimentConfig;
use entchaos_cli::experiments::SHIPPED;
use entchaos_cli::runner::config_hash;

const BIN: &str = env!("CARGO_BIN_EXE_entchaos");

const SMALL_TOP: &str = r#"
name = "small_top"
model = "kicked_top"
params.alpha = 1.5707963267948966
params.beta = 3.0
initial.theta = 0.7853981633974483
initial.phi = 0.5
N_list = [20, 40]
t_final = 12
precision.mode = "extended"
precision.digits = 60
lyapunov.K = 2
lyapunov.s = 1.0
lyapunov.n_steps = 300
lyapunov.rng_seed = 11
ed.commutator_kicks = 4
outputs = ["trajectory", "poincare", "lyapunov", "entropy", "qfi", "squeezing", "otoc", "ed_compare"]
output_dir = "small_top"
"#;

const SMALL_DICKE: &str = r#"
name = "small_dicke"
model = "dicke"
params.gamma = 0.85
initial.cos_theta = 0.1
initial.phi = 1.4
initial.energy = 3.0
N_list = [6]
t_final = 1.0
sample_dt = 0.1
ed.cutoff_factor = 10
outputs = ["trajectory", "entropy", "qfi", "ed_compare"]
output_dir = "small_dicke"
format = "jsonl"
"#;

fn run(args: &[&str], root: &Path) -> Output {
    Command::new(BIN).args(args).env("ENTCHAOS_OUTPUT_ROOT", root).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn shipped_experiments_validate() {
    for (name, text) in SHIPPED {
        let cfg = ExperimentConfig::from_toml(text).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        assert_eq!(cfg.name, *name);
        assert!(cfg.validate().is_empty(), "{name}: {:?}", cfg.validate());
    }
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["validate", "dicke_chaotic"], tmp.path());
    assert!(out.status.success());
}

#[test]
fn list_experiments_prints_every_name() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["list-experiments"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, SHIPPED.iter().map(|(n, _)| *n).collect::<Vec<_>>());
}

#[test]
fn empty_outputs_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_DICKE.replace(r#"["trajectory", "entropy", "qfi", "ed_compare"]"#, "[]"));
    let out = run(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_config");
    assert!(!tmp.path().join("small_dicke").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL_DICKE}\nparams.kappa = 1.0\n"));
    assert_eq!(run(&["validate", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run", "no_such_experiment"], tmp.path()).status.code(), Some(1));
}

#[test]
fn kicked_top_run_is_bit_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_TOP);
    let roots = [tmp.path().join("a"), tmp.path().join("b")];
    for root in &roots {
        let out = run(&["run", &cfg], root);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (roots[0].join("small_top"), roots[1].join("small_top"));
    let m = manifest(&a);
    assert_eq!(m["config_hash"], config_hash(SMALL_TOP));
    assert_eq!(m["seed"], 11);
    assert_eq!(m["precision"]["digits"], 60);
    assert!(m["aborts"].as_array().unwrap().is_empty());
    let files: Vec<String> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    for expected in ["trajectory.csv", "lyapunov.csv", "entropy_semiclassical.csv", "otoc_N20.csv", "ed_compare_N40.csv"] {
        assert!(files.iter().any(|f| f == expected), "{expected} missing from {files:?}");
    }
    for f in &files {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let m2 = manifest(&b);
    assert_eq!(m["summary"], m2["summary"]);
}

#[test]
fn extended_precision_columns_are_decimal_strings() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_TOP);
    assert!(run(&["run", &cfg], tmp.path()).status.success());
    let mut r = csv::Reader::from_path(tmp.path().join("small_top/entropy_semiclassical.csv")).unwrap();
    let col = r.headers().unwrap().iter().position(|h| h == "ln_det_2g").unwrap();
    for rec in r.records() {
        let field = rec.unwrap()[col].to_string();
        // The purity of the global state keeps ln det(2G) at zero.
        assert!(field.parse::<f64>().unwrap().abs() < 1e-40, "{field}");
    }
}

#[test]
fn dicke_run_writes_jsonl_and_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_DICKE);
    let out = run(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("small_dicke");
    let m = manifest(&dir);
    assert_eq!(m["summary"]["ed_N6_boson_cutoff"], 60);
    let cmp = &m["summary"]["ed_compare_N6"]["s_a"];
    assert!(cmp["max_deviation"].as_f64().unwrap().is_finite());
    let text = std::fs::read_to_string(dir.join("entropy_N6.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 11);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["s_a"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn too_small_cutoff_is_recorded_as_an_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_DICKE.replace("ed.cutoff_factor = 10", "ed.cutoff_factor = 1"));
    let out = run(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(&tmp.path().join("small_dicke"));
    let aborts = m["aborts"].as_array().unwrap();
    assert_eq!(aborts.len(), 1);
    assert_eq!(aborts[0]["job"], "ed_N6");
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "trajectory.jsonl"));
}
