use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pacbayes_core::io::{read_dataset_csv, read_matrix_csv};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pacbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pacbayes")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_MATCOMP: &str = r#"{
  "problem": {"kind": "MatComp", "model": {"d1": 8, "d2": 7, "r": 1, "b_inf": 1.0, "k_rank": 2, "h": 0.45},
              "a": 1.0, "b": 0.1, "gamma_kind": "InverseGamma", "method": "Vb"},
  "n_grid": [20, 40, 80, 160], "replicates": 2,
  "sampler": {"n_steps": 200, "burn_in": 100},
  "constants": {"b_loss": 51.0, "l_lip": 1.0, "k_bernstein": 1.0, "c_margin": 1.0},
  "seed": 3
}"#;

#[test]
fn gen_writes_a_readable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let cfg = configs().join("sparse_small.json");
    let o = pacbayes(&["gen", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--n", "75", "--replicate", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (data, header) = read_dataset_csv(&out.join("dataset.csv")).unwrap();
    assert_eq!(data.len(), 75);
    assert_eq!(data.dim(), Some(20));
    assert_eq!(header["replicate"], 2);
    assert_eq!(header["n"], 75);
    assert!(data.true_cond_prob().is_some());
}

#[test]
fn fit_exports_samples_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let cfg = configs().join("sparse_small.json");
    let o = pacbayes(&["fit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--n", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("samples.json")).unwrap()).unwrap();
    assert_eq!(meta["layout"], "vector");
    assert_eq!(meta["extra"]["n"], 100);
    let draws = meta["draws"].as_u64().unwrap() as usize;
    let text = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(text.lines().count(), draws + 1);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 21);
}

#[test]
fn fit_matcomp_vb_exports_matrix_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", SMALL_MATCOMP);
    let out = dir.path().join("vb");
    let o = pacbayes(&["fit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_matrix_csv(&out.join("matrix.csv")).unwrap().dim(), (8, 7));
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["method"], "vb");
    assert!(diag["final_objective"].is_f64());
    assert!(diag["objective_trace"].as_array().unwrap().len() >= 2);
}

#[test]
fn fit_finite_class_reports_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let cfg = configs().join("finite_class.json");
    let o = pacbayes(&["fit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let post: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("posterior.json")).unwrap()).unwrap();
    let w: Vec<f64> = post["weights"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(w.len(), 16);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn bound_reports_every_grid_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let cfg = configs().join("matcomp.json");
    let o = pacbayes(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bound_report.json")).unwrap()).unwrap();
    let totals: Vec<f64> = reports.as_array().unwrap().iter().map(|r| r["total"].as_f64().unwrap()).collect();
    assert_eq!(totals.len(), 4);
    assert!(totals.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(reports[0]["construction"]["kind"], "MatCompBox");
}

#[test]
fn rate_writes_reports_and_prints_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", SMALL_MATCOMP);
    let out = dir.path().join("r");
    let o = pacbayes(&["rate", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("slope"));
    let csv = fs::read_to_string(out.join("rate_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells_ok"], 8);
    assert_eq!(summary["spec"]["seed"], 3);
    assert!(!out.join("failures.json").exists());
}

#[test]
fn seed_flag_overrides_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", SMALL_MATCOMP);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = pacbayes(&["rate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        fs::read(out.join("rate_report.csv")).unwrap()
    };
    assert_eq!(run("a", "9"), run("b", "9"));
    assert_ne!(run("c", "9"), run("d", "10"));
}

#[test]
fn partial_failure_exits_with_two_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
      "problem": {"kind": "SparseLinear", "model": {"d": 5, "s_star": 2, "signal": 1.0, "h": 0.4, "feature_law": "UnitSphere"}, "c1": 10.0},
      "n_grid": [10, 20, 40, 80], "replicates": 1,
      "sampler": {"n_steps": 100, "burn_in": 50, "proposal_scale": 1e6, "adapt": false},
      "constants": {"b_loss": 51.0, "l_lip": 1.0, "k_bernstein": 1.0, "c_margin": 1.0},
      "seed": 1
    }"#;
    let cfg = write_config(dir.path(), "bad.json", body);
    let out = dir.path().join("r");
    let o = pacbayes(&["rate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("failures.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 4);
    assert!(manifest[0]["seed"].is_u64());
    assert!(out.join("rate_report.csv").exists());
}

#[test]
fn invalid_configuration_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &SMALL_MATCOMP.replace("[20, 40, 80, 160]", "[20, 40, 80]"));
    let o = pacbayes(&["rate", "--config", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_grid"));
    let o = pacbayes(&["rate", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
