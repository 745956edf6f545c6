use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coarsegeo"));
    c.env_remove("COARSEGEO_CACHE_DIR");
    c
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_to(cfg: &str, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(config(cfg)).arg("--out").arg(out).args(extra).output().unwrap()
}

#[test]
fn passing_run_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_to("contract_f2.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "pass");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["witnesses"], serde_json::json!([]));
    assert!(report.get("wall_time_ms").is_none());
    let csv = std::fs::read_to_string(dir.path().join("epsilon.csv")).unwrap();
    assert!(csv.starts_with("target,mu,max_proj_diam,far_pairs,stable\n"), "{csv}");
}

#[test]
fn violated_bound_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    let text = std::fs::read_to_string(config("contract_z2z2.toml"))
        .unwrap()
        .replace("radius = 5", "radius = 4\nmu = 0\nepsilon = 2");
    std::fs::write(&cfg, text).unwrap();
    let o = bin().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("o/report.json")).unwrap();
    assert!(report.contains("\"outcome\": \"violation\""));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness: "));
}

#[test]
fn unstable_measurement_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shallow.toml");
    let text = r#"
kind = "contract"
seed = 1
subgroup = { generators = ["a1", "b1"], depth = 2 }
[model]
kind = "free_product"
ranks = [2, 2]
[contract]
radius = 4
"#;
    std::fs::write(&cfg, text).unwrap();
    let o = bin().arg("run").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"contract\"\nseed = 1\n[model]\nkind = \"free\"\nrank = 2\n[contract]\nradius = \"x\"\n").unwrap();
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("contract.radius"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_to("transition_z2z2.toml", &a, &["--samples", "40"]).status.code(), Some(0));
    assert_eq!(run_to("transition_z2z2.toml", &b, &["--samples", "40"]).status.code(), Some(0));
    let diff = |x: &Path, y: &Path| bin().arg("report").arg("--diff").arg(x).arg(y).output().unwrap();
    let o = diff(&a.join("report.json"), &b.join("report.json"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "identical");
    let ja = std::fs::read(a.join("report.json")).unwrap();
    let jb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ja, jb);

    let c = dir.path().join("c");
    assert_eq!(run_to("transition_z2z2.toml", &c, &["--samples", "40", "--seed", "9"]).status.code(), Some(0));
    let o = diff(&a.join("report.json"), &c.join("report.json"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("seed: 8 vs 9"), "{}", stdout(&o));
}

#[test]
fn ball_summary_uses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.toml");
    std::fs::write(&model, "kind = \"free_product\"\nranks = [2, 2]\n").unwrap();
    let cache = dir.path().join("cache");
    let ball = || {
        let o = bin()
            .env("COARSEGEO_CACHE_DIR", &cache)
            .args(["ball", "--radius", "3", "--model"])
            .arg(&model)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()
    };
    let first = ball();
    assert_eq!(first["cache"], "miss");
    assert_eq!(first["sphere_sizes"], serde_json::json!([1, 8, 48, 280]));
    let second = ball();
    assert_eq!(second["cache"], "hit");
    assert_eq!(second["vertices"], 337);
}
