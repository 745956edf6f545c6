//! Acceptance run: one line per criterion, exit status nonzero if any
//! criterion fails. Tolerances are pinned below.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use coarsegeo::coarse::{coset_subset, scan_geodesic_projections};
use coarsegeo::harness::report::ExperimentReport;
use coarsegeo::harness::{run_experiment, ExperimentConfig, Outcome};
use coarsegeo::{Element, GroupModel, MetricGraph, PeripheralCoset};
use serde_json::Value;

/// Largest admissible projection diameter in criterion 1.
const TREE_PROJ_TOL: u64 = 1;
const TREE_RUNTIME: Duration = Duration::from_secs(30);
const MC_RUNTIME: Duration = Duration::from_secs(600);
const HNN_RUNTIME: Duration = Duration::from_secs(900);
const MC_MIN_SAMPLES: u64 = 500;
const MIN_COSET_PAIRS: u64 = 10;
const TRANSITION_SAMPLES: usize = 200;

type Verdict = Result<String, String>;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(name: &str) -> Result<(ExperimentReport, Duration), String> {
    let t = Instant::now();
    let r = run_experiment(&config(name)).map_err(|e| format!("{name}: {e}"))?;
    Ok((r, t.elapsed()))
}

fn value(r: &ExperimentReport, key: &str) -> Value {
    r.values.get(key).map(|m| m.value.clone()).unwrap_or(Value::Null)
}

fn require_pass(r: &ExperimentReport, name: &str) -> Result<(), String> {
    if let Some(c) = r.conditions.iter().find(|c| !c.pass) {
        return Err(format!("{name}: {} failed: {}", c.id, c.witness.clone().unwrap_or_default()));
    }
    if r.outcome != Outcome::Pass {
        return Err(format!("{name}: outcome {:?}", r.outcome));
    }
    Ok(())
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let model = GroupModel::f2();
    let g = MetricGraph::ball(&model, 7, 1 << 22).map_err(|e| e.to_string())?;
    let axis = coset_subset(&g, &PeripheralCoset::new(Element::identity(), 0));
    let scan = scan_geodesic_projections(&g, &axis, 1).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let d = scan.max_diam_at_mu[1].ok_or("no geodesic at distance >= 1")?;
    let (r, _) = run("contract_f2.toml")?;
    require_pass(&r, "contract_f2")?;
    if d > TREE_PROJ_TOL || elapsed >= TREE_RUNTIME {
        return Err(format!("max projection diameter {d}, {elapsed:.1?}"));
    }
    Ok(format!("{} far geodesics, max projection diameter {d}, {elapsed:.1?}", scan.far_pairs_at_mu[1]))
}

fn criterion_2() -> Verdict {
    let mut checked = 0;
    let mut targets = Vec::new();
    for name in ["quasiconvex_f2.toml", "quasiconvex_z2z2.toml"] {
        let (r, _) = run(name)?;
        require_pass(&r, name)?;
        checked += r.conditions.len();
        let t = &r.tables["quasiconvex"];
        let mut names: Vec<String> = t.rows.iter().map(|row| row[0].as_str().unwrap_or("").to_string()).collect();
        names.dedup();
        targets.push(names.len());
        let us: Vec<u64> = t.rows.iter().filter_map(|row| row[3].as_u64()).collect();
        if ![0, 1, 2].iter().all(|u| us.contains(u)) {
            return Err(format!("{name}: U values {us:?}"));
        }
    }
    if targets != [1, 7] {
        return Err(format!("target counts {targets:?}, expected [1, 7]"));
    }
    Ok(format!("{checked} (target, U) checks at radius 6, zero violations"))
}

fn criterion_3() -> Verdict {
    let (r, _) = run("interaction_z2z2.toml")?;
    require_pass(&r, "interaction_z2z2")?;
    let pairs = value(&r, "interaction_pairs").as_u64().unwrap_or(0);
    if pairs < MIN_COSET_PAIRS {
        return Err(format!("{pairs} coset pairs"));
    }
    let rows = r.tables["interaction"].rows.len();
    Ok(format!("{pairs} coset pairs, {rows} (pair, U) rows, both conversions hold"))
}

fn criterion_4() -> Verdict {
    let (r, t) = run("mc_f2.toml")?;
    require_pass(&r, "mc_f2")?;
    let samples = value(&r, "samples").as_u64().unwrap_or(0);
    let admitted = samples - value(&r, "rejected").as_u64().unwrap_or(samples);
    if admitted < MC_MIN_SAMPLES || t >= MC_RUNTIME {
        return Err(format!("{admitted} admissible samples in {t:.1?}"));
    }
    Ok(format!("{admitted} admissible decompositions at D = {}, zero counterexamples, {t:.1?}", r.constants[0].d))
}

fn criterion_5() -> Verdict {
    let (r, _) = run("constants_worked.toml")?;
    require_pass(&r, "constants_worked")?;
    let b = &r.constants[0];
    let want = b.lambda * (6 * b.r + 1) + 3 * b.c;
    if (b.a, b.c_const, b.b) != (4, 6, 20) || b.big_lambda != want {
        return Err(format!("A={} C={} B={} Lambda={}", b.a, b.c_const, b.b, b.big_lambda));
    }
    Ok(format!("A=4 C=6 B=20 R={} Lambda={} D={}", b.r, b.big_lambda, b.d))
}

fn amalgam_reports() -> Result<Vec<(ExperimentReport, Duration)>, String> {
    Ok(vec![run("amalgam_free.toml")?, run("amalgam_lattice.toml")?])
}

fn criterion_6(reports: &[(ExperimentReport, Duration)]) -> Verdict {
    let mut parts = Vec::new();
    for (r, t) in reports {
        require_pass(r, "amalgam")?;
        let n = value(r, "n").as_i64().unwrap_or(0);
        if n != r.constants[0].d + 1 {
            return Err(format!("N = {n}, D = {}", r.constants[0].d));
        }
        let words = value(r, "words").as_u64().unwrap_or(0);
        if value(r, "distinct_elements").as_u64() != Some(words) {
            return Err(format!("{words} words, {} distinct", value(r, "distinct_elements")));
        }
        let fixture = r.inputs["amalgam"]["fixture"].as_str().unwrap_or("").to_string();
        parts.push(format!("{fixture}: {words} words distinct, N={n} ({t:.1?})"));
    }
    Ok(parts.join("; "))
}

fn criterion_7(reports: &[(ExperimentReport, Duration)]) -> Verdict {
    let mut hyperbolic = 0;
    for (r, _) in reports {
        let c = r.conditions.iter().find(|c| c.id == "hyperbolic classification").ok_or("classification missing")?;
        if !c.pass {
            return Err(c.witness.clone().unwrap_or_default());
        }
        hyperbolic += value(r, "hyperbolic").as_u64().unwrap_or(0);
    }
    if hyperbolic == 0 {
        return Err("no element with cyclic syllable length >= 2 was sampled".into());
    }
    Ok(format!("{hyperbolic} elements with cyclic syllable length >= 2, all hyperbolic"))
}

fn criterion_8() -> Verdict {
    let cfg = config("transition_z2z2.toml");
    let tc = cfg.transition.as_ref().ok_or("transition section missing")?;
    if tc.samples != TRANSITION_SAMPLES || tc.us != [1, 2] {
        return Err(format!("{} samples, U = {:?}", tc.samples, tc.us));
    }
    let (r, _) = run("transition_z2z2.toml")?;
    require_pass(&r, "transition_z2z2")?;
    let max = r.tables["lift"].rows.iter().filter_map(|row| row[3].as_u64()).max().unwrap_or(0);
    Ok(format!("{} samples, {} measured (lift, U) pairs, max diameter {max} with B = {}", tc.samples, value(&r, "measured_pairs"), r.constants[0].b))
}

fn criterion_9() -> Verdict {
    let (r, t) = run("hnn.toml")?;
    require_pass(&r, "hnn")?;
    if t >= HNN_RUNTIME {
        return Err(format!("runtime {t:.1?}"));
    }
    let words = value(&r, "words");
    let distinct = value(&r, "distinct_elements");
    let n = value(&r, "n");
    let threshold = value(&r, "threshold");
    if r.conditions.iter().filter(|c| c.id.starts_with("truncation") || c.id.starts_with("distinct consecutive")).count() < 3 {
        return Err("truncation checks were not run".into());
    }
    Ok(format!("N={n} > threshold {threshold}: {words} reduced words, {distinct} distinct elements, truncations admissible ({t:.1?})"))
}

fn criterion_10() -> Verdict {
    let mut names = Vec::new();
    for name in [
        "contract_f2.toml",
        "contract_z2z2.toml",
        "quasiconvex_f2.toml",
        "quasiconvex_z2z2.toml",
        "constants_worked.toml",
        "interaction_z2z2.toml",
        "mc_f2.toml",
        "amalgam_free.toml",
        "amalgam_lattice.toml",
        "transition_z2z2.toml",
    ] {
        let a = run(name)?.0.to_json();
        let b = run(name)?.0.to_json();
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
        names.push(name.trim_end_matches(".toml"));
    }
    let mut hnn = config("hnn.toml");
    hnn.hnn.as_mut().ok_or("hnn section missing")?.max_t = 1;
    let a = run_experiment(&hnn).map_err(|e| e.to_string())?.to_json();
    let b = run_experiment(&hnn).map_err(|e| e.to_string())?.to_json();
    if a != b {
        return Err("hnn differs between runs".into());
    }
    names.push("hnn (one stable letter)");
    Ok(format!("byte-identical reports: {}", names.join(", ")))
}

fn main() {
    let mut results: Vec<(u32, Verdict)> = Vec::new();
    let mut report = |n: u32, v: Verdict| {
        match &v {
            Ok(msg) => println!("criterion {n:>2}: PASS  {msg}"),
            Err(msg) => println!("criterion {n:>2}: FAIL  {msg}"),
        }
        results.push((n, v));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    match amalgam_reports() {
        Ok(reps) => {
            report(6, criterion_6(&reps));
            report(7, criterion_7(&reps));
        }
        Err(e) => {
            report(6, Err(e.clone()));
            report(7, Err(e));
        }
    }
    report(8, criterion_8());
    report(9, criterion_9());
    report(10, criterion_10());
    let failed: Vec<u32> = results.iter().filter(|(_, v)| v.is_err()).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
