//! Dispatch from a configuration to the library pipelines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::cache::cached_ball;
use super::config::{AmalgamFixtureName, ExperimentConfig, ExperimentKind, RateSource};
use super::report::{ExperimentReport, Table};
use crate::admissible::{compute_constants, measure_factor_system, monte_carlo, ConstantsBundle, RateSet, TreeGenParams};
use crate::coarse::{
    bounded_interaction, check_quasiconvex, coset_subset, deep_and_transition_points, format_coset,
    scan_geodesic_projections, sigma_of, RateFunction,
};
use crate::combination::{
    check_amalgam_injectivity, check_hnn_fixture, check_hnn_injectivity, estimate_hnn_kappas, hnn_threshold,
    lift_coset_diam, lift_path, relative_geodesic_and_components, AmalgamFixture, HnnFixture, TruncationCheck,
};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Provenance, VertexSubset};
use crate::group::{Element, GroupModel, PeripheralCoset, SubgroupSpec, Syllable};

const CONTRACT: &str = "Definition (Contracting subset)";
const SIGMA: &str = "Lemma (quasiconvexity), \"3max(U, μ_{1,0}) + ε_{1,0}\"";
const NEAR: &str = "Lemma (Near contracting subsets)";
const PROPOSITION: &str = "Proposition, \"is a R-fellow traveller for γ\"";
const COROLLARY: &str = "Corollary, \"admissible path is a (Λ, 0)-quasigeodesic\"";
const FIRSTSTEP: &str = "Lemma (firststep), \"is a (λ, C_{λ,c})-quasigeodesic\"";
const AMALGAM: &str = "Theorem (Virtual amalgamation), \"⟨Ḣ, K̇⟩ = Ḣ ⋆_C K̇\"";
const AMALGAM_QG: &str = "Lemma (inject1), \"thus a (Λ, 0)-quasigeodesic\"";
const AMALGAM_PARABOLIC: &str = "Corollary after Lemma (amalgparabolic), \"is not conjugated into any P ∈ ℙ\"";
const HNN: &str = "Theorem (HNN extension), \"⟨H, t⟩ = H⋆_{Qᵗ = Q′} is relatively quasiconvex\"";
const HNN_ADM: &str = "Lemma (hnnadm), \"(D′, λ, (λ+2)|f|)-admissible path\"";
const HNN_TARGETS: &str = "Lemma (hnnadm), \"Peripheral cosets g_{i−1}P, g_iP are distinct\"";
const HNN_PARABOLIC: &str = "Lemma, \"Every parabolic subgroup in ⟨H, t⟩ is conjugate into H\"";
const LIFT: &str = "Lemma (Orthogonality of relative geodesics)";
const COMPONENTS: &str = "Definition (\"is called Pᵢ-component\"; \"connected\"; \"isolated\")";

/// Runs one experiment. Budget overruns yield a partial report flagged
/// with the resource that ran out.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let mut inputs = serde_json::to_value(cfg).expect("config serialises");
    if let Some(obj) = inputs.as_object_mut() {
        obj.remove("output");
    }
    let mut rep = ExperimentReport::new(cfg.kind.name(), cfg.seed, inputs);
    let model = cfg.model.build()?;
    let res = match cfg.kind {
        ExperimentKind::Contract => run_contract(cfg, &model, &mut rep),
        ExperimentKind::Quasiconvex => run_quasiconvex(cfg, &model, &mut rep),
        ExperimentKind::Constants => run_constants(cfg, &model, &mut rep),
        ExperimentKind::AdmissibleMc => run_mc(cfg, &model, &mut rep),
        ExperimentKind::Amalgam => run_amalgam(cfg, &model, &mut rep),
        ExperimentKind::Hnn => run_hnn(cfg, &mut rep),
        ExperimentKind::Transition => run_transition(cfg, &model, &mut rep),
    };
    match res {
        Ok(()) => {}
        Err(e @ Error::Budget { .. }) => rep.resource_overrun = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    if cfg.output.record_wall_time {
        rep.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    rep.finish();
    Ok(rep)
}

/// A reduced element with `syllables` syllables whose coordinates lie in
/// `[-max_coord, max_coord]`, not all zero.
pub fn random_element<R: Rng>(model: &GroupModel, syllables: usize, max_coord: i32, rng: &mut R) -> Element {
    let mut e = Element::identity();
    let mut prev: Option<usize> = None;
    for _ in 0..syllables {
        let choices: Vec<usize> = (0..model.n_factors()).filter(|&f| Some(f) != prev).collect();
        let Some(&f) = choices.get(rng.gen_range(0..choices.len().max(1))) else { break };
        let exps: Vec<i32> = loop {
            let v: Vec<i32> = (0..model.rank(f)).map(|_| rng.gen_range(-max_coord..=max_coord)).collect();
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        };
        e.mul_syllable(&Syllable::new(f, &exps));
        prev = Some(f);
    }
    e
}

/// Configured cosets followed by `random_cosets` random ones whose
/// representatives have length at most 3.
fn target_cosets(cfg: &ExperimentConfig, model: &GroupModel, rng: &mut ChaCha8Rng) -> Result<Vec<PeripheralCoset>> {
    let mut out = cfg.coset_list(model)?;
    let per: Vec<usize> = model.peripheral_factors();
    let factors: Vec<usize> = if per.is_empty() { (0..model.n_factors()).collect() } else { per };
    while out.len() < cfg.cosets.len() + cfg.random_cosets {
        let rep = random_element(model, rng.gen_range(1..=2), 1, rng);
        let f = factors[rng.gen_range(0..factors.len())];
        let c = PeripheralCoset::new(rep, f);
        if c.rep().len() <= 3 && !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// A subgroup or a peripheral coset named in a config.
enum Target {
    Subgroup(String, SubgroupSpec),
    Coset(PeripheralCoset),
}

impl Target {
    fn name(&self, model: &GroupModel) -> String {
        match self {
            Target::Subgroup(name, _) => name.clone(),
            Target::Coset(c) => format_coset(model, c),
        }
    }

    /// The target inside `g` and whether it is complete there.
    fn subset(&self, g: &MetricGraph) -> (VertexSubset, bool) {
        match self {
            Target::Subgroup(name, sg) => {
                let en = sg.enumerate_in_ball(g.model(), g.radius() as u64);
                let ids = en.elements.iter().filter_map(|e| g.id_of(e)).collect();
                (VertexSubset::new(ids, Provenance::Subgroup(name.clone())), en.stabilized)
            }
            Target::Coset(c) => (coset_subset(g, c), true),
        }
    }

    /// The translate through the identity, on which rates are measured.
    fn base(&self) -> Target {
        match self {
            Target::Subgroup(name, sg) => Target::Subgroup(name.clone(), sg.clone()),
            Target::Coset(c) => Target::Coset(PeripheralCoset::new(Element::identity(), c.factor())),
        }
    }
}

fn targets(cfg: &ExperimentConfig, model: &GroupModel, rng: &mut ChaCha8Rng) -> Result<Vec<Target>> {
    let mut out = Vec::new();
    if let Some(sg) = cfg.subgroup_spec(model)? {
        let name = format!("<{}>", cfg.subgroup.as_ref().expect("present").generators.join(", "));
        out.push(Target::Subgroup(name, sg));
    }
    out.extend(target_cosets(cfg, model, rng)?.into_iter().map(Target::Coset));
    Ok(out)
}

fn run_contract(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let cc = cfg.contract.as_ref().expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (hi, status) = cached_ball(model, cc.radius, cfg.budgets.max_vertices)?;
    let (lo, _) = cached_ball(model, cc.radius.saturating_sub(1), cfg.budgets.max_vertices)?;
    rep.value("ball_vertices", hi.n_vertices(), true);
    rep.value("cache", status, true);
    let mut table = Table::new(&["target", "mu", "max_proj_diam", "far_pairs", "stable"]);
    for t in targets(cfg, model, &mut rng)? {
        let name = t.name(model);
        let (x, stab) = t.subset(&hi);
        let (xl, _) = t.subset(&lo);
        let s = scan_geodesic_projections(&hi, &x, cc.max_mu)?;
        let sl = scan_geodesic_projections(&lo, &xl, cc.max_mu)?;
        for m in 0..=cc.max_mu as usize {
            let stable = stab && s.max_diam_at_mu[m] == sl.max_diam_at_mu[m];
            table.trusted &= stable || m != cc.mu as usize;
            table.push(vec![
                json!(name),
                json!(m),
                json!(s.max_diam_at_mu[m]),
                json!(s.far_pairs_at_mu[m]),
                json!(stable),
            ]);
        }
        let k = cc.mu as usize;
        let res = match (s.max_diam_at_mu.get(k).copied().flatten(), &s.witness_at_mu.get(k)) {
            (Some(d), Some(Some((a, b)))) if d > cc.epsilon => {
                Err(format!("geodesic from {a} to {b} projects with diameter {d} > {}", cc.epsilon))
            }
            _ => Ok(()),
        };
        rep.condition_with_trust(format!("contract {name}"), CONTRACT, res, stab);
    }
    rep.table("epsilon", table);
    Ok(())
}

/// `(mu, eps)` measured on `t` in two balls: `mu` is the first level whose
/// largest projection diameter agrees between them, `eps` that diameter
/// plus one.
fn measure_mu_eps(t: &Target, hi: &MetricGraph, lo: &MetricGraph) -> Result<(i64, i64, bool)> {
    let (x, stab) = t.subset(hi);
    let (xl, _) = t.subset(lo);
    let s = scan_geodesic_projections(hi, &x, 3)?;
    let sl = scan_geodesic_projections(lo, &xl, 3)?;
    let stable = (0..4).find(|&m| s.max_diam_at_mu[m].is_some() && s.max_diam_at_mu[m] == sl.max_diam_at_mu[m]);
    let m = stable.unwrap_or(3);
    Ok((m as i64, s.max_diam_at_mu[m].unwrap_or(0) as i64 + 1, stable.is_some() && stab))
}

fn run_quasiconvex(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let qc = cfg.quasiconvex.as_ref().expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (g, _) = cached_ball(model, qc.radius, cfg.budgets.max_vertices)?;
    let mr = cfg.rates.measure_radius.min(qc.radius);
    let (hi, _) = cached_ball(model, mr, cfg.budgets.max_vertices)?;
    let (lo, _) = cached_ball(model, mr.saturating_sub(1), cfg.budgets.max_vertices)?;
    let mut table = Table::new(&["target", "mu", "epsilon", "U", "sigma", "pairs", "max_observed", "pass"]);
    for t in targets(cfg, model, &mut rng)? {
        let name = t.name(model);
        let (mu, eps, stable) = measure_mu_eps(&t.base(), &hi, &lo)?;
        let (x, stab) = t.subset(&g);
        table.trusted &= stable && stab;
        let sigma = sigma_of(&RateFunction::constant(mu), &RateFunction::constant(eps))?;
        for r in check_quasiconvex(&g, &x, &qc.us, &sigma)? {
            table.push(vec![
                json!(name),
                json!(mu),
                json!(eps),
                json!(r.u),
                json!(r.sigma),
                json!(r.pairs),
                json!(r.max_observed),
                json!(r.pass),
            ]);
            let res = match (&r.witness, r.pass) {
                (_, true) => Ok(()),
                (Some((a, b, v)), false) => Err(format!("geodesic {a} to {b} reaches {v}, beyond sigma = {}", r.sigma)),
                (None, false) => Err(format!("max excursion {} > sigma = {}", r.max_observed, r.sigma)),
            };
            rep.condition_with_trust(format!("sigma {name} U={}", r.u), SIGMA, res, stab);
        }
    }
    rep.table("quasiconvex", table);
    Ok(())
}

/// Rates from the configured source; the flag reports stabilisation.
fn rates(cfg: &ExperimentConfig, model: &GroupModel) -> Result<(RateSet, bool)> {
    match cfg.rates.source {
        RateSource::Worked => Ok((RateSet::worked_example(), true)),
        RateSource::Measured => {
            let sys = measure_factor_system(model, cfg.rates.measure_radius, cfg.rates.rep_radius)?;
            Ok((sys.rates, sys.stabilized))
        }
    }
}

fn record_rates(rep: &mut ExperimentReport, rates: &RateSet, trusted: bool) {
    rep.value("rates", rates, trusted);
}

fn constants_tables(bundles: &[ConstantsBundle]) -> (Table, Table) {
    let mut cand = Table::new(&["lambda", "c", "name", "formula", "raw", "strict", "value"]);
    let mut main = Table::new(&["lambda", "c", "A", "B", "C", "R", "Lambda", "D"]);
    for b in bundles {
        for k in &b.candidates {
            cand.push(vec![
                json!(b.lambda),
                json!(b.c),
                json!(k.name),
                json!(k.formula),
                json!(k.raw),
                json!(k.strict),
                json!(k.value),
            ]);
        }
        main.push(vec![
            json!(b.lambda),
            json!(b.c),
            json!(b.a),
            json!(b.b),
            json!(b.c_const),
            json!(b.r),
            json!(b.big_lambda),
            json!(b.d),
        ]);
    }
    (cand, main)
}

fn anchor_for(name: &str) -> &'static str {
    match name {
        "A" => "Eq. (A)",
        "C" => "Eq. (C)",
        "B" => NEAR,
        "R" => "(R1)-(R3)",
        "Lambda" => "Corollary, \"set Λ = λ(6R + 1) + 3c\"",
        _ => "(D1)-(D5)",
    }
}

fn run_constants(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let cc = cfg.constants.as_ref().expect("validated");
    let (rates, trusted) = rates(cfg, model)?;
    record_rates(rep, &rates, trusted);
    let bundles = cc.classes.iter().map(|&(l, c)| compute_constants(&rates, l, c)).collect::<Result<Vec<_>>>()?;
    let (mut cand, mut main) = constants_tables(&bundles);
    cand.trusted = trusted;
    main.trusted = trusted;
    rep.table("candidates", cand);
    rep.table("constants", main);
    if let Some(first) = bundles.first() {
        for (name, want) in &cc.expect {
            let got = match name.as_str() {
                "A" => first.a,
                "B" => first.b,
                "C" => first.c_const,
                "R" => first.r,
                "Lambda" => first.big_lambda,
                "D" => first.d,
                other => {
                    return Err(Error::Config {
                        path: format!("constants.expect.{other}"),
                        message: "expected one of A, B, C, R, Lambda, D".into(),
                    })
                }
            };
            let res = if got == *want { Ok(()) } else { Err(format!("{name} = {got}, expected {want}")) };
            rep.condition(format!("{name} at (lambda, c) = ({}, {})", first.lambda, first.c), anchor_for(name), res);
        }
        for b in &bundles {
            let want = b.lambda * (6 * b.r + 1) + 3 * b.c;
            let res = if b.big_lambda == want { Ok(()) } else { Err(format!("Lambda = {}, formula gives {want}", b.big_lambda)) };
            rep.condition(format!("Lambda at ({}, {})", b.lambda, b.c), anchor_for("Lambda"), res);
        }
    }
    if !cc.interaction_us.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cosets = target_cosets(cfg, model, &mut rng)?;
        let mu = rates.mu.at(1, 0)?;
        let eps = rates.epsilon.at(1, 0)?;
        let bundle = match bundles.first() {
            Some(b) => b.clone(),
            None => compute_constants(&rates, 1, 0)?,
        };
        let mut us = cc.interaction_us.clone();
        if !us.contains(&(mu as u32)) {
            us.push(mu as u32);
        }
        us.sort_unstable();
        let mut table =
            Table::new(&["x", "x_prime", "U", "measured_nu", "predicted_nu", "measured_b", "predicted_b"]);
        for (i, x) in cosets.iter().enumerate() {
            for y in &cosets[i + 1..] {
                let bi = bounded_interaction(model, x, y, &us, mu, eps, 8)?;
                for ((u, nu), (_, pnu)) in bi.measured_nu.iter().zip(&bi.predicted_nu) {
                    table.push(vec![
                        json!(bi.x),
                        json!(bi.x_prime),
                        json!(u),
                        json!(nu),
                        json!(pnu),
                        json!(bi.measured_b),
                        json!(bi.predicted_b),
                    ]);
                    if cc.interaction_us.contains(u) {
                        let res = if nu <= pnu { Ok(()) } else { Err(format!("nu({u}) = {nu} > {pnu}")) };
                        rep.condition(format!("nu from B: {} vs {} U={u}", bi.x, bi.x_prime), NEAR, res);
                    }
                }
                let res = match bi.predicted_b {
                    Some(pb) if bi.measured_b <= pb => Ok(()),
                    Some(pb) => Err(format!("B = {} > {pb}", bi.measured_b)),
                    None => Err("nu(mu) was not measured".into()),
                };
                rep.condition(format!("B from nu: {} vs {}", bi.x, bi.x_prime), NEAR, res);
                if bi.measured_b as i64 > bundle.b {
                    rep.witnesses.push(format!("{} vs {}: measured B above the bundle's B", bi.x, bi.x_prime));
                }
            }
        }
        rep.value("interaction_pairs", cosets.len() * cosets.len().saturating_sub(1) / 2, true);
        rep.table("interaction", table);
    }
    rep.constants = bundles;
    Ok(())
}

fn run_mc(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let mc = cfg.mc.as_ref().expect("validated");
    let (rates, trusted) = rates(cfg, model)?;
    record_rates(rep, &rates, trusted);
    let bundle = compute_constants(&rates, 1, 0)?;
    let params = TreeGenParams {
        d: bundle.d,
        max_interior: mc.max_interior,
        extra_len: mc.extra_len,
        end_len: mc.end_len,
        q_len: mc.q_len,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = monte_carlo(model, &params, mc.samples, &bundle, &rates, &mut rng)?;
    rep.value("samples", r.samples, true);
    rep.value("rejected", r.rejected, true);
    rep.value("max_path_len", r.max_path_len, true);
    rep.value("max_fitted_lambda", &r.max_fitted_lambda, true);
    let first = |v: &[String]| v.first().cloned().map_or(Ok(()), |w| Err(format!("{} failures, first: {w}", v.len())));
    rep.condition("fellow traveller", PROPOSITION, first(&r.fellow_failures));
    rep.condition("quasigeodesic", COROLLARY, first(&r.qg_failures));
    rep.condition("near contracting", NEAR, first(&r.near_contracting_failures));
    rep.condition("first step", FIRSTSTEP, first(&r.firststep_failures));
    let admitted = r.samples - r.rejected;
    let res = if admitted > 0 { Ok(()) } else { Err("no generated decomposition was admissible".to_string()) };
    rep.condition("admissible samples", "Definition (Admissible Paths)", res);
    rep.constants.push(bundle);
    Ok(())
}

fn pairs_table(columns: [&str; 2], pairs: &[(String, String)]) -> Table {
    let mut t = Table::new(&columns);
    for (a, b) in pairs {
        t.push(vec![json!(a), json!(b)]);
    }
    t
}

fn first_or_ok(v: &[String]) -> std::result::Result<(), String> {
    v.first().cloned().map_or(Ok(()), |w| Err(format!("{} cases, first: {w}", v.len())))
}

fn run_amalgam(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let ac = cfg.amalgam.as_ref().expect("validated");
    let (rates, trusted) = rates(cfg, model)?;
    record_rates(rep, &rates, trusted);
    let bundle = compute_constants(&rates, 1, 0)?;
    let n = ac.n.unwrap_or(bundle.d as i32 + 1);
    rep.value("n", n, trusted);
    let fx = match ac.fixture {
        AmalgamFixtureName::Free => AmalgamFixture::free(n),
        AmalgamFixtureName::Lattice => AmalgamFixture::lattice(n),
    };
    let r = check_amalgam_injectivity(&fx, ac.depth, ac.syllables, &bundle, &rates)?;
    rep.value("words", r.words, true);
    rep.value("distinct_elements", r.distinct_elements, true);
    rep.value("max_fitted_lambda", &r.max_fitted_lambda, true);
    rep.value("hyperbolic", r.hyperbolic, true);
    rep.value("parabolic", r.parabolic, true);
    let coll: Vec<String> = r.collisions.iter().map(|(a, b)| format!("{a} = {b}")).collect();
    rep.condition("distinct values", AMALGAM, first_or_ok(&coll));
    rep.condition("nontrivial values", AMALGAM, first_or_ok(&r.trivial_words));
    rep.condition("normal paths admissible", "Definition (Admissible Paths)", first_or_ok(&r.admissible_failures));
    rep.condition("normal paths quasigeodesic", AMALGAM_QG, first_or_ok(&r.qg_failures));
    rep.condition("hyperbolic classification", AMALGAM_PARABOLIC, first_or_ok(&r.misclassified));
    rep.table("collisions", pairs_table(["first", "second"], &r.collisions));
    rep.table("fitted", pairs_table(["word", "lambda"], &r.fitted));
    rep.constants.push(bundle);
    Ok(())
}

fn run_hnn(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let hc = cfg.hnn.as_ref().expect("validated");
    let model = GroupModel::z2_star_z2();
    let (rates, trusted) = rates(cfg, &model)?;
    record_rates(rep, &rates, trusted);
    let bundle = compute_constants(&rates, 1, 3)?;
    let l = rates.nu.at_u(1)? as u64 + 1;
    let kappas = estimate_hnn_kappas(&HnnFixture::standard(1), hc.kappa_radius, 1, l)?;
    let threshold = hnn_threshold(&bundle, &kappas);
    let n = hc.n.unwrap_or(threshold as i32 + 1);
    rep.value("kappas", &kappas, true);
    rep.value("threshold", threshold, trusted);
    rep.value("n", n, true);
    let fx = HnnFixture::standard(n);
    rep.value("fixture", check_hnn_fixture(&fx, 4), true);
    let check = TruncationCheck { bundle: &bundle, d_prime: bundle.d, rates: &rates };
    let r = check_hnn_injectivity(&fx, hc.max_t, hc.max_h, hc.truncation.then_some(check))?;
    rep.value("words", r.words, true);
    rep.value("formal_classes", r.formal_classes, true);
    rep.value("distinct_elements", r.distinct_elements, true);
    rep.value("parabolic", r.parabolic, true);
    let coll: Vec<String> = r.collisions.iter().map(|(a, b)| format!("{a} = {b}")).collect();
    let dis: Vec<String> = r.oracle_disagreements.iter().map(|(a, b)| format!("{a} ~ {b}")).collect();
    rep.condition("distinct values", HNN, first_or_ok(&coll));
    rep.condition("normal form agreement", HNN, first_or_ok(&dis));
    rep.condition("nontrivial values", HNN, first_or_ok(&r.trivial_words));
    rep.condition("parabolics conjugate into H", HNN_PARABOLIC, first_or_ok(&r.parabolic_outside_h));
    if let Some(t) = &r.truncation {
        rep.condition("truncations admissible", HNN_ADM, first_or_ok(&t.admissible_failures));
        rep.condition("truncations quasigeodesic", HNN, first_or_ok(&t.qg_failures));
        rep.condition("distinct consecutive targets", HNN_TARGETS, first_or_ok(&t.repeated_targets));
        let floor = n as i64 - kappas.kappa1() as i64 - kappas.kappa2() as i64;
        let res = match t.min_p_length {
            Some(m) if (m as i64) < floor => Err(format!("shortest p' has length {m} < {floor}")),
            _ => Ok(()),
        };
        rep.condition("truncated piece length", HNN_ADM, res);
        rep.value("min_p_length", t.min_p_length, true);
        rep.table("fitted", pairs_table(["word", "lambda"], &t.fitted));
    }
    rep.table("collisions", pairs_table(["first", "second"], &r.collisions));
    rep.constants.push(bundle);
    Ok(())
}

fn run_transition(cfg: &ExperimentConfig, model: &GroupModel, rep: &mut ExperimentReport) -> Result<()> {
    let tc = cfg.transition.as_ref().expect("validated");
    let (rates, trusted) = rates(cfg, model)?;
    record_rates(rep, &rates, trusted);
    let bundle = compute_constants(&rates, 1, 0)?;
    let b = bundle.b as u64;
    let per = model.peripheral_factors();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&["element", "target", "U", "diam", "bound"]);
    let (mut lift_fail, mut comp_fail, mut geo_fail, mut deep_fail) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut measured = 0usize;
    for _ in 0..tc.samples {
        let g = random_element(model, tc.syllables, tc.max_coord, &mut rng);
        let last = g.last().map(|s| s.factor);
        let choices: Vec<usize> = per.iter().copied().filter(|&f| Some(f) != last).collect();
        let Some(&f) = choices.get(rng.gen_range(0..choices.len().max(1))) else { continue };
        let target = PeripheralCoset::new(g.clone(), f);
        let (rel, comps) = relative_geodesic_and_components(model, &g);
        if !comps.all_isolated {
            comp_fail.push(model.format(&g));
        }
        let lift = lift_path(model, &rel);
        if lift.len() as u64 != g.len() {
            geo_fail.push(model.format(&g));
        }
        for &u in &tc.us {
            let bound = 4 * b * (u as u64 + 1).pow(2) + 2 * (u as u64 + 1);
            let diam = lift_coset_diam(&lift, &target, u as u64);
            if let Some(d) = diam {
                measured += 1;
                if d > bound {
                    lift_fail.push(format!("{} near {} at U={u}: {d} > {bound}", model.format(&g), format_coset(model, &target)));
                }
            }
            table.push(vec![
                json!(model.format(&g)),
                json!(format_coset(model, &target)),
                json!(u),
                diam.map_or(Value::Null, |d| json!(d)),
                json!(bound),
            ]);
            let nu = rates.nu.at_u(u as i64)? as u64;
            let d = deep_and_transition_points(model, &lift, u, nu + 1, Some(nu))?;
            if !d.uniqueness_ok {
                deep_fail.push(format!("{} at U={u}", model.format(&g)));
            }
        }
    }
    rep.value("measured_pairs", measured, true);
    rep.condition("lift orthogonality", LIFT, first_or_ok(&lift_fail));
    rep.condition("isolated components", COMPONENTS, first_or_ok(&comp_fail));
    rep.condition("lifts are geodesics", "Definition (Lift path)", first_or_ok(&geo_fail));
    rep.condition("unique deep coset", "Lemma (Long parabolic intersection)", first_or_ok(&deep_fail));
    rep.table("lift", table);
    rep.constants.push(bundle);
    Ok(())
}
