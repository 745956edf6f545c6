//! Constants pipeline, admissible decompositions, fellow travelling and a
//! seeded generator of admissible paths in free groups.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::coarse::{elements_diam, 
    check_orthogonal, coset_intersection, path_coset_profile, scan_geodesic_projections,
    sigma_of, RateFunction,
};
use crate::error::{Error, Result};
use crate::graph::{fmt_rat, is_quasigeodesic, min_lambda, qg_verdict, rat, MetricGraph, PathIndex, PathSeq, Provenance, VertexSubset};
use crate::group::{Element, GroupModel, Letter, ModelKind, PeripheralCoset};

/// The rate functions feeding the constants pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RateSet {
    pub mu: RateFunction,
    pub epsilon: RateFunction,
    pub tau: RateFunction,
    pub nu: RateFunction,
    pub sigma: RateFunction,
}

impl RateSet {
    /// The worked table: `mu = eps = 1`, `tau = 2`, `nu(U) = 2U + 2`,
    /// `sigma(U) = 3 max(U, 1) + 1`.
    pub fn worked_example() -> Self {
        RateSet {
            mu: RateFunction::constant(1),
            epsilon: RateFunction::constant(1),
            tau: RateFunction::constant(2),
            nu: RateFunction::Affine {
                slope: 2,
                intercept: 2,
            },
            sigma: RateFunction::ThreeMaxPlus { mu: 1, eps: 1 },
        }
    }
}

/// One evaluated candidate of the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub name: String,
    pub formula: String,
    /// Value of the formula itself.
    pub raw: i64,
    /// Whether the bound is strict, so the value is `raw + 1`.
    pub strict: bool,
    pub value: i64,
}

/// All constants at one `(lambda, c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantsBundle {
    pub lambda: i64,
    pub c: i64,
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "B")]
    pub b: i64,
    #[serde(rename = "C")]
    pub c_const: i64,
    #[serde(rename = "R")]
    pub r: i64,
    #[serde(rename = "Lambda")]
    pub big_lambda: i64,
    #[serde(rename = "D")]
    pub d: i64,
    pub candidates: Vec<Candidate>,
    pub inputs: RateSet,
}

impl ConstantsBundle {
    pub fn candidate(&self, name: &str) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.name == name)
    }
}

/// `lambda (6R + 1) + 3c`.
pub fn big_lambda(lambda: i64, c: i64, r: i64) -> i64 {
    lambda * (6 * r + 1) + 3 * c
}

/// Evaluates the constants in the order `A, C, B`, then `R1..R3, R`, then
/// `Lambda`, then `D1..D5, D`.
pub fn compute_constants(rates: &RateSet, lambda: i64, c: i64) -> Result<ConstantsBundle> {
    let mu10 = rates.mu.at(1, 0)?;
    let eps10 = rates.epsilon.at(1, 0)?;
    let mu = rates.mu.at(lambda, c)?;
    let eps = rates.epsilon.at(lambda, c)?;
    let tau = rates.tau.at(lambda, c)?;
    let sigma0 = rates.sigma.at_u(0)?;
    let sigma_mu = rates.sigma.at_u(mu10)?;
    let nu_arg = mu10 + sigma0;
    let nu_val = rates.nu.at_u(nu_arg)?;

    let mut cands = Vec::new();
    let mut push = |name: &str, formula: String, raw: i64, strict: bool| -> i64 {
        let value = raw + strict as i64;
        cands.push(Candidate {
            name: name.into(),
            formula,
            raw,
            strict,
            value,
        });
        value
    };
    let a = push("A", format!("mu + tau + eps = {mu} + {tau} + {eps}"), mu + tau + eps, false);
    let cc = push(
        "C",
        format!("lambda (mu + eps + A) + c = {lambda} ({mu} + {eps} + {a}) + {c}"),
        lambda * (mu + eps + a) + c,
        false,
    );
    let b = push(
        "B",
        format!("2 eps10 + 2 mu10 + nu(mu10 + sigma(0)) + A = 2*{eps10} + 2*{mu10} + nu({nu_arg}) + {a}"),
        2 * eps10 + 2 * mu10 + nu_val + a,
        false,
    );
    let r1 = push("R1", format!("A + 2 eps10 + 4 mu10 + 1 with A = {a}"), a + 2 * eps10 + 4 * mu10 + 1, true);
    let r2 = push("R2", format!("B + 3 eps10 + 4 mu10 + 1 with B = {b}"), b + 3 * eps10 + 4 * mu10 + 1, true);
    let r3 = push("R3", format!("mu10 + 5 eps10 + B + 1 with B = {b}"), mu10 + 5 * eps10 + b + 1, true);
    let r = r1.max(r2).max(r3);
    let lam = big_lambda(lambda, c, r);
    let d1 = push("D1", format!("mu10 + eps10 + A + C with C = {cc}"), mu10 + eps10 + a + cc, true);
    let d2 = push("D2", "2A + 3 eps10 + 6 mu10".into(), 2 * a + 3 * eps10 + 6 * mu10, true);
    let d3 = push("D3", format!("Lambda (B + eps + mu) with Lambda = {lam}"), lam * (b + eps + mu), true);
    let d4 = push(
        "D4",
        format!("Lambda (R + sigma(mu10)) with R = {r}, sigma(mu10) = {sigma_mu}"),
        lam * (r + sigma_mu),
        true,
    );
    let d5 = push("D5", "13 eps10 + 6 mu10 + 2B".into(), 13 * eps10 + 6 * mu10 + 2 * b, true);
    let d = d1.max(d2).max(d3).max(d4).max(d5);
    Ok(ConstantsBundle {
        lambda,
        c,
        a,
        b,
        c_const: cc,
        r,
        big_lambda: lam,
        d,
        candidates: cands,
        inputs: rates.clone(),
    })
}

/// Rates measured on the system of all cosets of all factors of a model.
#[derive(Clone, Debug, Serialize)]
pub struct MeasuredSystem {
    pub rates: RateSet,
    /// `(factor, radius, largest projection diameter per mu)`.
    pub scans: Vec<(usize, u32, Vec<Option<u64>>)>,
    /// Whether the contraction value stabilised between the two radii.
    pub stabilized: bool,
    pub nu_pairs: usize,
}

/// Measures `mu`, `eps` on ball geodesics at radii `radius - 1` and
/// `radius`, `nu` on pairs of distinct factor cosets with one of them
/// through the identity and the other with representative in the ball of
/// radius `rep_radius`, and fixes `tau = 1`.
pub fn measure_factor_system(model: &GroupModel, radius: u32, rep_radius: u32) -> Result<MeasuredSystem> {
    if radius < 2 {
        return Err(Error::Precondition("measurement radius must be at least 2".into()));
    }
    let max_mu = 3u32;
    let hi = MetricGraph::ball(model, radius, 1 << 22)?;
    let lo = MetricGraph::ball(model, radius - 1, 1 << 22)?;
    let mut mu = 0u32;
    let mut eps = 0u64;
    let mut stabilized = true;
    let mut scans = Vec::new();
    for f in 0..model.n_factors() {
        let x = PeripheralCoset::new(Element::identity(), f);
        let sub = |g: &MetricGraph| {
            let ids = x
                .points_in_ball(model, g.radius() as u64)
                .iter()
                .filter_map(|e| g.id_of(e))
                .collect();
            VertexSubset::new(ids, Provenance::Subgroup(format!("factor {f}")))
        };
        let s_hi = scan_geodesic_projections(&hi, &sub(&hi), max_mu)?;
        let s_lo = scan_geodesic_projections(&lo, &sub(&lo), max_mu)?;
        let stable = (0..=max_mu as usize)
            .find(|&m| s_hi.max_diam_at_mu[m].is_some() && s_hi.max_diam_at_mu[m] == s_lo.max_diam_at_mu[m]);
        let m = match stable {
            Some(m) => m,
            None => {
                stabilized = false;
                max_mu as usize
            }
        };
        mu = mu.max(m as u32);
        eps = eps.max(s_hi.max_diam_at_mu[m].unwrap_or(0) + 1);
        scans.push((f, radius, s_hi.max_diam_at_mu.clone()));
        scans.push((f, radius - 1, s_lo.max_diam_at_mu));
    }
    let mu_f = RateFunction::constant(mu as i64);
    let eps_f = RateFunction::constant(eps as i64);
    let sigma = sigma_of(&mu_f, &eps_f)?;
    let u_needed = mu as i64 + sigma.at_u(0)?;
    let mut cosets: BTreeSet<PeripheralCoset> = BTreeSet::new();
    for g in model.ball_elements(rep_radius) {
        for f in 0..model.n_factors() {
            cosets.insert(PeripheralCoset::new(g.clone(), f));
        }
    }
    let mut nu = vec![0i64; u_needed as usize + 1];
    let mut pairs = 0;
    for f in 0..model.n_factors() {
        let x = PeripheralCoset::new(Element::identity(), f);
        for y in cosets.iter().filter(|y| **y != x) {
            pairs += 1;
            for (u, slot) in nu.iter_mut().enumerate() {
                let pts = coset_intersection(model, &x, y, u as u32)?;
                let d = elements_diam(&pts);
                if !pts.is_empty() {
                    *slot = (*slot).max(d as i64 + 1);
                }
            }
        }
    }
    Ok(MeasuredSystem {
        rates: RateSet {
            mu: mu_f,
            epsilon: eps_f,
            tau: RateFunction::constant(1),
            nu: RateFunction::table_u(&nu),
            sigma,
        },
        scans,
        stabilized,
        nu_pairs: pairs,
    })
}

/// Alternating pieces `p_0, q_1, p_1, ..., q_n, p_n` with a target coset
/// for each `p_i`. End pieces may be trivial and untargeted.
#[derive(Clone, Debug)]
pub struct AdmissibleDecomposition {
    pub pieces: Vec<PathSeq>,
    pub targets: Vec<Option<PeripheralCoset>>,
    pub lambda: i64,
    pub c: i64,
}

impl AdmissibleDecomposition {
    pub fn n(&self) -> usize {
        self.pieces.len() / 2
    }

    pub fn p(&self, i: usize) -> &PathSeq {
        &self.pieces[2 * i]
    }

    pub fn q(&self, i: usize) -> &PathSeq {
        &self.pieces[2 * i - 1]
    }

    /// Checks piece count, target count and matching endpoints.
    pub fn check_structure(&self) -> Result<()> {
        if self.pieces.len().is_multiple_of(2) {
            return Err(Error::Structure(format!(
                "expected an odd number of pieces, got {}",
                self.pieces.len()
            )));
        }
        if self.targets.len() != self.n() + 1 {
            return Err(Error::Structure(format!(
                "{} targets for {} p-pieces",
                self.targets.len(),
                self.n() + 1
            )));
        }
        for (k, w) in self.pieces.windows(2).enumerate() {
            if w[0].end() != w[1].start {
                return Err(Error::Structure(format!("pieces {k} and {} do not meet", k + 1)));
            }
        }
        for i in 1..self.n() {
            if self.targets[i].is_none() {
                return Err(Error::Structure(format!("interior piece p{i} has no target")));
            }
        }
        Ok(())
    }

    /// The concatenated path.
    pub fn path(&self) -> PathSeq {
        let mut letters = Vec::new();
        for p in &self.pieces {
            letters.extend_from_slice(&p.letters);
        }
        PathSeq::new(self.pieces[0].start.clone(), letters)
    }
}

/// Outcome of one condition of the definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub id: u8,
    pub anchor: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleReport {
    pub d: i64,
    pub pass: bool,
    pub first_violation: Option<u8>,
    pub conditions: Vec<ConditionCheck>,
}

/// Checks conditions (1) to (4) of the definition of an admissible path.
/// Bounded intersection of consecutive targets is measured at each `U` in
/// `nu_us`.
pub fn verify_admissible(
    model: &GroupModel,
    dec: &AdmissibleDecomposition,
    d: i64,
    rates: &RateSet,
    nu_us: &[u32],
) -> Result<AdmissibleReport> {
    dec.check_structure()?;
    let (lam, c) = (dec.lambda, dec.c);
    let long = lam * d + c;
    let n = dec.n();

    let mut w1 = None;
    for i in 0..=n {
        if let Some(x) = &dec.targets[i] {
            let p = dec.p(i);
            if !x.contains(&p.start) || !x.contains(&p.end()) {
                w1 = Some(format!("p{i} has an endpoint outside its target"));
                break;
            }
        }
    }

    let w2 = (1..n)
        .find(|&i| dec.p(i).len() as i64 <= long)
        .map(|i| format!("p{i} has length {} <= {long}", dec.p(i).len()));

    let mu = rates.mu.at(lam, c)?;
    let tau = rates.tau.at(lam, c)?;
    let mut w3 = None;
    'outer: for i in 1..=n {
        for (side, t) in [("start", &dec.targets[i - 1]), ("end", &dec.targets[i])] {
            if let Some(x) = t {
                let r = check_orthogonal(model, dec.q(i), x, mu, tau);
                if !r.pass {
                    w3 = Some(format!(
                        "q{i} meets the {mu}-neighbourhood of its {side} target in diameter {} > {tau}",
                        r.measured_diam
                    ));
                    break 'outer;
                }
            }
        }
    }

    let mut w4 = None;
    for i in 1..=n {
        let (Some(x), Some(y)) = (&dec.targets[i - 1], &dec.targets[i]) else {
            continue;
        };
        let long_q = dec.q(i).len() as i64 > long;
        let bounded = if x == y {
            Err("targets coincide".to_string())
        } else {
            let mut res = Ok(());
            for &u in nu_us {
                let pts = coset_intersection(model, x, y, u)?;
                let diam = elements_diam(&pts) as i64;
                let bound = rates.nu.at_u(u as i64)?;
                if !pts.is_empty() && diam >= bound {
                    res = Err(format!("intersection at U={u} has diameter {diam} >= {bound}"));
                    break;
                }
            }
            res
        };
        if let (Err(why), false) = (bounded, long_q) {
            w4 = Some(format!("X{} and X{i}: {why}, and q{i} is not long", i - 1));
            break;
        }
    }

    let anchors = [
        "Definition (Admissible Paths) (1)",
        "Definition (Admissible Paths) (2)",
        "Definition (Admissible Paths) (3)",
        "Definition (Admissible Paths) (4)",
    ];
    let conditions: Vec<ConditionCheck> = [w1, w2, w3, w4]
        .into_iter()
        .zip(anchors)
        .enumerate()
        .map(|(k, (w, anchor))| ConditionCheck {
            id: k as u8 + 1,
            anchor,
            pass: w.is_none(),
            witness: w,
        })
        .collect();
    let first_violation = conditions.iter().find(|c| !c.pass).map(|c| c.id);
    Ok(AdmissibleReport {
        d,
        pass: first_violation.is_none(),
        first_violation,
        conditions,
    })
}

/// Marker positions found on the comparison path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FellowReport {
    pub pass: bool,
    /// `(z_i, w_i)` as vertex positions on `alpha`.
    pub markers: Vec<(usize, usize)>,
    /// Index of the first piece without markers.
    pub failed_at: Option<usize>,
}

/// Greedy left-to-right search for successive markers `z_i, w_i` on
/// `alpha` with `z_i != w_i`, `d(z_i, (p_i)_-) < R` and `d(w_i, (p_i)_+) < R`.
pub fn check_fellow_traveller(dec: &AdmissibleDecomposition, alpha: &PathSeq, r: u64) -> Result<FellowReport> {
    dec.check_structure()?;
    let path = dec.path();
    if path.start != alpha.start || path.end() != alpha.end() {
        return Err(Error::Precondition("alpha must share endpoints with the decomposition".into()));
    }
    let mut markers = Vec::new();
    let mut pos = 0usize;
    for i in 0..=dec.n() {
        let p = dec.p(i);
        let Some(z) = first_near(alpha, pos, &p.start, r, None) else {
            return Ok(FellowReport { pass: false, markers, failed_at: Some(i) });
        };
        let zv = alpha.vertex(z);
        let Some(w) = first_near(alpha, z, &p.end(), r, Some(&zv)) else {
            return Ok(FellowReport { pass: false, markers, failed_at: Some(i) });
        };
        markers.push((z, w));
        pos = w;
    }
    Ok(FellowReport { pass: true, markers, failed_at: None })
}

/// First position `k >= from` with `d(alpha_k, x) < r`, skipping vertices
/// equal to `avoid`.
fn first_near(alpha: &PathSeq, from: usize, x: &Element, r: u64, avoid: Option<&Element>) -> Option<usize> {
    let start = alpha.vertex(from);
    let mut rel = x.left_div(&start);
    let mut len = rel.len() as i64;
    let mut own = avoid.map(|a| a.left_div(&start));
    let mut own_len = own.as_ref().map(|o| o.len() as i64);
    for k in from..=alpha.len() {
        if k > from {
            let l = alpha.letters[k - 1];
            len += rel.mul_letter(l);
            if let (Some(o), Some(ol)) = (own.as_mut(), own_len.as_mut()) {
                *ol += o.mul_letter(l);
            }
        }
        if (len as u64) < r && own_len.is_none_or(|ol| ol > 0) {
            return Some(k);
        }
    }
    None
}

/// `diam proj_{X_k}(p_{k-1} q_k)` for `k >= 1` with a target.
pub fn near_contracting_diam(model: &GroupModel, dec: &AdmissibleDecomposition, k: usize) -> Option<u64> {
    let x = dec.targets[k].as_ref()?;
    let pq = dec.p(k - 1).concat(dec.q(k)).ok()?;
    Some(path_coset_profile(model, &pq, x).1)
}

/// Parameters of the random decomposition generator.
#[derive(Clone, Debug, Serialize)]
pub struct TreeGenParams {
    pub d: i64,
    pub max_interior: usize,
    pub extra_len: usize,
    pub end_len: usize,
    pub q_len: usize,
}

/// Random decomposition in a free group: `p`-pieces are powers of one
/// generator along its coset, `q`-pieces are reduced words whose first
/// letter avoids the factor of the previous target and whose last letter
/// avoids the factor of the next one. Interior `p`-pieces have length
/// above `d`.
pub fn random_tree_decomposition<R: Rng>(
    model: &GroupModel,
    params: &TreeGenParams,
    rng: &mut R,
) -> Result<AdmissibleDecomposition> {
    let k = match model.kind() {
        ModelKind::Free { rank } if *rank >= 2 => *rank,
        _ => return Err(Error::Precondition("generator needs a free group of rank at least 2".into())),
    };
    let n = rng.gen_range(1..=params.max_interior.max(1) + 1);
    let facs: Vec<usize> = (0..=n).map(|_| rng.gen_range(0..k)).collect();
    let mut pieces = Vec::new();
    let mut targets = Vec::new();
    let mut at = Element::identity();
    for i in 0..=n {
        if i > 0 {
            let q = random_orthogonal_word(model, facs[i - 1], facs[i], params.q_len, rng);
            let piece = PathSeq::new(at.clone(), q);
            at = piece.end();
            pieces.push(piece);
        }
        let len = if i == 0 || i == n {
            rng.gen_range(0..=params.end_len)
        } else {
            params.d as usize + 1 + rng.gen_range(0..=params.extra_len)
        };
        let l = model.factor_letter(facs[i], 0, rng.gen_bool(0.5));
        let piece = PathSeq::new(at.clone(), vec![l; len]);
        targets.push(Some(PeripheralCoset::new(at.clone(), facs[i])));
        at = piece.end();
        pieces.push(piece);
    }
    Ok(AdmissibleDecomposition { pieces, targets, lambda: 1, c: 0 })
}

fn random_orthogonal_word<R: Rng>(
    model: &GroupModel,
    from: usize,
    to: usize,
    max_len: usize,
    rng: &mut R,
) -> Vec<Letter> {
    let k = model.n_factors();
    loop {
        let min = usize::from(from == to);
        let len = rng.gen_range(min..=max_len.max(1));
        let mut w: Vec<Letter> = Vec::with_capacity(len);
        for j in 0..len {
            let l = loop {
                let f = rng.gen_range(0..k);
                let l = model.factor_letter(f, 0, rng.gen_bool(0.5));
                if j == 0 && f == from {
                    continue;
                }
                if w.last().is_some_and(|p| *p == l.inverse()) {
                    continue;
                }
                break l;
            };
            w.push(l);
        }
        if w.last().is_none_or(|l| l.factor as usize != to) && (len > 0 || from != to) {
            return w;
        }
    }
}

/// Outcome of the Monte Carlo check over random decompositions.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloReport {
    pub samples: usize,
    /// Generated decompositions that failed `verify_admissible` at `D`.
    pub rejected: usize,
    pub max_path_len: usize,
    pub max_fitted_lambda: String,
    pub qg_failures: Vec<String>,
    pub fellow_failures: Vec<String>,
    pub near_contracting_failures: Vec<String>,
    pub firststep_failures: Vec<String>,
}

impl MonteCarloReport {
    pub fn counterexamples(&self) -> usize {
        self.qg_failures.len() + self.fellow_failures.len() + self.near_contracting_failures.len() + self.firststep_failures.len()
    }
}

fn describe(model: &GroupModel, dec: &AdmissibleDecomposition) -> String {
    dec.pieces.iter().map(|p| model.format(&p.start.left_div(&p.end()))).collect::<Vec<_>>().join(" | ")
}

/// Draws `samples` decompositions with [`random_tree_decomposition`] at the
/// bundle's `D` and checks, on each admissible one, `(Lambda, 0)`
/// quasigeodesicity, the `R`-fellow-traveller property against the
/// geodesic between its endpoints, `diam proj_{X_k}(p_{k-1} q_k) < B` and
/// that each `p_{k-1} q_k` is a `(lambda, C)`-quasigeodesic.
pub fn monte_carlo<R: Rng>(
    model: &GroupModel,
    params: &TreeGenParams,
    samples: usize,
    bundle: &ConstantsBundle,
    rates: &RateSet,
    rng: &mut R,
) -> Result<MonteCarloReport> {
    let mut rep = MonteCarloReport {
        samples,
        rejected: 0,
        max_path_len: 0,
        max_fitted_lambda: "1".into(),
        qg_failures: Vec::new(),
        fellow_failures: Vec::new(),
        near_contracting_failures: Vec::new(),
        firststep_failures: Vec::new(),
    };
    let mut fit_max = rat(1);
    let lam = rat(bundle.big_lambda);
    let r = bundle.r as u64;
    for _ in 0..samples {
        let dec = random_tree_decomposition(model, params, rng)?;
        if !verify_admissible(model, &dec, bundle.d, rates, &[0, 1, 2])?.pass {
            rep.rejected += 1;
            continue;
        }
        let path = dec.path();
        rep.max_path_len = rep.max_path_len.max(path.len());
        let idx = PathIndex::new(&path);
        let dist = |i: usize, j: usize| idx.dist(i, j);
        if !qg_verdict(idx.n_vertices(), &dist, lam, rat(0)).pass {
            rep.qg_failures.push(describe(model, &dec));
        }
        if let Some(l) = min_lambda(idx.n_vertices(), &dist) {
            fit_max = fit_max.max(l);
        }
        let alpha = PathSeq::geodesic(model, &path.start, &path.end());
        let fr = check_fellow_traveller(&dec, &alpha, r)?;
        if !fr.pass {
            rep.fellow_failures.push(format!("piece {:?}: {}", fr.failed_at, describe(model, &dec)));
        }
        for k in 1..=dec.n() {
            if near_contracting_diam(model, &dec, k).is_some_and(|d| d as i64 >= bundle.b) {
                rep.near_contracting_failures.push(format!("k={k}: {}", describe(model, &dec)));
            }
            let pq = dec.p(k - 1).concat(dec.q(k))?;
            if !is_quasigeodesic(&pq, rat(bundle.lambda), rat(bundle.c_const)).pass {
                rep.firststep_failures.push(format!("k={k}: {}", describe(model, &dec)));
            }
        }
    }
    rep.max_fitted_lambda = fmt_rat(fit_max);
    Ok(rep)
}
