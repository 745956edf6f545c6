//! Contraction, quasiconvexity, orthogonality, bounded intersection and
//! projection, deep and transition points, relative quasiconvexity and the
//! intersection estimators.
//!
//! Checks come in two flavours. Ball checks work on a [`MetricGraph`] with
//! BFS distances and arbitrary vertex subsets. Coset checks work with exact
//! distances in the infinite Cayley graph for targets that are cosets of a
//! factor, where distance and nearest point have closed forms.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, PathIndex, PathSeq, ProjectionTable, Provenance, VertexSubset};
use crate::group::{l1_ball, l1_diameter, Element, Exps, GroupModel, PeripheralCoset, SubgroupSpec, Syllable};

/// A nonnegative rate function of `U` or of `(lambda, c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RateFunction {
    Constant { value: i64 },
    /// `slope * U + intercept`.
    Affine { slope: i64, intercept: i64 },
    /// `3 max(U, mu) + eps`.
    ThreeMaxPlus { mu: i64, eps: i64 },
    /// `4 B (U + 1)^2 + 2 (U + 1)`.
    LiftBound { b: i64 },
    /// Empirical values on `U = 0, 1, ...`, made monotone by running maxima.
    TableU { values: Vec<i64> },
    /// Empirical values on a chain of `(lambda, c)` buckets; a query uses
    /// the first bucket dominating it.
    TableLc { buckets: Vec<(i64, i64, i64)> },
}

impl RateFunction {
    pub fn constant(value: i64) -> Self {
        RateFunction::Constant { value }
    }

    pub fn table_u(values: &[i64]) -> Self {
        let mut run = i64::MIN;
        let values = values
            .iter()
            .map(|&v| {
                run = run.max(v.max(0));
                run
            })
            .collect();
        RateFunction::TableU { values }
    }

    pub fn table_lc(buckets: &[(i64, i64, i64)]) -> Self {
        let mut b = buckets.to_vec();
        b.sort();
        let mut run = 0;
        for e in &mut b {
            run = run.max(e.2);
            e.2 = run;
        }
        RateFunction::TableLc { buckets: b }
    }

    /// Value at `U`.
    pub fn at_u(&self, u: i64) -> Result<i64> {
        Ok(match self {
            RateFunction::Constant { value } => *value,
            RateFunction::Affine { slope, intercept } => slope * u + intercept,
            RateFunction::ThreeMaxPlus { mu, eps } => 3 * u.max(*mu) + eps,
            RateFunction::LiftBound { b } => 4 * b * (u + 1) * (u + 1) + 2 * (u + 1),
            RateFunction::TableU { values } => *values
                .get(u as usize)
                .ok_or_else(|| Error::MissingBucket(format!("U={u}")))?,
            RateFunction::TableLc { .. } => return self.at(1, u),
        })
    }

    /// Value at `(lambda, c)`.
    pub fn at(&self, lambda: i64, c: i64) -> Result<i64> {
        match self {
            RateFunction::TableLc { buckets } => buckets
                .iter()
                .find(|(l, cc, _)| *l >= lambda && *cc >= c)
                .map(|b| b.2)
                .ok_or_else(|| Error::MissingBucket(format!("(lambda, c) = ({lambda}, {c})"))),
            RateFunction::TableU { .. } => self.at_u(c),
            _ => self.at_u(0),
        }
    }
}

/// `sigma(U) = 3 max(U, mu(1,0)) + eps(1,0)`.
pub fn sigma_of(mu: &RateFunction, eps: &RateFunction) -> Result<RateFunction> {
    Ok(RateFunction::ThreeMaxPlus {
        mu: mu.at(1, 0)?,
        eps: eps.at(1, 0)?,
    })
}

/// `A = mu + tau + eps` at `(lambda, c)`.
pub fn a_bound(
    mu: &RateFunction,
    tau: &RateFunction,
    eps: &RateFunction,
    lambda: i64,
    c: i64,
) -> Result<i64> {
    Ok(mu.at(lambda, c)? + tau.at(lambda, c)? + eps.at(lambda, c)?)
}

/// A collection of targets with its contraction rates and sampled class.
#[derive(Clone, Debug, Serialize)]
pub struct ContractingSystem {
    pub subsets: Vec<String>,
    pub mu: RateFunction,
    pub epsilon: RateFunction,
    pub path_class: String,
}

/// One sampled quasigeodesic of a ball with its class tag.
#[derive(Clone, Debug)]
pub struct Sample {
    pub path: Vec<u32>,
    pub lambda: i64,
    pub c: i64,
}

/// Result of a contraction check.
#[derive(Clone, Debug, Serialize)]
pub struct ContractingReport {
    /// Per `(lambda, c)` bucket: sample count far from `X` and the largest
    /// projection diameter among them.
    pub buckets: Vec<ContractBucket>,
    /// `max + 1` per bucket.
    pub epsilon_table: RateFunction,
    /// Whether a supplied bound held, if one was supplied.
    pub holds: Option<bool>,
    /// Endpoints of the first sample attaining the largest diameter.
    pub witness: Option<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractBucket {
    pub lambda: i64,
    pub c: i64,
    pub mu: i64,
    pub far_samples: usize,
    pub max_proj_diam: Option<u64>,
}

/// Contraction check of `X` against tagged samples.
/// Per bucket: `mu`, far sample count, largest diameter, arg-max sample.
type BucketAcc = (i64, usize, Option<u64>, Option<usize>);

pub fn check_contracting(
    g: &MetricGraph,
    x: &VertexSubset,
    samples: &[Sample],
    mu: &RateFunction,
    eps_bound: Option<&RateFunction>,
) -> Result<ContractingReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples for the contraction check".into()));
    }
    let table = ProjectionTable::new(g, x)?;
    let mut by: BTreeMap<(i64, i64), BucketAcc> = BTreeMap::new();
    let mut holds = true;
    for (si, s) in samples.iter().enumerate() {
        let m = mu.at(s.lambda, s.c)?;
        let entry = by.entry((s.lambda, s.c)).or_insert((m, 0, None, None));
        let dmin = s.path.iter().map(|&v| table.dist[v as usize]).min().unwrap_or(0);
        if (dmin as i64) < m {
            continue;
        }
        let mut pos: Vec<u32> = s
            .path
            .iter()
            .flat_map(|&v| table.nearest[v as usize].iter().copied())
            .collect();
        pos.sort_unstable();
        pos.dedup();
        let d = table.diam(&pos);
        entry.1 += 1;
        if entry.2.is_none_or(|b| d > b) {
            entry.2 = Some(d);
            entry.3 = Some(si);
        }
        if let Some(eb) = eps_bound {
            if d as i64 >= eb.at(s.lambda, s.c)? {
                holds = false;
            }
        }
    }
    let mut buckets = Vec::new();
    let mut rows = Vec::new();
    let mut witness = None;
    let mut best = None::<u64>;
    for (&(l, c), &(m, n, d, w)) in &by {
        buckets.push(ContractBucket {
            lambda: l,
            c,
            mu: m,
            far_samples: n,
            max_proj_diam: d,
        });
        rows.push((l, c, d.map_or(0, |d| d as i64 + 1)));
        if let (Some(d), Some(w)) = (d, w) {
            if best.is_none_or(|b| d > b) {
                best = Some(d);
                let p = &samples[w].path;
                let f = |v: u32| g.model().format(g.element(v));
                witness = Some((f(p[0]), f(*p.last().expect("nonempty"))));
            }
        }
    }
    Ok(ContractingReport {
        buckets,
        epsilon_table: RateFunction::table_lc(&rows),
        holds: eps_bound.map(|_| holds),
        witness,
    })
}

/// Exhaustive scan of one geodesic per ordered vertex pair `u < v`,
/// recording the largest projection diameter among geodesics staying at
/// distance at least `m` from `X`, for each `m` in `0..=max_mu`.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicScan {
    pub pairs: u64,
    pub max_diam_at_mu: Vec<Option<u64>>,
    pub far_pairs_at_mu: Vec<u64>,
    pub witness_at_mu: Vec<Option<(String, String)>>,
}

pub fn scan_geodesic_projections(g: &MetricGraph, x: &VertexSubset, max_mu: u32) -> Result<GeodesicScan> {
    let table = ProjectionTable::new(g, x)?;
    let n = g.n_vertices() as u32;
    let k = max_mu as usize + 1;
    let mut max_d: Vec<Option<u64>> = vec![None; k];
    let mut far = vec![0u64; k];
    let mut wit: Vec<Option<(u32, u32)>> = vec![None; k];
    let mut pairs = 0u64;
    let mut record = |u: u32, v: u32, d: u64, dmin: u32| {
        for m in 0..k.min(dmin as usize + 1) {
            far[m] += 1;
            if max_d[m].is_none_or(|b| d > b) {
                max_d[m] = Some(d);
                wit[m] = Some((u, v));
            }
        }
    };
    let next_hop = |cur: u32, dv: &[u32]| {
        g.neighbours(cur)
            .find(|&t| dv[t as usize] + 1 == dv[cur as usize])
            .expect("BFS predecessor")
    };
    if x.ids.len() <= 64 {
        let mut order: Vec<u32> = (0..n).collect();
        let mut mask = vec![0u64; n as usize];
        let mut diam = vec![0u64; n as usize];
        let mut dmin = vec![0u32; n as usize];
        for v in 0..n {
            let dv = g.bfs(v);
            order.sort_by_key(|&t| dv[t as usize]);
            for &u in &order {
                let ui = u as usize;
                let own = table.nearest[ui].iter().fold(0u64, |a, &p| a | 1 << p);
                if u == v {
                    mask[ui] = own;
                    diam[ui] = table.diam(&table.nearest[ui]);
                    dmin[ui] = table.dist[ui];
                } else {
                    let nx = next_hop(u, &dv) as usize;
                    let (m0, mut d) = (mask[nx], diam[nx]);
                    let all = m0 | own;
                    let mut fresh = own & !m0;
                    while fresh != 0 {
                        let a = fresh.trailing_zeros();
                        fresh &= fresh - 1;
                        let mut rest = all;
                        while rest != 0 {
                            let b = rest.trailing_zeros();
                            rest &= rest - 1;
                            d = d.max(table.pair_dist(a, b));
                        }
                    }
                    mask[ui] = all;
                    diam[ui] = d;
                    dmin[ui] = dmin[nx].min(table.dist[ui]);
                }
                if u < v {
                    pairs += 1;
                    record(u, v, diam[ui], dmin[ui]);
                }
            }
        }
    } else {
        let mut pos: Vec<u32> = Vec::new();
        for v in 0..n {
            let dv = g.bfs(v);
            for u in 0..v {
                pairs += 1;
                pos.clear();
                let mut cur = u;
                let mut dmin = table.dist[u as usize];
                pos.extend(table.nearest[u as usize].iter().copied());
                while cur != v {
                    cur = next_hop(cur, &dv);
                    dmin = dmin.min(table.dist[cur as usize]);
                    pos.extend(table.nearest[cur as usize].iter().copied());
                }
                pos.sort_unstable();
                pos.dedup();
                record(u, v, table.diam(&pos), dmin);
            }
        }
    }
    let f = |v: u32| g.model().format(g.element(v));
    Ok(GeodesicScan {
        pairs,
        max_diam_at_mu: max_d,
        far_pairs_at_mu: far,
        witness_at_mu: wit.into_iter().map(|w| w.map(|(a, b)| (f(a), f(b)))).collect(),
    })
}

/// Outcome of the quasiconvexity check for one `U`.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiconvexResult {
    pub u: u32,
    pub sigma: i64,
    pub pairs: u64,
    pub max_observed: u32,
    pub pass: bool,
    /// `(start, end, escaping vertex)` of the first violation.
    pub witness: Option<(String, String, String)>,
}

/// Checks that every geodesic of the ball with endpoints in `N_U(X)` stays
/// in `N_sigma(U)(X)`, for each `U` in `us`. All geodesics are covered, not
/// one per pair: a BFS from each start propagates the farthest excursion
/// over all geodesics to each end.
pub fn check_quasiconvex(
    g: &MetricGraph,
    x: &VertexSubset,
    us: &[u32],
    sigma: &RateFunction,
) -> Result<Vec<QuasiconvexResult>> {
    if x.is_empty() {
        return Err(Error::EmptyInput("quasiconvexity target"));
    }
    let dx = g.multi_bfs(&x.ids);
    let umax = us.iter().copied().max().unwrap_or(0);
    let sources: Vec<u32> = (0..g.n_vertices() as u32)
        .filter(|&v| dx[v as usize] <= umax)
        .collect();
    let mut res: Vec<QuasiconvexResult> = us
        .iter()
        .map(|&u| {
            Ok(QuasiconvexResult {
                u,
                sigma: sigma.at_u(u as i64)?,
                pairs: 0,
                max_observed: 0,
                pass: true,
                witness: None,
            })
        })
        .collect::<Result<_>>()?;
    let n = g.n_vertices();
    let mut far = vec![0u32; n];
    let mut far_at = vec![0u32; n];
    let mut dist = vec![u32::MAX; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for &s in &sources {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        order.clear();
        dist[s as usize] = 0;
        order.push(s);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for t in g.neighbours(v) {
                if dist[t as usize] == u32::MAX {
                    dist[t as usize] = dist[v as usize] + 1;
                    order.push(t);
                }
            }
        }
        for &v in &order {
            let vi = v as usize;
            far[vi] = dx[vi];
            far_at[vi] = v;
            if v == s {
                continue;
            }
            for t in g.neighbours(v) {
                let ti = t as usize;
                if dist[ti] + 1 == dist[vi] && far[ti] > far[vi] {
                    far[vi] = far[ti];
                    far_at[vi] = far_at[ti];
                }
            }
        }
        for &t in &sources {
            if t <= s {
                continue;
            }
            let need = dx[s as usize].max(dx[t as usize]);
            for r in res.iter_mut().filter(|r| r.u >= need) {
                r.pairs += 1;
                let f = far[t as usize];
                r.max_observed = r.max_observed.max(f);
                if f as i64 > r.sigma && r.pass {
                    r.pass = false;
                    let fm = |v: u32| g.model().format(g.element(v));
                    r.witness = Some((fm(s), fm(t), fm(far_at[t as usize])));
                }
            }
        }
    }
    Ok(res)
}

/// Orthogonality measurement of a path against a target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalityReport {
    pub measured_diam: u64,
    pub tau: i64,
    pub pass: bool,
    /// Number of path vertices within `mu` of the target.
    pub near_vertices: usize,
}

/// `diam(p ∩ N_mu(X)) <= tau` for a factor coset `X`, exact.
pub fn check_orthogonal(
    model: &GroupModel,
    p: &PathSeq,
    x: &PeripheralCoset,
    mu: i64,
    tau: i64,
) -> OrthogonalityReport {
    let _ = model;
    let near = vertices_near_coset(p, x, mu as u64);
    let d = if near.len() < 2 {
        0
    } else {
        let idx = PathIndex::new(p);
        path_set_diam(&idx, &near)
    };
    OrthogonalityReport {
        measured_diam: d,
        tau,
        pass: d as i64 <= tau,
        near_vertices: near.len(),
    }
}

/// Ball version of [`check_orthogonal`] for an arbitrary subset.
pub fn check_orthogonal_ball(
    g: &MetricGraph,
    path: &[u32],
    x: &VertexSubset,
    mu: i64,
    tau: i64,
) -> OrthogonalityReport {
    let dx = g.multi_bfs(&x.ids);
    let near: Vec<u32> = path
        .iter()
        .copied()
        .filter(|&v| dx[v as usize] as i64 <= mu)
        .collect();
    let mut d = 0u64;
    for &a in &near {
        let row = g.bfs(a);
        for &b in &near {
            d = d.max(row[b as usize] as u64);
        }
    }
    OrthogonalityReport {
        measured_diam: d,
        tau,
        pass: d as i64 <= tau,
        near_vertices: near.len(),
    }
}

/// Positions of path vertices within `u` of a coset.
pub fn vertices_near_coset(p: &PathSeq, x: &PeripheralCoset, u: u64) -> Vec<usize> {
    let mut rel = x.rep().left_div(&p.start);
    let mut out = Vec::new();
    let dist = |e: &Element| crate::group::coset_offset_dist(e, x.factor());
    if dist(&rel) <= u {
        out.push(0);
    }
    for (i, &l) in p.letters.iter().enumerate() {
        rel.mul_letter(l);
        if dist(&rel) <= u {
            out.push(i + 1);
        }
    }
    out
}

/// Diameter of a set of path positions with exact distances.
pub fn path_set_diam(idx: &PathIndex, pos: &[usize]) -> u64 {
    let mut best = 0;
    for (i, &a) in pos.iter().enumerate() {
        for &b in &pos[i + 1..] {
            best = best.max(idx.dist(a, b));
        }
    }
    best
}

/// Minimum distance from a path to a coset, and the diameter of the
/// projection of the whole path (nearest points are unique for cosets).
pub fn path_coset_profile(model: &GroupModel, p: &PathSeq, x: &PeripheralCoset) -> (u64, u64) {
    let rank = model.rank(x.factor());
    let mut rel = x.rep().left_div(&p.start);
    let mut dmin = crate::group::coset_offset_dist(&rel, x.factor());
    let mut pts: Vec<Exps> = vec![crate::group::coset_offset_proj(&rel, x.factor(), rank)];
    for &l in &p.letters {
        rel.mul_letter(l);
        dmin = dmin.min(crate::group::coset_offset_dist(&rel, x.factor()));
        let q = crate::group::coset_offset_proj(&rel, x.factor(), rank);
        if pts.last() != Some(&q) {
            pts.push(q);
        }
    }
    (dmin, l1_diameter(pts.iter(), rank))
}

/// Bounded intersection and projection between two distinct cosets.
#[derive(Clone, Debug, Serialize)]
pub struct BoundedInteraction {
    pub x: String,
    pub x_prime: String,
    /// `(U, diam(N_U(X) ∩ N_U(X')), point count)`.
    pub intersections: Vec<(u32, u64, usize)>,
    pub proj_x_of_x_prime: u64,
    pub proj_x_prime_of_x: u64,
    /// Strict bound `B` measured from the two projection diameters.
    pub measured_b: u64,
    /// Strict bound `nu(U)` measured per `U`.
    pub measured_nu: Vec<(u32, u64)>,
    /// `nu(U) = B + 4 mu + 2 eps + 2U` from the measured `B`.
    pub predicted_nu: Vec<(u32, u64)>,
    /// `B = 2 eps + nu(mu)` from the measured `nu`.
    pub predicted_b: Option<u64>,
    /// Coset points within this word distance of the gate were sampled for
    /// the projection diameters.
    pub projection_sample_radius: u64,
}

/// Exact `N_U(X) ∩ N_U(X')` for distinct factor cosets.
pub fn coset_intersection(
    model: &GroupModel,
    x: &PeripheralCoset,
    xp: &PeripheralCoset,
    u: u32,
) -> Result<Vec<Element>> {
    if x == xp {
        return Err(Error::Precondition("bounded interaction needs distinct subsets".into()));
    }
    let rank = model.rank(x.factor());
    let gate = x.proj_coords(xp.rep(), rank);
    let u = u as u64;
    let mut seen: HashSet<Element> = HashSet::new();
    let mut layer: Vec<Element> = Vec::new();
    for delta in l1_ball(rank, 2 * u) {
        let p: Vec<i32> = gate.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let base = x.point(&p);
        if xp.dist(&base) <= 2 * u && seen.insert(base.clone()) {
            layer.push(base);
        }
    }
    for depth in 1..=u {
        let mut next = Vec::new();
        for e in &layer {
            for &l in model.letters() {
                let mut y = e.clone();
                y.mul_letter(l);
                if x.dist(&y) <= u && xp.dist(&y) + depth <= 2 * u && seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        layer = next;
    }
    let out: BTreeSet<Element> = seen.into_iter().filter(|y| x.dist(y) <= u && xp.dist(y) <= u).collect();
    Ok(out.into_iter().collect())
}

/// Exact diameter of a finite set of elements. Normal forms are grouped by
/// first syllable; points in different groups are joined through the root,
/// so only points sharing a first syllable need a recursive comparison.
pub fn elements_diam(pts: &[Element]) -> u64 {
    let tails: Vec<&[Syllable]> = pts.iter().map(|e| e.syllables()).collect();
    tails_diam(&tails)
}

fn syl_len(s: &Syllable) -> u64 {
    s.exps.iter().map(|e| e.unsigned_abs() as u64).sum()
}

fn tails_diam(tails: &[&[Syllable]]) -> u64 {
    let mut groups: BTreeMap<Option<&Syllable>, Vec<&[Syllable]>> = BTreeMap::new();
    for t in tails {
        groups.entry(t.first()).or_default().push(t.get(1..).unwrap_or(&[]));
    }
    let reach: Vec<(Option<&Syllable>, u64)> = groups
        .iter()
        .map(|(k, v)| {
            let rest = v.iter().map(|r| r.iter().map(syl_len).sum::<u64>()).max().unwrap_or(0);
            (*k, rest)
        })
        .collect();
    let mut best = 0;
    for (i, (ka, ha)) in reach.iter().enumerate() {
        for (kb, hb) in &reach[i + 1..] {
            let d = match (ka, kb) {
                (None, Some(b)) | (Some(b), None) => syl_len(b) + ha + hb,
                (Some(a), Some(b)) if a.factor == b.factor => {
                    let l1: u64 = a.exps.iter().zip(b.exps.iter()).map(|(x, y)| (x - y).unsigned_abs() as u64).sum();
                    l1 + ha + hb
                }
                (Some(a), Some(b)) => syl_len(a) + syl_len(b) + ha + hb,
                (None, None) => unreachable!("keys are distinct"),
            };
            best = best.max(d);
        }
    }
    for (k, v) in &groups {
        if k.is_some() && v.len() > 1 {
            best = best.max(tails_diam(v));
        }
    }
    best
}

/// Diameter of `proj_X(X')` over coset points of `X'` within `radius` of
/// the point of `X'` nearest to the representative of `X`.
pub fn coset_projection_diam(model: &GroupModel, x: &PeripheralCoset, xp: &PeripheralCoset, radius: u64) -> u64 {
    let rank = model.rank(x.factor());
    let gate = xp.proj_coords(x.rep(), model.rank(xp.factor()));
    let pts: Vec<Exps> = l1_ball(model.rank(xp.factor()), radius)
        .into_iter()
        .map(|q| {
            let c: Vec<i32> = gate.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
            x.proj_coords(&xp.point(&c), rank)
        })
        .collect();
    l1_diameter(pts.iter(), rank)
}

/// Bounded-interaction measurement with the two conversion formulas.
pub fn bounded_interaction(
    model: &GroupModel,
    x: &PeripheralCoset,
    xp: &PeripheralCoset,
    us: &[u32],
    mu10: i64,
    eps10: i64,
    projection_sample_radius: u64,
) -> Result<BoundedInteraction> {
    let mut inter = Vec::new();
    let mut nu = Vec::new();
    for &u in us {
        let pts = coset_intersection(model, x, xp, u)?;
        let d = elements_diam(&pts);
        inter.push((u, d, pts.len()));
        nu.push((u, if pts.is_empty() { 0 } else { d + 1 }));
    }
    let p1 = coset_projection_diam(model, x, xp, projection_sample_radius);
    let p2 = coset_projection_diam(model, xp, x, projection_sample_radius);
    let b = p1.max(p2) + 1;
    let predicted_nu = us
        .iter()
        .map(|&u| (u, b + 4 * mu10 as u64 + 2 * eps10 as u64 + 2 * u as u64))
        .collect();
    let predicted_b = nu
        .iter()
        .find(|(u, _)| *u as i64 == mu10)
        .map(|(_, n)| 2 * eps10 as u64 + n);
    Ok(BoundedInteraction {
        x: format_coset(model, x),
        x_prime: format_coset(model, xp),
        intersections: inter,
        proj_x_of_x_prime: p1,
        proj_x_prime_of_x: p2,
        measured_b: b,
        measured_nu: nu,
        predicted_nu,
        predicted_b,
        projection_sample_radius,
    })
}

/// Ball version: intersection diameters and projection diameters of two
/// arbitrary subsets, with trust flags from the boundary.
#[derive(Clone, Debug, Serialize)]
pub struct BallInteraction {
    pub intersections: Vec<(u32, u64, bool)>,
    pub proj_x_of_x_prime: u64,
    pub proj_x_prime_of_x: u64,
}

pub fn bounded_interaction_ball(
    g: &MetricGraph,
    x: &VertexSubset,
    xp: &VertexSubset,
    us: &[u32],
) -> Result<BallInteraction> {
    if x.ids == xp.ids {
        return Err(Error::Precondition("bounded interaction needs distinct subsets".into()));
    }
    let dx = g.multi_bfs(&x.ids);
    let dxp = g.multi_bfs(&xp.ids);
    let mut inter = Vec::new();
    for &u in us {
        let ids: Vec<u32> = (0..g.n_vertices() as u32)
            .filter(|&v| dx[v as usize] <= u && dxp[v as usize] <= u)
            .collect();
        if ids.is_empty() {
            inter.push((u, 0, true));
            continue;
        }
        let m = g.diam(&VertexSubset::new(ids, Provenance::AdHoc("intersection".into())), u)?;
        inter.push((u, m.value, m.trusted));
    }
    let proj_diam = |a: &VertexSubset, b: &VertexSubset| -> Result<u64> {
        let t = ProjectionTable::new(g, a)?;
        let mut pos: Vec<u32> = b
            .ids
            .iter()
            .flat_map(|&v| t.nearest[v as usize].iter().copied())
            .collect();
        pos.sort_unstable();
        pos.dedup();
        Ok(t.diam(&pos))
    };
    Ok(BallInteraction {
        intersections: inter,
        proj_x_of_x_prime: proj_diam(x, xp)?,
        proj_x_prime_of_x: proj_diam(xp, x)?,
    })
}

pub fn format_coset(model: &GroupModel, x: &PeripheralCoset) -> String {
    let f = (b'A' + x.factor() as u8) as char;
    if x.rep().is_identity() {
        f.to_string()
    } else {
        format!("{} {}", model.format(x.rep()), f)
    }
}

/// Ball subset of a coset.
pub fn coset_subset(g: &MetricGraph, x: &PeripheralCoset) -> VertexSubset {
    let ids = x
        .points_in_ball(g.model(), g.radius() as u64)
        .iter()
        .filter_map(|e| g.id_of(e))
        .collect();
    VertexSubset::new(ids, Provenance::Coset(format_coset(g.model(), x)))
}

/// Classification of one path vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub position: usize,
    /// Cosets in which the vertex is deep.
    pub deep_in: Vec<String>,
    pub transition: bool,
}

/// Deep and transition points of a path for peripheral cosets.
#[derive(Clone, Debug, Serialize)]
pub struct DeepReport {
    pub points: Vec<PointClass>,
    /// False if some vertex is deep in two cosets although `L > nu(U)`.
    pub uniqueness_ok: bool,
}

/// A vertex `v` is deep in `X` when both `[p_-, v]` and `[v, p_+]` meet
/// `N_U(X)` in sets of diameter above `L`; it is a transition point when
/// it is deep in no peripheral coset.
pub fn deep_and_transition_points(
    model: &GroupModel,
    p: &PathSeq,
    u: u32,
    l: u64,
    nu_u: Option<u64>,
) -> Result<DeepReport> {
    if l == 0 {
        return Err(Error::Precondition("L must be positive".into()));
    }
    let n = p.len() + 1;
    let mut deep: Vec<Vec<String>> = vec![Vec::new(); n];
    let per = model.peripheral_factors();
    if !per.is_empty() {
        let idx = PathIndex::new(p);
        let mut cosets: BTreeSet<PeripheralCoset> = BTreeSet::new();
        let shifts = model.ball_elements(u);
        for v in p.vertices() {
            for s in &shifts {
                let base = v.mul(s);
                for &f in &per {
                    cosets.insert(PeripheralCoset::new(base.clone(), f));
                }
            }
        }
        for x in &cosets {
            let near = vertices_near_coset(p, x, u as u64);
            if near.len() < 2 {
                continue;
            }
            let m = near.len();
            let mut pre = vec![0u64; m];
            for a in 1..m {
                let mut d = pre[a - 1];
                for b in 0..a {
                    d = d.max(idx.dist(near[a], near[b]));
                }
                pre[a] = d;
            }
            let mut suf = vec![0u64; m];
            for a in (0..m - 1).rev() {
                let mut d = suf[a + 1];
                for b in a + 1..m {
                    d = d.max(idx.dist(near[a], near[b]));
                }
                suf[a] = d;
            }
            for (v, slot) in deep.iter_mut().enumerate() {
                let before = near.partition_point(|&q| q <= v);
                let after = near.partition_point(|&q| q < v);
                if before == 0 || after == m {
                    continue;
                }
                if pre[before - 1] > l && suf[after] > l {
                    slot.push(format_coset(model, x));
                }
            }
        }
    }
    let uniqueness_ok = match nu_u {
        Some(nu) if l > nu => deep.iter().all(|d| d.len() <= 1),
        _ => true,
    };
    Ok(DeepReport {
        points: deep
            .into_iter()
            .enumerate()
            .map(|(i, d)| PointClass {
                position: i,
                transition: d.is_empty(),
                deep_in: d,
            })
            .collect(),
        uniqueness_ok,
    })
}

/// Distance to an enumerated subset; exact when the subset contains every
/// element within the returned distance of `y`.
pub fn dist_to_set(y: &Element, set: &[Element]) -> Option<u64> {
    set.iter().map(|h| y.dist(h)).min()
}

/// Relative quasiconvexity measurement.
#[derive(Clone, Debug, Serialize)]
pub struct RelQcReport {
    pub pass: bool,
    pub max_transition_dist: u64,
    pub transition_points: usize,
    pub witness: Option<String>,
}

/// Every `(U, L)`-transition point of every sample lies within `M` of `H`.
pub fn check_rel_quasiconvex(
    model: &GroupModel,
    h: &[Element],
    samples: &[PathSeq],
    u: u32,
    l: u64,
    m: u64,
) -> Result<RelQcReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples for relative quasiconvexity".into()));
    }
    let hs: HashSet<&Element> = h.iter().collect();
    for s in samples {
        if !hs.contains(&s.start) || !hs.contains(&s.end()) {
            return Err(Error::Precondition("sample endpoints must lie in H".into()));
        }
    }
    let mut best = 0u64;
    let mut count = 0usize;
    let mut witness = None;
    for s in samples {
        let rep = deep_and_transition_points(model, s, u, l, None)?;
        let vs = s.vertices();
        for pc in rep.points.iter().filter(|p| p.transition) {
            count += 1;
            let d = dist_to_set(&vs[pc.position], h).unwrap_or(u64::MAX);
            if d > best {
                best = d;
                witness = Some(model.format(&vs[pc.position]));
            }
        }
    }
    Ok(RelQcReport {
        pass: best <= m,
        max_transition_dist: best,
        transition_points: count,
        witness,
    })
}

/// Smallest `kappa` with `N_U(H) ∩ N_U(gK) ⊂ N_kappa(C)` inside the ball;
/// `None` when the intersection is nonempty and `C` is empty.
pub fn kappa_estimate(
    g: &MetricGraph,
    h: &VertexSubset,
    gk: &VertexSubset,
    u: u32,
    c: &VertexSubset,
) -> Option<u64> {
    let dh = g.multi_bfs(&h.ids);
    let dk = g.multi_bfs(&gk.ids);
    let inter: Vec<u32> = (0..g.n_vertices() as u32)
        .filter(|&v| dh[v as usize] <= u && dk[v as usize] <= u)
        .collect();
    if inter.is_empty() {
        return Some(0);
    }
    if c.is_empty() {
        return None;
    }
    let dc = g.multi_bfs(&c.ids);
    Some(inter.iter().map(|&v| dc[v as usize] as u64).max().unwrap_or(0))
}

/// Rank over the rationals of a set of integer vectors.
pub fn lattice_rank(vectors: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .filter(|v: &Vec<i128>| v.iter().any(|&x| x != 0))
        .collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let (a, b) = (rows[rank][col], rows[r][col]);
                let pivot = rows[rank].clone();
                for (x, p) in rows[r].iter_mut().zip(&pivot) {
                    *x = *x * a - p * b;
                }
                let gcd = rows[r].iter().fold(0i128, |g, &x| gcd128(g, x.abs()));
                if gcd > 1 {
                    rows[r].iter_mut().for_each(|x| *x /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd128(b, a % b)
    }
}

/// Type of `H ∩ P^g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionType {
    Finite,
    FiniteIndex,
    InfiniteIndex,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParabolicClass {
    pub coset: String,
    pub rank: usize,
    pub factor_rank: usize,
    pub kind: IntersectionType,
    /// `diam(N_U(gP) ∩ H)` over the enumerated part of `H`.
    pub near_diam: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParabolicClassification {
    pub classes: Vec<ParabolicClass>,
    pub fully_quasiconvex: bool,
    /// Largest `diam(N_U(gP) ∩ H)` over classes with finite intersection.
    pub l_estimate: u64,
    pub stabilized: bool,
}

/// Classifies `H ∩ g P g^-1` for peripheral `P` and `g` in the ball of
/// radius `conj_radius`, using the elements of `H` of word length at most
/// `radius`.
pub fn classify_parabolic_intersections(
    model: &GroupModel,
    h: &SubgroupSpec,
    radius: u64,
    conj_radius: u32,
    u: u32,
) -> Result<ParabolicClassification> {
    let per = model.peripheral_factors();
    if per.is_empty() {
        return Err(Error::Precondition("model has no peripheral factors".into()));
    }
    let en = h.enumerate_in_ball(model, radius);
    let mut seen: BTreeSet<PeripheralCoset> = BTreeSet::new();
    let mut classes = Vec::new();
    let mut fully = true;
    let mut l_est = 0;
    for gel in model.ball_elements(conj_radius) {
        for &f in &per {
            let coset = PeripheralCoset::new(gel.clone(), f);
            if !seen.insert(coset.clone()) {
                continue;
            }
            let g = coset.rep().clone();
            let ginv = g.inverse();
            let mut vecs = Vec::new();
            for x in &en.elements {
                let conj = ginv.mul(x).mul(&g);
                if let [s] = conj.syllables() {
                    if s.factor == f {
                        vecs.push(s.exps.iter().map(|&e| e as i64).collect::<Vec<_>>());
                    }
                }
            }
            let rank = lattice_rank(&vecs);
            let fr = model.rank(f);
            let kind = if rank == 0 {
                IntersectionType::Finite
            } else if rank == fr {
                IntersectionType::FiniteIndex
            } else {
                IntersectionType::InfiniteIndex
            };
            let near: Vec<Element> = en
                .elements
                .iter()
                .filter(|x| coset.dist(x) <= u as u64)
                .cloned()
                .collect();
            let nd = elements_diam(&near);
            if kind == IntersectionType::InfiniteIndex {
                fully = false;
            }
            if kind == IntersectionType::Finite {
                l_est = l_est.max(nd);
            }
            classes.push(ParabolicClass {
                coset: format_coset(model, &coset),
                rank,
                factor_rank: fr,
                kind,
                near_diam: nd,
            });
        }
    }
    Ok(ParabolicClassification {
        classes,
        fully_quasiconvex: fully,
        l_estimate: l_est,
        stabilized: en.stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_diam(pts: &[Element]) -> u64 {
        let mut best = 0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max(a.dist(b));
            }
        }
        best
    }

    fn axis(g: &MetricGraph) -> VertexSubset {
        coset_subset(g, &PeripheralCoset::new(Element::identity(), 0))
    }

    #[test]
    fn sigma_formula_values() {
        let s = sigma_of(&RateFunction::constant(1), &RateFunction::constant(0)).unwrap();
        assert_eq!(s.at_u(0).unwrap(), 3);
        let s = sigma_of(&RateFunction::constant(1), &RateFunction::constant(1)).unwrap();
        assert_eq!(s.at_u(2).unwrap(), 7);
    }

    #[test]
    fn a_bound_values() {
        let c = RateFunction::constant;
        assert_eq!(a_bound(&c(1), &c(2), &c(1), 1, 0).unwrap(), 4);
        assert_eq!(a_bound(&c(0), &c(0), &c(0), 1, 0).unwrap(), 0);
        let t = |v| RateFunction::table_lc(&[(1, 0, 0), (2, 1, v)]);
        assert_eq!(a_bound(&t(3), &t(5), &t(2), 2, 1).unwrap(), 10);
    }

    #[test]
    fn missing_bucket_is_named() {
        let t = RateFunction::table_lc(&[(1, 0, 1)]);
        assert_eq!(
            t.at(2, 4),
            Err(Error::MissingBucket("(lambda, c) = (2, 4)".into()))
        );
    }

    #[test]
    fn tables_are_monotone() {
        let t = RateFunction::table_u(&[2, 1, 5, 3]);
        let v: Vec<i64> = (0..4).map(|u| t.at_u(u).unwrap()).collect();
        assert_eq!(v, [2, 2, 5, 5]);
    }

    #[test]
    fn tree_axis_projects_far_geodesics_to_points() {
        let f2 = GroupModel::f2();
        let g = MetricGraph::ball(&f2, 4, 1 << 16).unwrap();
        let scan = scan_geodesic_projections(&g, &axis(&g), 2).unwrap();
        assert_eq!(scan.max_diam_at_mu[1], Some(0));
        assert_eq!(scan.max_diam_at_mu[0], Some(8));
    }

    #[test]
    fn whole_ball_is_vacuously_contracting() {
        let f2 = GroupModel::f2();
        let g = MetricGraph::ball(&f2, 2, 1000).unwrap();
        let all = VertexSubset::new((0..g.n_vertices() as u32).collect(), Provenance::AdHoc("all".into()));
        let samples = vec![Sample {
            path: g.a_geodesic(1, 2),
            lambda: 1,
            c: 0,
        }];
        let r = check_contracting(&g, &all, &samples, &RateFunction::constant(1), None).unwrap();
        assert_eq!(r.buckets[0].far_samples, 0);
    }

    #[test]
    fn empty_sample_class_is_insufficient() {
        let f2 = GroupModel::f2();
        let g = MetricGraph::ball(&f2, 2, 1000).unwrap();
        let r = check_contracting(&g, &axis(&g), &[], &RateFunction::constant(1), None);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn tree_axis_is_quasiconvex_at_one() {
        let f2 = GroupModel::f2();
        let g = MetricGraph::ball(&f2, 5, 1 << 16).unwrap();
        let sigma = sigma_of(&RateFunction::constant(1), &RateFunction::constant(1)).unwrap();
        let r = check_quasiconvex(&g, &axis(&g), &[1], &sigma).unwrap();
        assert!(r[0].pass);
        assert_eq!(r[0].max_observed, 1);
    }

    #[test]
    fn orthogonality_examples() {
        let f2 = GroupModel::f2();
        let x = PeripheralCoset::new(Element::identity(), 0);
        let a3 = f2.parse("a^3").unwrap();
        let p = PathSeq::geodesic(&f2, &a3, &f2.parse("a^3 b^4").unwrap());
        let r = check_orthogonal(&f2, &p, &x, 1, 1);
        assert_eq!((r.measured_diam, r.pass), (1, true));
        let q = PathSeq::geodesic(&f2, &f2.parse("a^-3").unwrap(), &a3);
        let r = check_orthogonal(&f2, &q, &x, 1, 2);
        assert_eq!((r.measured_diam, r.pass), (6, false));
        let far = PathSeq::geodesic(&f2, &f2.parse("b^2").unwrap(), &f2.parse("b^2 a^3").unwrap());
        assert_eq!(check_orthogonal(&f2, &far, &x, 1, 0).measured_diam, 0);
    }

    #[test]
    fn orthogonality_ball_matches_exact() {
        let f2 = GroupModel::f2();
        let g = MetricGraph::ball(&f2, 7, 1 << 16).unwrap();
        let a3 = f2.parse("a^3").unwrap();
        let p = PathSeq::geodesic(&f2, &a3, &f2.parse("a^3 b^4").unwrap());
        let ids = g.follow(g.id(&a3).unwrap(), &p.letters).unwrap();
        let r = check_orthogonal_ball(&g, &ids, &axis(&g), 1, 1);
        assert_eq!(r.measured_diam, 1);
    }

    #[test]
    fn intersection_of_adjacent_cosets() {
        let m = GroupModel::z2_star_z2();
        let a = PeripheralCoset::new(Element::identity(), 0);
        let b1a = PeripheralCoset::new(m.parse("b1").unwrap(), 0);
        let pts = coset_intersection(&m, &a, &b1a, 1).unwrap();
        let names: BTreeSet<String> = pts.iter().map(|e| m.format(e)).collect();
        assert_eq!(names, BTreeSet::from(["1".to_string(), "b1".to_string()]));
        let b = PeripheralCoset::new(Element::identity(), 1);
        let pts = coset_intersection(&m, &a, &b, 0).unwrap();
        assert_eq!(pts, vec![Element::identity()]);
        assert!(coset_intersection(&m, &a, &a, 1).is_err());
    }

    #[test]
    fn diameter_of_repeated_points() {
        let m = GroupModel::z2_star_z2();
        let x = m.parse("a1 b2").unwrap();
        assert_eq!(elements_diam(&[x.clone(), x.clone()]), 0);
        assert_eq!(elements_diam(&[Element::identity(), Element::identity(), x]), 2);
    }

    #[test]
    fn exact_intersection_agrees_with_ball() {
        let m = GroupModel::z2_star_z2();
        let g = MetricGraph::ball(&m, 5, 1 << 20).unwrap();
        let pairs = [("1", 0usize, "b1", 0usize), ("1", 0, "1", 1), ("a1", 1, "a1 b2 a2", 0)];
        for (r1, f1, r2, f2) in pairs {
            let x = PeripheralCoset::new(m.parse(r1).unwrap(), f1);
            let y = PeripheralCoset::new(m.parse(r2).unwrap(), f2);
            let ball = bounded_interaction_ball(&g, &coset_subset(&g, &x), &coset_subset(&g, &y), &[0, 1]).unwrap();
            for (u, d, trusted) in ball.intersections {
                let pts = coset_intersection(&m, &x, &y, u).unwrap();
                let exact = set_diam(&pts);
                assert!(trusted);
                assert_eq!(d, exact, "{r1} {r2} U={u}");
                assert_eq!(elements_diam(&pts), exact);
            }
        }
    }

    #[test]
    fn predicted_nu_formula() {
        let m = GroupModel::z2_star_z2();
        let a = PeripheralCoset::new(Element::identity(), 0);
        let b = PeripheralCoset::new(Element::identity(), 1);
        let r = bounded_interaction(&m, &a, &b, &[0, 1, 2], 1, 1, 4).unwrap();
        assert_eq!(r.measured_b, 1);
        assert_eq!(r.predicted_nu[1], (1, 1 + 4 + 2 + 2));
        assert_eq!(r.intersections[0], (0, 0, 1));
    }

    #[test]
    fn deep_points_on_a_corner_path() {
        let m = GroupModel::z2_star_z2();
        let p = PathSeq::new(Element::identity(), m.parse_word("a1^5 b1^5").unwrap());
        let r = deep_and_transition_points(&m, &p, 0, 1, None).unwrap();
        assert_eq!(r.points[2].deep_in, vec!["A".to_string()]);
        assert!(r.points[5].transition);
        assert_eq!(r.points[8].deep_in, vec!["a1^5 B".to_string()]);
        let f2 = GroupModel::f2();
        let q = PathSeq::new(Element::identity(), f2.parse_word("a^5 b^5").unwrap());
        let r = deep_and_transition_points(&f2, &q, 0, 1, None).unwrap();
        assert!(r.points.iter().all(|p| p.transition));
    }

    #[test]
    fn kappa_for_the_two_factors() {
        let m = GroupModel::z2_star_z2();
        let g = MetricGraph::ball(&m, 4, 1 << 20).unwrap();
        let a = coset_subset(&g, &PeripheralCoset::new(Element::identity(), 0));
        let b = coset_subset(&g, &PeripheralCoset::new(Element::identity(), 1));
        let c = VertexSubset::new(vec![0], Provenance::Subgroup("1".into()));
        assert_eq!(kappa_estimate(&g, &a, &b, 1, &c), Some(1));
        assert_eq!(kappa_estimate(&g, &a, &b, 0, &c), Some(0));
    }

    #[test]
    fn lattice_ranks() {
        assert_eq!(lattice_rank(&[vec![2, 0], vec![0, 2], vec![2, 2]]), 2);
        assert_eq!(lattice_rank(&[vec![1, 0], vec![-3, 0]]), 1);
        assert_eq!(lattice_rank(&[]), 0);
    }

    #[test]
    fn parabolic_classification_examples() {
        let m = GroupModel::z2_star_z2();
        let p = |s: &str| m.parse(s).unwrap();
        let a = SubgroupSpec::new(vec![p("a1"), p("a2")], 4);
        let r = classify_parabolic_intersections(&m, &a, 4, 1, 1).unwrap();
        assert!(r.fully_quasiconvex);
        let h = SubgroupSpec::new(vec![p("a1"), p("b1")], 4);
        let r = classify_parabolic_intersections(&m, &h, 4, 1, 1).unwrap();
        assert!(!r.fully_quasiconvex);
        let sq = SubgroupSpec::new(vec![p("a1^2"), p("a2^2")], 3);
        let r = classify_parabolic_intersections(&m, &sq, 6, 0, 1).unwrap();
        assert_eq!(r.classes[0].kind, IntersectionType::FiniteIndex);
    }

    #[test]
    fn rel_quasiconvex_on_the_factor() {
        let m = GroupModel::z2_star_z2();
        let a: Vec<Element> = PeripheralCoset::new(Element::identity(), 0).points_in_ball(&m, 4);
        let samples: Vec<PathSeq> = a
            .iter()
            .take(6)
            .map(|h| PathSeq::geodesic(&m, &Element::identity(), h))
            .collect();
        let r = check_rel_quasiconvex(&m, &a, &samples, 1, 2, 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_transition_dist, 0);
    }
}
