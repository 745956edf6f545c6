//! Normal paths for amalgams, relative paths and lifts, and truncation paths
//! for HNN extensions, with injectivity checks against formal normal forms.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::admissible::{verify_admissible, AdmissibleDecomposition, ConstantsBundle, RateSet};
use crate::coarse::{check_rel_quasiconvex, coset_subset, elements_diam, format_coset, kappa_estimate};
use crate::error::{Error, Result};
use crate::graph::{fmt_rat, min_lambda, rat, MetricGraph, PathIndex, PathSeq, Provenance, VertexSubset};
use crate::group::{Element, GroupModel, PeripheralCoset, SubgroupSpec, Syllable};

/// Minimal representative of a double coset `C h C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosetRep {
    pub rep: Element,
    /// True when the enumeration of `C` stabilised inside its ball.
    pub certified: bool,
}

/// Shortest element of `C h C` over the elements of `C` of word length at
/// most `2 |h|`; ties broken by shortlex order.
pub fn min_double_coset_rep(model: &GroupModel, h: &Element, c: &SubgroupSpec) -> Result<DoubleCosetRep> {
    let en = c.enumerate_in_ball(model, 2 * h.len());
    if en.elements.contains(h) {
        return Err(Error::Precondition(format!("{} lies in C", model.format(h))));
    }
    let mut best = h.clone();
    for c1 in &en.elements {
        let left = c1.mul(h);
        for c2 in &en.elements {
            let cand = left.mul(c2);
            let ord = cand.len().cmp(&best.len()).then_with(|| model.cmp_shortlex(&cand, &best));
            if ord.is_lt() {
                best = cand;
            }
        }
    }
    Ok(DoubleCosetRep { rep: best, certified: en.stabilized })
}

/// Which factor of the amalgam a syllable comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    H,
    K,
}

/// A reduced word `k_0 h_1 k_1 ... h_n k_n` with `k_0`, `k_n` optional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamWord {
    pub syllables: Vec<(Side, Element)>,
}

impl AmalgamWord {
    pub fn evaluate(&self) -> Element {
        self.syllables.iter().fold(Element::identity(), |acc, (_, e)| acc.mul(e))
    }

    pub fn format(&self, model: &GroupModel) -> String {
        self.syllables
            .iter()
            .map(|(s, e)| format!("{s:?}[{}]", model.format(e)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Amalgam fixture: `dot_h` and `dot_k` with the factor carrying `dot_k`,
/// whose cosets are the targets of normal paths. `C` is trivial.
#[derive(Clone, Debug)]
pub struct AmalgamFixture {
    pub model: GroupModel,
    pub dot_h: SubgroupSpec,
    pub dot_k: SubgroupSpec,
    pub k_factor: usize,
}

impl AmalgamFixture {
    /// `<a^n>` and `<b^n>` in `F2`.
    pub fn free(n: i32) -> Self {
        let m = GroupModel::f2();
        AmalgamFixture {
            dot_h: SubgroupSpec::new(vec![Element::syllable(0, &[n])], 2),
            dot_k: SubgroupSpec::new(vec![Element::syllable(1, &[n])], 2),
            model: m,
            k_factor: 1,
        }
    }

    /// `(nZ)^2` in each factor of `Z^2 * Z^2`.
    pub fn lattice(n: i32) -> Self {
        AmalgamFixture {
            model: GroupModel::z2_star_z2(),
            dot_h: SubgroupSpec::new(vec![Element::syllable(0, &[n, 0]), Element::syllable(0, &[0, n])], 2),
            dot_k: SubgroupSpec::new(vec![Element::syllable(1, &[n, 0]), Element::syllable(1, &[0, n])], 2),
            k_factor: 1,
        }
    }
}

/// Decomposition of a normal path together with the element it represents.
#[derive(Clone, Debug)]
pub struct NormalPath {
    pub element: Element,
    pub decomposition: AdmissibleDecomposition,
}

/// Concatenation of geodesics labelled `k_0, h_1, k_1, ...`, with `p_i`
/// attached to the coset `f_i K`, `f_i = k_0 h_1 ... h_i`.
pub fn build_normal_path_amalgam(model: &GroupModel, w: &AmalgamWord, k_factor: usize) -> Result<NormalPath> {
    for pair in w.syllables.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::Structure("adjacent syllables from the same factor".into()));
        }
    }
    if w.syllables.iter().any(|(_, e)| e.is_identity()) {
        return Err(Error::Structure("trivial syllable".into()));
    }
    let mut ks: Vec<Element> = Vec::new();
    let mut hs: Vec<Element> = Vec::new();
    let mut expect_k = true;
    for (side, e) in &w.syllables {
        if (*side == Side::K) != expect_k {
            ks.push(Element::identity());
            expect_k = !expect_k;
        }
        if expect_k { ks.push(e.clone()) } else { hs.push(e.clone()) }
        expect_k = !expect_k;
    }
    if !expect_k {
        // ends after an h syllable
    } else {
        ks.push(Element::identity());
    }
    if ks.len() == hs.len() {
        ks.push(Element::identity());
    }
    let mut pieces = Vec::new();
    let mut targets = Vec::new();
    let mut at = Element::identity();
    for (i, k) in ks.iter().enumerate() {
        if i > 0 {
            let q = PathSeq::new(at.clone(), model.word(&hs[i - 1]));
            at = q.end();
            pieces.push(q);
        }
        targets.push(Some(PeripheralCoset::new(at.clone(), k_factor)));
        let p = PathSeq::new(at.clone(), model.word(k));
        at = p.end();
        pieces.push(p);
    }
    Ok(NormalPath {
        element: at,
        decomposition: AdmissibleDecomposition { pieces, targets, lambda: 1, c: 0 },
    })
}

/// Result of the conjugacy classification of one element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classification {
    Trivial,
    /// `w = conjugator * core * conjugator^-1` with `core` in a peripheral factor.
    Parabolic { factor: usize, conjugator: String, core: String },
    Hyperbolic { cyclic_syllables: usize },
}

/// Cyclic reduction of the syllable form, returning the conjugator `g` and
/// the cyclically reduced core `r` with `w = g r g^-1`.
pub fn cyclic_reduction(w: &Element) -> (Element, Element) {
    let mut g = Element::identity();
    let mut r = w.clone();
    while r.syllable_count() >= 2 {
        let s = r.syllables();
        let (first, last) = (&s[0], &s[s.len() - 1]);
        if first.factor != last.factor {
            break;
        }
        let head = Element::from_syllables([first.clone()]);
        r = head.left_div(&r).mul(&head);
        g = g.mul(&head);
    }
    (g, r)
}

pub fn classify_hyperbolic(model: &GroupModel, w: &Element) -> Classification {
    let (g, r) = cyclic_reduction(w);
    match r.syllables() {
        [] => Classification::Trivial,
        [s] if model.is_peripheral(s.factor) => Classification::Parabolic {
            factor: s.factor,
            conjugator: model.format(&g),
            core: model.format(&r),
        },
        s => Classification::Hyperbolic { cyclic_syllables: s.len() },
    }
}

/// A path in the relative Cayley graph: one edge per syllable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativePath {
    pub start: Element,
    pub edges: Vec<Syllable>,
}

impl RelativePath {
    pub fn vertices(&self) -> Vec<Element> {
        let mut out = vec![self.start.clone()];
        let mut at = self.start.clone();
        for e in &self.edges {
            at.mul_syllable(e);
            out.push(at.clone());
        }
        out
    }
}

/// A component of a relative path: a maximal run of edges of one
/// peripheral factor, with the coset containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub first_edge: usize,
    pub edges: usize,
    pub factor: usize,
    pub coset: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
    /// Pairs of components lying in the same coset.
    pub connected: Vec<(usize, usize)>,
    pub all_isolated: bool,
}

/// The relative geodesic of `g` from the identity: one edge per syllable
/// of the normal form.
pub fn relative_geodesic(g: &Element) -> RelativePath {
    RelativePath { start: Element::identity(), edges: g.syllables().to_vec() }
}

/// Components of a relative path and their connectedness.
pub fn relative_components(model: &GroupModel, rel: &RelativePath) -> ComponentReport {
    let verts = rel.vertices();
    let mut comps = Vec::new();
    let mut keys = Vec::new();
    let mut i = 0;
    while i < rel.edges.len() {
        let f = rel.edges[i].factor;
        let mut j = i + 1;
        while j < rel.edges.len() && rel.edges[j].factor == f {
            j += 1;
        }
        if model.is_peripheral(f) {
            let coset = PeripheralCoset::new(verts[i].clone(), f);
            comps.push(Component { first_edge: i, edges: j - i, factor: f, coset: format_coset(model, &coset) });
            keys.push(coset);
        }
        i = j;
    }
    let mut connected = Vec::new();
    for a in 0..keys.len() {
        for b in a + 1..keys.len() {
            if keys[a] == keys[b] {
                connected.push((a, b));
            }
        }
    }
    ComponentReport { all_isolated: connected.is_empty(), components: comps, connected }
}

/// Relative geodesic of `g` and its components.
pub fn relative_geodesic_and_components(model: &GroupModel, g: &Element) -> (RelativePath, ComponentReport) {
    let rel = relative_geodesic(g);
    let rep = relative_components(model, &rel);
    (rel, rep)
}

/// Replaces each maximal run of same-factor edges by an `l1` geodesic in
/// that factor.
pub fn lift_path(model: &GroupModel, rel: &RelativePath) -> PathSeq {
    lift_edges(model, &rel.start, &rel.edges)
}

fn lift_edges(model: &GroupModel, start: &Element, edges: &[Syllable]) -> PathSeq {
    let mut letters = Vec::new();
    let mut i = 0;
    while i < edges.len() {
        let f = edges[i].factor;
        let mut acc = Element::identity();
        while i < edges.len() && edges[i].factor == f {
            acc.mul_syllable(&edges[i]);
            i += 1;
        }
        letters.extend(model.word(&acc));
    }
    PathSeq::new(start.clone(), letters)
}

/// Diameter of the vertices of `lift` within `u` of the coset `x`, or
/// `None` when no vertex is that close.
pub fn lift_coset_diam(lift: &PathSeq, x: &PeripheralCoset, u: u64) -> Option<u64> {
    let near: Vec<Element> = lift.vertices().into_iter().filter(|v| x.dist(v) <= u).collect();
    (!near.is_empty()).then(|| elements_diam(&near))
}

/// Precondition findings for an amalgam fixture.
#[derive(Clone, Debug, Serialize)]
pub struct AmalgamPrecondition {
    /// Nontrivial elements of `dot_h ∩ dot_k` found on the enumerations.
    pub intersection: Vec<String>,
    /// Nontrivial enumerated elements of length at most `D`.
    pub short_elements: Vec<String>,
}

pub fn amalgam_precondition(fx: &AmalgamFixture, d: i64, depth: usize) -> AmalgamPrecondition {
    let m = &fx.model;
    let h = fx.dot_h.elements_to_depth(m, depth);
    let k = fx.dot_k.elements_to_depth(m, depth);
    let kset: std::collections::HashSet<&Element> = k.iter().collect();
    let intersection = h
        .iter()
        .filter(|e| !e.is_identity() && kset.contains(e))
        .map(|e| m.format(e))
        .collect();
    let short_elements = h
        .iter()
        .chain(k.iter())
        .filter(|e| !e.is_identity() && e.len() as i64 <= d)
        .map(|e| m.format(e))
        .collect();
    AmalgamPrecondition { intersection, short_elements }
}

/// Injectivity, quasigeodesicity and classification results for one
/// amalgam fixture.
#[derive(Clone, Debug, Serialize)]
pub struct AmalgamReport {
    pub words: usize,
    pub distinct_elements: usize,
    /// Pairs of distinct reduced words with equal value.
    pub collisions: Vec<(String, String)>,
    pub trivial_words: Vec<String>,
    pub admissible_failures: Vec<String>,
    pub qg_failures: Vec<String>,
    /// Largest fitted multiplicative constant at `c = 0`.
    pub max_fitted_lambda: String,
    /// `(word, fitted multiplicative constant at c = 0)`.
    pub fitted: Vec<(String, String)>,
    pub hyperbolic: usize,
    pub parabolic: usize,
    /// Elements whose cyclic reduction has at least two syllables but were
    /// not classified hyperbolic.
    pub misclassified: Vec<String>,
}

/// All reduced words with at most `max_syllables` syllables drawn from the
/// nontrivial elements of `dot_h`, `dot_k` of generator depth at most
/// `depth`.
pub fn amalgam_words(fx: &AmalgamFixture, depth: usize, max_syllables: usize) -> Vec<AmalgamWord> {
    let m = &fx.model;
    let alpha = |s: &SubgroupSpec| -> Vec<Element> {
        let mut v: Vec<Element> = s.elements_to_depth(m, depth).into_iter().filter(|e| !e.is_identity()).collect();
        v.sort_by(|a, b| m.cmp_shortlex(a, b));
        v.dedup();
        v
    };
    let hs = alpha(&fx.dot_h);
    let ks = alpha(&fx.dot_k);
    let mut out = Vec::new();
    let mut layer: Vec<AmalgamWord> = Vec::new();
    for (side, set) in [(Side::H, &hs), (Side::K, &ks)] {
        for e in set {
            layer.push(AmalgamWord { syllables: vec![(side, e.clone())] });
        }
    }
    for _ in 0..max_syllables {
        out.extend(layer.iter().cloned());
        let mut next = Vec::new();
        for w in &layer {
            let last = w.syllables.last().expect("nonempty").0;
            let (side, set) = if last == Side::H { (Side::K, &ks) } else { (Side::H, &hs) };
            for e in set {
                let mut s = w.syllables.clone();
                s.push((side, e.clone()));
                next.push(AmalgamWord { syllables: s });
            }
        }
        layer = next;
    }
    out
}

/// Checks distinctness, nontriviality, admissibility at `D`,
/// `(Lambda, 0)`-quasigeodesicity and classification over [`amalgam_words`].
pub fn check_amalgam_injectivity(
    fx: &AmalgamFixture,
    depth: usize,
    max_syllables: usize,
    bundle: &ConstantsBundle,
    rates: &RateSet,
) -> Result<AmalgamReport> {
    let pre = amalgam_precondition(fx, bundle.d, depth.max(2));
    if !pre.intersection.is_empty() {
        return Err(Error::Precondition(format!(
            "the subgroups intersect beyond C: {}",
            pre.intersection.join(", ")
        )));
    }
    if !pre.short_elements.is_empty() {
        return Err(Error::Precondition(format!(
            "elements of length at most D = {}: {}",
            bundle.d,
            pre.short_elements.join(", ")
        )));
    }
    let m = &fx.model;
    let words = amalgam_words(fx, depth, max_syllables);
    let mut seen: HashMap<Element, usize> = HashMap::new();
    let mut collisions = Vec::new();
    let mut trivial = Vec::new();
    let mut adm_fail = Vec::new();
    let mut qg_fail = Vec::new();
    let mut max_lam = rat(1);
    let (mut hyp, mut par) = (0, 0);
    let mut mis = Vec::new();
    let mut fitted = Vec::new();
    let lam = rat(bundle.big_lambda);
    for (wi, w) in words.iter().enumerate() {
        let np = build_normal_path_amalgam(m, w, fx.k_factor)?;
        let g = w.evaluate();
        debug_assert_eq!(g, np.element);
        if g.is_identity() {
            trivial.push(w.format(m));
        }
        if let Some(&prev) = seen.get(&g) {
            collisions.push((words[prev].format(m), w.format(m)));
        } else {
            seen.insert(g.clone(), wi);
        }
        let rep = verify_admissible(m, &np.decomposition, bundle.d, rates, &[0, 1, 2])?;
        if !rep.pass {
            adm_fail.push(format!("{}: condition {:?}", w.format(m), rep.first_violation));
        }
        let path = np.decomposition.path();
        let idx = PathIndex::new(&path);
        let dist = |i: usize, j: usize| idx.dist(i, j);
        let v = crate::graph::qg_verdict(idx.n_vertices(), &dist, lam, rat(0));
        if !v.pass {
            qg_fail.push(w.format(m));
        }
        match min_lambda(idx.n_vertices(), &dist) {
            Some(l) => {
                max_lam = max_lam.max(l);
                fitted.push((w.format(m), fmt_rat(l)));
            }
            None => {
                qg_fail.push(format!("{} revisits a vertex", w.format(m)));
                fitted.push((w.format(m), "unbounded".into()));
            }
        }
        let (_, core) = cyclic_reduction(&g);
        match classify_hyperbolic(m, &g) {
            Classification::Hyperbolic { .. } => hyp += 1,
            Classification::Parabolic { .. } => {
                par += 1;
                if core.syllable_count() >= 2 {
                    mis.push(m.format(&g));
                }
            }
            Classification::Trivial => {}
        }
    }
    Ok(AmalgamReport {
        words: words.len(),
        distinct_elements: seen.len(),
        collisions,
        trivial_words: trivial,
        admissible_failures: adm_fail,
        qg_failures: qg_fail,
        max_fitted_lambda: fmt_rat(max_lam),
        fitted,
        hyperbolic: hyp,
        parabolic: par,
        misclassified: mis,
    })
}

/// HNN fixture `H = <x, y, z>` in `Z^2 * Z^2` with `x = a1`, `y = b1`,
/// `z = f x f^-1`, `f = b2`, `P = A`, `Q = <x>`, `Q' = <z>` and
/// `t = f c`, `c = a2^n`, so that `t x t^-1 = z`.
#[derive(Clone, Debug)]
pub struct HnnFixture {
    pub model: GroupModel,
    pub gens: Vec<Element>,
    pub p_factor: usize,
    pub f: Element,
    pub c: Element,
    /// Index of the generator spanning `Q`.
    pub q_gen: usize,
    /// Index of the generator spanning `Q'`.
    pub qp_gen: usize,
}

impl HnnFixture {
    pub fn standard(n: i32) -> Self {
        let m = GroupModel::z2_star_z2();
        let a1 = Element::syllable(0, &[1, 0]);
        let b1 = Element::syllable(1, &[1, 0]);
        let b2 = Element::syllable(1, &[0, 1]);
        let z = b2.mul(&a1).mul(&b2.inverse());
        HnnFixture {
            model: m,
            gens: vec![a1, b1, z],
            p_factor: 0,
            f: b2,
            c: Element::syllable(0, &[0, n]),
            q_gen: 0,
            qp_gen: 2,
        }
    }

    pub fn t(&self) -> Element {
        self.f.mul(&self.c)
    }

    fn min_len_cq(&self) -> u64 {
        min_len_coset(&self.c, &self.gens[self.q_gen])
    }

    pub fn subgroup(&self, depth: usize) -> SubgroupSpec {
        SubgroupSpec::new(self.gens.clone(), depth)
    }

    fn in_q(&self, h: &Element) -> bool {
        let q = &self.gens[self.q_gen];
        match (h.syllables(), q.syllables()) {
            ([], _) => true,
            ([s], [g]) if s.factor == g.factor => proportional(&s.exps, &g.exps),
            _ => false,
        }
    }

    fn in_qp(&self, h: &Element) -> bool {
        self.in_q(&self.f.left_div(h).mul(&self.f))
    }

    /// Value in `G` of an abstract word in the generators of `H`.
    pub fn eval_h(&self, w: &[i8]) -> Element {
        w.iter().fold(Element::identity(), |acc, &l| {
            let g = &self.gens[(l.unsigned_abs() - 1) as usize];
            if l > 0 { acc.mul(g) } else { acc.mul(&g.inverse()) }
        })
    }
}

fn proportional(v: &[i32], g: &[i32]) -> bool {
    let Some(k) = g.iter().position(|&x| x != 0) else {
        return v.iter().all(|&x| x == 0);
    };
    if v[k] % g[k] != 0 {
        return false;
    }
    let m = v[k] / g[k];
    v.iter().zip(g).all(|(a, b)| *a == m * b)
}

/// `h_1 t^{e_1} h_2 t^{e_2} ... h_n t^{e_n}` with each `h_i` an abstract
/// word in the generators of `H` (signed 1-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HnnWord {
    pub h: Vec<Vec<i8>>,
    pub eps: Vec<i8>,
}

impl HnnWord {
    pub fn format(&self) -> String {
        let names = ['x', 'y', 'z'];
        let hw = |w: &[i8]| -> String {
            w.iter()
                .map(|&l| {
                    let n = names.get((l.unsigned_abs() - 1) as usize).copied().unwrap_or('?');
                    if l > 0 { n.to_string() } else { format!("{n}^-1") }
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut parts = Vec::new();
        for (h, e) in self.h.iter().zip(&self.eps) {
            if !h.is_empty() {
                parts.push(hw(h));
            }
            parts.push(if *e > 0 { "t".into() } else { "t^-1".into() });
        }
        if parts.is_empty() { "1".into() } else { parts.join(" ") }
    }
}

/// Index of the first pinch `t^e h t^-e` with `h` in the associated
/// subgroup, if any.
pub fn britton_pinch(fx: &HnnFixture, w: &HnnWord) -> Option<usize> {
    (1..w.eps.len()).find(|&i| {
        let h = fx.eval_h(&w.h[i]);
        match (w.eps[i - 1], w.eps[i]) {
            (1, -1) => fx.in_q(&h),
            (-1, 1) => fx.in_qp(&h),
            _ => false,
        }
    })
}

pub fn evaluate_hnn(fx: &HnnFixture, w: &HnnWord) -> Result<Element> {
    if w.h.len() != w.eps.len() {
        return Err(Error::Structure("one h-syllable per t-letter expected".into()));
    }
    let t = fx.t();
    let ti = t.inverse();
    let mut g = Element::identity();
    for (h, &e) in w.h.iter().zip(&w.eps) {
        g = g.mul(&fx.eval_h(h)).mul(if e > 0 { &t } else { &ti });
    }
    Ok(g)
}

fn free_reduce(w: &mut Vec<i8>) {
    let mut out: Vec<i8> = Vec::with_capacity(w.len());
    for &l in w.iter() {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    *w = out;
}

/// Formal normal form in the HNN extension of the free group on the
/// generators of `H`: representatives exclude a trailing power of the
/// generator that slides through the next stable letter.
pub fn formal_normal_form(fx: &HnnFixture, w: &HnnWord) -> (Vec<(Vec<i8>, i8)>, Vec<i8>) {
    let xq = fx.q_gen as i8 + 1;
    let zq = fx.qp_gen as i8 + 1;
    let mut carry: Vec<i8> = Vec::new();
    let mut out = Vec::new();
    for (h, &e) in w.h.iter().zip(&w.eps) {
        let mut cur = carry.clone();
        cur.extend_from_slice(h);
        free_reduce(&mut cur);
        let (strip, push) = if e > 0 { (zq, xq) } else { (xq, zq) };
        let mut k = 0i32;
        while let Some(&l) = cur.last() {
            if l.abs() != strip {
                break;
            }
            k += if l > 0 { 1 } else { -1 };
            cur.pop();
        }
        out.push((cur, e));
        carry = vec![if k > 0 { push } else { -push }; k.unsigned_abs() as usize];
    }
    (out, carry)
}

/// Britton-reduced words with `1..=max_t` stable letters whose
/// h-syllables are reduced and have total length at most `max_h`.
pub fn hnn_words(fx: &HnnFixture, max_t: usize, max_h: usize) -> Vec<HnnWord> {
    let n_gens = fx.gens.len() as i8;
    let mut by_len: Vec<Vec<Vec<i8>>> = vec![vec![Vec::new()]];
    for l in 1..=max_h {
        let mut next = Vec::new();
        for w in &by_len[l - 1] {
            for g in 1..=n_gens {
                for s in [g, -g] {
                    if w.last() != Some(&-s) {
                        let mut v = w.clone();
                        v.push(s);
                        next.push(v);
                    }
                }
            }
        }
        by_len.push(next);
    }
    let mut out = Vec::new();
    for nt in 1..=max_t {
        for signs in 0..(1u32 << nt) {
            let eps: Vec<i8> = (0..nt).map(|i| if signs >> i & 1 == 1 { -1 } else { 1 }).collect();
            let mut lens = vec![0usize; nt];
            loop {
                if lens.iter().sum::<usize>() <= max_h {
                    let mut acc: Vec<Vec<Vec<i8>>> = vec![Vec::new()];
                    for &l in &lens {
                        let mut nx = Vec::new();
                        for pre in &acc {
                            for w in &by_len[l] {
                                let mut v = pre.clone();
                                v.push(w.clone());
                                nx.push(v);
                            }
                        }
                        acc = nx;
                    }
                    for h in acc {
                        let w = HnnWord { h, eps: eps.clone() };
                        if britton_pinch(fx, &w).is_none() {
                            out.push(w);
                        }
                    }
                }
                let mut i = 0;
                while i < nt {
                    lens[i] += 1;
                    if lens[i] <= max_h {
                        break;
                    }
                    lens[i] = 0;
                    i += 1;
                }
                if i == nt {
                    break;
                }
            }
        }
    }
    out
}

/// Truncation of the normal path of an HNN word.
#[derive(Clone, Debug)]
pub struct TruncationPath {
    pub element: Element,
    pub relative: RelativePath,
    pub decomposition: AdmissibleDecomposition,
    /// Lengths of the truncated peripheral pieces `p'_i`.
    pub p_lengths: Vec<usize>,
    /// Whether consecutive targets are distinct.
    pub targets_distinct: bool,
}

/// Builds the relative normal path `q_1 (beta_1 p_1)^{e_1} ...`, trims it
/// at the first and last entries into each `g_i P`, lifts the connecting
/// segments and joins the entry points by geodesics.
pub fn build_truncation_hnn(fx: &HnnFixture, w: &HnnWord, lambda: i64, c: i64) -> Result<TruncationPath> {
    if let Some(i) = britton_pinch(fx, w) {
        return Err(Error::Pinch { index: i });
    }
    let m = &fx.model;
    let n = w.eps.len();
    let mut edges: Vec<Syllable> = Vec::new();
    let mut q_range = Vec::with_capacity(n);
    let mut p_edge = Vec::with_capacity(n);
    let c_syl = fx.c.syllables()[0].clone();
    for (h, &e) in w.h.iter().zip(&w.eps) {
        let s = edges.len();
        edges.extend(fx.eval_h(h).syllables().iter().cloned());
        q_range.push((s, edges.len()));
        if e > 0 {
            edges.extend(fx.f.syllables().iter().cloned());
            p_edge.push(edges.len());
            edges.push(c_syl.clone());
        } else {
            p_edge.push(edges.len());
            edges.push(c_syl.inverse());
            edges.extend(fx.f.inverse().syllables().iter().cloned());
        }
    }
    let rel = RelativePath { start: Element::identity(), edges };
    let verts = rel.vertices();
    let last = rel.edges.len();
    let cosets: Vec<PeripheralCoset> = p_edge
        .iter()
        .map(|&s| PeripheralCoset::new(verts[s].clone(), fx.p_factor))
        .collect();
    let mut z = vec![0usize; n];
    let mut wv = vec![0usize; n];
    for i in 0..n {
        let (qs, qe) = q_range[i];
        z[i] = (qs..=qe).find(|&v| cosets[i].contains(&verts[v])).unwrap_or(p_edge[i]);
        wv[i] = match q_range.get(i + 1) {
            Some(&(s, e)) => (s..=e).rev().find(|&v| cosets[i].contains(&verts[v])).unwrap_or(p_edge[i] + 1),
            None => p_edge[i] + 1,
        };
    }
    let mut pieces = vec![PathSeq::trivial(Element::identity())];
    let mut targets = vec![None];
    let mut prev = 0usize;
    let mut p_lengths = Vec::new();
    for i in 0..n {
        if z[i] < prev || wv[i] < z[i] {
            return Err(Error::Structure(format!("truncation markers out of order at piece {}", i + 1)));
        }
        pieces.push(lift_edges(m, &verts[prev], &rel.edges[prev..z[i]]));
        let p = PathSeq::geodesic(m, &verts[z[i]], &verts[wv[i]]);
        p_lengths.push(p.len());
        pieces.push(p);
        targets.push(Some(cosets[i].clone()));
        prev = wv[i];
    }
    if prev < last {
        pieces.push(lift_edges(m, &verts[prev], &rel.edges[prev..last]));
        pieces.push(PathSeq::trivial(verts[last].clone()));
        targets.push(None);
    }
    let targets_distinct = cosets.windows(2).all(|p| p[0] != p[1]);
    Ok(TruncationPath {
        element: verts[last].clone(),
        relative: rel,
        decomposition: AdmissibleDecomposition { pieces, targets, lambda, c },
        p_lengths,
        targets_distinct,
    })
}

/// Hypothesis checks on the HNN fixture over enumerations of `H`.
#[derive(Clone, Debug, Serialize)]
pub struct HnnFixtureCheck {
    /// `H ∩ P` is spanned by the `Q` generator.
    pub q_is_p_cap_h: bool,
    /// `f Q f^-1` is contained in `H`.
    pub qp_in_h: bool,
    /// No enumerated `h` conjugates the `Q` generator into `Q'`.
    pub non_conjugate: bool,
    /// `c Q c^-1 = Q`.
    pub c_normalizes_q: bool,
    /// Reduced abstract words of `H` evaluate to distinct elements.
    pub h_free_on_generators: bool,
    /// Smallest word length over `c Q`.
    pub min_len_cq: u64,
    pub depth: usize,
}

impl HnnFixtureCheck {
    pub fn holds(&self) -> bool {
        self.q_is_p_cap_h && self.qp_in_h && self.non_conjugate && self.c_normalizes_q && self.h_free_on_generators
    }
}

pub fn check_hnn_fixture(fx: &HnnFixture, depth: usize) -> HnnFixtureCheck {
    let words = hnn_h_words(fx.gens.len() as i8, depth);
    let mut seen: HashMap<Element, &Vec<i8>> = HashMap::new();
    let mut free = true;
    let mut q_ok = true;
    let mut non_conj = true;
    let q = &fx.gens[fx.q_gen];
    for w in &words {
        let h = fx.eval_h(w);
        if seen.insert(h.clone(), w).is_some() {
            free = false;
        }
        if let [s] = h.syllables() {
            if s.factor == fx.p_factor && !fx.in_q(&h) {
                q_ok = false;
            }
        }
        let conj = h.mul(q).mul(&h.inverse());
        if fx.in_qp(&conj) {
            non_conj = false;
        }
    }
    let qp = fx.f.mul(q).mul(&fx.f.inverse());
    let qp_in_h = seen.contains_key(&qp);
    let c_norm = fx.c.mul(q).mul(&fx.c.inverse()) == *q;
    let min_len_cq = min_len_coset(&fx.c, q);
    HnnFixtureCheck {
        q_is_p_cap_h: q_ok,
        qp_in_h,
        non_conjugate: non_conj,
        c_normalizes_q: c_norm,
        h_free_on_generators: free,
        min_len_cq,
        depth,
    }
}

/// Smallest word length over `c q^k`. Both are single syllables of one
/// factor in the fixtures, so the minimum is an `l1` minimisation over `k`.
fn min_len_coset(c: &Element, q: &Element) -> u64 {
    match (c.syllables(), q.syllables()) {
        ([cs], [qs]) if cs.factor == qs.factor => {
            let at = |k: i64| -> u64 {
                cs.exps.iter().zip(qs.exps.iter()).map(|(a, b)| (*a as i64 + k * *b as i64).unsigned_abs()).sum()
            };
            let bound = cs.exps.iter().map(|e| e.unsigned_abs() as i64).sum::<i64>() + 1;
            (-bound..=bound).map(at).min().unwrap_or(0)
        }
        _ => (-8..=8)
            .map(|k: i32| {
                let qk = Element::from_syllables(q.syllables().iter().map(|s| {
                    Syllable::new(s.factor, &s.exps.iter().map(|e| e * k).collect::<Vec<_>>())
                }));
                c.mul(&qk).len()
            })
            .min()
            .unwrap_or(0),
    }
}

fn hnn_h_words(n_gens: i8, depth: usize) -> Vec<Vec<i8>> {
    let mut all = vec![Vec::new()];
    let mut layer: Vec<Vec<i8>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for g in 1..=n_gens {
                for s in [g, -g] {
                    if w.last() != Some(&-s) {
                        let mut v = w.clone();
                        v.push(s);
                        next.push(v);
                    }
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// Measured relative quasiconvexity constant of `H` and the intersection
/// constants used by the truncation threshold.
#[derive(Clone, Debug, Serialize)]
pub struct HnnKappas {
    pub m: u64,
    pub kappa_p: u64,
    pub kappa_f_p: u64,
    pub kappa_finv_p: u64,
    pub radius: u32,
}

impl HnnKappas {
    /// The constant for the entry side: the larger of the two readings of
    /// the translated coset.
    pub fn kappa1(&self) -> u64 {
        self.kappa_f_p.max(self.kappa_finv_p)
    }

    pub fn kappa2(&self) -> u64 {
        self.kappa_p
    }
}

/// Estimates `M` and the `kappa` constants inside the ball of `radius`.
pub fn estimate_hnn_kappas(fx: &HnnFixture, radius: u32, u: u32, l: u64) -> Result<HnnKappas> {
    let m = &fx.model;
    let g = MetricGraph::ball(m, radius, 1 << 22)?;
    let en = fx.subgroup(radius as usize + 2).enumerate_in_ball(m, radius as u64);
    if !en.stabilized {
        return Err(Error::InsufficientData(format!("H did not stabilise in the ball of radius {radius}")));
    }
    let h_el = en.elements;
    let samples: Vec<PathSeq> = h_el
        .iter()
        .map(|h| PathSeq::geodesic(m, &Element::identity(), h))
        .collect();
    let rq = check_rel_quasiconvex(m, &h_el, &samples, u, l, u64::MAX)?;
    let mm = rq.max_transition_dist;
    let h_sub = VertexSubset::new(h_el.iter().filter_map(|e| g.id_of(e)).collect(), Provenance::Subgroup("H".into()));
    let kappa = |gp: &Element| -> Result<u64> {
        let coset = PeripheralCoset::new(gp.clone(), fx.p_factor);
        let ids: Vec<u32> = h_el
            .iter()
            .filter(|h| {
                let c = gp.left_div(h).mul(gp);
                match c.syllables() {
                    [] => true,
                    [s] => s.factor == fx.p_factor,
                    _ => false,
                }
            })
            .filter_map(|e| g.id_of(e))
            .collect();
        let c_sub = VertexSubset::new(ids, Provenance::AdHoc("H ∩ P^g".into()));
        kappa_estimate(&g, &h_sub, &coset_subset(&g, &coset), mm as u32, &c_sub)
            .ok_or_else(|| Error::InsufficientData("empty intersection subgroup".into()))
    };
    Ok(HnnKappas {
        m: mm,
        kappa_p: kappa(&Element::identity())?,
        kappa_f_p: kappa(&fx.f)?,
        kappa_finv_p: kappa(&fx.f.inverse())?,
        radius,
    })
}

/// `lambda D + c + kappa1 + kappa2`: every element of `cQ` must be longer.
pub fn hnn_threshold(bundle: &ConstantsBundle, k: &HnnKappas) -> i64 {
    bundle.lambda * bundle.d + bundle.c + k.kappa1() as i64 + k.kappa2() as i64
}

/// Injectivity and truncation results for the HNN fixture.
#[derive(Clone, Debug, Serialize)]
pub struct HnnReport {
    pub words: usize,
    pub formal_classes: usize,
    pub distinct_elements: usize,
    /// Formally distinct words with equal value.
    pub collisions: Vec<(String, String)>,
    /// Formally equal words with different values.
    pub oracle_disagreements: Vec<(String, String)>,
    pub trivial_words: Vec<String>,
    /// Present when truncation paths were checked.
    pub truncation: Option<TruncationSummary>,
    /// Parabolic elements not conjugate into the enumerated part of `H`.
    pub parabolic_outside_h: Vec<String>,
    pub parabolic: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationSummary {
    pub d_prime: i64,
    pub lambda: i64,
    pub c: i64,
    pub big_lambda: i64,
    pub admissible_failures: Vec<String>,
    pub qg_failures: Vec<String>,
    pub repeated_targets: Vec<String>,
    pub min_p_length: Option<usize>,
    /// `(word, fitted multiplicative constant at c = 0)`.
    pub fitted: Vec<(String, String)>,
}

/// Parameters for the truncation checks of [`check_hnn_injectivity`].
#[derive(Clone, Copy, Debug)]
pub struct TruncationCheck<'a> {
    pub bundle: &'a ConstantsBundle,
    pub d_prime: i64,
    pub rates: &'a RateSet,
}

/// Checks all [`hnn_words`]: value distinctness against the formal normal
/// form and that parabolic values are conjugate into `H`. With `trunc`,
/// also truncation admissibility at `D'`, quasigeodesicity at `Lambda` and
/// distinct consecutive targets.
pub fn check_hnn_injectivity(
    fx: &HnnFixture,
    max_t: usize,
    max_h: usize,
    trunc: Option<TruncationCheck<'_>>,
) -> Result<HnnReport> {
    let chk = check_hnn_fixture(fx, 4);
    let violated: Vec<&str> = [
        (chk.q_is_p_cap_h, "Q = P ∩ H"),
        (chk.qp_in_h, "Q' ≤ H"),
        (chk.non_conjugate, "Q and Q' are not conjugate in H"),
        (chk.c_normalizes_q, "Q^c = Q"),
        (chk.h_free_on_generators, "H is free on its generators"),
    ]
    .into_iter()
    .filter(|(ok, _)| !ok)
    .map(|(_, name)| name)
    .collect();
    if !violated.is_empty() {
        return Err(Error::Precondition(format!("fixture violates {}", violated.join("; "))));
    }
    if let Some(t) = trunc {
        let want = (t.bundle.lambda + 2) * fx.f.len() as i64;
        if t.bundle.c != want {
            return Err(Error::Precondition(format!(
                "truncation pieces are ({}, {want})-quasigeodesics but the bundle has c = {}",
                t.bundle.lambda, t.bundle.c
            )));
        }
        if (fx.min_len_cq() as i64) <= t.bundle.lambda * t.d_prime + t.bundle.c {
            return Err(Error::Precondition(format!(
                "|c| = {} does not exceed lambda D' + c = {}",
                fx.c.len(),
                t.bundle.lambda * t.d_prime + t.bundle.c
            )));
        }
    }
    let m = &fx.model;
    let words = hnn_words(fx, max_t, max_h);
    type Form = (Vec<(Vec<i8>, i8)>, Vec<i8>);
    let mut val_form: HashMap<Element, (Form, usize)> = HashMap::new();
    let mut form_val: BTreeMap<Form, (Element, usize)> = BTreeMap::new();
    let mut collisions = Vec::new();
    let mut disagree = Vec::new();
    let mut trivial = Vec::new();
    let mut par_out = Vec::new();
    let mut par = 0;
    let h_cores: std::collections::HashSet<Element> = hnn_h_words(fx.gens.len() as i8, 4)
        .iter()
        .map(|w| cyclic_reduction(&fx.eval_h(w)).1)
        .collect();
    let mut summary = trunc.map(|t| TruncationSummary {
        d_prime: t.d_prime,
        lambda: t.bundle.lambda,
        c: t.bundle.c,
        big_lambda: t.bundle.big_lambda,
        admissible_failures: Vec::new(),
        qg_failures: Vec::new(),
        repeated_targets: Vec::new(),
        min_p_length: None,
        fitted: Vec::new(),
    });
    for (wi, w) in words.iter().enumerate() {
        let g = evaluate_hnn(fx, w)?;
        let form = formal_normal_form(fx, w);
        match val_form.get(&g) {
            Some((f, a)) if *f != form => collisions.push((words[*a].format(), w.format())),
            Some(_) => {}
            None => {
                val_form.insert(g.clone(), (form.clone(), wi));
            }
        }
        match form_val.get(&form) {
            Some((v, a)) if *v != g => disagree.push((words[*a].format(), w.format())),
            Some(_) => {}
            None => {
                form_val.insert(form, (g.clone(), wi));
            }
        }
        if g.is_identity() {
            trivial.push(w.format());
        }
        if let (Some(t), Some(sum)) = (trunc, summary.as_mut()) {
            let tp = build_truncation_hnn(fx, w, t.bundle.lambda, t.bundle.c)?;
            if tp.element != g {
                return Err(Error::Structure(format!("truncation of {} ends at the wrong element", w.format())));
            }
            if !tp.targets_distinct {
                sum.repeated_targets.push(w.format());
            }
            for &l in &tp.p_lengths {
                sum.min_p_length = Some(sum.min_p_length.map_or(l, |x| x.min(l)));
            }
            let rep = verify_admissible(m, &tp.decomposition, t.d_prime, t.rates, &[0, 1, 2])?;
            if !rep.pass {
                sum.admissible_failures.push(format!("{}: condition {:?}", w.format(), rep.first_violation));
            }
            let path = tp.decomposition.path();
            let idx = PathIndex::new(&path);
            let dist = |i: usize, j: usize| idx.dist(i, j);
            if !crate::graph::qg_verdict(idx.n_vertices(), &dist, rat(t.bundle.big_lambda), rat(0)).pass {
                sum.qg_failures.push(w.format());
            }
            let fitted = min_lambda(idx.n_vertices(), &dist).map_or_else(|| "unbounded".to_string(), fmt_rat);
            sum.fitted.push((w.format(), fitted));
        }
        if let Classification::Parabolic { .. } = classify_hyperbolic(m, &g) {
            par += 1;
            if !h_cores.contains(&cyclic_reduction(&g).1) {
                par_out.push(m.format(&g));
            }
        }
    }
    Ok(HnnReport {
        words: words.len(),
        formal_classes: form_val.len(),
        distinct_elements: val_form.len(),
        collisions,
        oracle_disagreements: disagree,
        trivial_words: trivial,
        truncation: summary,
        parabolic_outside_h: par_out,
        parabolic: par,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_coset_representatives() {
        let m = GroupModel::z2_star_z2();
        let c = SubgroupSpec::new(vec![m.parse("a1").unwrap()], 6);
        let r = min_double_coset_rep(&m, &m.parse("a1^3 a2").unwrap(), &c).unwrap();
        assert_eq!(m.format(&r.rep), "a2");
        let f2 = GroupModel::f2();
        let c = SubgroupSpec::new(vec![f2.parse("a").unwrap()], 6);
        let r = min_double_coset_rep(&f2, &f2.parse("a^2 b").unwrap(), &c).unwrap();
        assert_eq!(f2.format(&r.rep), "b");
        let triv = SubgroupSpec::new(vec![], 1);
        let h = f2.parse("a b").unwrap();
        assert_eq!(min_double_coset_rep(&f2, &h, &triv).unwrap().rep, h);
        assert!(min_double_coset_rep(&f2, &f2.parse("a^2").unwrap(), &c).is_err());
    }

    #[test]
    fn normal_path_of_three_syllables() {
        let fx = AmalgamFixture::free(5);
        let m = &fx.model;
        let w = AmalgamWord {
            syllables: vec![
                (Side::K, m.parse("b^5").unwrap()),
                (Side::H, m.parse("a^5").unwrap()),
                (Side::K, m.parse("b^-5").unwrap()),
            ],
        };
        let np = build_normal_path_amalgam(m, &w, 1).unwrap();
        let d = &np.decomposition;
        assert_eq!(d.pieces.len(), 3);
        assert_eq!(d.targets[0], Some(PeripheralCoset::new(Element::identity(), 1)));
        assert_eq!(d.targets[1], Some(PeripheralCoset::new(m.parse("b^5 a^5").unwrap(), 1)));
        assert_eq!(m.format(&np.element), "b^5 a^5 b^-5");
    }

    #[test]
    fn lattice_normal_path_targets() {
        let fx = AmalgamFixture::lattice(3);
        let m = &fx.model;
        let w = AmalgamWord {
            syllables: vec![(Side::H, m.parse("a1^3").unwrap()), (Side::K, m.parse("b2^3").unwrap())],
        };
        let np = build_normal_path_amalgam(m, &w, 1).unwrap();
        let t = &np.decomposition.targets;
        assert_eq!(t.len(), 2);
        assert_eq!(t[1], Some(PeripheralCoset::new(m.parse("a1^3").unwrap(), 1)));
    }

    #[test]
    fn classification_examples() {
        let m = GroupModel::z2_star_z2();
        let c = |s: &str| classify_hyperbolic(&m, &m.parse(s).unwrap());
        assert!(matches!(c("a1^3"), Classification::Parabolic { factor: 0, .. }));
        match c("b1 a1 b1^-1") {
            Classification::Parabolic { conjugator, core, .. } => {
                assert_eq!((conjugator.as_str(), core.as_str()), ("b1", "a1"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c("a1 b1"), Classification::Hyperbolic { cyclic_syllables: 2 });
        assert_eq!(c("1"), Classification::Trivial);
        match c("a1 b1 a1^-1") {
            Classification::Parabolic { factor, conjugator, core } => {
                assert_eq!((factor, conjugator.as_str(), core.as_str()), (1, "a1", "b1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn components_of_relative_geodesics() {
        let m = GroupModel::z2_star_z2();
        let (_, r) = relative_geodesic_and_components(&m, &m.parse("a1^3").unwrap());
        assert_eq!(r.components.len(), 1);
        let (_, r) = relative_geodesic_and_components(&m, &m.parse("a1 b1 a2").unwrap());
        let names: Vec<&str> = r.components.iter().map(|c| c.coset.as_str()).collect();
        assert_eq!(names, ["A", "a1 B", "a1 b1 A"]);
        assert!(r.all_isolated);
        let rel = RelativePath {
            start: Element::identity(),
            edges: vec![Syllable::new(0, &[1, 0]), Syllable::new(1, &[1, 0]), Syllable::new(1, &[-1, 0]), Syllable::new(0, &[1, 0])],
        };
        let r = relative_components(&m, &rel);
        assert_eq!(r.connected, vec![(0, 2)]);
    }

    #[test]
    fn lifts_are_geodesic() {
        let m = GroupModel::z2_star_z2();
        let g = m.parse("a1^2 a2").unwrap();
        let lift = lift_path(&m, &relative_geodesic(&g));
        let names: Vec<String> = lift.vertices().iter().map(|v| m.format(v)).collect();
        assert_eq!(names, ["1", "a1", "a1^2", "a1^2 a2"]);
        let h = m.parse("a1 b1").unwrap();
        assert_eq!(lift_path(&m, &relative_geodesic(&h)).len(), 2);
    }

    #[test]
    fn britton_pinches_and_values() {
        let fx = HnnFixture::standard(12);
        let m = &fx.model;
        let w = HnnWord { h: vec![vec![], vec![1]], eps: vec![1, -1] };
        assert_eq!(britton_pinch(&fx, &w), Some(1));
        assert!(matches!(build_truncation_hnn(&fx, &w, 1, 3), Err(Error::Pinch { index: 1 })));
        let v = HnnWord { h: vec![vec![], vec![3]], eps: vec![-1, 1] };
        assert_eq!(britton_pinch(&fx, &v), Some(1));
        let t = fx.t();
        let tat = t.mul(&m.parse("a1").unwrap()).mul(&t.inverse());
        assert_eq!(m.format(&tat), "b2 a1 b2^-1");
        let ok = HnnWord { h: vec![vec![], vec![2]], eps: vec![1, -1] };
        assert_eq!(britton_pinch(&fx, &ok), None);
        assert_eq!(evaluate_hnn(&fx, &HnnWord { h: vec![], eps: vec![] }).unwrap(), Element::identity());
    }

    #[test]
    fn formal_forms_slide_through_stable_letters() {
        let fx = HnnFixture::standard(12);
        let a = HnnWord { h: vec![vec![3]], eps: vec![1] };
        let b = HnnWord { h: vec![vec![]], eps: vec![1] };
        let (fa, ca) = formal_normal_form(&fx, &a);
        let (fb, cb) = formal_normal_form(&fx, &b);
        assert_eq!(fa, fb);
        assert_eq!((ca, cb), (vec![1], vec![]));
    }

    #[test]
    fn truncation_of_a_conjugate() {
        let fx = HnnFixture::standard(12);
        let w = HnnWord { h: vec![vec![], vec![2]], eps: vec![1, -1] };
        let tp = build_truncation_hnn(&fx, &w, 1, 3).unwrap();
        assert_eq!(tp.p_lengths, vec![12, 12]);
        assert!(tp.targets_distinct);
        let single = HnnWord { h: vec![vec![]], eps: vec![1] };
        let tp = build_truncation_hnn(&fx, &single, 1, 3).unwrap();
        assert_eq!(tp.p_lengths, vec![12]);
        assert_eq!(tp.decomposition.pieces[1].len(), 1);
    }

    #[test]
    fn fixture_hypotheses_hold() {
        let fx = HnnFixture::standard(12);
        let chk = check_hnn_fixture(&fx, 4);
        assert!(chk.holds(), "{chk:?}");
        assert_eq!(chk.min_len_cq, 12);
    }

    #[test]
    fn hnn_words_are_distinct_at_small_n() {
        let fx = HnnFixture::standard(12);
        let rep = check_hnn_injectivity(&fx, 2, 4, None).unwrap();
        assert!(rep.words > 1000);
        assert!(rep.collisions.is_empty() && rep.oracle_disagreements.is_empty());
        assert_eq!(rep.formal_classes, rep.distinct_elements);
        assert!(rep.trivial_words.is_empty());
        assert!(rep.parabolic_outside_h.is_empty());
    }

    #[test]
    fn conjugating_q_by_t_lands_in_h() {
        let fx = HnnFixture::standard(12);
        let w = HnnWord { h: vec![vec![], vec![1]], eps: vec![1, -1] };
        let g = fx.eval_h(&[]).mul(&fx.t()).mul(&fx.gens[0]).mul(&fx.t().inverse());
        assert_eq!(g, fx.gens[2]);
        assert_eq!(britton_pinch(&fx, &w), Some(1));
    }

    #[test]
    fn invalid_fixture_names_the_hypothesis() {
        let mut fx = HnnFixture::standard(12);
        fx.gens[2] = fx.model.parse("a2").unwrap();
        let err = check_hnn_injectivity(&fx, 1, 1, None).unwrap_err().to_string();
        assert!(err.contains("Q = P ∩ H"), "{err}");
    }

    #[test]
    fn degenerate_amalgam_is_rejected() {
        let m = GroupModel::f2();
        let a = SubgroupSpec::new(vec![m.parse("a").unwrap()], 2);
        let fx = AmalgamFixture { model: m, dot_h: a.clone(), dot_k: a, k_factor: 1 };
        let pre = amalgam_precondition(&fx, 0, 2);
        assert!(!pre.intersection.is_empty());
    }

    #[test]
    fn lift_meets_a_far_coset_in_a_point() {
        let m = GroupModel::z2_star_z2();
        let g = m.parse("a1^3 b1^2 a2").unwrap();
        let lift = lift_path(&m, &relative_geodesic(&g));
        let x = PeripheralCoset::new(m.parse("a1^3 b1^2").unwrap(), 0);
        assert_eq!(lift_coset_diam(&lift, &x, 0), Some(1));
        assert_eq!(lift_coset_diam(&lift, &x, 1), Some(2));
        let far = PeripheralCoset::new(m.parse("b2^5").unwrap(), 0);
        assert_eq!(lift_coset_diam(&lift, &far, 1), None);
    }
}
