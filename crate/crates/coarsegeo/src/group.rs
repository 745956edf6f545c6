//! Computable groups: free groups, free abelian groups and free products of
//! finitely generated free abelian factors.
//!
//! Every supported group is stored as a free product of factors `Z^r`. A free
//! group of rank `k` is the free product of `k` copies of `Z`, and `Z^k` is a
//! single factor. An [`Element`] is its alternating syllable form.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exponent vector of one syllable; its length is the rank of the factor.
pub type Exps = SmallVec<[i32; 2]>;

/// A maximal subword lying in one factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: usize,
    pub exps: Exps,
}

impl Syllable {
    pub fn new(factor: usize, exps: &[i32]) -> Self {
        Syllable {
            factor,
            exps: exps.iter().copied().collect(),
        }
    }

    /// The `l1` norm, which is the word length of the syllable.
    pub fn norm(&self) -> u64 {
        self.exps.iter().map(|e| e.unsigned_abs() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn inverse(&self) -> Syllable {
        Syllable {
            factor: self.factor,
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }
}

/// One generator or its inverse. Letters are totally ordered by generator
/// index, with a generator before its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u16,
    pub inv: bool,
    pub factor: u16,
    pub coord: u16,
    pub rank: u16,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter {
            inv: !self.inv,
            ..self
        }
    }

    pub fn sign(self) -> i32 {
        if self.inv {
            -1
        } else {
            1
        }
    }

    /// Index in the model's ordered letter list.
    pub fn index(self) -> usize {
        2 * self.gen as usize + self.inv as usize
    }
}

/// A group element in alternating syllable normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    syl: Vec<Syllable>,
}

impl Element {
    pub fn identity() -> Self {
        Element { syl: Vec::new() }
    }

    /// Builds an element from syllables, merging and cancelling as needed.
    pub fn from_syllables<I: IntoIterator<Item = Syllable>>(it: I) -> Self {
        let mut e = Element::identity();
        for s in it {
            e.mul_syllable(&s);
        }
        e
    }

    pub fn syllable(factor: usize, exps: &[i32]) -> Self {
        Element::from_syllables([Syllable::new(factor, exps)])
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syl
    }

    pub fn is_identity(&self) -> bool {
        self.syl.is_empty()
    }

    /// Geodesic word length: the sum of the syllable norms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        self.syl.iter().map(Syllable::norm).sum()
    }

    pub fn syllable_count(&self) -> usize {
        self.syl.len()
    }

    pub fn inverse(&self) -> Element {
        Element {
            syl: self.syl.iter().rev().map(Syllable::inverse).collect(),
        }
    }

    pub fn mul(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for s in &other.syl {
            out.mul_syllable(s);
        }
        out
    }

    /// `self^{-1} other`, the element whose length is the distance.
    pub fn left_div(&self, other: &Element) -> Element {
        self.inverse().mul(other)
    }

    pub fn dist(&self, other: &Element) -> u64 {
        self.left_div(other).len()
    }

    /// Right-multiplies by a syllable in place.
    pub fn mul_syllable(&mut self, s: &Syllable) {
        if s.is_zero() {
            return;
        }
        if let Some(last) = self.syl.last_mut() {
            if last.factor == s.factor {
                for (a, b) in last.exps.iter_mut().zip(s.exps.iter()) {
                    *a += *b;
                }
                if last.is_zero() {
                    self.syl.pop();
                }
                return;
            }
        }
        self.syl.push(s.clone());
    }

    /// Right-multiplies by a letter in place and returns the change in length.
    pub fn mul_letter(&mut self, l: Letter) -> i64 {
        let f = l.factor as usize;
        let k = l.coord as usize;
        let s = l.sign();
        if let Some(last) = self.syl.last_mut() {
            if last.factor == f {
                let old = last.exps[k];
                let new = old + s;
                last.exps[k] = new;
                let delta = new.abs() as i64 - old.abs() as i64;
                if last.is_zero() {
                    self.syl.pop();
                }
                return delta;
            }
        }
        let mut exps: Exps = SmallVec::from_elem(0, l.rank as usize);
        exps[k] = s;
        self.syl.push(Syllable { factor: f, exps });
        1
    }

    pub fn first(&self) -> Option<&Syllable> {
        self.syl.first()
    }

    pub fn last(&self) -> Option<&Syllable> {
        self.syl.last()
    }

    /// Prefix made of the first `n` syllables.
    pub fn prefix(&self, n: usize) -> Element {
        Element {
            syl: self.syl[..n.min(self.syl.len())].to_vec(),
        }
    }

    pub(crate) fn pop_syllable(&mut self) -> Option<Syllable> {
        self.syl.pop()
    }
}

/// The algebraic class of a model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    FreeProduct { ranks: Vec<usize> },
}

#[derive(Clone, Debug)]
struct GenInfo {
    name: String,
    factor: usize,
    coord: usize,
}

/// A computable group with generators and a peripheral structure.
#[derive(Clone, Debug)]
pub struct GroupModel {
    name: String,
    kind: ModelKind,
    ranks: Vec<usize>,
    peripheral: Vec<bool>,
    gens: Vec<GenInfo>,
    letters: Vec<Letter>,
}

impl PartialEq for GroupModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.peripheral == other.peripheral
    }
}

fn factor_letter(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

impl GroupModel {
    fn build(name: String, kind: ModelKind, ranks: Vec<usize>, peripheral: Vec<bool>) -> Self {
        let mut gens = Vec::new();
        for (f, &r) in ranks.iter().enumerate() {
            for k in 0..r {
                let name = match &kind {
                    ModelKind::Free { .. } => factor_letter(f).to_string(),
                    ModelKind::FreeAbelian { .. } => format!("a{}", k + 1),
                    ModelKind::FreeProduct { .. } if r == 1 => factor_letter(f).to_string(),
                    ModelKind::FreeProduct { .. } => format!("{}{}", factor_letter(f), k + 1),
                };
                gens.push(GenInfo {
                    name,
                    factor: f,
                    coord: k,
                });
            }
        }
        let mut letters = Vec::new();
        for (g, info) in gens.iter().enumerate() {
            for inv in [false, true] {
                letters.push(Letter {
                    gen: g as u16,
                    inv,
                    factor: info.factor as u16,
                    coord: info.coord as u16,
                    rank: ranks[info.factor] as u16,
                });
            }
        }
        GroupModel {
            name,
            kind,
            ranks,
            peripheral,
            gens,
            letters,
        }
    }

    /// Free group of rank `k` with generators `a, b, c, ...`; no peripherals.
    pub fn free(k: usize) -> Self {
        assert!((1..=26).contains(&k), "free rank must be in 1..=26");
        GroupModel::build(
            format!("F{k}"),
            ModelKind::Free { rank: k },
            vec![1; k],
            vec![false; k],
        )
    }

    /// Free abelian group `Z^k` with generators `a1, ..., ak`.
    pub fn free_abelian(k: usize, peripheral: bool) -> Self {
        assert!(k >= 1, "rank must be positive");
        GroupModel::build(
            format!("Z{k}"),
            ModelKind::FreeAbelian { rank: k },
            vec![k],
            vec![peripheral],
        )
    }

    /// Free product of free abelian factors of the given ranks.
    pub fn free_product(ranks: &[usize], peripheral: &[bool]) -> Self {
        assert!(!ranks.is_empty() && ranks.len() <= 26 && ranks.iter().all(|&r| r >= 1));
        assert_eq!(ranks.len(), peripheral.len(), "one peripheral flag per factor");
        let name = ranks
            .iter()
            .map(|r| format!("Z{r}"))
            .collect::<Vec<_>>()
            .join("*");
        GroupModel::build(
            name,
            ModelKind::FreeProduct {
                ranks: ranks.to_vec(),
            },
            ranks.to_vec(),
            peripheral.to_vec(),
        )
    }

    pub fn f2() -> Self {
        GroupModel::free(2)
    }

    pub fn z2() -> Self {
        GroupModel::free_abelian(2, false)
    }

    /// `Z^2 * Z^2` with generators `a1, a2, b1, b2`, hyperbolic relative to
    /// both factors.
    pub fn z2_star_z2() -> Self {
        GroupModel::free_product(&[2, 2], &[true, true])
    }

    /// Builds a model from its kind and optional peripheral flags.
    pub fn from_kind(kind: &ModelKind, peripheral: Option<&[bool]>) -> Result<Self> {
        let bad = |m: String| Error::Config {
            path: "model".into(),
            message: m,
        };
        let m = match kind {
            ModelKind::Free { rank } => {
                if *rank == 0 || *rank > 26 {
                    return Err(bad(format!("free rank {rank} out of range 1..=26")));
                }
                if peripheral.is_some_and(|p| p.iter().any(|&b| b)) {
                    return Err(bad("free groups carry no peripheral factors".into()));
                }
                GroupModel::free(*rank)
            }
            ModelKind::FreeAbelian { rank } => {
                if *rank == 0 {
                    return Err(bad("rank must be positive".into()));
                }
                let p = peripheral.map(|p| p.first().copied().unwrap_or(false));
                GroupModel::free_abelian(*rank, p.unwrap_or(false))
            }
            ModelKind::FreeProduct { ranks } => {
                if ranks.is_empty() || ranks.len() > 26 || ranks.contains(&0) {
                    return Err(bad("free product needs 1..=26 factors of positive rank".into()));
                }
                let flags = match peripheral {
                    Some(p) if p.len() != ranks.len() => {
                        return Err(bad(format!(
                            "{} peripheral flags for {} factors",
                            p.len(),
                            ranks.len()
                        )))
                    }
                    Some(p) => p.to_vec(),
                    None => vec![true; ranks.len()],
                };
                GroupModel::free_product(ranks, &flags)
            }
        };
        Ok(m)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn n_factors(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, factor: usize) -> usize {
        self.ranks[factor]
    }

    pub fn is_peripheral(&self, factor: usize) -> bool {
        self.peripheral[factor]
    }

    pub fn peripheral_factors(&self) -> Vec<usize> {
        (0..self.ranks.len()).filter(|&f| self.peripheral[f]).collect()
    }

    pub fn peripheral_flags(&self) -> &[bool] {
        &self.peripheral
    }

    /// All letters in tie-break order: `g0, g0^-1, g1, g1^-1, ...`.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn letter(&self, gen: usize, inv: bool) -> Letter {
        self.letters[2 * gen + inv as usize]
    }

    /// The letter generating coordinate `coord` of `factor`.
    pub fn factor_letter(&self, factor: usize, coord: usize, inv: bool) -> Letter {
        let gen = self
            .gens
            .iter()
            .position(|g| g.factor == factor && g.coord == coord)
            .expect("coordinate exists");
        self.letter(gen, inv)
    }

    pub fn gen_name(&self, gen: usize) -> &str {
        &self.gens[gen].name
    }

    /// Stable digest of the model description, used as a cache key.
    pub fn hash_hex(&self) -> String {
        let desc = format!("{:?}|{:?}", self.kind, self.peripheral);
        let digest = Sha256::digest(desc.as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Checks that `e` is a well-formed normal form of this model.
    pub fn validate(&self, e: &Element) -> Result<()> {
        let mismatch = |detail: String| Error::ModelMismatch {
            model: self.name.clone(),
            detail,
        };
        let mut prev: Option<usize> = None;
        for (i, s) in e.syl.iter().enumerate() {
            if s.factor >= self.ranks.len() {
                return Err(mismatch(format!("syllable {i} uses factor {}", s.factor)));
            }
            if s.exps.len() != self.ranks[s.factor] {
                return Err(mismatch(format!(
                    "syllable {i} has {} coordinates, factor rank is {}",
                    s.exps.len(),
                    self.ranks[s.factor]
                )));
            }
            if s.is_zero() || prev == Some(s.factor) {
                return Err(mismatch(format!("syllable {i} is not reduced")));
            }
            prev = Some(s.factor);
        }
        Ok(())
    }

    pub fn normalize(&self, word: &[Letter]) -> Element {
        let mut e = Element::identity();
        for &l in word {
            e.mul_letter(l);
        }
        e
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(x.mul(y))
    }

    pub fn inverse(&self, x: &Element) -> Element {
        x.inverse()
    }

    pub fn word_length(&self, x: &Element) -> u64 {
        x.len()
    }

    /// The canonical geodesic word of `x`: syllables in order, and inside a
    /// syllable the coordinates in generator order. It is the
    /// lowest-generator-first geodesic from the identity.
    pub fn word(&self, x: &Element) -> Vec<Letter> {
        let mut out = Vec::with_capacity(x.len() as usize);
        for s in &x.syl {
            for (k, &e) in s.exps.iter().enumerate() {
                let l = self.factor_letter(s.factor, k, e < 0);
                for _ in 0..e.unsigned_abs() {
                    out.push(l);
                }
            }
        }
        out
    }

    /// Parses words such as `a1^2 b1 a2^-1`, `abab` or `1`.
    pub fn parse(&self, input: &str) -> Result<Element> {
        Ok(self.normalize(&self.parse_word(input)?))
    }

    /// Parses a word without reducing it.
    pub fn parse_word(&self, input: &str) -> Result<Vec<Letter>> {
        let bytes = input.as_bytes();
        let mut i = 0;
        let mut out = Vec::new();
        let trimmed = input.trim();
        if trimmed == "1" || trimmed == "e" || trimmed.is_empty() {
            return Ok(out);
        }
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() || c == b'*' || c == b'.' {
                i += 1;
                continue;
            }
            let rest = &input[i..];
            let best = self
                .gens
                .iter()
                .enumerate()
                .filter(|(_, g)| rest.starts_with(g.name.as_str()))
                .max_by_key(|(_, g)| g.name.len());
            let Some((gen, info)) = best else {
                let symbol = rest.chars().next().map(String::from).unwrap_or_default();
                return Err(Error::Alphabet { symbol, offset: i });
            };
            i += info.name.len();
            let mut exp: i64 = 1;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let paren = i < bytes.len() && bytes[i] == b'(';
                if paren {
                    i += 1;
                }
                let start = i;
                if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                exp = input[start..i].parse().map_err(|_| Error::Alphabet {
                    symbol: input[start..i].to_string(),
                    offset: start,
                })?;
                if paren {
                    if i < bytes.len() && bytes[i] == b')' {
                        i += 1;
                    } else {
                        return Err(Error::Alphabet {
                            symbol: "(".into(),
                            offset: start - 1,
                        });
                    }
                }
            }
            let l = self.letter(gen, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                out.push(l);
            }
        }
        Ok(out)
    }

    /// Renders an element as `a1^2 b1`, with `1` for the identity.
    pub fn format(&self, x: &Element) -> String {
        if x.is_identity() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for s in &x.syl {
            for (k, &e) in s.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let gen = self.factor_letter(s.factor, k, false).gen as usize;
                let name = &self.gens[gen].name;
                parts.push(if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                });
            }
        }
        parts.join(" ")
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter()
            .map(|l| {
                let n = &self.gens[l.gen as usize].name;
                if l.inv {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Shortlex order: by length, then by canonical word.
    pub fn cmp_shortlex(&self, x: &Element, y: &Element) -> Ordering {
        x.len()
            .cmp(&y.len())
            .then_with(|| self.word(x).cmp(&self.word(y)))
    }

    /// All elements of word length at most `radius`, in BFS order.
    pub fn ball_elements(&self, radius: u32) -> Vec<Element> {
        let mut seen: HashSet<Element> = HashSet::new();
        let mut out = vec![Element::identity()];
        seen.insert(Element::identity());
        let mut start = 0;
        for _ in 0..radius {
            let end = out.len();
            for i in start..end {
                for &l in &self.letters {
                    let mut y = out[i].clone();
                    if y.mul_letter(l) > 0 && seen.insert(y.clone()) {
                        out.push(y);
                    }
                }
            }
            start = end;
        }
        out
    }
}

/// Lattice points of `Z^rank` with `l1` norm at most `radius`, sorted.
pub fn l1_ball(rank: usize, radius: u64) -> Vec<Vec<i32>> {
    fn rec(rank: usize, budget: i64, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == rank {
            out.push(cur.clone());
            return;
        }
        for v in -budget..=budget {
            cur.push(v as i32);
            rec(rank, budget - v.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(rank, radius as i64, &mut Vec::new(), &mut out);
    out
}

/// A finitely generated subgroup, enumerated up to a word depth.
#[derive(Clone, Debug)]
pub struct SubgroupSpec {
    pub generators: Vec<Element>,
    pub enumeration_depth: usize,
}

/// Result of a depth-bounded subgroup enumeration.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub elements: Vec<Element>,
    /// True when one more level of depth added no element of the window.
    pub stabilized: bool,
}

impl SubgroupSpec {
    pub fn new(generators: Vec<Element>, enumeration_depth: usize) -> Self {
        SubgroupSpec {
            generators,
            enumeration_depth,
        }
    }

    /// Elements of subgroup-word length at most `depth`, in shortlex order.
    pub fn elements_to_depth(&self, model: &GroupModel, depth: usize) -> Vec<Element> {
        let mut gens: Vec<Element> = Vec::new();
        for g in &self.generators {
            gens.push(g.clone());
            gens.push(g.inverse());
        }
        let mut seen: HashSet<Element> = HashSet::new();
        seen.insert(Element::identity());
        let mut frontier = vec![Element::identity()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for x in &frontier {
                for g in &gens {
                    let y = x.mul(g);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Element> = seen.into_iter().collect();
        out.sort_by(|a, b| model.cmp_shortlex(a, b));
        out
    }

    /// Enumerated elements of word length at most `radius`, with a flag
    /// saying whether depth `d + 1` adds nothing inside that window.
    pub fn enumerate_in_ball(&self, model: &GroupModel, radius: u64) -> Enumeration {
        let inside = |v: Vec<Element>| -> BTreeSet<Element> {
            v.into_iter().filter(|e| e.len() <= radius).collect()
        };
        let a = inside(self.elements_to_depth(model, self.enumeration_depth));
        let b = inside(self.elements_to_depth(model, self.enumeration_depth + 1));
        let stabilized = a.len() == b.len();
        let mut elements: Vec<Element> = a.into_iter().collect();
        elements.sort_by(|x, y| model.cmp_shortlex(x, y));
        Enumeration {
            elements,
            stabilized,
        }
    }
}

/// A left coset `g F` of a factor `F`. Peripheral cosets are the cosets of
/// peripheral factors; cosets of any factor are available as subsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeripheralCoset {
    rep: Element,
    factor: usize,
}

impl PeripheralCoset {
    /// The representative is canonicalised by dropping a trailing syllable
    /// of `factor`, so equal cosets compare equal.
    pub fn new(rep: Element, factor: usize) -> Self {
        let mut rep = rep;
        if rep.last().is_some_and(|s| s.factor == factor) {
            rep.pop_syllable();
        }
        PeripheralCoset { rep, factor }
    }

    pub fn rep(&self) -> &Element {
        &self.rep
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn contains(&self, y: &Element) -> bool {
        let x = self.rep.left_div(y);
        match x.syllables() {
            [] => true,
            [s] => s.factor == self.factor,
            _ => false,
        }
    }

    /// Exact distance from `y` to the coset.
    pub fn dist(&self, y: &Element) -> u64 {
        let x = self.rep.left_div(y);
        coset_offset_dist(&x, self.factor)
    }

    /// The unique nearest point of the coset, as coordinates in the factor.
    pub fn proj_coords(&self, y: &Element, rank: usize) -> Exps {
        let x = self.rep.left_div(y);
        coset_offset_proj(&x, self.factor, rank)
    }

    pub fn point(&self, coords: &[i32]) -> Element {
        self.rep.mul(&Element::syllable(self.factor, coords))
    }

    /// Coset points of word length at most `radius`.
    pub fn points_in_ball(&self, model: &GroupModel, radius: u64) -> Vec<Element> {
        let r = model.rank(self.factor);
        let mut out: Vec<Element> = l1_ball(r, radius + self.rep.len())
            .into_iter()
            .map(|p| self.point(&p))
            .filter(|e| e.len() <= radius)
            .collect();
        out.sort_by(|a, b| model.cmp_shortlex(a, b));
        out
    }
}

/// Distance from `x` to the factor subgroup `F`, given `x` in normal form.
pub fn coset_offset_dist(x: &Element, factor: usize) -> u64 {
    let total = x.len();
    match x.first() {
        Some(s) if s.factor == factor => total - s.norm(),
        _ => total,
    }
}

/// The nearest point of the factor subgroup `F` to `x`, as coordinates.
pub fn coset_offset_proj(x: &Element, factor: usize, rank: usize) -> Exps {
    match x.first() {
        Some(s) if s.factor == factor => s.exps.clone(),
        _ => SmallVec::from_elem(0, rank),
    }
}

/// Maximum pairwise `l1` distance of a point set, via sign vectors.
pub fn l1_diameter<'a, I>(points: I, rank: usize) -> u64
where
    I: IntoIterator<Item = &'a Exps> + Clone,
{
    let mut best = 0i64;
    for mask in 0..(1u32 << rank) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for p in points.clone() {
            let v: i64 = p
                .iter()
                .enumerate()
                .map(|(k, &e)| if mask >> k & 1 == 1 { -(e as i64) } else { e as i64 })
                .sum();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo <= hi {
            best = best.max(hi - lo);
        }
    }
    best as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction_cancels_pairs() {
        let m = GroupModel::f2();
        assert_eq!(m.format(&m.parse("a a^-1 b").unwrap()), "b");
    }

    #[test]
    fn abelian_collection_sorts_coordinates() {
        let m = GroupModel::z2();
        assert_eq!(m.format(&m.parse("a1 a2 a1").unwrap()), "a1^2 a2");
    }

    #[test]
    fn syllables_merge_after_cancellation() {
        let m = GroupModel::z2_star_z2();
        let e = m.parse("a1 b1 b1^-1 a2").unwrap();
        assert_eq!(e.syllable_count(), 1);
        assert_eq!(m.format(&e), "a1 a2");
    }

    #[test]
    fn multiply_examples() {
        let f2 = GroupModel::f2();
        let p = |s: &str| f2.parse(s).unwrap();
        assert_eq!(f2.multiply(&p("ab"), &p("b^-1 a")).unwrap(), p("a^2"));
        assert!(f2.multiply(&p("a"), &p("a^-1")).unwrap().is_identity());
        let g = GroupModel::z2_star_z2();
        let q = |s: &str| g.parse(s).unwrap();
        assert_eq!(g.multiply(&q("a1 b1"), &q("b1^-1")).unwrap(), q("a1"));
    }

    #[test]
    fn cross_model_operands_are_rejected() {
        let f2 = GroupModel::f2();
        let z = GroupModel::z2_star_z2();
        let x = z.parse("a1 a2").unwrap();
        assert!(matches!(
            f2.multiply(&x, &Element::identity()),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn word_length_examples() {
        assert_eq!(GroupModel::z2().parse("a1^3 a2^-2").unwrap().len(), 5);
        assert_eq!(GroupModel::f2().parse("abab").unwrap().len(), 4);
        assert_eq!(GroupModel::z2_star_z2().parse("a1^2 b1 a1").unwrap().len(), 4);
    }

    #[test]
    fn unknown_symbol_is_an_alphabet_error() {
        let err = GroupModel::f2().parse("a c").unwrap_err();
        assert_eq!(
            err,
            Error::Alphabet {
                symbol: "c".into(),
                offset: 2
            }
        );
    }

    #[test]
    fn exponent_forms_parse() {
        let m = GroupModel::z2_star_z2();
        assert_eq!(m.parse("a1^(-2)").unwrap(), m.parse("a1^-1 a1^-1").unwrap());
        assert_eq!(m.format(&m.parse("b2^+3").unwrap()), "b2^3");
    }

    #[test]
    fn canonical_word_round_trips() {
        let m = GroupModel::z2_star_z2();
        let e = m.parse("a2^-1 a1^2 b1 b2^-3 a1").unwrap();
        assert_eq!(m.normalize(&m.word(&e)), e);
        assert_eq!(m.word(&e).len() as u64, e.len());
    }

    #[test]
    fn coset_canonical_representative() {
        let m = GroupModel::z2_star_z2();
        let c1 = PeripheralCoset::new(m.parse("b1 a1^3").unwrap(), 0);
        let c2 = PeripheralCoset::new(m.parse("b1 a2").unwrap(), 0);
        assert_eq!(c1, c2);
        assert!(c1.contains(&m.parse("b1").unwrap()));
        assert!(!c1.contains(&m.parse("b1 a1 b2").unwrap()));
        assert_eq!(c1.dist(&Element::identity()), 1);
    }

    #[test]
    fn l1_ball_counts() {
        assert_eq!(l1_ball(2, 2).len(), 13);
        assert_eq!(l1_ball(1, 4).len(), 9);
        assert_eq!(l1_ball(3, 1).len(), 7);
    }

    #[test]
    fn l1_diameter_of_a_segment() {
        let pts: Vec<Exps> = vec![SmallVec::from_slice(&[0, 0]), SmallVec::from_slice(&[3, 0])];
        assert_eq!(l1_diameter(pts.iter(), 2), 3);
        let pts: Vec<Exps> = vec![SmallVec::from_slice(&[1, -1]), SmallVec::from_slice(&[-2, 1])];
        assert_eq!(l1_diameter(pts.iter(), 2), 5);
    }

    #[test]
    fn subgroup_membership_by_enumeration() {
        let m = GroupModel::z2_star_z2();
        let h = SubgroupSpec::new(vec![m.parse("a1").unwrap(), m.parse("b1").unwrap()], 3);
        let en = h.enumerate_in_ball(&m, 3);
        assert!(en.elements.contains(&m.parse("a1 b1").unwrap()));
        assert!(en.elements.contains(&m.parse("b1 a1^-1").unwrap()));
        assert!(!en.elements.contains(&m.parse("a2").unwrap()));
        assert!(en.stabilized);
    }

    #[test]
    fn cyclic_subgroup_in_ball_four() {
        let m = GroupModel::f2();
        let h = SubgroupSpec::new(vec![m.parse("a").unwrap()], 4);
        let en = h.enumerate_in_ball(&m, 4);
        assert_eq!(en.elements.len(), 9);
        assert!(en.stabilized);
    }

    #[test]
    fn coset_points_in_ball() {
        let m = GroupModel::z2_star_z2();
        let c = PeripheralCoset::new(m.parse("b1").unwrap(), 0);
        let pts = c.points_in_ball(&m, 3);
        assert_eq!(pts.len(), 13);
        assert!(pts.iter().all(|p| c.contains(p) && p.len() <= 3));
    }
}
