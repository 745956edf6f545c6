//! Metric graphs: explicit Cayley balls with BFS distances, and exact
//! implicit paths in the infinite Cayley graph indexed for fast pairwise
//! distances.

use std::collections::{HashMap, VecDeque};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::group::{Element, Exps, GroupModel, Letter};

/// Exact rationals used for quasigeodesic constants.
pub type Rat = Ratio<i64>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n)
}

pub fn fmt_rat(r: Rat) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

const NONE: u32 = u32::MAX;

/// The closed ball of a Cayley graph around the identity.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    model: GroupModel,
    radius: u32,
    vertices: Vec<Element>,
    lengths: Vec<u32>,
    index: HashMap<Element, u32>,
    /// Dense neighbour table: `nbr[v * letters + l]`, `NONE` when outside.
    nbr: Vec<u32>,
}

/// Where a vertex subset came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "label", rename_all = "snake_case")]
pub enum Provenance {
    Subgroup(String),
    Coset(String),
    AdHoc(String),
}

/// A set of graph vertices, sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSubset {
    pub ids: Vec<u32>,
    pub provenance: Provenance,
}

impl VertexSubset {
    pub fn new(mut ids: Vec<u32>, provenance: Provenance) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSubset { ids, provenance }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// A measured number with a flag saying whether ball truncation could have
/// distorted it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Measured {
    pub value: u64,
    pub trusted: bool,
}

/// Outcome of a quasigeodesic check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QgVerdict {
    pub pass: bool,
    /// Largest `len([x,y]) - lambda d(x,y)` over pairs, if the path has an edge.
    pub max_excess: Option<Rat>,
    /// First pair attaining the maximum excess, as vertex positions.
    pub witness: Option<(usize, usize)>,
}

impl MetricGraph {
    /// Builds the ball of `radius`, failing once more than `budget` vertices
    /// would be needed.
    pub fn ball(model: &GroupModel, radius: u32, budget: usize) -> Result<Self> {
        let letters = model.letters();
        let mut vertices = vec![Element::identity()];
        let mut lengths = vec![0u32];
        let mut index = HashMap::new();
        index.insert(Element::identity(), 0u32);
        let mut start = 0;
        for r in 1..=radius {
            let end = vertices.len();
            for i in start..end {
                for &l in letters {
                    let mut y = vertices[i].clone();
                    if y.mul_letter(l) > 0 && !index.contains_key(&y) {
                        if vertices.len() >= budget {
                            return Err(Error::Budget {
                                radius,
                                budget,
                                reached: vertices.len(),
                                reached_radius: r - 1,
                            });
                        }
                        index.insert(y.clone(), vertices.len() as u32);
                        vertices.push(y);
                        lengths.push(r);
                    }
                }
            }
            start = end;
        }
        let nl = letters.len();
        let mut nbr = vec![NONE; vertices.len() * nl];
        for (v, x) in vertices.iter().enumerate() {
            for (li, &l) in letters.iter().enumerate() {
                let mut y = x.clone();
                y.mul_letter(l);
                if let Some(&id) = index.get(&y) {
                    nbr[v * nl + li] = id;
                }
            }
        }
        Ok(MetricGraph {
            model: model.clone(),
            radius,
            vertices,
            lengths,
            index,
            nbr,
        })
    }

    /// Rebuilds a ball from stored parts; used by the on-disk cache.
    pub(crate) fn from_parts(
        model: &GroupModel,
        radius: u32,
        vertices: Vec<Element>,
        nbr: Vec<u32>,
    ) -> Self {
        let lengths = vertices.iter().map(|v| v.len() as u32).collect();
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        MetricGraph {
            model: model.clone(),
            radius,
            vertices,
            lengths,
            index,
            nbr,
        }
    }

    pub(crate) fn neighbour_table(&self) -> &[u32] {
        &self.nbr
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.nbr.iter().filter(|&&x| x != NONE).count() / 2
    }

    pub fn element(&self, id: u32) -> &Element {
        &self.vertices[id as usize]
    }

    pub fn elements(&self) -> &[Element] {
        &self.vertices
    }

    pub fn id_of(&self, e: &Element) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn id(&self, e: &Element) -> Result<u32> {
        self.id_of(e)
            .ok_or_else(|| Error::MissingVertex(self.model.format(e)))
    }

    pub fn length(&self, id: u32) -> u32 {
        self.lengths[id as usize]
    }

    /// Number of vertices at each word length `0..=radius`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius as usize + 1];
        for &l in &self.lengths {
            out[l as usize] += 1;
        }
        out
    }

    /// Neighbour of `id` along letter `l`, if inside the ball.
    pub fn step(&self, id: u32, l: Letter) -> Option<u32> {
        let nl = self.model.letters().len();
        let t = self.nbr[id as usize * nl + l.index()];
        (t != NONE).then_some(t)
    }

    /// Neighbours in letter order.
    pub fn neighbours(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        let nl = self.model.letters().len();
        self.nbr[id as usize * nl..(id as usize + 1) * nl]
            .iter()
            .copied()
            .filter(|&t| t != NONE)
    }

    /// True when `id` lies within `width` of the boundary sphere.
    pub fn near_boundary(&self, id: u32, width: u32) -> bool {
        self.lengths[id as usize] + width > self.radius
    }

    pub fn bfs(&self, src: u32) -> Vec<u32> {
        self.multi_bfs(&[src])
    }

    /// Distance to the nearest source for every vertex.
    pub fn multi_bfs(&self, srcs: &[u32]) -> Vec<u32> {
        let mut dist = vec![NONE; self.vertices.len()];
        let mut q = VecDeque::new();
        for &s in srcs {
            if dist[s as usize] == NONE {
                dist[s as usize] = 0;
                q.push_back(s);
            }
        }
        while let Some(v) = q.pop_front() {
            let dv = dist[v as usize];
            for t in self.neighbours(v) {
                if dist[t as usize] == NONE {
                    dist[t as usize] = dv + 1;
                    q.push_back(t);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: u32, v: u32) -> u32 {
        let d = self.bfs(u)[v as usize];
        assert!(d != NONE, "balls are connected");
        d
    }

    /// A geodesic from `u` to `v`; at each step the lowest letter that
    /// decreases the distance to `v` is taken.
    pub fn a_geodesic(&self, u: u32, v: u32) -> Vec<u32> {
        let dv = self.bfs(v);
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self
                .neighbours(cur)
                .find(|&t| dv[t as usize] + 1 == dv[cur as usize])
                .expect("BFS predecessor exists");
            path.push(cur);
        }
        path
    }

    /// Follows a word from `start`; `None` if it leaves the ball.
    pub fn follow(&self, start: u32, word: &[Letter]) -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(word.len() + 1);
        out.push(start);
        let mut cur = start;
        for &l in word {
            cur = self.step(cur, l)?;
            out.push(cur);
        }
        Some(out)
    }

    /// `N_U(X)` inside the ball.
    pub fn neighborhood(&self, x: &VertexSubset, u: u32) -> VertexSubset {
        let d = self.multi_bfs(&x.ids);
        let ids = (0..self.vertices.len() as u32)
            .filter(|&v| d[v as usize] <= u)
            .collect();
        VertexSubset::new(ids, x.provenance.clone())
    }

    /// Diameter of a subset; untrusted when it touches the boundary shell of
    /// width `shell`.
    pub fn diam(&self, x: &VertexSubset, shell: u32) -> Result<Measured> {
        if x.is_empty() {
            return Err(Error::EmptyInput("diam of an empty subset"));
        }
        let mut best = 0u64;
        for &a in &x.ids {
            let d = self.bfs(a);
            for &b in &x.ids {
                best = best.max(d[b as usize] as u64);
            }
        }
        let trusted = !x.ids.iter().any(|&v| self.near_boundary(v, shell));
        Ok(Measured {
            value: best,
            trusted,
        })
    }

    /// `proj_X(A)` with slack `delta`.
    pub fn proj(&self, a: &[u32], x: &VertexSubset, delta: u32) -> Result<VertexSubset> {
        if x.is_empty() {
            return Err(Error::EmptyInput("projection target"));
        }
        let mut out = Vec::new();
        for &p in a {
            let d = self.bfs(p);
            let m = x.ids.iter().map(|&v| d[v as usize]).min().unwrap_or(NONE);
            out.extend(
                x.ids
                    .iter()
                    .copied()
                    .filter(|&v| d[v as usize] <= m.saturating_add(delta)),
            );
        }
        Ok(VertexSubset::new(out, x.provenance.clone()))
    }

    /// Pairwise check of `len <= lambda d + c` along a vertex path, with BFS
    /// distances inside the ball.
    pub fn is_quasigeodesic(&self, path: &[u32], lambda: Rat, c: Rat) -> QgVerdict {
        let rows: Vec<Vec<u32>> = path.iter().map(|&p| self.bfs(p)).collect();
        let dist = |i: usize, j: usize| rows[i][path[j] as usize] as u64;
        qg_verdict(path.len(), &dist, lambda, c)
    }
}

/// Table of distances to `X` and of nearest-point sets, for repeated
/// projection queries with slack zero.
#[derive(Clone, Debug)]
pub struct ProjectionTable {
    pub dist: Vec<u32>,
    /// Nearest points of each vertex, as positions in `X.ids`.
    pub nearest: Vec<SmallVec<[u32; 2]>>,
    members: Vec<u32>,
    xdist: Vec<u32>,
}

impl ProjectionTable {
    pub fn new(g: &MetricGraph, x: &VertexSubset) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("projection target"));
        }
        let n = g.n_vertices();
        let mut dist = vec![NONE; n];
        let mut nearest: Vec<SmallVec<[u32; 2]>> = vec![SmallVec::new(); n];
        let mut q = VecDeque::new();
        for (pos, &v) in x.ids.iter().enumerate() {
            dist[v as usize] = 0;
            nearest[v as usize].push(pos as u32);
            q.push_back(v);
        }
        let mut order = Vec::with_capacity(n);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for t in g.neighbours(v) {
                if dist[t as usize] == NONE {
                    dist[t as usize] = dist[v as usize] + 1;
                    q.push_back(t);
                }
            }
        }
        for &v in &order {
            if dist[v as usize] == 0 {
                continue;
            }
            let mut acc: SmallVec<[u32; 2]> = SmallVec::new();
            for t in g.neighbours(v) {
                if dist[t as usize] + 1 == dist[v as usize] {
                    acc.extend(nearest[t as usize].iter().copied());
                }
            }
            acc.sort_unstable();
            acc.dedup();
            nearest[v as usize] = acc;
        }
        let k = x.ids.len();
        let mut xdist = vec![0u32; k * k];
        for (i, &a) in x.ids.iter().enumerate() {
            let d = g.bfs(a);
            for (j, &b) in x.ids.iter().enumerate() {
                xdist[i * k + j] = d[b as usize];
            }
        }
        Ok(ProjectionTable {
            dist,
            nearest,
            members: x.ids.clone(),
            xdist,
        })
    }

    pub fn member(&self, pos: u32) -> u32 {
        self.members[pos as usize]
    }

    pub fn pair_dist(&self, a: u32, b: u32) -> u64 {
        self.xdist[a as usize * self.members.len() + b as usize] as u64
    }

    /// Diameter of a set of positions in `X`.
    pub fn diam(&self, positions: &[u32]) -> u64 {
        let k = self.members.len();
        let mut best = 0;
        for (i, &a) in positions.iter().enumerate() {
            for &b in &positions[i + 1..] {
                best = best.max(self.xdist[a as usize * k + b as usize]);
            }
        }
        best as u64
    }
}

/// A path in the infinite Cayley graph: a start vertex and a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSeq {
    pub start: Element,
    pub letters: Vec<Letter>,
}

impl PathSeq {
    pub fn trivial(at: Element) -> Self {
        PathSeq {
            start: at,
            letters: Vec::new(),
        }
    }

    pub fn new(start: Element, letters: Vec<Letter>) -> Self {
        PathSeq { start, letters }
    }

    /// The lowest-generator-first geodesic from `u` to `v`.
    pub fn geodesic(model: &GroupModel, u: &Element, v: &Element) -> Self {
        PathSeq {
            start: u.clone(),
            letters: model.word(&u.left_div(v)),
        }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn end(&self) -> Element {
        let mut e = self.start.clone();
        for &l in &self.letters {
            e.mul_letter(l);
        }
        e
    }

    pub fn vertex(&self, i: usize) -> Element {
        let mut e = self.start.clone();
        for &l in &self.letters[..i] {
            e.mul_letter(l);
        }
        e
    }

    pub fn vertices(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.letters.len() + 1);
        let mut e = self.start.clone();
        out.push(e.clone());
        for &l in &self.letters {
            e.mul_letter(l);
            out.push(e.clone());
        }
        out
    }

    /// Calls `f(i, x_i)` on every vertex in order without storing them.
    pub fn for_each_vertex<F: FnMut(usize, &Element)>(&self, mut f: F) {
        let mut e = self.start.clone();
        f(0, &e);
        for (i, &l) in self.letters.iter().enumerate() {
            e.mul_letter(l);
            f(i + 1, &e);
        }
    }

    pub fn concat(&self, other: &PathSeq) -> Result<PathSeq> {
        if self.end() != other.start {
            return Err(Error::Structure(
                "concatenated pieces do not share an endpoint".into(),
            ));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(PathSeq {
            start: self.start.clone(),
            letters,
        })
    }

    /// The subpath between vertex positions `i <= j`.
    pub fn subpath(&self, i: usize, j: usize) -> PathSeq {
        PathSeq {
            start: self.vertex(i),
            letters: self.letters[i..j].to_vec(),
        }
    }

    pub fn reversed(&self) -> PathSeq {
        PathSeq {
            start: self.end(),
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// True when consecutive letters never cancel.
    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1].inverse())
    }
}

/// Syllable trie over the vertices of a path, with binary lifting, giving
/// exact distances between any two path vertices in `O(log n)`.
#[derive(Clone, Debug)]
pub struct PathIndex {
    depth: Vec<u32>,
    wlen: Vec<u64>,
    factor: Vec<u32>,
    exps: Vec<Exps>,
    up: Vec<Vec<u32>>,
    node_of: Vec<u32>,
}

impl PathIndex {
    pub fn new(path: &PathSeq) -> Self {
        let mut b = TrieBuilder::default();
        let mut stack: Vec<u32> = Vec::new();
        for s in path.start.syllables() {
            let parent = stack.last().copied().unwrap_or(0);
            stack.push(b.child(parent, s.factor as u32, &s.exps));
        }
        let mut node_of = Vec::with_capacity(path.len() + 1);
        node_of.push(stack.last().copied().unwrap_or(0));
        for &l in &path.letters {
            let f = l.factor as u32;
            let top = stack.last().copied();
            match top {
                Some(t) if b.factor[t as usize] == f => {
                    let mut e = b.exps[t as usize].clone();
                    e[l.coord as usize] += l.sign();
                    stack.pop();
                    let parent = stack.last().copied().unwrap_or(0);
                    if e.iter().any(|&x| x != 0) {
                        stack.push(b.child(parent, f, &e));
                    }
                }
                _ => {
                    let mut e: Exps = SmallVec::from_elem(0, l.rank as usize);
                    e[l.coord as usize] = l.sign();
                    stack.push(b.child(top.unwrap_or(0), f, &e));
                }
            }
            node_of.push(stack.last().copied().unwrap_or(0));
        }
        let n = b.parent.len();
        let max_depth = b.depth.iter().copied().max().unwrap_or(0);
        let levels = (32 - max_depth.leading_zeros()).max(1) as usize;
        let mut up = vec![b.parent.clone()];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next: Vec<u32> = (0..n).map(|v| prev[prev[v] as usize]).collect();
            up.push(next);
        }
        PathIndex {
            depth: b.depth,
            wlen: b.wlen,
            factor: b.factor,
            exps: b.exps,
            up,
            node_of,
        }
    }

    /// Number of path vertices.
    pub fn n_vertices(&self) -> usize {
        self.node_of.len()
    }

    fn lift(&self, mut v: u32, mut by: u32) -> u32 {
        let mut k = 0;
        while by > 0 {
            if by & 1 == 1 {
                v = self.up[k][v as usize];
            }
            by >>= 1;
            k += 1;
        }
        v
    }

    /// Exact distance between path vertices `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> u64 {
        let x = self.node_of[i];
        let y = self.node_of[j];
        if x == y {
            return 0;
        }
        let (dx, dy) = (self.depth[x as usize], self.depth[y as usize]);
        let mut a = if dx > dy { self.lift(x, dx - dy) } else { x };
        let mut b = if dy > dx { self.lift(y, dy - dx) } else { y };
        let (lx, ly) = (self.wlen[x as usize], self.wlen[y as usize]);
        if a == b {
            return lx.abs_diff(ly);
        }
        for k in (0..self.up.len()).rev() {
            let (pa, pb) = (self.up[k][a as usize], self.up[k][b as usize]);
            if pa != pb {
                a = pa;
                b = pb;
            }
        }
        let (ai, bi) = (a as usize, b as usize);
        if self.factor[ai] == self.factor[bi] {
            let mid: u64 = self.exps[ai]
                .iter()
                .zip(self.exps[bi].iter())
                .map(|(p, q)| (p - q).unsigned_abs() as u64)
                .sum();
            (lx - self.wlen[ai]) + mid + (ly - self.wlen[bi])
        } else {
            let c = self.up[0][ai] as usize;
            lx + ly - 2 * self.wlen[c]
        }
    }
}

#[derive(Default)]
struct TrieBuilder {
    parent: Vec<u32>,
    depth: Vec<u32>,
    wlen: Vec<u64>,
    factor: Vec<u32>,
    exps: Vec<Exps>,
    children: HashMap<(u32, u32, Exps), u32>,
}

impl TrieBuilder {
    fn child(&mut self, parent: u32, factor: u32, exps: &Exps) -> u32 {
        if self.parent.is_empty() {
            self.parent.push(0);
            self.depth.push(0);
            self.wlen.push(0);
            self.factor.push(u32::MAX);
            self.exps.push(SmallVec::new());
        }
        let key = (parent, factor, exps.clone());
        if let Some(&id) = self.children.get(&key) {
            return id;
        }
        let id = self.parent.len() as u32;
        let norm: u64 = exps.iter().map(|e| e.unsigned_abs() as u64).sum();
        self.parent.push(parent);
        self.depth.push(self.depth[parent as usize] + 1);
        self.wlen.push(self.wlen[parent as usize] + norm);
        self.factor.push(factor);
        self.exps.push(exps.clone());
        self.children.insert(key, id);
        id
    }
}

/// Largest excess `(j - i) - lambda d(i, j)` over vertex pairs `i < j` of a
/// path with `n` vertices, and the first pair attaining it.
///
/// Ranges of `j` are pruned with the triangle-inequality lower bound on
/// `d(i, j)` from the two ends of the range, so near-geodesic paths need
/// few distance queries.
pub fn max_excess<D>(n: usize, dist: &D, lambda: Rat) -> Option<(Rat, usize, usize)>
where
    D: Fn(usize, usize) -> u64,
{
    if n < 2 {
        return None;
    }
    let one = rat(1);
    let mut best = one - lambda;
    let mut wit = (0usize, 1usize);
    let excess = |i: usize, j: usize, d: u64| rat((j - i) as i64) - lambda * rat(d as i64);
    let mut stack: Vec<(usize, u64, usize, u64)> = Vec::new();
    for i in 0..n - 1 {
        let last = n - 1;
        if last <= i + 1 {
            continue;
        }
        let dl = dist(i, last);
        let e = excess(i, last, dl);
        if e > best {
            best = e;
            wit = (i, last);
        }
        stack.clear();
        stack.push((i + 1, 1, last, dl));
        while let Some((a, da, b, db)) = stack.pop() {
            if b <= a + 1 {
                continue;
            }
            if range_bound(i, a, da, b, db, lambda) <= best {
                continue;
            }
            if b - a <= 4 {
                for j in a + 1..b {
                    let d = dist(i, j);
                    let e = excess(i, j, d);
                    if e > best {
                        best = e;
                        wit = (i, j);
                    }
                }
                continue;
            }
            let m = a + (b - a) / 2;
            let dm = dist(i, m);
            let e = excess(i, m, dm);
            if e > best {
                best = e;
                wit = (i, m);
            }
            stack.push((m, dm, b, db));
            stack.push((a, da, m, dm));
        }
    }
    Some((best, wit.0, wit.1))
}

/// Upper bound of the excess over `j` strictly between `a` and `b`.
fn range_bound(i: usize, a: usize, da: u64, b: usize, db: u64, lambda: Rat) -> Rat {
    let lo = rat((a + 1) as i64);
    let hi = rat((b - 1) as i64);
    let (a_, b_, da_, db_) = (a as i64, b as i64, da as i64, db as i64);
    let lb = |j: Rat| -> Rat {
        let t1 = rat(da_ + a_) - j;
        let t2 = rat(db_ - b_) + j;
        let m = if t1 > t2 { t1 } else { t2 };
        if m < Rat::zero() {
            Rat::zero()
        } else {
            m
        }
    };
    let f = |j: Rat| j - rat(i as i64) - lambda * lb(j);
    let clamp = |j: Rat| if j < lo { lo } else if j > hi { hi } else { j };
    let cands = [
        lo,
        hi,
        clamp(Rat::new(da_ - db_ + a_ + b_, 2)),
        clamp(rat(da_ + a_)),
        clamp(rat(b_ - db_)),
    ];
    cands.iter().map(|&j| f(j)).max().expect("nonempty")
}

/// Pass/fail form of [`max_excess`] for the constants `(lambda, c)`.
pub fn qg_verdict<D>(n: usize, dist: &D, lambda: Rat, c: Rat) -> QgVerdict
where
    D: Fn(usize, usize) -> u64,
{
    match max_excess(n, dist, lambda) {
        None => QgVerdict {
            pass: true,
            max_excess: None,
            witness: None,
        },
        Some((e, i, j)) => QgVerdict {
            pass: e <= c,
            max_excess: Some(e),
            witness: (e > c).then_some((i, j)),
        },
    }
}

/// Quasigeodesic check of an implicit path with exact group distances.
pub fn is_quasigeodesic(path: &PathSeq, lambda: Rat, c: Rat) -> QgVerdict {
    let idx = PathIndex::new(path);
    qg_verdict(idx.n_vertices(), &|i, j| idx.dist(i, j), lambda, c)
}

/// Fitted constants of a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QgFit {
    /// Minimal `c` at the requested `lambda`.
    pub min_c: Rat,
    /// Minimal multiplicative constant with `c = 0`; `None` if the path
    /// revisits a vertex.
    pub min_lambda_c0: Option<Rat>,
    /// Minimal `c` for each `lambda` of the grid.
    pub frontier: Vec<(Rat, Rat)>,
}

/// Minimal `c` at `lambda`, minimal `lambda` at `c = 0`, and a frontier.
pub fn fit_quasigeodesic_constants(path: &PathSeq, lambda: Rat, grid: &[Rat]) -> QgFit {
    let idx = PathIndex::new(path);
    fit_with(idx.n_vertices(), &|i, j| idx.dist(i, j), lambda, grid)
}

pub fn fit_with<D>(n: usize, dist: &D, lambda: Rat, grid: &[Rat]) -> QgFit
where
    D: Fn(usize, usize) -> u64,
{
    let min_c_at = |l: Rat| -> Rat {
        match max_excess(n, dist, l) {
            Some((e, _, _)) if e > Rat::zero() => e,
            _ => Rat::zero(),
        }
    };
    let min_c = min_c_at(lambda);
    let frontier = grid.iter().map(|&l| (l, min_c_at(l))).collect();
    QgFit {
        min_c,
        min_lambda_c0: min_lambda(n, dist),
        frontier,
    }
}

/// Largest ratio `(j - i) / d(i, j)`, found by Dinkelbach iteration on
/// [`max_excess`]; `None` when some `d(i, j) = 0` with `i < j`.
pub fn min_lambda<D>(n: usize, dist: &D) -> Option<Rat>
where
    D: Fn(usize, usize) -> u64,
{
    let mut lam = rat(1);
    if n < 2 {
        return Some(lam);
    }
    loop {
        let (e, i, j) = max_excess(n, dist, lam).expect("n >= 2");
        if e <= Rat::zero() {
            return Some(lam);
        }
        let d = dist(i, j);
        if d == 0 {
            return None;
        }
        lam = Rat::new((j - i) as i64, d as i64);
    }
}

/// Lossy conversion for reports.
pub fn rat_f64(r: Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
