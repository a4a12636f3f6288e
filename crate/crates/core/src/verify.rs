//! Exact desk-scale oracles on weighted hypergraphs: maximum independent
//! set, 2-colorability and almost-2-colorability.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const ALMOST_COLOR_CANDIDATE_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("edge {edge} is invalid: {why}")]
    BadEdge { edge: usize, why: String },
    #[error("vertex weight {0} is not positive")]
    BadWeight(usize),
    #[error("weights have {got} entries for {expected} vertices")]
    WeightCount { expected: usize, got: usize },
    #[error("scaled weights overflow 128 bits")]
    Overflow,
    #[error("{0} candidate removals exceed the enumeration cap")]
    TooManyCandidates(u128),
    #[error("candidate removal weight exceeds ε times the total")]
    CandidateTooHeavy,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("json: {0}")]
    Json(String),
}

/// Hypergraph whose edges have between 2 and k distinct vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericHypergraph {
    k: usize,
    weights: Vec<BigRational>,
    edges: Vec<Vec<usize>>,
    meta: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct HypergraphJson {
    k: usize,
    vertices: Vec<VertexJson>,
    edges: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    meta: serde_json::Value,
}

fn parse_rational(s: &str) -> Option<BigRational> {
    s.trim().parse().ok()
}

impl GenericHypergraph {
    pub fn new(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self, VerifyError> {
        Self::weighted(vec![BigRational::one(); n], k, edges)
    }

    pub fn weighted(
        weights: Vec<BigRational>,
        k: usize,
        edges: Vec<Vec<usize>>,
    ) -> Result<Self, VerifyError> {
        if let Some(i) = weights.iter().position(|w| *w <= BigRational::zero()) {
            return Err(VerifyError::BadWeight(i));
        }
        let n = weights.len();
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, mut e)| {
                e.sort_unstable();
                let bad = |why: &str| VerifyError::BadEdge {
                    edge: i,
                    why: why.to_string(),
                };
                if e.len() < 2 || e.len() > k {
                    return Err(bad(&format!("size {} outside 2..={k}", e.len())));
                }
                if e.windows(2).any(|w| w[0] == w[1]) {
                    return Err(bad("repeated vertex"));
                }
                if e.last().is_some_and(|&v| v >= n) {
                    return Err(bad("vertex out of range"));
                }
                Ok(e)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            k,
            weights,
            edges,
            meta: serde_json::Value::Null,
        })
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = meta;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn meta(&self) -> &serde_json::Value {
        &self.meta
    }

    pub fn total_weight(&self) -> BigRational {
        self.weights.iter().fold(BigRational::zero(), |a, w| a + w)
    }

    pub fn weight_of(&self, set: &[usize]) -> BigRational {
        set.iter()
            .fold(BigRational::zero(), |a, &v| a + &self.weights[v])
    }

    pub fn is_uniform(&self) -> bool {
        self.edges.iter().all(|e| e.len() == self.k)
    }

    /// No edge lies entirely inside `set`.
    pub fn is_independent(&self, set: &[bool]) -> bool {
        self.first_edge_inside(set).is_none()
    }

    pub fn first_edge_inside(&self, set: &[bool]) -> Option<usize> {
        self.edges.iter().position(|e| e.iter().all(|&v| set[v]))
    }

    pub fn is_vertex_cover(&self, set: &[bool]) -> bool {
        self.edges.iter().all(|e| e.iter().any(|&v| set[v]))
    }

    /// Indices of monochromatic edges under `coloring`.
    pub fn monochromatic_edges(&self, coloring: &[bool]) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.iter().all(|&v| coloring[v] == coloring[e[0]]))
            .map(|(i, _)| i)
            .collect()
    }

    /// Edges lying entirely inside the kept vertices, with vertex ids kept.
    pub fn induced(&self, keep: &[bool]) -> Self {
        Self {
            k: self.k,
            weights: self.weights.clone(),
            edges: self
                .edges
                .iter()
                .filter(|e| e.iter().all(|&v| keep[v]))
                .cloned()
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Weights scaled by the common denominator into integers.
    fn integer_weights(&self) -> Result<Vec<u128>, VerifyError> {
        let lcm = self
            .weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<u128> = self
            .weights
            .iter()
            .map(|w| {
                (w.numer() * (&lcm / w.denom()))
                    .to_u128()
                    .ok_or(VerifyError::Overflow)
            })
            .collect::<Result<_, _>>()?;
        scaled
            .iter()
            .try_fold(0u128, |a, &w| a.checked_add(w))
            .ok_or(VerifyError::Overflow)?;
        Ok(scaled)
    }

    pub fn to_json(&self) -> String {
        let j = HypergraphJson {
            k: self.k,
            vertices: self
                .weights
                .iter()
                .enumerate()
                .map(|(id, w)| VertexJson {
                    id,
                    weight: w.to_string(),
                })
                .collect(),
            edges: self.edges.clone(),
            meta: self.meta.clone(),
        };
        serde_json::to_string_pretty(&j).expect("hypergraph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, VerifyError> {
        let j: HypergraphJson =
            serde_json::from_str(s).map_err(|e| VerifyError::Json(e.to_string()))?;
        let mut weights = vec![None; j.vertices.len()];
        for (i, v) in j.vertices.iter().enumerate() {
            if v.id >= weights.len() || weights[v.id].is_some() {
                return Err(VerifyError::Json(format!(
                    "vertices[{i}]: bad or repeated id {}",
                    v.id
                )));
            }
            weights[v.id] = Some(parse_rational(&v.weight).ok_or_else(|| {
                VerifyError::Json(format!("vertices[{i}].weight: {:?}", v.weight))
            })?);
        }
        let weights = weights.into_iter().map(Option::unwrap).collect();
        Ok(Self::weighted(weights, j.k, j.edges)?.with_meta(j.meta))
    }

    /// Line 1: `k n`; line 2: the n weights; then one edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.k, self.num_vertices());
        let ws: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        out.push_str(&ws.join(" "));
        out.push('\n');
        for e in &self.edges {
            let vs: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            out.push_str(&vs.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_edge_list(s: &str) -> Result<Self, VerifyError> {
        let err = |line: usize, msg: &str| VerifyError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = s.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| err(1, "missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(1, "expected `k n`")))
            .collect::<Result<_, _>>()?;
        let [k, n] = header[..] else {
            return Err(err(1, "expected `k n`"));
        };
        let weights: Vec<BigRational> = lines
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| err(2, &format!("bad weight {t:?}"))))
            .collect::<Result<_, _>>()?;
        if weights.len() != n {
            return Err(VerifyError::WeightCount {
                expected: n,
                got: weights.len(),
            });
        }
        let edges = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.split_whitespace()
                    .map(|t| match t.parse::<usize>() {
                        Ok(v) if v < n => Ok(v),
                        Ok(v) => Err(err(i + 3, &format!("vertex {v} out of range 0..{n}"))),
                        Err(_) => Err(err(i + 3, &format!("bad vertex {t:?}"))),
                    })
                    .collect::<Result<Vec<usize>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Self::weighted(weights, k, edges)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependentSetResult {
    pub set: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub weight: BigRational,
    pub optimal: bool,
    pub nodes: u64,
}

pub fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Free,
    In,
    Out,
}

struct MisSearch<'a> {
    w: Vec<u128>,
    edges: &'a [Vec<usize>],
    incident: Vec<Vec<usize>>,
    state: Vec<State>,
    cur: u128,
    best: u128,
    best_set: Vec<bool>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl MisSearch<'_> {
    /// A free vertex is forced out when all its edge-mates are in.
    fn forced_out(&self, v: usize) -> bool {
        self.incident[v].iter().any(|&e| {
            self.edges[e]
                .iter()
                .all(|&u| u == v || self.state[u] == State::In)
        })
    }

    /// Free weight minus, over vertex-disjoint live edges, the lightest free
    /// vertex of each (one of them must stay out).
    fn upper_bound(&self) -> u128 {
        let free: u128 = (0..self.w.len())
            .filter(|&v| self.state[v] == State::Free)
            .map(|v| self.w[v])
            .sum();
        let mut used = vec![false; self.w.len()];
        let mut saving = 0;
        for e in self.edges {
            if e.iter().any(|&u| self.state[u] == State::Out) {
                continue;
            }
            let frees: Vec<usize> = e
                .iter()
                .copied()
                .filter(|&u| self.state[u] == State::Free)
                .collect();
            if frees.is_empty() || frees.iter().any(|&u| used[u]) {
                continue;
            }
            saving += frees.iter().map(|&u| self.w[u]).min().unwrap_or(0);
            for u in frees {
                used[u] = true;
            }
        }
        self.cur + free - saving
    }

    fn pick(&self) -> Option<usize> {
        (0..self.w.len())
            .filter(|&v| self.state[v] == State::Free)
            .max_by_key(|&v| {
                let deg = self.incident[v]
                    .iter()
                    .filter(|&&e| self.edges[e].iter().all(|&u| self.state[u] != State::Out))
                    .count();
                (deg, std::cmp::Reverse(v))
            })
    }

    fn search(&mut self) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if self.cur > self.best {
            self.best = self.cur;
            self.best_set = self.state.iter().map(|&s| s == State::In).collect();
        }
        if self.upper_bound() <= self.best {
            return;
        }
        let Some(v) = self.pick() else { return };
        if !self.forced_out(v) {
            self.state[v] = State::In;
            self.cur += self.w[v];
            self.search();
            self.cur -= self.w[v];
        }
        self.state[v] = State::Out;
        self.search();
        self.state[v] = State::Free;
    }
}

fn incidence(n: usize, edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        for &v in e {
            inc[v].push(i);
        }
    }
    inc
}

/// Branch and bound; `optimal` is false when the node budget ran out.
pub fn max_independent_set(
    h: &GenericHypergraph,
    budget: u64,
) -> Result<IndependentSetResult, VerifyError> {
    let w = h.integer_weights()?;
    let n = w.len();
    let incident = incidence(n, &h.edges);

    // Greedy start: heaviest vertices first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(w[v]), incident[v].len(), v));
    let mut greedy = vec![false; n];
    for v in order {
        greedy[v] = true;
        if incident[v]
            .iter()
            .any(|&e| h.edges[e].iter().all(|&u| greedy[u]))
        {
            greedy[v] = false;
        }
    }
    let best: u128 = (0..n).filter(|&v| greedy[v]).map(|v| w[v]).sum();

    let mut s = MisSearch {
        w,
        edges: &h.edges,
        incident,
        state: vec![State::Free; n],
        cur: 0,
        best,
        best_set: greedy,
        nodes: 0,
        budget,
        exhausted: false,
    };
    s.search();
    let set: Vec<usize> = (0..n).filter(|&v| s.best_set[v]).collect();
    Ok(IndependentSetResult {
        weight: h.weight_of(&set),
        set,
        optimal: !s.exhausted,
        nodes: s.nodes,
    })
}

/// Minimum-weight vertex cover by exhaustive enumeration (n ≤ 24).
pub fn min_vertex_cover_brute(h: &GenericHypergraph) -> (Vec<usize>, BigRational) {
    let n = h.num_vertices();
    assert!(n <= 24, "exhaustive cover limited to 24 vertices");
    let masks: Vec<u32> = h
        .edges
        .iter()
        .map(|e| e.iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let mut best: Option<(u32, BigRational)> = None;
    for s in 0u32..(1 << n) {
        if masks.iter().all(|&m| m & s != 0) {
            let set: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
            let wt = h.weight_of(&set);
            if best.as_ref().is_none_or(|(_, b)| wt < *b) {
                best = Some((s, wt));
            }
        }
    }
    let (s, wt) = best.expect("the full vertex set is a cover");
    ((0..n).filter(|&v| s >> v & 1 == 1).collect(), wt)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TwoColoring {
    Colorable(Vec<bool>),
    Unsat { nodes: u64 },
}

impl TwoColoring {
    pub fn coloring(&self) -> Option<&[bool]> {
        match self {
            TwoColoring::Colorable(c) => Some(c),
            TwoColoring::Unsat { .. } => None,
        }
    }
}

struct ColorSearch<'a> {
    edges: &'a [Vec<usize>],
    incident: Vec<Vec<usize>>,
    color: Vec<Option<bool>>,
    nodes: u64,
}

impl ColorSearch<'_> {
    /// Assign and propagate; on conflict the trail is still returned for undo.
    fn assign(&mut self, v: usize, c: bool, trail: &mut Vec<usize>) -> bool {
        let mut queue = vec![(v, c)];
        while let Some((v, c)) = queue.pop() {
            match self.color[v] {
                Some(old) if old == c => continue,
                Some(_) => return false,
                None => {}
            }
            self.color[v] = Some(c);
            trail.push(v);
            for &e in &self.incident[v] {
                let mut free = None;
                let mut n_free = 0;
                let mut mono = true;
                for &u in &self.edges[e] {
                    match self.color[u] {
                        None => {
                            n_free += 1;
                            free = Some(u);
                        }
                        Some(cu) if cu != c => mono = false,
                        Some(_) => {}
                    }
                }
                if !mono {
                    continue;
                }
                match n_free {
                    0 => return false,
                    1 => queue.push((free.unwrap(), !c)),
                    _ => {}
                }
            }
        }
        true
    }

    fn undo(&mut self, trail: &[usize]) {
        for &v in trail {
            self.color[v] = None;
        }
    }

    fn solve(&mut self) -> bool {
        self.nodes += 1;
        let Some(v) = (0..self.color.len())
            .filter(|&v| self.color[v].is_none())
            .max_by_key(|&v| (self.incident[v].len(), std::cmp::Reverse(v)))
        else {
            return true;
        };
        for c in [false, true] {
            let mut trail = Vec::new();
            if self.assign(v, c, &mut trail) && self.solve() {
                return true;
            }
            self.undo(&trail);
        }
        false
    }
}

/// Backtracking with unit propagation on nearly-monochromatic edges.
pub fn two_colorable(h: &GenericHypergraph) -> TwoColoring {
    let n = h.num_vertices();
    let mut s = ColorSearch {
        edges: &h.edges,
        incident: incidence(n, &h.edges),
        color: vec![None; n],
        nodes: 0,
    };
    if s.solve() {
        TwoColoring::Colorable(s.color.iter().map(|c| c.unwrap_or(false)).collect())
    } else {
        TwoColoring::Unsat { nodes: s.nodes }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AlmostColoring {
    Success {
        removed: Vec<usize>,
        #[serde(serialize_with = "ser_rational")]
        removed_weight: BigRational,
        coloring: Vec<bool>,
    },
    Failure {
        tried: u128,
        /// Removal leaving the fewest surviving edges.
        best_removal: Vec<usize>,
        surviving_edges: usize,
    },
}

impl AlmostColoring {
    pub fn is_success(&self) -> bool {
        matches!(self, AlmostColoring::Success { .. })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

fn subsets_of_size(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for v in start..n {
            cur.push(v);
            if rec(v + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f)
}

/// Remove weight ≤ ε·total so that the surviving edges are 2-colorable.
/// With a candidate only that removal is checked; otherwise removals are
/// enumerated by increasing size.
pub fn almost_two_colorable(
    h: &GenericHypergraph,
    eps: &BigRational,
    candidate: Option<&[usize]>,
) -> Result<AlmostColoring, VerifyError> {
    let n = h.num_vertices();
    let budget = h.total_weight() * eps;
    let attempt = |removed: &[usize]| {
        let mut keep = vec![true; n];
        for &v in removed {
            keep[v] = false;
        }
        let sub = h.induced(&keep);
        (two_colorable(&sub), sub.edges.len())
    };
    if let Some(c) = candidate {
        if h.weight_of(c) > budget {
            return Err(VerifyError::CandidateTooHeavy);
        }
        return Ok(match attempt(c) {
            (TwoColoring::Colorable(coloring), _) => AlmostColoring::Success {
                removed: c.to_vec(),
                removed_weight: h.weight_of(c),
                coloring,
            },
            (TwoColoring::Unsat { .. }, surviving) => AlmostColoring::Failure {
                tried: 1,
                best_removal: c.to_vec(),
                surviving_edges: surviving,
            },
        });
    }
    let mut sorted: Vec<&BigRational> = h.weights.iter().collect();
    sorted.sort();
    let mut max_size = 0;
    let mut acc = BigRational::zero();
    for w in sorted {
        acc += w;
        if acc > budget {
            break;
        }
        max_size += 1;
    }
    let count: u128 = (0..=max_size)
        .map(|s| binomial(n, s))
        .fold(0u128, u128::saturating_add);
    if count > ALMOST_COLOR_CANDIDATE_CAP {
        return Err(VerifyError::TooManyCandidates(count));
    }
    let mut tried = 0u128;
    let mut best: (usize, Vec<usize>) = (usize::MAX, Vec::new());
    let mut found = None;
    for size in 0..=max_size {
        let done = subsets_of_size(n, size, &mut |rem| {
            if h.weight_of(rem) > budget {
                return false;
            }
            tried += 1;
            match attempt(rem) {
                (TwoColoring::Colorable(c), _) => {
                    found = Some((rem.to_vec(), c));
                    true
                }
                (_, surviving) => {
                    if surviving < best.0 {
                        best = (surviving, rem.to_vec());
                    }
                    false
                }
            }
        });
        if done {
            break;
        }
    }
    Ok(match found {
        Some((removed, coloring)) => AlmostColoring::Success {
            removed_weight: h.weight_of(&removed),
            removed,
            coloring,
        },
        None => AlmostColoring::Failure {
            tried,
            best_removal: best.1,
            surviving_edges: best.0,
        },
    })
}

/// All k-subsets of n vertices as edges.
pub fn complete_hypergraph(n: usize, k: usize) -> GenericHypergraph {
    let mut edges = Vec::new();
    subsets_of_size(n, k, &mut |s| {
        edges.push(s.to_vec());
        false
    });
    GenericHypergraph::new(n, k, edges).expect("complete hypergraph is valid")
}

/// Distinct sorted edges, order of first appearance.
pub fn dedup_edges(edges: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    edges
        .into_iter()
        .map(|mut e| {
            e.sort_unstable();
            e
        })
        .filter(|e| seen.insert(e.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn brute_mis(h: &GenericHypergraph) -> BigRational {
        let n = h.num_vertices();
        (0u32..1 << n)
            .filter(|s| {
                let set: Vec<bool> = (0..n).map(|v| s >> v & 1 == 1).collect();
                h.is_independent(&set)
            })
            .map(|s| h.weight_of(&(0..n).filter(|&v| s >> v & 1 == 1).collect::<Vec<_>>()))
            .max()
            .unwrap()
    }

    fn random_hypergraph(seed: u64, n: usize, m: usize, k: usize) -> GenericHypergraph {
        let mut rng = stage_rng(seed, "hg");
        let weights = (0..n)
            .map(|_| BigRational::new(rng.random_range(1..6).into(), rng.random_range(1..4).into()))
            .collect();
        let edges = (0..m)
            .map(|_| {
                let size = rng.random_range(2..=k);
                let mut e: Vec<usize> = Vec::new();
                while e.len() < size {
                    let v = rng.random_range(0..n);
                    if !e.contains(&v) {
                        e.push(v);
                    }
                }
                e
            })
            .collect();
        GenericHypergraph::weighted(weights, k, edges).unwrap()
    }

    #[test]
    fn mis_examples() {
        let h = GenericHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let r = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.weight, int(2));
        assert!(r.optimal);
        let h = GenericHypergraph::new(4, 3, vec![]).unwrap();
        assert_eq!(
            max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap().set,
            vec![0, 1, 2, 3]
        );
        let tri = GenericHypergraph::new(3, 2, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(
            max_independent_set(&tri, DEFAULT_NODE_BUDGET)
                .unwrap()
                .weight,
            int(1)
        );
    }

    #[test]
    fn budget_exhaustion_reports_best_found() {
        let h = random_hypergraph(9, 16, 30, 3);
        let r = max_independent_set(&h, 3).unwrap();
        assert!(!r.optimal);
        let mut set = vec![false; 16];
        for &v in &r.set {
            set[v] = true;
        }
        assert!(h.is_independent(&set));
    }

    #[test]
    fn coloring_examples() {
        let single = GenericHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let c = two_colorable(&single);
        assert!(single.monochromatic_edges(c.coloring().unwrap()).is_empty());
        let c5 =
            GenericHypergraph::new(5, 2, (0..5).map(|i| vec![i, (i + 1) % 5]).collect()).unwrap();
        assert!(matches!(two_colorable(&c5), TwoColoring::Unsat { .. }));
        let k5 = complete_hypergraph(5, 3);
        assert!(matches!(two_colorable(&k5), TwoColoring::Unsat { .. }));
        // Exhaustive cross-check over all 2^5 colorings.
        assert!((0u32..32).all(|s| {
            let col: Vec<bool> = (0..5).map(|v| s >> v & 1 == 1).collect();
            !k5.monochromatic_edges(&col).is_empty()
        }));
    }

    #[test]
    fn almost_coloring_examples() {
        let single = GenericHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        match almost_two_colorable(&single, &int(0), None).unwrap() {
            AlmostColoring::Success { removed, .. } => assert!(removed.is_empty()),
            f => panic!("{f:?}"),
        }
        let k5 = complete_hypergraph(5, 3);
        let fifth = BigRational::new(1.into(), 5.into());
        match almost_two_colorable(&k5, &fifth, None).unwrap() {
            AlmostColoring::Success {
                removed, coloring, ..
            } => {
                assert_eq!(removed.len(), 1);
                let keep: Vec<bool> = (0..5).map(|v| !removed.contains(&v)).collect();
                assert!(k5.induced(&keep).monochromatic_edges(&coloring).is_empty());
            }
            f => panic!("{f:?}"),
        }
        assert!(!almost_two_colorable(&k5, &int(0), None)
            .unwrap()
            .is_success());
        assert!(almost_two_colorable(&k5, &int(1), None)
            .unwrap()
            .is_success());
        assert!(almost_two_colorable(&k5, &fifth, Some(&[4]))
            .unwrap()
            .is_success());
        assert_eq!(
            almost_two_colorable(&k5, &fifth, Some(&[3, 4])),
            Err(VerifyError::CandidateTooHeavy)
        );
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(GenericHypergraph::new(3, 3, vec![vec![0, 0, 1]]).is_err());
        assert!(GenericHypergraph::new(3, 3, vec![vec![0, 5, 1]]).is_err());
        assert!(GenericHypergraph::new(4, 3, vec![vec![0, 1, 2, 3]]).is_err());
        assert!(GenericHypergraph::new(3, 3, vec![vec![0]]).is_err());
        assert!(GenericHypergraph::weighted(vec![int(0)], 2, vec![]).is_err());
    }

    #[test]
    fn formats_roundtrip() {
        let h = random_hypergraph(4, 7, 6, 3).with_meta(serde_json::json!({"r": 1}));
        assert_eq!(GenericHypergraph::from_json(&h.to_json()).unwrap(), h);
        let plain = random_hypergraph(5, 7, 6, 3);
        assert_eq!(
            GenericHypergraph::from_edge_list(&plain.to_edge_list()).unwrap(),
            plain
        );
        let err = GenericHypergraph::from_edge_list("3 2\n1 1\n0 x\n").unwrap_err();
        assert!(matches!(err, VerifyError::Parse { line: 3, .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn mis_matches_brute_force_and_duality(seed in any::<u64>(), n in 2usize..=10, m in 0usize..15) {
            let h = random_hypergraph(seed, n, m, 3.min(n));
            let r = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert!(r.optimal);
            prop_assert_eq!(&r.weight, &brute_mis(&h));
            let (_, vc) = min_vertex_cover_brute(&h);
            prop_assert_eq!(r.weight + vc, h.total_weight());
        }

        #[test]
        fn colorable_implies_half_weight_independent_set(seed in any::<u64>(), n in 3usize..=10, m in 0usize..12) {
            let h = random_hypergraph(seed, n, m, 3);
            if let TwoColoring::Colorable(c) = two_colorable(&h) {
                prop_assert!(h.monochromatic_edges(&c).is_empty());
                let cls: Vec<usize> = (0..n).filter(|&v| c[v]).collect();
                let other: Vec<usize> = (0..n).filter(|&v| !c[v]).collect();
                let heavy = h.weight_of(&cls).max(h.weight_of(&other));
                let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap().weight;
                prop_assert!(mis.clone() * int(2) >= h.total_weight());
                prop_assert!(mis >= heavy);
            } else {
                let all_bad = (0u32..1 << n).all(|s| {
                    let col: Vec<bool> = (0..n).map(|v| s >> v & 1 == 1).collect();
                    !h.monochromatic_edges(&col).is_empty()
                });
                prop_assert!(all_bad);
            }
        }
    }
}
