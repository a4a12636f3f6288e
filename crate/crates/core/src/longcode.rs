//! Weighted 3-uniform hypergraph over biased long codes {*,1,2}^{R_l} of a
//! layered PCP, with the YES partition and NO-case decoding.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::csp::{CspError, LayeredPcp, WeakDensityReport};
use crate::ternary::{decode_point, pow3, TernaryError, TernaryFamily, MAX_TERNARY_WIDTH, STAR};
use crate::verify::{dedup_edges, ser_rational, GenericHypergraph, VerifyError};

pub const MAX_TOTAL_VERTICES: usize = 10_000_000;
pub const MAX_ENUMERATE_LABELS: usize = 4;
pub const DEFAULT_SAMPLES_PER_CONSTRAINT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LongCodeError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Ternary(#[from] TernaryError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("ε must lie in [0, 1)")]
    BadEps,
    #[error("gadget has {0} vertices, over the cap")]
    SizeCap(usize),
    #[error("label size {0} exceeds the long-code width cap")]
    LabelCap(usize),
    #[error("operation needs enumerate mode")]
    NeedsEnumerate,
    #[error("indicator has {got} entries for {expected} vertices")]
    IndicatorLength { expected: usize, got: usize },
    #[error("indicator weight {weight} is below δ = {delta}")]
    BelowDelta { weight: f64, delta: f64 },
    #[error("indicator contains the edge {0:?}")]
    NotIndependent(Vec<usize>),
    #[error("no variable has μ_p(I^v) ≥ δ/2")]
    NoHeavy,
    #[error("no layer pair carries constraints between heavy variables")]
    NoLayerPair,
    #[error(
        "empty witness set at layer {layer} variable {v}: the indicator holds the edge {edge:?}"
    )]
    Contradiction {
        layer: usize,
        v: usize,
        edge: Vec<usize>,
    },
    #[error("empty collection")]
    EmptyCollection,
    #[error("set {0} has more than T elements")]
    SetTooLarge(usize),
    #[error("found {} pairwise disjoint sets, more than D", .0.len())]
    TooManyDisjoint(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeMode {
    Enumerate,
    Membership,
}

#[derive(Clone, Debug)]
pub struct LongCodeGadget {
    pcp: LayeredPcp,
    eps: BigRational,
    p: f64,
    offsets: Vec<usize>,
    weights: Vec<BigRational>,
    mode: EdgeMode,
    /// Per constraint, edges as sorted vertex lists (2 vertices when y = z).
    edges: Vec<Vec<Vec<usize>>>,
}

fn check_edge_rule(proj: &[u32], x: &[u8], y: &[u8], z: &[u8]) -> bool {
    proj.iter().enumerate().all(|(j, &i)| {
        let t = x[i as usize];
        !(t != STAR && t == y[j] && t == z[j])
    })
}

impl LongCodeGadget {
    pub fn build(pcp: &LayeredPcp, eps: &BigRational) -> Result<Self, LongCodeError> {
        if *eps < BigRational::zero() || *eps >= BigRational::one() {
            return Err(LongCodeError::BadEps);
        }
        let p_rat = BigRational::one() - eps;
        let half_p = &p_rat / BigRational::from_integer(2.into());
        let l_count = BigRational::from_integer(pcp.num_layers().into());
        let mut offsets = Vec::with_capacity(pcp.num_layers() + 1);
        let mut total = 0usize;
        for layer in pcp.layers() {
            if layer.label_size > MAX_TERNARY_WIDTH {
                return Err(LongCodeError::LabelCap(layer.label_size));
            }
            offsets.push(total);
            total = layer
                .num_vars
                .checked_mul(pow3(layer.label_size))
                .and_then(|s| s.checked_add(total))
                .filter(|&s| s <= MAX_TOTAL_VERTICES)
                .ok_or(LongCodeError::SizeCap(usize::MAX))?;
        }
        offsets.push(total);
        let mut weights = Vec::with_capacity(total);
        for layer in pcp.layers() {
            let scale =
                BigRational::one() / (&l_count * BigRational::from_integer(layer.num_vars.into()));
            let table: Vec<BigRational> = (0..pow3(layer.label_size))
                .map(|i| {
                    decode_point(i, layer.label_size)
                        .iter()
                        .fold(scale.clone(), |acc, &d| {
                            acc * if d == STAR {
                                eps.clone()
                            } else {
                                half_p.clone()
                            }
                        })
                })
                .collect();
            for _ in 0..layer.num_vars {
                weights.extend(table.iter().cloned());
            }
        }
        let mode = if pcp
            .layers()
            .iter()
            .all(|l| l.label_size <= MAX_ENUMERATE_LABELS)
        {
            EdgeMode::Enumerate
        } else {
            EdgeMode::Membership
        };
        let mut g = Self {
            pcp: pcp.clone(),
            p: p_rat.to_f64().unwrap_or(1.0),
            eps: eps.clone(),
            offsets,
            weights,
            mode,
            edges: Vec::new(),
        };
        if mode == EdgeMode::Enumerate {
            g.edges = (0..pcp.constraints().len())
                .map(|c| g.enumerate_constraint(c))
                .collect();
        }
        Ok(g)
    }

    fn enumerate_constraint(&self, c: usize) -> Vec<Vec<usize>> {
        let con = &self.pcp.constraints()[c];
        let (rl, rl2) = (
            self.label_size(con.layer),
            self.label_size(con.target_layer),
        );
        let xs: Vec<Vec<u8>> = (0..pow3(rl2)).map(|i| decode_point(i, rl2)).collect();
        let ys: Vec<Vec<u8>> = (0..pow3(rl)).map(|i| decode_point(i, rl)).collect();
        let mut out = Vec::new();
        for (xi, x) in xs.iter().enumerate() {
            for (yi, y) in ys.iter().enumerate() {
                for (zi, z) in ys.iter().enumerate().skip(yi) {
                    if check_edge_rule(&con.proj, x, y, z) {
                        let mut e = vec![
                            self.vertex(con.target_layer, con.u, xi),
                            self.vertex(con.layer, con.v, yi),
                        ];
                        if zi != yi {
                            e.push(self.vertex(con.layer, con.v, zi));
                        }
                        e.sort_unstable();
                        out.push(e);
                    }
                }
            }
        }
        out
    }

    pub fn pcp(&self) -> &LayeredPcp {
        &self.pcp
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    pub fn num_vertices(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn label_size(&self, layer: usize) -> usize {
        self.pcp.layers()[layer].label_size
    }

    pub fn vertex(&self, layer: usize, var: usize, point: usize) -> usize {
        self.offsets[layer] + var * pow3(self.label_size(layer)) + point
    }

    /// (layer, variable, point index) of a vertex id.
    pub fn vertex_position(&self, id: usize) -> (usize, usize, usize) {
        let layer = self.offsets.partition_point(|&o| o <= id) - 1;
        let size = pow3(self.label_size(layer));
        let rel = id - self.offsets[layer];
        (layer, rel / size, rel % size)
    }

    /// Enumerated edges of constraint `c` (empty in membership mode).
    pub fn constraint_edges(&self, c: usize) -> &[Vec<usize>] {
        self.edges.get(c).map_or(&[], |e| e.as_slice())
    }

    /// Membership test for the tuple (x ∈ H^u, y, z ∈ H^v) of constraint `c`.
    pub fn is_edge(&self, c: usize, x: &[u8], y: &[u8], z: &[u8]) -> bool {
        check_edge_rule(&self.pcp.constraints()[c].proj, x, y, z)
    }

    pub fn layer_weight(&self, layer: usize) -> BigRational {
        self.weights[self.offsets[layer]..self.offsets[layer + 1]]
            .iter()
            .fold(BigRational::zero(), |a, w| a + w)
    }

    pub fn to_hypergraph(&self) -> Result<GenericHypergraph, LongCodeError> {
        if self.mode != EdgeMode::Enumerate {
            return Err(LongCodeError::NeedsEnumerate);
        }
        let edges = dedup_edges(self.edges.iter().flatten().cloned().collect());
        let meta = serde_json::json!({
            "gadget": "longcode",
            "eps": self.eps.to_string(),
            "layers": self.pcp.layers(),
        });
        Ok(GenericHypergraph::weighted(self.weights.clone(), 3, edges)?.with_meta(meta))
    }

    fn check_indicator(&self, indicator: &[bool]) -> Result<(), LongCodeError> {
        if indicator.len() != self.num_vertices() {
            return Err(LongCodeError::IndicatorLength {
                expected: self.num_vertices(),
                got: indicator.len(),
            });
        }
        Ok(())
    }

    /// The restriction I^v of an indicator to the long code of one variable.
    pub fn restriction(
        &self,
        indicator: &[bool],
        layer: usize,
        var: usize,
    ) -> Result<TernaryFamily, LongCodeError> {
        let m = self.label_size(layer);
        let start = self.vertex(layer, var, 0);
        Ok(TernaryFamily::new(
            m,
            indicator[start..start + pow3(m)].to_vec(),
        )?)
    }

    /// Per-variable monotone closure of an indicator.
    pub fn monotone_closure(&self, indicator: &[bool]) -> Result<Vec<bool>, LongCodeError> {
        self.check_indicator(indicator)?;
        let mut out = indicator.to_vec();
        for (l, layer) in self.pcp.layers().iter().enumerate() {
            for v in 0..layer.num_vars {
                let fam = self.restriction(indicator, l, v)?.monotone_closure();
                let start = self.vertex(l, v, 0);
                out[start..start + fam.members().len()].copy_from_slice(fam.members());
            }
        }
        Ok(out)
    }

    /// First enumerated edge lying inside the indicator.
    pub fn edge_inside(&self, indicator: &[bool]) -> Option<&[usize]> {
        self.edges
            .iter()
            .flatten()
            .find(|e| e.iter().all(|&v| indicator[v]))
            .map(|e| e.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCertificate {
    pub exhaustive: bool,
    pub checked_edges: usize,
    /// Fraction of (x, y, z) tuples examined, per constraint on average.
    pub coverage: f64,
    pub violations: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YesPartition {
    /// Per vertex: 0 for H_*, 1 for H_1, 2 for H_2.
    pub class: Vec<u8>,
    #[serde(serialize_with = "ser_rational")]
    pub weight_1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub weight_2: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub weight_star: BigRational,
    pub certificate: PartitionCertificate,
}

const MAX_REPORTED_VIOLATIONS: usize = 16;

/// Put x ∈ H^v into H_{x_{σ(v)}} and check no edge lies inside H_1 or H_2.
pub fn yes_partition(
    g: &LongCodeGadget,
    sigma: &[Vec<u32>],
    samples_per_constraint: usize,
    rng: &mut impl Rng,
) -> Result<YesPartition, LongCodeError> {
    g.pcp.check_satisfies(sigma)?;
    let mut class = vec![0u8; g.num_vertices()];
    let mut w = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for (l, layer) in g.pcp.layers().iter().enumerate() {
        let m = layer.label_size;
        for v in 0..layer.num_vars {
            let j = sigma[l][v] as usize;
            for i in 0..pow3(m) {
                let c = ((i / pow3(j)) % 3) as u8;
                let id = g.vertex(l, v, i);
                class[id] = c;
                w[c as usize] += &g.weights[id];
            }
        }
    }
    let mono = |e: &[usize]| class[e[0]] != 0 && e.iter().all(|&v| class[v] == class[e[0]]);
    let mut cert = PartitionCertificate {
        exhaustive: g.mode == EdgeMode::Enumerate,
        checked_edges: 0,
        coverage: 0.0,
        violations: Vec::new(),
    };
    match g.mode {
        EdgeMode::Enumerate => {
            for e in g.edges.iter().flatten() {
                cert.checked_edges += 1;
                if mono(e) && cert.violations.len() < MAX_REPORTED_VIOLATIONS {
                    cert.violations.push(e.clone());
                }
            }
            cert.coverage = 1.0;
        }
        EdgeMode::Membership => {
            let mut coverage = 0.0;
            for (ci, con) in g.pcp.constraints().iter().enumerate() {
                let (rl, rl2) = (g.label_size(con.layer), g.label_size(con.target_layer));
                for _ in 0..samples_per_constraint {
                    let xi = rng.random_range(0..pow3(rl2));
                    let yi = rng.random_range(0..pow3(rl));
                    let zi = rng.random_range(0..pow3(rl));
                    let (x, y, z) = (
                        decode_point(xi, rl2),
                        decode_point(yi, rl),
                        decode_point(zi, rl),
                    );
                    if g.is_edge(ci, &x, &y, &z) {
                        cert.checked_edges += 1;
                        let mut e = vec![
                            g.vertex(con.target_layer, con.u, xi),
                            g.vertex(con.layer, con.v, yi),
                            g.vertex(con.layer, con.v, zi),
                        ];
                        e.sort_unstable();
                        e.dedup();
                        if mono(&e) && cert.violations.len() < MAX_REPORTED_VIOLATIONS {
                            cert.violations.push(e);
                        }
                    }
                }
                let tuples = (pow3(rl2) * pow3(rl) * pow3(rl)) as f64;
                coverage += (samples_per_constraint as f64 / tuples).min(1.0);
            }
            cert.coverage = coverage / g.pcp.constraints().len().max(1) as f64;
        }
    }
    let [w_star, w1, w2] = w;
    Ok(YesPartition {
        class,
        weight_1: w1,
        weight_2: w2,
        weight_star: w_star,
        certificate: cert,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariableWitness {
    pub layer: usize,
    pub v: usize,
    pub s: Vec<usize>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
    pub p_prime: f64,
    pub draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub layer: usize,
    pub target_layer: usize,
    pub density: WeakDensityReport,
    /// Heavy variables per layer.
    pub heavy: Vec<Vec<usize>>,
    pub witnesses: Vec<VariableWitness>,
    /// Variables of `layer` left unlabeled because S^v was empty and no
    /// neighbor long code meets the indicator.
    pub skipped: Vec<usize>,
    pub rho: Vec<Option<u32>>,
    pub lambda: Vec<Option<u32>>,
    /// Over all constraints of the pair; unlabeled endpoints count as unsatisfied.
    pub satisfied_fraction: f64,
    /// Over constraints between heavy variables only.
    pub satisfied_fraction_heavy: f64,
}

/// λ(u): the label hit by the most projected neighbor labels, ties to the
/// smallest label.
pub fn plurality_label(projected: &[u32]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &a in projected {
        *counts.entry(a).or_default() += 1;
    }
    counts
        .into_iter()
        .fold(None::<(u32, usize)>, |best, (a, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((a, c)),
        })
        .map(|b| b.0)
}

/// Decode an independent indicator of weight ≥ δ into a labeling of the
/// densest heavy layer pair.
pub fn decode(
    g: &LongCodeGadget,
    indicator: &[bool],
    delta: f64,
    rng: &mut impl Rng,
) -> Result<DecodeOutcome, LongCodeError> {
    g.check_indicator(indicator)?;
    let weight: f64 = indicator
        .iter()
        .zip(&g.weights)
        .filter(|(&b, _)| b)
        .map(|(_, w)| w.to_f64().unwrap_or(0.0))
        .sum();
    if weight < delta {
        return Err(LongCodeError::BelowDelta { weight, delta });
    }
    if let Some(e) = g.edge_inside(indicator) {
        return Err(LongCodeError::NotIndependent(e.to_vec()));
    }
    let ind = g.monotone_closure(indicator)?;
    let layers = g.pcp.layers();
    let mut heavy = vec![Vec::new(); layers.len()];
    let mut families: BTreeMap<(usize, usize), TernaryFamily> = BTreeMap::new();
    for (l, layer) in layers.iter().enumerate() {
        for v in 0..layer.num_vars {
            let fam = g.restriction(&ind, l, v)?;
            if fam.measure(g.p) >= delta / 2.0 {
                heavy[l].push(v);
                families.insert((l, v), fam);
            }
        }
    }
    if heavy.iter().all(Vec::is_empty) {
        return Err(LongCodeError::NoHeavy);
    }
    let sets: Vec<(usize, Vec<usize>)> = heavy
        .iter()
        .enumerate()
        .filter(|(l, h)| {
            !h.is_empty() && h.len() as f64 >= delta / 4.0 * layers[*l].num_vars as f64
        })
        .map(|(l, h)| (l, h.clone()))
        .collect();
    let density = g.pcp.check_weak_density(&sets, delta / 4.0)?;
    let best = density
        .best
        .clone()
        .filter(|b| b.induced > 0)
        .ok_or(LongCodeError::NoLayerPair)?;
    let (l, l2) = (best.layer_a, best.layer_b);

    let mut heavy_mask = [
        vec![false; layers[l].num_vars],
        vec![false; layers[l2].num_vars],
    ];
    heavy[l].iter().for_each(|&v| heavy_mask[0][v] = true);
    heavy[l2].iter().for_each(|&u| heavy_mask[1][u] = true);
    let ids = g.pcp.constraints_between(l, l2);

    let mut witnesses = Vec::new();
    let mut skipped = Vec::new();
    let mut rho = vec![None; layers[l].num_vars];
    for &v in &heavy[l] {
        let fam = &families[&(l, v)];
        let rep = fam.two_element_witness(g.p, delta / 2.0, rng)?;
        if rep.pair.s.is_empty() {
            // (x, y, z) is an edge for every x of a neighbor long code.
            let y = crate::ternary::encode_point(&rep.pair.f);
            let z = crate::ternary::encode_point(&rep.pair.f_prime);
            let hit = ids
                .iter()
                .map(|&i| &g.pcp.constraints()[i])
                .filter(|c| c.v == v)
                .find_map(|c| {
                    (0..pow3(g.label_size(l2)))
                        .map(|xi| g.vertex(l2, c.u, xi))
                        .find(|&x| ind[x])
                });
            if let Some(x) = hit {
                let mut edge = vec![x, g.vertex(l, v, y), g.vertex(l, v, z)];
                edge.sort_unstable();
                edge.dedup();
                return Err(LongCodeError::Contradiction { layer: l, v, edge });
            }
            skipped.push(v);
            continue;
        }
        rho[v] = Some(rep.pair.s[rng.random_range(0..rep.pair.s.len())] as u32);
        witnesses.push(VariableWitness {
            layer: l,
            v,
            s: rep.pair.s,
            y: rep.pair.f,
            z: rep.pair.f_prime,
            p_prime: rep.p_prime,
            draws: rep.draws,
        });
    }

    let mut projected: Vec<Vec<u32>> = vec![Vec::new(); layers[l2].num_vars];
    for &i in ids {
        let c = &g.pcp.constraints()[i];
        if heavy_mask[1][c.u] {
            if let Some(a) = rho[c.v] {
                projected[c.u].push(c.proj[a as usize]);
            }
        }
    }
    let lambda: Vec<Option<u32>> = projected
        .iter()
        .enumerate()
        .map(|(u, p)| {
            if heavy_mask[1][u] {
                plurality_label(p)
            } else {
                None
            }
        })
        .collect();

    let (mut sat, mut sat_heavy, mut n_heavy) = (0usize, 0usize, 0usize);
    for &i in ids {
        let c = &g.pcp.constraints()[i];
        let ok = matches!((rho[c.v], lambda[c.u]), (Some(a), Some(b)) if c.proj[a as usize] == b);
        sat += ok as usize;
        if heavy_mask[0][c.v] && heavy_mask[1][c.u] {
            n_heavy += 1;
            sat_heavy += ok as usize;
        }
    }
    Ok(DecodeOutcome {
        layer: l,
        target_layer: l2,
        density,
        heavy,
        witnesses,
        skipped,
        rho,
        lambda,
        satisfied_fraction: sat as f64 / ids.len() as f64,
        satisfied_fraction_heavy: if n_heavy == 0 {
            0.0
        } else {
            sat_heavy as f64 / n_heavy as f64
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommonElement {
    pub element: u32,
    pub coverage: usize,
    /// N / (T·D).
    pub bound: f64,
}

fn max_disjoint(sets: &[Vec<u32>]) -> Vec<usize> {
    fn rec(
        i: usize,
        sets: &[Vec<u32>],
        used: &mut Vec<u32>,
        cur: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        if cur.len() + (sets.len() - i) <= best.len() {
            return;
        }
        if i == sets.len() {
            *best = cur.clone();
            return;
        }
        if sets[i].iter().all(|a| !used.contains(a)) {
            let before = used.len();
            used.extend(&sets[i]);
            cur.push(i);
            rec(i + 1, sets, used, cur, best);
            cur.pop();
            used.truncate(before);
        }
        rec(i + 1, sets, used, cur, best);
    }
    let mut best = Vec::new();
    rec(0, sets, &mut Vec::new(), &mut Vec::new(), &mut best);
    best
}

/// An element lying in at least N/(T·D) of the sets, given sets of size ≤ T
/// with no more than D pairwise disjoint among them.
pub fn common_element(
    sets: &[Vec<u32>],
    t: usize,
    d: usize,
) -> Result<CommonElement, LongCodeError> {
    if sets.is_empty() {
        return Err(LongCodeError::EmptyCollection);
    }
    if let Some(i) = sets.iter().position(|s| s.len() > t) {
        return Err(LongCodeError::SetTooLarge(i));
    }
    let disjoint = max_disjoint(sets);
    if disjoint.len() > d {
        return Err(LongCodeError::TooManyDisjoint(disjoint));
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for s in sets {
        let mut s = s.clone();
        s.sort_unstable();
        s.dedup();
        for a in s {
            *counts.entry(a).or_default() += 1;
        }
    }
    let (element, coverage) =
        counts.into_iter().fold(
            (0, 0),
            |best, (a, c)| if c > best.1 { (a, c) } else { best },
        );
    Ok(CommonElement {
        element,
        coverage,
        bound: sets.len() as f64 / (t * d) as f64,
    })
}
