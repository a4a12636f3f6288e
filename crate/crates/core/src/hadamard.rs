//! Hypergraph over folded Hadamard codes of equation blocks, its YES-case
//! coloring and the Fourier extraction of prover strategies.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::csp::{
    block_geometry, sample_partner, sample_round, BlockGeometry, CspError, EquationBlock,
    Lin3Instance, VariableBlock, DEFAULT_REJECTION_BUDGET,
};
use crate::gf2::{dot_bits, fourier_transform, unfold, FourierSpectrum, Gf2Error, Gf2Subspace};
use crate::verify::{GenericHypergraph, VerifyError};

pub const MAX_ENUMERATE_R: usize = 2;
pub const DEFAULT_BLOCK_BUDGET: usize = 4096;
const TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HadamardError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("r = {0} exceeds the enumerate-mode cap {MAX_ENUMERATE_R}")]
    RCap(usize),
    #[error("{0} distinct blocks exceed the block budget")]
    Budget(usize),
    #[error("triple {0} does not exist")]
    NoTriple(usize),
    #[error("indicator has {got} entries for {expected} vertices")]
    IndicatorLength { expected: usize, got: usize },
    #[error("assignment has {got} entries for {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("operation needs enumerate mode")]
    NeedsEnumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Enumerate,
    Stream,
}

/// One verifier choice (U, W, W′) sharing the variable block U.
#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    pub u: VariableBlock,
    pub w: usize,
    pub w2: usize,
    pub geo_w: BlockGeometry,
    pub geo_w2: BlockGeometry,
}

#[derive(Clone, Debug)]
pub struct HadamardGadget {
    source: Lin3Instance,
    r: usize,
    mode: Mode,
    blocks: Vec<EquationBlock>,
    subspaces: Vec<Gf2Subspace>,
    triples: Vec<Triple>,
    edges: Vec<[usize; 4]>,
    dropped: usize,
}

/// Raw (x, y, z) choice of one triple and the four folded positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawEdge {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub vertices: [usize; 4],
}

impl HadamardGadget {
    /// Instantiate `triples` verifier rounds by seeded sampling.
    pub fn build(
        inst: &Lin3Instance,
        r: usize,
        triples: usize,
        mode: Mode,
        block_budget: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, HadamardError> {
        let mut rounds = Vec::with_capacity(triples);
        for _ in 0..triples {
            let (w, u) = sample_round(inst, r, rng)?;
            let w2 = sample_partner(inst, &u, rng, DEFAULT_REJECTION_BUDGET)?;
            rounds.push((u, w, w2));
        }
        Self::from_rounds(inst, r, rounds, mode, block_budget)
    }

    pub fn from_rounds(
        inst: &Lin3Instance,
        r: usize,
        rounds: Vec<(VariableBlock, EquationBlock, EquationBlock)>,
        mode: Mode,
        block_budget: usize,
    ) -> Result<Self, HadamardError> {
        if mode == Mode::Enumerate && r > MAX_ENUMERATE_R {
            return Err(HadamardError::RCap(r));
        }
        let mut g = Self {
            source: inst.clone(),
            r,
            mode,
            blocks: Vec::new(),
            subspaces: Vec::new(),
            triples: Vec::new(),
            edges: Vec::new(),
            dropped: 0,
        };
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for (u, w, w2) in rounds {
            let geo_w = block_geometry(&w, &u, inst)?;
            let geo_w2 = block_geometry(&w2, &u, inst)?;
            let mut id = |b: EquationBlock, geo: &BlockGeometry| {
                *index.entry(b.eq_ids.clone()).or_insert_with(|| {
                    g.blocks.push(b);
                    g.subspaces.push(geo.subspace.clone());
                    g.blocks.len() - 1
                })
            };
            let (iw, iw2) = (id(w, &geo_w), id(w2, &geo_w2));
            if g.blocks.len() > block_budget {
                return Err(HadamardError::Budget(g.blocks.len()));
            }
            g.triples.push(Triple {
                u,
                w: iw,
                w2: iw2,
                geo_w,
                geo_w2,
            });
        }
        if mode == Mode::Enumerate {
            let mut set = BTreeSet::new();
            let mut dropped = 0;
            for t in 0..g.triples.len() {
                for e in g.triple_edges(t)? {
                    if distinct4(&e.vertices) {
                        let mut v = e.vertices;
                        v.sort_unstable();
                        set.insert(v);
                    } else {
                        dropped += 1;
                    }
                }
            }
            g.edges = set.into_iter().collect();
            g.dropped = dropped;
        }
        Ok(g)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn source(&self) -> &Lin3Instance {
        &self.source
    }

    pub fn blocks(&self) -> &[EquationBlock] {
        &self.blocks
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Deduplicated edges (enumerate mode only; empty in stream mode).
    pub fn edges(&self) -> &[[usize; 4]] {
        &self.edges
    }

    /// Raw choices whose folded positions were not 4 distinct vertices.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn vertices_per_block(&self) -> usize {
        1 << (2 * self.r + 1)
    }

    pub fn num_vertices(&self) -> usize {
        self.blocks.len() * self.vertices_per_block()
    }

    pub fn vertex(&self, block: usize, x: u32) -> usize {
        block * self.vertices_per_block() + self.subspaces[block].coset_index(x)
    }

    /// (block, canonical coset representative) of a vertex id.
    pub fn vertex_position(&self, v: usize) -> (usize, u32) {
        let b = v / self.vertices_per_block();
        (
            b,
            self.subspaces[b].coset_rep(v % self.vertices_per_block()),
        )
    }

    /// All raw (x, y, z ≠ 0) choices of one triple, generated on demand.
    pub fn triple_edges(
        &self,
        t: usize,
    ) -> Result<impl Iterator<Item = RawEdge> + '_, HadamardError> {
        let tr = self.triples.get(t).ok_or(HadamardError::NoTriple(t))?;
        let side = 1u32 << (3 * self.r + 1);
        let zs = 1u32 << self.r;
        let h_w = tr.geo_w.h_w.bits();
        Ok((0..side).flat_map(move |x| {
            (0..side).flat_map(move |y| {
                (1..zs).map(move |z| {
                    let pz = tr.geo_w.pi_inv(z);
                    let pz2 = tr.geo_w2.pi_inv(z);
                    RawEdge {
                        x,
                        y,
                        z,
                        vertices: [
                            self.vertex(tr.w, x),
                            self.vertex(tr.w, x ^ pz ^ h_w),
                            self.vertex(tr.w2, y),
                            self.vertex(tr.w2, y ^ pz2),
                        ],
                    }
                })
            })
        }))
    }

    pub fn to_hypergraph(&self) -> Result<GenericHypergraph, HadamardError> {
        if self.mode != Mode::Enumerate {
            return Err(HadamardError::NeedsEnumerate);
        }
        let meta = serde_json::json!({
            "gadget": "hadamard",
            "r": self.r,
            "vertices_per_block": self.vertices_per_block(),
            "blocks": self.blocks.iter().map(|b| &b.eq_ids).collect::<Vec<_>>(),
            "triples": self.triples.iter().map(|t| serde_json::json!({
                "u": t.u.var_ids, "w": t.w, "w2": t.w2,
            })).collect::<Vec<_>>(),
            "dropped": self.dropped,
        });
        Ok(GenericHypergraph::new(
            self.num_vertices(),
            4,
            self.edges.iter().map(|e| e.to_vec()).collect(),
        )?
        .with_meta(meta))
    }

    /// Folded indicator of one block, in dense coset order.
    pub fn block_values(&self, indicator: &[bool], block: usize) -> Vec<f64> {
        let n = self.vertices_per_block();
        indicator[block * n..(block + 1) * n]
            .iter()
            .map(|&b| b as u8 as f64)
            .collect()
    }

    /// Spectrum of the unfolded code C[W] of a block.
    pub fn block_spectrum(
        &self,
        indicator: &[bool],
        block: usize,
    ) -> Result<FourierSpectrum, HadamardError> {
        let table = unfold(&self.block_values(indicator, block), &self.subspaces[block])?;
        Ok(fourier_transform(&table))
    }

    fn check_indicator(&self, indicator: &[bool]) -> Result<(), HadamardError> {
        if indicator.len() != self.num_vertices() {
            return Err(HadamardError::IndicatorLength {
                expected: self.num_vertices(),
                got: indicator.len(),
            });
        }
        Ok(())
    }
}

fn distinct4(v: &[usize; 4]) -> bool {
    (0..4).all(|i| (i + 1..4).all(|j| v[i] != v[j]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YesCertificate {
    pub good_blocks: Vec<usize>,
    pub removed: Vec<usize>,
    pub checked_edges: usize,
    pub parity_ones: usize,
    pub first_violation: Option<[usize; 4]>,
}

impl YesCertificate {
    pub fn all_bichromatic(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Color good blocks by the Hadamard code of (σ(W), 1); vertices of other
/// blocks are removed. Every surviving edge is checked for four-term
/// parity 1.
pub fn yes_coloring(
    g: &HadamardGadget,
    sigma: &[u8],
) -> Result<(Vec<bool>, YesCertificate), HadamardError> {
    if sigma.len() != g.source.n() {
        return Err(HadamardError::AssignmentLength {
            expected: g.source.n(),
            got: sigma.len(),
        });
    }
    let n = g.vertices_per_block();
    let mut coloring = vec![false; g.num_vertices()];
    let mut good_blocks = Vec::new();
    let mut removed = Vec::new();
    for (b, block) in g.blocks.iter().enumerate() {
        if block.is_satisfied_by(&g.source, sigma) {
            good_blocks.push(b);
            let a = sigma_vector(&block.restrict(sigma), g.r);
            for (i, rep) in g.subspaces[b].coset_reps().into_iter().enumerate() {
                coloring[b * n + i] = dot_bits(a, rep) == 1;
            }
        } else {
            removed.extend(b * n..(b + 1) * n);
        }
    }
    let mut keep = vec![true; g.num_vertices()];
    for &v in &removed {
        keep[v] = false;
    }
    let mut cert = YesCertificate {
        good_blocks,
        removed,
        checked_edges: 0,
        parity_ones: 0,
        first_violation: None,
    };
    let mut check = |e: [usize; 4]| {
        if e.iter().all(|&v| keep[v]) {
            cert.checked_edges += 1;
            if e.iter().filter(|&&v| coloring[v]).count() % 2 == 1 {
                cert.parity_ones += 1;
            } else if cert.first_violation.is_none() {
                cert.first_violation = Some(e);
            }
        }
    };
    match g.mode {
        Mode::Enumerate => g.edges.iter().for_each(|&e| check(e)),
        Mode::Stream => {
            for t in 0..g.triples.len() {
                g.triple_edges(t)?
                    .filter(|e| distinct4(&e.vertices))
                    .for_each(|e| check(e.vertices));
            }
        }
    }
    Ok((coloring, cert))
}

fn sigma_vector(restricted: &[u8], r: usize) -> u32 {
    restricted
        .iter()
        .enumerate()
        .fold(1u32 << (3 * r), |acc, (i, &b)| {
            acc | (((b & 1) as u32) << i)
        })
}

/// A distribution over F₂^{3r+1} renormalized within its admissible support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProverStrategy {
    pub support: Vec<(u32, f64)>,
    /// Σ of squared coefficients over the admissible support, before
    /// renormalization.
    pub admissible_mass: f64,
    /// Σ over all coefficients minus the admissible mass.
    pub deficit: f64,
}

impl ProverStrategy {
    fn from_masses(masses: Vec<(u32, f64)>, energy: f64) -> Option<Self> {
        let total: f64 = masses.iter().map(|m| m.1).sum();
        if total <= TOL {
            return None;
        }
        Some(Self {
            support: masses.into_iter().map(|(a, m)| (a, m / total)).collect(),
            admissible_mass: total,
            deficit: energy - total,
        })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        let mut t: f64 = rng.random();
        for &(a, p) in &self.support {
            if t < p {
                return a;
            }
            t -= p;
        }
        self.support.last().expect("nonempty support").0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub triple: usize,
    /// Σ Â_α² B̂_β² over α ⊥ H_W, β ⊥ H_{W′}, π_W(α) = π_{W′}(β), α·h_W = 1.
    pub lhs: f64,
    /// Â_∅² B̂_∅² − 2^{−r}.
    pub rhs: f64,
    pub holds: bool,
    pub independent_on_triple: bool,
    /// Acceptance probability of the renormalized strategies on this triple.
    pub acceptance: Option<f64>,
    pub prover2: Option<ProverStrategy>,
    pub prover1: Option<ProverStrategy>,
}

/// Prover strategies read off the spectra of the two blocks of a triple.
pub fn extract_strategies(
    g: &HadamardGadget,
    indicator: &[bool],
    triple: usize,
) -> Result<SoundnessReport, HadamardError> {
    g.check_indicator(indicator)?;
    let tr = g
        .triples
        .get(triple)
        .ok_or(HadamardError::NoTriple(triple))?;
    let a = g.block_spectrum(indicator, tr.w)?;
    let b = g.block_spectrum(indicator, tr.w2)?;
    let (sw, sw2) = (&g.subspaces[tr.w], &g.subspaces[tr.w2]);
    let h_w = tr.geo_w.h_w.bits();

    let alphas: Vec<(u32, f64)> = (0..a.coeffs().len() as u32)
        .filter(|&al| sw.is_orthogonal(al) && dot_bits(al, h_w) == 1)
        .map(|al| (al, a.coeff(al).powi(2)))
        .filter(|x| x.1 > 0.0)
        .collect();
    let betas: Vec<(u32, f64)> = (0..b.coeffs().len() as u32)
        .filter(|&be| sw2.is_orthogonal(be))
        .map(|be| (be, b.coeff(be).powi(2)))
        .filter(|x| x.1 > 0.0)
        .collect();

    let mut by_proj: BTreeMap<u32, f64> = BTreeMap::new();
    for &(be, m) in &betas {
        *by_proj.entry(tr.geo_w2.pi(be)).or_default() += m;
    }
    let lhs: f64 = alphas
        .iter()
        .map(|&(al, m)| m * by_proj.get(&tr.geo_w.pi(al)).copied().unwrap_or(0.0))
        .sum();
    let rhs = a.coeff(0).powi(2) * b.coeff(0).powi(2) - (-(g.r as f64)).exp2();

    let independent_on_triple = g
        .triple_edges(triple)?
        .filter(|e| distinct4(&e.vertices))
        .all(|e| !e.vertices.iter().all(|&v| indicator[v]));

    let prover2 = ProverStrategy::from_masses(alphas, a.energy());
    let prover1 = ProverStrategy::from_masses(betas, b.energy());
    let acceptance = match (&prover2, &prover1) {
        (Some(p2), Some(p1)) => Some(
            p2.support
                .iter()
                .map(|&(al, pa)| {
                    let pi = tr.geo_w.pi(al);
                    pa * p1
                        .support
                        .iter()
                        .filter(|&&(be, _)| tr.geo_w2.pi(be) == pi)
                        .map(|x| x.1)
                        .sum::<f64>()
                })
                .sum(),
        ),
        _ => None,
    };
    Ok(SoundnessReport {
        triple,
        lhs,
        rhs,
        holds: lhs >= rhs - TOL,
        independent_on_triple,
        acceptance,
        prover2,
        prover1,
    })
}

/// First 3r coordinates of α as an assignment to W's variables.
pub fn alpha_assignment(alpha: u32, r: usize) -> Vec<u8> {
    (0..3 * r).map(|i| ((alpha >> i) & 1) as u8).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZAverageReport {
    /// E_z over all of F₂^r of A(x)A(x+π⁻¹z+h_W)B(y)B(y+π′⁻¹z).
    pub direct_mean: f64,
    /// The same mean via the Fourier expansion restricted to
    /// π_W(α′) = π_{W′}(β′).
    pub fourier_matched: f64,
    /// 2^{−r} times the product at z = 0.
    pub scaled_zero: f64,
}

/// Evaluate the z-average of the four-fold product at fixed x, y both
/// directly and through the spectra.
pub fn z_average_check(
    a: &FourierSpectrum,
    b: &FourierSpectrum,
    geo_w: &BlockGeometry,
    geo_w2: &BlockGeometry,
    x: u32,
    y: u32,
) -> ZAverageReport {
    let r = geo_w.r;
    let h_w = geo_w.h_w.bits();
    let eval = |s: &FourierSpectrum, p: u32| -> f64 {
        s.coeffs()
            .iter()
            .enumerate()
            .map(|(al, c)| c * crate::gf2::character(al as u32, p))
            .sum()
    };
    let prod = |z: u32| {
        eval(a, x) * eval(a, x ^ geo_w.pi_inv(z) ^ h_w) * eval(b, y) * eval(b, y ^ geo_w2.pi_inv(z))
    };
    let zs = 1u32 << r;
    let direct_mean = (0..zs).map(prod).sum::<f64>() / zs as f64;
    // Σ_α Â_α χ_{α+α′}(x) = χ_{α′}(x)A(x), likewise for β.
    let mut matched = 0.0;
    for (a2, ca) in a.coeffs().iter().enumerate() {
        let a2 = a2 as u32;
        if *ca == 0.0 {
            continue;
        }
        for (b2, cb) in b.coeffs().iter().enumerate() {
            let b2 = b2 as u32;
            if geo_w.pi(a2) == geo_w2.pi(b2) {
                matched +=
                    ca * cb * crate::gf2::character(a2, x ^ h_w) * crate::gf2::character(b2, y);
            }
        }
    }
    ZAverageReport {
        direct_mean,
        fourier_matched: matched * eval(a, x) * eval(b, y),
        scaled_zero: prod(0) / zs as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Equation;
    use crate::seed::stage_rng;
    use crate::verify::{max_independent_set, DEFAULT_NODE_BUDGET};
    use rand::Rng;

    fn planted(seed: u64, n: usize, m: usize) -> Lin3Instance {
        Lin3Instance::random(n, m, true, &mut stage_rng(seed, "inst")).unwrap()
    }

    fn gadget(seed: u64, r: usize, triples: usize) -> HadamardGadget {
        let inst = planted(seed, 12, 12);
        HadamardGadget::build(
            &inst,
            r,
            triples,
            Mode::Enumerate,
            DEFAULT_BLOCK_BUDGET,
            &mut stage_rng(seed, "g"),
        )
        .unwrap()
    }

    #[test]
    fn structure_counts() {
        let g = gadget(1, 1, 2);
        assert_eq!(g.vertices_per_block(), 8);
        assert_eq!(g.triple_edges(0).unwrap().count(), 256);
        for t in 0..2 {
            for e in g.triple_edges(t).unwrap() {
                assert!(distinct4(&e.vertices) || g.triples[t].w == g.triples[t].w2);
            }
        }
        assert!(g.edges().iter().all(distinct4));
        let h = g.to_hypergraph().unwrap();
        assert!(h.is_uniform());
        assert_eq!(h.num_vertices(), g.num_vertices());
    }

    fn two_block_gadget() -> HadamardGadget {
        let inst = Lin3Instance::new(
            6,
            vec![
                Equation {
                    vars: [0, 1, 2],
                    rhs: 1,
                },
                Equation {
                    vars: [2, 3, 4],
                    rhs: 0,
                },
            ],
            None,
        )
        .unwrap();
        let u = VariableBlock { var_ids: vec![2] };
        HadamardGadget::from_rounds(
            &inst,
            1,
            vec![(
                u,
                inst.block(vec![0]).unwrap(),
                inst.block(vec![1]).unwrap(),
            )],
            Mode::Enumerate,
            DEFAULT_BLOCK_BUDGET,
        )
        .unwrap()
    }

    #[test]
    fn distinct_blocks_never_drop() {
        let g = two_block_gadget();
        assert_eq!(g.dropped(), 0);
        assert_eq!(g.num_vertices(), 16);
    }

    #[test]
    fn yes_case_planted() {
        let g = gadget(2, 1, 3);
        let sigma = g.source().planted().unwrap().to_vec();
        let (_, cert) = yes_coloring(&g, &sigma).unwrap();
        assert!(cert.removed.is_empty());
        assert_eq!(cert.checked_edges, g.edges().len());
        assert_eq!(cert.parity_ones, cert.checked_edges);
        assert!(cert.all_bichromatic());

        let stream = HadamardGadget::build(
            g.source(),
            1,
            3,
            Mode::Stream,
            DEFAULT_BLOCK_BUDGET,
            &mut stage_rng(2, "g"),
        )
        .unwrap();
        let (_, cs) = yes_coloring(&stream, &sigma).unwrap();
        assert!(cs.all_bichromatic() && cs.checked_edges >= cert.checked_edges);
    }

    #[test]
    fn violated_block_is_removed() {
        let g = gadget(3, 1, 2);
        let mut sigma = g.source().planted().unwrap().to_vec();
        let w = &g.blocks()[g.triples()[0].w];
        sigma[w.var_order[0]] ^= 1;
        let (_, cert) = yes_coloring(&g, &sigma).unwrap();
        let n = g.vertices_per_block();
        let b = g.triples()[0].w;
        assert!((b * n..(b + 1) * n).all(|v| cert.removed.contains(&v)));
        assert!(cert.all_bichromatic());
    }

    #[test]
    fn block_codes_are_folded() {
        let g = gadget(4, 1, 2);
        let mut rng = stage_rng(4, "ind");
        let ind: Vec<bool> = (0..g.num_vertices())
            .map(|_| rng.random_bool(0.5))
            .collect();
        for b in 0..g.blocks().len() {
            let s = g.block_spectrum(&ind, b).unwrap();
            for (al, c) in s.coeffs().iter().enumerate() {
                if c.abs() > 1e-12 {
                    assert!(g.subspaces[b].is_orthogonal(al as u32));
                }
            }
        }
    }

    #[test]
    fn strategies_on_edge_cases() {
        let g = gadget(5, 1, 1);
        let empty = vec![false; g.num_vertices()];
        let rep = extract_strategies(&g, &empty, 0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.holds && rep.independent_on_triple && rep.prover2.is_none());

        let full = vec![true; g.num_vertices()];
        let rep = extract_strategies(&g, &full, 0).unwrap();
        assert!(!rep.independent_on_triple);
        assert!((rep.rhs - (1.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn maximum_independent_set_satisfies_soundness_inequality() {
        for seed in 0..4 {
            let g = gadget(10 + seed, 1, 1);
            let h = g.to_hypergraph().unwrap();
            let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
            assert!(mis.optimal);
            let mut ind = vec![false; g.num_vertices()];
            for &v in &mis.set {
                ind[v] = true;
            }
            let rep = extract_strategies(&g, &ind, 0).unwrap();
            assert!(rep.independent_on_triple);
            assert!(rep.holds, "{rep:?}");
            // Every Prover-2 answer satisfies W.
            let w = &g.blocks()[g.triples()[0].w];
            for &(al, _) in rep.prover2.iter().flat_map(|p| &p.support) {
                let mut sigma = vec![0u8; g.source().n()];
                for (i, &v) in w.var_order.iter().enumerate() {
                    sigma[v] = alpha_assignment(al, 1)[i];
                }
                assert!(w.is_satisfied_by(g.source(), &sigma));
            }
        }
    }

    #[test]
    fn independent_indicator_zeroes_every_edge_product() {
        let g = gadget(6, 1, 1);
        let h = g.to_hypergraph().unwrap();
        let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
        let mut ind = vec![false; g.num_vertices()];
        mis.set.iter().for_each(|&v| ind[v] = true);
        for e in g.triple_edges(0).unwrap() {
            assert_eq!(e.vertices.iter().map(|&v| ind[v] as u8).product::<u8>(), 0);
        }
    }

    #[test]
    fn z_average_matches_fourier_restriction() {
        let g = two_block_gadget();
        let tr = &g.triples()[0];
        let mut rng = stage_rng(7, "z");
        for _ in 0..20 {
            let folded = |s: &Gf2Subspace, rng: &mut rand_chacha::ChaCha8Rng| {
                let vals: Vec<f64> = (0..s.num_cosets()).map(|_| rng.random::<f64>()).collect();
                fourier_transform(&unfold(&vals, s).unwrap())
            };
            let a = folded(&g.subspaces[tr.w], &mut rng);
            let b = folded(&g.subspaces[tr.w2], &mut rng);
            let (x, y) = (rng.random_range(0..16), rng.random_range(0..16));
            let rep = z_average_check(&a, &b, &tr.geo_w, &tr.geo_w2, x, y);
            assert!(
                (rep.direct_mean - rep.fourier_matched).abs() < 1e-10,
                "{rep:?}"
            );
        }
        // For an independent set the z ≠ 0 terms vanish.
        let h = g.to_hypergraph().unwrap();
        let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
        let mut ind = vec![false; g.num_vertices()];
        mis.set.iter().for_each(|&v| ind[v] = true);
        let a = g.block_spectrum(&ind, tr.w).unwrap();
        let b = g.block_spectrum(&ind, tr.w2).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                let rep = z_average_check(&a, &b, &tr.geo_w, &tr.geo_w2, x, y);
                assert!((rep.direct_mean - rep.scaled_zero).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn enumerate_cap_and_budget() {
        let inst = planted(8, 12, 12);
        let mut rng = stage_rng(8, "cap");
        assert_eq!(
            HadamardGadget::build(&inst, 3, 1, Mode::Enumerate, DEFAULT_BLOCK_BUDGET, &mut rng)
                .unwrap_err(),
            HadamardError::RCap(3)
        );
        assert!(matches!(
            HadamardGadget::build(&inst, 1, 5, Mode::Stream, 1, &mut rng),
            Err(HadamardError::Budget(_))
        ));
    }
}
