//! The correlated distribution D_{δ,r}, the 3-uniform hypergraph over ±1
//! long codes of a d-to-1 layered PCP, its YES coloring, the shattered
//! decomposition and influence decoding.
//!
//! A point of {−1,1}^n is a bitmask with bit i standing for (−1)^{b_i}.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{AnalysisError, FiniteJointDist, ProductFn};
use crate::csp::{CspError, LayeredPcp, WeakDensityReport};
use crate::gf2::fwht_in_place;
use crate::verify::{dedup_edges, GenericHypergraph, VerifyError};

pub const MAX_TABLE_R: usize = 10;
pub const MAX_SAMPLE_R: usize = 63;
pub const MAX_LONG_CODE_BITS: usize = 20;
pub const MAX_TOTAL_VERTICES: usize = 10_000_000;
/// Per-constraint enumeration needs |R_{l′}|·(1+2r) at most this many bits.
pub const MAX_ENUMERATE_BITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Dto1Error {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("δ = {0} must lie in [0, 1]")]
    BadDelta(f64),
    #[error("r = {r} is outside 1..={cap}")]
    BadR { r: usize, cap: usize },
    #[error("gadget size over the cap")]
    SizeCap,
    #[error("label size {0} exceeds the long-code width cap")]
    LabelCap(usize),
    #[error("constraint {0} does not have equal preimage sizes")]
    NotRegular(usize),
    #[error("operation needs enumerate mode")]
    NeedsEnumerate,
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("indicator value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("no heavy variables")]
    NoHeavy,
    #[error("no layer pair carries constraints between heavy variables")]
    NoLayerPair,
    #[error("no matching influential coordinates: every heavy influence is below τ")]
    NoInfluential,
    #[error("parameter {0} = {1} is out of range")]
    BadParam(&'static str, f64),
}

fn check_delta(delta: f64) -> Result<(), Dto1Error> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Dto1Error::BadDelta(delta))
    }
}

/// D_{δ,r} as a full atom table. Atom index bit 0 is X, bits 1..=r are Y
/// and bits r+1..=2r are Z.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DDeltaR {
    pub delta: f64,
    pub r: usize,
    pub probs: Vec<f64>,
}

/// Mass of a no-resample atom (Z = −Y).
pub fn plain_atom_mass(delta: f64, r: usize) -> f64 {
    (1.0 - delta) / (1u64 << (r + 1)) as f64
}

/// ξ = δ/(r·2^r), the mass of a resampled atom.
pub fn xi(delta: f64, r: usize) -> f64 {
    delta / (r as f64 * (1u64 << r) as f64)
}

/// Split an atom index into (X, Y, Z) bits.
pub fn split_atom(atom: usize, r: usize) -> (u8, u64, u64) {
    let mask = (1u64 << r) - 1;
    let a = atom as u64;
    ((a & 1) as u8, (a >> 1) & mask, (a >> (r + 1)) & mask)
}

pub fn join_atom(x: u8, y: u64, z: u64, r: usize) -> usize {
    (x as usize) | (y as usize) << 1 | (z as usize) << (r + 1)
}

/// Mass of (x, y, z) under D_{δ,r}, from the two-branch definition.
pub fn atom_mass(delta: f64, r: usize, x: u8, y: u64, z: u64) -> f64 {
    let mask = (1u64 << r) - 1;
    let equal = !(y ^ z) & mask;
    if equal == 0 {
        return plain_atom_mass(delta, r);
    }
    let neg_x = if x == 0 { mask } else { 0 };
    if equal.count_ones() == 1 && (y & equal) == (neg_x & equal) {
        xi(delta, r)
    } else {
        0.0
    }
}

impl DDeltaR {
    pub fn new(delta: f64, r: usize) -> Result<Self, Dto1Error> {
        check_delta(delta)?;
        if r == 0 || r > MAX_TABLE_R {
            return Err(Dto1Error::BadR {
                r,
                cap: MAX_TABLE_R,
            });
        }
        let probs = (0..1usize << (1 + 2 * r))
            .map(|a| {
                let (x, y, z) = split_atom(a, r);
                atom_mass(delta, r, x, y, z)
            })
            .collect();
        Ok(Self { delta, r, probs })
    }

    pub fn min_atom(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_positive_atom(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.probs.len()).filter(|&a| self.probs[a] > 0.0)
    }

    /// The table as a three-factor joint distribution (X, Y, Z).
    pub fn joint(&self) -> Result<FiniteJointDist, Dto1Error> {
        let side = 1usize << self.r;
        Ok(FiniteJointDist::new(
            vec![2, side, side],
            self.probs.clone(),
        )?)
    }

    /// Joint law of one (Y, Z) block, indexed y + 2^r·z.
    pub fn yz_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << (2 * self.r)];
        for (a, &p) in self.probs.iter().enumerate() {
            out[a >> 1] += p;
        }
        out
    }

    /// CSV with header `atom,probability`; the atom is written X|Y|Z with
    /// Y and Z as bit strings, coordinate 0 first.
    pub fn to_csv(&self) -> String {
        let bits = |v: u64| {
            (0..self.r)
                .map(|j| if v >> j & 1 == 1 { '1' } else { '0' })
                .collect::<String>()
        };
        let mut out = String::from("atom,probability\n");
        for (a, p) in self.probs.iter().enumerate() {
            let (x, y, z) = split_atom(a, self.r);
            out.push_str(&format!("{x}|{}|{},{p}\n", bits(y), bits(z)));
        }
        out
    }
}

/// One draw (X, Y, Z) from D_{δ,r} by the two-branch procedure.
pub fn sample_ddr(delta: f64, r: usize, rng: &mut impl Rng) -> Result<(u8, u64, u64), Dto1Error> {
    check_delta(delta)?;
    if r == 0 || r > MAX_SAMPLE_R {
        return Err(Dto1Error::BadR {
            r,
            cap: MAX_SAMPLE_R,
        });
    }
    let mask = (1u64 << r) - 1;
    let x = rng.random_range(0..2u8);
    let mut y = rng.random::<u64>() & mask;
    let mut z = !y & mask;
    if rng.random_bool(delta) {
        let j = rng.random_range(0..r);
        let neg_x = (x ^ 1) as u64;
        y = (y & !(1 << j)) | neg_x << j;
        z = (z & !(1 << j)) | neg_x << j;
    }
    Ok((x, y, z))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationCheck {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl CorrelationCheck {
    fn new(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            holds: value <= bound + 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub delta: f64,
    pub r: usize,
    pub xi: f64,
    pub min_atom: f64,
    pub plain_atom: f64,
    /// δ ≤ r/(r+2), where the minimum atom is the resampled one.
    pub regime: bool,
    pub min_atom_is_xi: bool,
    /// Minimum atom ≥ ξ.
    pub part_i: bool,
    /// ρ(Ω¹, Ω²×Ω³) against δ.
    pub part_ii: CorrelationCheck,
    /// ρ(Ω¹×Ω², Ω³) against 1 − ξ²/2.
    pub part_iii: CorrelationCheck,
    /// ρ(Ω², Ω³) against 1 − ξ²/2.
    pub part_iv: CorrelationCheck,
    /// ρ(Ω¹, Ω², Ω³) against 1 − ξ²/2.
    pub part_v: CorrelationCheck,
    pub marginals_identical: bool,
}

/// Atom and correlation facts of D_{δ,r}, computed from the full table.
pub fn correlation_suite(delta: f64, r: usize) -> Result<CorrelationReport, Dto1Error> {
    let d = DDeltaR::new(delta, r)?;
    let joint = d.joint()?;
    let x = xi(delta, r);
    let min_atom = d.min_positive_atom();
    let loose = 1.0 - x * x / 2.0;
    let my = joint.marginal(&[1]);
    let mz = joint.marginal(&[2]);
    Ok(CorrelationReport {
        delta,
        r,
        xi: x,
        min_atom,
        plain_atom: plain_atom_mass(delta, r),
        regime: 2.0 * delta <= r as f64 * (1.0 - delta),
        min_atom_is_xi: min_atom == x,
        part_i: min_atom >= x,
        part_ii: CorrelationCheck::new(joint.maximal_correlation(&[0], &[1, 2])?, delta),
        part_iii: CorrelationCheck::new(joint.maximal_correlation(&[0, 1], &[2])?, loose),
        part_iv: CorrelationCheck::new(joint.maximal_correlation(&[1], &[2])?, loose),
        part_v: CorrelationCheck::new(
            joint.multi_correlation(&[vec![0], vec![1], vec![2]])?,
            loose,
        ),
        marginals_identical: my.iter().zip(&mz).all(|(a, b)| (a - b).abs() <= 1e-15),
    })
}

/// First (atom, j) of positive mass with X = Y_j = Z_j, if any.
pub fn support_safety_violation(dist: &DDeltaR) -> Option<(usize, usize)> {
    dist.support().find_map(|a| {
        let (x, y, z) = split_atom(a, dist.r);
        (0..dist.r)
            .find(|&j| (y >> j & 1) as u8 == x && (z >> j & 1) as u8 == x)
            .map(|j| (a, j))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeMode {
    Enumerate,
    Membership,
}

#[derive(Clone, Debug)]
pub struct Dto1Gadget {
    pcp: LayeredPcp,
    delta: f64,
    offsets: Vec<usize>,
    /// Per constraint, the preimages π^{−1}(i) in increasing order.
    preimages: Vec<Vec<Vec<usize>>>,
    tables: BTreeMap<usize, DDeltaR>,
    mode: EdgeMode,
    edges: Vec<Vec<Vec<usize>>>,
}

/// π^{−1}(i) for each target label, requiring equal sizes.
pub fn preimages(proj: &[u32], target_size: usize) -> Option<Vec<Vec<usize>>> {
    let mut pre = vec![Vec::new(); target_size];
    for (j, &i) in proj.iter().enumerate() {
        pre.get_mut(i as usize)?.push(j);
    }
    let r = pre.first()?.len();
    (r > 0 && pre.iter().all(|p| p.len() == r)).then_some(pre)
}

fn scatter(local: u64, coords: &[usize]) -> u64 {
    coords
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &j)| acc | (local >> k & 1) << j)
}

fn gather(point: u64, coords: &[usize]) -> u64 {
    coords
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &j)| acc | (point >> j & 1) << k)
}

impl Dto1Gadget {
    pub fn build(pcp: &LayeredPcp, delta: f64) -> Result<Self, Dto1Error> {
        check_delta(delta)?;
        let mut offsets = Vec::with_capacity(pcp.num_layers() + 1);
        let mut total = 0usize;
        for layer in pcp.layers() {
            if layer.label_size > MAX_LONG_CODE_BITS {
                return Err(Dto1Error::LabelCap(layer.label_size));
            }
            offsets.push(total);
            total = (layer.num_vars << layer.label_size)
                .checked_add(total)
                .filter(|&t| t <= MAX_TOTAL_VERTICES)
                .ok_or(Dto1Error::SizeCap)?;
        }
        offsets.push(total);
        let mut pre_all = Vec::with_capacity(pcp.constraints().len());
        let mut tables = BTreeMap::new();
        let mut enumerate = true;
        for (ci, c) in pcp.constraints().iter().enumerate() {
            let target = pcp.layers()[c.target_layer].label_size;
            let pre = preimages(&c.proj, target).ok_or(Dto1Error::NotRegular(ci))?;
            let r = pre[0].len();
            if r > MAX_TABLE_R {
                return Err(Dto1Error::BadR {
                    r,
                    cap: MAX_TABLE_R,
                });
            }
            if let std::collections::btree_map::Entry::Vacant(e) = tables.entry(r) {
                e.insert(DDeltaR::new(delta, r)?);
            }
            enumerate &= target * (1 + 2 * r) <= MAX_ENUMERATE_BITS;
            pre_all.push(pre);
        }
        let mut g = Self {
            pcp: pcp.clone(),
            delta,
            offsets,
            preimages: pre_all,
            tables,
            mode: if enumerate {
                EdgeMode::Enumerate
            } else {
                EdgeMode::Membership
            },
            edges: Vec::new(),
        };
        if enumerate {
            g.edges = (0..pcp.constraints().len())
                .map(|c| g.enumerate_constraint(c))
                .collect();
        }
        Ok(g)
    }

    fn enumerate_constraint(&self, c: usize) -> Vec<Vec<usize>> {
        let con = &self.pcp.constraints()[c];
        let pre = &self.preimages[c];
        let dist = &self.tables[&pre[0].len()];
        let r = dist.r;
        let atoms: Vec<(u8, u64, u64)> = dist.support().map(|a| split_atom(a, r)).collect();
        let mut digits = vec![0usize; pre.len()];
        let mut out = Vec::new();
        loop {
            let (mut x, mut y, mut z) = (0u64, 0u64, 0u64);
            for (i, &d) in digits.iter().enumerate() {
                let (ax, ay, az) = atoms[d];
                x |= (ax as u64) << i;
                y |= scatter(ay, &pre[i]);
                z |= scatter(az, &pre[i]);
            }
            if y <= z {
                let mut e = vec![
                    self.vertex(con.target_layer, con.u, x as usize),
                    self.vertex(con.layer, con.v, y as usize),
                ];
                if z != y {
                    e.push(self.vertex(con.layer, con.v, z as usize));
                }
                e.sort_unstable();
                out.push(e);
            }
            let Some(pos) = digits.iter().position(|&d| d + 1 < atoms.len()) else {
                break;
            };
            digits[pos] += 1;
            digits[..pos].iter_mut().for_each(|d| *d = 0);
        }
        out
    }

    pub fn pcp(&self) -> &LayeredPcp {
        &self.pcp
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    pub fn num_vertices(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn label_size(&self, layer: usize) -> usize {
        self.pcp.layers()[layer].label_size
    }

    pub fn vertex(&self, layer: usize, var: usize, point: usize) -> usize {
        self.offsets[layer] + (var << self.label_size(layer)) + point
    }

    pub fn vertex_position(&self, id: usize) -> (usize, usize, usize) {
        let layer = self.offsets.partition_point(|&o| o <= id) - 1;
        let m = self.label_size(layer);
        let rel = id - self.offsets[layer];
        (layer, rel >> m, rel & ((1 << m) - 1))
    }

    /// Preimage size r of constraint `c`.
    pub fn r(&self, c: usize) -> usize {
        self.preimages[c][0].len()
    }

    pub fn preimages_of(&self, c: usize) -> &[Vec<usize>] {
        &self.preimages[c]
    }

    pub fn constraint_edges(&self, c: usize) -> &[Vec<usize>] {
        self.edges.get(c).map_or(&[], |e| e.as_slice())
    }

    /// Weight 2^{−R_l}/(L|V_l|) of a vertex.
    pub fn weight(&self, id: usize) -> BigRational {
        let (l, _, _) = self.vertex_position(id);
        let denom = num_bigint::BigInt::from(self.pcp.num_layers())
            * num_bigint::BigInt::from(self.pcp.layers()[l].num_vars)
            * (num_bigint::BigInt::one() << self.label_size(l));
        BigRational::new(1.into(), denom)
    }

    /// Whether (x, y, z) lies in the support of D^{vu} for constraint `c`.
    pub fn is_edge(&self, c: usize, x: u64, y: u64, z: u64) -> bool {
        let pre = &self.preimages[c];
        let dist = &self.tables[&pre[0].len()];
        pre.iter().enumerate().all(|(i, coords)| {
            let a = join_atom(
                (x >> i & 1) as u8,
                gather(y, coords),
                gather(z, coords),
                dist.r,
            );
            dist.probs[a] > 0.0
        })
    }

    /// One draw (x, y, z) from D^{vu}.
    pub fn sample_edge(&self, c: usize, rng: &mut impl Rng) -> (u64, u64, u64) {
        let pre = &self.preimages[c];
        let (mut x, mut y, mut z) = (0, 0, 0);
        for (i, coords) in pre.iter().enumerate() {
            let (ax, ay, az) =
                sample_ddr(self.delta, coords.len(), rng).expect("r validated at build");
            x |= (ax as u64) << i;
            y |= scatter(ay, coords);
            z |= scatter(az, coords);
        }
        (x, y, z)
    }

    pub fn to_hypergraph(&self) -> Result<GenericHypergraph, Dto1Error> {
        if self.mode != EdgeMode::Enumerate {
            return Err(Dto1Error::NeedsEnumerate);
        }
        let weights = (0..self.num_vertices()).map(|v| self.weight(v)).collect();
        let edges = dedup_edges(self.edges.iter().flatten().cloned().collect());
        let meta = serde_json::json!({
            "gadget": "dto1",
            "delta": self.delta,
            "layers": self.pcp.layers(),
        });
        Ok(GenericHypergraph::weighted(weights, 3, edges)?.with_meta(meta))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dto1YesCertificate {
    pub exhaustive: bool,
    pub checked_edges: usize,
    pub violations: Vec<Vec<usize>>,
    /// Color of every vertex under x ↦ x_{σ(v)}.
    pub coloring: Vec<bool>,
}

impl Dto1YesCertificate {
    pub fn proper(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Color x ∈ H^v by its σ(v) coordinate and check every enumerated (or
/// sampled) edge is bichromatic.
pub fn yes_check(
    g: &Dto1Gadget,
    sigma: &[Vec<u32>],
    samples_per_constraint: usize,
    rng: &mut impl Rng,
) -> Result<Dto1YesCertificate, Dto1Error> {
    g.pcp.check_satisfies(sigma)?;
    let coloring: Vec<bool> = (0..g.num_vertices())
        .map(|id| {
            let (l, v, p) = g.vertex_position(id);
            p >> sigma[l][v] & 1 == 1
        })
        .collect();
    let mono = |e: &[usize]| e.iter().all(|&v| coloring[v] == coloring[e[0]]);
    let mut cert = Dto1YesCertificate {
        exhaustive: g.mode == EdgeMode::Enumerate,
        checked_edges: 0,
        violations: Vec::new(),
        coloring: Vec::new(),
    };
    if g.mode == EdgeMode::Enumerate {
        for e in g.edges.iter().flatten() {
            cert.checked_edges += 1;
            if mono(e) {
                cert.violations.push(e.clone());
            }
        }
    } else {
        for (c, con) in g.pcp.constraints().iter().enumerate() {
            for _ in 0..samples_per_constraint {
                let (x, y, z) = g.sample_edge(c, rng);
                let mut e = vec![
                    g.vertex(con.target_layer, con.u, x as usize),
                    g.vertex(con.layer, con.v, y as usize),
                    g.vertex(con.layer, con.v, z as usize),
                ];
                e.sort_unstable();
                e.dedup();
                cert.checked_edges += 1;
                if mono(&e) {
                    cert.violations.push(e);
                }
            }
        }
    }
    cert.coloring = coloring;
    Ok(cert)
}

/// Fourier spectrum of a table over {−1,1}^n, indexed by subset mask.
pub fn spectrum(values: &[f64]) -> Result<Vec<f64>, Dto1Error> {
    if !values.len().is_power_of_two() {
        return Err(Dto1Error::Length {
            what: "table",
            expected: values.len().next_power_of_two(),
            got: values.len(),
        });
    }
    let mut c = values.to_vec();
    fwht_in_place(&mut c);
    let scale = 1.0 / c.len() as f64;
    c.iter_mut().for_each(|x| *x *= scale);
    Ok(c)
}

fn image_size(alpha: impl Into<u64>, proj: &[u32]) -> usize {
    let alpha: u64 = alpha.into();
    let mut seen: Vec<u32> = (0..proj.len())
        .filter(|&j| alpha >> j & 1 == 1)
        .map(|j| proj[j])
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShatterDecomp {
    pub s: usize,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    pub norm1: f64,
    pub norm2: f64,
    pub norm3: f64,
}

fn l2(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Split a spectrum into |α| ≥ s, small and not shattered, and small and
/// shattered parts under π.
pub fn shattered_decomposition(
    coeffs: &[f64],
    proj: &[u32],
    s: usize,
) -> Result<ShatterDecomp, Dto1Error> {
    if coeffs.len() != 1 << proj.len() {
        return Err(Dto1Error::Length {
            what: "spectrum",
            expected: 1 << proj.len(),
            got: coeffs.len(),
        });
    }
    let mut parts = [
        vec![0.0; coeffs.len()],
        vec![0.0; coeffs.len()],
        vec![0.0; coeffs.len()],
    ];
    for (alpha, &c) in coeffs.iter().enumerate() {
        let size = alpha.count_ones() as usize;
        let k = if size >= s {
            0
        } else if image_size(alpha as u64, proj) != size {
            1
        } else {
            2
        };
        parts[k][alpha] = c;
    }
    let [f1, f2, f3] = parts;
    Ok(ShatterDecomp {
        s,
        norm1: l2(&f1),
        norm2: l2(&f2),
        norm3: l2(&f3),
        f1,
        f2,
        f3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShatterProfile {
    pub norms: Vec<f64>,
    pub mean: f64,
    /// s/√T.
    pub bound: f64,
    pub holds: bool,
}

/// ‖f_2‖₂ of f_v over every constraint from v into `target_layer`, for a
/// sparse spectrum given as (subset mask, coefficient) pairs.
pub fn shatter_profile(
    pcp: &LayeredPcp,
    layer: usize,
    v: usize,
    target_layer: usize,
    coeffs: &[(u64, f64)],
    s: usize,
    t: usize,
) -> Result<ShatterProfile, Dto1Error> {
    let n = pcp.layers()[layer].label_size;
    if let Some(&(a, _)) = coeffs.iter().find(|(a, _)| n < 64 && a >> n != 0) {
        return Err(Dto1Error::Length {
            what: "spectrum support",
            expected: n,
            got: 64 - a.leading_zeros() as usize,
        });
    }
    let mut norms = Vec::new();
    for &c in pcp.constraints_between(layer, target_layer) {
        let con = &pcp.constraints()[c];
        if con.v == v {
            let energy: f64 = coeffs
                .iter()
                .filter(|(a, _)| {
                    (a.count_ones() as usize) < s
                        && image_size(*a, &con.proj) != a.count_ones() as usize
                })
                .map(|(_, c)| c * c)
                .sum();
            norms.push(energy.sqrt());
        }
    }
    let mean = norms.iter().sum::<f64>() / norms.len().max(1) as f64;
    let bound = s as f64 / (t as f64).sqrt();
    Ok(ShatterProfile {
        holds: mean <= bound + 1e-12,
        norms,
        mean,
        bound,
    })
}

/// E[f(y) f(z)] for (y, z) drawn from D^{vu}: Σ_α f̂_α² ∏_i c(|α ∩ π^{−1}(i)|)
/// with c(k) = (−1)^k (1 − ηk) and η = 2δ/r.
pub fn yz_correlation(coeffs: &[f64], pre: &[Vec<usize>], delta: f64) -> f64 {
    let r = pre[0].len();
    let eta = 2.0 * delta / r as f64;
    let masks: Vec<usize> = pre
        .iter()
        .map(|p| p.iter().fold(0, |m, &j| m | 1 << j))
        .collect();
    coeffs
        .iter()
        .enumerate()
        .map(|(alpha, &c)| {
            let factor: f64 = masks
                .iter()
                .map(|&m| {
                    let k = (alpha & m).count_ones() as i32;
                    (-1f64).powi(k) * (1.0 - eta * k as f64)
                })
                .product();
            c * c * factor
        })
        .sum()
}

/// E[f(y) T_ρ f(−y)] on the uniform cube.
pub fn antipodal_noise_correlation(coeffs: &[f64], rho: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(a, &c)| c * c * (-rho).powi(a.count_ones() as i32))
        .sum()
}

/// Inf_j(T_{1−γ} f) on the uniform cube.
pub fn noisy_influences(coeffs: &[f64], n: usize, gamma: f64) -> Vec<f64> {
    let keep = (1.0 - gamma) * (1.0 - gamma);
    (0..n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .filter(|(a, _)| a >> j & 1 == 1)
                .map(|(a, &c)| c * c * keep.powi(a.count_ones() as i32))
                .sum()
        })
        .collect()
}

/// Inf_j(T̄_{1−γ} f) where T̄ resamples whole blocks π^{−1}(i).
pub fn block_noisy_influences(coeffs: &[f64], proj: &[u32], gamma: f64) -> Vec<f64> {
    let keep = (1.0 - gamma) * (1.0 - gamma);
    (0..proj.len())
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .filter(|(a, _)| a >> j & 1 == 1)
                .map(|(a, &c)| c * c * keep.powi(image_size(a as u64, proj) as i32))
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionGaps {
    pub f2_norm: f64,
    pub eta: f64,
    /// |E[f(y)T_{1−η}f(−y)] − E[f₃(y)T_{1−η}f₃(−y)]|.
    pub cube_gap: f64,
    /// |E[f(y)f(z)] − E[f₃(y)f₃(z)]| under D^{vu}.
    pub block_gap: f64,
    /// 2‖f₂‖₂ + 2ν.
    pub bound: f64,
    pub cube_holds: bool,
    pub block_holds: bool,
}

/// Both decomposition-gap inequalities for one constraint.
pub fn decomposition_gaps(
    coeffs: &[f64],
    proj: &[u32],
    target_size: usize,
    delta: f64,
    s: usize,
    nu: f64,
) -> Result<DecompositionGaps, Dto1Error> {
    let pre = preimages(proj, target_size).ok_or(Dto1Error::NotRegular(0))?;
    let eta = 2.0 * delta / pre[0].len() as f64;
    let d = shattered_decomposition(coeffs, proj, s)?;
    let cube_gap = (antipodal_noise_correlation(coeffs, 1.0 - eta)
        - antipodal_noise_correlation(&d.f3, 1.0 - eta))
    .abs();
    let block_gap =
        (yz_correlation(coeffs, &pre, delta) - yz_correlation(&d.f3, &pre, delta)).abs();
    let bound = 2.0 * d.norm2 + 2.0 * nu;
    Ok(DecompositionGaps {
        f2_norm: d.norm2,
        eta,
        cube_holds: cube_gap <= bound + 1e-12,
        block_holds: block_gap <= bound + 1e-12,
        cube_gap,
        block_gap,
        bound,
    })
}

/// γ = νξ²/(2 ln(1/ν)), taking the unspecified absolute constant as 1.
pub fn suggested_gamma(nu: f64, xi: f64) -> f64 {
    nu * xi * xi / (2.0 * (1.0 / nu).ln())
}

/// s = max((r/ξ) ln(1/ν), (r/2γ) ln(32r²/τ)).
pub fn suggested_s(r: usize, xi: f64, nu: f64, gamma: f64, tau: f64) -> f64 {
    let r = r as f64;
    (r / xi * (1.0 / nu).ln()).max(r / (2.0 * gamma) * (32.0 * r * r / tau).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeParams {
    pub delta: f64,
    pub eps: f64,
    pub nu: f64,
    pub gamma: f64,
    pub tau: f64,
    pub s: usize,
    pub t: usize,
}

impl DecodeParams {
    fn validate(&self) -> Result<(), Dto1Error> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Dto1Error::BadParam(name, v))
            }
        };
        unit("delta", self.delta)?;
        unit("eps", self.eps)?;
        unit("nu", self.nu)?;
        unit("gamma", self.gamma)?;
        unit("tau", self.tau)?;
        if self.t == 0 {
            return Err(Dto1Error::BadParam("T", 0.0));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDiagnostics {
    pub constraint: usize,
    pub v: usize,
    pub u: usize,
    pub f2_norm: f64,
    pub good: bool,
    /// E[f_v(y) f_v(z)] under D^{vu}.
    pub yz_expectation: f64,
    /// max_j |Inf_j(T̄_{1−γ}f_v) − Inf_j(T_{1−γ}f_v)|.
    pub influence_gap: f64,
    pub gap_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dto1DecodeOutcome {
    pub params: DecodeParams,
    pub layer: usize,
    pub target_layer: usize,
    pub r: usize,
    pub eta: f64,
    pub density: WeakDensityReport,
    pub heavy: Vec<Vec<usize>>,
    /// (ε/2)^{4/η}.
    pub yz_floor: f64,
    /// 2(s²/T)^{1/4} + τ/(16r²).
    pub gap_bound: f64,
    /// (s²/T)^{1/4}.
    pub good_threshold: f64,
    pub suggested_gamma: f64,
    pub suggested_s: f64,
    pub pairs: Vec<PairDiagnostics>,
    pub labels_v: Vec<Option<u32>>,
    pub labels_u: Vec<Option<u32>>,
    /// Over all constraints of the pair; unlabeled endpoints count as unsatisfied.
    pub satisfied_fraction: f64,
    /// Over constraints between heavy variables with u a good neighbor.
    pub satisfied_fraction_good: f64,
}

fn sample_proportional(weights: &[f64], rng: &mut impl Rng) -> Option<u32> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut t = rng.random_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if t < w {
            return Some(i as u32);
        }
        t -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).map(|i| i as u32)
}

/// Influence decoding of per-variable indicators f_v: {−1,1}^{R_l} → [0,1].
pub fn decode(
    pcp: &LayeredPcp,
    indicators: &[Vec<Vec<f64>>],
    params: &DecodeParams,
    rng: &mut impl Rng,
) -> Result<Dto1DecodeOutcome, Dto1Error> {
    params.validate()?;
    let layers = pcp.layers();
    if indicators.len() != layers.len() {
        return Err(Dto1Error::Length {
            what: "indicator layers",
            expected: layers.len(),
            got: indicators.len(),
        });
    }
    let mut heavy = vec![Vec::new(); layers.len()];
    for (l, (layer, fs)) in layers.iter().zip(indicators).enumerate() {
        if fs.len() != layer.num_vars {
            return Err(Dto1Error::Length {
                what: "indicator variables",
                expected: layer.num_vars,
                got: fs.len(),
            });
        }
        for (v, f) in fs.iter().enumerate() {
            if f.len() != 1 << layer.label_size {
                return Err(Dto1Error::Length {
                    what: "indicator table",
                    expected: 1 << layer.label_size,
                    got: f.len(),
                });
            }
            if let Some(&bad) = f.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Dto1Error::OutOfRange(bad));
            }
            if f.iter().sum::<f64>() / f.len() as f64 >= params.eps / 2.0 {
                heavy[l].push(v);
            }
        }
    }
    if heavy.iter().all(Vec::is_empty) {
        return Err(Dto1Error::NoHeavy);
    }
    let sets: Vec<(usize, Vec<usize>)> = heavy
        .iter()
        .enumerate()
        .filter(|(l, h)| {
            !h.is_empty() && h.len() as f64 >= params.eps / 4.0 * layers[*l].num_vars as f64
        })
        .map(|(l, h)| (l, h.clone()))
        .collect();
    let density = pcp.check_weak_density(&sets, params.eps / 4.0)?;
    let best = density
        .best
        .clone()
        .filter(|b| b.induced > 0)
        .ok_or(Dto1Error::NoLayerPair)?;
    let (l, l2) = (best.layer_a, best.layer_b);
    let ids = pcp.constraints_between(l, l2).to_vec();
    let target_size = layers[l2].label_size;
    let mut r = 0;
    for &c in &ids {
        let pre =
            preimages(&pcp.constraints()[c].proj, target_size).ok_or(Dto1Error::NotRegular(c))?;
        if r != 0 && pre[0].len() != r {
            return Err(Dto1Error::NotRegular(c));
        }
        r = pre[0].len();
    }
    let eta = 2.0 * params.delta / r as f64;
    let xi_val = xi(params.delta, r);
    let s2t = (params.s as f64).powi(2) / params.t as f64;
    let good_threshold = s2t.powf(0.25);
    let gap_bound = 2.0 * good_threshold + params.tau / (16.0 * (r * r) as f64);

    let mut is_heavy = [
        vec![false; layers[l].num_vars],
        vec![false; layers[l2].num_vars],
    ];
    heavy[l].iter().for_each(|&v| is_heavy[0][v] = true);
    heavy[l2].iter().for_each(|&u| is_heavy[1][u] = true);

    let spectra_v: BTreeMap<usize, Vec<f64>> = heavy[l]
        .iter()
        .map(|&v| Ok((v, spectrum(&indicators[l][v])?)))
        .collect::<Result<_, Dto1Error>>()?;
    let infl_v: BTreeMap<usize, Vec<f64>> = spectra_v
        .iter()
        .map(|(&v, sp)| (v, noisy_influences(sp, layers[l].label_size, params.gamma)))
        .collect();
    let mut infl_u: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &u in &heavy[l2] {
        let sp = spectrum(&indicators[l2][u])?;
        infl_u.insert(u, noisy_influences(&sp, target_size, params.gamma));
    }
    let above = |inf: &Vec<f64>| inf.iter().any(|&x| x >= params.tau);
    if !infl_v.values().any(above) && !infl_u.values().any(above) {
        return Err(Dto1Error::NoInfluential);
    }

    let mut pairs = Vec::new();
    for &c in &ids {
        let con = &pcp.constraints()[c];
        if !(is_heavy[0][con.v] && is_heavy[1][con.u]) {
            continue;
        }
        let sp = &spectra_v[&con.v];
        let pre = preimages(&con.proj, target_size).expect("checked above");
        let dec = shattered_decomposition(sp, &con.proj, params.s)?;
        let block = block_noisy_influences(sp, &con.proj, params.gamma);
        let gap = block
            .iter()
            .zip(&infl_v[&con.v])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pairs.push(PairDiagnostics {
            constraint: c,
            v: con.v,
            u: con.u,
            f2_norm: dec.norm2,
            good: dec.norm2 <= good_threshold,
            yz_expectation: yz_correlation(sp, &pre, params.delta),
            influence_gap: gap,
            gap_holds: gap <= gap_bound + 1e-12,
        });
    }

    let labels_v: Vec<Option<u32>> = (0..layers[l].num_vars)
        .map(|v| infl_v.get(&v).and_then(|inf| sample_proportional(inf, rng)))
        .collect();
    let labels_u: Vec<Option<u32>> = (0..layers[l2].num_vars)
        .map(|u| infl_u.get(&u).and_then(|inf| sample_proportional(inf, rng)))
        .collect();
    let ok = |c: usize| {
        let con = &pcp.constraints()[c];
        matches!((labels_v[con.v], labels_u[con.u]), (Some(a), Some(b)) if con.proj[a as usize] == b)
    };
    let sat = ids.iter().filter(|&&c| ok(c)).count();
    let good: Vec<usize> = pairs
        .iter()
        .filter(|p| p.good)
        .map(|p| p.constraint)
        .collect();
    let sat_good = good.iter().filter(|&&c| ok(c)).count();
    Ok(Dto1DecodeOutcome {
        params: params.clone(),
        layer: l,
        target_layer: l2,
        r,
        eta,
        density,
        heavy,
        yz_floor: (params.eps / 2.0).powf(4.0 / eta),
        gap_bound,
        good_threshold,
        suggested_gamma: suggested_gamma(params.nu, xi_val),
        suggested_s: suggested_s(r, xi_val, params.nu, params.gamma, params.tau),
        pairs,
        labels_v,
        labels_u,
        satisfied_fraction: sat as f64 / ids.len() as f64,
        satisfied_fraction_good: if good.is_empty() {
            0.0
        } else {
            sat_good as f64 / good.len() as f64
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceLemmaCheck {
    /// Per block i: Inf̄_i(F) for F(y, z) = f(y)f(z).
    pub product: Vec<f64>,
    /// Per block i: Inf̄_i(f).
    pub block: Vec<f64>,
    /// Per block i: Σ_{j ∈ block i} Inf_j(f) on the uniform cube.
    pub coordinate_sums: Vec<f64>,
    pub product_holds: bool,
    pub block_holds: bool,
}

/// Check Inf̄_i(F) ≤ 4·Inf̄_i(f) and Inf̄_i(f) ≤ r·Σ_{j∈π^{−1}(i)} Inf_j(f)
/// for f: {−1,1}^{nr} → [0,1] with block i = coordinates ir..(i+1)r.
pub fn influence_lemmas(
    values: &[f64],
    blocks: usize,
    r: usize,
    delta: f64,
    tol: f64,
) -> Result<InfluenceLemmaCheck, Dto1Error> {
    let n = blocks * r;
    if values.len() != 1 << n {
        return Err(Dto1Error::Length {
            what: "table",
            expected: 1 << n,
            got: values.len(),
        });
    }
    let side = 1usize << r;
    let f_blocks = ProductFn::new(vec![vec![1.0 / side as f64; side]; blocks], values.to_vec())?;
    let yz = DDeltaR::new(delta, r)?.yz_marginal();
    let big = ProductFn::from_fn(vec![yz; blocks], |d| {
        let (mut y, mut z) = (0usize, 0usize);
        for (i, &a) in d.iter().enumerate() {
            y |= (a % side) << (i * r);
            z |= (a / side) << (i * r);
        }
        values[y] * values[z]
    })?;
    let cube = ProductFn::uniform_cube(n, values.to_vec())?;
    let coord = cube.influences();
    let product = big.influences();
    let block = f_blocks.influences();
    let coordinate_sums: Vec<f64> = (0..blocks)
        .map(|i| coord[i * r..(i + 1) * r].iter().sum())
        .collect();
    Ok(InfluenceLemmaCheck {
        product_holds: product.iter().zip(&block).all(|(p, b)| *p <= 4.0 * b + tol),
        block_holds: block
            .iter()
            .zip(&coordinate_sums)
            .all(|(b, s)| *b <= r as f64 * s + tol),
        product,
        block,
        coordinate_sums,
    })
}

/// Largest violation of (a₁a₂ − b₁b₂)² ≤ 2((a₁−b₁)² + (a₂−b₂)²) over a grid
/// of `points` values per axis on [−1,1]⁴ (≤ 0 when it holds everywhere).
pub fn product_difference_grid(points: usize) -> f64 {
    let grid: Vec<f64> = (0..points)
        .map(|k| -1.0 + 2.0 * k as f64 / (points - 1).max(1) as f64)
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for &a1 in &grid {
        for &a2 in &grid {
            for &b1 in &grid {
                for &b2 in &grid {
                    let lhs = (a1 * a2 - b1 * b2).powi(2);
                    let rhs = 2.0 * ((a1 - b1).powi(2) + (a2 - b2).powi(2));
                    worst = worst.max(lhs - rhs);
                }
            }
        }
    }
    worst
}

/// The ±1 dictator indicator (1 + y_j)/2 on {−1,1}^n.
pub fn dictator_indicator(n: usize, j: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|p| if p >> j & 1 == 0 { 1.0 } else { 0.0 })
        .collect()
}
