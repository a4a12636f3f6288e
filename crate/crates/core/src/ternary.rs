//! Families in {*, 1, 2}^m under the biased product measure μ_p.
//!
//! A point is a base-3 integer whose digit i is coordinate i, with digit 0
//! standing for *, 1 for 1 and 2 for 2.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

pub const MAX_TERNARY_WIDTH: usize = 10;
pub const STAR: u8 = 0;
pub const DEFAULT_CORE_THRESHOLD: f64 = 0.75;
pub const P_GRID_POINTS: usize = 32;
pub const WITNESS_RETRY_CAP: usize = 10_000;
const ERR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TernaryError {
    #[error("width {0} exceeds the cap {MAX_TERNARY_WIDTH}")]
    Width(usize),
    #[error("membership table has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("family is not monotone")]
    NonMonotone,
    #[error("family measure {measure} is below δ = {delta}")]
    MeasureBelow { measure: f64, delta: f64 },
    #[error("no witness pair after {0} draws")]
    RetryCap(usize),
    #[error("parameter {0} = {1} out of range")]
    BadParam(&'static str, f64),
    #[error("core family is empty")]
    EmptyCoreFamily,
    #[error("parse error: {0}")]
    Parse(String),
}

pub fn pow3(m: usize) -> usize {
    3usize.pow(m as u32)
}

pub fn decode_point(mut idx: usize, m: usize) -> Vec<u8> {
    (0..m)
        .map(|_| {
            let d = (idx % 3) as u8;
            idx /= 3;
            d
        })
        .collect()
}

pub fn encode_point(point: &[u8]) -> usize {
    point.iter().rev().fold(0, |acc, &d| acc * 3 + d as usize)
}

pub fn point_to_string(point: &[u8]) -> String {
    point
        .iter()
        .map(|&d| match d {
            0 => '*',
            1 => '1',
            _ => '2',
        })
        .collect()
}

/// μ_p of a single point: (1−p) per star, p/2 per non-star.
pub fn point_weight(point: &[u8], p: f64) -> f64 {
    point
        .iter()
        .map(|&d| if d == STAR { 1.0 - p } else { p / 2.0 })
        .product()
}

fn star_counts(m: usize) -> Vec<u8> {
    (0..pow3(m))
        .map(|i| decode_point(i, m).iter().filter(|&&d| d == STAR).count() as u8)
        .collect()
}

/// Point weights for every point of {*,1,2}^m.
pub fn weight_table(m: usize, p: f64) -> Vec<f64> {
    star_counts(m)
        .iter()
        .map(|&s| (1.0 - p).powi(s as i32) * (p / 2.0).powi(m as i32 - s as i32))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryFamily {
    m: usize,
    members: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RussoReport {
    pub p: f64,
    pub h: f64,
    pub derivative: f64,
    pub average_sensitivity: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoreResult {
    pub core: Vec<usize>,
    /// μ_p(F Δ F′) for the best junta F′ on the core.
    pub error: f64,
    pub threshold: f64,
    /// Membership over {*,1,2}^core, digit k being core[k].
    pub core_family: Vec<bool>,
    /// Conditional probability of F given each core assignment.
    pub conditional: Vec<f64>,
    /// μ_p^C of the core family.
    pub core_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessPair {
    pub s: Vec<usize>,
    pub f: Vec<u8>,
    pub f_prime: Vec<u8>,
}

impl WitnessPair {
    /// Off S, no coordinate is (1,1) or (2,2).
    pub fn is_valid(&self) -> bool {
        self.f
            .iter()
            .zip(&self.f_prime)
            .enumerate()
            .all(|(j, (&a, &b))| self.s.contains(&j) || a == STAR || a != b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub pair: WitnessPair,
    pub p_prime: f64,
    pub as_p_prime: f64,
    pub core_error: f64,
    pub anchor: Vec<u8>,
    pub draws: usize,
}

impl TernaryFamily {
    pub fn new(m: usize, members: Vec<bool>) -> Result<Self, TernaryError> {
        if m > MAX_TERNARY_WIDTH {
            return Err(TernaryError::Width(m));
        }
        if members.len() != pow3(m) {
            return Err(TernaryError::Length {
                expected: pow3(m),
                got: members.len(),
            });
        }
        Ok(Self { m, members })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(&[u8]) -> bool) -> Result<Self, TernaryError> {
        if m > MAX_TERNARY_WIDTH {
            return Err(TernaryError::Width(m));
        }
        let members = (0..pow3(m)).map(|i| f(&decode_point(i, m))).collect();
        Self::new(m, members)
    }

    pub fn full(m: usize) -> Result<Self, TernaryError> {
        Self::from_fn(m, |_| true)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, point: &[u8]) -> bool {
        self.members[encode_point(point)]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_monotone(&self) -> bool {
        let mut pw = 1;
        for _ in 0..self.m {
            for idx in 0..self.members.len() {
                if self.members[idx]
                    && (idx / pw) % 3 == 0
                    && !(self.members[idx + pw] && self.members[idx + 2 * pw])
                {
                    return false;
                }
            }
            pw *= 3;
        }
        true
    }

    /// Smallest monotone family containing this one.
    pub fn monotone_closure(&self) -> Self {
        let mut members = self.members.clone();
        let mut pw = 1;
        for _ in 0..self.m {
            for idx in 0..members.len() {
                if members[idx] && (idx / pw) % 3 == 0 {
                    members[idx + pw] = true;
                    members[idx + 2 * pw] = true;
                }
            }
            pw *= 3;
        }
        Self { m: self.m, members }
    }

    pub fn measure(&self, p: f64) -> f64 {
        weight_table(self.m, p)
            .iter()
            .zip(&self.members)
            .filter(|(_, &b)| b)
            .map(|(w, _)| w)
            .sum()
    }

    /// Inf_i^p: mass of points whose *-version at i is outside the family
    /// while some 1/2-version is inside.
    pub fn influences(&self, p: f64) -> Vec<f64> {
        let w = weight_table(self.m, p);
        let mut pw = 1;
        let mut out = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let mut inf = 0.0;
            for idx in 0..self.members.len() {
                let base = idx - ((idx / pw) % 3) * pw;
                let pivotal =
                    !self.members[base] && (self.members[base + pw] || self.members[base + 2 * pw]);
                if pivotal {
                    inf += w[idx];
                }
            }
            out.push(inf);
            pw *= 3;
        }
        out
    }

    pub fn average_sensitivity(&self, p: f64) -> f64 {
        self.influences(p).iter().sum()
    }

    /// Finite-difference dμ_p/dp against the Russo bracket
    /// [as_p/2 − 10h, as_p + 10h].
    pub fn russo_check(&self, p: f64, h: f64) -> Result<RussoReport, TernaryError> {
        if !self.is_monotone() {
            return Err(TernaryError::NonMonotone);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(TernaryError::BadParam("p", p));
        }
        if !(h > 0.0 && h < 0.5) {
            return Err(TernaryError::BadParam("h", h));
        }
        let (lo, hi) = ((p - h).max(0.0), (p + h).min(1.0));
        let derivative = (self.measure(hi) - self.measure(lo)) / (hi - lo);
        let as_p = self.average_sensitivity(p);
        let tol = 10.0 * h;
        let (lower, upper) = (as_p / 2.0 - tol, as_p + tol);
        Ok(RussoReport {
            p,
            h,
            derivative,
            average_sensitivity: as_p,
            lower,
            upper,
            holds: lower <= derivative && derivative <= upper,
        })
    }

    /// Per core assignment: (mass inside F, total mass), both under μ_p.
    fn fibers(&self, core: &[usize], w: &[f64]) -> Vec<(f64, f64)> {
        let mut fib = vec![(0.0, 0.0); pow3(core.len())];
        let pows: Vec<usize> = core.iter().map(|&c| pow3(c)).collect();
        for idx in 0..self.members.len() {
            let key = pows
                .iter()
                .rev()
                .fold(0, |acc, &pw| acc * 3 + (idx / pw) % 3);
            fib[key].1 += w[idx];
            if self.members[idx] {
                fib[key].0 += w[idx];
            }
        }
        fib
    }

    /// Core family [F]^t_C and its μ_p^C mass.
    pub fn core_family(&self, core: &[usize], t: f64, p: f64) -> CoreResult {
        let w = weight_table(self.m, p);
        let fib = self.fibers(core, &w);
        let error = fib.iter().map(|&(i, tot)| i.min(tot - i).max(0.0)).sum();
        let conditional: Vec<f64> = fib
            .iter()
            .map(|&(i, tot)| if tot > 0.0 { i / tot } else { 0.0 })
            .collect();
        let core_family: Vec<bool> = conditional.iter().map(|&c| c > t).collect();
        let core_mass = fib
            .iter()
            .zip(&core_family)
            .filter(|(_, &b)| b)
            .map(|(f, _)| f.1)
            .sum();
        CoreResult {
            core: core.to_vec(),
            error,
            threshold: t,
            core_family,
            conditional,
            core_mass,
        }
    }

    /// Smallest (δ, p)-core by exhaustive search over subsets of
    /// increasing size; the best junta takes the majority on each fiber.
    pub fn find_core(&self, delta: f64, p: f64) -> CoreResult {
        self.find_core_with_threshold(delta, p, DEFAULT_CORE_THRESHOLD)
    }

    pub fn find_core_with_threshold(&self, delta: f64, p: f64, t: f64) -> CoreResult {
        let w = weight_table(self.m, p);
        for size in 0..=self.m {
            for mask in 0u32..(1 << self.m) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let core: Vec<usize> = (0..self.m).filter(|&i| mask >> i & 1 == 1).collect();
                let err: f64 = self
                    .fibers(&core, &w)
                    .iter()
                    .map(|&(i, tot)| i.min(tot - i).max(0.0))
                    .sum();
                if err <= delta + ERR_TOL {
                    return self.core_family(&core, t, p);
                }
            }
        }
        unreachable!("the full coordinate set is an exact core")
    }

    /// Two members agreeing on a small set S and never (1,1) or (2,2) off
    /// S, found by the constructive argument: minimise as_{p′} on a grid
    /// in [1−ε, 1−ε/2], take a (δ/4, p′)-core, anchor S at the core-family
    /// element with the highest conditional mass, and fill the rest from
    /// D^{p′} until both land in the family.
    pub fn two_element_witness(
        &self,
        p: f64,
        delta: f64,
        rng: &mut impl Rng,
    ) -> Result<WitnessReport, TernaryError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(TernaryError::BadParam("p", p));
        }
        if !self.is_monotone() {
            return Err(TernaryError::NonMonotone);
        }
        let measure = self.measure(p);
        if measure < delta {
            return Err(TernaryError::MeasureBelow { measure, delta });
        }
        let eps = 1.0 - p;
        let (p_prime, as_p_prime) = (0..P_GRID_POINTS)
            .map(|k| {
                let q = 1.0 - eps + (eps / 2.0) * k as f64 / (P_GRID_POINTS - 1) as f64;
                (q, self.average_sensitivity(q))
            })
            .fold((1.0 - eps, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        let core = self.find_core(delta / 4.0, p_prime);
        let anchor_key = core
            .core_family
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| k)
            .fold(None::<usize>, |best, k| match best {
                Some(b) if core.conditional[b] >= core.conditional[k] => Some(b),
                _ => Some(k),
            })
            .ok_or(TernaryError::EmptyCoreFamily)?;
        let anchor = decode_point(anchor_key, core.core.len());
        for draw in 1..=WITNESS_RETRY_CAP {
            let (mut f, mut g) = sample_dp(p_prime, self.m, rng);
            for (k, &c) in core.core.iter().enumerate() {
                f[c] = anchor[k];
                g[c] = anchor[k];
            }
            if self.contains(&f) && self.contains(&g) {
                return Ok(WitnessReport {
                    pair: WitnessPair {
                        s: core.core.clone(),
                        f,
                        f_prime: g,
                    },
                    p_prime,
                    as_p_prime,
                    core_error: core.error,
                    anchor,
                    draws: draw,
                });
            }
        }
        Err(TernaryError::RetryCap(WITNESS_RETRY_CAP))
    }

    /// Header line "m p" followed by the membership bits in index order.
    pub fn to_text(&self, p: f64) -> String {
        let bits: String = self
            .members
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        format!("{} {}\n{}\n", self.m, p, bits)
    }

    pub fn from_text(s: &str) -> Result<(Self, f64), TernaryError> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| TernaryError::Parse("missing header".into()))?;
        let mut parts = header.split_whitespace();
        let m: usize = parts
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| TernaryError::Parse("line 1: bad m".into()))?;
        let p: f64 = parts
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| TernaryError::Parse("line 1: bad p".into()))?;
        let bits = lines.next().unwrap_or("").trim();
        let members = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(TernaryError::Parse(format!("line 2: unexpected {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Self::new(m, members)?, p))
    }
}

/// One draw from (D^p)^m: each coordinate is (1,2) or (2,1), then each side
/// independently becomes * with probability 1−p.
pub fn sample_dp(p: f64, m: usize, rng: &mut impl Rng) -> (Vec<u8>, Vec<u8>) {
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        let (mut x, mut y) = if rng.random_bool(0.5) { (1, 2) } else { (2, 1) };
        if rng.random::<f64>() >= p {
            x = STAR;
        }
        if rng.random::<f64>() >= p {
            y = STAR;
        }
        a.push(x);
        b.push(y);
    }
    (a, b)
}

/// Random monotone family: the upward closure of a few random points.
pub fn random_monotone(
    m: usize,
    generators: usize,
    rng: &mut impl Rng,
) -> Result<TernaryFamily, TernaryError> {
    let mut members = vec![false; pow3(m)];
    for _ in 0..generators {
        members[rng.random_range(0..pow3(m))] = true;
    }
    Ok(TernaryFamily::new(m, members)?.monotone_closure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn exact_derivative(fam: &TernaryFamily, p: f64) -> f64 {
        (0..pow3(fam.m()))
            .filter(|&i| fam.members()[i])
            .map(|i| {
                let pt = decode_point(i, fam.m());
                let stars = pt.iter().filter(|&&d| d == STAR).count() as f64;
                let non = fam.m() as f64 - stars;
                point_weight(&pt, p) * (non / p - stars / (1.0 - p))
            })
            .sum()
    }

    #[test]
    fn measure_examples() {
        let star = TernaryFamily::new(1, vec![true, false, false]).unwrap();
        assert!((star.measure(0.9) - 0.1).abs() < 1e-15);
        let one = TernaryFamily::new(1, vec![false, true, false]).unwrap();
        assert!((one.measure(0.9) - 0.45).abs() < 1e-15);
        assert!((TernaryFamily::full(4).unwrap().measure(0.3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn influence_examples() {
        let fam = TernaryFamily::new(1, vec![false, true, true]).unwrap();
        let p = 0.7;
        assert!((fam.influences(p)[0] - 1.0).abs() < 1e-15);
        assert!((fam.measure(p) - p).abs() < 1e-15);
        let r = fam.russo_check(p, 1e-4).unwrap();
        assert!((r.derivative - 1.0).abs() < 1e-9 && r.holds);

        let full = TernaryFamily::full(3).unwrap();
        assert_eq!(full.average_sensitivity(0.4), 0.0);
        assert!(full.russo_check(0.4, 1e-4).unwrap().derivative.abs() < 1e-9);

        let dep = TernaryFamily::from_fn(3, |x| x[1] != STAR).unwrap();
        let inf = dep.influences(0.6);
        assert!((dep.average_sensitivity(0.6) - inf[1]).abs() < 1e-15);
        assert!(inf[0] == 0.0 && inf[2] == 0.0);

        let non_mono = TernaryFamily::new(1, vec![true, false, false]).unwrap();
        assert_eq!(
            non_mono.russo_check(0.5, 1e-4),
            Err(TernaryError::NonMonotone)
        );
    }

    #[test]
    fn core_examples() {
        let dep = TernaryFamily::from_fn(3, |x| x[0] != STAR).unwrap();
        let c = dep.find_core(0.0, 0.8);
        assert_eq!(c.core, vec![0]);
        assert!(c.error.abs() < 1e-15);
        let full = TernaryFamily::full(3).unwrap().find_core(0.0, 0.8);
        assert!(full.core.is_empty());
    }

    #[test]
    fn witness_on_dictator_family() {
        let fam = TernaryFamily::from_fn(4, |x| x[0] != STAR).unwrap();
        let mut rng = stage_rng(1, "w");
        let rep = fam.two_element_witness(0.8, 0.2, &mut rng).unwrap();
        assert_eq!(rep.pair.s, vec![0]);
        assert_eq!(rep.pair.f[0], rep.pair.f_prime[0]);
        assert!(rep.pair.is_valid());
        assert!(fam.contains(&rep.pair.f) && fam.contains(&rep.pair.f_prime));

        let full = TernaryFamily::full(3).unwrap();
        let rep = full.two_element_witness(0.8, 0.2, &mut rng).unwrap();
        assert!(rep.pair.s.is_empty() && rep.draws == 1);

        let tiny = TernaryFamily::from_fn(3, |x| x.iter().all(|&d| d == 1))
            .unwrap()
            .monotone_closure();
        assert!(matches!(
            tiny.two_element_witness(0.5, 0.2, &mut rng),
            Err(TernaryError::MeasureBelow { .. })
        ));
    }

    #[test]
    fn dp_marginals_and_support() {
        let mut rng = stage_rng(2, "dp");
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let (a, b) = sample_dp(0.9, 1, &mut rng);
            assert!(!(a[0] != STAR && a[0] == b[0]));
            counts[a[0] as usize] += 1;
        }
        for (c, want) in counts.iter().zip([0.1, 0.45, 0.45]) {
            let sd = (want * (1.0 - want) / n as f64).sqrt();
            assert!(
                ((*c as f64 / n as f64) - want).abs() < 3.0 * sd,
                "{counts:?}"
            );
        }
        let (a, b) = sample_dp(1.0, 50, &mut rng);
        assert!(a.iter().chain(&b).all(|&d| d != STAR));
    }

    #[test]
    fn text_roundtrip() {
        let fam = random_monotone(3, 2, &mut stage_rng(3, "t")).unwrap();
        let s = fam.to_text(0.8);
        let (back, p) = TernaryFamily::from_text(&s).unwrap();
        assert_eq!(back, fam);
        assert_eq!(p, 0.8);
        assert!(TernaryFamily::from_text("2 0.5\n0101").is_err());
    }

    proptest! {
        #[test]
        fn closure_is_monotone_superset(seed in any::<u64>(), m in 1usize..=5) {
            let mut rng = stage_rng(seed, "cl");
            let members: Vec<bool> = (0..pow3(m)).map(|_| rng.random_bool(0.1)).collect();
            let fam = TernaryFamily::new(m, members).unwrap();
            let cl = fam.monotone_closure();
            prop_assert!(cl.is_monotone());
            prop_assert!(fam.members().iter().zip(cl.members()).all(|(&a, &b)| !a || b));
            prop_assert!(cl.measure(0.6) >= fam.measure(0.6) - 1e-15);
        }

        #[test]
        fn measure_monotone_in_p(seed in any::<u64>(), m in 1usize..=5) {
            let fam = random_monotone(m, 3, &mut stage_rng(seed, "mp")).unwrap();
            let mut prev = -1.0;
            for k in 0..=20 {
                let mu = fam.measure(k as f64 / 20.0);
                prop_assert!(mu >= prev - 1e-12);
                prev = mu;
            }
        }

        #[test]
        fn finite_difference_tracks_exact_derivative(seed in any::<u64>(), m in 1usize..=5) {
            let fam = random_monotone(m, 3, &mut stage_rng(seed, "rd")).unwrap();
            for &p in &[0.3, 0.5, 0.8] {
                let r = fam.russo_check(p, 1e-4).unwrap();
                prop_assert!((r.derivative - exact_derivative(&fam, p)).abs() < 1e-6);
                prop_assert!(r.holds);
            }
        }

        #[test]
        fn zero_delta_core_is_dependency_set(seed in any::<u64>(), m in 1usize..=4) {
            let fam = random_monotone(m, 2, &mut stage_rng(seed, "dep")).unwrap();
            let deps: Vec<usize> = (0..m).filter(|&i| {
                (0..pow3(m)).any(|idx| {
                    let mut pt = decode_point(idx, m);
                    let here = fam.contains(&pt);
                    (0..3).any(|d| { pt[i] = d; fam.contains(&pt) != here })
                })
            }).collect();
            prop_assert_eq!(fam.find_core(0.0, 0.6).core, deps);
        }

        #[test]
        fn witness_invariant(seed in any::<u64>(), m in 1usize..=5) {
            let mut rng = stage_rng(seed, "wi");
            let fam = random_monotone(m, 4, &mut rng).unwrap();
            if fam.measure(0.8) >= 0.2 {
                let rep = fam.two_element_witness(0.8, 0.2, &mut rng).unwrap();
                prop_assert!(rep.pair.is_valid());
                prop_assert!(fam.contains(&rep.pair.f) && fam.contains(&rep.pair.f_prime));
            }
        }
    }
}
