//! Max-3Lin instances over F₂, the two-prover one-round block game, and the
//! per-block geometry (h_i, H_W, h_W, π_W) used by the Hadamard gadget.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CspError;
use crate::gf2::{Gf2Subspace, Gf2Vector, MAX_VECTOR_WIDTH};

/// Default number of block draws before giving up on a repeat-free block.
pub const DEFAULT_REJECTION_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub vars: [usize; 3],
    pub rhs: u8,
}

impl Equation {
    pub fn satisfied_by(&self, a: &[u8]) -> bool {
        (a[self.vars[0]] ^ a[self.vars[1]] ^ a[self.vars[2]]) & 1 == self.rhs
    }
}

#[derive(Serialize, Deserialize)]
struct Lin3Json {
    n: usize,
    equations: Vec<[u64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<Vec<u8>>,
}

/// A system of equations x_i + x_j + x_k = b over F₂.
///
/// `planted`, when present, is an assignment recorded by a generator that
/// satisfies every equation; downstream YES-case certificates use it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Lin3Json", into = "Lin3Json")]
pub struct Lin3Instance {
    n: usize,
    equations: Vec<Equation>,
    declared_degree: Option<usize>,
    planted: Option<Vec<u8>>,
    occurrences: Vec<Vec<usize>>,
}

impl TryFrom<Lin3Json> for Lin3Instance {
    type Error = CspError;

    fn try_from(raw: Lin3Json) -> Result<Self, CspError> {
        let equations = raw
            .equations
            .iter()
            .map(|e| {
                if e[3] > 1 {
                    return Err(CspError::Invalid(format!(
                        "right-hand side {} is not a bit",
                        e[3]
                    )));
                }
                Ok(Equation {
                    vars: [e[0] as usize, e[1] as usize, e[2] as usize],
                    rhs: e[3] as u8,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut inst = Lin3Instance::new(raw.n, equations, raw.declared_degree)?;
        if let Some(p) = raw.planted {
            inst = inst.with_planted(p)?;
        }
        Ok(inst)
    }
}

impl From<Lin3Instance> for Lin3Json {
    fn from(inst: Lin3Instance) -> Self {
        Lin3Json {
            n: inst.n,
            equations: inst
                .equations
                .iter()
                .map(|e| {
                    [
                        e.vars[0] as u64,
                        e.vars[1] as u64,
                        e.vars[2] as u64,
                        e.rhs as u64,
                    ]
                })
                .collect(),
            declared_degree: inst.declared_degree,
            planted: inst.planted,
        }
    }
}

impl Lin3Instance {
    pub fn new(
        n: usize,
        equations: Vec<Equation>,
        declared_degree: Option<usize>,
    ) -> Result<Self, CspError> {
        let mut occurrences = vec![Vec::new(); n];
        for (idx, eq) in equations.iter().enumerate() {
            let [a, b, c] = eq.vars;
            if a >= n || b >= n || c >= n {
                return Err(CspError::Invalid(format!(
                    "equation {idx} references a variable outside 0..{n}"
                )));
            }
            if a == b || b == c || a == c {
                return Err(CspError::Invalid(format!(
                    "equation {idx} repeats a variable"
                )));
            }
            if eq.rhs > 1 {
                return Err(CspError::Invalid(format!("equation {idx} has non-bit rhs")));
            }
            for &v in &eq.vars {
                occurrences[v].push(idx);
            }
        }
        if let Some(deg) = declared_degree {
            if let Some(v) = occurrences.iter().position(|o| o.len() != deg) {
                return Err(CspError::Invalid(format!(
                    "variable {v} occurs {} times, declared degree is {deg}",
                    occurrences[v].len()
                )));
            }
        }
        Ok(Self {
            n,
            equations,
            declared_degree,
            planted: None,
            occurrences,
        })
    }

    pub fn with_planted(mut self, assignment: Vec<u8>) -> Result<Self, CspError> {
        if assignment.len() != self.n {
            return Err(CspError::AssignmentLength {
                expected: self.n,
                got: assignment.len(),
            });
        }
        if let Some(i) = self
            .equations
            .iter()
            .position(|e| !e.satisfied_by(&assignment))
        {
            return Err(CspError::Invalid(format!(
                "planted assignment violates equation {i}"
            )));
        }
        self.planted = Some(assignment);
        Ok(self)
    }

    /// Random instance with `eqs` equations on distinct variable triples.
    /// With `planted`, right-hand sides are chosen to agree with a hidden
    /// uniform assignment, which is recorded.
    pub fn random(
        n: usize,
        eqs: usize,
        planted: bool,
        rng: &mut impl Rng,
    ) -> Result<Self, CspError> {
        if n < 3 {
            return Err(CspError::Invalid("need at least 3 variables".into()));
        }
        let sigma: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let mut equations = Vec::with_capacity(eqs);
        for _ in 0..eqs {
            let a = rng.random_range(0..n);
            let b = loop {
                let b = rng.random_range(0..n);
                if b != a {
                    break b;
                }
            };
            let c = loop {
                let c = rng.random_range(0..n);
                if c != a && c != b {
                    break c;
                }
            };
            let rhs = if planted {
                sigma[a] ^ sigma[b] ^ sigma[c]
            } else {
                rng.random_range(0..2u8)
            };
            equations.push(Equation {
                vars: [a, b, c],
                rhs,
            });
        }
        let inst = Self::new(n, equations, None)?;
        if planted {
            inst.with_planted(sigma)
        } else {
            Ok(inst)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn declared_degree(&self) -> Option<usize> {
        self.declared_degree
    }

    pub fn planted(&self) -> Option<&[u8]> {
        self.planted.as_deref()
    }

    /// Equations containing variable `v`.
    pub fn occurrences(&self, v: usize) -> &[usize] {
        &self.occurrences[v]
    }

    /// Exact fraction of equations satisfied by `a`.
    pub fn evaluate(&self, a: &[u8]) -> Result<Ratio<u64>, CspError> {
        if a.len() != self.n {
            return Err(CspError::AssignmentLength {
                expected: self.n,
                got: a.len(),
            });
        }
        if self.equations.is_empty() {
            return Ok(Ratio::from_integer(1));
        }
        let sat = self.equations.iter().filter(|e| e.satisfied_by(a)).count();
        Ok(Ratio::new(sat as u64, self.equations.len() as u64))
    }

    /// Build a block from explicit equation indices.
    pub fn block(&self, eq_ids: Vec<usize>) -> Result<EquationBlock, CspError> {
        if let Some(&bad) = eq_ids.iter().find(|&&e| e >= self.equations.len()) {
            return Err(CspError::Invalid(format!(
                "equation index {bad} out of range"
            )));
        }
        EquationBlock::from_equations(self, eq_ids).ok_or(CspError::RepeatedVariable)
    }
}

/// An ordered r-tuple of equations whose 3r variables are pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquationBlock {
    pub eq_ids: Vec<usize>,
    /// Variables in canonical order: equation i occupies positions 3i..3i+3.
    pub var_order: Vec<usize>,
}

impl EquationBlock {
    fn from_equations(inst: &Lin3Instance, eq_ids: Vec<usize>) -> Option<Self> {
        let var_order: Vec<usize> = eq_ids
            .iter()
            .flat_map(|&e| inst.equations[e].vars)
            .collect();
        let mut sorted = var_order.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Self { eq_ids, var_order })
    }

    pub fn r(&self) -> usize {
        self.eq_ids.len()
    }

    pub fn is_satisfied_by(&self, inst: &Lin3Instance, a: &[u8]) -> bool {
        self.eq_ids
            .iter()
            .all(|&e| inst.equations[e].satisfied_by(a))
    }

    /// σ restricted to the block's variables, in canonical order.
    pub fn restrict(&self, a: &[u8]) -> Vec<u8> {
        self.var_order.iter().map(|&v| a[v]).collect()
    }
}

/// An ordered r-tuple of variables, the i-th taken from the i-th equation of
/// its parent block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableBlock {
    pub var_ids: Vec<usize>,
}

impl VariableBlock {
    pub fn r(&self) -> usize {
        self.var_ids.len()
    }
}

/// One verifier round: a uniformly drawn repeat-free block W and a block U
/// taking one uniformly chosen variable from each equation of W.
pub fn sample_round(
    inst: &Lin3Instance,
    r: usize,
    rng: &mut impl Rng,
) -> Result<(EquationBlock, VariableBlock), CspError> {
    sample_round_with_budget(inst, r, rng, DEFAULT_REJECTION_BUDGET)
}

pub fn sample_round_with_budget(
    inst: &Lin3Instance,
    r: usize,
    rng: &mut impl Rng,
    budget: usize,
) -> Result<(EquationBlock, VariableBlock), CspError> {
    if r == 0 {
        return Err(CspError::Invalid("block size r must be at least 1".into()));
    }
    if inst.equations.is_empty() {
        return Err(CspError::Invalid("instance has no equations".into()));
    }
    for _ in 0..budget {
        let ids: Vec<usize> = (0..r)
            .map(|_| rng.random_range(0..inst.equations.len()))
            .collect();
        if let Some(w) = EquationBlock::from_equations(inst, ids) {
            let var_ids = w
                .eq_ids
                .iter()
                .map(|&e| inst.equations[e].vars[rng.random_range(0..3)])
                .collect();
            return Ok((w, VariableBlock { var_ids }));
        }
    }
    Err(CspError::RejectionBudget(budget))
}

/// Draw a second block W′ from the verifier's distribution conditioned on
/// the variable block `u`: the i-th equation is uniform among those
/// containing the i-th variable of `u`.
pub fn sample_partner(
    inst: &Lin3Instance,
    u: &VariableBlock,
    rng: &mut impl Rng,
    budget: usize,
) -> Result<EquationBlock, CspError> {
    for _ in 0..budget {
        let ids: Vec<usize> = u
            .var_ids
            .iter()
            .map(|&v| {
                let occ = &inst.occurrences[v];
                occ[rng.random_range(0..occ.len())]
            })
            .collect();
        if let Some(w) = EquationBlock::from_equations(inst, ids) {
            return Ok(w);
        }
    }
    Err(CspError::RejectionBudget(budget))
}

/// Prover-2's answer under a global assignment: σ on W's variables.
pub fn prover2_answer(w: &EquationBlock, sigma: &[u8]) -> Vec<u8> {
    w.restrict(sigma)
}

/// Prover-1's answer under a global assignment: σ on U's variables.
pub fn prover1_answer(u: &VariableBlock, sigma: &[u8]) -> Vec<u8> {
    u.var_ids.iter().map(|&v| sigma[v]).collect()
}

/// The verifier's acceptance test: Prover-2's assignment satisfies every
/// equation of W and agrees with Prover-1 on the variables of U.
pub fn verifier_accepts(
    inst: &Lin3Instance,
    w: &EquationBlock,
    u: &VariableBlock,
    answer_w: &[u8],
    answer_u: &[u8],
) -> Result<bool, CspError> {
    let positions = u_positions(inst, w, u)?;
    if answer_w.len() != 3 * w.r() || answer_u.len() != u.r() {
        return Err(CspError::AssignmentLength {
            expected: 3 * w.r(),
            got: answer_w.len(),
        });
    }
    let satisfies = w.eq_ids.iter().enumerate().all(|(i, &e)| {
        (answer_w[3 * i] ^ answer_w[3 * i + 1] ^ answer_w[3 * i + 2]) & 1 == inst.equations[e].rhs
    });
    let consistent = positions
        .iter()
        .zip(answer_u)
        .all(|(&p, &a)| answer_w[p] == a);
    Ok(satisfies && consistent)
}

fn u_positions(
    inst: &Lin3Instance,
    w: &EquationBlock,
    u: &VariableBlock,
) -> Result<Vec<usize>, CspError> {
    if u.r() != w.r() {
        return Err(CspError::InconsistentBlocks);
    }
    u.var_ids
        .iter()
        .zip(&w.eq_ids)
        .enumerate()
        .map(|(i, (&var, &e))| {
            inst.equations[e]
                .vars
                .iter()
                .position(|&x| x == var)
                .map(|j| 3 * i + j)
                .ok_or(CspError::InconsistentBlocks)
        })
        .collect()
}

/// The Hadamard-code geometry of a block W (with projection onto U).
///
/// Coordinates of F₂^{3r+1} are 0-based: equation i owns 3i, 3i+1, 3i+2 and
/// the extra coordinate is 3r.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGeometry {
    pub r: usize,
    pub h: Vec<Gf2Vector>,
    pub subspace: Gf2Subspace,
    pub h_w: Gf2Vector,
    /// Position in F₂^{3r+1} of the i-th variable of U.
    pub u_positions: Vec<usize>,
}

impl BlockGeometry {
    pub fn width(&self) -> usize {
        3 * self.r + 1
    }

    /// π_W: keep U's coordinates, in U's order.
    pub fn pi(&self, x: u32) -> u32 {
        self.u_positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (((x >> p) & 1) << i))
    }

    /// π_W^{-1}: zero-filling extension of a vector on U's coordinates.
    pub fn pi_inv(&self, z: u32) -> u32 {
        self.u_positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (((z >> i) & 1) << p))
    }

    /// The vector (σ(W), 1) whose Hadamard code is the YES-case coloring.
    pub fn assignment_vector(&self, restricted: &[u8]) -> u32 {
        restricted
            .iter()
            .enumerate()
            .fold(1u32 << (3 * self.r), |acc, (i, &b)| {
                acc | (((b & 1) as u32) << i)
            })
    }
}

pub fn block_geometry(
    w: &EquationBlock,
    u: &VariableBlock,
    inst: &Lin3Instance,
) -> Result<BlockGeometry, CspError> {
    let r = w.r();
    let width = 3 * r + 1;
    if width > MAX_VECTOR_WIDTH {
        return Err(CspError::Invalid(format!(
            "block size r = {r} exceeds the width cap"
        )));
    }
    let u_positions = u_positions(inst, w, u)?;
    let h: Vec<Gf2Vector> = w
        .eq_ids
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let mut bits = 0b111u32 << (3 * i);
            if inst.equations[e].rhs == 1 {
                bits |= 1 << (3 * r);
            }
            Gf2Vector::new(width, bits).expect("width checked above")
        })
        .collect();
    let subspace = Gf2Subspace::span(width, &h).expect("width checked above");
    if subspace.dim() != r {
        return Err(CspError::Internal(
            "block vectors h_i are linearly dependent".into(),
        ));
    }
    let h_w = Gf2Vector::new(width, 1 << (3 * r)).expect("width checked above");
    Ok(BlockGeometry {
        r,
        h,
        subspace,
        h_w,
        u_positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stage_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn eq(a: usize, b: usize, c: usize, rhs: u8) -> Equation {
        Equation {
            vars: [a, b, c],
            rhs,
        }
    }

    #[test]
    fn evaluate_examples() {
        let homog = Lin3Instance::new(4, vec![eq(0, 1, 2, 0), eq(1, 2, 3, 0)], None).unwrap();
        assert_eq!(
            homog.evaluate(&[0, 0, 0, 0]).unwrap(),
            Ratio::from_integer(1)
        );
        let single = Lin3Instance::new(3, vec![eq(0, 1, 2, 1)], None).unwrap();
        assert_eq!(single.evaluate(&[1, 0, 0]).unwrap(), Ratio::from_integer(1));
        assert_eq!(single.evaluate(&[0, 0, 0]).unwrap(), Ratio::from_integer(0));
        assert!(single.evaluate(&[0, 0]).is_err());
    }

    #[test]
    fn validation() {
        assert!(Lin3Instance::new(3, vec![eq(0, 1, 3, 0)], None).is_err());
        assert!(Lin3Instance::new(3, vec![eq(0, 1, 1, 0)], None).is_err());
        assert!(Lin3Instance::new(3, vec![eq(0, 1, 2, 0)], Some(2)).is_err());
        assert!(Lin3Instance::new(3, vec![eq(0, 1, 2, 0)], Some(1)).is_ok());
    }

    #[test]
    fn json_schema() {
        let inst = Lin3Instance::new(3, vec![eq(0, 1, 2, 1)], None).unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        assert_eq!(s, r#"{"n":3,"equations":[[0,1,2,1]]}"#);
        let back: Lin3Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
        assert!(
            serde_json::from_str::<Lin3Instance>(r#"{"n":2,"equations":[[0,1,2,1]]}"#).is_err()
        );
    }

    #[test]
    fn sampling_rules() {
        let mut rng = stage_rng(1, "t");
        let inst = Lin3Instance::random(12, 12, true, &mut rng).unwrap();
        let (w, u) = sample_round(&inst, 1, &mut rng).unwrap();
        assert_eq!(w.r(), 1);
        assert!(inst.equations()[w.eq_ids[0]].vars.contains(&u.var_ids[0]));

        let a = sample_round(&inst, 2, &mut stage_rng(9, "s")).unwrap();
        let b = sample_round(&inst, 2, &mut stage_rng(9, "s")).unwrap();
        assert_eq!(a, b);

        let single = Lin3Instance::new(3, vec![eq(0, 1, 2, 1)], None).unwrap();
        assert_eq!(
            sample_round_with_budget(&single, 2, &mut rng, 1000),
            Err(CspError::RejectionBudget(1000))
        );
    }

    #[test]
    fn geometry_examples() {
        let inst = Lin3Instance::new(3, vec![eq(0, 1, 2, 1)], None).unwrap();
        let w = inst.block(vec![0]).unwrap();
        let u = VariableBlock { var_ids: vec![1] };
        let g = block_geometry(&w, &u, &inst).unwrap();
        assert_eq!(g.h[0].coords(), vec![1, 1, 1, 1]);
        assert_eq!(g.h_w.coords(), vec![0, 0, 0, 1]);
        assert_eq!(g.pi(0b0010), 1);
        assert_eq!(g.pi_inv(1), 0b0010);

        let inst0 = Lin3Instance::new(3, vec![eq(0, 1, 2, 0)], None).unwrap();
        let g0 = block_geometry(&inst0.block(vec![0]).unwrap(), &u, &inst0).unwrap();
        assert_eq!(g0.h[0].coords(), vec![1, 1, 1, 0]);

        let bad_u = VariableBlock { var_ids: vec![5] };
        assert_eq!(
            block_geometry(&w, &bad_u, &inst),
            Err(CspError::InconsistentBlocks)
        );
    }

    #[test]
    fn geometry_dimension_exhaustive_small() {
        let mut rng = stage_rng(4, "geom");
        let inst = Lin3Instance::random(12, 16, false, &mut rng).unwrap();
        for r in 1..=3 {
            for _ in 0..30 {
                let (w, u) = sample_round(&inst, r, &mut rng).unwrap();
                let g = block_geometry(&w, &u, &inst).unwrap();
                assert_eq!(g.subspace.dim(), r);
                for x in 0..(1u32 << g.width()) {
                    assert_eq!(
                        crate::gf2::dot_bits(g.h_w.bits(), x) as u32,
                        (x >> (3 * r)) & 1
                    );
                }
                for z in 0..(1u32 << r) {
                    assert_eq!(g.pi(g.pi_inv(z)), z);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn honest_provers_pass_on_satisfied_blocks(seed in any::<u64>(), r in 1usize..=3) {
            let mut rng = stage_rng(seed, "2p1r");
            let inst = Lin3Instance::random(15, 20, false, &mut rng).unwrap();
            let sigma: Vec<u8> = (0..15).map(|_| rng.random_range(0..2u8)).collect();
            for _ in 0..20 {
                let (w, u) = sample_round(&inst, r, &mut rng).unwrap();
                let accepted = verifier_accepts(
                    &inst, &w, &u,
                    &prover2_answer(&w, &sigma),
                    &prover1_answer(&u, &sigma),
                ).unwrap();
                if w.is_satisfied_by(&inst, &sigma) {
                    prop_assert!(accepted);
                } else {
                    prop_assert!(!accepted);
                }
            }
        }
    }
}
