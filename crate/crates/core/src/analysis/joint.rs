use nalgebra::DMatrix;

use super::{mixed_radix_index, AnalysisError};

const PROB_TOL: f64 = 1e-12;

/// A finite joint distribution over a product of factors. Atom tuples are
/// packed in mixed radix with factor 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteJointDist {
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

/// Marginal of side A, marginal of side B, joint table.
type PairTable = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

impl FiniteJointDist {
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self, AnalysisError> {
        let total: usize = sizes.iter().product();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(AnalysisError::InvalidDistribution("empty factor".into()));
        }
        if probs.len() != total {
            return Err(AnalysisError::InvalidDistribution(format!(
                "{} probabilities for {total} tuples",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(AnalysisError::InvalidDistribution(
                "negative or non-finite mass".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL * total.max(1) as f64 {
            return Err(AnalysisError::InvalidDistribution(format!(
                "masses sum to {sum}"
            )));
        }
        Ok(Self { sizes, probs })
    }

    pub fn from_fn(
        sizes: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self, AnalysisError> {
        let total: usize = sizes.iter().product();
        let mut digits = vec![0; sizes.len()];
        let probs = (0..total)
            .map(|idx| {
                super::mixed_radix_digits(idx, &sizes, &mut digits);
                f(&digits)
            })
            .collect();
        Self::new(sizes, probs)
    }

    /// Product distribution of independent factors.
    pub fn independent(marginals: &[Vec<f64>]) -> Result<Self, AnalysisError> {
        let sizes: Vec<usize> = marginals.iter().map(Vec::len).collect();
        Self::from_fn(sizes, |d| {
            d.iter().zip(marginals).map(|(&a, m)| m[a]).product()
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.probs[mixed_radix_index(tuple, &self.sizes)]
    }

    /// Smallest positive atom.
    pub fn min_atom(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Joint law of the given factors, packed in their listed order.
    pub fn marginal(&self, factors: &[usize]) -> Vec<f64> {
        let sub: Vec<usize> = factors.iter().map(|&f| self.sizes[f]).collect();
        let mut out = vec![0.0; sub.iter().product()];
        let mut digits = vec![0; self.sizes.len()];
        let mut picked = vec![0; factors.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            super::mixed_radix_digits(idx, &self.sizes, &mut digits);
            for (k, &f) in factors.iter().enumerate() {
                picked[k] = digits[f];
            }
            out[mixed_radix_index(&picked, &sub)] += p;
        }
        out
    }

    /// Joint mass table between two disjoint groups of factors.
    fn pair_table(&self, side_a: &[usize], side_b: &[usize]) -> Result<PairTable, AnalysisError> {
        let nf = self.sizes.len();
        let mut seen = vec![false; nf];
        for &f in side_a.iter().chain(side_b) {
            if f >= nf || seen[f] {
                return Err(AnalysisError::InvalidDistribution(
                    "sides must be disjoint factor lists".into(),
                ));
            }
            seen[f] = true;
        }
        if side_a.is_empty() || side_b.is_empty() {
            return Err(AnalysisError::InvalidDistribution("empty side".into()));
        }
        let sa: Vec<usize> = side_a.iter().map(|&f| self.sizes[f]).collect();
        let sb: Vec<usize> = side_b.iter().map(|&f| self.sizes[f]).collect();
        let (na, nb) = (sa.iter().product::<usize>(), sb.iter().product::<usize>());
        let mut table = vec![vec![0.0; nb]; na];
        let mut digits = vec![0; nf];
        let (mut da, mut db) = (vec![0; sa.len()], vec![0; sb.len()]);
        for (idx, &p) in self.probs.iter().enumerate() {
            super::mixed_radix_digits(idx, &self.sizes, &mut digits);
            for (k, &f) in side_a.iter().enumerate() {
                da[k] = digits[f];
            }
            for (k, &f) in side_b.iter().enumerate() {
                db[k] = digits[f];
            }
            table[mixed_radix_index(&da, &sa)][mixed_radix_index(&db, &sb)] += p;
        }
        let mu_a: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
        let mu_b: Vec<f64> = (0..nb)
            .map(|j| table.iter().map(|row| row[j]).sum())
            .collect();
        Ok((mu_a, mu_b, table))
    }

    /// Maximal correlation ρ(side_a, side_b): the second singular value of
    /// μ(a,b)/√(μ(a)μ(b)) after dropping zero-mass atoms.
    pub fn maximal_correlation(
        &self,
        side_a: &[usize],
        side_b: &[usize],
    ) -> Result<f64, AnalysisError> {
        let (mu_a, mu_b, table) = self.pair_table(side_a, side_b)?;
        let keep_a: Vec<usize> = (0..mu_a.len()).filter(|&i| mu_a[i] > 0.0).collect();
        let keep_b: Vec<usize> = (0..mu_b.len()).filter(|&j| mu_b[j] > 0.0).collect();
        if keep_a.is_empty() || keep_b.is_empty() {
            return Err(AnalysisError::Degenerate);
        }
        if keep_a.len() == 1 || keep_b.len() == 1 {
            return Ok(0.0);
        }
        let q = DMatrix::from_fn(keep_a.len(), keep_b.len(), |r, c| {
            let (i, j) = (keep_a[r], keep_b[c]);
            (table[i][j] - mu_a[i] * mu_b[j]) / (mu_a[i] * mu_b[j]).sqrt()
        });
        let sv = q.singular_values();
        Ok(sv.iter().copied().fold(0.0, f64::max).min(1.0))
    }

    /// Correlation of k spaces: max over i of ρ(all other groups, group i).
    pub fn multi_correlation(&self, groups: &[Vec<usize>]) -> Result<f64, AnalysisError> {
        let mut best: f64 = 0.0;
        for i in 0..groups.len() {
            let rest: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, g)| g.iter().copied())
                .collect();
            best = best.max(self.maximal_correlation(&rest, &groups[i])?);
        }
        Ok(best)
    }

    /// Whether the bipartite support graph between the two sides is
    /// connected (on atoms of positive marginal mass).
    pub fn support_connected(
        &self,
        side_a: &[usize],
        side_b: &[usize],
    ) -> Result<bool, AnalysisError> {
        let (mu_a, mu_b, table) = self.pair_table(side_a, side_b)?;
        let na = mu_a.len();
        let nodes: Vec<usize> = (0..na)
            .filter(|&i| mu_a[i] > 0.0)
            .chain((0..mu_b.len()).filter(|&j| mu_b[j] > 0.0).map(|j| na + j))
            .collect();
        let mut parent: Vec<usize> = (0..na + mu_b.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                if m > 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, na + j));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, nodes[0]);
        Ok(nodes.iter().all(|&n| find(&mut parent, n) == root))
    }

    /// Tensor product; factors of `other` are appended after ours.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut sizes = self.sizes.clone();
        sizes.extend(&other.sizes);
        let n = self.probs.len();
        let probs = (0..n * other.probs.len())
            .map(|idx| self.probs[idx % n] * other.probs[idx / n])
            .collect();
        Self { sizes, probs }
    }
}
