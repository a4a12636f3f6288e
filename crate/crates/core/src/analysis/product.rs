use super::{mixed_radix_digits, AnalysisError};
use crate::gf2::{fourier_transform, RealTable};

/// Largest product space a [`ProductFn`] may live on.
pub const MAX_PRODUCT_SIZE: usize = 1_000_000;
/// Largest product space accepted by [`ProductFn::efron_stein`].
pub const MAX_EFRON_STEIN_SIZE: usize = 100_000;
const EFRON_STEIN_WORK_CAP: usize = 10_000_000;

/// A real function on a finite product probability space. Points are packed
/// in mixed radix with coordinate 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFn {
    measures: Vec<Vec<f64>>,
    values: Vec<f64>,
}

/// Efron–Stein components f_S, indexed by coordinate subset bitmask.
#[derive(Clone, Debug)]
pub struct EfronSteinParts {
    pub parts: Vec<ProductFn>,
}

impl ProductFn {
    pub fn new(measures: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, AnalysisError> {
        let size = measures
            .iter()
            .try_fold(1usize, |acc, m| acc.checked_mul(m.len()))
            .unwrap_or(usize::MAX);
        if size > MAX_PRODUCT_SIZE {
            return Err(AnalysisError::SizeCap {
                size,
                cap: MAX_PRODUCT_SIZE,
            });
        }
        for m in &measures {
            let s: f64 = m.iter().sum();
            if m.is_empty()
                || m.iter().any(|p| *p < 0.0 || !p.is_finite())
                || (s - 1.0).abs() > 1e-12
            {
                return Err(AnalysisError::InvalidDistribution(
                    "coordinate measure is not a probability vector".into(),
                ));
            }
        }
        if values.len() != size {
            return Err(AnalysisError::DimensionMismatch(format!(
                "{} values for {size} points",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::InvalidDistribution(
                "non-finite value".into(),
            ));
        }
        Ok(Self { measures, values })
    }

    pub fn from_fn(
        measures: Vec<Vec<f64>>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self, AnalysisError> {
        let sizes: Vec<usize> = measures.iter().map(Vec::len).collect();
        let size = sizes
            .iter()
            .try_fold(1usize, |a, &s| a.checked_mul(s))
            .unwrap_or(usize::MAX);
        if size > MAX_PRODUCT_SIZE {
            return Err(AnalysisError::SizeCap {
                size,
                cap: MAX_PRODUCT_SIZE,
            });
        }
        let mut d = vec![0; sizes.len()];
        let values = (0..size)
            .map(|idx| {
                mixed_radix_digits(idx, &sizes, &mut d);
                f(&d)
            })
            .collect();
        Self::new(measures, values)
    }

    /// A function on the uniform cube {−1,1}^n; bit i of the index is
    /// coordinate i, with bit 0 standing for +1.
    pub fn uniform_cube(n: usize, values: Vec<f64>) -> Result<Self, AnalysisError> {
        Self::new(vec![vec![0.5, 0.5]; n], values)
    }

    pub fn n(&self) -> usize {
        self.measures.len()
    }

    pub fn measures(&self) -> &[Vec<f64>] {
        &self.measures
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.measures.iter().map(Vec::len).collect()
    }

    fn masses(&self) -> Vec<f64> {
        let sizes = self.sizes();
        let mut d = vec![0; self.n()];
        (0..self.values.len())
            .map(|i| {
                mixed_radix_digits(i, &sizes, &mut d);
                d.iter().zip(&self.measures).map(|(&a, m)| m[a]).product()
            })
            .collect()
    }

    pub fn expectation(&self) -> f64 {
        self.masses()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v)
            .sum()
    }

    pub fn inner(&self, other: &Self) -> Result<f64, AnalysisError> {
        self.same_space(other)?;
        Ok(self
            .masses()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(m, (a, b))| m * a * b)
            .sum())
    }

    pub fn norm2(&self) -> f64 {
        self.inner(self).unwrap().max(0.0).sqrt()
    }

    pub fn variance(&self) -> f64 {
        let e = self.expectation();
        (self.inner(self).unwrap() - e * e).max(0.0)
    }

    fn same_space(&self, other: &Self) -> Result<(), AnalysisError> {
        if self.measures != other.measures {
            return Err(AnalysisError::DimensionMismatch(
                "functions live on different spaces".into(),
            ));
        }
        Ok(())
    }

    fn map_values(&self, values: Vec<f64>) -> Self {
        Self {
            measures: self.measures.clone(),
            values,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AnalysisError> {
        self.same_space(other)?;
        Ok(self.map_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self, AnalysisError> {
        self.same_space(other)?;
        Ok(self.map_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Replace coordinate i by its average under μ_i (weighted by `keep`
    /// for the original value): (1−keep)·E_i f + keep·f.
    fn smooth_coordinate(&self, i: usize, keep: f64) -> Vec<f64> {
        let sizes = self.sizes();
        let stride: usize = sizes[..i].iter().product();
        let len = sizes[i];
        let mut out = self.values.clone();
        for base in 0..self.values.len() {
            if !(base / stride).is_multiple_of(len) {
                continue;
            }
            let avg: f64 = (0..len)
                .map(|a| self.measures[i][a] * self.values[base + a * stride])
                .sum();
            for a in 0..len {
                let idx = base + a * stride;
                out[idx] = keep * self.values[idx] + (1.0 - keep) * avg;
            }
        }
        out
    }

    /// E[f | all coordinates except i] with coordinate i averaged out.
    pub fn average_out(&self, i: usize) -> Self {
        self.map_values(self.smooth_coordinate(i, 0.0))
    }

    /// The Bonami–Beckner operator T_ρ: each coordinate is kept with
    /// probability ρ and resampled from its measure otherwise.
    pub fn bonami_beckner(&self, rho: f64) -> Result<Self, AnalysisError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(AnalysisError::OutOfRange("rho", rho));
        }
        let mut cur = self.clone();
        for i in 0..self.n() {
            cur = cur.map_values(cur.smooth_coordinate(i, rho));
        }
        Ok(cur)
    }

    /// Inf_i(f) = E_{x_{−i}} Var_{x_i} f.
    pub fn influence(&self, i: usize) -> f64 {
        let avg = self.average_out(i);
        let diff = self.sub(&avg).unwrap();
        diff.inner(&diff).unwrap().max(0.0)
    }

    pub fn influences(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.influence(i)).collect()
    }

    /// Fourier coefficients over the uniform cube, indexed by subset mask.
    pub fn fourier(&self) -> Result<Vec<f64>, AnalysisError> {
        if self
            .measures
            .iter()
            .any(|m| m.len() != 2 || (m[0] - 0.5).abs() > 1e-15)
        {
            return Err(AnalysisError::DimensionMismatch(
                "not the uniform cube".into(),
            ));
        }
        let table = RealTable::new(self.n(), self.values.clone())
            .map_err(|e| AnalysisError::DimensionMismatch(e.to_string()))?;
        Ok(fourier_transform(&table).coeffs().to_vec())
    }

    /// Efron–Stein decomposition by Möbius inversion of conditional means.
    pub fn efron_stein(&self) -> Result<EfronSteinParts, AnalysisError> {
        let n = self.n();
        let size = self.values.len();
        let work = size.saturating_mul(1usize.checked_shl(n as u32).unwrap_or(usize::MAX));
        if size > MAX_EFRON_STEIN_SIZE || work > EFRON_STEIN_WORK_CAP {
            return Err(AnalysisError::SizeCap {
                size: work.max(size),
                cap: EFRON_STEIN_WORK_CAP,
            });
        }
        let full = (1usize << n) - 1;
        // cond[T] = E[f | x_T]
        let mut cond: Vec<Option<Self>> = vec![None; 1 << n];
        cond[full] = Some(self.clone());
        for t in (0..full).rev() {
            let missing = (0..n).find(|&i| t >> i & 1 == 0).unwrap();
            let parent = cond[t | (1 << missing)]
                .as_ref()
                .unwrap()
                .average_out(missing);
            cond[t] = Some(parent);
        }
        let mut parts: Vec<Self> = cond.into_iter().map(Option::unwrap).collect();
        for i in 0..n {
            for s in 0..=full {
                if s >> i & 1 == 1 {
                    let lower = parts[s ^ (1 << i)].values.clone();
                    parts[s]
                        .values
                        .iter_mut()
                        .zip(lower)
                        .for_each(|(a, b)| *a -= b);
                }
            }
        }
        Ok(EfronSteinParts { parts })
    }
}

impl EfronSteinParts {
    pub fn part(&self, subset: usize) -> &ProductFn {
        &self.parts[subset]
    }

    /// ‖f_S‖₂² per subset.
    pub fn energies(&self) -> Vec<f64> {
        self.parts.iter().map(|p| p.inner(p).unwrap()).collect()
    }

    /// Smallest |S| carrying energy above `tol`, if any.
    pub fn min_weight(&self, tol: f64) -> Option<u32> {
        self.energies()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > tol)
            .map(|(s, _)| (s as u32).count_ones())
            .min()
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.parts[0].values.len()];
        for p in &self.parts {
            out.iter_mut().zip(&p.values).for_each(|(a, b)| *a += b);
        }
        out
    }
}
