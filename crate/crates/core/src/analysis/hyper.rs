use serde::Serialize;

use super::{mixed_radix_digits, mixed_radix_index, AnalysisError, FiniteJointDist, ProductFn};
use crate::gf2::{fourier_transform, RealTable};

pub const MAX_REVERSE_HYPER_N: usize = 14;
const NOISE_GAP_SUPPORT_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReverseHyperReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compare Pr[y ∈ A, y′ ∈ B] for a ρ-correlated pair on the uniform cube
/// with exp(−(a²+b²+2ρab)/(2(1−ρ²))), where μ(A) = e^{−a²/2} and
/// μ(B) = e^{−b²/2}. Sets are indicator vectors over {0,1}^n.
pub fn reverse_hyper_check(
    a: &[bool],
    b: &[bool],
    rho: f64,
) -> Result<ReverseHyperReport, AnalysisError> {
    if a.len() != b.len() || !a.len().is_power_of_two() {
        return Err(AnalysisError::DimensionMismatch(
            "sets must be indicators on one cube".into(),
        ));
    }
    let n = a.len().trailing_zeros() as usize;
    if n > MAX_REVERSE_HYPER_N {
        return Err(AnalysisError::SizeCap {
            size: n,
            cap: MAX_REVERSE_HYPER_N,
        });
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(AnalysisError::OutOfRange("rho", rho));
    }
    if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
        return Err(AnalysisError::EmptySet);
    }
    let coeffs = |s: &[bool]| {
        let t = RealTable::new(n, s.iter().map(|&x| x as u8 as f64).collect()).unwrap();
        fourier_transform(&t).coeffs().to_vec()
    };
    let (fa, fb) = (coeffs(a), coeffs(b));
    let lhs: f64 = (0..a.len())
        .map(|s| fa[s] * fb[s] * rho.powi((s as u32).count_ones() as i32))
        .sum();
    let radius = |mass: f64| (-2.0 * mass.ln()).max(0.0).sqrt();
    let (ra, rb) = (radius(fa[0]), radius(fb[0]));
    let rhs = (-(ra * ra + rb * rb + 2.0 * rho * ra * rb) / (2.0 * (1.0 - rho * rho))).exp();
    Ok(ReverseHyperReport {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseGapReport {
    pub gamma: f64,
    pub expectation: f64,
    pub noisy_expectation: f64,
    /// |E[∏ f_j] − E[∏ T_{1−γ} f_j]|
    pub gap: f64,
    /// Σ_j √Var[f_j] · √Var[∏_{j′<j} T f_{j′} ∏_{j′>j} f_{j′}]
    pub bound_side: f64,
}

/// Both sides of the noise-stability gap inequality for k functions on n
/// independent copies of the k-party correlated space `coord`. Function j
/// lives on n copies of factor j, coordinate i being copy i.
pub fn noise_gap_report(
    coord: &FiniteJointDist,
    fs: &[ProductFn],
    gamma: f64,
) -> Result<NoiseGapReport, AnalysisError> {
    let k = coord.sizes().len();
    if fs.len() != k {
        return Err(AnalysisError::DimensionMismatch(format!(
            "{} functions for {k} correlated factors",
            fs.len()
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(AnalysisError::OutOfRange("gamma", gamma));
    }
    let n = fs[0].n();
    for (j, f) in fs.iter().enumerate() {
        let marg = coord.marginal(&[j]);
        if f.n() != n
            || f.measures().iter().any(|m| {
                m.len() != marg.len() || m.iter().zip(&marg).any(|(x, y)| (x - y).abs() > 1e-9)
            })
        {
            return Err(AnalysisError::DimensionMismatch(format!(
                "function {j} does not live on the marginal of factor {j}"
            )));
        }
    }
    let atoms: Vec<(Vec<usize>, f64)> = {
        let mut d = vec![0; k];
        coord
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(idx, &p)| {
                mixed_radix_digits(idx, coord.sizes(), &mut d);
                (d.clone(), p)
            })
            .collect()
    };
    let total = atoms
        .len()
        .checked_pow(n as u32)
        .filter(|&t| t <= NOISE_GAP_SUPPORT_CAP)
        .ok_or(AnalysisError::SizeCap {
            size: usize::MAX,
            cap: NOISE_GAP_SUPPORT_CAP,
        })?;
    let noisy: Vec<ProductFn> = fs
        .iter()
        .map(|f| f.bonami_beckner(1.0 - gamma))
        .collect::<Result<_, _>>()?;
    let sizes: Vec<Vec<usize>> = fs.iter().map(ProductFn::sizes).collect();

    // Moments of the k+2 product functions needed below.
    let mut e_plain = 0.0;
    let mut e_noisy = 0.0;
    let mut mixed = vec![(0.0, 0.0); k];
    let mut pick = vec![vec![0usize; n]; k];
    let mut sel = vec![0usize; n];
    for t in 0..total {
        let mut rem = t;
        let mut mass = 1.0;
        for s in sel.iter_mut() {
            *s = rem % atoms.len();
            rem /= atoms.len();
            mass *= atoms[*s].1;
        }
        for j in 0..k {
            for i in 0..n {
                pick[j][i] = atoms[sel[i]].0[j];
            }
        }
        let idx: Vec<usize> = (0..k)
            .map(|j| mixed_radix_index(&pick[j], &sizes[j]))
            .collect();
        let plain: Vec<f64> = (0..k).map(|j| fs[j].values()[idx[j]]).collect();
        let soft: Vec<f64> = (0..k).map(|j| noisy[j].values()[idx[j]]).collect();
        e_plain += mass * plain.iter().product::<f64>();
        e_noisy += mass * soft.iter().product::<f64>();
        for (j, m) in mixed.iter_mut().enumerate() {
            let p: f64 = soft[..j].iter().product::<f64>() * plain[j + 1..].iter().product::<f64>();
            m.0 += mass * p;
            m.1 += mass * p * p;
        }
    }
    let bound_side = (0..k)
        .map(|j| {
            let (m1, m2) = mixed[j];
            fs[j].variance().sqrt() * (m2 - m1 * m1).max(0.0).sqrt()
        })
        .sum();
    Ok(NoiseGapReport {
        gamma,
        expectation: e_plain,
        noisy_expectation: e_noisy,
        gap: (e_plain - e_noisy).abs(),
        bound_side,
    })
}
