//! Correlated finite probability spaces and functions on product spaces.

mod gaussian;
mod hyper;
mod joint;
mod product;

pub use gaussian::{
    bvn_cdf, gamma_bounds, gamma_lower, gamma_upper, norm_cdf, norm_inv_cdf, norm_pdf,
};
pub use hyper::{
    noise_gap_report, reverse_hyper_check, NoiseGapReport, ReverseHyperReport, MAX_REVERSE_HYPER_N,
};
pub use joint::FiniteJointDist;
pub use product::{EfronSteinParts, ProductFn, MAX_EFRON_STEIN_SIZE, MAX_PRODUCT_SIZE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("every atom on one side has zero mass")]
    Degenerate,
    #[error("{0} = {1} is out of range")]
    OutOfRange(&'static str, f64),
    #[error("size {size} exceeds the cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty set")]
    EmptySet,
}

pub(crate) fn mixed_radix_digits(mut idx: usize, sizes: &[usize], out: &mut [usize]) {
    for (d, &s) in out.iter_mut().zip(sizes) {
        *d = idx % s;
        idx /= s;
    }
}

pub(crate) fn mixed_radix_index(digits: &[usize], sizes: &[usize]) -> usize {
    digits
        .iter()
        .zip(sizes)
        .rev()
        .fold(0, |acc, (&d, &s)| acc * s + d)
}
