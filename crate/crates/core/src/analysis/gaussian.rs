//! Standard normal cdf/quantile, bivariate normal orthant probabilities
//! and the two Gaussian stability quantities Γ̲_ρ, Γ̄_ρ.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{PI, SQRT_2};

use super::AnalysisError;

const QUAD_TOL: f64 = 1e-8;
const MAX_DEPTH: u32 = 40;
const LOWER_CUTOFF: f64 = -12.0;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Acklam's rational approximation, refined by one Newton step.
pub fn norm_inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let pdf = norm_pdf(x);
    if pdf > 0.0 {
        x - (norm_cdf(x) - p) / pdf
    } else {
        x
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol / 2.0, depth - 1) + adaptive(f, m, b, tol / 2.0, depth - 1)
}

/// P[X ≤ a, Y ≤ b] for standard normals with correlation ρ ∈ (−1, 1).
pub fn bvn_cdf(a: f64, b: f64, rho: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return norm_cdf(b);
    }
    if b == f64::INFINITY {
        return norm_cdf(a);
    }
    if a <= LOWER_CUTOFF {
        return 0.0;
    }
    let s = (1.0 - rho * rho).sqrt();
    let integrand = |x: f64| norm_pdf(x) * norm_cdf((b - rho * x) / s);
    adaptive(&integrand, LOWER_CUTOFF, a, QUAD_TOL * 1e-2, MAX_DEPTH).clamp(0.0, 1.0)
}

fn check(rho: f64, mu: f64, nu: f64) -> Result<(), AnalysisError> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(AnalysisError::OutOfRange("rho", rho));
    }
    for (name, v) in [("mu", mu), ("nu", nu)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(AnalysisError::OutOfRange(name, v));
        }
    }
    Ok(())
}

/// Γ̲_ρ(μ, ν) = P[X ≤ Φ⁻¹(μ), Y ≥ Φ⁻¹(1−ν)].
pub fn gamma_lower(rho: f64, mu: f64, nu: f64) -> Result<f64, AnalysisError> {
    check(rho, mu, nu)?;
    if mu == 0.0 || nu == 0.0 {
        return Ok(0.0);
    }
    if mu == 1.0 {
        return Ok(nu);
    }
    if nu == 1.0 {
        return Ok(mu);
    }
    let a = norm_inv_cdf(mu);
    let c = norm_inv_cdf(1.0 - nu);
    Ok((mu - bvn_cdf(a, c, rho)).max(0.0))
}

/// Γ̄_ρ(μ, ν) = P[X ≤ Φ⁻¹(μ), Y ≤ Φ⁻¹(ν)].
pub fn gamma_upper(rho: f64, mu: f64, nu: f64) -> Result<f64, AnalysisError> {
    check(rho, mu, nu)?;
    if mu == 0.0 || nu == 0.0 {
        return Ok(0.0);
    }
    if mu == 1.0 {
        return Ok(nu);
    }
    if nu == 1.0 {
        return Ok(mu);
    }
    Ok(bvn_cdf(norm_inv_cdf(mu), norm_inv_cdf(nu), rho))
}

pub fn gamma_bounds(rho: f64, mu: f64, nu: f64) -> Result<(f64, f64), AnalysisError> {
    Ok((gamma_lower(rho, mu, nu)?, gamma_upper(rho, mu, nu)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_roundtrip() {
        for &p in &[1e-10, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6] {
            let x = norm_inv_cdf(p);
            assert!((norm_cdf(x) - p).abs() < 1e-9 * p.max(1e-3), "{p}");
        }
        assert_eq!(norm_inv_cdf(0.5), 0.0);
    }

    #[test]
    fn orthant_closed_form() {
        for i in 0..19 {
            let rho = -0.9 + 0.1 * i as f64;
            let want = 0.25 + rho.asin() / (2.0 * PI);
            assert!((bvn_cdf(0.0, 0.0, rho) - want).abs() < 1e-9, "{rho}");
        }
    }

    #[test]
    fn independence_and_limits() {
        for &(mu, nu) in &[(0.1, 0.7), (0.5, 0.5), (0.93, 0.2)] {
            let (lo, hi) = gamma_bounds(0.0, mu, nu).unwrap();
            assert!((lo - mu * nu).abs() < 1e-8);
            assert!((hi - mu * nu).abs() < 1e-8);
        }
        assert_eq!(gamma_bounds(0.5, 0.0, 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(gamma_bounds(0.5, 1.0, 0.3).unwrap(), (0.3, 0.3));
        assert_eq!(gamma_bounds(0.5, 0.4, 1.0).unwrap(), (0.4, 0.4));
        assert!(gamma_bounds(1.0, 0.4, 0.4).is_err());
        assert!(gamma_bounds(0.2, 1.4, 0.4).is_err());
    }

    #[test]
    fn complement_identity() {
        for i in 1..10 {
            for j in 1..10 {
                let (mu, nu) = (i as f64 / 10.0, j as f64 / 10.0);
                let s = gamma_lower(0.6, mu, nu).unwrap() + gamma_upper(0.6, mu, 1.0 - nu).unwrap();
                assert!((s - mu).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn monotone_in_rho() {
        for i in 1..10 {
            for j in 1..10 {
                let (mu, nu) = (i as f64 / 10.0, j as f64 / 10.0);
                let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
                for k in 0..10 {
                    let (lo, hi) = gamma_bounds(k as f64 / 10.0, mu, nu).unwrap();
                    assert!(lo <= prev.0 + 1e-9 && hi >= prev.1 - 1e-9);
                    prev = (lo, hi);
                }
            }
        }
    }
}
