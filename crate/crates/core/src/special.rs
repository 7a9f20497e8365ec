//! Special functions, gradient norms induced by success probabilities, and
//! the analytical success-probability bounds.
//!
//! The regularized incomplete beta function is only needed at integer
//! symmetric parameters, where it equals a binomial tail probability; it is
//! computed through that identity instead of continued fractions. Bound
//! functions return raw values even when vacuous (< 1/2) so callers can see
//! when a bound is uninformative.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Per-coordinate success probabilities rho_i in [0, 1], optionally with
/// Monte-Carlo confidence half-widths and a defined-mask (coordinates with
/// zero true gradient carry a placeholder probability).
#[derive(Debug, Clone)]
pub struct SuccessProbabilityVector {
    pub probs: Vec<f64>,
    pub half_widths: Option<Vec<f64>>,
    pub defined: Vec<bool>,
}

impl SuccessProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "probability {p} at coordinate {i} outside [0, 1]"
                )));
            }
        }
        let defined = vec![true; probs.len()];
        Ok(SuccessProbabilityVector {
            probs,
            half_widths: None,
            defined,
        })
    }

    pub fn constant(p: f64, dim: usize) -> Result<Self> {
        Self::new(vec![p; dim])
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }
}

/// Per-coordinate sample moments: mean, unbiased variance and third
/// absolute central moment (nu^3, possibly +inf).
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimates {
    pub mean: f64,
    pub variance: f64,
    pub third_central: f64,
    pub sample_count: usize,
}

/// rho-norm: sum_i (2 rho_i - 1) |g_i|. May be negative when some
/// rho_i < 1/2; that is the diagnostic for an SPB violation.
pub fn rho_norm(g: &DenseVector, rho: &SuccessProbabilityVector) -> Result<f64> {
    g.check_dim(rho.dim())?;
    Ok(g.iter()
        .zip(&rho.probs)
        .map(|(&gi, &p)| (2.0 * p - 1.0) * gi.abs())
        .sum())
}

/// l^{1,2} norm: sum_i g_i^2 / (|g_i| + sqrt(3) sigma_i); the 0/0
/// coordinate term is 0 by continuity.
pub fn l12_norm(g: &DenseVector, sigma: &DenseVector) -> Result<f64> {
    g.check_dim(sigma.dim())?;
    let mut total = 0.0;
    for (i, (&gi, &si)) in g.iter().zip(sigma.iter()).enumerate() {
        if si < 0.0 {
            return Err(Error::domain(format!(
                "negative sigma {si} at coordinate {i}"
            )));
        }
        if gi != 0.0 {
            total += gi * gi / (gi.abs() + SQRT_3 * si);
        }
    }
    Ok(total)
}

/// Tighter second-order variant: sum_i (1 - 1/(1 + z + z^2)) |g_i| with
/// z = |g_i| / (sqrt(3) sigma_i); always >= l12_norm.
pub fn improved_l12_norm(g: &DenseVector, sigma: &DenseVector) -> Result<f64> {
    g.check_dim(sigma.dim())?;
    let mut total = 0.0;
    for (i, (&gi, &si)) in g.iter().zip(sigma.iter()).enumerate() {
        if si < 0.0 {
            return Err(Error::domain(format!(
                "negative sigma {si} at coordinate {i}"
            )));
        }
        if gi == 0.0 {
            continue;
        }
        if si == 0.0 {
            total += gi.abs();
        } else {
            let z = gi.abs() / (SQRT_3 * si);
            total += (1.0 - 1.0 / (1.0 + z + z * z)) * gi.abs();
        }
    }
    Ok(total)
}

/// erf(x) = (2/sqrt(pi)) int_0^x e^{-t^2} dt, absolute error below 1e-14.
///
/// Uses the positive-term series
/// erf(x) = (2/sqrt(pi)) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!,
/// which is free of cancellation; erf saturates to +/-1 beyond |x| = 6 at
/// double precision.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x >= 6.0 {
        return 1.0;
    }
    let mut term = x;
    let mut sum = x;
    let mut n = 1u32;
    loop {
        term *= 2.0 * x * x / (2.0 * n as f64 + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        n += 1;
    }
    2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// P(Binomial(M, p) >= l), summed from the shorter tail.
pub fn binomial_tail(m: u64, p: f64, l: i64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p = {p} outside [0, 1]")));
    }
    if l <= 0 {
        return Ok(1.0);
    }
    let l = l as u64;
    if l > m {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let ln_m = ln_factorial(m);
    let pmf = |j: u64| -> f64 {
        (ln_m - ln_factorial(j) - ln_factorial(m - j)
            + j as f64 * p.ln()
            + (m - j) as f64 * (1.0 - p).ln())
        .exp()
    };
    // Sum whichever side has fewer terms.
    if l <= m - l + 1 {
        let lower: f64 = (0..l).map(pmf).sum();
        Ok((1.0 - lower).clamp(0.0, 1.0))
    } else {
        let upper: f64 = (l..=m).map(pmf).sum();
        Ok(upper.clamp(0.0, 1.0))
    }
}

/// I(p; l, l) at integer symmetric parameters, via the binomial-tail
/// identity I(p; l, M - l + 1) = P(Binomial(M, p) >= l) with M = 2l - 1.
pub fn reg_inc_beta_symmetric(p: f64, l: u64) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("l must be positive"));
    }
    binomial_tail(2 * l - 1, p, l as i64)
}

/// Number of votes needed for a majority among M nodes: l = floor((M+1)/2).
pub fn majority_threshold(m: u64) -> u64 {
    m.div_ceil(2)
}

/// rho_M norm: sum_i (2 I(rho_i; l, l) - 1) |g_i| with l = floor((M+1)/2).
pub fn rho_m_norm(g: &DenseVector, rho: &SuccessProbabilityVector, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("node count M must be positive"));
    }
    g.check_dim(rho.dim())?;
    let l = majority_threshold(m);
    let mut total = 0.0;
    for (&gi, &p) in g.iter().zip(&rho.probs) {
        total += (2.0 * reg_inc_beta_symmetric(p, l)? - 1.0) * gi.abs();
    }
    Ok(total)
}

/// Hoeffding lower-bound factor: 1 - exp(-(2 rho_min - 1)^2 l).
pub fn hoeffding_speedup_bound(rho_min: f64, m: u64) -> Result<f64> {
    if rho_min <= 0.5 || rho_min > 1.0 {
        return Err(Error::domain(format!(
            "rho_min = {rho_min} outside (1/2, 1]"
        )));
    }
    if m == 0 {
        return Err(Error::domain("node count M must be positive"));
    }
    let l = majority_threshold(m) as f64;
    let t = 2.0 * rho_min - 1.0;
    Ok(1.0 - (-t * t * l).exp())
}

/// Gauss-inequality success-probability bound for unimodal symmetric noise:
/// 1/2 + |g| / (2 (|g| + sqrt(3) sigma)).
pub fn gauss_spb_bound(abs_g: f64, sigma: f64) -> Result<f64> {
    check_gauss_args(abs_g, sigma)?;
    if sigma == 0.0 {
        return Ok(1.0);
    }
    Ok(0.5 + abs_g / (2.0 * (abs_g + SQRT_3 * sigma)))
}

/// Second-order refinement: 1 - (1/2) / (1 + z + z^2), z = |g| / (sqrt(3) sigma).
pub fn improved_gauss_spb_bound(abs_g: f64, sigma: f64) -> Result<f64> {
    check_gauss_args(abs_g, sigma)?;
    if sigma == 0.0 {
        return Ok(1.0);
    }
    let z = abs_g / (SQRT_3 * sigma);
    Ok(1.0 - 0.5 / (1.0 + z + z * z))
}

fn check_gauss_args(abs_g: f64, sigma: f64) -> Result<()> {
    if abs_g < 0.0 || sigma < 0.0 {
        return Err(Error::domain("|g| and sigma must be nonnegative"));
    }
    if abs_g == 0.0 && sigma == 0.0 {
        return Err(Error::domain("|g| and sigma cannot both be zero"));
    }
    Ok(())
}

/// Chebyshev mini-batch bound: 1 - sigma^2 / (tau mu^2). May be <= 1/2
/// (uninformative) and is returned as-is.
pub fn chebyshev_spb_bound(mu: f64, sigma2: f64, tau: u64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::domain("mu must be nonzero"));
    }
    if sigma2 < 0.0 {
        return Err(Error::domain("sigma^2 must be nonnegative"));
    }
    if tau == 0 {
        return Err(Error::domain("tau must be positive"));
    }
    Ok(1.0 - sigma2 / (tau as f64 * mu * mu))
}

/// Berry-Esseen/CLT bound:
/// (1/2) (1 + erf(|mu| sqrt(tau) / (sqrt(2) sigma)) - nu^3 / (sigma^3 sqrt(tau))).
pub fn clt_spb_bound(mu: f64, sigma: f64, nu: f64, tau: u64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::domain("mu must be nonzero"));
    }
    if sigma <= 0.0 {
        return Err(Error::domain("sigma must be positive"));
    }
    if nu < 0.0 {
        return Err(Error::domain("nu must be nonnegative"));
    }
    if tau == 0 {
        return Err(Error::domain("tau must be positive"));
    }
    let t = tau as f64;
    Ok(0.5
        * (1.0 + erf(mu.abs() * t.sqrt() / (std::f64::consts::SQRT_2 * sigma))
            - nu.powi(3) / (sigma.powi(3) * t.sqrt())))
}

/// Mini-batch size above which SPB is guaranteed:
/// 2 min(sigma^2 / mu^2, nu^3 / (|mu| sigma^2)).
pub fn required_minibatch(moments: &MomentEstimates) -> Result<f64> {
    if moments.mean == 0.0 {
        return Err(Error::domain("mean must be nonzero"));
    }
    if moments.variance == 0.0 {
        return Ok(0.0);
    }
    let mu = moments.mean;
    let first = moments.variance / (mu * mu);
    if moments.third_central.is_infinite() {
        return Ok(2.0 * first);
    }
    let second = moments.third_central / (mu.abs() * moments.variance);
    Ok(2.0 * first.min(second))
}
