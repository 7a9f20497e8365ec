//! Monte-Carlo estimation and theorem checking: empirical success
//! probabilities with confidence half-widths, per-coordinate moment
//! estimates, rate-bound right-hand sides, and comparisons between
//! empirical probabilities and the analytical lower bounds.

use crate::error::{Error, Result};
use crate::optimizers::RunRecord;
use crate::problems::{Objective, Oracle};
use crate::rng::RandomSource;
use crate::special::{
    chebyshev_spb_bound, clt_spb_bound, gauss_spb_bound, improved_gauss_spb_bound, rho_norm,
    MomentEstimates, SuccessProbabilityVector,
};
use crate::vector::DenseVector;

/// Default confidence multiplier for Monte-Carlo half-widths.
pub const DEFAULT_Z: f64 = 3.0;

/// Comparison of one analytical lower bound against the empirical success
/// probability of a single coordinate.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: &'static str,
    pub coordinate: usize,
    pub bound: f64,
    pub empirical: f64,
    /// empirical + z * half_width - bound; nonnegative means the bound is
    /// respected within Monte-Carlo tolerance.
    pub margin: f64,
    pub pass: bool,
}

/// Everything measured at one probe point.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub point: DenseVector,
    pub gradient: DenseVector,
    pub rho_hat: SuccessProbabilityVector,
    pub moments: Vec<MomentEstimates>,
    pub sample_count: usize,
    pub bound_checks: Vec<BoundCheck>,
}

/// Empirical rho_i = fraction of oracle samples whose coordinate sign
/// matches the true gradient sign, with z * sqrt(rho(1-rho)/N)
/// half-widths. Coordinates with zero true gradient are flagged undefined
/// and carry probability 1/2 as a placeholder.
pub fn estimate_success_probabilities(
    oracle: &dyn Oracle,
    objective: &dyn Objective,
    x: &DenseVector,
    n: usize,
    rng: &mut RandomSource,
) -> Result<SuccessProbabilityVector> {
    estimate_success_probabilities_with_z(oracle, objective, x, n, rng, DEFAULT_Z)
}

pub fn estimate_success_probabilities_with_z(
    oracle: &dyn Oracle,
    objective: &dyn Objective,
    x: &DenseVector,
    n: usize,
    rng: &mut RandomSource,
    z: f64,
) -> Result<SuccessProbabilityVector> {
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    x.check_dim(objective.dim())?;
    let d = objective.dim();
    let g = objective.gradient(x);
    let mut hits = vec![0u64; d];
    for _ in 0..n {
        let s = oracle.sample(x, rng);
        for i in 0..d {
            if s[i].signum() == g[i].signum() && g[i] != 0.0 {
                hits[i] += 1;
            }
        }
    }
    let mut probs = Vec::with_capacity(d);
    let mut half_widths = Vec::with_capacity(d);
    let mut defined = Vec::with_capacity(d);
    for i in 0..d {
        if g[i] == 0.0 {
            probs.push(0.5);
            half_widths.push(0.0);
            defined.push(false);
        } else {
            let p = hits[i] as f64 / n as f64;
            probs.push(p);
            half_widths.push(z * (p * (1.0 - p) / n as f64).sqrt());
            defined.push(true);
        }
    }
    Ok(SuccessProbabilityVector {
        probs,
        half_widths: Some(half_widths),
        defined,
    })
}

/// Per-coordinate sample mean, unbiased variance, and third absolute
/// central moment of the oracle output at x.
pub fn estimate_moments(
    oracle: &dyn Oracle,
    x: &DenseVector,
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<MomentEstimates>> {
    if n < 2 {
        return Err(Error::domain("moment estimation needs at least 2 samples"));
    }
    let d = oracle.dim();
    let mut samples = vec![Vec::with_capacity(n); d];
    for _ in 0..n {
        let s = oracle.sample(x, rng);
        for i in 0..d {
            samples[i].push(s[i]);
        }
    }
    Ok(samples
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / n as f64;
            let ss: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
            let variance = ss / (n as f64 - 1.0);
            let third = col.iter().map(|&v| (v - mean).abs().powi(3)).sum::<f64>() / n as f64;
            MomentEstimates {
                mean,
                variance,
                third_central: third,
                sample_count: n,
            }
        })
        .collect())
}

/// Full probe at one point: success probabilities, moments, and
/// per-coordinate comparison against the Gauss, improved-Gauss, Chebyshev
/// and CLT lower bounds (bounds evaluated from the estimated moments, with
/// the true gradient magnitude for the Gauss pair).
pub fn probe_point(
    objective: &dyn Objective,
    oracle: &dyn Oracle,
    x: &DenseVector,
    n: usize,
    rng: &mut RandomSource,
) -> Result<ProbeReport> {
    let g = objective.gradient(x);
    let rho_hat = estimate_success_probabilities(oracle, objective, x, n, rng)?;
    let moments = estimate_moments(oracle, x, n, rng)?;
    let hw = rho_hat
        .half_widths
        .as_ref()
        .expect("estimator sets half-widths");
    let mut bound_checks = Vec::new();
    for i in 0..g.dim() {
        if !rho_hat.defined[i] {
            continue;
        }
        let sigma = moments[i].variance.sqrt();
        let nu = moments[i].third_central.cbrt();
        let mut push = |name: &'static str, bound: Result<f64>| {
            if let Ok(bound) = bound {
                let margin = rho_hat.probs[i] + hw[i] - bound;
                bound_checks.push(BoundCheck {
                    name,
                    coordinate: i,
                    bound,
                    empirical: rho_hat.probs[i],
                    margin,
                    pass: margin >= 0.0,
                });
            }
        };
        push("gauss", gauss_spb_bound(g[i].abs(), sigma));
        push(
            "improved-gauss",
            improved_gauss_spb_bound(g[i].abs(), sigma),
        );
        push(
            "chebyshev",
            chebyshev_spb_bound(moments[i].mean, moments[i].variance, 1),
        );
        push("clt", clt_spb_bound(moments[i].mean, sigma, nu, 1));
    }
    Ok(ProbeReport {
        point: x.clone(),
        gradient: g,
        rho_hat,
        moments,
        sample_count: n,
        bound_checks,
    })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {v} must be positive")))
    }
}

/// (f0 - f*) / (gamma0 sqrt(K)) + (3/2) gamma0 d Lbar ln(K) / sqrt(K);
/// the 1/sqrt(k+1) step-size rate. Natural logarithm.
pub fn rate_rhs_theorem1(
    f0_minus_fstar: f64,
    gamma0: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> Result<f64> {
    check_positive("gamma0", gamma0)?;
    check_positive("Lbar", l_bar)?;
    if f0_minus_fstar < 0.0 || d == 0 || k == 0 {
        return Err(Error::domain("need f0 - f* >= 0, d >= 1, K >= 1"));
    }
    let kf = k as f64;
    Ok(f0_minus_fstar / (gamma0 * kf.sqrt())
        + 1.5 * gamma0 * d as f64 * l_bar * kf.ln() / kf.sqrt())
}

/// (f0 - f*) / (gamma K) + gamma d Lbar / 2; constant-step neighborhood
/// bound for the average rho-norm of the gradient.
pub fn rate_rhs_constant_step(
    f0_minus_fstar: f64,
    gamma: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> Result<f64> {
    check_positive("gamma", gamma)?;
    check_positive("Lbar", l_bar)?;
    if f0_minus_fstar < 0.0 || d == 0 || k == 0 {
        return Err(Error::domain("need f0 - f* >= 0, d >= 1, K >= 1"));
    }
    Ok(f0_minus_fstar / (gamma * k as f64) + gamma * d as f64 * l_bar / 2.0)
}

/// (1/sqrt(K)) [ (f0 - f*) / gamma0 + gamma0 d Lbar ].
pub fn rate_rhs_theorem2(
    f0_minus_fstar: f64,
    gamma0: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> Result<f64> {
    check_positive("gamma0", gamma0)?;
    check_positive("Lbar", l_bar)?;
    if f0_minus_fstar < 0.0 || d == 0 || k == 0 {
        return Err(Error::domain("need f0 - f* >= 0, d >= 1, K >= 1"));
    }
    Ok((f0_minus_fstar / gamma0 + gamma0 * d as f64 * l_bar) / (k as f64).sqrt())
}

/// (1/K^{1/4}) [3 delta_f + 16 sigma_tilde + 8 L_tilde sqrt(d) +
/// 3 L_tilde d / sqrt(K)]; the momentum-method bound on the average
/// gradient l2-norm.
pub fn rate_rhs_theorem4(
    delta_f: f64,
    sigma_tilde: f64,
    l_tilde: f64,
    d: usize,
    k: usize,
) -> Result<f64> {
    if delta_f < 0.0 || sigma_tilde < 0.0 || l_tilde < 0.0 || d == 0 || k == 0 {
        return Err(Error::domain(
            "need delta_f, sigma_tilde, L_tilde >= 0, d >= 1, K >= 1",
        ));
    }
    let kf = k as f64;
    Ok((3.0 * delta_f
        + 16.0 * sigma_tilde
        + 8.0 * l_tilde * (d as f64).sqrt()
        + 3.0 * l_tilde * d as f64 / kf.sqrt())
        / kf.powf(0.25))
}

/// rho-norm of the true gradient along a run's checkpoints, with the
/// success probabilities re-estimated at every checkpoint.
#[derive(Debug, Clone)]
pub struct RhoNormTrajectory {
    /// (iteration, rho-norm at that checkpoint)
    pub values: Vec<(usize, f64)>,
    /// running average of `values` up to each checkpoint
    pub running_average: Vec<f64>,
}

pub fn empirical_rho_norm_trajectory(
    record: &RunRecord,
    objective: &dyn Objective,
    oracle: &dyn Oracle,
    n: usize,
    rng: &mut RandomSource,
) -> Result<RhoNormTrajectory> {
    if record.checkpoints.is_empty() {
        return Err(Error::domain("run record has no checkpoints"));
    }
    let mut values = Vec::with_capacity(record.checkpoints.len());
    let mut running_average = Vec::with_capacity(record.checkpoints.len());
    let mut total = 0.0;
    for (k, x) in &record.checkpoints {
        let g = objective.gradient(x);
        let rho_hat = estimate_success_probabilities(oracle, objective, x, n, rng)?;
        let value = rho_norm(&g, &rho_hat)?;
        values.push((*k, value));
        total += value;
        running_average.push(total / values.len() as f64);
    }
    Ok(RhoNormTrajectory {
        values,
        running_average,
    })
}
