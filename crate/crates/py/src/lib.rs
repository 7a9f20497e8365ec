//! Python bindings for the signdesc core crate.
//!
//! Build with maturin (`maturin develop`) or plain `cargo build` plus a
//! rename of the produced `libsigndesc_py.so` to `signdesc_py.so`.

// the #[pyfunction] expansion converts PyErr into PyErr, which newer
// clippy flags in every wrapper
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use signdesc::harness::{execute_run, list_experiments, ExperimentConfig};
use signdesc::probes;
use signdesc::rng::RandomSource;
use signdesc::sign;
use signdesc::special;
use signdesc::special::SuccessProbabilityVector;
use signdesc::{DenseVector, SignVector};

fn err(e: signdesc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dense(v: Vec<f64>) -> PyResult<DenseVector> {
    DenseVector::new(v).map_err(err)
}

fn probs(p: Vec<f64>) -> PyResult<SuccessProbabilityVector> {
    SuccessProbabilityVector::new(p).map_err(err)
}

// ---- sign operations -------------------------------------------------------

/// Coordinate-wise sign with sign(0) = 0.
#[pyfunction]
fn sign_vec(v: Vec<f64>) -> PyResult<Vec<i8>> {
    Ok(sign::sign(&dense(v)?).as_slice().to_vec())
}

/// One draw of the stochastic sign operator (P[+1] = 1/2 + v_i / (2 ||v||)).
#[pyfunction]
fn stochastic_sign(v: Vec<f64>, seed: u64) -> PyResult<Vec<i8>> {
    let mut rng = RandomSource::new(seed);
    Ok(sign::stochastic_sign(&dense(v)?, &mut rng)
        .as_slice()
        .to_vec())
}

/// The per-coordinate +1 probabilities of the stochastic sign operator.
#[pyfunction]
fn stochastic_sign_probabilities(v: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(sign::stochastic_sign_probabilities(&dense(v)?))
}

/// Coordinate-wise majority vote over sign vectors (entries in {-1, 0, +1}).
#[pyfunction]
fn majority_vote(votes: Vec<Vec<i8>>) -> PyResult<Vec<i8>> {
    let signs: Vec<SignVector> = votes
        .into_iter()
        .map(|v| SignVector::new(v).map_err(err))
        .collect::<PyResult<_>>()?;
    Ok(sign::majority_vote(&signs)
        .map_err(err)?
        .as_slice()
        .to_vec())
}

// ---- special functions and norms ------------------------------------------

#[pyfunction]
fn erf(x: f64) -> f64 {
    special::erf(x)
}

/// Regularized incomplete beta function I(p; l, l) at integer symmetric
/// parameters, evaluated through the binomial-tail identity.
#[pyfunction]
fn reg_inc_beta_symmetric(p: f64, l: u64) -> PyResult<f64> {
    special::reg_inc_beta_symmetric(p, l).map_err(err)
}

/// P[Bin(m, p) >= l]; l may be any integer (clamped tails included).
#[pyfunction]
fn binomial_tail(m: u64, p: f64, l: i64) -> PyResult<f64> {
    special::binomial_tail(m, p, l).map_err(err)
}

/// Majority threshold l = floor((M + 1) / 2) for an M-node vote.
#[pyfunction]
fn majority_threshold(m: u64) -> u64 {
    special::majority_threshold(m)
}

/// rho-norm: sum_i (2 rho_i - 1) |g_i|.
#[pyfunction]
fn rho_norm(g: Vec<f64>, rho: Vec<f64>) -> PyResult<f64> {
    special::rho_norm(&dense(g)?, &probs(rho)?).map_err(err)
}

/// Majority-vote norm: sum_i (2 I(rho_i; l, l) - 1) |g_i| with M voters.
#[pyfunction]
fn rho_m_norm(g: Vec<f64>, rho: Vec<f64>, m: u64) -> PyResult<f64> {
    special::rho_m_norm(&dense(g)?, &probs(rho)?, m).map_err(err)
}

/// Mixed l^{1,2} norm: sum_i |g_i|^2 / (|g_i| + sqrt(3) sigma_i).
#[pyfunction]
fn l12_norm(g: Vec<f64>, sigma: Vec<f64>) -> PyResult<f64> {
    special::l12_norm(&dense(g)?, &dense(sigma)?).map_err(err)
}

/// Second-order variant of the mixed norm.
#[pyfunction]
fn improved_l12_norm(g: Vec<f64>, sigma: Vec<f64>) -> PyResult<f64> {
    special::improved_l12_norm(&dense(g)?, &dense(sigma)?).map_err(err)
}

/// Unimodal-noise lower bound 1/2 + |g| / (2(|g| + sqrt(3) sigma)).
#[pyfunction]
fn gauss_spb_bound(abs_g: f64, sigma: f64) -> PyResult<f64> {
    special::gauss_spb_bound(abs_g, sigma).map_err(err)
}

/// Second-order refinement of the unimodal-noise lower bound.
#[pyfunction]
fn improved_gauss_spb_bound(abs_g: f64, sigma: f64) -> PyResult<f64> {
    special::improved_gauss_spb_bound(abs_g, sigma).map_err(err)
}

/// Chebyshev lower bound 1 - sigma^2 / (tau mu^2) on the mini-batch success
/// probability.
#[pyfunction]
fn chebyshev_spb_bound(mu: f64, sigma2: f64, tau: u64) -> PyResult<f64> {
    special::chebyshev_spb_bound(mu, sigma2, tau).map_err(err)
}

/// Berry-Esseen / CLT lower bound on the mini-batch success probability.
/// `nu` is the cube root of the third absolute central moment.
#[pyfunction]
fn clt_spb_bound(mu: f64, sigma: f64, nu: f64, tau: u64) -> PyResult<f64> {
    special::clt_spb_bound(mu, sigma, nu, tau).map_err(err)
}

/// Mini-batch size sufficient to restore the success-probability condition.
#[pyfunction]
fn required_minibatch(mean: f64, variance: f64, third_central: f64) -> PyResult<f64> {
    let m = special::MomentEstimates {
        mean,
        variance,
        third_central,
        sample_count: 0,
    };
    special::required_minibatch(&m).map_err(err)
}

/// Hoeffding factor 1 - exp(-(2 rho_min - 1)^2 l) relating the majority-vote
/// norm to the l1 norm.
#[pyfunction]
fn hoeffding_speedup_bound(rho_min: f64, m: u64) -> PyResult<f64> {
    special::hoeffding_speedup_bound(rho_min, m).map_err(err)
}

// ---- rate right-hand sides -------------------------------------------------

#[pyfunction]
fn rate_rhs_theorem1(
    f0_minus_fstar: f64,
    gamma0: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> PyResult<f64> {
    probes::rate_rhs_theorem1(f0_minus_fstar, gamma0, d, l_bar, k).map_err(err)
}

#[pyfunction]
fn rate_rhs_constant_step(
    f0_minus_fstar: f64,
    gamma: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> PyResult<f64> {
    probes::rate_rhs_constant_step(f0_minus_fstar, gamma, d, l_bar, k).map_err(err)
}

#[pyfunction]
fn rate_rhs_theorem2(
    f0_minus_fstar: f64,
    gamma0: f64,
    d: usize,
    l_bar: f64,
    k: usize,
) -> PyResult<f64> {
    probes::rate_rhs_theorem2(f0_minus_fstar, gamma0, d, l_bar, k).map_err(err)
}

#[pyfunction]
fn rate_rhs_theorem4(
    delta_f: f64,
    sigma_tilde: f64,
    l_tilde: f64,
    d: usize,
    k: usize,
) -> PyResult<f64> {
    probes::rate_rhs_theorem4(delta_f, sigma_tilde, l_tilde, d, k).map_err(err)
}

// ---- experiment runner ------------------------------------------------------

/// Transcript of one optimization run, column-oriented.
#[pyclass]
struct RunResult {
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    k: Vec<usize>,
    #[pyo3(get)]
    gamma: Vec<f64>,
    #[pyo3(get)]
    f: Vec<f64>,
    #[pyo3(get)]
    g_l1: Vec<f64>,
    #[pyo3(get)]
    g_l2: Vec<f64>,
    #[pyo3(get)]
    bits_up: Vec<u64>,
    #[pyo3(get)]
    bits_down: Vec<u64>,
    #[pyo3(get)]
    final_point: Vec<f64>,
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(method='{}', seed={}, iterations={}, final_f={:e})",
            self.method,
            self.seed,
            self.k.len().saturating_sub(1),
            self.f.last().copied().unwrap_or(f64::NAN)
        )
    }
}

/// Run a single experiment described by a TOML config string and return its
/// transcript. The config format is the same one the `signdesc` CLI accepts.
#[pyfunction]
#[pyo3(signature = (config_toml, seed=None))]
fn run_config(config_toml: &str, seed: Option<u64>) -> PyResult<RunResult> {
    let mut config = ExperimentConfig::from_toml(config_toml).map_err(err)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate().map_err(err)?;
    let record = execute_run(&config, config.seed).map_err(err)?;
    Ok(RunResult {
        method: record.method.to_string(),
        seed: record.seed,
        k: record.rows.iter().map(|r| r.k).collect(),
        gamma: record.rows.iter().map(|r| r.gamma).collect(),
        f: record.rows.iter().map(|r| r.f).collect(),
        g_l1: record.rows.iter().map(|r| r.g_l1).collect(),
        g_l2: record.rows.iter().map(|r| r.g_l2).collect(),
        bits_up: record.rows.iter().map(|r| r.bits_up).collect(),
        bits_down: record.rows.iter().map(|r| r.bits_down).collect(),
        final_point: record.final_point.into_vec(),
    })
}

/// The canned experiment registry, one "id - description" line per entry.
#[pyfunction]
fn canned_experiments() -> String {
    list_experiments()
}

#[pymodule]
fn signdesc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sign_vec, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_sign, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_sign_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(majority_vote, m)?)?;
    m.add_function(wrap_pyfunction!(erf, m)?)?;
    m.add_function(wrap_pyfunction!(reg_inc_beta_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_tail, m)?)?;
    m.add_function(wrap_pyfunction!(majority_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(rho_norm, m)?)?;
    m.add_function(wrap_pyfunction!(rho_m_norm, m)?)?;
    m.add_function(wrap_pyfunction!(l12_norm, m)?)?;
    m.add_function(wrap_pyfunction!(improved_l12_norm, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_spb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(improved_gauss_spb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_spb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(clt_spb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(required_minibatch, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_speedup_bound, m)?)?;
    m.add_function(wrap_pyfunction!(rate_rhs_theorem1, m)?)?;
    m.add_function(wrap_pyfunction!(rate_rhs_constant_step, m)?)?;
    m.add_function(wrap_pyfunction!(rate_rhs_theorem2, m)?)?;
    m.add_function(wrap_pyfunction!(rate_rhs_theorem4, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(canned_experiments, m)?)?;
    m.add_class::<RunResult>()?;
    Ok(())
}
