//! The optimizers: sign descent with a plain or value-guarded step,
//! parallel sign descent with majority vote, stochastic-sign descent with
//! momentum (SSDM), and an SGD baseline. Every run produces a full
//! `RunRecord` transcript with exact communication-bit accounting.
//!
//! Randomness contract: iteration k of node n draws from the stream
//! derived from (seed, [n, k]). Runs are therefore bit-reproducible and
//! independent of any execution order, and a majority-vote run with M = 1
//! consumes exactly the stream of a single-node run.

use crate::error::{Error, Result};
use crate::problems::{Objective, Oracle, PartitionedProblem};
use crate::rng::RandomSource;
use crate::sign::{majority_vote, sign, stochastic_sign, stochastic_sign_probabilities};
use crate::vector::{DenseVector, SignVector};

/// Step-size sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// gamma_k = gamma for all k.
    Constant(f64),
    /// gamma_k = gamma0 / sqrt(k + 1).
    InverseSqrt(f64),
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let g = match *self {
            StepSchedule::Constant(g) | StepSchedule::InverseSqrt(g) => g,
        };
        if g > 0.0 && g.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!("step size {g} must be positive")))
        }
    }

    pub fn gamma(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Constant(g) => g,
            StepSchedule::InverseSqrt(g0) => g0 / ((k + 1) as f64).sqrt(),
        }
    }
}

/// Which variant of the sign-descent step to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignOption {
    /// Plain update x - gamma_k sign g_hat.
    One,
    /// Value-guarded update: keep whichever of {x, x - gamma_k sign g_hat}
    /// has the smaller objective value; ties keep x.
    Two,
}

/// SSDM parameters. The defaults depend on the horizon K, so the config
/// carries it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsdmConfig {
    pub k_total: usize,
    pub beta: f64,
    pub gamma: f64,
}

impl SsdmConfig {
    /// beta = 1 - 1/sqrt(K), gamma = K^{-3/4}.
    pub fn with_defaults(k_total: usize) -> Result<Self> {
        if k_total == 0 {
            return Err(Error::config("K must be positive"));
        }
        let k = k_total as f64;
        SsdmConfig {
            k_total,
            beta: 1.0 - 1.0 / k.sqrt(),
            gamma: k.powf(-0.75),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.k_total == 0 {
            return Err(Error::config("K must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::config(format!("beta {} outside [0, 1)", self.beta)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config(format!(
                "gamma {} must be positive",
                self.gamma
            )));
        }
        Ok(self)
    }
}

/// One transcript row; row k describes the state x_k before the k-th
/// update, so a K-iteration run has K + 1 rows. The bits counters are
/// cumulative totals after k iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub k: usize,
    pub gamma: f64,
    pub f: f64,
    pub g_l1: f64,
    pub g_l2: f64,
    /// Filled in by the probes layer at checkpoints; never during the run.
    pub rho_norm_hat: Option<f64>,
    pub bits_up: u64,
    pub bits_down: u64,
}

/// Complete run transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: &'static str,
    pub rows: Vec<IterationRow>,
    /// Iterates retained at the checkpoint stride (k = 0, stride, ..., K).
    pub checkpoints: Vec<(usize, DenseVector)>,
    pub final_point: DenseVector,
    pub seed: u64,
}

pub fn default_checkpoint_stride(k_total: usize) -> usize {
    (k_total / 100).max(1)
}

struct Recorder<'a> {
    objective: &'a dyn Objective,
    record: RunRecord,
    stride: usize,
    k_total: usize,
    bits_up: u64,
    bits_down: u64,
}

impl<'a> Recorder<'a> {
    fn new(method: &'static str, objective: &'a dyn Objective, k_total: usize, seed: u64) -> Self {
        Recorder {
            objective,
            record: RunRecord {
                method,
                rows: Vec::with_capacity(k_total + 1),
                checkpoints: Vec::new(),
                final_point: DenseVector::zeros(objective.dim()),
                seed,
            },
            stride: default_checkpoint_stride(k_total),
            k_total,
            bits_up: 0,
            bits_down: 0,
        }
    }

    fn observe(&mut self, k: usize, gamma: f64, x: &DenseVector) {
        let g = self.objective.gradient(x);
        self.record.rows.push(IterationRow {
            k,
            gamma,
            f: self.objective.value(x),
            g_l1: g.norm_l1(),
            g_l2: g.norm_l2(),
            rho_norm_hat: None,
            bits_up: self.bits_up,
            bits_down: self.bits_down,
        });
        if k.is_multiple_of(self.stride) || k == self.k_total {
            self.record.checkpoints.push((k, x.clone()));
        }
    }

    fn charge(&mut self, up: u64, down: u64) {
        self.bits_up += up;
        self.bits_down += down;
    }

    fn finish(mut self, x: DenseVector) -> RunRecord {
        self.record.final_point = x;
        self.record
    }
}

/// Plain sign step: x - gamma_k * sign(sample).
pub fn signsgd_step_opt1(
    x: &DenseVector,
    oracle: &dyn Oracle,
    gamma_k: f64,
    rng: &mut RandomSource,
) -> Result<DenseVector> {
    if gamma_k <= 0.0 {
        return Err(Error::config(format!("gamma_k {gamma_k} must be positive")));
    }
    let s = sign(&oracle.sample(x, rng));
    let mut next = x.clone();
    next.axpy(-gamma_k, &s.to_dense())?;
    Ok(next)
}

/// Value-guarded sign step: evaluate the candidate and keep the better of
/// the two points; exact ties keep the current iterate.
pub fn signsgd_step_opt2(
    x: &DenseVector,
    oracle: &dyn Oracle,
    objective: &dyn Objective,
    gamma_k: f64,
    rng: &mut RandomSource,
) -> Result<DenseVector> {
    let candidate = signsgd_step_opt1(x, oracle, gamma_k, rng)?;
    if objective.value(&candidate) < objective.value(x) {
        Ok(candidate)
    } else {
        Ok(x.clone())
    }
}

/// Single-node sign descent, either option. Bits: d up and d down per
/// iteration (the sign vector travels both ways in the simulated server).
pub fn run_signsgd(
    objective: &dyn Objective,
    oracle: &dyn Oracle,
    option: SignOption,
    x0: &DenseVector,
    schedule: &StepSchedule,
    k_total: usize,
    seed: u64,
) -> Result<RunRecord> {
    schedule.validate()?;
    if k_total == 0 {
        return Err(Error::config("K must be positive"));
    }
    x0.check_dim(objective.dim())?;
    let d = objective.dim() as u64;
    let method = match option {
        SignOption::One => "signsgd-opt1",
        SignOption::Two => "signsgd-opt2",
    };
    let mut rec = Recorder::new(method, objective, k_total, seed);
    let mut x = x0.clone();
    for k in 0..k_total {
        let gamma = schedule.gamma(k);
        rec.observe(k, gamma, &x);
        let mut rng = RandomSource::derived(seed, &[0, k as u64]);
        x = match option {
            SignOption::One => signsgd_step_opt1(&x, oracle, gamma, &mut rng)?,
            SignOption::Two => signsgd_step_opt2(&x, oracle, objective, gamma, &mut rng)?,
        };
        rec.charge(d, d);
    }
    rec.observe(k_total, schedule.gamma(k_total), &x);
    Ok(rec.finish(x))
}

/// Parallel sign descent: M nodes sample at the same point, the server
/// takes a coordinate-wise majority vote and broadcasts it. Bits: M*d up
/// and M*d down per iteration (the vote is rebroadcast to every node).
pub fn run_parallel_majority_vote(
    objective: &dyn Objective,
    oracle: &dyn Oracle,
    m_nodes: usize,
    x0: &DenseVector,
    schedule: &StepSchedule,
    k_total: usize,
    seed: u64,
) -> Result<RunRecord> {
    schedule.validate()?;
    if k_total == 0 {
        return Err(Error::config("K must be positive"));
    }
    if m_nodes == 0 {
        return Err(Error::config("node count M must be positive"));
    }
    x0.check_dim(objective.dim())?;
    let d = objective.dim() as u64;
    let mut rec = Recorder::new("majority-vote", objective, k_total, seed);
    let mut x = x0.clone();
    for k in 0..k_total {
        let gamma = schedule.gamma(k);
        rec.observe(k, gamma, &x);
        let votes: Vec<SignVector> = (0..m_nodes)
            .map(|n| {
                let mut rng = RandomSource::derived(seed, &[n as u64, k as u64]);
                sign(&oracle.sample(&x, &mut rng))
            })
            .collect();
        let vote = majority_vote(&votes)?;
        x.axpy(-gamma, &vote.to_dense())?;
        rec.charge(m_nodes as u64 * d, m_nodes as u64 * d);
    }
    rec.observe(k_total, schedule.gamma(k_total), &x);
    Ok(rec.finish(x))
}

/// Majority-vote sign descent over a partitioned problem: node n votes
/// with the sign of a sample from its own oracle. Bit accounting matches
/// `run_parallel_majority_vote`. Because each node transmits only signs,
/// the trajectory is exactly invariant under positive per-node rescaling
/// of the losses (`scale_nodes`).
pub fn run_partitioned_majority_vote(
    problem: &PartitionedProblem,
    x0: &DenseVector,
    schedule: &StepSchedule,
    k_total: usize,
    seed: u64,
) -> Result<RunRecord> {
    schedule.validate()?;
    if k_total == 0 {
        return Err(Error::config("K must be positive"));
    }
    x0.check_dim(problem.dim())?;
    let d = problem.dim() as u64;
    let m_nodes = problem.node_count();
    let objective = SsdmGlobalObjective { problem };
    let mut rec = Recorder::new("partitioned-majority-vote", &objective, k_total, seed);
    let mut x = x0.clone();
    for k in 0..k_total {
        let gamma = schedule.gamma(k);
        rec.observe(k, gamma, &x);
        let votes: Vec<SignVector> = problem
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, node)| {
                let mut rng = RandomSource::derived(seed, &[n as u64, k as u64]);
                sign(&node.oracle.sample(&x, &mut rng))
            })
            .collect();
        let vote = majority_vote(&votes)?;
        x.axpy(-gamma, &vote.to_dense())?;
        rec.charge(m_nodes as u64 * d, m_nodes as u64 * d);
    }
    rec.observe(k_total, schedule.gamma(k_total), &x);
    Ok(rec.finish(x))
}

/// Stochastic-sign descent with momentum over a partitioned problem.
/// Each node keeps m_k^n = beta * m_{k-1}^n + (1 - beta) * g_hat_k^n with
/// m_{-1}^n equal to the first sample, sends the stochastic sign of its
/// momentum, and the server applies x - (gamma / M) * sum of signs.
/// Bits: M*d up; the broadcast integer sum costs ceil(log2(2M+1)) bits
/// per coordinate per node, M*d*ceil(log2(2M+1)) down in total.
pub fn run_ssdm(
    problem: &PartitionedProblem,
    config: &SsdmConfig,
    x0: &DenseVector,
    seed: u64,
) -> Result<RunRecord> {
    let config = config.validated()?;
    x0.check_dim(problem.dim())?;
    let d = problem.dim();
    let m_nodes = problem.node_count();
    // ceil(log2(2M+1)) bits encode the integer vote sum in [-M, M]
    let down_bits_per_coord = (2 * m_nodes + 1).next_power_of_two().trailing_zeros() as u64;
    let objective = SsdmGlobalObjective { problem };
    let mut rec = Recorder::new("ssdm", &objective, config.k_total, seed);
    let mut x = x0.clone();
    let mut momenta: Vec<Option<DenseVector>> = vec![None; m_nodes];
    for k in 0..config.k_total {
        rec.observe(k, config.gamma, &x);
        let mut sum = vec![0i64; d];
        for (n, momentum) in momenta.iter_mut().enumerate() {
            let mut rng = RandomSource::derived(seed, &[n as u64, k as u64]);
            let sample = problem.nodes()[n].oracle.sample(&x, &mut rng);
            let m = match momentum.take() {
                // beta * m_prev + (1 - beta) * sample; at k = 0 the
                // initialization m_{-1} = sample collapses this to sample.
                Some(prev) => {
                    let mut m = prev.scaled(config.beta);
                    m.axpy(1.0 - config.beta, &sample)?;
                    m
                }
                None => sample,
            };
            let s = stochastic_sign(&m, &mut rng);
            for (acc, &e) in sum.iter_mut().zip(s.as_slice()) {
                *acc += e as i64;
            }
            *momentum = Some(m);
        }
        let step = DenseVector::new(sum.iter().map(|&s| s as f64).collect())?;
        x.axpy(-config.gamma / m_nodes as f64, &step)?;
        rec.charge(
            (m_nodes * d) as u64,
            (m_nodes * d) as u64 * down_bits_per_coord,
        );
    }
    rec.observe(config.k_total, config.gamma, &x);
    Ok(rec.finish(x))
}

/// Closed-form per-node stochastic-sign probability vectors at iteration 0
/// of an SSDM run (probabilities of sending +1, from the definition of the
/// stochastic sign, not sampled). Nodes whose first momentum directions
/// differ produce different vectors; a node's vector depends only on the
/// direction of its momentum, never on its magnitude.
pub fn ssdm_initial_sign_probabilities(
    problem: &PartitionedProblem,
    x0: &DenseVector,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    x0.check_dim(problem.dim())?;
    Ok(problem
        .nodes()
        .iter()
        .enumerate()
        .map(|(n, node)| {
            let mut rng = RandomSource::derived(seed, &[n as u64, 0]);
            stochastic_sign_probabilities(&node.oracle.sample(x0, &mut rng))
        })
        .collect())
}

struct SsdmGlobalObjective<'a> {
    problem: &'a PartitionedProblem,
}

impl Objective for SsdmGlobalObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        self.problem.value(x)
    }
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.problem.gradient(x)
    }
    fn coordinate_smoothness(&self) -> &[f64] {
        &[]
    }
    fn optimum_value(&self) -> Option<f64> {
        None
    }
}

/// Uncompressed baseline: x - gamma_k * sample. Bits: 32 per coordinate
/// per direction, modelling single-precision transport.
pub fn run_sgd(
    objective: &dyn Objective,
    oracle: &dyn Oracle,
    x0: &DenseVector,
    schedule: &StepSchedule,
    k_total: usize,
    seed: u64,
) -> Result<RunRecord> {
    schedule.validate()?;
    if k_total == 0 {
        return Err(Error::config("K must be positive"));
    }
    x0.check_dim(objective.dim())?;
    let d = objective.dim() as u64;
    let mut rec = Recorder::new("sgd", objective, k_total, seed);
    let mut x = x0.clone();
    for k in 0..k_total {
        let gamma = schedule.gamma(k);
        rec.observe(k, gamma, &x);
        let mut rng = RandomSource::derived(seed, &[0, k as u64]);
        let g = oracle.sample(&x, &mut rng);
        x.axpy(-gamma, &g)?;
        rec.charge(32 * d, 32 * d);
    }
    rec.observe(k_total, schedule.gamma(k_total), &x);
    Ok(rec.finish(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        counterexample_problem, partitioned_quadratics, quadratic_problem, scale_nodes,
        QuadraticNodeSpec,
    };

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn schedule_values() {
        let c = StepSchedule::Constant(0.1);
        assert_eq!(c.gamma(0), 0.1);
        assert_eq!(c.gamma(999), 0.1);
        let s = StepSchedule::InverseSqrt(0.4);
        assert_eq!(s.gamma(0), 0.4);
        assert_eq!(s.gamma(3), 0.2);
        assert!(StepSchedule::Constant(0.0).validate().is_err());
        assert!(StepSchedule::InverseSqrt(-1.0).validate().is_err());
    }

    #[test]
    fn ssdm_config_defaults() {
        let c = SsdmConfig::with_defaults(10_000).unwrap();
        assert!((c.beta - 0.99).abs() < 1e-15);
        assert!((c.gamma - 1e-3).abs() < 1e-15);
        assert!(SsdmConfig::with_defaults(0).is_err());
        assert!(SsdmConfig {
            k_total: 10,
            beta: 1.0,
            gamma: 0.1
        }
        .validated()
        .is_err());
    }

    #[test]
    fn opt1_step_noiseless() {
        let (f, oracle) = quadratic_problem(vec![1.0, 1.0, 1.0], vec![0.0; 3]).unwrap();
        let _ = f;
        // at x = (2, -1, 0) the gradient is (2, -1, 0)
        let x = dv(&[2.0, -1.0, 0.0]);
        let mut rng = RandomSource::new(1);
        let next = signsgd_step_opt1(&x, oracle.as_ref(), 0.25, &mut rng).unwrap();
        assert_eq!(next.as_slice(), &[1.75, -0.75, 0.0]);
        assert!(signsgd_step_opt1(&x, oracle.as_ref(), 0.0, &mut rng).is_err());
    }

    #[test]
    fn counterexample_step_stays_on_line() {
        let (_, oracle) = counterexample_problem(0.5).unwrap();
        let mut rng = RandomSource::new(2);
        let mut x = dv(&[1.0, 1.0]);
        for _ in 0..200 {
            x = signsgd_step_opt1(&x, oracle.as_ref(), 0.05, &mut rng).unwrap();
            assert!((x[0] + x[1] - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn opt2_keeps_current_on_increase_and_tie() {
        let (f, oracle) = quadratic_problem(vec![1.0], vec![0.0]).unwrap();
        // gradient sign pushes left; giant step overshoots so f increases
        let x = dv(&[0.1]);
        let mut rng = RandomSource::new(3);
        let next = signsgd_step_opt2(&x, oracle.as_ref(), f.as_ref(), 5.0, &mut rng).unwrap();
        assert_eq!(next.as_slice(), x.as_slice());
        // exact tie: candidate mirrors x across 0, same value => keep x
        let next = signsgd_step_opt2(&x, oracle.as_ref(), f.as_ref(), 0.2, &mut rng).unwrap();
        assert_eq!(next.as_slice(), x.as_slice());
        // improving step is taken
        let next = signsgd_step_opt2(&x, oracle.as_ref(), f.as_ref(), 0.05, &mut rng).unwrap();
        assert!((next[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn run_signsgd_transcript_shape() {
        let (f, oracle) = quadratic_problem(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let sched = StepSchedule::InverseSqrt(0.4);
        let r = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &dv(&[1.0, 1.0]),
            &sched,
            50,
            9,
        )
        .unwrap();
        assert_eq!(r.rows.len(), 51);
        assert_eq!(r.rows[0].k, 0);
        assert_eq!(r.rows[0].bits_up, 0);
        assert_eq!(r.rows[50].bits_up, 50 * 2);
        assert_eq!(r.rows[50].bits_down, 50 * 2);
        assert_eq!(r.rows[0].gamma, 0.4);
        assert_eq!(r.rows[3].gamma, 0.2);
        assert_eq!(r.seed, 9);
        // stride max(1, 50/100) = 1: every iterate checkpointed
        assert_eq!(r.checkpoints.len(), 51);
        assert_eq!(
            r.checkpoints.last().unwrap().1.as_slice(),
            r.final_point.as_slice()
        );
        assert!(run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &dv(&[1.0, 1.0]),
            &sched,
            0,
            9
        )
        .is_err());
    }

    #[test]
    fn signsgd_step_displacement_bounded() {
        let (f, oracle) = quadratic_problem(vec![1.0, 3.0, 0.5], vec![1.0; 3]).unwrap();
        let sched = StepSchedule::InverseSqrt(0.3);
        let r = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &dv(&[2.0, -1.0, 0.5]),
            &sched,
            100,
            4,
        )
        .unwrap();
        for w in r.checkpoints.windows(2) {
            let gamma = sched.gamma(w[0].0);
            let delta = w[1].1.sub(&w[0].1).unwrap();
            assert!(delta.norm_linf() <= gamma + 1e-15);
        }
    }

    #[test]
    fn opt2_monotone_over_run() {
        let (f, oracle) = quadratic_problem(vec![1.0, 4.0], vec![2.0, 2.0]).unwrap();
        let r = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::Two,
            &dv(&[3.0, -2.0]),
            &StepSchedule::Constant(0.3),
            300,
            11,
        )
        .unwrap();
        for w in r.rows.windows(2) {
            assert!(w[1].f <= w[0].f);
        }
    }

    #[test]
    fn determinism_identical_records() {
        let (f, oracle) = quadratic_problem(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let x0 = dv(&[1.0, -1.0]);
        let sched = StepSchedule::Constant(0.1);
        let a = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &x0,
            &sched,
            80,
            5,
        )
        .unwrap();
        let b = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &x0,
            &sched,
            80,
            5,
        )
        .unwrap();
        assert_eq!(a, b);
        let c = run_sgd(f.as_ref(), oracle.as_ref(), &x0, &sched, 80, 5).unwrap();
        let d = run_sgd(f.as_ref(), oracle.as_ref(), &x0, &sched, 80, 5).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn majority_vote_m1_matches_single_node() {
        let (f, oracle) = quadratic_problem(vec![1.0, 2.0], vec![0.7, 0.7]).unwrap();
        let x0 = dv(&[1.0, -1.0]);
        let sched = StepSchedule::Constant(0.05);
        let single = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &x0,
            &sched,
            100,
            21,
        )
        .unwrap();
        let voted =
            run_parallel_majority_vote(f.as_ref(), oracle.as_ref(), 1, &x0, &sched, 100, 21)
                .unwrap();
        assert_eq!(single.final_point, voted.final_point);
        assert_eq!(single.checkpoints, voted.checkpoints);
    }

    #[test]
    fn majority_vote_noiseless_matches_signgd_for_any_m() {
        let (f, oracle) = quadratic_problem(vec![1.0, 3.0], vec![0.0, 0.0]).unwrap();
        let x0 = dv(&[2.0, -1.5]);
        let sched = StepSchedule::Constant(0.1);
        let base = run_signsgd(
            f.as_ref(),
            oracle.as_ref(),
            SignOption::One,
            &x0,
            &sched,
            60,
            1,
        )
        .unwrap();
        for m in [2, 3, 8] {
            let r = run_parallel_majority_vote(f.as_ref(), oracle.as_ref(), m, &x0, &sched, 60, 1)
                .unwrap();
            assert_eq!(r.final_point, base.final_point);
        }
    }

    #[test]
    fn majority_vote_bits_exact() {
        let (f, oracle) = quadratic_problem(vec![1.0, 1.0, 1.0], vec![1.0; 3]).unwrap();
        let r = run_parallel_majority_vote(
            f.as_ref(),
            oracle.as_ref(),
            5,
            &dv(&[1.0, 1.0, 1.0]),
            &StepSchedule::Constant(0.1),
            40,
            2,
        )
        .unwrap();
        let last = r.rows.last().unwrap();
        assert_eq!(last.bits_up, 40 * 5 * 3);
        assert_eq!(last.bits_down, 40 * 5 * 3);
    }

    fn two_node_problem(noise: f64) -> crate::problems::PartitionedProblem {
        partitioned_quadratics(&[
            QuadraticNodeSpec {
                center: vec![1.0, 0.5],
                curvature: vec![1.0, 2.0],
                noise_sd: noise,
            },
            QuadraticNodeSpec {
                center: vec![-1.0, -0.5],
                curvature: vec![2.0, 1.0],
                noise_sd: noise,
            },
        ])
        .unwrap()
    }

    #[test]
    fn majority_vote_ignores_node_scaling_exactly() {
        let p = two_node_problem(0.0);
        let scaled = scale_nodes(&p, &[10.0, 0.1]).unwrap();
        let sched = StepSchedule::Constant(0.05);
        let x0 = dv(&[0.8, -0.3]);
        let a = run_partitioned_majority_vote(&p, &x0, &sched, 200, 7).unwrap();
        let b = run_partitioned_majority_vote(&scaled, &x0, &sched, 200, 7).unwrap();
        assert_eq!(a.checkpoints, b.checkpoints);
        assert_eq!(a.final_point, b.final_point);
    }

    #[test]
    fn ssdm_transcript_and_bits() {
        let p = two_node_problem(0.4);
        let config = SsdmConfig::with_defaults(50).unwrap();
        let r = run_ssdm(&p, &config, &dv(&[1.0, 1.0]), 8).unwrap();
        assert_eq!(r.rows.len(), 51);
        let last = r.rows.last().unwrap();
        assert_eq!(last.bits_up, 50 * 2 * 2);
        // 2M+1 = 5 levels => 3 bits per coordinate per node
        assert_eq!(last.bits_down, 50 * 2 * 2 * 3);
        let r2 = run_ssdm(&p, &config, &dv(&[1.0, 1.0]), 8).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn ssdm_update_magnitude_bounded() {
        let p = two_node_problem(0.4);
        let config = SsdmConfig {
            k_total: 100,
            beta: 0.9,
            gamma: 0.03,
        };
        let r = run_ssdm(&p, &config, &dv(&[1.5, -0.7]), 3).unwrap();
        for w in r.checkpoints.windows(2) {
            let delta = w[1].1.sub(&w[0].1).unwrap();
            // per coordinate |s_k,i| <= M so the step is at most gamma
            assert!(delta.norm_linf() <= config.gamma + 1e-15);
        }
    }

    #[test]
    fn ssdm_first_step_independent_of_beta() {
        // m_0^n equals the first sample regardless of beta, so K = 1 runs
        // with different beta coincide.
        let p = two_node_problem(0.4);
        let a = run_ssdm(
            &p,
            &SsdmConfig {
                k_total: 1,
                beta: 0.0,
                gamma: 0.05,
            },
            &dv(&[1.0, -1.0]),
            17,
        )
        .unwrap();
        let b = run_ssdm(
            &p,
            &SsdmConfig {
                k_total: 1,
                beta: 0.99,
                gamma: 0.05,
            },
            &dv(&[1.0, -1.0]),
            17,
        )
        .unwrap();
        assert_eq!(a.final_point, b.final_point);
    }

    #[test]
    fn ssdm_initial_probabilities_reflect_directions_not_magnitudes() {
        let p = two_node_problem(0.0);
        let x0 = dv(&[0.8, -0.3]);
        let probs = ssdm_initial_sign_probabilities(&p, &x0, 5).unwrap();
        // the two node gradients point in different directions here
        assert!(probs[0] != probs[1]);
        // per-node probabilities are direction-only: scaling a node's loss
        // leaves its probability vector unchanged
        let scaled = scale_nodes(&p, &[10.0, 0.1]).unwrap();
        let probs_scaled = ssdm_initial_sign_probabilities(&scaled, &x0, 5).unwrap();
        for (a, b) in probs.iter().zip(&probs_scaled) {
            for (pa, pb) in a.iter().zip(b) {
                assert!((pa - pb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sgd_noiseless_quadratic_monotone() {
        let (f, oracle) = quadratic_problem(vec![1.0, 4.0], vec![0.0, 0.0]).unwrap();
        let r = run_sgd(
            f.as_ref(),
            oracle.as_ref(),
            &dv(&[2.0, -1.0]),
            &StepSchedule::Constant(0.2),
            100,
            1,
        )
        .unwrap();
        for w in r.rows.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-15);
        }
        assert!(r.rows.last().unwrap().f < 1e-6);
        assert_eq!(r.rows.last().unwrap().bits_up, 100 * 32 * 2);
        // zero-gradient start is a fixed point
        let fixed = run_sgd(
            f.as_ref(),
            oracle.as_ref(),
            &DenseVector::zeros(2),
            &StepSchedule::Constant(0.2),
            10,
            1,
        )
        .unwrap();
        assert_eq!(fixed.final_point.as_slice(), &[0.0, 0.0]);
    }
}
