//! Problem zoo and stochastic-gradient oracles: Rosenbrock with
//! component+Gaussian noise, the adversarial least-squares problem that
//! traps deterministic sign descent, synthetic quadratics with known
//! per-coordinate smoothness, partitioned multi-node problems, and
//! mini-batch / scaling wrappers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::DenseVector;

/// A smooth objective with coordinate-wise smoothness constants and
/// (optionally) a known optimal value.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DenseVector) -> f64;
    fn gradient(&self, x: &DenseVector) -> DenseVector;
    /// Per-coordinate constants L_i for the descent inequality
    /// f(y) <= f(x) + <grad f(x), y - x> + sum_i (L_i / 2)(y_i - x_i)^2.
    fn coordinate_smoothness(&self) -> &[f64];
    fn optimum_value(&self) -> Option<f64>;

    fn mean_smoothness(&self) -> f64 {
        let l = self.coordinate_smoothness();
        l.iter().sum::<f64>() / l.len() as f64
    }
}

/// Samples gradient estimates at a point. Stateless apart from the
/// caller-supplied generator, so one oracle value may serve many threads.
pub trait Oracle: Send + Sync {
    fn dim(&self) -> usize;
    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector;
    /// Whether the estimator is allowed to be biased for the full gradient.
    fn bias_allowed(&self) -> bool {
        false
    }
}

// ---------------------------------------------------------------------------
// Rosenbrock

/// d-dimensional Rosenbrock sum: f(x) = sum_{i<d} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
pub struct Rosenbrock {
    dim: usize,
    smoothness: Vec<f64>,
}

/// Classic start used by the experiments.
pub fn rosenbrock_start(d: usize) -> DenseVector {
    let mut x = vec![1.0; d];
    x[0] = -1.2;
    DenseVector::new(x).unwrap()
}

impl Rosenbrock {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain("Rosenbrock needs dim >= 2"));
        }
        Ok(Rosenbrock {
            dim,
            smoothness: rosenbrock_smoothness(dim),
        })
    }

    /// Gradient of summand i (0-based, i < d-1): the pair
    /// 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2 touches coordinates i, i+1.
    pub fn component_gradient(&self, x: &DenseVector, i: usize) -> DenseVector {
        let mut g = vec![0.0; self.dim];
        let t = x[i + 1] - x[i] * x[i];
        g[i] = -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
        g[i + 1] = 200.0 * t;
        DenseVector::new(g).unwrap()
    }
}

/// Local smoothness estimates over the experiment box [-2, 2]^d: the max of
/// the absolute Hessian row sums on a grid. The Hessian of the Rosenbrock
/// sum is tridiagonal, so each row only involves x_{i-1}, x_i, x_{i+1}.
/// Used for rate-bound reporting only; runs do not depend on these values.
fn rosenbrock_smoothness(d: usize) -> Vec<f64> {
    let grid: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
    (0..d)
        .map(|i| {
            let mut best = 0.0f64;
            for &xm in &grid {
                for &xi in &grid {
                    for &xp in &grid {
                        let mut row = 0.0;
                        if i >= 1 {
                            // coupling to x_{i-1} plus the 200 diagonal term
                            row += 400.0 * xm.abs() + 200.0;
                        }
                        if i + 1 < d {
                            row += (1200.0 * xi * xi - 400.0 * xp + 2.0).abs() + 400.0 * xi.abs();
                        }
                        best = best.max(row);
                    }
                }
            }
            best
        })
        .collect()
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> f64 {
        (0..self.dim - 1)
            .map(|i| {
                let t = x[i + 1] - x[i] * x[i];
                100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i])
            })
            .sum()
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = vec![0.0; self.dim];
        for i in 0..self.dim - 1 {
            let t = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * t;
        }
        DenseVector::new(g).unwrap()
    }

    fn coordinate_smoothness(&self) -> &[f64] {
        &self.smoothness
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

pub fn rosenbrock(d: usize) -> Result<Arc<Rosenbrock>> {
    Ok(Arc::new(Rosenbrock::new(d)?))
}

/// Biased stochastic oracle for the Rosenbrock sum: the gradient of one
/// uniformly chosen summand plus N(0, nu^2 I) noise. Its expectation is
/// grad f / (d - 1), a scaled estimator; the scaling preserves signs.
pub struct RosenbrockComponentOracle {
    objective: Arc<Rosenbrock>,
    nu: f64,
}

pub fn rosenbrock_component_oracle(d: usize, nu: f64) -> Result<Arc<RosenbrockComponentOracle>> {
    if nu < 0.0 {
        return Err(Error::domain("nu must be nonnegative"));
    }
    Ok(Arc::new(RosenbrockComponentOracle {
        objective: rosenbrock(d)?,
        nu,
    }))
}

impl Oracle for RosenbrockComponentOracle {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector {
        let d = self.dim();
        let i = rng.uniform_int(0, (d - 1) as u64) as usize;
        let mut g = self.objective.component_gradient(x, i).into_vec();
        if self.nu > 0.0 {
            for gi in &mut g {
                *gi += self.nu * rng.normal();
            }
        }
        DenseVector::new(g).unwrap()
    }

    fn bias_allowed(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Counterexample

/// Least-squares problem f(x) = (1/2)[<a1, x>^2 + <a2, x>^2] with
/// a1 = (1+eps, -1+eps), a2 = (-1+eps, 1+eps); unique minimizer at the
/// origin, yet the deterministic sign of the stochastic gradient is
/// +/-(1, -1) along the line x1 + x2 = 2.
pub struct Counterexample {
    eps: f64,
    smoothness: Vec<f64>,
}

impl Counterexample {
    pub fn a1(&self) -> [f64; 2] {
        [1.0 + self.eps, -1.0 + self.eps]
    }

    pub fn a2(&self) -> [f64; 2] {
        [-1.0 + self.eps, 1.0 + self.eps]
    }

    fn branch_inner(&self, x: &DenseVector, a: [f64; 2]) -> f64 {
        a[0] * x[0] + a[1] * x[1]
    }

    /// Gradient of one randomly selected branch: 2 <a_i, x> a_i.
    pub fn branch_gradient(&self, x: &DenseVector, branch: usize) -> DenseVector {
        let a = if branch == 0 { self.a1() } else { self.a2() };
        let inner = self.branch_inner(x, a);
        DenseVector::new(vec![2.0 * inner * a[0], 2.0 * inner * a[1]]).unwrap()
    }
}

impl Objective for Counterexample {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let i1 = self.branch_inner(x, self.a1());
        let i2 = self.branch_inner(x, self.a2());
        0.5 * (i1 * i1 + i2 * i2)
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let a1 = self.a1();
        let a2 = self.a2();
        let i1 = self.branch_inner(x, a1);
        let i2 = self.branch_inner(x, a2);
        DenseVector::new(vec![i1 * a1[0] + i2 * a2[0], i1 * a1[1] + i2 * a2[1]]).unwrap()
    }

    fn coordinate_smoothness(&self) -> &[f64] {
        &self.smoothness
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Unbiased two-branch oracle: returns 2 <a_i, x> a_i with i in {1, 2}
/// chosen with probability 1/2 each.
pub struct CounterexampleOracle {
    problem: Arc<Counterexample>,
}

impl Oracle for CounterexampleOracle {
    fn dim(&self) -> usize {
        2
    }

    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector {
        let branch = rng.uniform_int(0, 2) as usize;
        self.problem.branch_gradient(x, branch)
    }
}

pub fn counterexample_problem(
    eps: f64,
) -> Result<(Arc<Counterexample>, Arc<CounterexampleOracle>)> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::domain(format!("eps = {eps} outside (0, 1)")));
    }
    let a1 = [1.0 + eps, -1.0 + eps];
    let a2 = [-1.0 + eps, 1.0 + eps];
    // Hessian A = a1 a1^T + a2 a2^T is constant; L_i = sum_j |A_ij| makes
    // the coordinate-wise descent inequality hold for all pairs.
    let mut smoothness = vec![0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            smoothness[i] += (a1[i] * a1[j] + a2[i] * a2[j]).abs();
        }
    }
    let problem = Arc::new(Counterexample { eps, smoothness });
    let oracle = Arc::new(CounterexampleOracle {
        problem: problem.clone(),
    });
    Ok((problem, oracle))
}

// ---------------------------------------------------------------------------
// Quadratics

/// Separable quadratic f(x) = (1/2) sum_i diag_i (x_i - center_i)^2 with
/// exactly known L_i = diag_i and f* = 0.
pub struct Quadratic {
    center: Vec<f64>,
    diag: Vec<f64>,
}

impl Quadratic {
    pub fn new(center: Vec<f64>, diag: Vec<f64>) -> Result<Arc<Self>> {
        if center.len() != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: diag.len(),
            });
        }
        if let Some(&bad) = diag.iter().find(|&&a| a <= 0.0) {
            return Err(Error::domain(format!("nonpositive curvature {bad}")));
        }
        Ok(Arc::new(Quadratic { center, diag }))
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        self.diag
            .iter()
            .zip(&self.center)
            .enumerate()
            .map(|(i, (&a, &c))| 0.5 * a * (x[i] - c) * (x[i] - c))
            .sum()
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        DenseVector::new(
            self.diag
                .iter()
                .zip(&self.center)
                .enumerate()
                .map(|(i, (&a, &c))| a * (x[i] - c))
                .collect(),
        )
        .unwrap()
    }

    fn coordinate_smoothness(&self) -> &[f64] {
        &self.diag
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Exact gradient plus independent N(0, sigma_i^2) per-coordinate noise;
/// unbiased, unimodal and symmetric, so the Gauss-inequality bound applies.
pub struct GaussianOracle {
    objective: Arc<dyn Objective>,
    noise_sigma: Vec<f64>,
}

impl GaussianOracle {
    pub fn new(objective: Arc<dyn Objective>, noise_sigma: Vec<f64>) -> Result<Arc<Self>> {
        if noise_sigma.len() != objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                got: noise_sigma.len(),
            });
        }
        if let Some(&bad) = noise_sigma.iter().find(|&&s| s < 0.0) {
            return Err(Error::domain(format!("negative noise sigma {bad}")));
        }
        Ok(Arc::new(GaussianOracle {
            objective,
            noise_sigma,
        }))
    }
}

impl Oracle for GaussianOracle {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector {
        let mut g = self.objective.gradient(x).into_vec();
        for (gi, &s) in g.iter_mut().zip(&self.noise_sigma) {
            if s > 0.0 {
                *gi += s * rng.normal();
            }
        }
        DenseVector::new(g).unwrap()
    }
}

/// Origin-centered quadratic test bed with per-coordinate Gaussian noise.
pub fn quadratic_problem(
    diag: Vec<f64>,
    noise_sigma: Vec<f64>,
) -> Result<(Arc<Quadratic>, Arc<GaussianOracle>)> {
    let objective = Quadratic::new(vec![0.0; diag.len()], diag)?;
    let oracle = GaussianOracle::new(objective.clone(), noise_sigma)?;
    Ok((objective, oracle))
}

// ---------------------------------------------------------------------------
// Partitioned problems

/// One node of a partitioned problem: its loss, oracle, variance bound
/// sigma_n (on the full-vector noise norm) and smoothness L^n.
#[derive(Clone)]
pub struct PartitionedNode {
    pub objective: Arc<dyn Objective>,
    pub oracle: Arc<dyn Oracle>,
    pub sigma: f64,
    pub smoothness: f64,
}

/// f(x) = (1/M) sum_n f_n(x) with per-node oracles.
pub struct PartitionedProblem {
    nodes: Vec<PartitionedNode>,
    dim: usize,
}

impl PartitionedProblem {
    pub fn new(nodes: Vec<PartitionedNode>) -> Result<Self> {
        let dim = nodes
            .first()
            .ok_or_else(|| Error::domain("partitioned problem needs at least one node"))?
            .objective
            .dim();
        for n in &nodes {
            if n.objective.dim() != dim || n.oracle.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: n.objective.dim(),
                });
            }
        }
        Ok(PartitionedProblem { nodes, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[PartitionedNode] {
        &self.nodes
    }

    pub fn value(&self, x: &DenseVector) -> f64 {
        self.nodes.iter().map(|n| n.objective.value(x)).sum::<f64>() / self.nodes.len() as f64
    }

    pub fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = DenseVector::zeros(self.dim);
        for n in &self.nodes {
            g.axpy(1.0 / self.nodes.len() as f64, &n.objective.gradient(x))
                .unwrap();
        }
        g
    }

    /// sigma-tilde = (1/M) sum sigma_n of the SSDM rate bound.
    pub fn sigma_tilde(&self) -> f64 {
        self.nodes.iter().map(|n| n.sigma).sum::<f64>() / self.nodes.len() as f64
    }

    /// L-tilde = (1/M) sum L^n of the SSDM rate bound.
    pub fn l_tilde(&self) -> f64 {
        self.nodes.iter().map(|n| n.smoothness).sum::<f64>() / self.nodes.len() as f64
    }
}

/// Node description for `partitioned_quadratics`.
#[derive(Debug, Clone)]
pub struct QuadraticNodeSpec {
    pub center: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Per-coordinate noise standard deviation of the node oracle.
    pub noise_sd: f64,
}

/// M quadratic nodes, each with its own center/curvature and unbiased
/// Gaussian oracle; exposes analytic sigma_n and L^n.
pub fn partitioned_quadratics(specs: &[QuadraticNodeSpec]) -> Result<PartitionedProblem> {
    let mut nodes = Vec::with_capacity(specs.len());
    for spec in specs {
        let objective = Quadratic::new(spec.center.clone(), spec.curvature.clone())?;
        let d = objective.dim();
        let oracle = GaussianOracle::new(objective.clone(), vec![spec.noise_sd; d])?;
        nodes.push(PartitionedNode {
            sigma: spec.noise_sd * (d as f64).sqrt(),
            smoothness: spec.curvature.iter().fold(0.0f64, |m, &a| m.max(a)),
            objective,
            oracle,
        });
    }
    PartitionedProblem::new(nodes)
}

/// Closed-form minimizer of (1/M) sum_n w_n * (1/2) sum_i a_{n,i}(x_i - c_{n,i})^2:
/// the curvature-weighted mean of the centers.
pub fn weighted_quadratic_minimizer(specs: &[QuadraticNodeSpec], weights: &[f64]) -> DenseVector {
    let d = specs[0].center.len();
    let x = (0..d)
        .map(|i| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (spec, &w) in specs.iter().zip(weights) {
                num += w * spec.curvature[i] * spec.center[i];
                den += w * spec.curvature[i];
            }
            num / den
        })
        .collect();
    DenseVector::new(x).unwrap()
}

struct ScaledObjective {
    inner: Arc<dyn Objective>,
    weight: f64,
    smoothness: Vec<f64>,
}

impl Objective for ScaledObjective {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        self.weight * self.inner.value(x)
    }
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.inner.gradient(x).scaled(self.weight)
    }
    fn coordinate_smoothness(&self) -> &[f64] {
        &self.smoothness
    }
    fn optimum_value(&self) -> Option<f64> {
        self.inner.optimum_value().map(|v| self.weight * v)
    }
}

struct ScaledOracle {
    inner: Arc<dyn Oracle>,
    weight: f64,
}

impl Oracle for ScaledOracle {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector {
        self.inner.sample(x, rng).scaled(self.weight)
    }
    fn bias_allowed(&self) -> bool {
        self.inner.bias_allowed()
    }
}

/// Multiplies each node's loss (and therefore its gradients, oracle
/// samples, sigma_n and L^n) by a positive weight w_n. Node gradient signs
/// are unchanged at every point, which is exactly what makes deterministic
/// sign descent blind to the weights.
pub fn scale_nodes(p: &PartitionedProblem, weights: &[f64]) -> Result<PartitionedProblem> {
    if weights.len() != p.node_count() {
        return Err(Error::DimensionMismatch {
            expected: p.node_count(),
            got: weights.len(),
        });
    }
    if let Some(&bad) = weights.iter().find(|&&w| w <= 0.0) {
        return Err(Error::domain(format!("nonpositive weight {bad}")));
    }
    let nodes = p
        .nodes
        .iter()
        .zip(weights)
        .map(|(n, &w)| PartitionedNode {
            objective: Arc::new(ScaledObjective {
                inner: n.objective.clone(),
                weight: w,
                smoothness: n
                    .objective
                    .coordinate_smoothness()
                    .iter()
                    .map(|&l| w * l)
                    .collect(),
            }),
            oracle: Arc::new(ScaledOracle {
                inner: n.oracle.clone(),
                weight: w,
            }),
            sigma: w * n.sigma,
            smoothness: w * n.smoothness,
        })
        .collect();
    PartitionedProblem::new(nodes)
}

// ---------------------------------------------------------------------------
// Mini-batching

/// Averages tau i.i.d. samples of the base oracle; variance drops by a
/// factor of tau.
pub struct Minibatch {
    inner: Arc<dyn Oracle>,
    tau: usize,
}

impl Minibatch {
    pub fn tau(&self) -> usize {
        self.tau
    }
}

pub fn minibatch(oracle: Arc<dyn Oracle>, tau: usize) -> Result<Arc<Minibatch>> {
    if tau == 0 {
        return Err(Error::domain("mini-batch size tau must be positive"));
    }
    Ok(Arc::new(Minibatch { inner: oracle, tau }))
}

impl Oracle for Minibatch {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sample(&self, x: &DenseVector, rng: &mut RandomSource) -> DenseVector {
        let mut acc = DenseVector::zeros(self.dim());
        for _ in 0..self.tau {
            acc.axpy(1.0 / self.tau as f64, &self.inner.sample(x, rng))
                .unwrap();
        }
        acc
    }

    fn bias_allowed(&self) -> bool {
        self.inner.bias_allowed()
    }
}

/// Central finite-difference gradient, the independent oracle for
/// analytic-gradient checks.
pub fn finite_difference_gradient(
    objective: &dyn Objective,
    x: &DenseVector,
    h: f64,
) -> DenseVector {
    let d = objective.dim();
    let mut g = vec![0.0; d];
    let mut xp = x.as_slice().to_vec();
    for i in 0..d {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = objective.value(&DenseVector::new(xp.clone()).unwrap());
        xp[i] = orig - h;
        let fm = objective.value(&DenseVector::new(xp.clone()).unwrap());
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    DenseVector::new(g).unwrap()
}
