//! Experiment execution: problem/optimizer dispatch from a config,
//! seed-managed repetitions with CSV emission, the canned experiment
//! registry, and the analytical bound tables.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::csv::{format_f64, write_aggregate_csv, write_run_csv};
use crate::optimizers::{
    run_parallel_majority_vote, run_partitioned_majority_vote, run_sgd, run_signsgd, run_ssdm,
    RunRecord, SignOption, SsdmConfig, StepSchedule,
};
use crate::problems::{
    counterexample_problem, minibatch, partitioned_quadratics, quadratic_problem, rosenbrock,
    rosenbrock_component_oracle, rosenbrock_start, Objective, Oracle, PartitionedNode,
    PartitionedProblem, QuadraticNodeSpec,
};
use crate::special::{
    chebyshev_spb_bound, clt_spb_bound, gauss_spb_bound, hoeffding_speedup_bound,
    improved_gauss_spb_bound, majority_threshold, reg_inc_beta_symmetric, required_minibatch,
    MomentEstimates,
};
use crate::vector::DenseVector;

/// Everything a single run needs, assembled from a config.
pub struct BuiltProblem {
    pub objective: Arc<dyn Objective>,
    pub oracle: Arc<dyn Oracle>,
    /// Present for `partitioned-quadratic` and whenever the optimizer is
    /// ssdm (single-node wrap of the base problem otherwise).
    pub partitioned: Option<PartitionedProblem>,
    pub x0: DenseVector,
}

/// Node layout used by the `partitioned-quadratic` problem: `m` quadratic
/// nodes with alternating-sign, growing-offset centers so the nodes
/// genuinely disagree.
pub fn partitioned_quadratic_specs(d: usize, m: usize, nu: f64) -> Vec<QuadraticNodeSpec> {
    (0..m)
        .map(|n| {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            QuadraticNodeSpec {
                center: vec![s * (1.0 + 0.5 * n as f64); d],
                curvature: vec![1.0 + (n % 2) as f64; d],
                noise_sd: nu,
            }
        })
        .collect()
}

pub fn build_problem(config: &ExperimentConfig) -> Result<BuiltProblem> {
    config.validate()?;
    let (objective, oracle, x0, dim): (Arc<dyn Objective>, Arc<dyn Oracle>, Vec<f64>, usize) =
        match config.problem.as_str() {
            "rosenbrock" => {
                let d = config.dim.unwrap_or(10);
                let f = rosenbrock(d)?;
                let oracle = rosenbrock_component_oracle(d, config.nu)?;
                (f, oracle, rosenbrock_start(d).into_vec(), d)
            }
            "counterexample" => {
                if config.dim.is_some_and(|d| d != 2) {
                    return Err(Error::config("counterexample is 2-dimensional"));
                }
                let (f, oracle) = counterexample_problem(config.eps)?;
                (f, oracle, vec![1.0, 1.0], 2)
            }
            "quadratic" => {
                let d = config.dim.unwrap_or(10);
                let (f, oracle) = quadratic_problem(vec![1.0; d], vec![config.nu; d])?;
                (f, oracle, vec![2.0; d], d)
            }
            "partitioned-quadratic" => {
                let d = config.dim.unwrap_or(2);
                let m = config.m.max(2);
                let p = partitioned_quadratics(&partitioned_quadratic_specs(d, m, config.nu))?;
                let x0 = match &config.x0 {
                    Some(v) => v.clone(),
                    None => vec![1.0; d],
                };
                let x0 = DenseVector::new(x0)?;
                x0.check_dim(d)?;
                // node 0 stands in for single-oracle optimizers
                let node = p.nodes()[0].clone();
                return Ok(BuiltProblem {
                    objective: node.objective,
                    oracle: node.oracle,
                    partitioned: Some(p),
                    x0,
                });
            }
            other => return Err(Error::config(format!("unknown problem `{other}`"))),
        };
    let x0 = match &config.x0 {
        Some(v) => DenseVector::new(v.clone())?,
        None => DenseVector::new(x0)?,
    };
    x0.check_dim(dim)?;
    let oracle: Arc<dyn Oracle> = if config.tau > 1 {
        minibatch(oracle, config.tau)?
    } else {
        oracle
    };
    let partitioned = if config.optimizer == "ssdm" {
        // wrap the base problem as M identical nodes with independent streams
        let smoothness = objective
            .coordinate_smoothness()
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        let node = PartitionedNode {
            objective: objective.clone(),
            oracle: oracle.clone(),
            sigma: config.nu * (dim as f64).sqrt() / (config.tau as f64).sqrt(),
            smoothness,
        };
        Some(PartitionedProblem::new(vec![node; config.m])?)
    } else {
        None
    };
    Ok(BuiltProblem {
        objective,
        oracle,
        partitioned,
        x0,
    })
}

fn schedule_of(config: &ExperimentConfig) -> Result<StepSchedule> {
    let s = match config.schedule.as_str() {
        "constant" => StepSchedule::Constant(config.gamma),
        "inverse-sqrt" => StepSchedule::InverseSqrt(config.gamma),
        other => return Err(Error::config(format!("unknown schedule `{other}`"))),
    };
    s.validate()?;
    Ok(s)
}

/// One deterministic run of the configured experiment at the given seed.
pub fn execute_run(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let built = build_problem(config)?;
    let schedule = schedule_of(config)?;
    match config.optimizer.as_str() {
        "signsgd-opt1" => run_signsgd(
            built.objective.as_ref(),
            built.oracle.as_ref(),
            SignOption::One,
            &built.x0,
            &schedule,
            config.k,
            seed,
        ),
        "signsgd-opt2" => run_signsgd(
            built.objective.as_ref(),
            built.oracle.as_ref(),
            SignOption::Two,
            &built.x0,
            &schedule,
            config.k,
            seed,
        ),
        "majority-vote" => match &built.partitioned {
            Some(p) => run_partitioned_majority_vote(p, &built.x0, &schedule, config.k, seed),
            None => run_parallel_majority_vote(
                built.objective.as_ref(),
                built.oracle.as_ref(),
                config.m,
                &built.x0,
                &schedule,
                config.k,
                seed,
            ),
        },
        "ssdm" => {
            let p = built
                .partitioned
                .as_ref()
                .ok_or_else(|| Error::config("ssdm needs a partitioned problem"))?;
            let defaults = SsdmConfig::with_defaults(config.k)?;
            let ssdm = SsdmConfig {
                k_total: config.k,
                beta: config.beta.unwrap_or(defaults.beta),
                gamma: config.gamma,
            }
            .validated()?;
            run_ssdm(p, &ssdm, &built.x0, seed)
        }
        "sgd" => run_sgd(
            built.objective.as_ref(),
            built.oracle.as_ref(),
            &built.x0,
            &schedule,
            config.k,
            seed,
        ),
        other => Err(Error::config(format!("unknown optimizer `{other}`"))),
    }
}

/// Result of one experiment: per-rep CSV paths, the aggregate CSV, and the
/// final-f summary over repetitions.
#[derive(Debug)]
pub struct ExperimentSummary {
    pub id: String,
    pub run_paths: Vec<PathBuf>,
    pub aggregate_path: PathBuf,
    pub final_f_mean: f64,
    pub final_f_std: f64,
}

/// Runs `config.reps` deterministic repetitions (seed + rep), writes one
/// CSV per repetition plus an aggregate CSV with mean/std (R - 1 divisor)
/// per checkpoint.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let records: Vec<RunRecord> = (0..config.reps)
        .into_par_iter()
        .map(|rep| execute_run(config, config.seed + rep as u64))
        .collect::<Result<_>>()?;
    let mut run_paths = Vec::with_capacity(config.reps);
    for (rep, record) in records.iter().enumerate() {
        let path = out_dir.join(format!("{}-rep{rep}.csv", config.id));
        write_run_csv(&path, config, record, rep)?;
        run_paths.push(path);
    }
    let aggregate_path = out_dir.join(format!("{}-aggregate.csv", config.id));
    write_aggregate_csv(&aggregate_path, config, &records)?;
    let finals: Vec<f64> = records.iter().map(|r| r.rows.last().unwrap().f).collect();
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let std = if finals.len() > 1 {
        (finals.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (finals.len() as f64 - 1.0))
            .sqrt()
    } else {
        0.0
    };
    Ok(ExperimentSummary {
        id: config.id.clone(),
        run_paths,
        aggregate_path,
        final_f_mean: mean,
        final_f_std: std,
    })
}

/// A named, documented set of configs (sweeps hold one config per value).
pub struct CannedExperiment {
    pub id: &'static str,
    pub description: &'static str,
    pub configs: Vec<ExperimentConfig>,
}

fn base_config(
    id: String,
    problem: &str,
    optimizer: &str,
    gamma: f64,
    k: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        id,
        problem: problem.into(),
        optimizer: optimizer.into(),
        schedule: "constant".into(),
        gamma,
        k,
        dim: None,
        m: 1,
        tau: 1,
        nu: 0.0,
        eps: 0.5,
        beta: None,
        reps: 10,
        seed: 42,
        checkpoint_stride: None,
        x0: None,
        out: None,
    }
}

/// Registry of the canned experiments.
pub fn canned_experiments() -> Vec<CannedExperiment> {
    let mut all = Vec::new();

    all.push(CannedExperiment {
        id: "counterexample",
        description: "plain sign descent trapped on the adversarial 2-d least-squares problem (constant gamma = 0.02, K = 1000)",
        configs: vec![base_config("counterexample".into(), "counterexample", "signsgd-opt1", 0.02, 1_000)],
    });

    let vote_sweep = |id_prefix: &str, ms: &[usize]| -> Vec<ExperimentConfig> {
        ms.iter()
            .map(|&m| {
                let mut c = base_config(
                    format!("{id_prefix}-m{m}"),
                    "rosenbrock",
                    "majority-vote",
                    0.02,
                    10_000,
                );
                c.nu = 5.0;
                c.m = m;
                c
            })
            .collect()
    };
    all.push(CannedExperiment {
        id: "majority-vote",
        description:
            "majority-vote sign descent on noisy Rosenbrock, node sweep M in {1, 3, 4, 15, 16}",
        configs: vote_sweep("majority-vote", &[1, 3, 4, 15, 16]),
    });

    let tau_sweep =
        |id_prefix: &str, optimizer: &str, schedule: &str, gamma: f64| -> Vec<ExperimentConfig> {
            [1usize, 2, 5, 8]
                .iter()
                .map(|&tau| {
                    let mut c = base_config(
                        format!("{id_prefix}-tau{tau}"),
                        "rosenbrock",
                        optimizer,
                        gamma,
                        10_000,
                    );
                    c.schedule = schedule.into();
                    c.nu = 5.0;
                    c.tau = tau;
                    c
                })
                .collect()
        };
    all.push(CannedExperiment {
        id: "fig3-const-lr",
        description:
            "noisy Rosenbrock, constant gamma = 0.25, mini-batch sweep tau in {1, 2, 5, 8}",
        configs: tau_sweep("fig3-const-lr", "signsgd-opt1", "constant", 0.25),
    });
    all.push(CannedExperiment {
        id: "rosenbrock-noise-sweep",
        description:
            "alias of the constant-step mini-batch sweep with a smaller step (gamma = 0.05)",
        configs: tau_sweep("rosenbrock-noise-sweep", "signsgd-opt1", "constant", 0.05),
    });
    all.push(CannedExperiment {
        id: "fig4-var-lr",
        description: "noisy Rosenbrock, decreasing gamma_k = 0.25/sqrt(k+1), mini-batch sweep tau in {1, 2, 5, 8}",
        configs: tau_sweep("fig4-var-lr", "signsgd-opt1", "inverse-sqrt", 0.25),
    });
    all.push(CannedExperiment {
        id: "fig5-const-step",
        description:
            "noisy Rosenbrock with the value-guarded sign step, constant gamma = 0.25, tau sweep",
        configs: tau_sweep("fig5-const-step", "signsgd-opt2", "constant", 0.25),
    });

    let mut ssdm = base_config(
        "ssdm-partitioned".into(),
        "partitioned-quadratic",
        "ssdm",
        0.0,
        20_000,
    );
    ssdm.gamma = (20_000f64).powf(-0.75);
    ssdm.m = 2;
    ssdm.nu = 0.5;
    all.push(CannedExperiment {
        id: "ssdm-partitioned",
        description: "momentum stochastic-sign descent on a 2-node partitioned quadratic (default beta and gamma for K = 20000)",
        configs: vec![ssdm.clone()],
    });

    let mut vote = ssdm.clone();
    vote.id = "ssdm-vs-majority-vote-vote".into();
    vote.optimizer = "majority-vote".into();
    vote.gamma = 0.005;
    let mut ssdm_cmp = ssdm;
    ssdm_cmp.id = "ssdm-vs-majority-vote-ssdm".into();
    all.push(CannedExperiment {
        id: "ssdm-vs-majority-vote",
        description: "same partitioned quadratic run under majority-vote sign descent (converges to the wrong point) and SSDM",
        configs: vec![vote, ssdm_cmp],
    });

    all.push(CannedExperiment {
        id: "bound-validation",
        description:
            "analytical success-probability bound tables (no runs); same output as `bounds`",
        configs: Vec::new(),
    });
    all.push(CannedExperiment {
        id: "norm-table",
        description: "majority-vote norm sandwich and beta-function tables (no runs); same output as `bounds`",
        configs: Vec::new(),
    });
    all
}

pub fn canned(id: &str) -> Option<CannedExperiment> {
    canned_experiments().into_iter().find(|c| c.id == id)
}

/// Human-readable table of canned experiment ids and descriptions.
pub fn list_experiments() -> String {
    let all = canned_experiments();
    let width = all.iter().map(|c| c.id.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in all {
        out.push_str(&format!("{:width$}  {}\n", c.id, c.description));
    }
    out
}

/// Writes the analytical bound tables as one CSV. Each row names its
/// table; unused parameter columns are left empty.
///
/// Tables:
/// - gauss / improved-gauss over (|g|, sigma) grids
/// - chebyshev / clt over (sigma, tau) grids at mu = 1
/// - required-minibatch over sigma at mu = 1 (Gaussian third moment)
/// - hoeffding over (rho, M)
/// - beta: I(rho; l, l) over (rho, M = 2l - 1)
/// - sandwich-lower / sandwich-ratio over (rho, M): the Hoeffding factor
///   and the rho_M / l1 norm ratio (equal to 2 I(rho; l, l) - 1)
pub fn emit_bound_tables(path: &Path) -> Result<()> {
    let mut out = String::from(
        "# signdesc analytical bound tables; value column semantics depend on the table column\n",
    );
    out.push_str("table,rho,m,abs_g,sigma,nu,mu,tau,value\n");
    let mut row = |table: &str,
                   rho: Option<f64>,
                   m: Option<u64>,
                   abs_g: Option<f64>,
                   sigma: Option<f64>,
                   nu: Option<f64>,
                   mu: Option<f64>,
                   tau: Option<u64>,
                   value: f64| {
        let fmt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        let fmt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{table},{},{},{},{},{},{},{},{}\n",
            fmt(rho),
            fmt_u(m),
            fmt(abs_g),
            fmt(sigma),
            fmt(nu),
            fmt(mu),
            fmt_u(tau),
            format_f64(value)
        ));
    };

    let grid = [0.1, 1.0, 10.0];
    for &g in &grid {
        for &s in &grid {
            row(
                "gauss",
                None,
                None,
                Some(g),
                Some(s),
                None,
                None,
                None,
                gauss_spb_bound(g, s)?,
            );
            row(
                "improved-gauss",
                None,
                None,
                Some(g),
                Some(s),
                None,
                None,
                None,
                improved_gauss_spb_bound(g, s)?,
            );
        }
    }

    // E|Z - mu|^3 = 2 sqrt(2/pi) sigma^3 for Gaussian noise
    let nu3_ratio = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    for &s in &[0.2, 0.5, 1.0, 2.0] {
        for &tau in &[1u64, 2, 5, 8] {
            row(
                "chebyshev",
                None,
                None,
                None,
                Some(s),
                None,
                Some(1.0),
                Some(tau),
                chebyshev_spb_bound(1.0, s * s, tau)?,
            );
            let nu = nu3_ratio.cbrt() * s;
            row(
                "clt",
                None,
                None,
                None,
                Some(s),
                Some(nu),
                Some(1.0),
                Some(tau),
                clt_spb_bound(1.0, s, nu, tau)?,
            );
        }
        let moments = MomentEstimates {
            mean: 1.0,
            variance: s * s,
            third_central: nu3_ratio * s * s * s,
            sample_count: 0,
        };
        row(
            "required-minibatch",
            None,
            None,
            None,
            Some(s),
            None,
            Some(1.0),
            None,
            required_minibatch(&moments)?,
        );
    }

    let mut rho = 0.55;
    while rho <= 0.951 {
        for m in 1u64..=15 {
            let l = majority_threshold(m);
            row(
                "hoeffding",
                Some(rho),
                Some(m),
                None,
                None,
                None,
                None,
                None,
                hoeffding_speedup_bound(rho, m)?,
            );
            row(
                "sandwich-lower",
                Some(rho),
                Some(m),
                None,
                None,
                None,
                None,
                None,
                hoeffding_speedup_bound(rho, m)?,
            );
            row(
                "sandwich-ratio",
                Some(rho),
                Some(m),
                None,
                None,
                None,
                None,
                None,
                2.0 * reg_inc_beta_symmetric(rho, l)? - 1.0,
            );
        }
        rho += 0.05;
    }

    let mut p = 0.05;
    while p <= 0.951 {
        for l in 1u64..=4 {
            row(
                "beta",
                Some(p),
                Some(2 * l - 1),
                None,
                None,
                None,
                None,
                None,
                reg_inc_beta_symmetric(p, l)?,
            );
        }
        p += 0.05;
    }
    // the worked value I(0.6; 2, 2) = 0.648 lands on the p = 0.6, m = 3 row

    std::fs::write(path, &out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
