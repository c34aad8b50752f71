use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::alternative::{sparse_mean_into, AlternativeSpec};
use super::method::{Evaluator, Method, Replicate};
use super::model::{two_sided_p, CorrelationModel, MvnSampler};
use super::report::{CellFailure, Estimate, Metric, PowerReport, ResultRow};
use crate::combine::Truncation;
use crate::error::{check_param, Error, Result};
use crate::stable::{EvalPolicy, QuantileTable};

/// Which random stream a replication belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Null,
    Alternative,
}

/// Settings of a Monte Carlo study. The default reproduces the standard
/// design: `n = 40`, 1000 replications, level 5%, truncation at `10⁻⁶`, the
/// four correlation models with `ρ ∈ {0.2, 0.4, 0.6, 0.8}`, `α = 0.1, …, 1.9`,
/// `β = −0.8, …, 1`, CCT and Stouffer, and the sparse alternative
/// `γ = 0.43, r = 0.54`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub reps: usize,
    pub level: f64,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
    pub models: Vec<CorrelationModel>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub include_cct: bool,
    pub include_stouffer: bool,
    pub include_fisher: bool,
    pub include_bonferroni: bool,
    /// `None` runs the null stage only.
    pub alternative: Option<AlternativeSpec>,
    pub truncation: Truncation,
    pub policy: EvalPolicy,
}

pub const DEFAULT_SEED: u64 = 20_240_617;

/// `α = 0.1, 0.3, …, 1.9`.
pub fn default_alphas() -> Vec<f64> {
    (0..10).map(|k| (2 * k + 1) as f64 / 10.0).collect()
}

/// `β = −0.8, −0.6, …, 1`.
pub fn default_betas() -> Vec<f64> {
    (-4..=5).map(|k| k as f64 / 5.0).collect()
}

/// Model 1 plus Models 2–4 at `ρ ∈ {0.2, 0.4, 0.6, 0.8}`.
pub fn default_models() -> Vec<CorrelationModel> {
    let rhos = [0.2, 0.4, 0.6, 0.8];
    let mut models = vec![CorrelationModel::Independent];
    models.extend(rhos.iter().map(|&rho| CorrelationModel::Ar1 { rho }));
    models.extend(
        rhos.iter()
            .map(|&rho| CorrelationModel::Exchangeable { rho }),
    );
    models.extend(rhos.iter().map(|&rho| CorrelationModel::PolyDecay { rho }));
    models
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n: 40,
            reps: 1000,
            level: 0.05,
            seed: DEFAULT_SEED,
            threads: 0,
            models: default_models(),
            alphas: default_alphas(),
            betas: default_betas(),
            include_cct: true,
            include_stouffer: true,
            include_fisher: false,
            include_bonferroni: false,
            alternative: Some(AlternativeSpec::default()),
            truncation: Truncation::default(),
            policy: EvalPolicy::default(),
        }
    }
}

impl SimulationConfig {
    /// A configuration with a single model and no methods selected.
    pub fn single(model: CorrelationModel) -> Self {
        SimulationConfig {
            models: vec![model],
            alphas: Vec::new(),
            betas: Vec::new(),
            include_cct: false,
            include_stouffer: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Empty("tests per replication (n)"));
        }
        if self.reps == 0 {
            return Err(Error::Empty("replications (reps)"));
        }
        check_param(
            "level",
            self.level,
            self.level > 0.0 && self.level < 1.0,
            "must lie in (0, 1)",
        )?;
        for m in &self.models {
            m.validate(self.n)?;
        }
        for &a in &self.alphas {
            check_param("alpha", a, a > 0.0 && a < 2.0, "must lie in (0, 2)")?;
        }
        for &b in &self.betas {
            check_param("beta", b, b > -1.0 && b <= 1.0, "must lie in (-1, 1]")?;
        }
        self.policy.validate()
    }

    /// Methods in output order: SCT over `alphas × betas` (skipping `α = 1`
    /// with `β ≠ 0`), then the selected baselines.
    pub fn methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for &alpha in &self.alphas {
            for &beta in &self.betas {
                if alpha == 1.0 && beta != 0.0 {
                    continue;
                }
                out.push(Method::Sct { alpha, beta });
            }
        }
        if self.include_cct {
            out.push(Method::Cct);
        }
        if self.include_stouffer {
            out.push(Method::Stouffer);
        }
        if self.include_fisher {
            out.push(Method::Fisher);
        }
        if self.include_bonferroni {
            out.push(Method::Bonferroni);
        }
        out
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|_| Error::InvalidParameter {
                name: "threads",
                value: self.threads as f64,
                reason: "thread pool could not be created",
            })
    }
}

/// Generator for one replication. The 256-bit key packs the master seed, the
/// model, `n` and the stage; the replication index selects the ChaCha stream.
/// Draws therefore depend only on these values, never on scheduling.
pub fn replication_rng(
    seed: u64,
    model: &CorrelationModel,
    n: usize,
    stage: Stage,
    rep: u64,
) -> ChaCha8Rng {
    let stage_tag: u64 = match stage {
        Stage::Null => 0,
        Stage::Alternative => 1,
    };
    let words = [
        seed,
        model.rho().to_bits(),
        (u64::from(model.number()) << 32) | n as u64,
        stage_tag,
    ];
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(rep);
    rng
}

/// Statistics of every evaluator for each replication of one stage,
/// `out[rep][method]`.
pub fn stage_statistics(
    config: &SimulationConfig,
    model: &CorrelationModel,
    stage: Stage,
    evaluators: &[Evaluator],
) -> Result<Vec<Vec<f64>>> {
    let sampler = MvnSampler::new(model, config.n)?;
    let alternative = match stage {
        Stage::Null => None,
        Stage::Alternative => config.alternative,
    };
    let n = config.n;
    let run = || {
        (0..config.reps as u64)
            .into_par_iter()
            .map_init(
                || {
                    (
                        vec![0.0; n],
                        vec![0.0; n],
                        vec![0.0; n],
                        Replicate::with_capacity(n),
                    )
                },
                |(mean, z, x, rep_buf), rep| {
                    let mut rng = replication_rng(config.seed, model, n, stage, rep);
                    let mean = match &alternative {
                        Some(spec) => {
                            sparse_mean_into(spec, &mut rng, mean);
                            Some(&mean[..])
                        }
                        None => None,
                    };
                    sampler.sample_into(mean, &mut rng, z, x);
                    rep_buf.fill(x.iter().map(|&v| two_sided_p(v)), &config.truncation);
                    evaluators
                        .iter()
                        .map(|e| e.statistic(rep_buf))
                        .collect::<Vec<f64>>()
                },
            )
            .collect()
    };
    Ok(config.pool()?.install(run))
}

/// Statistics of one evaluator under i.i.d. uniform p-values, the exact null
/// of the independent case.
pub fn uniform_null_statistics(
    evaluator: &Evaluator,
    n: usize,
    draws: usize,
    seed: u64,
    truncation: &Truncation,
    threads: usize,
) -> Result<Vec<f64>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|_| Error::InvalidParameter {
            name: "threads",
            value: threads as f64,
            reason: "thread pool could not be created",
        })?;
    let marker = CorrelationModel::Independent;
    Ok(pool.install(|| {
        (0..draws as u64)
            .into_par_iter()
            .map_init(
                || Replicate::with_capacity(n),
                |buf, rep| {
                    // The seed mask keeps these streams apart from Gaussian runs.
                    let mut rng =
                        replication_rng(seed ^ 0x9e37_79b9_7f4a_7c15, &marker, n, Stage::Null, rep);
                    buf.fill((0..n).map(|_| rng.random::<f64>()), truncation);
                    evaluator.statistic(buf)
                },
            )
            .collect()
    }))
}

/// Empirical quantile with linear interpolation between order statistics
/// (the default definition of R and NumPy).
pub fn empirical_quantile(values: &[f64], prob: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Size, raw power and size-adjusted power of one method in one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEstimates {
    pub size: Estimate,
    pub raw_power: Option<Estimate>,
    pub adj_power: Option<Estimate>,
}

fn proportion(hits: usize, reps: usize) -> Estimate {
    Estimate::from_counts(hits, reps)
}

/// Combines the null and alternative statistics of one method.
///
/// The null replications give the size and, through their empirical
/// `1 − s` quantile, the cutoff for the size-adjusted power; the alternative
/// replications are scored against both cutoffs.
fn summarize(
    evaluator: &Evaluator,
    null: &[f64],
    alt: Option<&[f64]>,
    level: f64,
) -> CellEstimates {
    let reps = null.len();
    let size = proportion(null.iter().filter(|&&t| evaluator.rejects(t)).count(), reps);
    let (raw_power, adj_power) = match alt {
        None => (None, None),
        Some(alt) => {
            let empirical = empirical_quantile(null, 1.0 - level);
            let raw = alt.iter().filter(|&&t| evaluator.rejects(t)).count();
            let adj = alt.iter().filter(|&&t| t > empirical).count();
            (
                Some(proportion(raw, alt.len())),
                Some(proportion(adj, alt.len())),
            )
        }
    };
    CellEstimates {
        size,
        raw_power,
        adj_power,
    }
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// All three estimates for one method in one model.
pub fn estimate_cell(
    config: &SimulationConfig,
    model: &CorrelationModel,
    method: Method,
) -> Result<CellEstimates> {
    config.validate()?;
    model.validate(config.n)?;
    let e = Evaluator::new(
        method,
        config.n,
        config.level,
        &config.truncation,
        None,
        &config.policy,
    )?;
    let evaluators = [e];
    let null = column(
        &stage_statistics(config, model, Stage::Null, &evaluators)?,
        0,
    );
    let alt = match config.alternative {
        Some(_) => Some(column(
            &stage_statistics(config, model, Stage::Alternative, &evaluators)?,
            0,
        )),
        None => None,
    };
    Ok(summarize(
        &evaluators[0],
        &null,
        alt.as_deref(),
        config.level,
    ))
}

/// Rejection rate under the global null with the distributional cutoff.
pub fn estimate_size(
    config: &SimulationConfig,
    model: &CorrelationModel,
    method: Method,
) -> Result<Estimate> {
    let null_only = SimulationConfig {
        alternative: None,
        ..config.clone()
    };
    Ok(estimate_cell(&null_only, model, method)?.size)
}

/// Rejection rate under the sparse alternative with the distributional
/// cutoff.
pub fn estimate_raw_power(
    config: &SimulationConfig,
    model: &CorrelationModel,
    method: Method,
) -> Result<Estimate> {
    estimate_cell(config, model, method)?
        .raw_power
        .ok_or(Error::Empty("alternative specification"))
}

/// Rejection rate under the sparse alternative with the cutoff set to the
/// empirical `1 − s` quantile of the null replications.
pub fn estimate_size_adjusted_power(
    config: &SimulationConfig,
    model: &CorrelationModel,
    method: Method,
) -> Result<Estimate> {
    estimate_cell(config, model, method)?
        .adj_power
        .ok_or(Error::Empty("alternative specification"))
}

/// Runs every model × method cell. Cells whose setup fails numerically are
/// listed in the report instead of aborting the run.
pub fn grid_run(config: &SimulationConfig) -> Result<PowerReport> {
    config.validate()?;
    let methods = config.methods();
    let pool = config.pool()?;

    // One table per (α, β), shared by all models.
    let tables: Vec<Option<Result<Arc<QuantileTable>>>> = pool.install(|| {
        methods
            .par_iter()
            .map(|m| match *m {
                Method::Sct { alpha, beta } => Some(
                    Evaluator::table_for(alpha, beta, &config.truncation, &config.policy)
                        .map(Arc::new),
                ),
                _ => None,
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut evaluators = Vec::new();
    for (method, table) in methods.iter().zip(tables) {
        let table = match table {
            Some(Ok(t)) => Some(t),
            Some(Err(e)) => {
                failures.push(CellFailure {
                    model: None,
                    method: *method,
                    message: e.to_string(),
                });
                continue;
            }
            None => None,
        };
        match Evaluator::new(
            *method,
            config.n,
            config.level,
            &config.truncation,
            table,
            &config.policy,
        ) {
            Ok(e) => evaluators.push(e),
            Err(e) => failures.push(CellFailure {
                model: None,
                method: *method,
                message: e.to_string(),
            }),
        }
    }

    let mut rows = Vec::new();
    for model in &config.models {
        let stats = stage_statistics(config, model, Stage::Null, &evaluators).and_then(|null| {
            let alt = match config.alternative {
                Some(_) => Some(stage_statistics(
                    config,
                    model,
                    Stage::Alternative,
                    &evaluators,
                )?),
                None => None,
            };
            Ok((null, alt))
        });
        let (null, alt) = match stats {
            Ok(s) => s,
            Err(e) => {
                for e_ in &evaluators {
                    failures.push(CellFailure {
                        model: Some(*model),
                        method: e_.method(),
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        for (k, e) in evaluators.iter().enumerate() {
            let null_k = column(&null, k);
            let alt_k = alt.as_ref().map(|a| column(a, k));
            let est = summarize(e, &null_k, alt_k.as_deref(), config.level);
            let mut push = |metric, estimate: Estimate| {
                rows.push(ResultRow {
                    model: *model,
                    method: e.method(),
                    metric,
                    estimate,
                    seed: config.seed,
                })
            };
            push(Metric::Size, est.size);
            if let Some(r) = est.raw_power {
                push(Metric::RawPower, r);
            }
            if let Some(a) = est.adj_power {
                push(Metric::AdjPower, a);
            }
        }
    }
    Ok(PowerReport { rows, failures })
}
