//! The stable combination test and the classical baselines it generalizes.
//!
//! Each p-value is mapped through the upper quantile of a standardized stable
//! law, `W_i = F^{-1}(1 − p_i | α, β)`, and the weighted sum is rescaled so
//! that under independence it follows `S(α, β)` exactly:
//!
//! ```text
//! T = a_{n;α} Σ w_i W_i,   a_{n;α} = (Σ w_j^α)^{−1/α}
//! ```
//!
//! The test rejects when `T` exceeds the upper `s` quantile of `S(α, β)`.

use std::f64::consts::{PI, SQRT_2};

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{check_param, Error, Result};
use crate::stable::{EvalPolicy, StableParams};

/// Tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Interval into which p-values are clamped before transformation, so that
/// `p = 0` and `p = 1` map to finite scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    lo: f64,
    hi: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            lo: 1e-6,
            hi: 1.0 - 1e-6,
        }
    }
}

impl Truncation {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check_param(
            "truncation.lo",
            lo,
            lo > 0.0 && lo < 1.0,
            "must lie in (0, 1)",
        )?;
        check_param(
            "truncation.hi",
            hi,
            hi > lo && hi < 1.0,
            "must lie in (lo, 1)",
        )?;
        Ok(Truncation { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn apply(&self, p: f64) -> f64 {
        p.clamp(self.lo, self.hi)
    }
}

/// Non-empty list of p-values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector {
    values: Vec<f64>,
}

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("p-value vector"));
        }
        for &p in &values {
            check_param("p-value", p, (0.0..=1.0).contains(&p), "must lie in [0, 1]")?;
        }
        Ok(PValueVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn truncated(&self, truncation: &Truncation) -> PValueVector {
        PValueVector {
            values: self.values.iter().map(|&p| truncation.apply(p)).collect(),
        }
    }
}

/// Positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        for &w in &weights {
            check_param("weight", w, w > 0.0, "must be positive")?;
        }
        let sum: f64 = weights.iter().sum();
        check_param(
            "weight sum",
            sum,
            (sum - 1.0).abs() <= WEIGHT_SUM_TOL,
            "weights must sum to 1",
        )?;
        Ok(WeightVector { weights })
    }

    /// `w_i = 1/n`.
    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("weight vector"));
        }
        Ok(WeightVector {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Rescales positive raw weights to sum to one.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        for &w in raw {
            check_param("weight", w, w > 0.0, "must be positive")?;
        }
        let sum: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|w| w / sum).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `min_i w_i ≥ c₀ / n`, the balance condition used for the power theory.
    pub fn satisfies_power_regime(&self, c0: f64) -> bool {
        let n = self.weights.len() as f64;
        self.weights.iter().all(|&w| w >= c0 / n)
    }
}

/// Parameters of one stable combination test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SctConfig {
    alpha: f64,
    beta: f64,
    level: f64,
    truncation: Truncation,
}

impl SctConfig {
    /// `0 < α < 2`, `−1 < β ≤ 1`, `β = 0` when `α = 1`, `0 < level < 1`.
    pub fn new(alpha: f64, beta: f64, level: f64) -> Result<Self> {
        check_param(
            "alpha",
            alpha,
            alpha > 0.0 && alpha < 2.0,
            "must lie in (0, 2)",
        )?;
        check_param(
            "beta",
            beta,
            beta > -1.0 && beta <= 1.0,
            "must lie in (-1, 1]",
        )?;
        check_param(
            "beta",
            beta,
            alpha != 1.0 || beta == 0.0,
            "must be 0 when alpha = 1",
        )?;
        check_param(
            "level",
            level,
            level > 0.0 && level < 1.0,
            "must lie in (0, 1)",
        )?;
        Ok(SctConfig {
            alpha,
            beta,
            level,
            truncation: Truncation::default(),
        })
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// The null law `S(α, β)` of the statistic.
    pub fn null_law(&self) -> StableParams {
        StableParams::standard(self.alpha, self.beta).expect("validated at construction")
    }
}

/// Result of a combination test at a fixed level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    /// Critical value `t_s`.
    pub cutoff: f64,
    /// Upper tail probability of the statistic under the null law.
    pub combined_p: f64,
    pub reject: bool,
}

fn check_lengths(p: &PValueVector, w: &WeightVector) -> Result<()> {
    if p.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            got: w.len(),
            expected: p.len(),
        });
    }
    Ok(())
}

/// `a_{n;α} = (Σ w_j^α)^{−1/α}`.
pub fn normalizer(weights: &WeightVector, alpha: f64) -> f64 {
    let s: f64 = weights.values().iter().map(|w| w.powf(alpha)).sum();
    s.powf(-1.0 / alpha)
}

/// `W_i = F^{-1}(1 − p_i | α, β)` for the truncated p-values.
pub fn transform(
    pvalues: &PValueVector,
    alpha: f64,
    beta: f64,
    truncation: &Truncation,
    policy: &EvalPolicy,
) -> Result<Vec<f64>> {
    let law = StableParams::standard(alpha, beta)?;
    pvalues
        .values()
        .iter()
        .map(|&p| law.isf(truncation.apply(p), policy))
        .collect()
}

/// `T = a_{n;α} Σ w_i W_i`.
pub fn sct_statistic(
    pvalues: &PValueVector,
    weights: &WeightVector,
    alpha: f64,
    beta: f64,
    truncation: &Truncation,
    policy: &EvalPolicy,
) -> Result<f64> {
    check_lengths(pvalues, weights)?;
    let scores = transform(pvalues, alpha, beta, truncation, policy)?;
    let sum: f64 = scores
        .iter()
        .zip(weights.values())
        .map(|(x, w)| w * x)
        .sum();
    Ok(normalizer(weights, alpha) * sum)
}

/// Stable combination test: reject iff `T > t_s` with `t_s` the upper `s`
/// quantile of `S(α, β)`; the combined p-value is `1 − F(T | α, β)`.
pub fn sct_test(
    pvalues: &PValueVector,
    weights: &WeightVector,
    config: &SctConfig,
    policy: &EvalPolicy,
) -> Result<TestOutcome> {
    let statistic = sct_statistic(
        pvalues,
        weights,
        config.alpha,
        config.beta,
        &config.truncation,
        policy,
    )?;
    let law = config.null_law();
    let cutoff = law.isf(config.level, policy)?;
    Ok(TestOutcome {
        statistic,
        cutoff,
        combined_p: law.sf(statistic, policy)?,
        reject: statistic > cutoff,
    })
}

/// `tan(π(1/2 − p))`, evaluated as a cotangent near `p = 0` and `p = 1` so the
/// large scores keep full relative precision.
pub fn cauchy_score(p: f64) -> f64 {
    if p < 0.25 {
        1.0 / (PI * p).tan()
    } else if p > 0.75 {
        -1.0 / (PI * (1.0 - p)).tan()
    } else {
        (PI * (0.5 - p)).tan()
    }
}

/// Cauchy combination statistic `Σ w_i tan[π(1/2 − p_i)]`.
pub fn cct_statistic(
    pvalues: &PValueVector,
    weights: &WeightVector,
    truncation: &Truncation,
) -> Result<f64> {
    check_lengths(pvalues, weights)?;
    Ok(pvalues
        .values()
        .iter()
        .zip(weights.values())
        .map(|(&p, w)| w * cauchy_score(truncation.apply(p)))
        .sum())
}

/// `Φ^{-1}(1 − p)`.
pub fn normal_score(p: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * p)
}

/// Stouffer's statistic `(Σ w_j²)^{−1/2} Σ w_i Φ^{-1}(1 − p_i)`.
pub fn stouffer_statistic(
    pvalues: &PValueVector,
    weights: &WeightVector,
    truncation: &Truncation,
) -> Result<f64> {
    check_lengths(pvalues, weights)?;
    let norm: f64 = weights.values().iter().map(|w| w * w).sum::<f64>().sqrt();
    let sum: f64 = pvalues
        .values()
        .iter()
        .zip(weights.values())
        .map(|(&p, w)| w * normal_score(truncation.apply(p)))
        .sum();
    Ok(sum / norm)
}

/// Stouffer's test against the standard normal.
pub fn stouffer_test(
    pvalues: &PValueVector,
    weights: &WeightVector,
    level: f64,
    truncation: &Truncation,
) -> Result<TestOutcome> {
    check_param(
        "level",
        level,
        level > 0.0 && level < 1.0,
        "must lie in (0, 1)",
    )?;
    let statistic = stouffer_statistic(pvalues, weights, truncation)?;
    let cutoff = normal_score(level);
    Ok(TestOutcome {
        statistic,
        cutoff,
        combined_p: 0.5 * erfc(statistic / SQRT_2),
        reject: statistic > cutoff,
    })
}

/// Fisher's statistic `−2 Σ log p_i`. Only the lower truncation bound is
/// applied, since `p = 1` already contributes zero.
pub fn fisher_statistic(pvalues: &PValueVector, truncation: &Truncation) -> f64 {
    -2.0 * pvalues
        .values()
        .iter()
        .map(|&p| p.max(truncation.lo()).ln())
        .sum::<f64>()
}

/// Fisher's test with the chi-square law on `2n` degrees of freedom, exact
/// under independence.
pub fn fisher_test(
    pvalues: &PValueVector,
    level: f64,
    truncation: &Truncation,
) -> Result<TestOutcome> {
    check_param(
        "level",
        level,
        level > 0.0 && level < 1.0,
        "must lie in (0, 1)",
    )?;
    let statistic = fisher_statistic(pvalues, truncation);
    let law = ChiSquared::new(2.0 * pvalues.len() as f64).expect("positive degrees of freedom");
    let cutoff = law.inverse_cdf(1.0 - level);
    Ok(TestOutcome {
        statistic,
        cutoff,
        combined_p: law.sf(statistic),
        reject: statistic > cutoff,
    })
}

/// Bonferroni: reject iff `min p_i < s / n`. Works on raw p-values.
pub fn bonferroni_test(pvalues: &PValueVector, level: f64) -> bool {
    pvalues.min() < level / pvalues.len() as f64
}

/// Bonferroni-adjusted p-value `min(1, n · min p_i)`.
pub fn bonferroni_p(pvalues: &PValueVector) -> f64 {
    (pvalues.len() as f64 * pvalues.min()).min(1.0)
}
