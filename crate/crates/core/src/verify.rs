//! Numeric checks of the tail bounds, the normalizer bound, the exact null
//! law under independence and the growth of power with `n`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use crate::combine::{normalizer, Truncation, WeightVector};
use crate::error::{check_param, Error, Result};
use crate::simulate::{
    default_alphas, default_betas, estimate_raw_power, uniform_null_statistics, AlternativeSpec,
    CorrelationModel, Estimate, Evaluator, Method, SimulationConfig, DEFAULT_SEED,
};
use crate::stable::{EvalPolicy, StableParams};

/// Default threshold above which the upper bound `g` is asserted.
pub const UPPER_THRESHOLD: f64 = 3.0;
/// Default threshold below which the lower bound `g̃` is asserted.
pub const LOWER_THRESHOLD: f64 = 0.05;
/// Relative slack allowed in the normalizer bound, which is attained with
/// equality by equal weights.
pub const NORMALIZER_SLACK: f64 = 1e-12;

/// One evaluation of a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Whether the bound is claimed at this point.
    pub asserted: bool,
}

/// Outcome of a bound check over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckResult {
    pub name: String,
    pub points: Vec<BoundPoint>,
    pub threshold: f64,
    pub pass: bool,
    /// Empirical edge of the region where the bound holds: for an upper
    /// bound the smallest grid point from which every later margin is
    /// positive, for a lower bound the largest grid point up to which every
    /// margin is positive.
    pub crossover: Option<f64>,
    /// A margin above `−tolerance` counts as holding.
    pub tolerance: f64,
}

impl BoundCheckResult {
    fn new(
        name: String,
        points: Vec<BoundPoint>,
        threshold: f64,
        crossover: Option<f64>,
        tol: f64,
    ) -> Self {
        let pass = points
            .iter()
            .filter(|p| p.asserted)
            .all(|p| p.margin > -tol);
        BoundCheckResult {
            name,
            points,
            threshold,
            pass,
            crossover,
            tolerance: tol,
        }
    }

    /// Smallest margin over asserted points.
    pub fn worst_margin(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| p.asserted)
            .map(|p| p.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// First asserted point with a nonpositive margin.
    pub fn first_violation(&self) -> Option<&BoundPoint> {
        self.points
            .iter()
            .find(|p| p.asserted && p.margin <= -self.tolerance)
    }
}

/// `p(x) = 2[1 − Φ(x)]`.
pub fn two_sided_tail(x: f64) -> f64 {
    erfc(x / SQRT_2)
}

fn tail_base(alpha: f64, skew: f64) -> f64 {
    (skew / (2.0 * PI).sqrt() * gamma(alpha) * (FRAC_PI_2 * alpha).sin()).powf(1.0 / alpha)
}

/// `c_{α,β} = [(1 + β)/√(2π) · Γ(α) sin(πα/2)]^{1/α}`.
pub fn lemma_g_constant(alpha: f64, beta: f64) -> f64 {
    tail_base(alpha, 1.0 + beta)
}

/// `c̃_{α,β} = [(1 − β)/√(2π) · Γ(α) sin(πα/2)]^{1/α}`. At `β = 1` the
/// constant vanishes, and the bound is taken from the symmetric law, which
/// dominates the totally skewed one in the left tail.
pub fn lemma_gtilde_constant(alpha: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        tail_base(alpha, 1.0)
    } else {
        tail_base(alpha, 1.0 - beta)
    }
}

/// `g(x) = c_{α,β} x^{1/α} e^{x²/(2α)}`.
pub fn lemma_g(alpha: f64, beta: f64, x: f64) -> f64 {
    lemma_g_constant(alpha, beta) * x.powf(1.0 / alpha) * (x * x / (2.0 * alpha)).exp()
}

/// `g̃(x) = −c̃_{α,β} x^{−1/α} e^{x²/(2α)}`.
pub fn lemma_gtilde(alpha: f64, beta: f64, x: f64) -> f64 {
    -lemma_gtilde_constant(alpha, beta) * x.powf(-1.0 / alpha) * (x * x / (2.0 * alpha)).exp()
}

/// `0.1, 0.2, …, 4.7`.
pub fn default_upper_grid() -> Vec<f64> {
    (1..=47).map(|k| k as f64 / 10.0).collect()
}

/// `0.005, 0.010, …, 0.1`.
pub fn default_lower_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 200.0).collect()
}

fn check_grid(grid: &[f64], ok: impl Fn(f64) -> bool, what: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty(what));
    }
    for w in grid.windows(2) {
        check_param(what, w[1], w[1] > w[0], "must be strictly increasing")?;
    }
    for &x in grid {
        check_param(what, x, ok(x), "outside the admissible range")?;
    }
    Ok(())
}

/// `F^{-1}[1 − p(x)] > g(x)` on `grid`, asserted for `x ≥ threshold`.
/// Quantiles are computed without p-value truncation.
pub fn check_lemma_g(
    alpha: f64,
    beta: f64,
    grid: &[f64],
    threshold: f64,
    policy: &EvalPolicy,
) -> Result<BoundCheckResult> {
    check_param(
        "beta",
        beta,
        beta > -1.0 && beta <= 1.0,
        "must lie in (-1, 1]",
    )?;
    let law = StableParams::standard(alpha, beta)?;
    check_grid(grid, |x| x > 0.0 && two_sided_tail(x) > 0.0, "x grid")?;
    let points = grid
        .iter()
        .map(|&x| {
            let lhs = law.isf(two_sided_tail(x), policy)?;
            let rhs = lemma_g(alpha, beta, x);
            Ok(BoundPoint {
                x,
                lhs,
                rhs,
                margin: lhs - rhs,
                asserted: x >= threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = points
        .iter()
        .rposition(|p| p.margin <= 0.0)
        .map_or(Some(0), |i| (i + 1 < points.len()).then_some(i + 1))
        .map(|i| points[i].x);
    Ok(BoundCheckResult::new(
        format!("lemma_g(alpha={alpha}, beta={beta})"),
        points,
        threshold,
        crossover,
        0.0,
    ))
}

/// `F^{-1}[1 − p(x)] > g̃(x)` on `grid ⊂ (0, 0.1]`, asserted for
/// `x ≤ threshold`.
pub fn check_lemma_gtilde(
    alpha: f64,
    beta: f64,
    grid: &[f64],
    threshold: f64,
    policy: &EvalPolicy,
) -> Result<BoundCheckResult> {
    check_param(
        "beta",
        beta,
        (-1.0..=1.0).contains(&beta),
        "must lie in [-1, 1]",
    )?;
    let law = StableParams::standard(alpha, beta)?;
    check_grid(grid, |x| x > 0.0 && x <= 0.1, "x grid")?;
    let points = grid
        .iter()
        .map(|&x| {
            let lhs = law.isf(two_sided_tail(x), policy)?;
            let rhs = lemma_gtilde(alpha, beta, x);
            Ok(BoundPoint {
                x,
                lhs,
                rhs,
                margin: lhs - rhs,
                asserted: x <= threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = match points.iter().position(|p| p.margin <= 0.0) {
        None => points.last().map(|p| p.x),
        Some(0) => None,
        Some(i) => Some(points[i - 1].x),
    };
    Ok(BoundCheckResult::new(
        format!("lemma_gtilde(alpha={alpha}, beta={beta})"),
        points,
        threshold,
        crossover,
        0.0,
    ))
}

/// `a_{n;α} ≥ min{n^{1−1/α}, 1}` for every weight vector and `α`. The margin
/// is relative, `a / bound − 1`, and may fall to `−NORMALIZER_SLACK` through
/// rounding in the equality case. Points are indexed by sample number.
pub fn check_normalizer_bound(
    samples: &[WeightVector],
    alphas: &[f64],
) -> Result<BoundCheckResult> {
    if samples.is_empty() {
        return Err(Error::Empty("weight samples"));
    }
    if alphas.is_empty() {
        return Err(Error::Empty("alpha grid"));
    }
    for &a in alphas {
        check_param("alpha", a, a > 0.0 && a < 2.0, "must lie in (0, 2)")?;
    }
    let mut points = Vec::with_capacity(samples.len() * alphas.len());
    for (k, w) in samples.iter().enumerate() {
        let n = w.len() as f64;
        for &alpha in alphas {
            let lhs = normalizer(w, alpha);
            let rhs = n.powf(1.0 - 1.0 / alpha).min(1.0);
            points.push(BoundPoint {
                x: k as f64,
                lhs,
                rhs,
                margin: lhs / rhs - 1.0,
                asserted: true,
            });
        }
    }
    Ok(BoundCheckResult::new(
        "normalizer_bound".to_string(),
        points,
        f64::NAN,
        None,
        NORMALIZER_SLACK,
    ))
}

/// Kolmogorov–Smirnov comparison of simulated statistics with a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub draws: usize,
    pub statistic: f64,
    /// Asymptotic 1% critical value `1.63 / √draws`.
    pub critical: f64,
    pub pass: bool,
}

/// `sup |F_emp − F|` for the sample against `cdf`.
pub fn ks_distance(sample: &[f64], mut cdf: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &t) in sorted.iter().enumerate() {
        let f = cdf(t)?;
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// KS check of the SCT statistic from `n` i.i.d. uniform p-values against
/// `S(α, β)`, its exact law.
#[allow(clippy::too_many_arguments)]
pub fn ks_null_distribution(
    alpha: f64,
    beta: f64,
    n: usize,
    draws: usize,
    seed: u64,
    truncation: &Truncation,
    threads: usize,
    policy: &EvalPolicy,
) -> Result<KsResult> {
    if n == 0 {
        return Err(Error::Empty("tests per draw (n)"));
    }
    if draws == 0 {
        return Err(Error::Empty("draws"));
    }
    let evaluator = Evaluator::new(
        Method::Sct { alpha, beta },
        n,
        0.05,
        truncation,
        None,
        policy,
    )?;
    let stats = uniform_null_statistics(&evaluator, n, draws, seed, truncation, threads)?;
    let law = StableParams::standard(alpha, beta)?;
    let statistic = ks_distance(&stats, |t| law.cdf(t, policy))?;
    let critical = 1.63 / (draws as f64).sqrt();
    Ok(KsResult {
        alpha,
        beta,
        n,
        draws,
        statistic,
        critical,
        pass: statistic < critical,
    })
}

/// Power at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub n: usize,
    pub power: Estimate,
}

/// Raw power of SCT(α, β) under independent scores and the sparse
/// alternative at each `n`. The alternative must satisfy
/// `√r + √γ > max{√α, 1}`.
#[allow(clippy::too_many_arguments)]
pub fn power_trend(
    alternative: &AlternativeSpec,
    alpha: f64,
    beta: f64,
    n_list: &[usize],
    reps: usize,
    level: f64,
    seed: u64,
    threads: usize,
    policy: &EvalPolicy,
) -> Result<Vec<PowerPoint>> {
    if alternative.r() > 0.0 && !alternative.power_regime_ok(alpha) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: alternative.r(),
            reason: "sqrt(r) + sqrt(gamma) must exceed max(sqrt(alpha), 1)",
        });
    }
    n_list
        .iter()
        .map(|&n| {
            let config = SimulationConfig {
                n,
                reps,
                level,
                seed,
                threads,
                alternative: Some(*alternative),
                policy: *policy,
                ..SimulationConfig::single(CorrelationModel::Independent)
            };
            let power = estimate_raw_power(
                &config,
                &CorrelationModel::Independent,
                Method::Sct { alpha, beta },
            )?;
            Ok(PowerPoint { n, power })
        })
        .collect()
}

/// Each power exceeds the previous one by more than `k` combined standard
/// errors.
pub fn strictly_increasing(points: &[PowerPoint], k: f64) -> bool {
    points.windows(2).all(|w| {
        let se = w[0].power.mc_se.hypot(w[1].power.mc_se);
        w[1].power.value - w[0].power.value > k * se
    })
}

/// No power falls below the previous one by more than `k` combined standard
/// errors.
pub fn nondecreasing_within(points: &[PowerPoint], k: f64) -> bool {
    points.windows(2).all(|w| {
        let se = w[0].power.mc_se.hypot(w[1].power.mc_se);
        w[1].power.value - w[0].power.value >= -k * se
    })
}

/// Random weight vectors of each length in `sizes`, `count` per length.
/// Shapes range from nearly equal to dominated by one entry.
pub fn random_weight_vectors(
    count: usize,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<WeightVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count * sizes.len());
    for &n in sizes {
        for k in 0..count {
            // Powers of exponential draws: k = 0 is a flat Dirichlet, larger
            // powers concentrate the mass.
            let power = 1.0 + (k % 8) as f64;
            let raw: Vec<f64> = (0..n)
                .map(|_| {
                    rng.sample::<f64, _>(Exp1)
                        .powf(power)
                        .max(f64::MIN_POSITIVE)
                })
                .collect();
            out.push(WeightVector::normalized(&raw)?);
        }
    }
    Ok(out)
}

/// A check run by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteCheck {
    LemmaG,
    LemmaGtilde,
    Normalizer,
    KsNull,
    PowerTrend,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 5] = [
        SuiteCheck::LemmaG,
        SuiteCheck::LemmaGtilde,
        SuiteCheck::Normalizer,
        SuiteCheck::KsNull,
        SuiteCheck::PowerTrend,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteCheck::LemmaG => "lemma_g",
            SuiteCheck::LemmaGtilde => "lemma_gtilde",
            SuiteCheck::Normalizer => "normalizer",
            SuiteCheck::KsNull => "ks_null",
            SuiteCheck::PowerTrend => "power_trend",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Settings of [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub upper_threshold: f64,
    pub lower_threshold: f64,
    pub weight_samples: usize,
    pub weight_sizes: Vec<usize>,
    pub ks_cells: Vec<(f64, f64)>,
    pub ks_n: usize,
    pub ks_draws: usize,
    pub power_n: Vec<usize>,
    pub power_reps: usize,
    pub seed: u64,
    pub threads: usize,
    pub policy: EvalPolicy,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            alphas: default_alphas(),
            betas: default_betas(),
            upper_threshold: UPPER_THRESHOLD,
            lower_threshold: LOWER_THRESHOLD,
            weight_samples: 1000,
            weight_sizes: vec![2, 10, 40, 500],
            ks_cells: vec![(0.5, 1.0), (1.0, 0.0), (1.5, 0.6), (1.9, -0.8)],
            ks_n: 40,
            ks_draws: 10_000,
            power_n: vec![40, 200, 1000, 2000],
            power_reps: 1000,
            seed: DEFAULT_SEED,
            threads: 0,
            policy: EvalPolicy::default(),
        }
    }
}

/// One line of the suite report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub worst_margin: f64,
    pub pass: bool,
}

impl CheckLine {
    fn from_bound(r: &BoundCheckResult) -> Self {
        CheckLine {
            name: r.name.clone(),
            worst_margin: r.worst_margin(),
            pass: r.pass,
        }
    }
}

/// Runs the selected checks. Lemma checks give one line per `(α, β)` cell;
/// the power line's margin is the smaller of the worst step (less two
/// standard errors) and the excess of the last power over 0.9.
pub fn run_suite(selection: &[SuiteCheck], opts: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    for check in selection {
        match check {
            SuiteCheck::LemmaG | SuiteCheck::LemmaGtilde => {
                for &alpha in &opts.alphas {
                    for &beta in &opts.betas {
                        let r = if *check == SuiteCheck::LemmaG {
                            if beta <= -1.0 {
                                continue;
                            }
                            check_lemma_g(
                                alpha,
                                beta,
                                &default_upper_grid(),
                                opts.upper_threshold,
                                &opts.policy,
                            )?
                        } else {
                            check_lemma_gtilde(
                                alpha,
                                beta,
                                &default_lower_grid(),
                                opts.lower_threshold,
                                &opts.policy,
                            )?
                        };
                        lines.push(CheckLine::from_bound(&r));
                    }
                }
            }
            SuiteCheck::Normalizer => {
                let samples =
                    random_weight_vectors(opts.weight_samples, &opts.weight_sizes, opts.seed)?;
                let r = check_normalizer_bound(&samples, &opts.alphas)?;
                lines.push(CheckLine::from_bound(&r));
            }
            SuiteCheck::KsNull => {
                for &(alpha, beta) in &opts.ks_cells {
                    let r = ks_null_distribution(
                        alpha,
                        beta,
                        opts.ks_n,
                        opts.ks_draws,
                        opts.seed,
                        &Truncation::default(),
                        opts.threads,
                        &opts.policy,
                    )?;
                    lines.push(CheckLine {
                        name: format!("ks_null(alpha={alpha}, beta={beta}, n={})", opts.ks_n),
                        worst_margin: r.critical - r.statistic,
                        pass: r.pass,
                    });
                }
            }
            SuiteCheck::PowerTrend => {
                let spec = AlternativeSpec::default();
                let points = power_trend(
                    &spec,
                    1.0,
                    0.0,
                    &opts.power_n,
                    opts.power_reps,
                    0.05,
                    opts.seed,
                    opts.threads,
                    &opts.policy,
                )?;
                let step = points
                    .windows(2)
                    .map(|w| {
                        w[1].power.value - w[0].power.value
                            + 2.0 * w[0].power.mc_se.hypot(w[1].power.mc_se)
                    })
                    .fold(f64::INFINITY, f64::min);
                let last = points.last().map_or(0.0, |p| p.power.value);
                let reaches = opts.power_n.last().is_some_and(|&n| n >= 2000);
                let margin = if reaches { step.min(last - 0.9) } else { step };
                lines.push(CheckLine {
                    name: "power_trend(alpha=1, beta=0)".to_string(),
                    worst_margin: margin,
                    pass: step >= 0.0 && (!reaches || last > 0.9),
                });
            }
        }
    }
    Ok(lines)
}
