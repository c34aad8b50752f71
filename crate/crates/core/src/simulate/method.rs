use std::fmt;
use std::sync::Arc;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::combine::{cauchy_score, normal_score, Truncation};
use crate::error::Result;
use crate::stable::{logit, EvalPolicy, QuantileTable, StableParams};

/// Number of interpolation steps in the quantile tables used by the
/// simulation.
pub const TABLE_INTERVALS: usize = 1024;

/// A global test compared in the simulation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Sct { alpha: f64, beta: f64 },
    Cct,
    Stouffer,
    Fisher,
    Bonferroni,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sct { .. } => "sct",
            Method::Cct => "cct",
            Method::Stouffer => "stouffer",
            Method::Fisher => "fisher",
            Method::Bonferroni => "bonferroni",
        }
    }

    /// `(α, β)` of the stable law the method corresponds to, if any. CCT is
    /// `(1, 0)` and Stouffer is written as `(2, 0)`.
    pub fn stable_index(&self) -> Option<(f64, f64)> {
        match *self {
            Method::Sct { alpha, beta } => Some((alpha, beta)),
            Method::Cct => Some((1.0, 0.0)),
            Method::Stouffer => Some((2.0, 0.0)),
            Method::Fisher | Method::Bonferroni => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sct { alpha, beta } => write!(f, "SCT(alpha = {alpha}, beta = {beta})"),
            Method::Cct => write!(f, "CCT"),
            Method::Stouffer => write!(f, "Stouffer"),
            Method::Fisher => write!(f, "Fisher"),
            Method::Bonferroni => write!(f, "Bonferroni"),
        }
    }
}

/// The p-values of one replication in the forms the evaluators need.
#[derive(Debug, Clone, Default)]
pub struct Replicate {
    pub raw: Vec<f64>,
    pub truncated: Vec<f64>,
    /// `logit` of the truncated values.
    pub logits: Vec<f64>,
}

impl Replicate {
    pub fn with_capacity(n: usize) -> Self {
        Replicate {
            raw: Vec::with_capacity(n),
            truncated: Vec::with_capacity(n),
            logits: Vec::with_capacity(n),
        }
    }

    pub fn fill(&mut self, raw: impl IntoIterator<Item = f64>, truncation: &Truncation) {
        self.raw.clear();
        self.truncated.clear();
        self.logits.clear();
        for p in raw {
            let t = truncation.apply(p);
            self.raw.push(p);
            self.truncated.push(t);
            self.logits.push(logit(t));
        }
    }
}

/// Equal-weight test statistic and distributional cutoff for one method,
/// prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    method: Method,
    kind: Kind,
    cutoff: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Sct {
        table: Arc<QuantileTable>,
        scale: f64,
    },
    Cct,
    Stouffer {
        scale: f64,
    },
    Fisher {
        floor: f64,
    },
    Bonferroni,
}

impl Evaluator {
    /// Prepares `method` for `n` equally weighted p-values. For SCT the
    /// table may be shared between evaluators of different `n`.
    pub fn new(
        method: Method,
        n: usize,
        level: f64,
        truncation: &Truncation,
        table: Option<Arc<QuantileTable>>,
        policy: &EvalPolicy,
    ) -> Result<Self> {
        let nf = n as f64;
        let (kind, cutoff) = match method {
            Method::Sct { alpha, beta } => {
                let table = match table {
                    Some(t) => t,
                    None => Arc::new(Self::table_for(alpha, beta, truncation, policy)?),
                };
                let cutoff = StableParams::standard(alpha, beta)?.isf(level, policy)?;
                // a_{n;α} / n with equal weights is n^{−1/α}.
                let scale = nf.powf(-1.0 / alpha);
                (Kind::Sct { table, scale }, cutoff)
            }
            Method::Cct => (Kind::Cct, cauchy_score(level)),
            Method::Stouffer => (
                Kind::Stouffer {
                    scale: nf.sqrt().recip(),
                },
                normal_score(level),
            ),
            Method::Fisher => {
                let law = ChiSquared::new(2.0 * nf).expect("positive degrees of freedom");
                (
                    Kind::Fisher {
                        floor: truncation.lo(),
                    },
                    law.inverse_cdf(1.0 - level),
                )
            }
            Method::Bonferroni => (Kind::Bonferroni, -(level / nf).ln()),
        };
        Ok(Evaluator {
            method,
            kind,
            cutoff,
        })
    }

    /// Quantile table of `S(α, β)` over the truncation range.
    pub fn table_for(
        alpha: f64,
        beta: f64,
        truncation: &Truncation,
        policy: &EvalPolicy,
    ) -> Result<QuantileTable> {
        QuantileTable::new(
            alpha,
            beta,
            truncation.lo(),
            truncation.hi(),
            TABLE_INTERVALS,
            policy,
        )
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// The statistic; larger values are more significant. Bonferroni reports
    /// `−log min p` so that it shares the convention.
    pub fn statistic(&self, rep: &Replicate) -> f64 {
        match &self.kind {
            Kind::Sct { table, scale } => {
                scale * rep.logits.iter().map(|&y| table.isf_logit(y)).sum::<f64>()
            }
            Kind::Cct => {
                rep.truncated.iter().map(|&p| cauchy_score(p)).sum::<f64>()
                    / rep.truncated.len() as f64
            }
            Kind::Stouffer { scale } => {
                scale * rep.truncated.iter().map(|&p| normal_score(p)).sum::<f64>()
            }
            Kind::Fisher { floor } => {
                -2.0 * rep.raw.iter().map(|p| p.max(*floor).ln()).sum::<f64>()
            }
            Kind::Bonferroni => -rep.raw.iter().copied().fold(f64::INFINITY, f64::min).ln(),
        }
    }

    pub fn rejects(&self, statistic: f64) -> bool {
        statistic > self.cutoff
    }
}
