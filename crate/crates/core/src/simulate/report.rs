use std::fmt::Write as _;
use std::io;

use super::method::Method;
use super::model::CorrelationModel;

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub mc_se: f64,
    pub reps: usize,
}

impl Estimate {
    pub fn from_counts(hits: usize, reps: usize) -> Self {
        let p = hits as f64 / reps as f64;
        Estimate {
            value: p,
            mc_se: (p * (1.0 - p) / reps as f64).sqrt(),
            reps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Size,
    RawPower,
    AdjPower,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Size => "size",
            Metric::RawPower => "raw_power",
            Metric::AdjPower => "adj_power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub model: CorrelationModel,
    pub method: Method,
    pub metric: Metric,
    pub estimate: Estimate,
    pub seed: u64,
}

/// A cell that could not be evaluated. `model` is `None` when the method
/// failed before any model was run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub model: Option<CorrelationModel>,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
}

pub const CSV_HEADER: &str = "model,rho,method,alpha,beta,metric,value,mc_se,reps,seed";

impl PowerReport {
    /// First row matching the model, method and metric.
    pub fn get(
        &self,
        model: &CorrelationModel,
        method: &Method,
        metric: Metric,
    ) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.model == *model && r.method == *method && r.metric == metric)
    }

    /// Rows as CSV with a header line. Methods without a stable index leave
    /// `alpha` and `beta` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (alpha, beta) = match r.method.stable_index() {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6},{},{}",
                r.model.kind(),
                r.model.rho(),
                r.method.name(),
                alpha,
                beta,
                r.metric.name(),
                r.estimate.value,
                r.estimate.mc_se,
                r.estimate.reps,
                r.seed
            );
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}
