use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::combine::{PValueVector, Truncation};
use crate::error::{check_param, Error, Result};

/// Correlation structure of the Gaussian test scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationModel {
    /// Model 1: `Σ = I`.
    Independent,
    /// Model 2: `σ_ij = ρ^{|i−j|}`.
    Ar1 { rho: f64 },
    /// Model 3: `σ_ij = ρ` for `i ≠ j`.
    Exchangeable { rho: f64 },
    /// Model 4: `σ_ij = 1 / (0.7 + |i−j|^ρ)` for `i ≠ j`.
    PolyDecay { rho: f64 },
}

impl CorrelationModel {
    /// Short machine name, as used in configuration files and CSV output.
    pub fn kind(&self) -> &'static str {
        match self {
            CorrelationModel::Independent => "independent",
            CorrelationModel::Ar1 { .. } => "ar1",
            CorrelationModel::Exchangeable { .. } => "exchangeable",
            CorrelationModel::PolyDecay { .. } => "poly_decay",
        }
    }

    /// Model number in the usual presentation of the simulation study.
    pub fn number(&self) -> u8 {
        match self {
            CorrelationModel::Independent => 1,
            CorrelationModel::Ar1 { .. } => 2,
            CorrelationModel::Exchangeable { .. } => 3,
            CorrelationModel::PolyDecay { .. } => 4,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            CorrelationModel::Independent => 0.0,
            CorrelationModel::Ar1 { rho }
            | CorrelationModel::Exchangeable { rho }
            | CorrelationModel::PolyDecay { rho } => rho,
        }
    }

    /// Builds a model from its machine name. `rho` is ignored for
    /// `independent`.
    pub fn from_kind(kind: &str, rho: f64) -> Option<Self> {
        Some(match kind {
            "independent" => CorrelationModel::Independent,
            "ar1" => CorrelationModel::Ar1 { rho },
            "exchangeable" => CorrelationModel::Exchangeable { rho },
            "poly_decay" => CorrelationModel::PolyDecay { rho },
            _ => return None,
        })
    }

    /// Parameter constraints for an `n`-dimensional matrix.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            CorrelationModel::Independent => Ok(()),
            CorrelationModel::Ar1 { rho } => {
                check_param("rho", rho, (0.0..1.0).contains(&rho), "must lie in [0, 1)")
            }
            CorrelationModel::Exchangeable { rho } => {
                let floor = if n > 1 { -1.0 / (n as f64 - 1.0) } else { -1.0 };
                check_param(
                    "rho",
                    rho,
                    rho > floor && rho < 1.0,
                    "must lie in (-1/(n-1), 1)",
                )
            }
            CorrelationModel::PolyDecay { rho } => {
                check_param("rho", rho, rho > 0.0, "must be positive")
            }
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        let d = i.abs_diff(j) as f64;
        match *self {
            CorrelationModel::Independent => 0.0,
            CorrelationModel::Ar1 { rho } => rho.powf(d),
            CorrelationModel::Exchangeable { rho } => rho,
            CorrelationModel::PolyDecay { rho } => 1.0 / (0.7 + d.powf(rho)),
        }
    }
}

impl fmt::Display for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationModel::Independent => write!(f, "Model 1 (independent)"),
            _ => write!(
                f,
                "Model {} ({}, rho = {})",
                self.number(),
                self.kind(),
                self.rho()
            ),
        }
    }
}

/// The `n × n` correlation matrix of `model`, checked to be positive definite.
pub fn correlation_matrix(model: &CorrelationModel, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::Empty("correlation matrix"));
    }
    model.validate(n)?;
    let m = DMatrix::from_fn(n, n, |i, j| model.entry(i, j));
    if m.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(format!("{model} with n = {n}")));
    }
    Ok(m)
}

/// Draws `X ~ N(μ, Σ)` as `μ + L Z` with `L` the lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    n: usize,
    // Row-major lower triangle; `None` for the identity.
    factor: Option<Vec<f64>>,
}

impl MvnSampler {
    pub fn new(model: &CorrelationModel, n: usize) -> Result<Self> {
        if let CorrelationModel::Independent = model {
            if n == 0 {
                return Err(Error::Empty("correlation matrix"));
            }
            return Ok(MvnSampler { n, factor: None });
        }
        Self::from_matrix(correlation_matrix(model, n)?)
    }

    pub fn from_matrix(correlation: DMatrix<f64>) -> Result<Self> {
        let n = correlation.nrows();
        if n == 0 || correlation.ncols() != n {
            return Err(Error::LengthMismatch {
                what: "correlation columns",
                got: correlation.ncols(),
                expected: n,
            });
        }
        let chol = correlation
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("{n} x {n} input matrix")))?;
        let l = chol.l();
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                packed.push(l[(i, j)]);
            }
        }
        Ok(MvnSampler {
            n,
            factor: Some(packed),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Fills `out` with one draw. `z` is scratch space of length `n`.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        mean: Option<&[f64]>,
        rng: &mut R,
        z: &mut [f64],
        out: &mut [f64],
    ) {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        match &self.factor {
            None => out.copy_from_slice(z),
            Some(l) => {
                let mut k = 0;
                for i in 0..self.n {
                    let row = &l[k..k + i + 1];
                    out[i] = row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
                    k += i + 1;
                }
            }
        }
        if let Some(mu) = mean {
            for (x, m) in out.iter_mut().zip(mu) {
                *x += m;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, mean: Option<&[f64]>, rng: &mut R) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        let mut out = vec![0.0; self.n];
        self.sample_into(mean, rng, &mut z, &mut out);
        out
    }
}

/// One draw of `X = μ + L Z`.
pub fn mvn_scores<R: Rng + ?Sized>(
    mean: &[f64],
    correlation: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if mean.len() != correlation.nrows() {
        return Err(Error::LengthMismatch {
            what: "mean",
            got: mean.len(),
            expected: correlation.nrows(),
        });
    }
    Ok(MvnSampler::from_matrix(correlation.clone())?.sample(Some(mean), rng))
}

/// Two-sided p-value `2[1 − Φ(|x|)]`.
pub fn two_sided_p(x: f64) -> f64 {
    erfc(x.abs() / std::f64::consts::SQRT_2)
}

/// Two-sided p-values of the scores, clamped into `truncation`.
pub fn pvalues_from_scores(scores: &[f64], truncation: &Truncation) -> Result<PValueVector> {
    for &x in scores {
        check_param("score", x, true, "must be finite")?;
    }
    PValueVector::new(
        scores
            .iter()
            .map(|&x| truncation.apply(two_sided_p(x)))
            .collect(),
    )
}
