use rand::seq::index;
use rand::Rng;

use crate::error::{check_param, Result};

/// Signs given to the nonzero means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRule {
    AllPositive,
    /// `⌈k/2⌉` positive and the rest negative, in random positions.
    RandomSign,
}

impl SignRule {
    pub fn name(&self) -> &'static str {
        match self {
            SignRule::AllPositive => "all_positive",
            SignRule::RandomSign => "random_sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "all_positive" => Some(SignRule::AllPositive),
            "random_sign" => Some(SignRule::RandomSign),
            _ => None,
        }
    }
}

/// Sparse alternative: `⌊n^γ⌋` means of magnitude `√(2 r log n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternativeSpec {
    gamma: f64,
    r: f64,
    sign_rule: SignRule,
}

impl Default for AlternativeSpec {
    fn default() -> Self {
        AlternativeSpec {
            gamma: 0.43,
            r: 0.54,
            sign_rule: SignRule::AllPositive,
        }
    }
}

impl AlternativeSpec {
    /// `0 < γ < 1/2` and `r ≥ 0`; `r = 0` gives the null.
    pub fn new(gamma: f64, r: f64, sign_rule: SignRule) -> Result<Self> {
        check_param(
            "gamma",
            gamma,
            gamma > 0.0 && gamma < 0.5,
            "must lie in (0, 0.5)",
        )?;
        check_param("r", r, r >= 0.0, "must be nonnegative")?;
        Ok(AlternativeSpec {
            gamma,
            r,
            sign_rule,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sign_rule(&self) -> SignRule {
        self.sign_rule
    }

    /// `|S| = ⌊n^γ⌋`, at least one.
    pub fn support_size(&self, n: usize) -> usize {
        let k = ((n as f64).powf(self.gamma) + 1e-9).floor() as usize;
        k.clamp(1, n)
    }

    /// `μ₀ = √(2 r log n)`.
    pub fn magnitude(&self, n: usize) -> f64 {
        (2.0 * self.r * (n as f64).ln()).sqrt()
    }

    /// `√r + √γ > max(√α, 1)`, the signal strength under which the power of
    /// the test tends to one.
    pub fn power_regime_ok(&self, alpha: f64) -> bool {
        self.r.sqrt() + self.gamma.sqrt() > alpha.sqrt().max(1.0)
    }
}

/// Mean vector with `⌊n^γ⌋` nonzero entries at indices drawn uniformly
/// without replacement.
pub fn sparse_mean<R: Rng + ?Sized>(n: usize, spec: &AlternativeSpec, rng: &mut R) -> Vec<f64> {
    let mut mean = vec![0.0; n];
    sparse_mean_into(spec, rng, &mut mean);
    mean
}

/// [`sparse_mean`] into a caller-provided buffer of length `n`.
pub fn sparse_mean_into<R: Rng + ?Sized>(spec: &AlternativeSpec, rng: &mut R, mean: &mut [f64]) {
    let n = mean.len();
    mean.fill(0.0);
    if n == 0 {
        return;
    }
    let k = spec.support_size(n);
    let mu = spec.magnitude(n);
    let chosen = index::sample(rng, n, k);
    match spec.sign_rule {
        SignRule::AllPositive => {
            for i in chosen.iter() {
                mean[i] = mu;
            }
        }
        SignRule::RandomSign => {
            // The index sample is in random order, so the first ⌈k/2⌉ are a
            // random subset.
            let positive = k.div_ceil(2);
            for (rank, i) in chosen.iter().enumerate() {
                mean[i] = if rank < positive { mu } else { -mu };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_alternative() {
        let spec = AlternativeSpec::default();
        assert_eq!(spec.support_size(40), 4);
        assert!((spec.magnitude(40) - (1.08 * 40f64.ln()).sqrt()).abs() < 1e-15);
        assert!((spec.magnitude(40) - 1.995_993_439_5).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = sparse_mean(40, &spec, &mut rng);
        assert_eq!(mean.iter().filter(|&&m| m != 0.0).count(), 4);
        assert!(mean.iter().all(|&m| m == 0.0 || m == spec.magnitude(40)));
    }

    #[test]
    fn edge_cases() {
        let tiny = AlternativeSpec::new(1e-9, 0.54, SignRule::AllPositive).unwrap();
        assert_eq!(tiny.support_size(40), 1);
        let null = AlternativeSpec::new(0.43, 0.0, SignRule::AllPositive).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(sparse_mean(40, &null, &mut rng).iter().all(|&m| m == 0.0));
        assert!(AlternativeSpec::new(0.5, 0.5, SignRule::AllPositive).is_err());
        assert!(AlternativeSpec::new(0.3, -0.1, SignRule::AllPositive).is_err());
    }

    #[test]
    fn random_signs_keep_a_positive_majority() {
        let spec = AlternativeSpec::new(0.45, 1.0, SignRule::RandomSign).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean = sparse_mean(200, &spec, &mut rng);
        let pos = mean.iter().filter(|&&m| m > 0.0).count();
        let neg = mean.iter().filter(|&&m| m < 0.0).count();
        assert_eq!(pos + neg, spec.support_size(200));
        assert!(pos >= neg && pos - neg <= 1);
    }

    #[test]
    fn power_regime() {
        let spec = AlternativeSpec::default();
        assert!(spec.power_regime_ok(1.0));
        assert!(spec.power_regime_ok(1.5));
        assert!(!spec.power_regime_ok(1.99));
    }
}
