//! Run configuration file. Every key is optional; omitted keys take the
//! values of the standard simulation design.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use sct_core::combine::Truncation;
use sct_core::simulate::{AlternativeSpec, CorrelationModel, SignRule, SimulationConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub models: Option<Vec<ModelEntry>>,
    pub alphas: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub include_cct: Option<bool>,
    pub include_stouffer: Option<bool>,
    pub include_fisher: Option<bool>,
    pub include_bonferroni: Option<bool>,
    pub alternative: Option<AlternativeEntry>,
    pub truncation: Option<TruncationEntry>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    #[serde(rename = "type")]
    pub kind: String,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeEntry {
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub sign_rule: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationEntry {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    /// The simulation settings described by the file, validated.
    pub fn to_simulation(&self) -> Result<SimulationConfig, String> {
        let d = SimulationConfig::default();
        let models = match &self.models {
            None => d.models.clone(),
            Some(entries) => entries
                .iter()
                .map(model_from_entry)
                .collect::<Result<_, _>>()?,
        };
        let alternative = {
            let base = AlternativeSpec::default();
            let entry = self.alternative.clone().unwrap_or_default();
            let sign_rule = match entry.sign_rule.as_deref() {
                None => base.sign_rule(),
                Some(name) => SignRule::from_name(name).ok_or_else(|| {
                    format!("unknown sign_rule `{name}`, expected all_positive or random_sign")
                })?,
            };
            AlternativeSpec::new(
                entry.gamma.unwrap_or(base.gamma()),
                entry.r.unwrap_or(base.r()),
                sign_rule,
            )
            .map_err(|e| e.to_string())?
        };
        let truncation = {
            let entry = self.truncation.clone().unwrap_or_default();
            Truncation::new(
                entry.lo.unwrap_or(d.truncation.lo()),
                entry.hi.unwrap_or(d.truncation.hi()),
            )
            .map_err(|e| e.to_string())?
        };
        let config = SimulationConfig {
            n: self.n.unwrap_or(d.n),
            reps: self.reps.unwrap_or(d.reps),
            level: self.level.unwrap_or(d.level),
            seed: self.seed.unwrap_or(d.seed),
            threads: self.threads.unwrap_or(d.threads),
            models,
            alphas: self.alphas.clone().unwrap_or(d.alphas),
            betas: self.betas.clone().unwrap_or(d.betas),
            include_cct: self.include_cct.unwrap_or(d.include_cct),
            include_stouffer: self.include_stouffer.unwrap_or(d.include_stouffer),
            include_fisher: self.include_fisher.unwrap_or(d.include_fisher),
            include_bonferroni: self.include_bonferroni.unwrap_or(d.include_bonferroni),
            alternative: Some(alternative),
            truncation,
            policy: d.policy,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

fn model_from_entry(entry: &ModelEntry) -> Result<CorrelationModel, String> {
    if entry.kind != "independent" && entry.rho.is_none() {
        return Err(format!("model `{}` needs a rho", entry.kind));
    }
    CorrelationModel::from_kind(&entry.kind, entry.rho.unwrap_or(0.0)).ok_or_else(|| {
        format!(
            "unknown model type `{}`, expected independent, ar1, exchangeable or poly_decay",
            entry.kind
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_the_default_design() {
        let c = RunConfig::parse("").unwrap().to_simulation().unwrap();
        assert_eq!(c, SimulationConfig::default());
    }

    #[test]
    fn full_file() {
        let text = r#"
            n = 20
            reps = 50
            level = 0.01
            seed = 9
            threads = 2
            alphas = [0.5, 1.5]
            betas = [1.0]
            include_cct = false
            include_fisher = true
            output_dir = "out"

            [[models]]
            type = "independent"

            [[models]]
            type = "poly_decay"
            rho = 0.4

            [alternative]
            gamma = 0.3
            r = 0.8
            sign_rule = "random_sign"

            [truncation]
            lo = 1e-8
            hi = 0.99999999
        "#;
        let rc = RunConfig::parse(text).unwrap();
        assert_eq!(rc.output_dir.as_deref(), Some(Path::new("out")));
        let c = rc.to_simulation().unwrap();
        assert_eq!(c.n, 20);
        assert_eq!(c.models[1], CorrelationModel::PolyDecay { rho: 0.4 });
        assert!(!c.include_cct && c.include_stouffer && c.include_fisher);
        assert_eq!(c.alternative.unwrap().sign_rule(), SignRule::RandomSign);
        assert_eq!(c.truncation.lo(), 1e-8);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("repz = 10").unwrap_err();
        assert!(err.contains("repz"), "{err}");
        let err = RunConfig::parse("[alternative]\nsignal = 2").unwrap_err();
        assert!(err.contains("signal"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |t: &str| RunConfig::parse(t).unwrap().to_simulation().unwrap_err();
        assert!(bad("[[models]]\ntype = \"ar1\"").contains("rho"));
        assert!(bad("[[models]]\ntype = \"banded\"\nrho = 0.1").contains("banded"));
        assert!(bad("alphas = [2.5]").contains("alpha"));
        assert!(bad("[alternative]\nsign_rule = \"up\"").contains("sign_rule"));
    }
}
