//! Pipeline configuration: one JSON document with a root `seed` key.
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use teamcomm::corpus::PreprocessConfig;
use teamcomm::earlypred::DEFAULT_FOLD_IN_ITERS;
use teamcomm::intervention::InterventionConfig;
use teamcomm::stats::{Baseline, TedKind};
use teamcomm::topics::{LdaConfig, SweepConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSettings {
    pub k_max: usize,
    pub b_refs: usize,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        Self {
            k_max: 10,
            b_refs: 50,
            restarts: 10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineRule {
    /// Omit the cluster with the highest mean score.
    #[default]
    HighestMean,
    /// Omit the given cluster index.
    Cluster(usize),
}

impl From<BaselineRule> for Baseline {
    fn from(b: BaselineRule) -> Self {
        match b {
            BaselineRule::HighestMean => Baseline::HighestMean,
            BaselineRule::Cluster(c) => Baseline::Cluster(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSettings {
    pub alpha_level: f64,
    pub baseline: BaselineRule,
    /// TED kinds kept for the TED regression and the improvement check.
    pub ted_kinds: BTreeSet<TedKind>,
}

impl Default for RegressionSettings {
    fn default() -> Self {
        Self {
            alpha_level: 0.05,
            baseline: BaselineRule::HighestMean,
            ted_kinds: BTreeSet::from([
                TedKind::Aggregate,
                TedKind::TimeMeasure,
                TedKind::Communication,
            ]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarlySettings {
    pub fractions: Vec<f64>,
    pub fold_in_iters: usize,
}

impl Default for EarlySettings {
    fn default() -> Self {
        Self {
            fractions: (1..=10).map(|i| f64::from(i) / 10.0).collect(),
            fold_in_iters: DEFAULT_FOLD_IN_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub corpus_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub beard: Option<PathBuf>,
    pub ted: Option<PathBuf>,
    pub ted_schema: Option<PathBuf>,
    /// `trial_id,team_id,score`; overrides scores embedded in transcripts.
    pub scores: Option<PathBuf>,
    pub preprocess: PreprocessConfig,
    pub lda: LdaConfig,
    pub sweep: SweepConfig,
    pub clustering: ClusterSettings,
    pub regression: RegressionSettings,
    pub early: EarlySettings,
    pub intervention: InterventionConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&raw)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in cfg.input_paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                bail!("config {}: {} does not exist", path.display(), p.display());
            }
        }
        if let Some(out) = cfg.output_dir.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn input_paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [
            &mut self.corpus_dir,
            &mut self.beard,
            &mut self.ted,
            &mut self.ted_schema,
            &mut self.scores,
        ]
        .into_iter()
        .flatten()
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.lda.validate()?;
        self.intervention.validate()?;
        let c = &self.clustering;
        if c.k_max < 1 || c.b_refs < 1 || c.restarts < 1 || c.max_iter < 1 {
            bail!("clustering settings must all be positive");
        }
        if !(self.regression.alpha_level > 0.0 && self.regression.alpha_level < 1.0) {
            bail!("alpha_level must lie in (0, 1)");
        }
        if self.early.fold_in_iters < 2 {
            bail!("fold_in_iters must be >= 2");
        }
        Ok(())
    }

    /// The LDA settings with the root seed applied.
    pub fn lda_config(&self) -> LdaConfig {
        self.lda.with_seed(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("corpus")).unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"seed": 5, "corpus_dir": "corpus", "output_dir": "out"}"#,
        )
        .unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.corpus_dir.unwrap(), dir.path().join("corpus"));
        assert_eq!(cfg.output_dir.unwrap(), dir.path().join("out"));
        assert_eq!(cfg.lda, LdaConfig::default());
    }

    #[test]
    fn missing_inputs_and_unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"beard": "nope.csv"}"#).unwrap();
        assert!(PipelineConfig::load(&path)
            .unwrap_err()
            .to_string()
            .contains("nope.csv"));
        std::fs::write(&path, r#"{"sede": 1}"#).unwrap();
        assert!(PipelineConfig::load(&path).is_err());
    }
}
