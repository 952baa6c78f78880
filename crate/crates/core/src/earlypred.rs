//! Cluster prediction from transcript prefixes.
//!
//! A prefix is measured in normalized tokens: the kept utterances are the
//! shortest run from the start whose token count reaches
//! `ceil(fraction * total)`. Predictions fold the prefix into the topic model
//! and take the nearest cluster centroid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{assign_cluster, ClusterModel};
use crate::corpus::{TrialTranscript, Vocabulary};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, hash_str};
use crate::topics::{infer_theta, LdaModel};

/// Default fold-in sweeps for prefixes; the first half is burn-in.
pub const DEFAULT_FOLD_IN_ITERS: usize = 200;

pub fn truncate_transcript(trial: &TrialTranscript, fraction: f64) -> Result<TrialTranscript> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("fraction {fraction} outside (0, 1]")));
    }
    let total = trial.total_tokens();
    if total == 0 {
        return Err(Error::NoInVocabularyTokens(format!(
            "{} has no tokens",
            trial.trial_id
        )));
    }
    if fraction == 1.0 {
        return Ok(trial.clone());
    }
    let target = ((fraction * total as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut cum = 0;
    let keep = trial
        .utterances
        .iter()
        .position(|u| {
            cum += u.token_count;
            cum >= target
        })
        .map_or(trial.utterances.len(), |i| i + 1);
    Ok(TrialTranscript {
        utterances: trial.utterances[..keep].to_vec(),
        ..trial.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarlyPrediction {
    pub trial_id: String,
    pub fraction: f64,
    pub predicted_cluster: usize,
    pub theta_hat: Vec<f64>,
}

/// A topic model and a cluster model over its topic space, ready for
/// prefix predictions.
pub struct EarlyPredictor<'a> {
    lda: &'a LdaModel,
    clusters: &'a ClusterModel,
    vocab: Vocabulary,
    fold_in_iters: usize,
}

impl<'a> EarlyPredictor<'a> {
    pub fn new(
        lda: &'a LdaModel,
        clusters: &'a ClusterModel,
        fold_in_iters: usize,
    ) -> Result<Self> {
        if clusters.dim() != lda.k {
            return Err(Error::DimensionMismatch {
                expected: lda.k,
                actual: clusters.dim(),
            });
        }
        Ok(Self {
            lda,
            clusters,
            vocab: lda.vocabulary()?,
            fold_in_iters,
        })
    }

    /// The fold-in stream depends on `seed` and the trial id only, so a
    /// trial's prediction at fraction 1 reproduces its reference label.
    pub fn predict(
        &self,
        trial: &TrialTranscript,
        fraction: f64,
        seed: u64,
    ) -> Result<EarlyPrediction> {
        let prefix = truncate_transcript(trial, fraction)?;
        let counts = self.vocab.count_tokens(prefix.tokens());
        if counts.is_empty() {
            return Err(Error::NoInVocabularyTokens(format!(
                "{} at fraction {fraction}",
                trial.trial_id
            )));
        }
        let trial_seed = derive_seed(seed, &[hash_str(&trial.trial_id)]);
        let theta_hat = infer_theta(self.lda, &counts, self.fold_in_iters, trial_seed)?;
        Ok(EarlyPrediction {
            trial_id: trial.trial_id.clone(),
            fraction,
            predicted_cluster: assign_cluster(self.clusters, &theta_hat)?,
            theta_hat,
        })
    }
}

pub fn predict_cluster_early(
    lda: &LdaModel,
    clusters: &ClusterModel,
    trial: &TrialTranscript,
    fraction: f64,
    seed: u64,
) -> Result<EarlyPrediction> {
    EarlyPredictor::new(lda, clusters, DEFAULT_FOLD_IN_ITERS)?.predict(trial, fraction, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub fraction: f64,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPrediction {
    pub trial_id: String,
    pub fraction: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub points: Vec<AccuracyPoint>,
    pub skipped: Vec<SkippedPrediction>,
}

impl AccuracyCurve {
    pub fn accuracy_at(&self, fraction: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.fraction - fraction).abs() < 1e-12)
            .map(|p| p.accuracy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,accuracy,n\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.fraction, p.accuracy, p.n));
        }
        out
    }

    /// `{"fraction": [...], "accuracy": [...], "n": [...]}`.
    pub fn to_series_json(&self) -> Result<String> {
        let series = serde_json::json!({
            "fraction": self.points.iter().map(|p| p.fraction).collect::<Vec<_>>(),
            "accuracy": self.points.iter().map(|p| p.accuracy).collect::<Vec<_>>(),
            "n": self.points.iter().map(|p| p.n).collect::<Vec<_>>(),
        });
        Ok(serde_json::to_string(&series)?)
    }
}

/// Share of trials whose prefix prediction matches their full-transcript
/// prediction, per fraction. Trials that cannot be predicted at some fraction
/// are left out of that fraction's denominator and listed in `skipped`.
pub fn early_accuracy_curve(
    predictor: &EarlyPredictor<'_>,
    trials: &[TrialTranscript],
    fractions: &[f64],
    seed: u64,
) -> Result<AccuracyCurve> {
    if fractions.is_empty() {
        return Err(invalid("no fractions"));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0))
        || fractions.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(invalid(
            "fractions must be strictly increasing within (0, 1]",
        ));
    }
    let per_trial: Vec<(Option<usize>, Vec<Result<usize, String>>)> = trials
        .par_iter()
        .map(|t| {
            let reference = predictor
                .predict(t, 1.0, seed)
                .map(|p| p.predicted_cluster)
                .ok();
            let preds = fractions
                .iter()
                .map(|&f| {
                    predictor
                        .predict(t, f, seed)
                        .map(|p| p.predicted_cluster)
                        .map_err(|e| e.to_string())
                })
                .collect();
            (reference, preds)
        })
        .collect();

    let mut curve = AccuracyCurve {
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, &fraction) in fractions.iter().enumerate() {
        let (mut hits, mut n) = (0usize, 0usize);
        for (t, (reference, preds)) in trials.iter().zip(&per_trial) {
            match (reference, &preds[i]) {
                (Some(r), Ok(p)) => {
                    n += 1;
                    hits += usize::from(r == p);
                }
                (None, _) => curve.skipped.push(SkippedPrediction {
                    trial_id: t.trial_id.clone(),
                    fraction,
                    reason: "no reference prediction".into(),
                }),
                (_, Err(e)) => curve.skipped.push(SkippedPrediction {
                    trial_id: t.trial_id.clone(),
                    fraction,
                    reason: e.clone(),
                }),
            }
        }
        curve.points.push(AccuracyPoint {
            fraction,
            accuracy: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
            n,
        });
    }
    Ok(curve)
}
