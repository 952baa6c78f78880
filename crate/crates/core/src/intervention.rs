//! Checkpointed intervention policy.
//!
//! At the first checkpoint (10% by default) a trial predicted into a
//! low-performing cluster is gated on its team's BEARD profile. At each later
//! checkpoint a low-performing trial triggers an intervention unless its TED
//! measures improved since the baseline checkpoint.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::TrialTranscript;
use crate::earlypred::{EarlyPredictor, DEFAULT_FOLD_IN_ITERS};
use crate::error::{invalid, Error, Result};
use crate::stats::{
    parse_cluster_term, BeardProfile, ModelKind, RegressionResult, TedSeries, INTERCEPT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub low_clusters: BTreeSet<usize>,
    pub alpha_level: f64,
    pub source: RegressionResult,
}

/// Clusters whose dummy coefficient is negative and significant at `alpha_level`.
pub fn derive_performance_profile(
    reg: &RegressionResult,
    alpha_level: f64,
) -> Result<PerformanceProfile> {
    if reg.model_kind != ModelKind::Ols {
        return Err(invalid(
            "performance profile needs an OLS cluster-score regression",
        ));
    }
    let dummies: Vec<(usize, f64, f64)> = reg
        .terms
        .iter()
        .filter_map(|t| parse_cluster_term(&t.name).map(|c| (c, t.coef, t.p)))
        .collect();
    if dummies.is_empty() {
        return Err(invalid("regression has no cluster dummy terms"));
    }
    Ok(PerformanceProfile {
        low_clusters: dummies
            .into_iter()
            .filter(|&(_, coef, p)| coef < 0.0 && p < alpha_level)
            .map(|(c, _, _)| c)
            .collect(),
        alpha_level,
        source: reg.clone(),
    })
}

/// Membership probability of the gate model for a team profile.
pub fn gate_probability(profile: &BeardProfile, gate_model: &RegressionResult) -> Result<f64> {
    let mut eta = 0.0;
    for t in &gate_model.terms {
        let x = if t.name == INTERCEPT {
            1.0
        } else {
            *profile.variables.get(&t.name).ok_or_else(|| {
                Error::Missing(format!(
                    "team {}: BEARD variable {}",
                    profile.team_id, t.name
                ))
            })?
        };
        eta += t.coef * x;
    }
    Ok(1.0 / (1.0 + (-eta).exp()))
}

/// `sigmoid(x . beta) >= threshold` (inclusive boundary).
pub fn beard_intervention_gate(
    profile: &BeardProfile,
    gate_model: &RegressionResult,
    threshold: f64,
) -> Result<bool> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid("gate threshold must lie in (0, 1)"));
    }
    Ok(gate_probability(profile, gate_model)? >= threshold)
}

/// Whether the mean direction-signed change of the selected measures between
/// `t0` and `t1` exceeds `epsilon`.
pub fn ted_improvement(
    series: &TedSeries,
    t0: f64,
    t1: f64,
    selected: &BTreeSet<String>,
    epsilon: f64,
) -> Result<bool> {
    if t0 >= t1 {
        return Err(invalid(format!("t0 = {t0} must precede t1 = {t1}")));
    }
    if selected.is_empty() {
        return Err(invalid("no TED measures selected"));
    }
    let mut total = 0.0;
    for name in selected {
        let direction = series
            .schema
            .get(name)
            .ok_or_else(|| Error::Missing(format!("TED measure {name} not in schema")))?;
        total += (series.value_at(name, t1)? - series.value_at(name, t0)?) * direction.sign();
    }
    Ok(total / selected.len() as f64 > epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TedBaseline {
    /// Compare against the preceding checkpoint.
    #[default]
    Previous,
    /// Always compare against the first checkpoint.
    First,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterventionConfig {
    pub checkpoints: Vec<f64>,
    pub gate_threshold: f64,
    pub ted_epsilon: f64,
    pub ted_baseline: TedBaseline,
    pub fold_in_iters: usize,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        Self {
            checkpoints: vec![0.1, 0.3, 0.5, 0.7],
            gate_threshold: 0.5,
            ted_epsilon: 0.0,
            ted_baseline: TedBaseline::Previous,
            fold_in_iters: DEFAULT_FOLD_IN_ITERS,
        }
    }
}

impl InterventionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty()
            || self.checkpoints.iter().any(|&c| !(c > 0.0 && c <= 1.0))
            || self.checkpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(invalid(
                "checkpoints must be strictly increasing within (0, 1]",
            ));
        }
        if !(self.gate_threshold > 0.0 && self.gate_threshold < 1.0) {
            return Err(invalid("gate threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointDecision {
    pub checkpoint: f64,
    pub predicted_cluster: Option<usize>,
    pub low_performing: bool,
    pub beard_gate: Option<bool>,
    pub ted_improved: Option<bool>,
    pub intervene: bool,
    pub skipped: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionLog {
    pub trial_id: String,
    pub decisions: Vec<CheckpointDecision>,
    pub total_interventions: usize,
}

#[derive(Serialize)]
struct DecisionLine<'a> {
    trial_id: &'a str,
    checkpoint: f64,
    predicted_cluster: Option<usize>,
    low: bool,
    gate: Option<bool>,
    ted_improved: Option<bool>,
    intervene: bool,
    reason: &'a str,
}

impl InterventionLog {
    /// One JSON object per decision, newline terminated.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for d in &self.decisions {
            out.push_str(&serde_json::to_string(&DecisionLine {
                trial_id: &self.trial_id,
                checkpoint: d.checkpoint,
                predicted_cluster: d.predicted_cluster,
                low: d.low_performing,
                gate: d.beard_gate,
                ted_improved: d.ted_improved,
                intervene: d.intervene,
                reason: &d.reason,
            })?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Shared, read-only models the policy consults.
pub struct PolicyModels<'a> {
    pub predictor: &'a EarlyPredictor<'a>,
    pub profile: &'a PerformanceProfile,
    /// `None` when no gate could be fitted; low-cluster decisions at the
    /// first checkpoint are then logged as skipped.
    pub gate_model: Option<&'a RegressionResult>,
    pub ted_variables: &'a BTreeSet<String>,
}

fn skipped(
    checkpoint: f64,
    predicted_cluster: Option<usize>,
    low: bool,
    err: &Error,
) -> CheckpointDecision {
    CheckpointDecision {
        checkpoint,
        predicted_cluster,
        low_performing: low,
        beard_gate: None,
        ted_improved: None,
        intervene: false,
        skipped: true,
        reason: format!("skipped: {err}"),
    }
}

/// Runs every checkpoint of the policy for one trial. A checkpoint that fails
/// (for example an empty prefix) is logged as skipped and the run continues.
pub fn run_intervention_pipeline(
    models: &PolicyModels<'_>,
    trial: &TrialTranscript,
    beard: Option<&BeardProfile>,
    ted: Option<&TedSeries>,
    cfg: &InterventionConfig,
    seed: u64,
) -> Result<InterventionLog> {
    cfg.validate()?;
    let mut decisions = Vec::with_capacity(cfg.checkpoints.len());
    for (i, &checkpoint) in cfg.checkpoints.iter().enumerate() {
        let cluster = match models.predictor.predict(trial, checkpoint, seed) {
            Ok(p) => p.predicted_cluster,
            Err(e) => {
                decisions.push(skipped(checkpoint, None, false, &e));
                continue;
            }
        };
        let low = models.profile.low_clusters.contains(&cluster);
        if !low {
            decisions.push(CheckpointDecision {
                checkpoint,
                predicted_cluster: Some(cluster),
                low_performing: false,
                beard_gate: None,
                ted_improved: None,
                intervene: false,
                skipped: false,
                reason: format!("cluster {cluster} is not low-performing"),
            });
            continue;
        }
        let decision = if i == 0 {
            let gate_model = models
                .gate_model
                .ok_or_else(|| Error::Missing("gate model".into()));
            beard
                .ok_or_else(|| Error::Missing(format!("BEARD profile for team {}", trial.team_id)))
                .and_then(|b| gate_probability(b, gate_model?))
                .map(|prob| {
                    let gate = prob >= cfg.gate_threshold;
                    CheckpointDecision {
                        checkpoint,
                        predicted_cluster: Some(cluster),
                        low_performing: true,
                        beard_gate: Some(gate),
                        ted_improved: None,
                        intervene: gate,
                        skipped: false,
                        reason: format!(
                            "low-performing cluster {cluster}; BEARD gate probability {prob:.3} {} {:.3}",
                            if gate { ">=" } else { "<" },
                            cfg.gate_threshold
                        ),
                    }
                })
        } else {
            let t0 = match cfg.ted_baseline {
                TedBaseline::Previous => cfg.checkpoints[i - 1],
                TedBaseline::First => cfg.checkpoints[0],
            };
            ted.ok_or_else(|| Error::Missing(format!("TED series for {}", trial.trial_id)))
                .and_then(|s| {
                    ted_improvement(s, t0, checkpoint, models.ted_variables, cfg.ted_epsilon)
                })
                .map(|improved| CheckpointDecision {
                    checkpoint,
                    predicted_cluster: Some(cluster),
                    low_performing: true,
                    beard_gate: None,
                    ted_improved: Some(improved),
                    intervene: !improved,
                    skipped: false,
                    reason: format!(
                        "low-performing cluster {cluster}; TED {} since {t0}",
                        if improved { "improved" } else { "not improved" }
                    ),
                })
        };
        decisions.push(decision.unwrap_or_else(|e| skipped(checkpoint, Some(cluster), true, &e)));
    }
    let total_interventions = decisions.iter().filter(|d| d.intervene).count();
    Ok(InterventionLog {
        trial_id: trial.trial_id.clone(),
        decisions,
        total_interventions,
    })
}
