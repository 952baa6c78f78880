//! k-means clustering of document-topic rows, gap-statistic model selection
//! and trial-one/trial-two composition of the resulting clusters.

mod gap;
mod kmeans;

pub use gap::{gap_statistic, GapEntry, GapReport};
pub use kmeans::{kmeans_fit, KMeansFit};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{TrialIndex, TrialTranscript};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    pub wss: f64,
}

impl ClusterModel {
    pub fn from_fit(ids: &[String], fit: KMeansFit) -> Result<Self> {
        if ids.len() != fit.labels.len() {
            return Err(invalid("ids and labels differ in length"));
        }
        Ok(Self {
            k: fit.centroids.len(),
            assignments: ids.iter().cloned().zip(fit.labels).collect(),
            centroids: fit.centroids,
            wss: fit.wss,
        })
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.k != m.centroids.len() || m.assignments.values().any(|&c| c >= m.k) {
            return Err(invalid("cluster model is inconsistent"));
        }
        Ok(m)
    }
}

/// Nearest centroid by Euclidean distance; ties go to the lower index.
pub fn assign_cluster(model: &ClusterModel, point: &[f64]) -> Result<usize> {
    if point.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: point.len(),
        });
    }
    Ok(kmeans::nearest(&model.centroids, point).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub cluster: usize,
    pub pct_trial_one: f64,
    pub pct_trial_two: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionTable {
    pub rows: Vec<CompositionRow>,
}

impl CompositionTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster,pct_one,pct_two,n\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{:.2},{}\n",
                r.cluster, r.pct_trial_one, r.pct_trial_two, r.n
            ));
        }
        out
    }
}

/// Share of trial-one and trial-two members per non-empty cluster.
pub fn trial_composition(
    model: &ClusterModel,
    trials: &[TrialTranscript],
) -> Result<CompositionTable> {
    let index: HashMap<&str, TrialIndex> = trials
        .iter()
        .map(|t| (t.trial_id.as_str(), t.trial_index))
        .collect();
    let missing: Vec<&str> = model
        .assignments
        .keys()
        .filter(|id| !index.contains_key(id.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Missing(format!(
            "trial metadata for {}",
            missing.join(", ")
        )));
    }
    let mut counts = vec![(0usize, 0usize); model.k];
    for (id, &c) in &model.assignments {
        match index[id.as_str()] {
            TrialIndex::One => counts[c].0 += 1,
            TrialIndex::Two => counts[c].1 += 1,
        }
    }
    Ok(CompositionTable {
        rows: counts
            .into_iter()
            .enumerate()
            .filter(|(_, (a, b))| a + b > 0)
            .map(|(cluster, (a, b))| {
                let n = a + b;
                CompositionRow {
                    cluster,
                    pct_trial_one: 100.0 * a as f64 / n as f64,
                    pct_trial_two: 100.0 * b as f64 / n as f64,
                    n,
                }
            })
            .collect(),
    })
}
