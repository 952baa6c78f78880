use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coherence_report, fit_lda, CoOccurrence, LdaConfig, LdaModel};
use crate::corpus::DocTermMatrix;
use crate::error::{invalid, Result};
use crate::rng::run_seed;

/// Which run of the selected topic count to keep as "the" model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunSelection {
    #[default]
    Best,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub runs_per_k: usize,
    pub top_m: usize,
    pub selection: RunSelection,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 20,
            runs_per_k: 100,
            top_m: 5,
            selection: RunSelection::Best,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCountReport {
    /// Mean topic coherence of each run, per candidate topic count.
    pub candidates: BTreeMap<usize, Vec<f64>>,
    pub selected_k: usize,
    pub top_m: usize,
}

impl TopicCountReport {
    pub fn average(&self, k: usize) -> Option<f64> {
        self.candidates
            .get(&k)
            .map(|runs| runs.iter().sum::<f64>() / runs.len() as f64)
    }

    /// Index of the run kept for topic count `k`. Ties resolve to the lower index.
    pub fn chosen_run(&self, k: usize, selection: RunSelection) -> Option<usize> {
        let runs = self.candidates.get(&k)?;
        let mut idx: Vec<usize> = (0..runs.len()).collect();
        idx.sort_by(|&a, &b| runs[b].total_cmp(&runs[a]).then(a.cmp(&b)));
        match selection {
            RunSelection::Best => idx.first().copied(),
            RunSelection::Median => idx.get(idx.len() / 2).copied(),
        }
    }

    /// Refits the kept run at the selected topic count.
    pub fn refit(
        &self,
        dtm: &DocTermMatrix,
        cfg: &LdaConfig,
        selection: RunSelection,
    ) -> Result<LdaModel> {
        let run = self
            .chosen_run(self.selected_k, selection)
            .ok_or_else(|| invalid("report has no runs for the selected k"))?;
        fit_lda(
            dtm,
            self.selected_k,
            &cfg.with_seed(run_seed(cfg.seed, run as u64)),
        )
    }
}

/// Fits `runs_per_k` models for every k in `k_min..=k_max` and picks the k with
/// the highest across-run average of mean coherence (smaller k on ties).
///
/// Run `i` uses seed `cfg.seed + i * RUN_SEED_STRIDE` for every k. Jobs run on
/// the current rayon pool; the result does not depend on its width.
pub fn select_topic_count(
    dtm: &DocTermMatrix,
    sweep: &SweepConfig,
    cfg: &LdaConfig,
) -> Result<TopicCountReport> {
    if sweep.k_min < 2 || sweep.k_min > sweep.k_max {
        return Err(invalid("need 2 <= k_min <= k_max"));
    }
    if sweep.runs_per_k < 1 {
        return Err(invalid("runs_per_k must be >= 1"));
    }
    cfg.validate()?;
    let cooc = CoOccurrence::new(dtm);
    let jobs: Vec<(usize, usize)> = (sweep.k_min..=sweep.k_max)
        .flat_map(|k| (0..sweep.runs_per_k).map(move |i| (k, i)))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(k, i)| {
            let model = fit_lda(dtm, k, &cfg.with_seed(run_seed(cfg.seed, i as u64)))?;
            Ok(coherence_report(&model, &cooc, sweep.top_m)?.mean)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut candidates: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&(k, _), s) in jobs.iter().zip(scores) {
        candidates.entry(k).or_default().push(s);
    }
    let mut report = TopicCountReport {
        candidates,
        selected_k: sweep.k_min,
        top_m: sweep.top_m,
    };
    let mut best = f64::NEG_INFINITY;
    for k in sweep.k_min..=sweep.k_max {
        let avg = report.average(k).unwrap_or(f64::NEG_INFINITY);
        if avg > best {
            best = avg;
            report.selected_k = k;
        }
    }
    Ok(report)
}
