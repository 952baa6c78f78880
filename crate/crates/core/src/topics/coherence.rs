use serde::{Deserialize, Serialize};

use super::LdaModel;
use crate::corpus::DocTermMatrix;
use crate::error::{invalid, Result};

/// Per-topic probabilistic coherence of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub k: usize,
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub top_m: usize,
}

/// Document-level binary occurrence sets, one sorted doc list per term.
#[derive(Debug, Clone)]
pub struct CoOccurrence {
    n_docs: usize,
    docs_of_term: Vec<Vec<u32>>,
}

impl CoOccurrence {
    pub fn new(dtm: &DocTermMatrix) -> Self {
        let mut docs_of_term = vec![Vec::new(); dtm.n_terms()];
        for (d, row) in dtm.rows.iter().enumerate() {
            for &(t, c) in row {
                if c > 0 {
                    docs_of_term[t].push(d as u32);
                }
            }
        }
        Self {
            n_docs: dtm.n_docs(),
            docs_of_term,
        }
    }

    fn joint(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.docs_of_term[a], &self.docs_of_term[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Mean over rank-ordered pairs `i < j` of `P(t_j | t_i) - P(t_j)`.
    pub fn coherence(&self, term_ids: &[usize]) -> Result<f64> {
        let m = term_ids.len();
        if m < 2 {
            return Err(invalid("coherence needs at least two terms"));
        }
        if let Some(&bad) = term_ids.iter().find(|&&t| t >= self.docs_of_term.len()) {
            return Err(invalid(format!("term id {bad} out of range")));
        }
        let n = self.n_docs as f64;
        let mut sum = 0.0;
        for i in 0..m {
            let n_i = self.docs_of_term[term_ids[i]].len();
            if n_i == 0 {
                continue;
            }
            for j in (i + 1)..m {
                let n_j = self.docs_of_term[term_ids[j]].len() as f64;
                let n_ij = self.joint(term_ids[i], term_ids[j]) as f64;
                sum += n_ij / n_i as f64 - n_j / n;
            }
        }
        Ok(sum / (m * (m - 1) / 2) as f64)
    }
}

/// Probabilistic coherence of the first `m` of `topic_terms` over `dtm`.
pub fn probabilistic_coherence(
    topic_terms: &[String],
    dtm: &DocTermMatrix,
    m: usize,
) -> Result<f64> {
    if m < 2 {
        return Err(invalid("m must be >= 2"));
    }
    if topic_terms.len() < m {
        return Err(invalid(format!(
            "need {m} terms, got {}",
            topic_terms.len()
        )));
    }
    let ids = topic_terms[..m]
        .iter()
        .map(|t| {
            dtm.vocab
                .id(t)
                .ok_or_else(|| invalid(format!("term {t:?} not in vocabulary")))
        })
        .collect::<Result<Vec<_>>>()?;
    CoOccurrence::new(dtm).coherence(&ids)
}

pub fn coherence_report(
    model: &LdaModel,
    cooc: &CoOccurrence,
    top_m: usize,
) -> Result<CoherenceReport> {
    let per_topic = model
        .top_term_ids(top_m)?
        .iter()
        .map(|ids| cooc.coherence(ids))
        .collect::<Result<Vec<_>>>()?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceReport {
        k: model.k,
        per_topic,
        mean,
        top_m,
    })
}
