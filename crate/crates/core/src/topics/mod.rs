//! LDA topic modeling: collapsed Gibbs fitting, probabilistic coherence,
//! topic-count selection and fold-in inference for partial documents.

mod coherence;
mod gibbs;
mod select;

pub use coherence::{coherence_report, probabilistic_coherence, CoOccurrence, CoherenceReport};
pub use gibbs::{fit_lda, infer_theta, GibbsSampler};
pub use select::{select_topic_count, RunSelection, SweepConfig, TopicCountReport};

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-term prior.
    pub beta: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.05,
            n_iter: 500,
            burn_in: 250,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta must be positive"));
        }
        if self.n_iter < 1 {
            return Err(invalid("n_iter must be >= 1"));
        }
        if self.burn_in >= self.n_iter {
            return Err(invalid("burn_in must be smaller than n_iter"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// A fitted topic model. `phi` is topic x term, `theta` is document x topic.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub k: usize,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub config: LdaConfig,
    pub vocab_hash: String,
    pub terms: Vec<String>,
    pub doc_ids: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct LdaModelJson {
    k: usize,
    alpha: f64,
    beta: f64,
    n_iter: usize,
    burn_in: usize,
    seed: u64,
    vocab_hash: String,
    terms: Vec<String>,
    doc_ids: Vec<String>,
    phi: Vec<f64>,
    theta: Vec<f64>,
}

impl LdaModel {
    pub fn vocabulary(&self) -> Result<Vocabulary> {
        Vocabulary::new(self.terms.clone())
    }

    pub fn theta_of(&self, doc_id: &str) -> Option<&[f64]> {
        self.doc_ids
            .iter()
            .position(|d| d == doc_id)
            .map(|i| self.theta[i].as_slice())
    }

    /// Top `m` terms of each topic by descending probability; ties go to the
    /// lexicographically smaller term.
    pub fn top_terms(&self, m: usize) -> Result<Vec<Vec<String>>> {
        Ok(self
            .top_term_ids(m)?
            .into_iter()
            .map(|ids| ids.into_iter().map(|i| self.terms[i].clone()).collect())
            .collect())
    }

    pub fn top_term_ids(&self, m: usize) -> Result<Vec<Vec<usize>>> {
        let v = self.terms.len();
        if m < 1 || m > v {
            return Err(invalid(format!("m = {m} must lie in 1..={v}")));
        }
        Ok(self
            .phi
            .iter()
            .map(|row| {
                let mut ids: Vec<usize> = (0..v).collect();
                ids.sort_by(|&a, &b| {
                    row[b]
                        .total_cmp(&row[a])
                        .then_with(|| self.terms[a].cmp(&self.terms[b]))
                });
                ids.truncate(m);
                ids
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = LdaModelJson {
            k: self.k,
            alpha: self.config.alpha,
            beta: self.config.beta,
            n_iter: self.config.n_iter,
            burn_in: self.config.burn_in,
            seed: self.config.seed,
            vocab_hash: self.vocab_hash.clone(),
            terms: self.terms.clone(),
            doc_ids: self.doc_ids.clone(),
            phi: self.phi.concat(),
            theta: self.theta.concat(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LdaModelJson = serde_json::from_str(s)?;
        let v = doc.terms.len();
        if doc.k == 0 || doc.phi.len() != doc.k * v || doc.theta.len() != doc.k * doc.doc_ids.len()
        {
            return Err(invalid("model arrays do not match k, terms and doc_ids"));
        }
        Ok(Self {
            k: doc.k,
            phi: doc.phi.chunks(v.max(1)).map(<[f64]>::to_vec).collect(),
            theta: doc.theta.chunks(doc.k).map(<[f64]>::to_vec).collect(),
            config: LdaConfig {
                alpha: doc.alpha,
                beta: doc.beta,
                n_iter: doc.n_iter,
                burn_in: doc.burn_in,
                seed: doc.seed,
            },
            vocab_hash: doc.vocab_hash,
            terms: doc.terms,
            doc_ids: doc.doc_ids,
        })
    }
}
