use rand::Rng as _;

use super::{LdaConfig, LdaModel};
use crate::corpus::DocTermMatrix;
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, hash_str, rng_from_seed, Rng};

/// Collapsed Gibbs sampler over token-topic assignments.
///
/// Documents are visited in order of their ids and each document draws from
/// its own stream keyed by its id, so the chain does not depend on the row
/// order of the matrix.
pub struct GibbsSampler {
    k: usize,
    n_terms: usize,
    alpha: f64,
    beta: f64,
    tokens: Vec<Vec<u32>>,
    order: Vec<usize>,
    assignments: Vec<Vec<u16>>,
    doc_topic: Vec<u32>,
    topic_term: Vec<u32>,
    topic_total: Vec<u32>,
    rngs: Vec<Rng>,
    weights: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(dtm: &DocTermMatrix, k: usize, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if k < 1 || k > u16::MAX as usize {
            return Err(invalid(format!("topic count {k} out of range")));
        }
        if dtm.n_docs() == 0 {
            return Err(Error::DegenerateCorpus(
                "document-term matrix has no rows".into(),
            ));
        }
        let total = dtm.total_tokens();
        if k as u64 > total {
            return Err(invalid(format!(
                "topic count {k} exceeds total token count {total}"
            )));
        }
        if let Some(d) = (0..dtm.n_docs()).find(|&d| dtm.row_total(d) == 0) {
            return Err(Error::NoInVocabularyTokens(dtm.doc_ids[d].clone()));
        }

        let tokens: Vec<Vec<u32>> = dtm
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .flat_map(|&(t, c)| std::iter::repeat_n(t as u32, c as usize))
                    .collect()
            })
            .collect();
        let mut order: Vec<usize> = (0..dtm.n_docs()).collect();
        order.sort_by(|&a, &b| dtm.doc_ids[a].cmp(&dtm.doc_ids[b]));

        let v = dtm.n_terms();
        let mut s = Self {
            k,
            n_terms: v,
            alpha: cfg.alpha,
            beta: cfg.beta,
            assignments: tokens.iter().map(|d| vec![0u16; d.len()]).collect(),
            tokens,
            order,
            doc_topic: vec![0; dtm.n_docs() * k],
            topic_term: vec![0; k * v],
            topic_total: vec![0; k],
            rngs: dtm
                .doc_ids
                .iter()
                .map(|id| rng_from_seed(derive_seed(cfg.seed, &[hash_str(id)])))
                .collect(),
            weights: vec![0.0; k],
        };
        for &d in &s.order.clone() {
            for i in 0..s.tokens[d].len() {
                let t = s.rngs[d].random_range(0..k);
                s.assignments[d][i] = t as u16;
                s.add(d, s.tokens[d][i] as usize, t);
            }
        }
        Ok(s)
    }

    #[inline]
    fn add(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.k + t] += 1;
        self.topic_term[t * self.n_terms + w] += 1;
        self.topic_total[t] += 1;
    }

    #[inline]
    fn remove(&mut self, d: usize, w: usize, t: usize) {
        self.doc_topic[d * self.k + t] -= 1;
        self.topic_term[t * self.n_terms + w] -= 1;
        self.topic_total[t] -= 1;
    }

    /// One full pass over every token.
    pub fn sweep(&mut self) {
        let k = self.k;
        let v_beta = self.n_terms as f64 * self.beta;
        for oi in 0..self.order.len() {
            let d = self.order[oi];
            for i in 0..self.tokens[d].len() {
                let w = self.tokens[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.remove(d, w, old);
                let mut total = 0.0;
                for t in 0..k {
                    let p = (f64::from(self.doc_topic[d * k + t]) + self.alpha)
                        * (f64::from(self.topic_term[t * self.n_terms + w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + v_beta);
                    total += p;
                    self.weights[t] = total;
                }
                let u = self.rngs[d].random::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);
                self.assignments[d][i] = new as u16;
                self.add(d, w, new);
            }
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Current topic of every token, per document (tokens ordered by term id).
    pub fn assignments(&self) -> &[Vec<u16>] {
        &self.assignments
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.k..(d + 1) * self.k]
    }

    pub fn topic_term_counts(&self, t: usize) -> &[u32] {
        &self.topic_term[t * self.n_terms..(t + 1) * self.n_terms]
    }

    /// Recomputes every count table from the assignments and compares.
    pub fn counts_consistent(&self) -> bool {
        let k = self.k;
        let mut dt = vec![0u32; self.doc_topic.len()];
        let mut tw = vec![0u32; self.topic_term.len()];
        let mut tt = vec![0u32; k];
        for (d, (toks, zs)) in self.tokens.iter().zip(&self.assignments).enumerate() {
            for (&w, &z) in toks.iter().zip(zs) {
                dt[d * k + z as usize] += 1;
                tw[z as usize * self.n_terms + w as usize] += 1;
                tt[z as usize] += 1;
            }
            let row: u32 = self.doc_topic_counts(d).iter().sum();
            if row as usize != toks.len() {
                return false;
            }
        }
        dt == self.doc_topic && tw == self.topic_term && tt == self.topic_total
    }
}

pub fn fit_lda(dtm: &DocTermMatrix, k: usize, cfg: &LdaConfig) -> Result<LdaModel> {
    if k < 2 {
        return Err(invalid("fit_lda requires k >= 2"));
    }
    let mut sampler = GibbsSampler::new(dtm, k, cfg)?;
    let n_docs = dtm.n_docs();
    let v = dtm.n_terms();
    let mut dt_sum = vec![0.0f64; n_docs * k];
    let mut tw_sum = vec![0.0f64; k * v];
    for iter in 0..cfg.n_iter {
        sampler.sweep();
        if iter >= cfg.burn_in {
            for (acc, &c) in dt_sum.iter_mut().zip(&sampler.doc_topic) {
                *acc += f64::from(c);
            }
            for (acc, &c) in tw_sum.iter_mut().zip(&sampler.topic_term) {
                *acc += f64::from(c);
            }
        }
    }
    let samples = (cfg.n_iter - cfg.burn_in) as f64;

    let phi = (0..k)
        .map(|t| {
            let row = &tw_sum[t * v..(t + 1) * v];
            let n_t: f64 = row.iter().sum::<f64>() / samples;
            row.iter()
                .map(|&c| (c / samples + cfg.beta) / (n_t + v as f64 * cfg.beta))
                .collect()
        })
        .collect();
    let theta = (0..n_docs)
        .map(|d| {
            let n_d = dtm.row_total(d) as f64;
            dt_sum[d * k..(d + 1) * k]
                .iter()
                .map(|&c| (c / samples + cfg.alpha) / (n_d + k as f64 * cfg.alpha))
                .collect()
        })
        .collect();

    Ok(LdaModel {
        k,
        phi,
        theta,
        config: cfg.clone(),
        vocab_hash: dtm.vocab.digest(),
        terms: dtm.vocab.terms().to_vec(),
        doc_ids: dtm.doc_ids.clone(),
    })
}

/// Fold-in Gibbs inference of a document's topic mixture with `phi` held fixed.
///
/// The first half of the sweeps is discarded; the returned row is
/// `(mean n_dt + alpha) / (n_d + k * alpha)` over the remaining sweeps.
pub fn infer_theta(
    model: &LdaModel,
    doc_counts: &[(usize, u32)],
    n_iter: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let k = model.k;
    let alpha = model.config.alpha;
    let tokens: Vec<usize> = doc_counts
        .iter()
        .filter(|&&(w, _)| w < model.terms.len())
        .flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize))
        .collect();
    if tokens.is_empty() {
        return Err(Error::NoInVocabularyTokens("document is empty".into()));
    }
    let n_iter = n_iter.max(1);
    let burn_in = n_iter / 2;
    let mut rng = rng_from_seed(seed);
    let mut weights = vec![0.0; k];
    let mut counts = vec![0u32; k];

    let draw = |rng: &mut Rng, weights: &mut [f64], counts: &[u32], w: usize, with_counts: bool| {
        let mut total = 0.0;
        for t in 0..k {
            let prior = if with_counts {
                f64::from(counts[t]) + alpha
            } else {
                1.0
            };
            total += model.phi[t][w] * prior;
            weights[t] = total;
        }
        if total <= 0.0 {
            return rng.random_range(0..k);
        }
        let u = rng.random::<f64>() * total;
        weights.iter().position(|&c| u < c).unwrap_or(k - 1)
    };

    let mut z: Vec<usize> = Vec::with_capacity(tokens.len());
    for &w in &tokens {
        let t = draw(&mut rng, &mut weights, &counts, w, false);
        counts[t] += 1;
        z.push(t);
    }
    let mut sums = vec![0.0f64; k];
    for iter in 0..n_iter {
        for (i, &w) in tokens.iter().enumerate() {
            counts[z[i]] -= 1;
            let t = draw(&mut rng, &mut weights, &counts, w, true);
            counts[t] += 1;
            z[i] = t;
        }
        if iter >= burn_in {
            for (s, &c) in sums.iter_mut().zip(&counts) {
                *s += f64::from(c);
            }
        }
    }
    let samples = (n_iter - burn_in) as f64;
    let n_d = tokens.len() as f64;
    Ok(sums
        .iter()
        .map(|&s| (s / samples + alpha) / (n_d + k as f64 * alpha))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;

    fn dtm(ids: &[&str], terms: &[&str], rows: Vec<Vec<(usize, u32)>>) -> DocTermMatrix {
        DocTermMatrix::new(
            ids.iter().map(|s| s.to_string()).collect(),
            Vocabulary::new(terms.iter().map(|s| s.to_string()).collect()).unwrap(),
            rows,
        )
        .unwrap()
    }

    fn cfg(alpha: f64, beta: f64) -> LdaConfig {
        LdaConfig {
            alpha,
            beta,
            n_iter: 200,
            burn_in: 100,
            seed: 11,
        }
    }

    #[test]
    fn counts_conserved_every_sweep() {
        let m = dtm(
            &["a", "b", "c"],
            &["x", "y", "z"],
            vec![
                vec![(0, 3), (1, 1)],
                vec![(1, 2), (2, 4)],
                vec![(0, 1), (2, 1)],
            ],
        );
        let mut s = GibbsSampler::new(&m, 3, &cfg(0.1, 0.05)).unwrap();
        for _ in 0..50 {
            s.sweep();
            assert!(s.counts_consistent());
        }
    }

    #[test]
    fn disjoint_docs_separate() {
        let m = dtm(&["d1", "d2"], &["a", "b"], vec![vec![(0, 3)], vec![(1, 3)]]);
        let model = fit_lda(&m, 2, &cfg(0.1, 0.1)).unwrap();
        let top0 = if model.theta[0][0] > model.theta[0][1] {
            0
        } else {
            1
        };
        // a perfect split gives (3 + 0.1) / (3 + 0.2)
        assert!(model.theta[0][top0] >= 0.96);
        assert!(model.theta[1][1 - top0] >= 0.96);
    }

    #[test]
    fn single_term_phi_is_one() {
        let m = dtm(&["d1", "d2"], &["a"], vec![vec![(0, 2)], vec![(0, 3)]]);
        let model = fit_lda(&m, 2, &cfg(0.1, 0.05)).unwrap();
        for row in &model.phi {
            assert!((row[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_is_deterministic_and_stochastic_rows() {
        let m = dtm(
            &["a", "b", "c"],
            &["x", "y", "z"],
            vec![
                vec![(0, 3), (1, 1)],
                vec![(1, 2), (2, 4)],
                vec![(0, 1), (2, 1)],
            ],
        );
        let a = fit_lda(&m, 2, &cfg(0.1, 0.05)).unwrap();
        let b = fit_lda(&m, 2, &cfg(0.1, 0.05)).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.theta, b.theta);
        for row in a.phi.iter().chain(&a.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn fit_errors() {
        let m = dtm(&["d"], &["a", "b"], vec![vec![(0, 1), (1, 1)]]);
        assert!(fit_lda(&m, 3, &cfg(0.1, 0.1)).is_err());
        assert!(fit_lda(&m, 1, &cfg(0.1, 0.1)).is_err());
        let empty = dtm(&[], &["a"], vec![]);
        assert!(fit_lda(&empty, 2, &cfg(0.1, 0.1)).is_err());
        let bad = LdaConfig {
            burn_in: 200,
            ..cfg(0.1, 0.1)
        };
        assert!(fit_lda(&m, 2, &bad).is_err());
    }

    fn hand_model(k: usize, phi: Vec<Vec<f64>>) -> LdaModel {
        let v = phi[0].len();
        LdaModel {
            k,
            phi,
            theta: vec![],
            config: LdaConfig {
                alpha: 0.1,
                ..LdaConfig::default()
            },
            vocab_hash: String::new(),
            terms: (0..v).map(|i| format!("t{i}")).collect(),
            doc_ids: vec![],
        }
    }

    #[test]
    fn fold_in_forced_assignment() {
        let model = hand_model(2, vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]]);
        let theta = infer_theta(&model, &[(0, 6), (1, 4)], 50, 3).unwrap();
        assert!((theta[0] - 10.1 / 10.2).abs() < 1e-12);
        assert!((theta[1] - 0.1 / 10.2).abs() < 1e-12);
        assert_eq!(
            theta,
            infer_theta(&model, &[(0, 6), (1, 4)], 50, 3).unwrap()
        );
    }

    #[test]
    fn fold_in_single_topic_and_empty() {
        let model = hand_model(1, vec![vec![0.3, 0.7]]);
        assert_eq!(infer_theta(&model, &[(1, 4)], 10, 1).unwrap(), vec![1.0]);
        assert!(matches!(
            infer_theta(&model, &[], 10, 1),
            Err(Error::NoInVocabularyTokens(_))
        ));
    }
}
