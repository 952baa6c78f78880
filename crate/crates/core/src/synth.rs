//! Ground-truth generators.
//!
//! Corpora are sampled from the LDA generative process and team records from
//! linear and logistic models with known coefficients, so every pipeline
//! stage can be checked against the truth that produced its input. All
//! streams come from Xoshiro256++ seeded through SplitMix64 (see [`crate::rng`]).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    render_session, PreprocessConfig, Role, TrialIndex, TrialTranscript, Utterance,
};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::stats::{
    default_beard_variables, write_beard_csv, write_scores_csv, write_ted_csv, BeardProfile,
    Direction, ScoreRecord, TedKind, TedSample, TedSchema, TedSeries, TedVariable, INTERCEPT,
};

const TOKENS_PER_UTTERANCE: usize = 10;
const ROLES: [Role; 3] = [Role::Medic, Role::Engineer, Role::Transporter];

/// Team id of the `i`-th synthetic team; also its session id.
pub fn team_id(i: usize) -> String {
    format!("team{i:04}")
}

/// `z` followed by three letters: digit-free, not a stopword, and the same
/// width for every index below 26^3.
pub fn term_name(i: usize) -> String {
    let letter = |n: usize| char::from(b'a' + (n % 26) as u8);
    format!("z{}{}{}", letter(i / 676), letter(i / 26), letter(i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocLength {
    Fixed(usize),
    Range { min: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicSupport {
    /// Term `i` belongs to topic `i % k`; each topic is uniform on its block.
    Disjoint,
    /// Each topic is drawn from a symmetric Dirichlet over the whole vocabulary.
    Dirichlet { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpusSpec {
    pub true_k: usize,
    pub vocab_size: usize,
    pub n_docs: usize,
    pub doc_length: DocLength,
    pub alpha: f64,
    pub topic_support: TopicSupport,
    pub duplicate_docs: usize,
    pub seed: u64,
    /// Per-topic score contribution; trial score is `theta . effects + noise`.
    /// Empty means trials carry no score.
    #[serde(default)]
    pub topic_score_effects: Vec<f64>,
    #[serde(default)]
    pub score_noise_sd: f64,
}

impl Default for SynthCorpusSpec {
    fn default() -> Self {
        Self {
            true_k: 3,
            vocab_size: 150,
            n_docs: 200,
            doc_length: DocLength::Fixed(100),
            alpha: 0.01,
            topic_support: TopicSupport::Disjoint,
            duplicate_docs: 0,
            seed: 0,
            topic_score_effects: Vec::new(),
            score_noise_sd: 0.0,
        }
    }
}

impl SynthCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.true_k < 1 || self.n_docs < 1 || self.vocab_size < 1 {
            return Err(invalid("true_k, n_docs and vocab_size must be positive"));
        }
        if self.vocab_size > 26 * 26 * 26 {
            return Err(invalid("vocab_size above 17576"));
        }
        if matches!(self.topic_support, TopicSupport::Disjoint) && self.vocab_size < self.true_k {
            return Err(invalid("disjoint support needs vocab_size >= true_k"));
        }
        if let TopicSupport::Dirichlet { beta } = self.topic_support {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(invalid("beta must be positive"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        match self.doc_length {
            DocLength::Fixed(0) => return Err(invalid("doc_length must be positive")),
            DocLength::Range { min, max } if min == 0 || max < min => {
                return Err(invalid("doc_length range must satisfy 1 <= min <= max"))
            }
            _ => {}
        }
        if self.duplicate_docs > self.n_docs {
            return Err(invalid("more duplicates than documents"));
        }
        if !self.topic_score_effects.is_empty() && self.topic_score_effects.len() != self.true_k {
            return Err(invalid("topic_score_effects needs one entry per topic"));
        }
        if !(self.score_noise_sd >= 0.0) {
            return Err(invalid("score_noise_sd must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpus {
    /// Originals followed by the planted duplicates, normalized.
    pub trials: Vec<TrialTranscript>,
    pub terms: Vec<String>,
    /// `true_k x vocab_size`.
    pub true_phi: Vec<Vec<f64>>,
    /// One row per trial, duplicates included.
    pub true_theta: Vec<Vec<f64>>,
    /// Topic of every token, per trial.
    pub true_assignments: Vec<Vec<usize>>,
    /// `(duplicate trial id, original trial id)`.
    pub duplicates: Vec<(String, String)>,
}

impl SynthCorpus {
    /// Topic with the largest share of trial `d`'s tokens (ties to the lower index).
    pub fn dominant_topic(&self, d: usize) -> usize {
        let k = self.true_phi.len();
        let mut counts = vec![0usize; k];
        for &z in &self.true_assignments[d] {
            counts[z] += 1;
        }
        (0..k).fold(0, |best, t| if counts[t] > counts[best] { t } else { best })
    }

    /// Trials grouped two per session, as `(session id, rendered text)`.
    pub fn sessions(&self) -> Vec<(String, String)> {
        let mut by_team: BTreeMap<&str, Vec<&TrialTranscript>> = BTreeMap::new();
        for t in &self.trials {
            by_team.entry(&t.team_id).or_default().push(t);
        }
        by_team
            .into_iter()
            .map(|(team, trials)| (team.to_string(), render_session(team, team, &trials)))
            .collect()
    }

    /// Writes one `<session>.txt` per session into `dir`.
    pub fn write_transcripts(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (id, text) in self.sessions() {
            fs::write(dir.join(format!("{id}.txt")), text)?;
        }
        Ok(())
    }

    /// Ground truth without the transcripts.
    pub fn truth_json(&self) -> Result<String> {
        let truth = serde_json::json!({
            "terms": self.terms,
            "true_phi": self.true_phi,
            "trial_ids": self.trials.iter().map(|t| &t.trial_id).collect::<Vec<_>>(),
            "true_theta": self.true_theta,
            "dominant_topic": (0..self.trials.len()).map(|d| self.dominant_topic(d)).collect::<Vec<_>>(),
            "duplicates": self.duplicates,
        });
        Ok(serde_json::to_string_pretty(&truth)?)
    }
}

/// Symmetric Dirichlet draw by normalized gammas. If every gamma underflows
/// (tiny concentration), one uniformly chosen component gets all the mass.
fn dirichlet(rng: &mut Rng, dim: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = v.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        v.iter_mut().for_each(|x| *x /= sum);
    } else {
        v = vec![0.0; dim];
        v[rng.random_range(0..dim)] = 1.0;
    }
    v
}

fn trial_id_at(pos: usize) -> (String, String, TrialIndex) {
    let team = team_id(pos / 2);
    let (suffix, index) = if pos.is_multiple_of(2) {
        ("T1", TrialIndex::One)
    } else {
        ("T2", TrialIndex::Two)
    };
    (format!("{team}_{suffix}"), team, index)
}

fn build_trial(pos: usize, tokens: &[String], score: Option<f64>) -> TrialTranscript {
    let (trial_id, team_id, trial_index) = trial_id_at(pos);
    TrialTranscript {
        trial_id,
        team_id,
        trial_index,
        utterances: tokens
            .chunks(TOKENS_PER_UTTERANCE)
            .enumerate()
            .map(|(i, chunk)| Utterance {
                speaker_role: ROLES[i % ROLES.len()],
                text: chunk.join(" "),
                ordinal: i,
                token_count: chunk.len(),
                tokens: chunk.to_vec(),
            })
            .collect(),
        score,
    }
}

pub fn generate_lda_corpus(spec: &SynthCorpusSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let (k, v) = (spec.true_k, spec.vocab_size);
    let terms: Vec<String> = (0..v).map(term_name).collect();

    let mut rng = rng_from_seed(derive_seed(spec.seed, &[0]));
    let true_phi: Vec<Vec<f64>> = match spec.topic_support {
        TopicSupport::Disjoint => (0..k)
            .map(|t| {
                let size = (0..v).filter(|i| i % k == t).count() as f64;
                (0..v)
                    .map(|i| if i % k == t { 1.0 / size } else { 0.0 })
                    .collect()
            })
            .collect(),
        TopicSupport::Dirichlet { beta } => (0..k).map(|_| dirichlet(&mut rng, v, beta)).collect(),
    };
    let term_dists: Vec<WeightedIndex<f64>> = true_phi
        .iter()
        .map(|p| WeightedIndex::new(p).map_err(|e| invalid(format!("topic distribution: {e}"))))
        .collect::<Result<_>>()?;

    let mut true_theta = Vec::with_capacity(spec.n_docs + spec.duplicate_docs);
    let mut true_assignments = Vec::with_capacity(spec.n_docs + spec.duplicate_docs);
    let mut trials = Vec::with_capacity(spec.n_docs + spec.duplicate_docs);
    for d in 0..spec.n_docs {
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[1, d as u64]));
        let theta = dirichlet(&mut rng, k, spec.alpha);
        let topic_dist = WeightedIndex::new(&theta).map_err(|e| invalid(format!("theta: {e}")))?;
        let len = match spec.doc_length {
            DocLength::Fixed(n) => n,
            DocLength::Range { min, max } => rng.random_range(min..=max),
        };
        let z: Vec<usize> = (0..len).map(|_| topic_dist.sample(&mut rng)).collect();
        let tokens: Vec<String> = z
            .iter()
            .map(|&t| terms[term_dists[t].sample(&mut rng)].clone())
            .collect();
        let score = (!spec.topic_score_effects.is_empty()).then(|| {
            let noise: f64 = rng.sample(StandardNormal);
            theta
                .iter()
                .zip(&spec.topic_score_effects)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + spec.score_noise_sd * noise
        });
        trials.push(build_trial(d, &tokens, score));
        true_theta.push(theta);
        true_assignments.push(z);
    }

    let mut duplicates = Vec::with_capacity(spec.duplicate_docs);
    for j in 0..spec.duplicate_docs {
        let pos = spec.n_docs + j;
        let original = &trials[j];
        let tokens: Vec<String> = original.tokens().map(str::to_string).collect();
        let copy = build_trial(pos, &tokens, original.score);
        duplicates.push((copy.trial_id.clone(), original.trial_id.clone()));
        trials.push(copy);
        true_theta.push(true_theta[j].clone());
        true_assignments.push(true_assignments[j].clone());
    }

    Ok(SynthCorpus {
        trials,
        terms,
        true_phi,
        true_theta,
        true_assignments,
        duplicates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthTeamSpec {
    pub n_teams: usize,
    /// Planted score coefficients on the (standard normal) BEARD variables.
    pub beard_effects: BTreeMap<String, f64>,
    pub score_intercept: f64,
    /// Logit of low-cluster membership; `intercept` is accepted as a key.
    pub low_cluster_logit: BTreeMap<String, f64>,
    /// Linear trend per unit of trial time for each TED measure.
    pub ted_trend: BTreeMap<String, f64>,
    /// Measures absent here are higher-is-better.
    pub ted_directions: BTreeMap<String, Direction>,
    /// TED samples are taken at `0, 1/n, ..., 1`.
    pub ted_samples: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthTeamSpec {
    fn default() -> Self {
        let map = |pairs: &[(&str, f64)]| pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        Self {
            n_teams: 100,
            beard_effects: map(&[
                ("anger", -50.0),
                ("social_perceptiveness", 40.0),
                ("transporting_skill", -30.0),
            ]),
            score_intercept: 500.0,
            low_cluster_logit: map(&[
                ("intercept", -0.5),
                ("anger", 1.5),
                ("social_perceptiveness", -1.0),
            ]),
            ted_trend: map(&[
                ("process_effort_agg", 0.5),
                ("comms_total_words", 100.0),
                ("process_skill_use_agg", 0.2),
            ]),
            ted_directions: BTreeMap::new(),
            ted_samples: 10,
            noise_sd: 10.0,
            seed: 0,
        }
    }
}

impl SynthTeamSpec {
    pub fn validate(&self) -> Result<()> {
        let names = default_beard_variables();
        if let Some(bad) = self.beard_effects.keys().find(|k| !names.contains(k)) {
            return Err(invalid(format!(
                "beard_effects: unknown BEARD variable {bad}"
            )));
        }
        if let Some(bad) = self
            .low_cluster_logit
            .keys()
            .find(|k| *k != INTERCEPT && !names.contains(k))
        {
            return Err(invalid(format!(
                "low_cluster_logit: unknown BEARD variable {bad}"
            )));
        }
        if let Some(bad) = self
            .ted_directions
            .keys()
            .find(|k| !self.ted_trend.contains_key(*k))
        {
            return Err(invalid(format!("ted_directions: {bad} has no trend")));
        }
        if self.n_teams < 1 || self.ted_samples < 1 {
            return Err(invalid("n_teams and ted_samples must be positive"));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(invalid("noise_sd must be non-negative"));
        }
        Ok(())
    }

    pub fn ted_schema(&self) -> TedSchema {
        self.ted_trend
            .keys()
            .map(|n| {
                let direction = self
                    .ted_directions
                    .get(n)
                    .copied()
                    .unwrap_or(Direction::HigherIsBetter);
                (
                    n.clone(),
                    TedVariable {
                        direction,
                        kind: Some(TedKind::Aggregate),
                    },
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecords {
    pub beard: Vec<BeardProfile>,
    pub ted_schema: TedSchema,
    /// One series per trial (`<team>_T1`, `<team>_T2`).
    pub ted: Vec<TedSeries>,
    pub scores: Vec<ScoreRecord>,
    pub low_membership: Vec<(String, bool)>,
    /// Planted membership probability per team.
    pub low_probability: Vec<f64>,
}

impl TeamRecords {
    /// Writes `beard.csv`, `ted.csv`, `ted_schema.json`, `scores.csv` and
    /// `low_membership.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_beard_csv(&self.beard, fs::File::create(dir.join("beard.csv"))?)?;
        write_ted_csv(&self.ted, fs::File::create(dir.join("ted.csv"))?)?;
        fs::write(
            dir.join("ted_schema.json"),
            serde_json::to_string_pretty(&self.ted_schema)?,
        )?;
        write_scores_csv(&self.scores, fs::File::create(dir.join("scores.csv"))?)?;
        let mut low = String::from("team_id,low\n");
        for (team, l) in &self.low_membership {
            low.push_str(&format!("{team},{}\n", u8::from(*l)));
        }
        fs::write(dir.join("low_membership.csv"), low)?;
        Ok(())
    }
}

/// Linear predictor of `coefs` on a profile, `intercept` included.
fn linear(coefs: &BTreeMap<String, f64>, profile: &IndexMap<String, f64>) -> f64 {
    coefs
        .iter()
        .map(|(name, c)| {
            c * if name == INTERCEPT {
                1.0
            } else {
                profile[name]
            }
        })
        .sum()
}

pub fn generate_team_records(spec: &SynthTeamSpec) -> Result<TeamRecords> {
    spec.validate()?;
    let names = default_beard_variables();
    let schema = spec.ted_schema();
    let directions: BTreeMap<String, Direction> = schema
        .iter()
        .map(|(n, v)| (n.clone(), v.direction))
        .collect();
    let mut records = TeamRecords {
        beard: Vec::with_capacity(spec.n_teams),
        ted_schema: schema,
        ted: Vec::with_capacity(2 * spec.n_teams),
        scores: Vec::with_capacity(2 * spec.n_teams),
        low_membership: Vec::with_capacity(spec.n_teams),
        low_probability: Vec::with_capacity(spec.n_teams),
    };
    for i in 0..spec.n_teams {
        let team = team_id(i);
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[2, i as u64]));
        let vars: IndexMap<String, f64> = names
            .iter()
            .map(|n| (n.clone(), rng.sample(StandardNormal)))
            .collect();

        let p = 1.0 / (1.0 + (-linear(&spec.low_cluster_logit, &vars)).exp());
        records
            .low_membership
            .push((team.clone(), rng.random::<f64>() < p));
        records.low_probability.push(p);

        let mean_score = spec.score_intercept + linear(&spec.beard_effects, &vars);
        for suffix in ["T1", "T2"] {
            let trial_id = format!("{team}_{suffix}");
            let noise: f64 = rng.sample(StandardNormal);
            records.scores.push(ScoreRecord {
                trial_id: trial_id.clone(),
                team_id: team.clone(),
                score: mean_score + spec.noise_sd * noise,
            });
            let samples = (0..=spec.ted_samples)
                .map(|s| {
                    let t = s as f64 / spec.ted_samples as f64;
                    let values = spec
                        .ted_trend
                        .iter()
                        .map(|(n, slope)| {
                            let noise: f64 = rng.sample(StandardNormal);
                            (n.clone(), slope * t + spec.noise_sd * noise)
                        })
                        .collect();
                    TedSample { t, values }
                })
                .collect();
            records.ted.push(TedSeries {
                trial_id,
                samples,
                schema: directions.clone(),
            });
        }
        records.beard.push(BeardProfile::new(team, vars)?);
    }
    Ok(records)
}

/// Default preprocessing keeps every synthetic term.
pub fn terms_survive_preprocessing(terms: &[String]) -> bool {
    let normalizer = PreprocessConfig::default().normalizer();
    terms.iter().all(|t| normalizer.tokens(t) == [t.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{deduplicate_trials, load_sessions, preprocess_sessions};
    use crate::stats::{beard_score_regression, read_beard_csv, read_scores_csv, read_ted_csv};

    #[test]
    fn term_names_are_stable_and_kept() {
        assert_eq!(term_name(0), "zaaa");
        assert_eq!(term_name(27), "zabb");
        let terms: Vec<String> = (0..2000).map(term_name).collect();
        assert!(terms_survive_preprocessing(&terms));
    }

    #[test]
    fn disjoint_documents_stay_in_one_block_when_theta_is_one_hot() {
        let spec = SynthCorpusSpec {
            alpha: 1e-3,
            n_docs: 40,
            seed: 3,
            ..Default::default()
        };
        let c = generate_lda_corpus(&spec).unwrap();
        for (d, t) in c.trials.iter().enumerate() {
            let one_hot = c.true_theta[d].contains(&1.0);
            let blocks: std::collections::BTreeSet<usize> = t
                .tokens()
                .map(|w| c.terms.iter().position(|x| x == w).unwrap() % 3)
                .collect();
            let single_topic = c.true_assignments[d]
                .iter()
                .all(|&z| z == c.true_assignments[d][0]);
            assert_eq!(blocks.len() == 1, single_topic);
            if one_hot {
                assert!(single_topic);
            }
            assert_eq!(t.total_tokens(), 100);
        }
    }

    #[test]
    fn duplicates_are_recovered_by_dedup() {
        let spec = SynthCorpusSpec {
            n_docs: 220,
            duplicate_docs: 2,
            doc_length: DocLength::Fixed(30),
            seed: 1,
            ..Default::default()
        };
        let c = generate_lda_corpus(&spec).unwrap();
        assert_eq!(c.trials.len(), 222);
        let kept = deduplicate_trials(c.trials.clone());
        assert_eq!(kept.len(), 220);
        assert!(kept
            .iter()
            .all(|t| c.duplicates.iter().all(|(dup, _)| &t.trial_id != dup)));
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = SynthCorpusSpec {
            topic_support: TopicSupport::Dirichlet { beta: 0.1 },
            doc_length: DocLength::Range { min: 5, max: 40 },
            n_docs: 20,
            alpha: 0.5,
            seed: 9,
            ..Default::default()
        };
        assert_eq!(
            generate_lda_corpus(&spec).unwrap(),
            generate_lda_corpus(&spec).unwrap()
        );
        let other = SynthCorpusSpec {
            seed: 10,
            ..spec.clone()
        };
        assert_ne!(
            generate_lda_corpus(&spec).unwrap(),
            generate_lda_corpus(&other).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        let bad = |s: SynthCorpusSpec| assert!(generate_lda_corpus(&s).is_err());
        bad(SynthCorpusSpec {
            vocab_size: 2,
            ..Default::default()
        });
        bad(SynthCorpusSpec {
            alpha: 0.0,
            ..Default::default()
        });
        bad(SynthCorpusSpec {
            doc_length: DocLength::Range { min: 5, max: 4 },
            ..Default::default()
        });
        bad(SynthCorpusSpec {
            topic_score_effects: vec![1.0],
            ..Default::default()
        });
        let mut t = SynthTeamSpec::default();
        t.beard_effects.insert("charisma".into(), 1.0);
        assert!(generate_team_records(&t).is_err());
    }

    #[test]
    fn transcripts_round_trip_through_preprocessing() {
        let spec = SynthCorpusSpec {
            n_docs: 9,
            doc_length: DocLength::Fixed(25),
            topic_score_effects: vec![1.0, 2.0, 3.0],
            seed: 4,
            ..Default::default()
        };
        let c = generate_lda_corpus(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.write_transcripts(dir.path()).unwrap();
        let cfg = PreprocessConfig::default();
        let prepared =
            preprocess_sessions(&load_sessions(dir.path(), &cfg).unwrap(), &cfg).unwrap();
        assert_eq!(prepared.trials.len(), 9);
        for (a, b) in prepared.trials.iter().zip(&c.trials) {
            assert_eq!(a.trial_id, b.trial_id);
            assert_eq!(a.team_id, b.team_id);
            assert!(a.tokens().eq(b.tokens()));
            assert_eq!(a.score, b.score);
        }
    }

    #[test]
    fn noiseless_scores_recover_effects() {
        let spec = SynthTeamSpec {
            n_teams: 30,
            noise_sd: 0.0,
            seed: 5,
            ..Default::default()
        };
        let r = generate_team_records(&spec).unwrap();
        let scored: Vec<(String, f64)> = r
            .scores
            .iter()
            .map(|s| (s.team_id.clone(), s.score))
            .collect();
        let fit = beard_score_regression(&r.beard, &scored).unwrap();
        for name in default_beard_variables() {
            let planted = spec.beard_effects.get(&name).copied().unwrap_or(0.0);
            assert!(
                (fit.coefficient(&name).unwrap() - planted).abs() < 1e-8,
                "{name}"
            );
        }
        assert!((fit.coefficient(INTERCEPT).unwrap() - 500.0).abs() < 1e-8);
    }

    #[test]
    fn team_files_round_trip() {
        let spec = SynthTeamSpec {
            n_teams: 4,
            seed: 2,
            ..Default::default()
        };
        let r = generate_team_records(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write_to(dir.path()).unwrap();
        let beard = read_beard_csv(fs::File::open(dir.path().join("beard.csv")).unwrap()).unwrap();
        assert_eq!(beard, r.beard);
        let ted = read_ted_csv(
            fs::File::open(dir.path().join("ted.csv")).unwrap(),
            &r.ted_schema,
        )
        .unwrap();
        assert_eq!(ted, r.ted);
        let scores =
            read_scores_csv(fs::File::open(dir.path().join("scores.csv")).unwrap()).unwrap();
        assert_eq!(scores, r.scores);
    }
}
