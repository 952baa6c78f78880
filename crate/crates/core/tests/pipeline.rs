use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use teamcomm::clustering::ClusterModel;
use teamcomm::corpus::{Role, TrialIndex, TrialTranscript, Utterance};
use teamcomm::earlypred::{truncate_transcript, EarlyPredictor};
use teamcomm::intervention::{
    derive_performance_profile, run_intervention_pipeline, InterventionConfig, InterventionLog,
    PolicyModels,
};
use teamcomm::stats::{
    default_beard_variables, BeardProfile, Direction, ModelKind, RegressionResult, TedSample,
    TedSeries, TermEstimate,
};
use teamcomm::synth::{generate_lda_corpus, DocLength, SynthCorpusSpec};
use teamcomm::topics::{LdaConfig, LdaModel};

fn trial(word: &str, lengths: &[usize]) -> TrialTranscript {
    TrialTranscript {
        trial_id: "t".into(),
        team_id: "team".into(),
        trial_index: TrialIndex::Two,
        utterances: lengths
            .iter()
            .enumerate()
            .map(|(i, &n)| Utterance {
                speaker_role: Role::Transporter,
                text: vec![word; n].join(" "),
                ordinal: i,
                token_count: n,
                tokens: vec![word.to_string(); n],
            })
            .collect(),
        score: None,
    }
}

struct Fixture {
    lda: LdaModel,
    clusters: ClusterModel,
    cluster_reg: RegressionResult,
    gate: RegressionResult,
}

/// "bad" talk lands in cluster 1, which scores 50 points lower.
fn fixture(gate_intercept: f64) -> Fixture {
    let cluster_reg = RegressionResult {
        model_kind: ModelKind::Ols,
        n: 20,
        terms: vec![
            TermEstimate {
                name: "intercept".into(),
                coef: 100.0,
                se: 1.0,
                p: 0.0,
            },
            TermEstimate {
                name: "cluster_1".into(),
                coef: -50.0,
                se: 5.0,
                p: 0.001,
            },
        ],
        f_p_value: Some(0.001),
        rss: Some(1.0),
        converged: true,
        separation: false,
        warnings: vec![],
    };
    let gate = RegressionResult {
        model_kind: ModelKind::Logistic,
        terms: vec![TermEstimate {
            name: "intercept".into(),
            coef: gate_intercept,
            se: 1.0,
            p: 1.0,
        }],
        f_p_value: None,
        rss: None,
        ..cluster_reg.clone()
    };
    Fixture {
        lda: LdaModel {
            k: 2,
            phi: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            theta: vec![],
            config: LdaConfig::default(),
            vocab_hash: String::new(),
            terms: vec!["bad".into(), "good".into()],
            doc_ids: vec![],
        },
        clusters: ClusterModel {
            k: 2,
            centroids: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            assignments: BTreeMap::new(),
            wss: 0.0,
        },
        cluster_reg,
        gate,
    }
}

fn beard() -> BeardProfile {
    BeardProfile::new(
        "team",
        default_beard_variables()
            .into_iter()
            .map(|n| (n, 0.0))
            .collect(),
    )
    .unwrap()
}

fn flat_ted() -> TedSeries {
    TedSeries {
        trial_id: "t".into(),
        samples: [0.0, 0.1, 0.3, 0.5, 0.7]
            .iter()
            .map(|&t| TedSample {
                t,
                values: BTreeMap::from([("effort".to_string(), 1.0)]),
            })
            .collect(),
        schema: BTreeMap::from([("effort".to_string(), Direction::HigherIsBetter)]),
    }
}

fn run(
    fx: &Fixture,
    t: &TrialTranscript,
    beard: Option<&BeardProfile>,
    ted: Option<&TedSeries>,
) -> InterventionLog {
    let profile = derive_performance_profile(&fx.cluster_reg, 0.05).unwrap();
    let predictor = EarlyPredictor::new(&fx.lda, &fx.clusters, 40).unwrap();
    let selected = BTreeSet::from(["effort".to_string()]);
    let models = PolicyModels {
        predictor: &predictor,
        profile: &profile,
        gate_model: Some(&fx.gate),
        ted_variables: &selected,
    };
    run_intervention_pipeline(&models, t, beard, ted, &InterventionConfig::default(), 3).unwrap()
}

#[test]
fn one_decision_per_checkpoint_and_jsonl_line() {
    let fx = fixture(0.0);
    let log = run(
        &fx,
        &trial("bad", &[3; 10]),
        Some(&beard()),
        Some(&flat_ted()),
    );
    assert_eq!(log.decisions.len(), 4);
    let jsonl = log.to_jsonl().unwrap();
    assert_eq!(jsonl.lines().count(), 4);
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["trial_id"], "t");
        assert_eq!(v["predicted_cluster"], 1);
    }
}

#[test]
fn closed_gate_blocks_the_first_intervention_only() {
    // intercept -2 gives probability 0.12, below the default threshold
    let fx = fixture(-2.0);
    let log = run(
        &fx,
        &trial("bad", &[3; 10]),
        Some(&beard()),
        Some(&flat_ted()),
    );
    let intervene: Vec<bool> = log.decisions.iter().map(|d| d.intervene).collect();
    assert_eq!(intervene, [false, true, true, true]);
    assert_eq!(log.decisions[0].beard_gate, Some(false));
    assert_eq!(log.total_interventions, 3);
}

#[test]
fn good_trials_never_trigger() {
    let fx = fixture(5.0);
    let log = run(
        &fx,
        &trial("good", &[3; 10]),
        Some(&beard()),
        Some(&flat_ted()),
    );
    assert!(log
        .decisions
        .iter()
        .all(|d| !d.low_performing && !d.intervene && d.beard_gate.is_none()));
}

#[test]
fn missing_inputs_skip_instead_of_failing() {
    let fx = fixture(0.0);
    let log = run(&fx, &trial("bad", &[3; 10]), None, None);
    assert_eq!(log.decisions.len(), 4);
    assert!(log
        .decisions
        .iter()
        .all(|d| d.skipped && !d.intervene && d.reason.starts_with("skipped:")));
    assert_eq!(log.total_interventions, 0);
}

#[test]
fn unknown_words_skip_every_checkpoint() {
    let fx = fixture(0.0);
    let log = run(
        &fx,
        &trial("elsewhere", &[2; 5]),
        Some(&beard()),
        Some(&flat_ted()),
    );
    assert!(log
        .decisions
        .iter()
        .all(|d| d.skipped && d.predicted_cluster.is_none()));
}

#[test]
fn synthetic_documents_have_the_requested_length() {
    let spec = SynthCorpusSpec {
        n_docs: 12,
        doc_length: DocLength::Range { min: 20, max: 40 },
        seed: 5,
        ..Default::default()
    };
    let corpus = generate_lda_corpus(&spec).unwrap();
    assert_eq!(corpus.trials.len(), 12);
    for (t, z) in corpus.trials.iter().zip(&corpus.true_assignments) {
        let n = t.total_tokens();
        assert!((20..=40).contains(&n), "{n}");
        assert_eq!(z.len(), n);
    }
    for row in corpus.true_phi.iter().chain(&corpus.true_theta) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn truncation_is_a_monotone_prefix(
        lengths in prop::collection::vec(1usize..6, 1..15),
        mut fractions in prop::collection::vec(0.01f64..=1.0, 2..6),
    ) {
        fractions.sort_by(f64::total_cmp);
        let t = trial("w", &lengths);
        let mut last = 0;
        for f in fractions {
            let cut = truncate_transcript(&t, f).unwrap();
            let n = cut.total_tokens();
            prop_assert!(n >= last);
            prop_assert!(n as f64 >= f * t.total_tokens() as f64 - 1e-9);
            prop_assert_eq!(&cut.utterances[..], &t.utterances[..cut.utterances.len()]);
            last = n;
        }
        prop_assert_eq!(truncate_transcript(&t, 1.0).unwrap(), t.clone());
        prop_assert!(truncate_transcript(&t, 0.0).is_err());
    }
}
