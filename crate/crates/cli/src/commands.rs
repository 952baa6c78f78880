//! Subcommand implementations. Each stage reads its inputs from explicit
//! flags, then from the configuration, then from the conventional artifact
//! name inside the output directory.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use teamcomm::clustering::{gap_statistic, kmeans_fit, trial_composition, ClusterModel, GapReport};
use teamcomm::corpus::{
    load_sessions, preprocess_sessions, DocTermMatrix, PreparedCorpus, TrialTranscript,
};
use teamcomm::earlypred::{early_accuracy_curve, AccuracyCurve, EarlyPredictor};
use teamcomm::intervention::{
    derive_performance_profile, run_intervention_pipeline, PerformanceProfile, PolicyModels,
};
use teamcomm::rng::derive_seed;
use teamcomm::stats::{
    beard_score_regression, cluster_score_regression, filter_ted_variables, fit_gate_model,
    read_beard_csv, read_scores_csv, read_ted_csv, ted_score_regression, BeardProfile,
    RegressionResult, ScoreRecord, TedSchema, TedSeries,
};
use teamcomm::synth::{
    generate_lda_corpus, generate_team_records, DocLength, SynthCorpusSpec, SynthTeamSpec,
};
use teamcomm::topics::{
    coherence_report, fit_lda, select_topic_count, CoOccurrence, LdaModel, SweepConfig,
    TopicCountReport,
};

use crate::config::PipelineConfig;

/// Stream labels for stages that draw their own randomness.
const GAP_STREAM: u64 = 1;
const KMEANS_STREAM: u64 = 2;
const EARLY_STREAM: u64 = 3;

/// A usage problem (exit code 1) as opposed to a data problem (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub struct Context {
    pub cfg: PipelineConfig,
    out: Option<PathBuf>,
}

impl Context {
    pub fn new(config: Option<&Path>, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let mut cfg = match config {
            Some(p) => PipelineConfig::load(p).map_err(|e| usage(format!("{e:#}")))?,
            None => PipelineConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let out = out.or_else(|| cfg.output_dir.clone());
        Ok(Self { cfg, out })
    }

    fn seed(&self, stream: u64) -> u64 {
        derive_seed(self.cfg.seed, &[stream])
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = self
            .out
            .as_deref()
            .ok_or_else(|| usage("no output directory (--out or output_dir)"))?;
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    /// Flag, else configured path, else `<out>/<artifact>` when it exists.
    fn input(
        &self,
        flag: Option<PathBuf>,
        configured: Option<&PathBuf>,
        artifact: &str,
        what: &str,
    ) -> Result<PathBuf> {
        if let Some(p) = flag.or_else(|| configured.cloned()) {
            return Ok(p);
        }
        if let Some(p) = self
            .out
            .as_ref()
            .map(|d| d.join(artifact))
            .filter(|p| p.exists())
        {
            return Ok(p);
        }
        Err(usage(format!("missing {what}: pass it as a flag, set it in the config, or run the stage producing {artifact}")))
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out_dir()?.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_to_string(path)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn load_lda(path: &Path) -> Result<LdaModel> {
    LdaModel::from_json(&read_to_string(path)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn load_clusters(path: &Path) -> Result<ClusterModel> {
    ClusterModel::from_json(&read_to_string(path)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn load_dtm(path: &Path) -> Result<DocTermMatrix> {
    DocTermMatrix::from_json(&read_to_string(path)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn load_ted(series: &Path, schema: &Path) -> Result<(TedSchema, Vec<TedSeries>)> {
    let schema: TedSchema = read_json(schema)?;
    let series = read_ted_csv(open(series)?, &schema)
        .with_context(|| format!("reading {}", series.display()))?;
    Ok((schema, series))
}

/// Scores from a score file when one is given, else from the transcripts.
fn trial_scores(trials: &[TrialTranscript], scores: Option<&Path>) -> Result<Vec<ScoreRecord>> {
    let records = match scores {
        Some(p) => read_scores_csv(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        None => trials
            .iter()
            .filter_map(|t| {
                t.score.map(|score| ScoreRecord {
                    trial_id: t.trial_id.clone(),
                    team_id: t.team_id.clone(),
                    score,
                })
            })
            .collect(),
    };
    if records.is_empty() {
        anyhow::bail!("no trial scores: transcripts carry none and no score file was given");
    }
    // Only trials that survived preprocessing take part.
    let kept: BTreeSet<&str> = trials.iter().map(|t| t.trial_id.as_str()).collect();
    Ok(records
        .into_iter()
        .filter(|r| kept.contains(r.trial_id.as_str()))
        .collect())
}

fn top_terms_csv(model: &LdaModel, m: usize) -> Result<String> {
    let mut out = String::from("topic,rank,term,phi\n");
    for (t, ids) in model
        .top_term_ids(m.min(model.terms.len()))?
        .iter()
        .enumerate()
    {
        for (r, &i) in ids.iter().enumerate() {
            out.push_str(&format!(
                "{t},{},{},{}\n",
                r + 1,
                model.terms[i],
                model.phi[t][i]
            ));
        }
    }
    Ok(out)
}

fn write_topic_model(ctx: &Context, model: &LdaModel, dtm: &DocTermMatrix) -> Result<()> {
    let top_m = ctx.cfg.sweep.top_m;
    ctx.write("lda_model.json", &(model.to_json()? + "\n"))?;
    ctx.write("top_terms.csv", &top_terms_csv(model, top_m)?)?;
    ctx.write_json(
        "coherence.json",
        &coherence_report(model, &CoOccurrence::new(dtm), top_m)?,
    )
}

// --- stages -----------------------------------------------------------------

fn run_preprocess(ctx: &Context, corpus: Option<PathBuf>) -> Result<PreparedCorpus> {
    let dir = corpus
        .or_else(|| ctx.cfg.corpus_dir.clone())
        .ok_or_else(|| usage("missing corpus directory (--corpus or corpus_dir)"))?;
    let sessions = load_sessions(&dir, &ctx.cfg.preprocess)
        .with_context(|| format!("loading {}", dir.display()))?;
    let prepared = preprocess_sessions(&sessions, &ctx.cfg.preprocess)?;
    ctx.write("dtm.json", &(prepared.dtm.to_json()? + "\n"))?;
    ctx.write_json("trials.json", &prepared.trials)?;
    eprintln!(
        "preprocess: {} sessions, {} trials, {} terms",
        sessions.len(),
        prepared.trials.len(),
        prepared.dtm.n_terms()
    );
    Ok(prepared)
}

pub fn preprocess(ctx: &Context, corpus: Option<PathBuf>) -> Result<()> {
    run_preprocess(ctx, corpus).map(|_| ())
}

pub fn topics_fit(ctx: &Context, dtm: Option<PathBuf>, k: usize) -> Result<()> {
    let dtm = load_dtm(&ctx.input(dtm, None, "dtm.json", "document-term matrix (--dtm)")?)?;
    let model = fit_lda(&dtm, k, &ctx.cfg.lda_config())?;
    write_topic_model(ctx, &model, &dtm)
}

fn run_select_k(
    ctx: &Context,
    dtm: &DocTermMatrix,
    sweep: &SweepConfig,
) -> Result<(TopicCountReport, LdaModel)> {
    let lda = ctx.cfg.lda_config();
    let report = select_topic_count(dtm, sweep, &lda)?;
    let model = report.refit(dtm, &lda, sweep.selection)?;
    ctx.write_json("topic_count_report.json", &report)?;
    write_topic_model(ctx, &model, dtm)?;
    eprintln!("topics: selected k = {}", report.selected_k);
    Ok((report, model))
}

pub fn topics_select_k(
    ctx: &Context,
    dtm: Option<PathBuf>,
    k_min: Option<usize>,
    k_max: Option<usize>,
    runs: Option<usize>,
) -> Result<()> {
    let dtm = load_dtm(&ctx.input(dtm, None, "dtm.json", "document-term matrix (--dtm)")?)?;
    let mut sweep = ctx.cfg.sweep.clone();
    sweep.k_min = k_min.unwrap_or(sweep.k_min);
    sweep.k_max = k_max.unwrap_or(sweep.k_max);
    sweep.runs_per_k = runs.unwrap_or(sweep.runs_per_k);
    run_select_k(ctx, &dtm, &sweep).map(|_| ())
}

fn run_gap(ctx: &Context, model: &LdaModel, k_max: usize, b_refs: usize) -> Result<GapReport> {
    let c = &ctx.cfg.clustering;
    let report = gap_statistic(
        &model.theta,
        k_max,
        b_refs,
        c.restarts,
        ctx.seed(GAP_STREAM),
    )?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    ctx.write_json("gap_report.json", &report)?;
    eprintln!("cluster gap: selected k = {}", report.selected_k);
    Ok(report)
}

fn run_cluster_fit(ctx: &Context, model: &LdaModel, k: usize) -> Result<ClusterModel> {
    let c = &ctx.cfg.clustering;
    let fit = kmeans_fit(
        &model.theta,
        k,
        c.restarts,
        c.max_iter,
        ctx.seed(KMEANS_STREAM),
    )?;
    let clusters = ClusterModel::from_fit(&model.doc_ids, fit)?;
    ctx.write("cluster_model.json", &(clusters.to_json()? + "\n"))?;
    Ok(clusters)
}

pub fn cluster_gap(
    ctx: &Context,
    model: Option<PathBuf>,
    k_max: Option<usize>,
    b_refs: Option<usize>,
) -> Result<()> {
    let model = load_lda(&ctx.input(model, None, "lda_model.json", "topic model (--model)")?)?;
    let c = &ctx.cfg.clustering;
    run_gap(
        ctx,
        &model,
        k_max.unwrap_or(c.k_max),
        b_refs.unwrap_or(c.b_refs),
    )
    .map(|_| ())
}

pub fn cluster_fit(ctx: &Context, model: Option<PathBuf>, k: Option<usize>) -> Result<()> {
    let model = load_lda(&ctx.input(model, None, "lda_model.json", "topic model (--model)")?)?;
    let k = match k {
        Some(k) => k,
        None => {
            let gap = ctx.input(None, None, "gap_report.json", "cluster count (--k)")?;
            read_json::<GapReport>(&gap)?.selected_k
        }
    };
    run_cluster_fit(ctx, &model, k).map(|_| ())
}

fn load_trials(ctx: &Context, trials: Option<PathBuf>) -> Result<Vec<TrialTranscript>> {
    read_json(&ctx.input(trials, None, "trials.json", "trials (--trials)")?)
}

pub fn compose(ctx: &Context, clusters: Option<PathBuf>, trials: Option<PathBuf>) -> Result<()> {
    let clusters = load_clusters(&ctx.input(
        clusters,
        None,
        "cluster_model.json",
        "cluster model (--clusters)",
    )?)?;
    let trials = load_trials(ctx, trials)?;
    ctx.write(
        "composition.csv",
        &trial_composition(&clusters, &trials)?.to_csv(),
    )
}

fn write_regression(ctx: &Context, stem: &str, reg: &RegressionResult) -> Result<()> {
    ctx.write(&format!("{stem}.json"), &(reg.to_json()? + "\n"))?;
    ctx.write(&format!("{stem}.csv"), &reg.to_csv())?;
    for w in &reg.warnings {
        eprintln!("warning ({stem}): {w}");
    }
    Ok(())
}

fn run_regress_beard(
    ctx: &Context,
    profiles: &[BeardProfile],
    scores: &[ScoreRecord],
) -> Result<RegressionResult> {
    let scored: Vec<(String, f64)> = scores
        .iter()
        .map(|s| (s.team_id.clone(), s.score))
        .collect();
    let reg = beard_score_regression(profiles, &scored)?;
    write_regression(ctx, "regress_beard", &reg)?;
    Ok(reg)
}

pub fn regress_beard(
    ctx: &Context,
    beard: Option<PathBuf>,
    trials: Option<PathBuf>,
    scores: Option<PathBuf>,
) -> Result<()> {
    let beard = ctx.input(
        beard,
        ctx.cfg.beard.as_ref(),
        "beard.csv",
        "BEARD profiles (--beard)",
    )?;
    let profiles =
        read_beard_csv(open(&beard)?).with_context(|| format!("reading {}", beard.display()))?;
    let trials = load_trials(ctx, trials)?;
    let scores = trial_scores(
        &trials,
        scores.or_else(|| ctx.cfg.scores.clone()).as_deref(),
    )?;
    run_regress_beard(ctx, &profiles, &scores).map(|_| ())
}

fn ted_selection(ctx: &Context, schema: &TedSchema) -> Result<BTreeSet<String>> {
    Ok(filter_ted_variables(schema, &ctx.cfg.regression.ted_kinds)?)
}

fn run_regress_ted(
    ctx: &Context,
    series: &[TedSeries],
    selected: &BTreeSet<String>,
    scores: &[ScoreRecord],
) -> Result<RegressionResult> {
    let by_trial: HashMap<String, f64> = scores
        .iter()
        .map(|s| (s.trial_id.clone(), s.score))
        .collect();
    let reg = ted_score_regression(series, selected, &by_trial)?;
    write_regression(ctx, "regress_ted", &reg)?;
    Ok(reg)
}

pub fn regress_ted(
    ctx: &Context,
    ted: Option<PathBuf>,
    ted_schema: Option<PathBuf>,
    trials: Option<PathBuf>,
    scores: Option<PathBuf>,
) -> Result<()> {
    let ted = ctx.input(ted, ctx.cfg.ted.as_ref(), "ted.csv", "TED series (--ted)")?;
    let schema = ctx.input(
        ted_schema,
        ctx.cfg.ted_schema.as_ref(),
        "ted_schema.json",
        "TED schema (--ted-schema)",
    )?;
    let (schema, series) = load_ted(&ted, &schema)?;
    let trials = load_trials(ctx, trials)?;
    let scores = trial_scores(
        &trials,
        scores.or_else(|| ctx.cfg.scores.clone()).as_deref(),
    )?;
    run_regress_ted(ctx, &series, &ted_selection(ctx, &schema)?, &scores).map(|_| ())
}

fn run_cluster_score(
    ctx: &Context,
    clusters: &ClusterModel,
    scores: &[ScoreRecord],
) -> Result<PerformanceProfile> {
    let by_trial: HashMap<String, f64> = scores
        .iter()
        .map(|s| (s.trial_id.clone(), s.score))
        .collect();
    let assignments: BTreeMap<String, usize> = clusters
        .assignments
        .iter()
        .filter(|(id, _)| by_trial.contains_key(id.as_str()))
        .map(|(id, &c)| (id.clone(), c))
        .collect();
    if assignments.len() < clusters.assignments.len() {
        eprintln!(
            "warning: {} clustered trials have no score and are left out of the regression",
            clusters.assignments.len() - assignments.len()
        );
    }
    let reg =
        cluster_score_regression(&assignments, &by_trial, ctx.cfg.regression.baseline.into())?;
    write_regression(ctx, "regress_cluster_score", &reg)?;
    let profile = derive_performance_profile(&reg, ctx.cfg.regression.alpha_level)?;
    ctx.write_json("performance_profile.json", &profile)?;
    Ok(profile)
}

pub fn regress_cluster_score(
    ctx: &Context,
    clusters: Option<PathBuf>,
    trials: Option<PathBuf>,
    scores: Option<PathBuf>,
) -> Result<()> {
    let clusters = load_clusters(&ctx.input(
        clusters,
        None,
        "cluster_model.json",
        "cluster model (--clusters)",
    )?)?;
    let trials = load_trials(ctx, trials)?;
    let scores = trial_scores(
        &trials,
        scores.or_else(|| ctx.cfg.scores.clone()).as_deref(),
    )?;
    run_cluster_score(ctx, &clusters, &scores).map(|_| ())
}

fn run_gate_fit(
    ctx: &Context,
    profiles: &[BeardProfile],
    clusters: &ClusterModel,
    profile: &PerformanceProfile,
    trials: &[TrialTranscript],
) -> Result<RegressionResult> {
    let labels: Vec<(String, bool)> = trials
        .iter()
        .filter_map(|t| {
            clusters
                .assignments
                .get(&t.trial_id)
                .map(|c| (t.team_id.clone(), profile.low_clusters.contains(c)))
        })
        .collect();
    let gate = fit_gate_model(profiles, &labels)?;
    write_regression(ctx, "gate_model", &gate)?;
    Ok(gate)
}

pub fn gate_fit(
    ctx: &Context,
    beard: Option<PathBuf>,
    clusters: Option<PathBuf>,
    profile: Option<PathBuf>,
    trials: Option<PathBuf>,
) -> Result<()> {
    let beard = ctx.input(
        beard,
        ctx.cfg.beard.as_ref(),
        "beard.csv",
        "BEARD profiles (--beard)",
    )?;
    let profiles =
        read_beard_csv(open(&beard)?).with_context(|| format!("reading {}", beard.display()))?;
    let clusters = load_clusters(&ctx.input(
        clusters,
        None,
        "cluster_model.json",
        "cluster model (--clusters)",
    )?)?;
    let profile: PerformanceProfile = read_json(&ctx.input(
        profile,
        None,
        "performance_profile.json",
        "performance profile (--profile)",
    )?)?;
    let trials = load_trials(ctx, trials)?;
    run_gate_fit(ctx, &profiles, &clusters, &profile, &trials).map(|_| ())
}

fn run_early(
    ctx: &Context,
    predictor: &EarlyPredictor<'_>,
    trials: &[TrialTranscript],
    fractions: &[f64],
) -> Result<AccuracyCurve> {
    let curve = early_accuracy_curve(predictor, trials, fractions, ctx.seed(EARLY_STREAM))?;
    ctx.write("early_curve.csv", &curve.to_csv())?;
    ctx.write("early_curve.json", &(curve.to_series_json()? + "\n"))?;
    ctx.write_json("early_skipped.json", &curve.skipped)?;
    Ok(curve)
}

pub fn early_eval(
    ctx: &Context,
    model: Option<PathBuf>,
    clusters: Option<PathBuf>,
    trials: Option<PathBuf>,
    fractions: Option<Vec<f64>>,
) -> Result<()> {
    let model = load_lda(&ctx.input(model, None, "lda_model.json", "topic model (--model)")?)?;
    let clusters = load_clusters(&ctx.input(
        clusters,
        None,
        "cluster_model.json",
        "cluster model (--clusters)",
    )?)?;
    let trials = load_trials(ctx, trials)?;
    let fractions = fractions.unwrap_or_else(|| ctx.cfg.early.fractions.clone());
    let predictor = EarlyPredictor::new(&model, &clusters, ctx.cfg.early.fold_in_iters)?;
    run_early(ctx, &predictor, &trials, &fractions).map(|_| ())
}

#[derive(Serialize)]
struct PipelineSummary {
    seed: u64,
    trials: usize,
    terms: usize,
    topics: usize,
    clusters: usize,
    low_clusters: Option<BTreeSet<usize>>,
    interventions: Option<usize>,
    warnings: Vec<String>,
}

pub fn pipeline_run(ctx: &Context, corpus: Option<PathBuf>) -> Result<()> {
    let cfg = &ctx.cfg;
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        eprintln!("warning: {msg}");
        warnings.push(msg);
    };

    let prepared = run_preprocess(ctx, corpus)?;
    let (_, model) = run_select_k(ctx, &prepared.dtm, &cfg.sweep)?;
    let gap = run_gap(ctx, &model, cfg.clustering.k_max, cfg.clustering.b_refs)?;
    let clusters = run_cluster_fit(ctx, &model, gap.selected_k)?;
    ctx.write(
        "composition.csv",
        &trial_composition(&clusters, &prepared.trials)?.to_csv(),
    )?;

    let scores = match trial_scores(&prepared.trials, cfg.scores.as_deref()) {
        Ok(s) => Some(s),
        Err(e) => {
            warn(format!("regressions skipped: {e:#}"));
            None
        }
    };
    let profile = match &scores {
        Some(s) => match run_cluster_score(ctx, &clusters, s) {
            Ok(p) => Some(p),
            Err(e) => {
                warn(format!("cluster-score regression failed: {e:#}"));
                None
            }
        },
        None => None,
    };

    let beard = match &cfg.beard {
        Some(p) => {
            Some(read_beard_csv(open(p)?).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    let mut gate = None;
    if let Some(profiles) = &beard {
        if let Some(s) = &scores {
            if let Err(e) = run_regress_beard(ctx, profiles, s) {
                warn(format!("BEARD regression failed: {e:#}"));
            }
        }
        if let Some(p) = &profile {
            match run_gate_fit(ctx, profiles, &clusters, p, &prepared.trials) {
                Ok(g) => gate = Some(g),
                Err(e) => warn(format!("gate model not fitted: {e:#}")),
            }
        }
    }

    let ted = match (&cfg.ted, &cfg.ted_schema) {
        (Some(series), Some(schema)) => Some(load_ted(series, schema)?),
        (None, None) => None,
        _ => return Err(usage("ted and ted_schema must be configured together")),
    };
    let selected = match &ted {
        Some((schema, _)) => ted_selection(ctx, schema)?,
        None => BTreeSet::new(),
    };
    if let (Some((_, series)), Some(s)) = (&ted, &scores) {
        if let Err(e) = run_regress_ted(ctx, series, &selected, s) {
            warn(format!("TED regression failed: {e:#}"));
        }
    }

    let predictor = EarlyPredictor::new(&model, &clusters, cfg.early.fold_in_iters)?;
    run_early(ctx, &predictor, &prepared.trials, &cfg.early.fractions)?;

    let mut interventions = None;
    match &profile {
        Some(profile) => {
            let models = PolicyModels {
                predictor: &predictor,
                profile,
                gate_model: gate.as_ref(),
                ted_variables: &selected,
            };
            let beard_by_team: HashMap<&str, &BeardProfile> = beard
                .iter()
                .flatten()
                .map(|p| (p.team_id.as_str(), p))
                .collect();
            let ted_by_trial: HashMap<&str, &TedSeries> = ted
                .iter()
                .flat_map(|(_, s)| s.iter())
                .map(|s| (s.trial_id.as_str(), s))
                .collect();
            let seed = ctx.seed(EARLY_STREAM);
            let logs = prepared
                .trials
                .par_iter()
                .map(|t| {
                    run_intervention_pipeline(
                        &models,
                        t,
                        beard_by_team.get(t.team_id.as_str()).copied(),
                        ted_by_trial.get(t.trial_id.as_str()).copied(),
                        &cfg.intervention,
                        seed,
                    )
                })
                .collect::<teamcomm::Result<Vec<_>>>()?;
            let mut jsonl = String::new();
            for log in &logs {
                jsonl.push_str(&log.to_jsonl()?);
            }
            ctx.write("interventions.jsonl", &jsonl)?;
            interventions = Some(logs.iter().map(|l| l.total_interventions).sum());
        }
        None => warn("interventions skipped: no performance profile".into()),
    }

    ctx.write_json(
        "pipeline_summary.json",
        &PipelineSummary {
            seed: cfg.seed,
            trials: prepared.trials.len(),
            terms: prepared.dtm.n_terms(),
            topics: model.k,
            clusters: clusters.k,
            low_clusters: profile.map(|p| p.low_clusters),
            interventions,
            warnings,
        },
    )
}

pub struct CorpusOverrides {
    pub n_docs: Option<usize>,
    pub k: Option<usize>,
    pub vocab_size: Option<usize>,
    pub doc_length: Option<usize>,
    pub alpha: Option<f64>,
    pub duplicates: Option<usize>,
    pub scores: bool,
}

pub fn synth_corpus(ctx: &Context, spec: Option<PathBuf>, o: CorpusOverrides) -> Result<()> {
    let mut spec: SynthCorpusSpec = match spec {
        Some(p) => read_json(&p)?,
        None => SynthCorpusSpec {
            seed: ctx.cfg.seed,
            ..Default::default()
        },
    };
    spec.true_k = o.k.unwrap_or(spec.true_k);
    spec.n_docs = o.n_docs.unwrap_or(spec.n_docs);
    spec.vocab_size = o.vocab_size.unwrap_or(spec.vocab_size);
    spec.doc_length = o.doc_length.map_or(spec.doc_length, DocLength::Fixed);
    spec.alpha = o.alpha.unwrap_or(spec.alpha);
    spec.duplicate_docs = o.duplicates.unwrap_or(spec.duplicate_docs);
    if o.scores && spec.topic_score_effects.is_empty() {
        // Topic t contributes 600 - 150 t; the last topics are the weak ones.
        spec.topic_score_effects = (0..spec.true_k).map(|t| 600.0 - 150.0 * t as f64).collect();
        spec.score_noise_sd = 20.0;
    }
    let corpus = generate_lda_corpus(&spec)?;
    corpus.write_transcripts(&ctx.out_dir()?.join("transcripts"))?;
    ctx.write("truth.json", &(corpus.truth_json()? + "\n"))?;
    ctx.write_json("corpus_spec.json", &spec)
}

pub fn synth_teams(
    ctx: &Context,
    spec: Option<PathBuf>,
    n_teams: Option<usize>,
    noise_sd: Option<f64>,
) -> Result<()> {
    let mut spec: SynthTeamSpec = match spec {
        Some(p) => read_json(&p)?,
        None => SynthTeamSpec {
            seed: ctx.cfg.seed,
            ..Default::default()
        },
    };
    spec.n_teams = n_teams.unwrap_or(spec.n_teams);
    spec.noise_sd = noise_sd.unwrap_or(spec.noise_sd);
    let records = generate_team_records(&spec)?;
    records.write_to(ctx.out_dir()?)?;
    ctx.write_json("team_spec.json", &spec)?;
    ctx.write_json("low_probability.json", &records.low_probability)
}
