//! `teamcomm`: run the team-communication analysis pipeline stage by stage or
//! end to end. Stages exchange files, so any of them can be rerun or inspected.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Usage;

#[derive(Parser, Debug)]
#[command(
    name = "teamcomm",
    version,
    about = "Topic, cluster and regression analysis of team communication"
)]
struct Cli {
    /// Pipeline configuration (JSON with a root `seed` key)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, split, normalize and deduplicate transcripts; write dtm.json and trials.json
    Preprocess {
        /// Directory of session transcripts (*.txt)
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    #[command(subcommand)]
    Topics(TopicsCommand),
    #[command(subcommand)]
    Cluster(ClusterCommand),
    /// Share of first and second trials in each cluster
    Compose {
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
    },
    #[command(subcommand)]
    Regress(RegressCommand),
    #[command(subcommand)]
    Gate(GateCommand),
    #[command(subcommand)]
    Early(EarlyCommand),
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    #[command(subcommand)]
    Synth(SynthCommand),
}

/// Topic modelling
#[derive(Subcommand, Debug)]
enum TopicsCommand {
    /// Fit one LDA model
    Fit {
        #[arg(long)]
        dtm: Option<PathBuf>,
        #[arg(long)]
        k: usize,
    },
    /// Sweep topic counts, pick the most coherent and refit it
    SelectK {
        #[arg(long)]
        dtm: Option<PathBuf>,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
    },
}

/// Clustering of topic proportions
#[derive(Subcommand, Debug)]
enum ClusterCommand {
    /// k-means on the model's theta; k defaults to the gap report's choice
    Fit {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Gap statistic over k = 1..k_max
    Gap {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        b_refs: Option<usize>,
    },
}

/// Regression diagnostics
#[derive(Subcommand, Debug)]
enum RegressCommand {
    /// Score on team BEARD profile
    Beard {
        #[arg(long)]
        beard: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Score on end-of-trial TED measures
    Ted {
        #[arg(long)]
        ted: Option<PathBuf>,
        #[arg(long)]
        ted_schema: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Score on cluster dummies; also writes the performance profile
    ClusterScore {
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
        #[arg(long)]
        scores: Option<PathBuf>,
    },
}

/// Intervention gate
#[derive(Subcommand, Debug)]
enum GateCommand {
    /// Logistic model of low-cluster membership on BEARD
    Fit {
        #[arg(long)]
        beard: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
    },
}

/// Early prediction
#[derive(Subcommand, Debug)]
enum EarlyCommand {
    /// Prefix accuracy against full-transcript predictions
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        trials: Option<PathBuf>,
        /// Comma-separated, strictly increasing, within (0, 1]
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
    },
}

/// End-to-end run
#[derive(Subcommand, Debug)]
enum PipelineCommand {
    /// Every stage plus the intervention log
    Run {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// Data with known ground truth
#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// Transcripts sampled from LDA, plus truth.json
    Corpus {
        /// Full generator spec (JSON); flags override its fields
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n_docs: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long)]
        doc_length: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        duplicates: Option<usize>,
        /// Attach planted topic-driven scores to the trials
        #[arg(long)]
        scores: bool,
    },
    /// BEARD profiles, TED series, scores and low-cluster labels
    Teams {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n_teams: Option<usize>,
        #[arg(long)]
        noise_sd: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let ctx = commands::Context::new(cli.config.as_deref(), cli.seed, cli.out)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Usage("--jobs must be at least 1".into()).into());
        }
        pool = pool.num_threads(jobs);
    }
    pool.build()?.install(|| dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &commands::Context, command: Command) -> anyhow::Result<()> {
    use commands as c;
    match command {
        Command::Preprocess { corpus } => c::preprocess(ctx, corpus),
        Command::Topics(TopicsCommand::Fit { dtm, k }) => c::topics_fit(ctx, dtm, k),
        Command::Topics(TopicsCommand::SelectK {
            dtm,
            k_min,
            k_max,
            runs,
        }) => c::topics_select_k(ctx, dtm, k_min, k_max, runs),
        Command::Cluster(ClusterCommand::Fit { model, k }) => c::cluster_fit(ctx, model, k),
        Command::Cluster(ClusterCommand::Gap {
            model,
            k_max,
            b_refs,
        }) => c::cluster_gap(ctx, model, k_max, b_refs),
        Command::Compose { clusters, trials } => c::compose(ctx, clusters, trials),
        Command::Regress(RegressCommand::Beard {
            beard,
            trials,
            scores,
        }) => c::regress_beard(ctx, beard, trials, scores),
        Command::Regress(RegressCommand::Ted {
            ted,
            ted_schema,
            trials,
            scores,
        }) => c::regress_ted(ctx, ted, ted_schema, trials, scores),
        Command::Regress(RegressCommand::ClusterScore {
            clusters,
            trials,
            scores,
        }) => c::regress_cluster_score(ctx, clusters, trials, scores),
        Command::Gate(GateCommand::Fit {
            beard,
            clusters,
            profile,
            trials,
        }) => c::gate_fit(ctx, beard, clusters, profile, trials),
        Command::Early(EarlyCommand::Eval {
            model,
            clusters,
            trials,
            fractions,
        }) => c::early_eval(ctx, model, clusters, trials, fractions),
        Command::Pipeline(PipelineCommand::Run { corpus }) => c::pipeline_run(ctx, corpus),
        Command::Synth(SynthCommand::Corpus {
            spec,
            n_docs,
            k,
            vocab_size,
            doc_length,
            alpha,
            duplicates,
            scores,
        }) => c::synth_corpus(
            ctx,
            spec,
            c::CorpusOverrides {
                n_docs,
                k,
                vocab_size,
                doc_length,
                alpha,
                duplicates,
                scores,
            },
        ),
        Command::Synth(SynthCommand::Teams {
            spec,
            n_teams,
            noise_sd,
        }) => c::synth_teams(ctx, spec, n_teams, noise_sd),
    }
}
