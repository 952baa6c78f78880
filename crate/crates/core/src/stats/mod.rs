//! Regression diagnostics: OLS with t/F inference, logistic regression by
//! IRLS, cluster dummy coding, and the BEARD/TED data they run on.

pub mod dist;
pub mod linalg;
mod regression;
mod team;

pub use regression::{
    cluster_score_regression, cluster_term, logistic_fit, ols_fit, parse_cluster_term, Baseline,
    Design, ModelKind, RegressionResult, TermEstimate, INTERCEPT,
};
pub use team::{
    beard_score_regression, default_beard_variables, filter_ted_variables, fit_gate_model,
    read_beard_csv, read_scores_csv, read_ted_csv, ted_score_regression, write_beard_csv,
    write_scores_csv, write_ted_csv, BeardProfile, Direction, ScoreRecord, TedKind, TedSample,
    TedSchema, TedSeries, TedVariable, BEARD_VARIABLE_COUNT, DEFAULT_EXTRA_BEARD_VARIABLES,
    REQUIRED_BEARD_VARIABLES,
};
