//! Pre-trial (BEARD) profiles and in-trial (TED) measure series.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::regression::{logistic_fit, ols_fit, Design, RegressionResult};
use crate::error::{invalid, Error, Result};

pub const BEARD_VARIABLE_COUNT: usize = 8;

pub const REQUIRED_BEARD_VARIABLES: [&str; 6] = [
    "anger",
    "anxiety",
    "social_perceptiveness",
    "spatial_ability",
    "transporting_skill",
    "gaming_skill",
];

/// Names used for the two remaining slots when none are configured.
pub const DEFAULT_EXTRA_BEARD_VARIABLES: [&str; 2] = ["teamwork_potential", "psych_collectivism"];

pub fn default_beard_variables() -> Vec<String> {
    REQUIRED_BEARD_VARIABLES
        .iter()
        .chain(DEFAULT_EXTRA_BEARD_VARIABLES.iter())
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeardProfile {
    pub team_id: String,
    pub variables: IndexMap<String, f64>,
}

impl BeardProfile {
    pub fn new(team_id: impl Into<String>, variables: IndexMap<String, f64>) -> Result<Self> {
        let p = Self {
            team_id: team_id.into(),
            variables,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.len() != BEARD_VARIABLE_COUNT {
            return Err(invalid(format!(
                "team {}: BEARD profile has {} variables, expected {BEARD_VARIABLE_COUNT}",
                self.team_id,
                self.variables.len()
            )));
        }
        if let Some(req) = REQUIRED_BEARD_VARIABLES
            .iter()
            .find(|r| !self.variables.contains_key(**r))
        {
            return Err(invalid(format!(
                "team {}: missing BEARD variable {req}",
                self.team_id
            )));
        }
        Ok(())
    }
}

pub fn read_beard_csv(reader: impl Read) -> Result<Vec<BeardProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("team_id") {
        return Err(invalid("BEARD csv must start with a team_id column"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let mut vars = IndexMap::new();
        for (name, raw) in names.iter().zip(rec.iter().skip(1)) {
            let v = raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("{name}: {raw:?} is not a number"),
            })?;
            vars.insert(name.clone(), v);
        }
        out.push(BeardProfile::new(rec.get(0).unwrap_or_default(), vars)?);
    }
    Ok(out)
}

pub fn write_beard_csv(profiles: &[BeardProfile], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if let Some(first) = profiles.first() {
        let header: Vec<&str> = std::iter::once("team_id")
            .chain(first.variables.keys().map(String::as_str))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
    }
    for p in profiles {
        let row: Vec<String> = std::iter::once(p.team_id.clone())
            .chain(p.variables.values().map(|v| v.to_string()))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::HigherIsBetter => 1.0,
            Direction::LowerIsBetter => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TedKind {
    Aggregate,
    TimeMeasure,
    Communication,
    PerRole,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TedVariable {
    pub direction: Direction,
    #[serde(default)]
    pub kind: Option<TedKind>,
}

/// TED variable declarations keyed by name.
pub type TedSchema = BTreeMap<String, TedVariable>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TedSample {
    /// Fraction of the trial elapsed.
    pub t: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TedSeries {
    pub trial_id: String,
    pub samples: Vec<TedSample>,
    pub schema: BTreeMap<String, Direction>,
}

impl TedSeries {
    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].t <= w[0].t {
                return Err(invalid(format!(
                    "{}: sample times not strictly increasing",
                    self.trial_id
                )));
            }
            if w[1].values.keys().ne(w[0].values.keys()) {
                return Err(invalid(format!(
                    "{}: samples carry different measures",
                    self.trial_id
                )));
            }
        }
        if self.samples.iter().any(|s| !(0.0..=1.0).contains(&s.t)) {
            return Err(invalid(format!(
                "{}: sample time outside [0, 1]",
                self.trial_id
            )));
        }
        Ok(())
    }

    /// Value from the latest sample taken at or before `t`.
    pub fn value_at(&self, name: &str, t: f64) -> Result<f64> {
        let sample = self
            .samples
            .iter()
            .take_while(|s| s.t <= t)
            .last()
            .ok_or_else(|| {
                Error::Missing(format!(
                    "{}: no TED sample at or before t = {t}",
                    self.trial_id
                ))
            })?;
        sample
            .values
            .get(name)
            .copied()
            .ok_or_else(|| Error::Missing(format!("{}: TED measure {name}", self.trial_id)))
    }
}

/// Reads the long TED format `trial_id,t,name,value`. Every measure must be
/// declared in `schema`.
pub fn read_ted_csv(reader: impl Read, schema: &TedSchema) -> Result<Vec<TedSeries>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut grouped: BTreeMap<String, Vec<(f64, String, f64)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or_default().trim().to_string();
        let num = |j: usize| {
            field(j).parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {j} is not a number"),
            })
        };
        let name = field(2);
        if !schema.contains_key(&name) {
            return Err(Error::Parse {
                line,
                message: format!("TED measure {name} not in schema"),
            });
        }
        grouped
            .entry(field(0))
            .or_default()
            .push((num(1)?, name, num(3)?));
    }
    grouped
        .into_iter()
        .map(|(trial_id, mut rows)| {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut samples: Vec<TedSample> = Vec::new();
            for (t, name, v) in rows {
                match samples.last_mut() {
                    Some(s) if s.t == t => {
                        s.values.insert(name, v);
                    }
                    _ => samples.push(TedSample {
                        t,
                        values: BTreeMap::from([(name, v)]),
                    }),
                }
            }
            let series = TedSeries {
                trial_id,
                samples,
                schema: schema
                    .iter()
                    .map(|(k, v)| (k.clone(), v.direction))
                    .collect(),
            };
            series.validate()?;
            Ok(series)
        })
        .collect()
}

pub fn write_ted_csv(series: &[TedSeries], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial_id", "t", "name", "value"])
        .map_err(csv_err)?;
    for s in series {
        for sample in &s.samples {
            for (name, v) in &sample.values {
                w.write_record([
                    s.trial_id.as_str(),
                    &sample.t.to_string(),
                    name,
                    &v.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Names whose declared kind is in `whitelist`.
pub fn filter_ted_variables(
    schema: &TedSchema,
    whitelist: &BTreeSet<TedKind>,
) -> Result<BTreeSet<String>> {
    let untagged: Vec<&str> = schema
        .iter()
        .filter(|(_, v)| v.kind.is_none())
        .map(|(k, _)| k.as_str())
        .collect();
    if !untagged.is_empty() {
        return Err(invalid(format!(
            "TED variables without a kind tag: {}",
            untagged.join(", ")
        )));
    }
    Ok(schema
        .iter()
        .filter(|(_, v)| v.kind.is_some_and(|k| whitelist.contains(&k)))
        .map(|(k, _)| k.clone())
        .collect())
}

fn profile_index(profiles: &[BeardProfile]) -> Result<(Vec<String>, HashMap<&str, &BeardProfile>)> {
    let first = profiles
        .first()
        .ok_or_else(|| invalid("no BEARD profiles"))?;
    let names: Vec<String> = first.variables.keys().cloned().collect();
    let mut map = HashMap::new();
    for p in profiles {
        if p.variables.keys().ne(names.iter()) {
            return Err(invalid(format!(
                "team {}: BEARD variables differ from the first profile",
                p.team_id
            )));
        }
        map.insert(p.team_id.as_str(), p);
    }
    Ok((names, map))
}

fn beard_design(profiles: &[BeardProfile], teams: &[&str]) -> Result<Design> {
    let (names, index) = profile_index(profiles)?;
    let missing: Vec<&str> = teams
        .iter()
        .copied()
        .filter(|t| !index.contains_key(t))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Missing(format!(
            "BEARD profiles for {}",
            missing.join(", ")
        )));
    }
    let rows = teams
        .iter()
        .map(|t| index[t].variables.values().copied().collect())
        .collect();
    Design::with_intercept(names, rows)
}

/// OLS of per-trial score on the trial's team BEARD profile.
pub fn beard_score_regression(
    profiles: &[BeardProfile],
    scored: &[(String, f64)],
) -> Result<RegressionResult> {
    let teams: Vec<&str> = scored.iter().map(|(t, _)| t.as_str()).collect();
    let y: Vec<f64> = scored.iter().map(|&(_, s)| s).collect();
    ols_fit(&beard_design(profiles, &teams)?, &y)
}

/// Logistic model of low-cluster membership on BEARD (the intervention gate).
pub fn fit_gate_model(
    profiles: &[BeardProfile],
    labels: &[(String, bool)],
) -> Result<RegressionResult> {
    let teams: Vec<&str> = labels.iter().map(|(t, _)| t.as_str()).collect();
    let y: Vec<f64> = labels
        .iter()
        .map(|&(_, l)| if l { 1.0 } else { 0.0 })
        .collect();
    logistic_fit(&beard_design(profiles, &teams)?, &y)
}

/// OLS of score on end-of-trial values of the selected TED measures.
pub fn ted_score_regression(
    series: &[TedSeries],
    selected: &BTreeSet<String>,
    scores: &HashMap<String, f64>,
) -> Result<RegressionResult> {
    if selected.is_empty() {
        return Err(invalid("no TED variables selected"));
    }
    let names: Vec<String> = selected.iter().cloned().collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for s in series {
        let Some(&score) = scores.get(&s.trial_id) else {
            continue;
        };
        rows.push(
            names
                .iter()
                .map(|n| s.value_at(n, 1.0))
                .collect::<Result<Vec<f64>>>()?,
        );
        y.push(score);
    }
    ols_fit(&Design::with_intercept(names, rows)?, &y)
}

/// One trial's performance score and the team that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub trial_id: String,
    pub team_id: String,
    pub score: f64,
}

/// Reads `trial_id,team_id,score`.
pub fn read_scores_csv(reader: impl Read) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(["trial_id", "team_id", "score"]) {
        return Err(invalid("score csv header must be trial_id,team_id,score"));
    }
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write_scores_csv(scores: &[ScoreRecord], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial_id", "team_id", "score"])
        .map_err(csv_err)?;
    for s in scores {
        w.write_record([
            s.trial_id.as_str(),
            s.team_id.as_str(),
            &s.score.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Parse {
            line: pos.line() as usize,
            message: e.to_string(),
        },
        None => invalid(e.to_string()),
    }
}
