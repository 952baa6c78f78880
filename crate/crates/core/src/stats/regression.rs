use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::dist::{f_upper_p, normal_two_sided_p, t_two_sided_p};
use super::linalg::Qr;
use crate::error::{invalid, Error, Result};

pub const INTERCEPT: &str = "intercept";

/// Named design matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: r.len(),
            });
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("design matrix has non-finite entries"));
        }
        Ok(Self { names, rows })
    }

    /// Prepends an `intercept` column of ones.
    pub fn with_intercept(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let names = std::iter::once(INTERCEPT.to_string())
            .chain(names)
            .collect();
        let rows = rows
            .into_iter()
            .map(|r| std::iter::once(1.0).chain(r).collect())
            .collect();
        Self::new(names, rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    fn has_intercept(&self) -> bool {
        (0..self.p()).any(|j| self.rows.iter().all(|r| r[j] == 1.0))
    }

    fn check_shape(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: y.len(),
            });
        }
        if self.n() <= self.p() {
            return Err(invalid(format!(
                "need more observations ({}) than parameters ({})",
                self.n(),
                self.p()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ols,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub name: String,
    pub coef: f64,
    pub se: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub model_kind: ModelKind,
    pub n: usize,
    pub terms: Vec<TermEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rss: Option<f64>,
    pub converged: bool,
    #[serde(default)]
    pub separation: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn term(&self, name: &str) -> Option<&TermEstimate> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.coef)
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.p)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coef).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,coef,se,p\n");
        for t in &self.terms {
            out.push_str(&format!("{},{},{},{}\n", t.name, t.coef, t.se, t.p));
        }
        out
    }
}

fn factorize(design: &Design, rows: &[Vec<f64>]) -> Result<Qr> {
    let qr = Qr::new(rows);
    let dependent = qr.dependent_columns();
    if !dependent.is_empty() {
        return Err(Error::RankDeficient(
            dependent
                .into_iter()
                .map(|j| design.names[j].clone())
                .collect(),
        ));
    }
    Ok(qr)
}

fn p_from_ratio(coef: f64, se: f64, tail: impl Fn(f64) -> f64) -> f64 {
    if se > 0.0 && se.is_finite() {
        tail(coef / se)
    } else if coef == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Ordinary least squares via QR with t-test inference. When the design has a
/// column of ones, the overall F-test p-value is reported as well.
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<RegressionResult> {
    design.check_shape(y)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("response has non-finite entries"));
    }
    let (n, p) = (design.n(), design.p());
    let qr = factorize(design, &design.rows)?;
    let beta = qr.solve(y);
    let rss: f64 = design
        .rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let e = yi - r.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>();
            e * e
        })
        .sum();
    let df = (n - p) as f64;
    let sigma2 = rss / df;
    let cov = qr.xtx_inverse();
    let terms = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let se = (sigma2 * cov[j][j]).max(0.0).sqrt();
            TermEstimate {
                name: name.clone(),
                coef: beta[j],
                se,
                p: p_from_ratio(beta[j], se, |t| t_two_sided_p(t, df)),
            }
        })
        .collect();
    let f_p_value = (design.has_intercept() && p > 1).then(|| {
        let mean = y.iter().sum::<f64>() / n as f64;
        let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        let explained = (tss - rss).max(0.0);
        if explained <= 1e-12 * tss.max(f64::MIN_POSITIVE) || tss == 0.0 {
            1.0
        } else if rss <= 0.0 {
            0.0
        } else {
            f_upper_p((explained / (p - 1) as f64) / sigma2, (p - 1) as f64, df)
        }
    });
    Ok(RegressionResult {
        model_kind: ModelKind::Ols,
        n,
        terms,
        f_p_value,
        rss: Some(rss),
        converged: true,
        separation: false,
        warnings: Vec::new(),
    })
}

const LOGISTIC_MAX_ITER: usize = 100;
const LOGISTIC_GRAD_TOL: f64 = 1e-8;
const SEPARATION_COEF: f64 = 30.0;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logistic_gradient(design: &Design, y: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mu: Vec<f64> = design
        .rows
        .iter()
        .map(|r| sigmoid(r.iter().zip(beta).map(|(x, b)| x * b).sum()))
        .collect();
    let mut grad = vec![0.0; design.p()];
    for ((r, &yi), &m) in design.rows.iter().zip(y).zip(&mu) {
        for (g, x) in grad.iter_mut().zip(r) {
            *g += x * (yi - m);
        }
    }
    (mu, grad)
}

fn weighted_rows(design: &Design, mu: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let sw: Vec<f64> = mu
        .iter()
        .map(|m| (m * (1.0 - m)).max(1e-300).sqrt())
        .collect();
    let rows = design
        .rows
        .iter()
        .zip(&sw)
        .map(|(r, s)| r.iter().map(|x| x * s).collect())
        .collect();
    (rows, sw)
}

/// Binary logistic regression by iteratively reweighted least squares with
/// Wald inference.
///
/// Stops when the largest score component drops below 1e-8 or after 100
/// iterations. A coefficient beyond +-30 before convergence, or a fit that
/// reproduces every label (all residuals below 1e-6), is reported as complete
/// separation with `converged = false`.
pub fn logistic_fit(design: &Design, y: &[f64]) -> Result<RegressionResult> {
    design.check_shape(y)?;
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(invalid("logistic response must be 0/1"));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == y.len() {
        return Err(invalid("logistic response has a single class"));
    }
    factorize(design, &design.rows)?;

    let p = design.p();
    let mut beta = vec![0.0; p];
    let mut converged = false;
    let mut separation = false;
    for iter in 0..=LOGISTIC_MAX_ITER {
        let (mu, grad) = logistic_gradient(design, y, &beta);
        if grad.iter().all(|g| g.abs() < LOGISTIC_GRAD_TOL) {
            converged = true;
            break;
        }
        if beta.iter().any(|b| b.abs() > SEPARATION_COEF) {
            separation = true;
            break;
        }
        if iter == LOGISTIC_MAX_ITER {
            break;
        }
        let (rows, sw) = weighted_rows(design, &mu);
        let z: Vec<f64> = y
            .iter()
            .zip(&mu)
            .zip(&sw)
            .map(|((yi, m), s)| (yi - m) / s)
            .collect();
        let step = Qr::new(&rows).solve(&z);
        if step.iter().any(|s| !s.is_finite()) {
            separation = true;
            break;
        }
        for (b, s) in beta.iter_mut().zip(step) {
            *b += s;
        }
    }
    let (mu, _) = logistic_gradient(design, y, &beta);
    if y.iter().zip(&mu).all(|(yi, m)| (yi - m).abs() < 1e-6) {
        separation = true;
    }
    if separation {
        converged = false;
    }

    let (rows, _) = weighted_rows(design, &mu);
    let cov = factorize(design, &rows)?.xtx_inverse();
    let terms = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let se = cov[j][j].max(0.0).sqrt();
            TermEstimate {
                name: name.clone(),
                coef: beta[j],
                se,
                p: p_from_ratio(beta[j], se, normal_two_sided_p),
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if separation {
        warnings.push("complete separation: coefficients diverge".to_string());
    } else if !converged {
        warnings.push(format!(
            "no convergence after {LOGISTIC_MAX_ITER} iterations"
        ));
    }
    Ok(RegressionResult {
        model_kind: ModelKind::Logistic,
        n: design.n(),
        terms,
        f_p_value: None,
        rss: None,
        converged,
        separation,
        warnings,
    })
}

/// Reference level for cluster dummy coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// The cluster with the highest mean score (lowest index on ties).
    #[default]
    HighestMean,
    Cluster(usize),
}

pub fn cluster_term(c: usize) -> String {
    format!("cluster_{c}")
}

pub fn parse_cluster_term(name: &str) -> Option<usize> {
    name.strip_prefix("cluster_")?.parse().ok()
}

/// Dummy-coded OLS of score on cluster membership.
///
/// Clusters with fewer than two members are dropped (with a warning) before
/// fitting. Dummy terms are named `cluster_<index>`.
pub fn cluster_score_regression(
    assignments: &BTreeMap<String, usize>,
    scores: &HashMap<String, f64>,
    baseline: Baseline,
) -> Result<RegressionResult> {
    let missing: Vec<&str> = assignments
        .keys()
        .filter(|id| !scores.contains_key(id.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Missing(format!("scores for {}", missing.join(", "))));
    }
    let mut members: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (id, &c) in assignments {
        members.entry(c).or_default().push(scores[id.as_str()]);
    }
    let mut warnings = Vec::new();
    members.retain(|c, v| {
        if v.len() < 2 {
            warnings.push(format!("cluster {c} dropped: {} member(s)", v.len()));
            false
        } else {
            true
        }
    });
    if members.len() < 2 {
        return Err(invalid(
            "need at least two clusters with two or more members",
        ));
    }
    let base = match baseline {
        Baseline::Cluster(c) => {
            if !members.contains_key(&c) {
                return Err(invalid(format!(
                    "baseline cluster {c} has no usable members"
                )));
            }
            c
        }
        Baseline::HighestMean => {
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for (&c, v) in &members {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                if m > best.1 {
                    best = (c, m);
                }
            }
            best.0
        }
    };
    let dummies: Vec<usize> = members.keys().copied().filter(|&c| c != base).collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (id, &c) in assignments {
        if !members.contains_key(&c) {
            continue;
        }
        rows.push(
            dummies
                .iter()
                .map(|&d| if d == c { 1.0 } else { 0.0 })
                .collect(),
        );
        y.push(scores[id.as_str()]);
    }
    let design = Design::with_intercept(dummies.iter().map(|&d| cluster_term(d)).collect(), rows)?;
    let mut result = ols_fit(&design, &y)?;
    result.warnings = warnings;
    Ok(result)
}
