use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit, validate_points};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, mix64, rng_from_seed};

const KMEANS_MAX_ITER: usize = 100;
const REFERENCE_TAG: u64 = 0x5245_4653;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub k: usize,
    pub gap: f64,
    pub sk: f64,
    pub log_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub per_k: Vec<GapEntry>,
    pub selected_k: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GapReport {
    fn entry(&self, k: usize) -> Option<&GapEntry> {
        self.per_k.iter().find(|e| e.k == k)
    }

    /// Smallest k with `gap(k) >= gap(k+1) - sk(k+1)`; the arg-max gap if none.
    fn select(&mut self) {
        let first = self.per_k.iter().find(|e| {
            self.entry(e.k + 1)
                .is_some_and(|next| e.gap >= next.gap - next.sk)
        });
        self.selected_k = match first {
            Some(e) => e.k,
            None => self
                .per_k
                .iter()
                .fold(None::<&GapEntry>, |best, e| match best {
                    Some(b) if b.gap >= e.gap => Some(b),
                    _ => Some(e),
                })
                .map_or(1, |e| e.k),
        };
    }
}

fn data_hash(points: &[Vec<f64>]) -> u64 {
    points
        .iter()
        .flatten()
        .fold(0u64, |h, x| mix64(h ^ x.to_bits()))
}

/// Tibshirani gap statistic with uniform bounding-box reference sets.
///
/// Points are put in a canonical order first, and every random stream is a
/// function of the seed, the sorted data, `k` and the reference index `b`, so
/// the report is invariant to input order and to the rayon pool width.
pub fn gap_statistic(
    points: &[Vec<f64>],
    k_max: usize,
    b_refs: usize,
    restarts: usize,
    seed: u64,
) -> Result<GapReport> {
    let dim = validate_points(points)?;
    if k_max < 1 || b_refs < 1 {
        return Err(invalid("k_max and b_refs must be >= 1"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let n = sorted.len();
    let seed = derive_seed(seed, &[data_hash(&sorted)]);

    let (lo, hi): (Vec<f64>, Vec<f64>) = (0..dim)
        .map(|j| {
            sorted
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
                    (l.min(p[j]), h.max(p[j]))
                })
        })
        .unzip();
    let references: Vec<Vec<Vec<f64>>> = (0..b_refs)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, &[REFERENCE_TAG, b as u64]));
            (0..n)
                .map(|_| {
                    (0..dim)
                        .map(|j| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>())
                        .collect()
                })
                .collect()
        })
        .collect();

    let ks: Vec<usize> = (1..=k_max.min(n)).collect();
    let observed = ks
        .par_iter()
        .map(|&k| {
            Ok(kmeans_fit(
                &sorted,
                k,
                restarts,
                KMEANS_MAX_ITER,
                derive_seed(seed, &[k as u64]),
            )?
            .wss)
        })
        .collect::<Result<Vec<f64>>>()?;
    let jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..b_refs).map(move |b| (k, b)))
        .collect();
    let reference_wss = jobs
        .par_iter()
        .map(|&(k, b)| {
            let s = derive_seed(seed, &[k as u64, b as u64]);
            Ok(kmeans_fit(&references[b], k, restarts, KMEANS_MAX_ITER, s)?.wss)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut report = GapReport {
        per_k: Vec::new(),
        selected_k: 1,
        warnings: Vec::new(),
    };
    if k_max > n {
        report
            .warnings
            .push(format!("k > {n} skipped: more clusters than points"));
    }
    for (i, &k) in ks.iter().enumerate() {
        let w = observed[i];
        let refs = &reference_wss[i * b_refs..(i + 1) * b_refs];
        if w <= 0.0 || refs.iter().any(|&r| r <= 0.0) {
            report
                .warnings
                .push(format!("k = {k} skipped: zero within-cluster dispersion"));
            continue;
        }
        let logs: Vec<f64> = refs.iter().map(|r| r.ln()).collect();
        let mean = logs.iter().sum::<f64>() / b_refs as f64;
        let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / b_refs as f64;
        report.per_k.push(GapEntry {
            k,
            gap: mean - w.ln(),
            sk: var.sqrt() * (1.0 + 1.0 / b_refs as f64).sqrt(),
            log_w: w.ln(),
        });
    }
    report.select();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_rule() {
        let mk = |v: &[(f64, f64)]| GapReport {
            per_k: v
                .iter()
                .enumerate()
                .map(|(i, &(gap, sk))| GapEntry {
                    k: i + 1,
                    gap,
                    sk,
                    log_w: 0.0,
                })
                .collect(),
            selected_k: 0,
            warnings: vec![],
        };
        let mut r = mk(&[(0.1, 0.05), (0.5, 0.05), (0.52, 0.05), (0.3, 0.05)]);
        r.select();
        assert_eq!(r.selected_k, 2);
        let mut r = mk(&[(0.1, 0.0), (0.2, 0.0), (0.3, 0.0)]);
        r.select();
        assert_eq!(r.selected_k, 3);
    }

    #[test]
    fn single_point() {
        let r = gap_statistic(&[vec![0.3, 0.4]], 1, 5, 2, 0).unwrap();
        assert_eq!(r.selected_k, 1);
    }

    #[test]
    fn order_invariant() {
        let mut rng = rng_from_seed(3);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(
            gap_statistic(&pts, 4, 5, 3, 7).unwrap(),
            gap_statistic(&rev, 4, 5, 3, 7).unwrap()
        );
    }
}
