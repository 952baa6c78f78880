use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Result of [`kmeans_fit`] over an unlabeled point set.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub wss: f64,
    /// Within-cluster sum of squares after every assignment step of the kept restart.
    pub wss_trace: Vec<f64>,
    pub restart: usize,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lower index.
pub(crate) fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub(crate) fn validate_points(points: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(invalid("no points"));
    };
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
    }
    Ok(d)
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&x| {
                    acc += x;
                    u < acc
                })
                .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx].clone();
        for (p, best) in points.iter().zip(d2.iter_mut()) {
            *best = best.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Means of the labeled groups. An empty group takes over the point farthest
/// from its current centroid.
fn update_centroids(
    points: &[Vec<f64>],
    labels: &mut [usize],
    k: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    for _ in 0..k {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            break;
        };
        let far = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| {
                sq_dist(&points[a], &previous[labels[a]])
                    .total_cmp(&sq_dist(&points[b], &previous[labels[b]]))
                    .then(b.cmp(&a))
            });
        match far {
            Some(i) => labels[i] = empty,
            None => break,
        }
    }
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels.iter()) {
        sizes[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(sizes)
        .enumerate()
        .map(|(j, (s, n))| {
            if n == 0 {
                previous[j].clone()
            } else {
                s.into_iter().map(|x| x / n as f64).collect()
            }
        })
        .collect()
}

fn total_wss(points: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum()
}

fn lloyd(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut Rng,
) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(&centroids, p).0).collect();
    let mut trace = vec![total_wss(points, &labels, &centroids)];
    for _ in 0..max_iter {
        centroids = update_centroids(points, &mut labels, k, &centroids);
        let next: Vec<usize> = points.iter().map(|p| nearest(&centroids, p).0).collect();
        trace.push(total_wss(points, &next, &centroids));
        if next == labels {
            break;
        }
        labels = next;
    }
    let centroids = update_centroids(points, &mut labels, k, &centroids);
    (centroids, labels, trace)
}

/// Lloyd's k-means with k-means++ seeding, keeping the best of `restarts`
/// runs by within-cluster sum of squares (lower restart index on ties).
pub fn kmeans_fit(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansFit> {
    validate_points(points)?;
    if k < 1 || k > points.len() {
        return Err(invalid(format!("k = {k} must lie in 1..={}", points.len())));
    }
    if restarts < 1 {
        return Err(invalid("restarts must be >= 1"));
    }
    let fits: Vec<KMeansFit> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, &[r as u64]));
            let (centroids, labels, wss_trace) = lloyd(points, k, max_iter, &mut rng);
            let wss = total_wss(points, &labels, &centroids);
            KMeansFit {
                centroids,
                labels,
                wss,
                wss_trace,
                restart: r,
            }
        })
        .collect();
    Ok(fits
        .into_iter()
        .reduce(|best, f| if f.wss < best.wss { f } else { best })
        .expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn four_points_two_clusters() {
        let fit = kmeans_fit(&pts(&[0.0, 0.1, 10.0, 10.1]), 2, 5, 100, 1).unwrap();
        let mut c: Vec<f64> = fit.centroids.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert!((c[0] - 0.05).abs() < 1e-12 && (c[1] - 10.05).abs() < 1e-12);
        assert!((fit.wss - 0.01).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_and_k_one() {
        let p = pts(&[1.0, 4.0, 9.0]);
        assert!(kmeans_fit(&p, 3, 3, 50, 0).unwrap().wss.abs() < 1e-15);
        let one = kmeans_fit(&p, 1, 1, 50, 0).unwrap();
        assert!((one.centroids[0][0] - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(kmeans_fit(&pts(&[1.0]), 2, 1, 10, 0).is_err());
        assert!(kmeans_fit(&pts(&[1.0, f64::NAN]), 1, 1, 10, 0).is_err());
        assert!(kmeans_fit(&[vec![1.0], vec![1.0, 2.0]], 1, 1, 10, 0).is_err());
    }

    #[test]
    fn duplicates_do_not_leave_empty_clusters() {
        let p = pts(&[2.0, 2.0, 2.0, 5.0]);
        let fit = kmeans_fit(&p, 3, 4, 50, 9).unwrap();
        assert!(fit.wss.abs() < 1e-15);
        assert!(fit.centroids.iter().all(|c| c[0].is_finite()));
    }

    #[test]
    fn trace_is_monotone() {
        let mut rng = rng_from_seed(5);
        let p: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let fit = kmeans_fit(&p, 6, 4, 100, 2).unwrap();
        for w in fit.wss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(fit.wss <= *fit.wss_trace.last().unwrap() + 1e-12);
    }
}
