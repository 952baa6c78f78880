use proptest::prelude::*;

use teamcomm::clustering::{gap_statistic, kmeans_fit};
use teamcomm::corpus::{DocTermMatrix, Vocabulary};
use teamcomm::stats::{logistic_fit, ols_fit, Design};
use teamcomm::topics::{fit_lda, infer_theta, probabilistic_coherence, GibbsSampler, LdaConfig};

fn dtm(rows: &[Vec<u32>], ids: &[String]) -> DocTermMatrix {
    let v = rows[0].len();
    let vocab = Vocabulary::new(
        (0..v)
            .map(|i| format!("w{}", (b'a' + i as u8) as char))
            .collect(),
    )
    .unwrap();
    let sparse = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(t, &c)| (t, c))
                .collect()
        })
        .collect();
    DocTermMatrix::new(ids.to_vec(), vocab, sparse).unwrap()
}

fn count_matrix() -> impl Strategy<Value = Vec<Vec<u32>>> {
    (2usize..5, 2usize..6).prop_flat_map(|(v, d)| {
        prop::collection::vec(prop::collection::vec(0u32..4, v), d)
            .prop_filter("every document needs a token", |rows| {
                rows.iter().all(|r| r.iter().sum::<u32>() > 0)
            })
    })
}

fn small_cfg(seed: u64) -> LdaConfig {
    LdaConfig {
        n_iter: 30,
        burn_in: 10,
        seed,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampler_conserves_counts(rows in count_matrix(), k in 1usize..4, seed in any::<u64>()) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("d{i}")).collect();
        let m = dtm(&rows, &ids);
        prop_assume!(k as u64 <= m.total_tokens());
        let mut s = GibbsSampler::new(&m, k, &small_cfg(seed)).unwrap();
        for _ in 0..5 {
            s.sweep();
            prop_assert!(s.counts_consistent());
            for (d, row) in rows.iter().enumerate() {
                prop_assert_eq!(s.doc_topic_counts(d).iter().sum::<u32>(), row.iter().sum::<u32>());
            }
        }
    }

    #[test]
    fn estimates_are_row_stochastic(rows in count_matrix(), seed in any::<u64>()) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("d{i}")).collect();
        let m = dtm(&rows, &ids);
        prop_assume!(m.total_tokens() >= 2);
        let model = fit_lda(&m, 2, &small_cfg(seed)).unwrap();
        for row in model.phi.iter().chain(&model.theta) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let theta = infer_theta(&model, &m.rows[0], 20, seed).unwrap();
        prop_assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn theta_follows_documents_under_row_permutation(rows in count_matrix(), seed in any::<u64>(), shift in 1usize..5) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("d{i}")).collect();
        let m = dtm(&rows, &ids);
        prop_assume!(m.total_tokens() >= 2);
        let n = rows.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let prow: Vec<Vec<u32>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let pids: Vec<String> = perm.iter().map(|&i| ids[i].clone()).collect();
        let a = fit_lda(&m, 2, &small_cfg(seed)).unwrap();
        let b = fit_lda(&dtm(&prow, &pids), 2, &small_cfg(seed)).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            prop_assert_eq!(&b.theta[j], &a.theta[i]);
        }
        prop_assert_eq!(a.phi, b.phi);
    }

    #[test]
    fn coherence_matches_pair_counting(rows in count_matrix(), order in Just(()).prop_perturb(|_, mut rng| rng.random::<u64>())) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("d{i}")).collect();
        let m = dtm(&rows, &ids);
        let v = m.n_terms();
        let mut terms: Vec<usize> = (0..v).collect();
        terms.rotate_left((order % v as u64) as usize);
        let names: Vec<String> = terms.iter().map(|&t| m.vocab.term(t).to_string()).collect();
        let n = rows.len() as f64;
        let mut want = 0.0;
        let mut pairs = 0.0;
        for i in 0..v {
            for j in (i + 1)..v {
                pairs += 1.0;
                let (a, b) = (terms[i], terms[j]);
                let n_i = rows.iter().filter(|r| r[a] > 0).count() as f64;
                if n_i == 0.0 {
                    continue;
                }
                let n_j = rows.iter().filter(|r| r[b] > 0).count() as f64;
                let n_ij = rows.iter().filter(|r| r[a] > 0 && r[b] > 0).count() as f64;
                want += n_ij / n_i - n_j / n;
            }
        }
        let got = probabilistic_coherence(&names, &m, v).unwrap();
        prop_assert!((got - want / pairs).abs() <= 1e-12);
    }

    #[test]
    fn kmeans_trace_is_monotone_and_labels_are_nearest(
        points in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 3..20),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(k <= points.len());
        let fit = kmeans_fit(&points, k, 3, 100, seed).unwrap();
        for w in fit.wss_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        let d2 = |p: &[f64], c: &[f64]| p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let mut wss = 0.0;
        for (p, &l) in points.iter().zip(&fit.labels) {
            let best = fit.centroids.iter().map(|c| d2(p, c)).fold(f64::INFINITY, f64::min);
            prop_assert!(d2(p, &fit.centroids[l]) <= best + 1e-9);
            wss += d2(p, &fit.centroids[l]);
        }
        prop_assert!((wss - fit.wss).abs() <= 1e-9 * (1.0 + wss));
    }

    #[test]
    fn ols_is_row_order_invariant_and_residuals_orthogonal(
        data in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -50.0f64..50.0), 6..30),
        shift in 1usize..30,
    ) {
        let rows: Vec<Vec<f64>> = data.iter().map(|&(a, b, _)| vec![a, b]).collect();
        let y: Vec<f64> = data.iter().map(|&(_, _, y)| y).collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let Ok(design) = Design::with_intercept(names.clone(), rows.clone()) else { return Ok(()) };
        let Ok(fit) = ols_fit(&design, &y) else { return Ok(()) };
        let n = rows.len();
        let prow: Vec<Vec<f64>> = (0..n).map(|i| rows[(i + shift) % n].clone()).collect();
        let py: Vec<f64> = (0..n).map(|i| y[(i + shift) % n]).collect();
        let pfit = ols_fit(&Design::with_intercept(names, prow).unwrap(), &py).unwrap();
        for (a, b) in fit.coefficients().iter().zip(pfit.coefficients()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        let beta = fit.coefficients();
        let resid: Vec<f64> = rows.iter().zip(&y).map(|(r, yy)| yy - beta[0] - beta[1] * r[0] - beta[2] * r[1]).collect();
        let cols = [vec![1.0; n], rows.iter().map(|r| r[0]).collect(), rows.iter().map(|r| r[1]).collect::<Vec<_>>()];
        for c in &cols {
            let dot: f64 = c.iter().zip(&resid).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-8 * n as f64);
        }
    }

    #[test]
    fn converged_logistic_has_zero_gradient(
        data in prop::collection::vec((-3.0f64..3.0, any::<bool>()), 10..60),
    ) {
        let ys: Vec<f64> = data.iter().map(|&(_, y)| if y { 1.0 } else { 0.0 }).collect();
        prop_assume!(ys.contains(&1.0) && ys.contains(&0.0));
        let design = Design::with_intercept(vec!["x".into()], data.iter().map(|&(x, _)| vec![x]).collect()).unwrap();
        let Ok(fit) = logistic_fit(&design, &ys) else { return Ok(()) };
        if fit.converged {
            let b = fit.coefficients();
            let mut grad = [0.0; 2];
            for (&(x, _), y) in data.iter().zip(&ys) {
                let p = 1.0 / (1.0 + (-(b[0] + b[1] * x)).exp());
                grad[0] += y - p;
                grad[1] += (y - p) * x;
            }
            prop_assert!(grad.iter().all(|g| g.abs() < 1e-6), "{grad:?}");
        }
    }
}

#[test]
fn gap_is_invariant_to_point_order() {
    let centres = [[0.0, 0.0], [6.0, 1.0]];
    let points: Vec<Vec<f64>> = (0..30)
        .map(|i| {
            let c = centres[i % 2];
            let t = i as f64;
            vec![c[0] + 0.3 * (t * 0.37).sin(), c[1] + 0.3 * t.cos()]
        })
        .collect();
    let mut reversed = points.clone();
    reversed.reverse();
    let a = gap_statistic(&points, 5, 10, 3, 7).unwrap();
    let b = gap_statistic(&reversed, 5, 10, 3, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.selected_k, 2, "{a:?}");
}
