//! Spec examples whose expected values come from an independent computation.

mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tix::imputers::{impute_covariate_ridge, impute_time_indexed};
use tix::metrics::{aggregate, mid_ranks, GroupKey, RankMetric};
use tix::prelude::*;
use tix::series::masked_stats;

fn hourly() -> FrequencySpec {
    FrequencySpec::hourly()
}

fn rows_of(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

#[test]
fn masked_stats_matches_two_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
    let stats = masked_stats(&values, &[true; 100], 1e-8).unwrap();
    let mean = values.iter().sum::<f64>() / 100.0;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 100.0;
    assert!((stats.mean - mean).abs() < 1e-12);
    assert!((stats.std - var.sqrt()).abs() < 1e-12);
}

#[test]
fn ridge_on_unit_scale_columns_matches_plain_normal_equations() {
    // With columns already at unit population std the standardized penalty
    // reduces to (XcᵀXc + λI) w = Xcᵀyc on centered data.
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut rows = rows_of(&mut rng, 20, 4);
    for j in 0..4 {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / 20.0;
        let std = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 20.0).sqrt();
        rows.iter_mut().for_each(|r| r[j] = (r[j] - mean) / std);
    }
    let y: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y_mean = y.iter().sum::<f64>() / 20.0;
    let mut a = vec![vec![0.0; 4]; 4];
    let mut b = vec![0.0; 4];
    for (r, yi) in rows.iter().zip(&y) {
        for i in 0..4 {
            b[i] += r[i] * (yi - y_mean);
            for j in 0..4 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    (0..4).for_each(|i| a[i][i] += 0.1);
    let w = gauss_solve(a, b);
    let m = ridge_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &y, 0.1).unwrap();
    for (got, want) in m.weights.iter().zip(&w) {
        assert!(close(*got, *want, 1e-8), "{got} vs {want}");
    }
    assert!((m.intercept - y_mean).abs() < 1e-12);
}

#[test]
fn ridge_raw_columns_match_augmented_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rows: Vec<Vec<f64>> = rows_of(&mut rng, 20, 4)
        .into_iter()
        .map(|r| vec![r[0] * 50.0 + 3.0, r[1], r[2] * 0.01, r[3] - 7.0])
        .collect();
    let y: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
    let m = ridge_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &y, 0.1).unwrap();
    let (w, b) = ridge_oracle(&rows, &y, 0.1);
    for (got, want) in m.weights.iter().zip(&w) {
        assert!(close(*got, *want, 1e-8), "{got} vs {want}");
    }
    assert!(close(m.intercept, b, 1e-8));
}

#[test]
fn pinball_upper_decile_of_one_to_hundred() {
    let y: Vec<f64> = (1..=100).map(f64::from).collect();
    let x = FeatureMatrix::from_rows(&vec![vec![1.0]; 100]).unwrap();
    let m = pinball_fit(&x, &y, 0.9, 0.0).unwrap();
    let objective = |c: f64| y.iter().map(|&v| ql_oracle(c, v, 0.9)).sum::<f64>();
    let grid: Vec<f64> = (0..=9900).map(|k| 1.0 + k as f64 * 0.01).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| objective(*a).total_cmp(&objective(*b)))
        .unwrap();
    assert!((best - 90.0).abs() <= 1.0);
    assert!(
        (m.intercept - best).abs() <= 1.0,
        "{} vs {best}",
        m.intercept
    );
}

/// Exact linear quantile regression optimum (λ = 0): some optimum
/// interpolates `d + 1` of the rows, so enumerating those subsets finds it.
fn vertex_oracle(rows: &[Vec<f64>], y: &[f64], alpha: f64) -> f64 {
    let n = rows.len();
    let d = rows[0].len();
    let objective = |theta: &[f64]| {
        rows.iter()
            .zip(y)
            .map(|(r, &yi)| {
                let q: f64 = r.iter().zip(theta).map(|(a, w)| a * w).sum::<f64>() + theta[d];
                ql_oracle(q, yi, alpha)
            })
            .sum::<f64>()
    };
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..=d).collect();
    loop {
        let a: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| rows[i].iter().copied().chain([1.0]).collect())
            .collect();
        let b: Vec<f64> = subset.iter().map(|&i| y[i]).collect();
        let theta = gauss_solve(a, b);
        if theta.iter().all(|v| v.is_finite()) {
            best = best.min(objective(&theta));
        }
        // next k-combination in lexicographic order
        let k = subset.len();
        let Some(pos) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[pos] += 1;
        for i in pos + 1..k {
            subset[i] = subset[i - 1] + 1;
        }
    }
    best
}

fn pinball_objective(m: &LinearModel, rows: &[Vec<f64>], y: &[f64], alpha: f64) -> f64 {
    let fitted = predict(m, &FeatureMatrix::from_rows(rows).unwrap()).unwrap();
    fitted
        .iter()
        .zip(y)
        .map(|(&q, &v)| ql_oracle(q, v, alpha))
        .sum()
}

#[test]
fn pinball_within_one_percent_of_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for case in 0..40 {
        let d = 1 + case % 2;
        let n = rng.random_range(d + 3..12);
        let alpha = [0.1, 0.25, 0.5, 0.75, 0.9][case % 5];
        let rows = rows_of(&mut rng, n, d);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().sum::<f64>() + rng.random_range(-1.0..1.0))
            .collect();
        let m = pinball_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &y, alpha, 0.0).unwrap();
        let got = pinball_objective(&m, &rows, &y, alpha);
        let want = vertex_oracle(&rows, &y, alpha);
        assert!(
            got <= 1.01 * want + 1e-12,
            "case {case}: {got} vs oracle {want}"
        );
    }
}

#[test]
fn lad_fit_within_one_percent_of_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let n = 25;
        let rows = rows_of(&mut rng, n, 1);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 2.0 * r[0] - 1.0 + rng.random_range(-1.0..1.0))
            .collect();
        let m = pinball_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &y, 0.5, 0.0).unwrap();
        let got = pinball_objective(&m, &rows, &y, 0.5);
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            let w = i as f64 * 0.01;
            for k in 0..=400 {
                let b = -3.0 + k as f64 * 0.01;
                let obj: f64 = rows
                    .iter()
                    .zip(&y)
                    .map(|(r, &v)| 0.5 * (v - w * r[0] - b).abs())
                    .sum();
                best = best.min(obj);
            }
        }
        assert!(got <= 1.01 * best, "{got} vs grid {best}");
    }
}

/// 64 log-uniform frequencies are dense at the low end of the band, so a
/// sinusoid with a few cycles per segment is fitted almost exactly. High in-band
/// frequencies are only caught when a draw happens to land within about half
/// a cycle of the target.
#[test]
fn random_basis_fits_low_frequency_sinusoid() {
    let n = 672;
    let offsets: Vec<usize> = (0..n).collect();
    for seed in 0..4 {
        let spec = FeatureSpec::random_fourier(64, (0.5, 400.0), seed);
        let h = random_fourier_basis(&offsets, n, &spec).unwrap();
        for cycles in [1.0, 3.0] {
            let y: Vec<f64> = (0..n)
                .map(|t| (2.0 * PI * cycles * t as f64 / (n - 1) as f64).sin())
                .collect();
            let m = ridge_fit(&h, &y, 1e-3).unwrap();
            let fitted = predict(&m, &h).unwrap();
            let rms = (fitted
                .iter()
                .zip(&y)
                .map(|(f, v)| (f - v).powi(2))
                .sum::<f64>()
                / n as f64)
                .sqrt();
            assert!(
                rms < 1e-3,
                "seed {seed}, {cycles} cycles: residual rms {rms}"
            );
        }
    }
}

fn sine_segment(n: usize) -> Segment {
    let values = (0..n).map(|t| (2.0 * PI * t as f64 / 24.0).sin()).collect();
    Segment::fully_visible(values, hourly()).unwrap()
}

#[test]
fn pure_daily_sine_with_half_the_points_missing() {
    let seg = sine_segment(28 * 24);
    let masked = apply_scenario(&seg, &Scenario::pointwise(0.5, "p").unwrap(), 1).unwrap();
    let truth = masked.eval_truth();
    // Default penalty leaves a shrinkage bias of order λ / n.
    let out = impute_time_indexed(&masked, &FeatureSpec::handcrafted(), 1e-3, false, None).unwrap();
    let mae = znorm_mae(&truth, &out.point, masked.norm).unwrap();
    assert!(mae < 1e-4, "{mae}");
    let out = impute_time_indexed(&masked, &FeatureSpec::handcrafted(), 1e-9, false, None).unwrap();
    let mae = znorm_mae(&truth, &out.point, masked.norm).unwrap();
    assert!(mae < 1e-6, "{mae}");
}

fn ar_channel(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s: f64 = 0.0;
    (0..n)
        .map(|_| {
            s = 0.95 * s + rng.random_range(-1.0..1.0);
            s
        })
        .collect()
}

#[test]
fn affine_covariate_target_with_blocks() {
    let n = 28 * 24;
    let cov = ar_channel(n, 5);
    let target: Vec<f64> = cov.iter().map(|c| 3.0 * c - 1.0).collect();
    let seg = Segment::fully_visible(target, hourly())
        .unwrap()
        .with_covariate("c", cov)
        .unwrap();
    let masked = apply_scenario(&seg, &Scenario::blocks(4, "b").unwrap(), 2).unwrap();
    let truth = masked.eval_truth();
    let with =
        impute_time_indexed(&masked, &FeatureSpec::handcrafted(), 1e-12, true, None).unwrap();
    let without =
        impute_time_indexed(&masked, &FeatureSpec::handcrafted(), 1e-3, false, None).unwrap();
    let mae_with = znorm_mae(&truth, &with.point, masked.norm).unwrap();
    let mae_without = znorm_mae(&truth, &without.point, masked.norm).unwrap();
    assert!(mae_with < 1e-9, "{mae_with}");
    assert!(mae_without > 0.1, "{mae_without}");
}

#[test]
fn stacked_covariate_recovers_two_cov_plus_one() {
    let n = 28 * 24;
    let cov = ar_channel(n, 6);
    let target: Vec<f64> = cov.iter().map(|c| 2.0 * c + 1.0).collect();
    let seg = Segment::fully_visible(target, hourly())
        .unwrap()
        .with_covariate("c", cov.clone())
        .unwrap();
    let masked = apply_scenario(&seg, &Scenario::blocks(2, "b").unwrap(), 3).unwrap();
    let offsets: Vec<usize> = (0..n).collect();
    let base = handcrafted_features(&offsets, n, &hourly()).unwrap();
    let stacked = stack_covariates(&base, &[&cov], &masked.obs_mask).unwrap();
    let vis = masked.visible_indices();
    let eval = masked.eval_indices();
    let y: Vec<f64> = vis.iter().map(|&i| masked.values[i]).collect();
    let truth = masked.eval_truth();
    let err = |x: &FeatureMatrix| {
        let m = ridge_fit(&x.select_rows(&vis), &y, 1e-12).unwrap();
        let p = predict(&m, &x.select_rows(&eval)).unwrap();
        p.iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    assert!(err(&stacked) < 1e-9);
    assert!(err(&base) > 0.1);
}

#[test]
fn covariate_ridge_on_unrelated_noise_predicts_the_mean() {
    let n = 200;
    let mut outside = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) + 5.0).collect();
        let cov: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let seg = Segment::fully_visible(target, hourly())
            .unwrap()
            .with_covariate("c", cov)
            .unwrap();
        let masked = apply_scenario(&seg, &Scenario::pointwise(0.5, "p").unwrap(), seed).unwrap();
        let vis: Vec<f64> = masked
            .visible_indices()
            .iter()
            .map(|&i| masked.values[i])
            .collect();
        let mean = vis.iter().sum::<f64>() / vis.len() as f64;
        let sd =
            (vis.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vis.len() - 1) as f64).sqrt();
        let se = sd / (vis.len() as f64).sqrt();
        let out = impute_covariate_ridge(&masked, 1e-3).unwrap();
        let avg = out.point.iter().sum::<f64>() / out.point.len() as f64;
        outside += ((avg - mean).abs() > 3.0 * se) as usize;
    }
    // Three standard errors: a handful of exceedances at most.
    assert!(outside <= 3, "{outside} of 100 seeds outside 3 se");
}

fn record(d: &str, i: &str, s: &str, mae: f64) -> ScoreRecord {
    ScoreRecord {
        dataset: d.into(),
        imputer_id: i.into(),
        scenario_label: s.into(),
        segment_start: 0,
        n_points: 1,
        mae,
        wql: None,
    }
}

#[test]
fn aggregate_matches_hand_table() {
    // 3 scenarios × 2 imputers, with two segments in one cell.
    let records = vec![
        record("d", "a", "s1", 1.0),
        record("d", "a", "s1", 3.0),
        record("d", "a", "s2", 4.0),
        record("d", "a", "s3", 5.0),
        record("d", "b", "s1", 0.5),
        record("d", "b", "s2", 1.5),
        record("d", "b", "s3", 2.5),
    ];
    let cells = aggregate(&records, &[GroupKey::Imputer, GroupKey::Scenario]);
    let get = |i: &str, s: &str| {
        cells
            .iter()
            .find(|c| c.imputer_id.as_deref() == Some(i) && c.scenario_label.as_deref() == Some(s))
            .unwrap()
            .mae
    };
    assert_eq!(get("a", "s1"), 2.0);
    assert_eq!(get("b", "s3"), 2.5);
    let per_dataset = tix::metrics::scenario_average(&records);
    let a = per_dataset
        .iter()
        .find(|r| r.imputer_id.as_deref() == Some("a"))
        .unwrap();
    assert!((a.mae - (2.0 + 4.0 + 5.0) / 3.0).abs() < 1e-15);
}

#[test]
fn ranks_match_sort_and_rank_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let imps = ["a", "b", "c", "d"];
    let mut records = Vec::new();
    let mut matrix = Vec::new();
    for t in 0..10 {
        // Coarse values so ties occur.
        let row: Vec<f64> = imps
            .iter()
            .map(|_| rng.random_range(0..4) as f64 * 0.25)
            .collect();
        for (i, v) in imps.iter().zip(&row) {
            records.push(record("d", i, &format!("task{t}"), *v));
        }
        matrix.push(row);
    }
    let table = average_ranks(&records, RankMetric::Mae).unwrap();
    for (j, imp) in imps.iter().enumerate() {
        let mut sum = 0.0;
        for row in &matrix {
            // rank = 1 + #strictly better + (#ties − 1) / 2
            let better = row.iter().filter(|&&v| v < row[j]).count() as f64;
            let ties = row.iter().filter(|&&v| v == row[j]).count() as f64;
            sum += 1.0 + better + (ties - 1.0) / 2.0;
        }
        assert!((table.mean_ranks[*imp] - sum / 10.0).abs() < 1e-12);
    }
    assert_eq!(mid_ranks(&[0.5, 0.25, 0.5, 0.75]), vec![2.5, 1.0, 2.5, 4.0]);
}
