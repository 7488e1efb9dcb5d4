//! Brute-force reference implementations shared by the integration tests.
//! Each one is written from the definition, not from the library code.
#![allow(dead_code)]

use rand::Rng;
use tix::prelude::*;

/// Straight line through the closest visible neighbours, searched by
/// scanning outward from `t`.
pub fn linear_oracle(values: &[f64], obs: &[bool], t: usize) -> f64 {
    let left = (0..t).rev().find(|&i| obs[i]);
    let right = (t + 1..values.len()).find(|&i| obs[i]);
    match (left, right) {
        (Some(a), Some(b)) => {
            let (a_f, b_f, t_f) = (a as f64, b as f64, t as f64);
            (values[a] * (b_f - t_f) + values[b] * (t_f - a_f)) / (b_f - a_f)
        }
        (None, Some(b)) => values[b],
        (Some(a), None) => values[a],
        (None, None) => panic!("no visible point"),
    }
}

pub fn locf_oracle(values: &[f64], obs: &[bool], t: usize) -> f64 {
    match (0..t).rev().find(|&i| obs[i]) {
        Some(a) => values[a],
        None => {
            values[(t + 1..values.len())
                .find(|&i| obs[i])
                .expect("visible point")]
        }
    }
}

/// Materializes the full probe list `t−S, t+S, t−2S, …` and takes the first
/// visible entry.
pub fn seasonal_oracle(values: &[f64], obs: &[bool], t: usize, s: usize) -> f64 {
    let n = values.len() as i64;
    let (t, s) = (t as i64, s as i64);
    let mut probes = Vec::new();
    for k in 1..=n {
        for c in [t - k * s, t + k * s] {
            if (0..n).contains(&c) {
                probes.push(c as usize);
            }
        }
    }
    match probes.into_iter().find(|&c| obs[c]) {
        Some(c) => values[c],
        None => locf_oracle(values, obs, t as usize),
    }
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + k] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Ridge with unpenalized intercept and penalty `λ Σ s_j² w_j²` (`s_j` the
/// population std of column j), solved on the augmented raw-scale normal
/// equations. Returns `(weights, intercept)`.
pub fn ridge_oracle(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let n = rows.len();
    let d = rows[0].len();
    let aug: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().copied().chain([1.0]).collect())
        .collect();
    let mut ata = vec![vec![0.0; d + 1]; d + 1];
    let mut aty = vec![0.0; d + 1];
    for (r, &yi) in aug.iter().zip(y) {
        for i in 0..=d {
            aty[i] += r[i] * yi;
            for j in 0..=d {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
        ata[j][j] += lambda * var;
    }
    let mut theta = gauss_solve(ata, aty);
    let b = theta.pop().unwrap();
    (theta, b)
}

pub fn ql_oracle(q: f64, x: f64, alpha: f64) -> f64 {
    if x > q {
        alpha * (x - q)
    } else {
        (1.0 - alpha) * (q - x)
    }
}

/// Mean over levels of `2 Σ_i QL / Σ_i |x_i|`, as nested loops.
pub fn wql_oracle(preds: &[(f64, Vec<f64>)], truth: &[f64]) -> f64 {
    let mut scale = 0.0;
    for x in truth {
        scale += x.abs();
    }
    let mut total = 0.0;
    for (alpha, q) in preds {
        let mut loss = 0.0;
        for i in 0..truth.len() {
            loss += ql_oracle(q[i], truth[i], *alpha);
        }
        total += 2.0 * loss / scale;
    }
    total / preds.len() as f64
}

/// Segment with the given values and visibility, scoring every hidden cell.
pub fn masked_segment(values: Vec<f64>, obs: Vec<bool>, freq: FrequencySpec) -> Segment {
    let eval = obs.iter().map(|o| !o).collect();
    Segment::new("oracle", 0, values, obs, eval, Vec::new(), freq).unwrap()
}

pub fn random_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
