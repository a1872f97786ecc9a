//! Independent oracles and printed data shared by the integration tests.
#![allow(dead_code)]

use fracfuse::fusion::SensorSummary;

/// Printed engine sensor summaries: (std, mean).
pub const ENGINE_S: [f64; 9] = [0.38, 0.14, 0.22, 0.28, 0.34, 0.24, 0.32, 0.29, 0.38];
pub const ENGINE_F: [f64; 9] = [
    70.83, 71.30, 70.88, 71.04, 71.08, 71.08, 71.13, 71.14, 70.88,
];
pub const ENGINE_FUSED: [f64; 9] = [
    112.2, 112.31, 112.28, 112.26, 112.27, 112.15, 112.31, 112.29, 112.2,
];
pub const ENGINE_RESCALED: [f64; 9] = [
    71.01, 71.11, 71.06, 71.05, 71.06, 70.98, 71.08, 71.07, 71.01,
];

pub const TREND_T: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
pub const ENGINE_TREND: [f64; 6] = [71.038, 71.086, 71.173, 71.335, 71.624, 72.207];
pub const BODY_TREND: [f64; 6] = [1.358, 1.362, 1.376, 1.383, 1.395, 1.412];

pub fn engine_summaries() -> Vec<SensorSummary> {
    ENGINE_S
        .iter()
        .zip(ENGINE_F)
        .enumerate()
        .map(|(i, (&s, f))| SensorSummary {
            sensor_id: format!("F{}#", i + 1),
            retained: 5,
            mean: f,
            std: s,
            rejected: vec![],
        })
        .collect()
}

pub fn trend(values: &[f64]) -> Vec<(f64, f64)> {
    TREND_T
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect()
}

/// `(-1)^i · C(ν, i)` from the falling-factorial product, recomputed from
/// scratch for every `i`.
pub fn binomial_weight(nu: f64, i: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=i {
        c *= (nu - (j as f64 - 1.0)) / j as f64;
    }
    if i % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Plain G-L sum over `floor((b - a) / h)` steps, with the step count taken
/// from the decimal ratio rounded to 9 places.
pub fn gl_direct(f: impl Fn(f64) -> f64, x: f64, a: f64, b: f64, h: f64, nu: f64) -> f64 {
    let ratio = ((b - a) / h * 1e9).round() / 1e9;
    let n = ratio.floor() as usize;
    let mut acc = 0.0;
    for i in 0..=n {
        acc += binomial_weight(nu, i) * f(x - i as f64 * h);
    }
    acc / h.powf(nu)
}

/// Least squares through the normal equations, solved by Gaussian
/// elimination with partial pivoting on abscissae divided by `max|x|`.
/// Returns raw power coefficients, lowest first.
#[allow(clippy::needless_range_loop)]
pub fn normal_equations(xs: &[f64], ys: &[f64], order: usize) -> Vec<f64> {
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let m = order + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        let powers: Vec<f64> = (0..m).map(|j| u.powi(j as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += powers[r] * powers[c];
            }
            a[r][m] += powers[r] * y;
        }
    }
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    (0..m)
        .map(|j| a[j][m] / a[j][j] / scale.powi(j as i32))
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pop_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
