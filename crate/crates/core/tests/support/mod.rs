//! Independent reference implementations shared by the integration and
//! acceptance tests. They favour the obvious formula over speed.
#![allow(dead_code)]

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Solves `A z = b` by Gauss-Jordan elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let p = b.len();
    for k in 0..p {
        let piv = (k..p).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        let pivot_row = a[k].clone();
        for i in 0..p {
            if i != k {
                let f = a[i][k] / pivot_row[k];
                a[i].iter_mut().zip(&pivot_row).skip(k).for_each(|(x, pk)| *x -= f * pk);
                b[i] -= f * b[k];
            }
        }
    }
    (0..p).map(|k| b[k] / a[k][k]).collect()
}

/// Least squares through the normal equations `(X'X) b = X'y`, with
/// compensated accumulation of the cross products and two rounds of
/// iterative refinement. `columns` must include the intercept column.
pub fn normal_equations(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let xtx: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| dot(&columns[i], &columns[j])).collect()).collect();
    let xty: Vec<f64> = columns.iter().map(|c| dot(c, y)).collect();
    let mut b = solve(xtx.clone(), xty.clone());
    for _ in 0..2 {
        let r: Vec<f64> = (0..p)
            .map(|i| compensated_sum(std::iter::once(xty[i]).chain((0..p).map(|j| -xtx[i][j] * b[j]))))
            .collect();
        let db = solve(xtx.clone(), r);
        b.iter_mut().zip(db).for_each(|(bi, d)| *bi += d);
    }
    b
}

/// Hayashi-Yoshida by brute force over every interval pair, in (i, j) order.
pub fn hy_naive(t: &[f64], x: &[f64], s: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 1..t.len() {
        for j in 1..s.len() {
            if t[i - 1] < s[j] && s[j - 1] < t[i] {
                total += (x[i] - x[i - 1]) * (y[j] - y[j - 1]);
            }
        }
    }
    total
}

/// Pearson correlation from centred sums.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// `v` delayed by `lag` steps, padded with its first value.
pub fn delayed(v: &[f64], lag: usize) -> Vec<f64> {
    (0..v.len()).map(|t| v[t.saturating_sub(lag)]).collect()
}

/// Ramp from 0 to 1 starting at `start` over `len` steps, bent by `curve`.
pub fn ramp(n: usize, start: usize, len: usize, curve: f64) -> Vec<f64> {
    (0..n)
        .map(|t| ((t as f64 - start as f64 + 1.0) / len as f64).clamp(0.0, 1.0).powf(curve))
        .collect()
}

/// `|a - b| <= tol * max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}
