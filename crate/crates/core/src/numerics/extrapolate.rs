//! Extrapolation of sequences to a vanishing parameter.

/// Richardson table for samples `values[k]` taken at `h_k = h_0 / ratio^k`,
/// assuming an error expansion in successive integer powers `h^p0, h^(p0+1), …`.
/// Returns the most extrapolated entry.
pub fn richardson(values: &[f64], ratio: f64, p0: u32) -> f64 {
    assert!(!values.is_empty());
    let mut row = values.to_vec();
    let mut p = p0 as i32;
    while row.len() > 1 {
        let f = ratio.powi(p);
        row = row.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        p += 1;
    }
    row[0]
}

/// Least-squares polynomial of the given degree through `(x_i, y_i)`,
/// evaluated at `x = 0`.
pub fn polyfit_at_zero(xs: &[f64], ys: &[f64], degree: usize) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let m = degree + 1;
    assert!(xs.len() >= m, "need at least {m} points");
    // Normal equations are fine at the tiny sizes used here.
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pows = vec![1.0; m];
        for j in 1..m {
            pows[j] = pows[j - 1] * x;
        }
        for i in 0..m {
            aty[i] += pows[i] * y;
            for j in 0..m {
                ata[i][j] += pows[i] * pows[j];
            }
        }
    }
    let coeffs = solve_dense(ata, aty);
    coeffs[0]
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |h: f64| 3.0 + 2.0 * h - 5.0 * h * h;
        let vals: Vec<f64> = (0..3).map(|k| f(0.1 / 2f64.powi(k))).collect();
        assert!((richardson(&vals, 2.0, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn polyfit_recovers_intercept() {
        let xs = [0.04, 0.02, 0.01, 0.005];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 + 1.5 * x).collect();
        assert!((polyfit_at_zero(&xs, &ys, 1) + 0.5).abs() < 1e-12);
    }
}
