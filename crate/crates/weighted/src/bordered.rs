//! Gaussian elimination with partial pivoting for a symmetric tridiagonal
//! matrix bordered by one dense row and column:
//!
//! ```text
//! [ T    col ] [x]   [r]
//! [ rowᵀ  c  ] [y] = [s]
//! ```
//!
//! Pivoting runs over neighbouring body rows during the sweep; the border
//! row joins the pivot search in the final 2×2 block, so a (near-)singular
//! `T` is fine as long as the bordered matrix is not.

pub(crate) struct Bordered<'a> {
    pub diag: &'a [f64],
    /// `off[i]` couples unknowns `i` and `i+1`.
    pub off: &'a [f64],
    pub col: &'a [f64],
    pub row: &'a [f64],
    pub corner: f64,
}

impl Bordered<'_> {
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        assert!(n >= 2 && rhs.len() == n + 1);
        let mut d = self.diag.to_vec();
        let mut du = self.off.to_vec();
        du.push(0.0);
        let mut dl = self.off.to_vec();
        let mut du2 = vec![0.0; n];
        let mut last = self.col.to_vec();
        let mut bw = self.row.to_vec();
        let mut bc = self.corner;
        let mut r = rhs.to_vec();
        for k in 0..n - 1 {
            if dl[k].abs() > d[k].abs() {
                // Swap rows k and k+1.
                let (rk, rk1, rk2) = (dl[k], d[k + 1], du[k + 1]);
                let (ok, ok1, ok2) = (d[k], du[k], du2[k]);
                d[k] = rk;
                du[k] = rk1;
                du2[k] = rk2;
                dl[k] = ok;
                d[k + 1] = ok1;
                du[k + 1] = ok2;
                last.swap(k, k + 1);
                r.swap(k, k + 1);
            }
            if d[k] == 0.0 {
                return None;
            }
            let m = dl[k] / d[k];
            d[k + 1] -= m * du[k];
            if k + 2 < n {
                du[k + 1] -= m * du2[k];
            }
            last[k + 1] -= m * last[k];
            r[k + 1] -= m * r[k];
            let mb = bw[k] / d[k];
            bw[k + 1] -= mb * du[k];
            if k + 2 < n {
                bw[k + 2] -= mb * du2[k];
            }
            bc -= mb * last[k];
            r[n] -= mb * r[k];
        }
        // Final block in unknowns (x_{n-1}, y).
        let (mut a11, mut a12, mut a21, mut a22) = (d[n - 1], last[n - 1], bw[n - 1], bc);
        let (mut b1, mut b2) = (r[n - 1], r[n]);
        if a21.abs() > a11.abs() {
            std::mem::swap(&mut a11, &mut a21);
            std::mem::swap(&mut a12, &mut a22);
            std::mem::swap(&mut b1, &mut b2);
        }
        if a11 == 0.0 {
            return None;
        }
        let m = a21 / a11;
        let a22 = a22 - m * a12;
        let b2 = b2 - m * b1;
        if a22 == 0.0 {
            return None;
        }
        let mut x = vec![0.0; n + 1];
        x[n] = b2 / a22;
        x[n - 1] = (b1 - a12 * x[n]) / a11;
        for k in (0..n - 1).rev() {
            let mut s = r[k] - du[k] * x[k + 1] - last[k] * x[n];
            if k + 2 < n {
                s -= du2[k] * x[k + 2];
            }
            x[k] = s / d[k];
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}
