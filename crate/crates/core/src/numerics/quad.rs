//! Adaptive Gauss–Kronrod (7/15) quadrature with global error control.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_segments: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Like [`integrate`], but starts from a partition that contains `breaks`
/// (points where the integrand is known to be non-smooth).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("integration bounds [{a}, {b}] must be finite")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0;
    for w in pts.windows(2) {
        let (v, e) = kronrod(&f, w[0], w[1]);
        evals += 15;
        total += v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let scale = hi - lo;
    while heap.len() < opts.max_segments {
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{lo}, {hi}]")));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        if seg.b - seg.a <= 1e-15 * scale {
            // Cannot subdivide further; keep it and stop refining.
            heap.push(seg);
            break;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = kronrod(&f, seg.a, mid);
        let (v2, e2) = kronrod(&f, mid, seg.b);
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running totals.
    let (mut value, mut error) = (0.0, 0.0);
    for s in heap.iter() {
        value += s.value;
        error += s.error;
    }
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{lo}, {hi}]")));
    }
    let target = opts.abs_tol.max(opts.rel_tol * value.abs());
    if error > target * 10.0 {
        return Err(Error::Quadrature { a: lo, b: hi, error });
    }
    Ok(QuadResult {
        value: sign * value,
        error,
        evaluations: evals,
    })
}

/// Integrates `f` over `[a, b]` when `f` behaves like `(x - a)^gamma_left`
/// near `a` and like `(b - x)^gamma_right` near `b` (exponents `> -1`).
///
/// Each half of the interval is mapped by `x = end ± L u^p` with
/// `p = 1 / (1 + gamma)`, which turns the algebraic endpoint behaviour into a
/// bounded, smooth integrand in `u`. The integrand receives
/// `(x, x − a, b − x)` with the endpoint distances computed without
/// cancellation, since `x` itself cannot resolve them near the ends.
pub fn integrate_algebraic<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    gamma_left: f64,
    gamma_right: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(gamma_left > -1.0 && gamma_right > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "endpoint exponents must exceed -1 (got {gamma_left}, {gamma_right})"
        )));
    }
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("need a < b, got [{a}, {b}]")));
    }
    let mid = 0.5 * (a + b);
    let half = mid - a;
    let half_opts = QuadOptions {
        abs_tol: 0.5 * opts.abs_tol,
        ..opts
    };
    let pl = 1.0 / (1.0 + gamma_left);
    let left = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let d = half * u.powf(pl);
            f(a + d, d, (b - a) - d) * half * pl * u.powf(pl - 1.0)
        },
        0.0,
        1.0,
        half_opts,
    )?;
    let pr = 1.0 / (1.0 + gamma_right);
    let right = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let d = half * u.powf(pr);
            f(b - d, (b - a) - d, d) * half * pr * u.powf(pr - 1.0)
        },
        0.0,
        1.0,
        half_opts,
    )?;
    Ok(QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, QuadOptions::default()).unwrap();
        // x^3 - x^2 + x on [-1, 2] = (8 - 4 + 2) - (-1 - 1 - 1) = 9
        assert!((r.value - 9.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let f = |x: f64| x.exp();
        let fwd = integrate(f, 0.0, 1.0, QuadOptions::default()).unwrap().value;
        let bwd = integrate(f, 1.0, 0.0, QuadOptions::default()).unwrap().value;
        assert!((fwd + bwd).abs() < 1e-15);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| x.abs(), -1.0, 3.0, &[0.0], QuadOptions::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-14);
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2 ; int_0^1 (1-x)^{-3/4} dx = 4
        let r = integrate_algebraic(|_, dl: f64, _| dl.powf(-0.5), 0.0, 1.0, -0.5, 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11, "{}", r.value);
        let r = integrate_algebraic(|_, _, dr: f64| dr.powf(-0.75), 0.0, 1.0, 0.0, -0.75, QuadOptions::default())
            .unwrap();
        assert!((r.value - 4.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, QuadOptions::default()).is_err());
    }
}
