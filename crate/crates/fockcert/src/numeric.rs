//! Shared numerical kernels: factorial tables, stable exponential tails,
//! bracketed root finding, golden-section search, and a dense real matrix
//! exponential (scaling-and-squaring).

use crate::error::{Error, Result};

/// Largest `k` with `k!` representable in an `f64`.
pub const MAX_FACTORIAL: usize = 170;

static FACTORIALS: [f64; MAX_FACTORIAL + 1] = {
    let mut t = [1.0f64; MAX_FACTORIAL + 1];
    let mut k = 1;
    while k <= MAX_FACTORIAL {
        t[k] = t[k - 1] * k as f64;
        k += 1;
    }
    t
};

/// `k!` as `f64`; `+inf` beyond the representable range.
pub fn factorial(k: usize) -> f64 {
    if k <= MAX_FACTORIAL {
        FACTORIALS[k]
    } else {
        f64::INFINITY
    }
}

/// Falling factorial `k (k-1) ... (k-r+1)` with `r` factors; zero when `r > k`.
pub fn falling(k: usize, r: usize) -> f64 {
    if r > k {
        return 0.0;
    }
    let mut p = 1.0;
    for t in 0..r {
        p *= (k - t) as f64;
    }
    p
}

/// Binomial coefficient for small arguments.
pub fn binomial(n: usize, i: usize) -> f64 {
    if i > n {
        return 0.0;
    }
    falling(n, i) / factorial(i)
}

/// Tail of the exponential series: `sum_{k >= m} x^k / k!` for `x >= 0`.
///
/// Computed as a direct series when the leading terms of `e^x` would cancel,
/// and as `e^x - partial` when the tail carries essentially all the mass.
pub fn exp_tail(x: f64, m: usize) -> f64 {
    debug_assert!(x >= 0.0 && x.is_finite());
    if m == 0 {
        return x.exp();
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > 40.0 && x > 2.0 * m as f64 {
        // Pois(x) puts negligible mass below m here, so no cancellation.
        let mut partial = 0.0;
        let mut term = 1.0;
        for k in 0..m {
            partial += term;
            term *= x / (k + 1) as f64;
        }
        return x.exp() - partial;
    }
    let mut term = 1.0;
    for k in 1..=m {
        term *= x / k as f64;
    }
    let mut sum = term;
    let mut k = m;
    loop {
        k += 1;
        term *= x / k as f64;
        let next = sum + term;
        if next == sum || k > m + 2000 {
            return next;
        }
        sum = next;
    }
}

/// `sum_{j>=0} x^j / (j+m)!` for `x >= 0`, i.e. `exp_tail(x, m) / x^m`.
///
/// All terms are positive, so the series is stable down to `x = 0` (where it
/// equals `1/m!`); the quotient form would lose to 0·inf there.
pub fn exp_tail_ratio(x: f64, m: usize) -> f64 {
    let mut term = 1.0 / factorial(m);
    let mut sum = term;
    let mut j = 0usize;
    loop {
        j += 1;
        term *= x / (j + m) as f64;
        let next = sum + term;
        if next == sum || j > 2100 {
            return next;
        }
        sum = next;
    }
}

/// Root of `f` inside a sign-changing bracket `[lo, hi]`, found by bisection
/// with guarded secant acceleration. Deterministic; `tol_x` is an absolute
/// width target on the final bracket.
pub fn solve_bracketed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol_x: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut bisect_next = false;
    for _ in 0..256 {
        let width = b - a;
        if width.abs() <= tol_x + 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let x = if bisect_next {
            a + 0.5 * width
        } else {
            let sec = a - fa * width / (fb - fa);
            if sec.is_finite() && sec > a && sec < b {
                sec
            } else {
                a + 0.5 * width
            }
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::NoBracket { lo: a, hi: b });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // Secant steps that fail to shrink the bracket force a bisection.
        bisect_next = (b - a) > 0.6 * width;
    }
    Ok(0.5 * (a + b))
}

/// Expand `hi` by doubling the distance from `lo` until `f` changes sign,
/// then solve. `f(lo)` must be on the negative side.
pub fn solve_expanding_upward<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    mut hi: f64,
    tol_x: f64,
) -> Result<f64> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo > 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        if f(hi) >= 0.0 {
            return solve_bracketed(&f, lo, hi, tol_x);
        }
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::NoBracket { lo, hi })
}

/// Golden-section maximization of `f` on `[a, b]`. Returns `(argmax, max)`.
/// Exact only for unimodal `f`; callers bracket a single local maximum first.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Golden-section minimization; returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, fx) = golden_max(|t| -f(t), a, b, tol);
    (x, -fx)
}

/// Dense matrix product (row-major, `n x n`).
pub fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                let brow = &b[k * n..(k + 1) * n];
                let crow = &mut c[i * n..(i + 1) * n];
                for j in 0..n {
                    crow[j] += aik * brow[j];
                }
            }
        }
    }
    c
}

/// Identity matrix (row-major, `n x n`).
pub fn identity(n: usize) -> Vec<f64> {
    let mut id = vec![0.0; n * n];
    for i in 0..n {
        id[i * n + i] = 1.0;
    }
    id
}

/// Matrix exponential of a real `n x n` matrix by scaling and squaring with a
/// Taylor series on the scaled matrix.
pub fn expm(n: usize, a: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let norm = (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(s as i32);
    let b: Vec<f64> = a.iter().map(|x| x * scale).collect();

    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40u32 {
        term = mat_mul(n, &term, &b);
        let inv_k = 1.0 / f64::from(k);
        let mut largest = 0.0f64;
        for t in term.iter_mut() {
            *t *= inv_k;
            largest = largest.max(t.abs());
        }
        for (r, t) in result.iter_mut().zip(term.iter()) {
            *r += *t;
        }
        if largest < 1e-20 {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(n, &result, &result);
    }
    result
}
