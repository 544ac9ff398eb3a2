//! Independent spectral-radius oracle for small matrices.
//!
//! The characteristic polynomial comes from the Faddeev–LeVerrier recursion.
//! Its largest real root is then bracketed by a sign scan and refined by
//! bisection. Even-multiplicity roots show no sign change, so the scan is
//! repeated on successive derivatives: a root of multiplicity `m` is a simple
//! root of the `(m-1)`-th derivative, and by Gauss–Lucas no derivative has a
//! real root beyond the spectral radius of a nonnegative matrix.

/// Largest matrix handled by the oracle.
pub const MAX_DIM: usize = 5;

const SCAN_POINTS: usize = 8192;

/// Coefficients `c[0..=n]` of `det(λI - A) = Σ c[i] λ^i`, with `c[n] = 1`.
pub fn char_poly(n: usize, a: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    // M_0 = 0; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k.
    let mut m = vec![0.0; n * n];
    for k in 1..=n {
        let mut next = matmul(n, a, &m);
        for i in 0..n {
            next[i * n + i] += c[n - k + 1];
        }
        m = next;
        let am = matmul(n, a, &m);
        let trace: f64 = (0..n).map(|i| am[i * n + i]).sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    out
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &x)| i as f64 * x).collect()
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Largest sign-change root of `c` in `[lo, hi]`, scanning from the right.
fn largest_sign_change(c: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let h = (hi - lo) / SCAN_POINTS as f64;
    let mut right = hi;
    let mut f_right = horner(c, right);
    for i in (0..SCAN_POINTS).rev() {
        let left = lo + i as f64 * h;
        let f_left = horner(c, left);
        if f_left == 0.0 {
            return Some(left);
        }
        if (f_left < 0.0) != (f_right < 0.0) {
            let (mut a, mut b, mut fa) = (left, right, f_left);
            while b - a > 1e-14 * b.abs().max(1.0) {
                let mid = 0.5 * (a + b);
                let fm = horner(c, mid);
                if fm == 0.0 {
                    return Some(mid);
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        right = left;
        f_right = f_left;
    }
    None
}

/// Spectral radius of a nonnegative `n × n` matrix, `n <= MAX_DIM`.
pub fn spectral_radius(n: usize, a: &[f64]) -> f64 {
    assert!((1..=MAX_DIM).contains(&n), "oracle handles 1..=5 dimensions");
    assert!(a.iter().all(|&x| x >= 0.0), "oracle needs a nonnegative matrix");
    let bound = (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().sum::<f64>())
        .fold(0.0, f64::max);
    let (lo, hi) = (-bound - 1.0, bound + 1.0);
    let mut derivs = vec![char_poly(n, a)];
    for _ in 1..n {
        let d = derivative(derivs.last().unwrap());
        derivs.push(d);
    }
    let scale = |c: &[f64], x: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, ci)| (ci * x.abs().max(1.0).powi(i as i32)).abs())
            .fold(0.0, f64::max)
            .max(1.0)
    };
    let mut best = 0.0f64;
    for j in 0..n {
        let Some(r) = largest_sign_change(&derivs[j], lo, hi) else {
            continue;
        };
        // r must also be a root of every lower derivative for it to be an eigenvalue.
        let is_eigenvalue = derivs[..j]
            .iter()
            .all(|c| horner(c, r).abs() <= 1e-7 * scale(c, r));
        if is_eigenvalue {
            best = best.max(r.abs());
        }
    }
    best
}
