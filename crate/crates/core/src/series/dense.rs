//! Quadratic-time series arithmetic for short prefixes.
//!
//! Used where only a handful of terms are needed (the expansion
//! coefficients in `approx`) and as a cross-check for the FFT paths.

/// First `n` coefficients of `a * b`.
pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// First `n` coefficients of `log(a)` for `a[0] = 1`.
///
/// Uses `m l_m = m a_m - sum_{k=1}^{m-1} k l_k a_{m-k}`.
pub fn log(a: &[f64], n: usize) -> Vec<f64> {
    let at = |m: usize| a.get(m).copied().unwrap_or(0.0);
    let mut l = vec![0.0; n];
    for m in 1..n {
        let mut acc = m as f64 * at(m);
        for k in 1..m {
            acc -= k as f64 * l[k] * at(m - k);
        }
        l[m] = acc / m as f64;
    }
    l
}

/// First `n` coefficients of `exp(h)` for `h[0] = 0`.
///
/// Uses `m g_m = sum_{k=1}^m k h_k g_{m-k}`.
pub fn exp(h: &[f64], n: usize) -> Vec<f64> {
    let ht = |m: usize| h.get(m).copied().unwrap_or(0.0);
    let mut g = vec![0.0; n];
    if n == 0 {
        return g;
    }
    g[0] = 1.0;
    for m in 1..n {
        let mut acc = 0.0;
        for k in 1..=m {
            acc += k as f64 * ht(k) * g[m - k];
        }
        g[m] = acc / m as f64;
    }
    g
}

/// First `n` coefficients of `a^s` for `a[0] = 1`, by Miller's recurrence.
pub fn pow(a: &[f64], s: f64, n: usize) -> Vec<f64> {
    let at = |m: usize| a.get(m).copied().unwrap_or(0.0);
    let mut p = vec![0.0; n];
    if n == 0 {
        return p;
    }
    p[0] = 1.0;
    for m in 1..n {
        let mut acc = 0.0;
        for k in 1..=m {
            acc += (s * k as f64 - (m - k) as f64) * at(k) * p[m - k];
        }
        p[m] = acc / m as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_identities() {
        assert_eq!(mul(&[1.0, 1.0], &[1.0, 1.0], 3), vec![1.0, 2.0, 1.0]);
        let l = log(&[1.0, 1.0], 4);
        assert!((l[3] - 1.0 / 3.0).abs() < 1e-15);
        let e = exp(&l, 4);
        assert!((e[1] - 1.0).abs() < 1e-15 && e[2].abs() < 1e-15 && e[3].abs() < 1e-15);
        let p = pow(&[1.0, -1.0], -0.5, 3);
        assert_eq!(p, vec![1.0, 0.5, 0.375]);
    }
}
