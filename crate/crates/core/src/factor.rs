//! Taylor coefficients of `f(z; gamma, delta) = f1 * f2^gamma * f3^delta` and
//! of the factor pair `L = f(-gamma, -delta)`, `R = f(gamma, delta)`.
//!
//! With `f1 = (1 - z)^(-1/2)`, `f2 = (1/z) ln(1/(1 - z))` and
//! `f3 = (2/z) ln((1/z) ln(1/(1 - z)))` one has `f_L f_R = f1^2 = 1/(1 - z)`,
//! so the lower-triangular Toeplitz matrices of `L` and `R` multiply to the
//! all-ones lower-triangular counting matrix.

use crate::error::{Error, Result};
use crate::series::{CoeffSeries, MulBudget, QuotientStream, SeriesContext};

/// Exponents of `f2` and `f3`.
///
/// The log exponent is called `delta_log` to keep it apart from the privacy
/// parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorParams {
    pub gamma: f64,
    pub delta_log: f64,
}

/// Default `gamma`, i.e. `alpha = 0.01`.
pub const DEFAULT_GAMMA: f64 = -0.51;

impl FactorParams {
    pub fn new(gamma: f64, delta_log: f64) -> Result<Self> {
        if !gamma.is_finite() || !delta_log.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "factor exponents must be finite, got gamma = {gamma}, delta_log = {delta_log}"
            )));
        }
        Ok(Self { gamma, delta_log })
    }

    /// `delta_log = 0`: cheapest to compute.
    pub fn fast(gamma: f64) -> Self {
        Self { gamma, delta_log: 0.0 }
    }

    /// `delta_log = -gamma`.
    pub fn balanced(gamma: f64) -> Self {
        Self { gamma, delta_log: -gamma }
    }

    /// `delta_log = -6 gamma / 5`: the first two coefficients of both factors
    /// equal those of `(1 - z)^(-1/2)`.
    pub fn large_n(gamma: f64) -> Self {
        Self { gamma, delta_log: -6.0 * gamma / 5.0 }
    }

    /// `alpha = -1/2 - gamma`; positive exactly when `R` is square-summable.
    pub fn alpha(&self) -> f64 {
        -0.5 - self.gamma
    }

    /// Parameters of the left factor.
    pub fn left(&self) -> Self {
        Self { gamma: -self.gamma, delta_log: -self.delta_log }
    }
}

impl Default for FactorParams {
    fn default() -> Self {
        Self::balanced(DEFAULT_GAMMA)
    }
}

fn check_len(t: usize) -> Result<()> {
    if t == 0 {
        Err(Error::InvalidArgument("series length must be positive".into()))
    } else {
        Ok(())
    }
}

fn extend_f1(f1: &mut Vec<f64>, t: usize) {
    if f1.is_empty() && t > 0 {
        f1.push(1.0);
    }
    while f1.len() < t {
        let m = f1.len() as f64;
        let prev = f1[f1.len() - 1];
        f1.push((1.0 - 0.5 / m) * prev);
    }
}

/// First `t` coefficients of `(1 - z)^(-1/2)`.
pub fn coeffs_f1(t: usize) -> Result<CoeffSeries> {
    check_len(t)?;
    let mut f1 = Vec::with_capacity(t);
    extend_f1(&mut f1, t);
    CoeffSeries::new(f1)
}

/// First `t` coefficients of `f2(z; 1)`, i.e. `1 / (m + 1)`.
pub fn coeffs_f2_base(t: usize) -> Result<CoeffSeries> {
    check_len(t)?;
    CoeffSeries::from_fn(t, f2_coeff)
}

fn f2_coeff(m: usize) -> f64 {
    1.0 / (m + 1) as f64
}

fn f2_derivative_coeff(m: usize) -> f64 {
    (m + 1) as f64 / (m + 2) as f64
}

/// First `t` coefficients of `f3(z; 1)`.
pub fn coeffs_f3_base(t: usize) -> Result<CoeffSeries> {
    check_len(t)?;
    let mut ctx = SeriesContext::new();
    let log_f2 = ctx.log_series(&coeffs_f2_base(t + 1)?, t + 1)?;
    CoeffSeries::from_fn(t, |m| 2.0 * log_f2[m + 1])
}

/// First `t` coefficients of `f(z; gamma, delta_log)`.
pub fn coeffs_f(params: FactorParams, t: usize) -> Result<CoeffSeries> {
    check_len(t)?;
    let mut gen = FactorPair::new(params, Sides::Right);
    gen.extend_to(t)?;
    gen.right()?.truncated(t)
}

/// Which factors a [`FactorPair`] materializes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sides {
    Left,
    Right,
    Both,
}

impl Sides {
    fn left(self) -> bool {
        matches!(self, Sides::Left | Sides::Both)
    }

    fn right(self) -> bool {
        matches!(self, Sides::Right | Sides::Both)
    }
}

/// Incrementally doubled prefixes of `L` and `R`.
///
/// Every extension doubles the length and leaves the existing prefixes
/// bitwise unchanged. Per doubling to `n` terms (left side only) the work is
/// one quotient-stream step for `f2'/f2`, a logarithm of `f3` (skipped when
/// `delta_log = 0`), one warm-started exponential and one product with `f1`.
#[derive(Debug)]
pub struct FactorPair {
    params: FactorParams,
    sides: Sides,
    ctx: SeriesContext,
    f1: Vec<f64>,
    f2_quotient: QuotientStream,
    log_f2: Vec<f64>,
    f3: Vec<f64>,
    log_f3: Vec<f64>,
    exponent: Vec<f64>,
    exp_left: Vec<f64>,
    exp_right: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl FactorPair {
    pub fn new(params: FactorParams, sides: Sides) -> Self {
        Self {
            params,
            sides,
            ctx: SeriesContext::new(),
            f1: vec![1.0],
            f2_quotient: QuotientStream::new(),
            log_f2: vec![0.0],
            f3: Vec::new(),
            log_f3: vec![0.0],
            exponent: vec![0.0],
            exp_left: vec![1.0],
            exp_right: vec![1.0],
            left: vec![1.0],
            right: vec![1.0],
        }
    }

    pub fn params(&self) -> FactorParams {
        self.params
    }

    pub fn sides(&self) -> Sides {
        self.sides
    }

    /// Current number of materialized coefficients (a power of two).
    pub fn len(&self) -> usize {
        self.exponent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn budget(&self) -> &MulBudget {
        self.ctx.budget()
    }

    pub fn context_mut(&mut self) -> &mut SeriesContext {
        &mut self.ctx
    }

    pub fn left_coeffs(&self) -> Option<&[f64]> {
        self.sides.left().then_some(self.left.as_slice())
    }

    pub fn right_coeffs(&self) -> Option<&[f64]> {
        self.sides.right().then_some(self.right.as_slice())
    }

    pub fn left(&self) -> Result<CoeffSeries> {
        self.left_coeffs()
            .map(|c| CoeffSeries::new(c.to_vec()))
            .unwrap_or_else(|| Err(Error::InvalidArgument("left factor not materialized".into())))
    }

    pub fn right(&self) -> Result<CoeffSeries> {
        self.right_coeffs()
            .map(|c| CoeffSeries::new(c.to_vec()))
            .unwrap_or_else(|| Err(Error::InvalidArgument("right factor not materialized".into())))
    }

    /// Doubles until at least `t` coefficients are available.
    pub fn extend_to(&mut self, t: usize) -> Result<()> {
        while self.len() < t {
            self.extend()?;
        }
        Ok(())
    }

    /// Doubles the materialized length.
    pub fn extend(&mut self) -> Result<()> {
        let t = self.len();
        let n = 2 * t;
        let FactorParams { gamma, delta_log } = self.params;

        // q = f2'/f2 to n terms gives ln f2 to n + 1 terms and f3 to n terms.
        let f2: Vec<f64> = (0..=n).map(f2_coeff).collect();
        let df2: Vec<f64> = (0..n).map(f2_derivative_coeff).collect();
        self.f2_quotient.extend(&mut self.ctx, &df2, &f2, n)?;
        let q = self.f2_quotient.quotient();
        for m in self.log_f2.len()..n {
            self.log_f2.push(q[m - 1] / m as f64);
        }

        if delta_log != 0.0 {
            for m in self.f3.len()..n {
                self.f3.push(2.0 * q[m] / (m + 1) as f64);
            }
            let log_f3 = self.ctx.log_vec(&self.f3, n)?;
            self.log_f3.extend_from_slice(&log_f3[t..n]);
        }

        for m in t..n {
            let mut p = gamma * self.log_f2[m];
            if delta_log != 0.0 {
                p += delta_log * self.log_f3[m];
            }
            self.exponent.push(p);
        }
        extend_f1(&mut self.f1, n);

        if self.sides.left() {
            let neg: Vec<f64> = self.exponent.iter().map(|p| -p).collect();
            self.exp_left = self.ctx.exp_vec(&neg, n, Some(&self.exp_left))?;
            let product = self.ctx.product(&self.f1, &self.exp_left, n);
            self.left.extend_from_slice(&product[t..n]);
        }
        if self.sides.right() {
            self.exp_right = self.ctx.exp_vec(&self.exponent, n, Some(&self.exp_right))?;
            let product = self.ctx.product(&self.f1, &self.exp_right, n);
            self.right.extend_from_slice(&product[t..n]);
        }
        Ok(())
    }
}

/// `sqrt(sum_{m < t} L[m]^2)`: the largest row norm of the `t x t` matrix.
pub fn row_norm_prefix(l: &CoeffSeries, t: usize) -> Result<f64> {
    if t == 0 || t > l.len() {
        return Err(Error::InvalidArgument(format!(
            "row norm prefix {t} out of range 1..={}",
            l.len()
        )));
    }
    Ok(l.as_slice()[..t].iter().map(|c| c * c).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev_from_ones(l: &[f64], r: &[f64], n: usize) -> f64 {
        let mut ctx = SeriesContext::new();
        ctx.product(l, r, n)
            .iter()
            .map(|c| (c - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Brute-force coefficients through dense Miller recurrences, independent
    /// of the FFT pipeline.
    fn dense_f(gamma: f64, delta: f64, t: usize) -> Vec<f64> {
        use crate::series::dense;
        let f1 = dense::pow(&[1.0, -1.0], -0.5, t);
        let f2: Vec<f64> = (0..=t).map(f2_coeff).collect();
        let log_f2 = dense::log(&f2, t + 1);
        let f3: Vec<f64> = (0..t).map(|m| 2.0 * log_f2[m + 1]).collect();
        let a = dense::pow(&f2[..t], gamma, t);
        let b = dense::pow(&f3, delta, t);
        dense::mul(&f1, &dense::mul(&a, &b, t), t)
    }

    #[test]
    fn f1_examples() {
        assert_eq!(coeffs_f1(1).unwrap().as_slice(), &[1.0]);
        assert_eq!(coeffs_f1(3).unwrap().as_slice(), &[1.0, 0.5, 0.375]);
        let f1 = coeffs_f1(64).unwrap();
        // (-1)^m binom(-1/2, m) = prod_{j=1}^{m} (2j - 1) / (2j).
        for m in 0..64 {
            let b: f64 = (1..=m).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product();
            assert!((f1[m] - b).abs() <= 1e-14, "m = {m}");
        }
        assert!(matches!(coeffs_f1(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn f2_and_f3_examples() {
        assert_eq!(coeffs_f2_base(4).unwrap().as_slice(), &[1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(coeffs_f2_base(1).unwrap().as_slice(), &[1.0]);

        let f3 = coeffs_f3_base(3).unwrap();
        assert!((f3[0] - 1.0).abs() < 1e-15);
        assert!((f3[1] - 5.0 / 12.0).abs() < 1e-15);
        assert!((f3[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn f_examples() {
        let f1 = coeffs_f1(8).unwrap();
        let f = coeffs_f(FactorParams::new(0.0, 0.0).unwrap(), 8).unwrap();
        assert!(f.max_abs_diff(&f1) < 1e-15);

        let f = coeffs_f(FactorParams::fast(-0.51), 2).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && (f[1] - 0.245).abs() < 1e-15);

        let f = coeffs_f(FactorParams::new(-0.5, 0.6).unwrap(), 2).unwrap();
        assert!((f[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_dense_oracle() {
        for &delta in &[0.0, 0.51, 0.612, -0.3] {
            let params = FactorParams::new(-0.51, delta).unwrap();
            let fast = coeffs_f(params, 200).unwrap();
            let slow = dense_f(-0.51, delta, 200);
            let err = fast.max_abs_diff(&CoeffSeries::new(slow).unwrap());
            assert!(err < 1e-12, "delta = {delta}: {err}");
        }
    }

    #[test]
    fn pair_prefix_stability_and_validity() {
        let mut pair = FactorPair::new(FactorParams::fast(-0.51), Sides::Both);
        pair.extend().unwrap();
        assert_eq!(pair.len(), 2);
        let l2 = pair.left_coeffs().unwrap().to_vec();
        let r2 = pair.right_coeffs().unwrap().to_vec();
        assert!((r2[1] - 0.245).abs() < 1e-15);
        pair.extend().unwrap();
        assert_eq!(&pair.left_coeffs().unwrap()[..2], &l2[..]);
        assert_eq!(&pair.right_coeffs().unwrap()[..2], &r2[..]);
        let dev = max_dev_from_ones(pair.left_coeffs().unwrap(), pair.right_coeffs().unwrap(), 4);
        assert!(dev <= 1e-12);
    }

    #[test]
    fn joint_validity_across_presets() {
        for params in [
            FactorParams::fast(-0.51),
            FactorParams::balanced(-0.51),
            FactorParams::large_n(-0.51),
        ] {
            let mut pair = FactorPair::new(params, Sides::Both);
            while pair.len() < 4096 {
                pair.extend().unwrap();
                let n = pair.len();
                let dev = max_dev_from_ones(pair.left_coeffs().unwrap(), pair.right_coeffs().unwrap(), n);
                assert!(dev <= 1e-9, "{params:?} n = {n}: {dev}");
            }
        }
    }

    #[test]
    fn large_n_preset_matches_f1_to_first_order() {
        let mut pair = FactorPair::new(FactorParams::large_n(-0.51), Sides::Both);
        pair.extend_to(2).unwrap();
        assert!((pair.left_coeffs().unwrap()[1] - 0.5).abs() <= 1e-12);
        assert!((pair.right_coeffs().unwrap()[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn row_norm_examples() {
        let l = CoeffSeries::new(vec![1.0, 0.3]).unwrap();
        assert_eq!(row_norm_prefix(&l, 1).unwrap(), 1.0);
        let f1 = coeffs_f1(1024).unwrap();
        let direct: f64 = (0..1024).map(|m| f1[m] * f1[m]).sum();
        assert!((row_norm_prefix(&f1, 1024).unwrap().powi(2) - direct).abs() < 1e-12);
        assert!(row_norm_prefix(&l, 3).is_err());
    }

    #[test]
    fn doubling_budget_per_preset() {
        let n = 1 << 14;
        for (params, bound) in [
            (FactorParams::fast(-0.51), 13.0),
            (FactorParams::balanced(-0.51), 17.5),
            (FactorParams::large_n(-0.51), 24.0),
        ] {
            let mut pair = FactorPair::new(params, Sides::Left);
            pair.extend_to(n).unwrap();
            // One more M(t) per doubling is reserved for the noise product.
            let total = pair.budget().in_units_of(n) + 2.0;
            assert!(total <= bound, "{params:?}: {total} M(n)");
        }
    }
}
