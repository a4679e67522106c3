//! The unbounded streaming counter built on the `L`/`R` factorization.
//!
//! Output at time `t` is `S_t + (L y)_t` with `y_s ~ N(0, sigma^2)`, where
//! `sigma = C Delta` is calibrated once to the limiting column norm of `R`.
//! `L` and `L y` are materialized up to a power-of-two horizon that doubles
//! whenever `t` passes it.

use crate::error::{Error, Result};
use crate::factor::{FactorPair, FactorParams, Sides};
use crate::noise::GaussianStream;
use crate::sensitivity::{compute_sensitivity, DEFAULT_TOL};
use crate::series::MulBudget;

/// Privacy parameters and the Gaussian scale they imply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta_priv: f64,
    /// Noise multiplier for unit l2 sensitivity.
    pub c: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta_priv: f64) -> Result<Self> {
        Ok(Self { epsilon, delta_priv, c: gaussian_scale(epsilon, delta_priv)? })
    }
}

/// `sqrt(2 ln(1.25 / delta)) / epsilon`, the classical Gaussian mechanism scale.
pub fn gaussian_scale(epsilon: f64, delta_priv: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta_priv > 0.0 && delta_priv < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta_priv must lie in (0, 1), got {delta_priv}"
        )));
    }
    Ok((2.0 * (1.25 / delta_priv).ln()).sqrt() / epsilon)
}

/// A hint `n0 <= n <= c_factor * n0` on the stream length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideInfo {
    pub n0: usize,
    pub c_factor: f64,
}

impl SideInfo {
    pub fn new(n0: usize, c_factor: f64) -> Result<Self> {
        if n0 == 0 || !(c_factor >= 1.0) || !c_factor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "side information needs n0 >= 1 and c_factor >= 1, got {n0} and {c_factor}"
            )));
        }
        Ok(Self { n0, c_factor })
    }

    /// Number of terms to precompute.
    pub fn horizon(&self) -> usize {
        (self.n0 as f64 * self.c_factor).ceil() as usize
    }
}

pub(crate) fn check_input(t: u64, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::SensitivityViolation { t, value: x })
    }
}

const INITIAL_HORIZON: usize = 2;

/// Streaming state of the log-matrix counter.
#[derive(Debug)]
pub struct LogMatrixCounter {
    pair: FactorPair,
    noise: GaussianStream,
    delta: f64,
    sigma: f64,
    y: Vec<f64>,
    ly: Vec<f64>,
    t: u64,
    sum: f64,
    extensions: u64,
}

impl LogMatrixCounter {
    /// Calibrates `sigma = C Delta` from the exact sensitivity and starts a stream.
    pub fn init(
        params: FactorParams,
        privacy: PrivacyParams,
        seed: u64,
        side: Option<SideInfo>,
    ) -> Result<Self> {
        let delta = compute_sensitivity(params, DEFAULT_TOL)?.delta;
        Self::with_sigma(params, delta, privacy.c * delta, seed, side)
    }

    /// Starts a stream with an explicit noise scale (`sigma = 0` disables noise).
    pub fn with_sigma(
        params: FactorParams,
        delta: f64,
        sigma: f64,
        seed: u64,
        side: Option<SideInfo>,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let mut counter = Self {
            pair: FactorPair::new(params, Sides::Left),
            noise: GaussianStream::new(seed, 0),
            delta,
            sigma,
            y: Vec::new(),
            ly: Vec::new(),
            t: 0,
            sum: 0.0,
            extensions: 0,
        };
        let target = side.map_or(INITIAL_HORIZON, |s| s.horizon().max(INITIAL_HORIZON));
        while counter.horizon() < target {
            counter.grow()?;
        }
        counter.extensions = 0;
        Ok(counter)
    }

    pub fn params(&self) -> FactorParams {
        self.pair.params()
    }

    /// Limiting column norm `Delta` of `R`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of steps taken so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of materialized outputs.
    pub fn horizon(&self) -> usize {
        self.ly.len()
    }

    /// Doublings performed since initialization.
    pub fn extensions(&self) -> u64 {
        self.extensions
    }

    pub fn budget(&self) -> &MulBudget {
        self.pair.budget()
    }

    pub fn left_coeffs(&self) -> &[f64] {
        self.pair.left_coeffs().expect("left side materialized")
    }

    /// `sigma^2 sum_{m < t} L[m]^2` for `t` within the horizon.
    pub fn variance_at(&self, t: usize) -> Result<f64> {
        let l = self.left_coeffs();
        if t == 0 || t > self.horizon() {
            return Err(Error::InvalidArgument(format!(
                "variance_at({t}) outside 1..={}",
                self.horizon()
            )));
        }
        Ok(self.sigma * self.sigma * l[..t].iter().map(|c| c * c).sum::<f64>())
    }

    fn grow(&mut self) -> Result<()> {
        let old = self.horizon();
        let new = (2 * old).max(INITIAL_HORIZON);
        self.pair.extend_to(new)?;
        let start = self.y.len();
        self.y.resize(new, 0.0);
        self.noise.fill(start as u64, &mut self.y[start..]);
        for v in &mut self.y[start..] {
            *v *= self.sigma;
        }
        let l = self.pair.left_coeffs().expect("left side materialized").to_vec();
        let product = self.pair.context_mut().product(&l, &self.y, new);
        self.ly.extend_from_slice(&product[old..new]);
        self.extensions += 1;
        Ok(())
    }

    /// Consumes `x_t` in `[0, 1]` and returns the noisy prefix sum.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        check_input(self.t + 1, x)?;
        self.advance(x)
    }

    /// `step` without the input-range check, for callers that bound
    /// sensitivity themselves.
    pub(crate) fn advance(&mut self, x: f64) -> Result<f64> {
        self.t += 1;
        self.sum += x;
        while self.t as usize > self.horizon() {
            self.grow()?;
        }
        Ok(self.sum + self.ly[self.t as usize - 1])
    }

    /// The noise component `(L y)_t` of the most recent output.
    pub fn last_noise(&self) -> Option<f64> {
        (self.t > 0).then(|| self.ly[self.t as usize - 1])
    }
}

/// `sigma^2 sum_{m < t} L[m]^2` for `t = 1..=t_max` (index `t - 1`).
pub fn variance_profile(params: FactorParams, sigma: f64, t_max: usize) -> Result<Vec<f64>> {
    if t_max == 0 {
        return Err(Error::InvalidArgument("t_max must be positive".into()));
    }
    let mut pair = FactorPair::new(params, Sides::Left);
    pair.extend_to(t_max)?;
    let l = pair.left_coeffs().expect("left side materialized");
    let s2 = sigma * sigma;
    let mut acc = 0.0;
    Ok(l[..t_max]
        .iter()
        .map(|c| {
            acc += c * c;
            s2 * acc
        })
        .collect())
}

/// Monte Carlo error estimates and the estimator that produced them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMetrics {
    /// `(1/n) E[(sum_t e_t^2)^(1/2)]`.
    pub err_l22: f64,
    /// `E[max_t |e_t|]`.
    pub err_linf: f64,
    pub estimator: &'static str,
}

/// Estimates the error metrics treating the noise at each step as
/// independent `N(0, Var_t)`.
///
/// Noise at different steps of the real mechanism is correlated through `L`;
/// for the joint distribution drive [`LogMatrixCounter::step`] over seeds.
pub fn error_metrics(variances: &[f64], trials: usize, seed: u64) -> Result<ErrorMetrics> {
    if variances.is_empty() || trials == 0 {
        return Err(Error::InvalidArgument("error_metrics needs n >= 1 and trials >= 1".into()));
    }
    if variances.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument("variances must be nonnegative".into()));
    }
    let n = variances.len();
    let sd: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let mut noise = GaussianStream::new(seed, 0);
    let mut draws = vec![0.0; n];
    let (mut l22, mut linf) = (0.0, 0.0);
    for trial in 0..trials {
        noise.fill((trial * n) as u64, &mut draws);
        let mut sq = 0.0;
        let mut max = 0.0f64;
        for (z, s) in draws.iter().zip(&sd) {
            let e = z * s;
            sq += e * e;
            max = max.max(e.abs());
        }
        l22 += sq.sqrt();
        linf += max;
    }
    let trials = trials as f64;
    Ok(ErrorMetrics {
        err_l22: l22 / trials / n as f64,
        err_linf: linf / trials,
        estimator: "independent-per-step",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_scale_examples() {
        let c = gaussian_scale(1.0, 1e-6).unwrap();
        assert!((c - 5.298_802_526_850_474).abs() < 1e-12, "{c}");
        assert_eq!(gaussian_scale(2.0, 1e-6).unwrap(), c / 2.0);
        let c = gaussian_scale(0.1, 0.5).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert!(gaussian_scale(0.0, 1e-6).is_err());
        assert!(gaussian_scale(1.0, 1.0).is_err());
        assert!(gaussian_scale(1.0, 0.0).is_err());
    }

    #[test]
    fn scale_is_monotone() {
        let mut last = f64::INFINITY;
        for d in [1e-9, 1e-6, 1e-3, 0.1, 0.5] {
            let c = gaussian_scale(1.0, d).unwrap();
            assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn zero_noise_gives_exact_sums() {
        let mut counter = LogMatrixCounter::with_sigma(FactorParams::default(), 1.0, 0.0, 3, None).unwrap();
        assert_eq!(counter.horizon(), 2);
        let mut sum = 0.0;
        for t in 0..300 {
            let x = ((t * 7) % 11) as f64 / 10.0;
            sum += x;
            assert_eq!(counter.step(x).unwrap(), sum);
        }
    }

    #[test]
    fn rejects_inputs_outside_unit_interval() {
        let mut counter = LogMatrixCounter::with_sigma(FactorParams::default(), 1.0, 1.0, 3, None).unwrap();
        counter.step(1.0).unwrap();
        assert_eq!(counter.step(1.5), Err(Error::SensitivityViolation { t: 2, value: 1.5 }));
        assert!(counter.step(-0.1).is_err());
    }

    #[test]
    fn reproducible_and_prefix_stable() {
        let params = FactorParams::default();
        let run = |n: usize| {
            let mut c = LogMatrixCounter::with_sigma(params, 1.0, 2.0, 11, None).unwrap();
            (0..n).map(|_| c.step(0.0).unwrap()).collect::<Vec<_>>()
        };
        let short = run(100);
        let long = run(1000);
        assert_eq!(short, run(100));
        assert_eq!(&long[..100], &short[..]);
    }

    #[test]
    fn variance_examples() {
        let counter = LogMatrixCounter::with_sigma(FactorParams::default(), 1.0, 3.0, 1, None).unwrap();
        assert_eq!(counter.variance_at(1).unwrap(), 9.0);
        let profile = variance_profile(FactorParams::default(), 3.0, 1 << 12).unwrap();
        assert_eq!(profile[0], 9.0);
        assert!(profile.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn error_metric_examples() {
        let m = error_metrics(&[0.0; 5], 10, 1).unwrap();
        assert_eq!((m.err_l22, m.err_linf), (0.0, 0.0));
        let m = error_metrics(&[1.0], 1_000_000, 2).unwrap();
        let half_normal = (2.0 / std::f64::consts::PI).sqrt();
        assert!((m.err_linf / half_normal - 1.0).abs() < 0.01, "{m:?}");
        let v = vec![1.0; 64];
        let a = error_metrics(&v[..8], 20_000, 5).unwrap().err_linf;
        let b = error_metrics(&v, 20_000, 5).unwrap().err_linf;
        assert!(b >= a);
    }

    #[test]
    fn side_information_does_not_change_outputs() {
        let params = FactorParams::default();
        let mut plain = LogMatrixCounter::with_sigma(params, 1.0, 1.5, 9, None).unwrap();
        let side = SideInfo::new(300, 1.5).unwrap();
        let mut hinted = LogMatrixCounter::with_sigma(params, 1.0, 1.5, 9, Some(side)).unwrap();
        assert_eq!(hinted.horizon(), 512);
        for t in 0..700 {
            let x = (t % 2) as f64;
            assert_eq!(plain.step(x).unwrap(), hinted.step(x).unwrap());
        }
        assert_eq!(hinted.extensions(), 1);
        assert!(SideInfo::new(0, 2.0).is_err());
        assert!(SideInfo::new(10, 0.5).is_err());
    }

    #[test]
    fn empirical_variance_matches_profile() {
        let params = FactorParams::default();
        let checkpoints = [1usize, 7, 64, 200];
        let mut acc = [0.0; 4];
        let runs = 4000;
        for seed in 0..runs {
            let mut c = LogMatrixCounter::with_sigma(params, 1.0, 1.0, seed, None).unwrap();
            for t in 1..=200 {
                c.step(0.0).unwrap();
                if let Some(k) = checkpoints.iter().position(|&p| p == t) {
                    acc[k] += c.last_noise().unwrap().powi(2);
                }
            }
        }
        let profile = variance_profile(params, 1.0, 200).unwrap();
        for (k, &t) in checkpoints.iter().enumerate() {
            let rel = acc[k] / runs as f64 / profile[t - 1] - 1.0;
            // sd of the sample variance is sqrt(2 / runs) ~ 0.022
            assert!(rel.abs() < 0.1, "t = {t}: {rel}");
        }
    }
}
