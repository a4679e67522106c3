//! Asymptotic expansion of the coefficients of `f(z; gamma, delta_log)`:
//!
//! ```text
//! [z^m] f ~ (m pi)^(-1/2) (ln m)^gamma (2 ln ln m)^delta_log
//!           * (1 + sum_{k=1}^{K} e_k(ln ln m) / (ln m ln ln m)^k)
//! ```
//!
//! with `e_k(x) = sqrt(pi) D_k E_k(x)`, where `D_k` is the `k`-th derivative
//! of `1 / Gamma(-s)` at `s = -1/2` and `E_k(x)` is the `k`-th Taylor
//! coefficient of `g(u) = (1 - x u)^gamma (1 + ln(1 - x u) / x)^delta_log`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::factor::{FactorPair, FactorParams, Sides};
use crate::mechanism::{check_input, PrivacyParams, SideInfo};
use crate::noise::GaussianStream;
use crate::sensitivity::{compute_sensitivity, DEFAULT_TOL};
use crate::series::{dense, MulBudget, QuotientStream};
use crate::special::polygamma_half;

/// Smallest index for which `ln ln m` is comfortably positive.
pub const MIN_INDEX: usize = 16;

/// Default expansion order.
pub const DEFAULT_ORDER: usize = 4;

/// Default switch tolerance.
pub const DEFAULT_ETA: f64 = 1e-3;

/// `d^k/ds^k (1 / Gamma(-s))` at `s = -1/2` for `k = 0..=order`.
pub fn recip_gamma_derivs(order: usize) -> Vec<f64> {
    // ln Gamma(1/2 - u) = ln sqrt(pi) + sum_j psi^(j-1)(1/2) (-u)^j / j!
    let n = order + 1;
    let mut exponent = vec![0.0; n];
    let mut factorial = 1.0;
    for (j, c) in exponent.iter_mut().enumerate().skip(1) {
        factorial *= j as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *c = -sign * polygamma_half(j as u32 - 1) / factorial;
    }
    let taylor = dense::exp(&exponent, n);
    let mut factorial = 1.0;
    taylor
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k > 0 {
                factorial *= k as f64;
            }
            factorial * c / PI.sqrt()
        })
        .collect()
}

/// Taylor coefficients `E_0..=E_order` of `g(u)` at the given `x`.
pub fn e_taylor(x: f64, order: usize, gamma: f64, delta_log: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("expansion needs x > 0, got {x}")));
    }
    let n = order + 1;
    let first = dense::pow(&[1.0, -x], gamma, n);
    if delta_log == 0.0 {
        return Ok(first);
    }
    // 1 + ln(1 - x u) / x = 1 - sum_{j>=1} x^(j-1) u^j / j
    let mut inner = vec![1.0; n];
    let mut power = 1.0;
    for (j, c) in inner.iter_mut().enumerate().skip(1) {
        *c = -power / j as f64;
        power *= x;
    }
    let second = dense::pow(&inner, delta_log, n);
    Ok(dense::mul(&first, &second, n))
}

/// Precomputed constants for evaluating the expansion at a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionContext {
    params: FactorParams,
    order: usize,
    /// `sqrt(pi) D_k`.
    scaled_derivs: Vec<f64>,
}

impl ExpansionContext {
    pub fn new(params: FactorParams, order: usize) -> Result<Self> {
        let FactorParams { gamma, delta_log } = params;
        if gamma >= 0.0 && gamma.fract() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "expansion needs gamma outside {{0, 1, ...}}, got {gamma}"
            )));
        }
        if delta_log > 0.0 && delta_log.fract() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "expansion needs delta_log outside {{1, 2, ...}}, got {delta_log}"
            )));
        }
        let scaled_derivs = recip_gamma_derivs(order)
            .into_iter()
            .map(|d| d * PI.sqrt())
            .collect();
        Ok(Self { params, order, scaled_derivs })
    }

    pub fn params(&self) -> FactorParams {
        self.params
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `sqrt(pi) D_k` for `k = 0..=order`.
    pub fn scaled_derivs(&self) -> &[f64] {
        &self.scaled_derivs
    }

    /// Correction factor `1 + sum_k e_k(x) / (L x)^k` at `L = ln m`, `x = ln L`.
    fn correction(&self, log_m: f64, x: f64) -> Result<f64> {
        let FactorParams { gamma, delta_log } = self.params;
        let e = e_taylor(x, self.order, gamma, delta_log)?;
        let scale = 1.0 / (log_m * x);
        let mut power = 1.0;
        let mut sum = 1.0;
        for k in 1..=self.order {
            power *= scale;
            sum += self.scaled_derivs[k] * e[k] * power;
        }
        Ok(sum)
    }

    /// Expansion of `[z^m] f` truncated after order `K`.
    pub fn coeff(&self, m: usize) -> Result<f64> {
        if m < MIN_INDEX {
            return Err(Error::Domain(format!(
                "expansion needs m >= {MIN_INDEX}, got {m}"
            )));
        }
        let FactorParams { gamma, delta_log } = self.params;
        let mf = m as f64;
        let log_m = mf.ln();
        let x = log_m.ln();
        let lead = (mf * PI).sqrt().recip() * log_m.powf(gamma) * (2.0 * x).powf(delta_log);
        Ok(lead * self.correction(log_m, x)?)
    }

    /// `ln([z^m] f)^2` expressed through `v = ln ln m`, for integrating the
    /// squared expansion over `m` in the variable `v`. Returns the integrand
    /// `r(m)^2 dm / dv` in log form, or `None` where the correction factor
    /// is not positive.
    pub(crate) fn log_square_density(&self, v: f64) -> Result<Option<f64>> {
        let FactorParams { gamma, delta_log } = self.params;
        let log_m = v.exp();
        let c = self.correction(log_m, v)?;
        if !(c > 0.0) {
            return Ok(None);
        }
        Ok(Some(
            v * (2.0 * gamma + 1.0) + 2.0 * delta_log * (2.0 * v).ln() + 2.0 * c.ln() - PI.ln(),
        ))
    }
}

/// Expansion of `[z^m] f` at order `ctx.order()`.
pub fn approx_coeff(m: usize, ctx: &ExpansionContext) -> Result<f64> {
    ctx.coeff(m)
}

/// Streaming counter that computes `R` exactly until the expansion agrees
/// with it to within `eta`, then extends `R` by the expansion. `L` is always
/// `1 / ((1 - z) R)`, so the factorization stays valid after the switch.
#[derive(Debug)]
pub struct ApproxCounter {
    pair: FactorPair,
    expansion: ExpansionContext,
    eta: f64,
    r_hat: Vec<f64>,
    ones: Vec<f64>,
    l_hat: QuotientStream,
    switched_at: Option<u64>,
    noise: GaussianStream,
    delta: f64,
    sigma: f64,
    y: Vec<f64>,
    ly: Vec<f64>,
    t: u64,
    sum: f64,
}

impl ApproxCounter {
    /// Calibrates `sigma = (1 + eta) C Delta` and starts a stream.
    pub fn init(
        params: FactorParams,
        privacy: PrivacyParams,
        order: usize,
        eta: f64,
        seed: u64,
        side: Option<SideInfo>,
    ) -> Result<Self> {
        let delta = compute_sensitivity(params, DEFAULT_TOL)?.delta;
        Self::with_sigma(params, order, eta, delta, privacy.c * delta, seed, side)
    }

    /// Starts a stream whose noise scale is `(1 + eta) base_sigma`.
    pub fn with_sigma(
        params: FactorParams,
        order: usize,
        eta: f64,
        delta: f64,
        base_sigma: f64,
        seed: u64,
        side: Option<SideInfo>,
    ) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        let sigma = (1.0 + eta) * base_sigma;
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let mut counter = Self {
            pair: FactorPair::new(params, Sides::Right),
            expansion: ExpansionContext::new(params, order)?,
            eta,
            r_hat: Vec::new(),
            ones: Vec::new(),
            l_hat: QuotientStream::new(),
            switched_at: None,
            noise: GaussianStream::new(seed, 0),
            delta,
            sigma,
            y: Vec::new(),
            ly: Vec::new(),
            t: 0,
            sum: 0.0,
        };
        let target = side.map_or(2, |s| s.horizon().max(2));
        while counter.horizon() < target {
            counter.grow()?;
        }
        Ok(counter)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.ly.len()
    }

    /// Horizon at which the expansion took over, if it has.
    pub fn switched_at(&self) -> Option<u64> {
        self.switched_at
    }

    pub fn budget(&self) -> &MulBudget {
        self.pair.budget()
    }

    pub fn right_coeffs(&self) -> &[f64] {
        &self.r_hat
    }

    pub fn left_coeffs(&self) -> &[f64] {
        self.l_hat.quotient()
    }

    /// `sigma^2 sum_{m < t} Lhat[m]^2` for `t` within the horizon.
    pub fn variance_at(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.horizon() {
            return Err(Error::InvalidArgument(format!(
                "variance_at({t}) outside 1..={}",
                self.horizon()
            )));
        }
        let l = self.left_coeffs();
        Ok(self.sigma * self.sigma * l[..t].iter().map(|c| c * c).sum::<f64>())
    }

    fn try_switch(&mut self) -> Result<()> {
        let old = self.r_hat.len();
        if self.switched_at.is_some() || old <= MIN_INDEX {
            return Ok(());
        }
        let exact = self.r_hat[old - 1];
        let approx = self.expansion.coeff(old - 1)?;
        if ((approx - exact) / exact).abs() <= self.eta {
            self.switched_at = Some(old as u64);
        }
        Ok(())
    }

    fn grow(&mut self) -> Result<()> {
        let old = self.horizon();
        let new = (2 * old).max(2);
        self.try_switch()?;
        if self.switched_at.is_some() {
            for m in old..new {
                self.r_hat.push(self.expansion.coeff(m)?);
            }
        } else {
            self.pair.extend_to(new)?;
            let r = self.pair.right_coeffs().expect("right side materialized");
            self.r_hat.extend_from_slice(&r[old..new]);
        }
        self.ones.resize(new, 1.0);
        let ctx = self.pair.context_mut();
        self.l_hat.extend(ctx, &self.ones, &self.r_hat, new)?;

        self.y.resize(new, 0.0);
        self.noise.fill(old as u64, &mut self.y[old..]);
        for v in &mut self.y[old..] {
            *v *= self.sigma;
        }
        let product = ctx.product(self.l_hat.quotient(), &self.y, new);
        self.ly.extend_from_slice(&product[old..new]);
        Ok(())
    }

    /// Consumes `x_t` in `[0, 1]` and returns the noisy prefix sum.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        check_input(self.t + 1, x)?;
        self.t += 1;
        self.sum += x;
        while self.t as usize > self.horizon() {
            self.grow()?;
        }
        Ok(self.sum + self.ly[self.t as usize - 1])
    }
}
