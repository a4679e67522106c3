//! The limiting column norm `Delta^2 = sum_m ([z^m] f_R)^2` of the right
//! factor, computed as the mean of `|f_R|^2` over the unit circle.
//!
//! With `z = e^{i(pi - 2 omega)}` the integral becomes
//!
//! ```text
//! Delta^2 = 2^(1 + 2 delta) / pi * int_0^{pi/2} J(omega) d omega,
//! J = I1^-1 I2^(-1/2 - alpha) (I3 + (I4 - offset)^2)^delta,
//! ```
//!
//! with `I1 = 2 cos omega`, `I2 = ln^2 I1 + omega^2`, `I3 = ln^2(I2) / 4`,
//! `I4 = atan(-omega / ln I1) + 2 omega`, and `offset = pi` past `omega = pi/3`.
//!
//! Nearly all of the mass sits where `I1` is astronomically small: `J` decays
//! only like `1 / (I1 |ln I1|^(1 + 2 alpha))`. Past the split point the
//! integral is therefore taken in `L = -ln I1`, and for `L > 1` in `u = ln L`,
//! where the integrand is evaluated in log form and decays like
//! `exp(-2 alpha u)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use crate::approx::ExpansionContext;
use crate::error::{Error, Result};
use crate::factor::{FactorPair, FactorParams, Sides};
use crate::quad::{exp_sinh, gauss_kronrod, Quadrature};

/// Default relative tolerance for [`compute_sensitivity`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// The limiting squared column norm of `R` and its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityResult {
    pub delta_sq: f64,
    pub delta: f64,
    pub quad_error_estimate: f64,
    pub params: FactorParams,
}

/// `J(omega)` for `omega` in `(-pi/2, pi/2)`.
pub fn integrand(omega: f64, params: FactorParams) -> Result<f64> {
    let w = omega.abs();
    if !(w < FRAC_PI_2) {
        return Err(Error::SingularPoint(omega));
    }
    let i1 = 2.0 * w.cos();
    let ln_i1 = i1.ln();
    Ok(i1.recip() * branch_factor(-ln_i1, w, params))
}

/// `I2^(-1/2 - alpha) (I3 + (I4 - offset)^2)^delta` written in `L = -ln I1`.
fn branch_factor(l: f64, w: f64, params: FactorParams) -> f64 {
    let i2 = l * l + w * w;
    let mut value = i2.powf(-0.5 - params.alpha());
    if params.delta_log != 0.0 {
        let angle = shifted_angle(l, w);
        let ln_i2 = i2.ln();
        value *= (0.25 * ln_i2 * ln_i2 + angle * angle).powf(params.delta_log);
    }
    value
}

/// `I4 - offset` with `I4 = atan(omega / L) + 2 omega`.
fn shifted_angle(l: f64, w: f64) -> f64 {
    if l > 0.0 {
        (w / l).atan() + 2.0 * w - PI
    } else if l < 0.0 {
        (w / l).atan() + 2.0 * w
    } else {
        2.0 * w - FRAC_PI_2
    }
}

/// Integrand in `L = -ln(2 cos omega)`: `J d omega = G(L) dL`.
fn integrand_l(l: f64, params: FactorParams) -> f64 {
    let c = 0.5 * (-l).exp();
    let w = c.acos();
    let sin_w = (1.0 - c * c).sqrt();
    branch_factor(l, w, params) / (2.0 * sin_w)
}

/// `ln(L G(L))` at `L = e^u`, stable for any `u >= 0`.
fn log_integrand_u(u: f64, params: FactorParams) -> f64 {
    let l = u.exp();
    let c = 0.5 * (-l).exp();
    let w = c.acos();
    let sin_w = (1.0 - c * c).sqrt();
    let ratio = w * (-u).exp();
    let ln_i2 = 2.0 * u + (ratio * ratio).ln_1p();
    let mut log = u - (0.5 + params.alpha()) * ln_i2 - (2.0 * sin_w).ln();
    if params.delta_log != 0.0 {
        let angle = ratio.atan() + 2.0 * w - PI;
        log += params.delta_log * (0.25 * ln_i2 * ln_i2 + angle * angle).ln();
    }
    log
}

fn check_convergent(params: FactorParams) -> Result<()> {
    if params.alpha() > 0.0 {
        Ok(())
    } else {
        Err(Error::DivergentSensitivity { gamma: params.gamma })
    }
}

/// `Delta^2` with the default split at `pi/3`.
pub fn compute_sensitivity(params: FactorParams, tol: f64) -> Result<SensitivityResult> {
    compute_sensitivity_split(params, tol, FRAC_PI_3)
}

/// `Delta^2`, integrating `[0, split]` in `omega` and the rest in `L`.
///
/// `split` must lie in `(0, pi/2)`; the branch offset follows the sign of
/// `ln I1`, so any split gives the same value.
pub fn compute_sensitivity_split(params: FactorParams, tol: f64, split: f64) -> Result<SensitivityResult> {
    check_convergent(params)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(split > 0.0 && split < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("split must lie in (0, pi/2), got {split}")));
    }
    let l_split = -(2.0 * split.cos()).ln();
    if l_split >= 1.0 {
        return Err(Error::InvalidArgument(format!("split {split} is too close to pi/2")));
    }
    let head = gauss_kronrod(|w| integrand(w, params).unwrap_or(f64::NAN), 0.0, split, tol)?;
    let middle = gauss_kronrod(|l| integrand_l(l, params), l_split, 1.0, tol)?;
    let rate = 2.0 * params.alpha();
    let tail = exp_sinh(|v| (log_integrand_u(v / rate, params)).exp() / rate, 0.0, tol)?;
    let sum: Quadrature = head + middle + tail;
    let scale = 2f64.powf(1.0 + 2.0 * params.delta_log) / PI;
    let delta_sq = scale * sum.value;
    let quad_error_estimate = scale * sum.error;
    if quad_error_estimate > tol * delta_sq {
        return Err(Error::Precision { estimate: delta_sq, error: quad_error_estimate, tol });
    }
    Ok(SensitivityResult {
        delta_sq,
        delta: delta_sq.sqrt(),
        quad_error_estimate,
        params,
    })
}

/// `sum_{m < n} ([z^m] f_R)^2` from exact coefficients.
pub fn partial_sum_oracle(params: FactorParams, n: usize) -> Result<f64> {
    Ok(partial_sums(params, &[n])?[0])
}

/// Partial sums of squared coefficients of `R` at each requested length.
pub fn partial_sums(params: FactorParams, lengths: &[usize]) -> Result<Vec<f64>> {
    let max = lengths.iter().copied().max().unwrap_or(0);
    if lengths.contains(&0) {
        return Err(Error::InvalidArgument("partial sums need n >= 1".into()));
    }
    let mut pair = FactorPair::new(params, Sides::Right);
    pair.extend_to(max)?;
    let r = pair.right_coeffs().expect("right side materialized");
    let mut running = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    running.push(0.0);
    for c in &r[..max] {
        acc += c * c;
        running.push(acc);
    }
    Ok(lengths.iter().map(|&n| running[n]).collect())
}

/// `sum_{m >= n} r_m^2` from the order-`K` asymptotic expansion of `r_m`.
///
/// The sum is replaced by `int_n^inf r(m)^2 dm + r(n)^2 / 2`, with the
/// integral taken in `v = ln ln m`.
pub fn tail_estimate(params: FactorParams, n: usize, order: usize, tol: f64) -> Result<f64> {
    check_convergent(params)?;
    let ctx = ExpansionContext::new(params, order)?;
    let r_n = ctx.coeff(n)?;
    let v0 = (n as f64).ln().ln();
    let rate = 2.0 * params.alpha();
    let mut failure = None;
    let density = |s: f64| {
        let v = v0 + s / rate;
        let lead = -rate * v + 2.0 * params.delta_log * (2.0 * v).ln();
        if !v.is_finite() || lead < -800.0 {
            return 0.0;
        }
        match ctx.log_square_density(v) {
            Ok(Some(log)) => log.exp() / rate,
            Ok(None) => 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let q = exp_sinh(density, 0.0, tol)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q.value + 0.5 * r_n * r_n)
}

/// `partial_sum_oracle(n) + tail_estimate(n)`: the limit of the partial sums
/// extrapolated along `ln ln m`.
pub fn extrapolated_limit(params: FactorParams, n: usize, partial: f64, order: usize) -> Result<f64> {
    Ok(partial + tail_estimate(params, n, order, 1e-10)?)
}
