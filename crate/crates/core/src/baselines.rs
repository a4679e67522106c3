//! Comparison mechanisms: the bounded square-root factorization and the
//! hybrid (doubling) construction with either independent-noise or
//! log-matrix unbounded component.

use crate::error::{Error, Result};
use crate::factor::{coeffs_f1, FactorPair, FactorParams, Sides};
use crate::mechanism::{check_input, LogMatrixCounter, PrivacyParams};
use crate::noise::GaussianStream;
use crate::sensitivity::{compute_sensitivity, DEFAULT_TOL};
use crate::series::SeriesContext;

/// `S(j) = sum_{m < j} f1[m]^2` for `j = 0..=n`.
pub fn f1_square_sums(n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    if n == 0 {
        return Ok(out);
    }
    let mut acc = 0.0;
    for c in coeffs_f1(n)?.as_slice() {
        acc += c * c;
        out.push(acc);
    }
    Ok(out)
}

/// Variance of the square-root factorization at step `t` when calibrated
/// for horizon `n`.
pub fn sqrt_matrix_variance(t: usize, n: usize, privacy: PrivacyParams) -> Result<f64> {
    if t == 0 || t > n {
        return Err(Error::InvalidArgument(format!(
            "sqrt-matrix mechanism needs 1 <= t <= n, got t = {t}, n = {n}"
        )));
    }
    let s = f1_square_sums(n)?;
    Ok(privacy.c * privacy.c * s[n] * s[t])
}

/// Unbounded component of the hybrid mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnboundedVariant {
    /// Independent noise on every condensed input.
    Independent,
    /// The log-matrix counter over the condensed stream.
    LogMatrix,
}

impl UnboundedVariant {
    pub fn id(self) -> &'static str {
        match self {
            Self::Independent => "hybrid-indep",
            Self::LogMatrix => "hybrid-log",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridConfig {
    /// Share of the (squared-scale) budget given to the bounded component.
    pub rho: f64,
    pub unbounded: UnboundedVariant,
    /// Combine finished epoch outputs with the unbounded estimate.
    pub reuse: bool,
    /// Factor parameters for the log-matrix variant.
    pub params: FactorParams,
}

impl HybridConfig {
    pub fn new(unbounded: UnboundedVariant) -> Self {
        Self { rho: 0.75, unbounded, reuse: true, params: FactorParams::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    /// Noise multipliers `(C_b, C_u)` for a total multiplier `c`.
    pub fn split(&self, c: f64) -> (f64, f64) {
        (c / self.rho.sqrt(), c / (1.0 - self.rho).sqrt())
    }
}

/// `(k, r)` with `t = 2^k + r`, `0 <= r < 2^k`.
pub fn epoch_of(t: u64) -> (u32, u64) {
    debug_assert!(t >= 1);
    let k = 63 - t.leading_zeros();
    (k, t - (1u64 << k))
}

/// Precomputed quantities for evaluating the hybrid variance at many `t`.
#[derive(Clone, Debug)]
pub struct HybridModel {
    config: HybridConfig,
    c: f64,
    /// `Delta^2` of the unbounded log-matrix factor (1 for independent noise).
    unbounded_delta_sq: f64,
    /// `sum_{m < k} L[m]^2` (or `k`) indexed by `k`.
    unbounded_rows: Vec<f64>,
    square_sums: Vec<f64>,
    t_max: u64,
}

impl HybridModel {
    pub fn new(config: HybridConfig, privacy: PrivacyParams, t_max: u64) -> Result<Self> {
        let delta_sq = match config.unbounded {
            UnboundedVariant::Independent => 1.0,
            UnboundedVariant::LogMatrix => compute_sensitivity(config.params, DEFAULT_TOL)?.delta_sq,
        };
        Self::with_delta_sq(config, privacy.c, delta_sq, t_max)
    }

    /// Like [`HybridModel::new`] with a known `Delta^2` and noise multiplier `c`.
    /// `delta_sq` is ignored for the independent variant.
    pub fn with_delta_sq(config: HybridConfig, c: f64, delta_sq: f64, t_max: u64) -> Result<Self> {
        config.validate()?;
        let delta_sq = match config.unbounded {
            UnboundedVariant::Independent => 1.0,
            UnboundedVariant::LogMatrix => delta_sq,
        };
        if t_max == 0 {
            return Err(Error::InvalidArgument("t_max must be positive".into()));
        }
        let k_max = epoch_of(t_max).0 as usize;
        let unbounded_rows = match config.unbounded {
            UnboundedVariant::Independent => (0..=k_max).map(|k| k as f64).collect(),
            UnboundedVariant::LogMatrix => {
                let mut pair = FactorPair::new(config.params, Sides::Left);
                pair.extend_to(k_max.max(1))?;
                let l = pair.left_coeffs().expect("left side materialized");
                let mut acc = 0.0;
                let mut rows = vec![0.0];
                for c in &l[..k_max] {
                    acc += c * c;
                    rows.push(acc);
                }
                rows
            }
        };
        let square_sums = f1_square_sums(1usize << k_max)?;
        Ok(Self { config, c, unbounded_delta_sq: delta_sq, unbounded_rows, square_sums, t_max })
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    /// Variance of the unbounded estimate of `sum_{i<k} y_i`, at unit `C`.
    fn unbounded_unit(&self, k: usize) -> f64 {
        let (_, cu) = self.config.split(1.0);
        cu * cu * self.unbounded_delta_sq * self.unbounded_rows[k]
    }

    /// Variance of `sum_{i<k} b_i` over finished epoch outputs, at unit `C`.
    fn reuse_unit(&self, k: usize) -> f64 {
        let (cb, _) = self.config.split(1.0);
        (0..k).map(|i| cb * cb * self.square_sums[1 << i].powi(2)).sum()
    }

    /// Weight on the unbounded estimate when combining with finished epochs.
    pub(crate) fn unbounded_weight(&self, k: usize) -> f64 {
        if !self.config.reuse || k == 0 {
            return 1.0;
        }
        let (u, b) = (self.unbounded_unit(k), self.reuse_unit(k));
        b / (u + b)
    }

    fn past_unit(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let u = self.unbounded_unit(k);
        if !self.config.reuse {
            return u;
        }
        let b = self.reuse_unit(k);
        u * b / (u + b)
    }

    pub fn variance(&self, t: u64) -> Result<f64> {
        if t == 0 || t > self.t_max {
            return Err(Error::InvalidArgument(format!(
                "hybrid variance at t = {t} outside 1..={}",
                self.t_max
            )));
        }
        let (k, r) = epoch_of(t);
        let k = k as usize;
        let (cb, _) = self.config.split(1.0);
        let bounded = cb * cb * self.square_sums[1 << k] * self.square_sums[r as usize + 1];
        Ok(self.c * self.c * (self.past_unit(k) + bounded))
    }
}

/// Exact variance of the hybrid estimate at step `t`.
pub fn hybrid_variance(t: u64, config: HybridConfig, privacy: PrivacyParams) -> Result<f64> {
    HybridModel::new(config, privacy, t.max(1))?.variance(t)
}

#[allow(clippy::large_enum_variant)]
enum Unbounded {
    Independent { noise: GaussianStream, scale: f64, estimate: f64 },
    LogMatrix { counter: LogMatrixCounter, estimate: f64 },
}

/// Streaming hybrid mechanism.
pub struct HybridCounter {
    config: HybridConfig,
    weights: HybridModel,
    bounded_scale: f64,
    bounded_noise: GaussianStream,
    unbounded: Unbounded,
    ctx: SeriesContext,
    f1: Vec<f64>,
    epoch_noise: Vec<f64>,
    epoch_sum: f64,
    last_bounded: f64,
    finished: f64,
    t: u64,
}

impl std::fmt::Debug for HybridCounter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HybridCounter")
            .field("config", &self.config)
            .field("t", &self.t)
            .finish_non_exhaustive()
    }
}

const BOUNDED_STREAM: u64 = 1;
const INDEPENDENT_STREAM: u64 = 2;

impl HybridCounter {
    pub fn new(config: HybridConfig, privacy: PrivacyParams, seed: u64) -> Result<Self> {
        let delta_sq = match config.unbounded {
            UnboundedVariant::Independent => 1.0,
            UnboundedVariant::LogMatrix => compute_sensitivity(config.params, DEFAULT_TOL)?.delta_sq,
        };
        Self::with_scale(config, privacy.c, delta_sq, seed)
    }

    /// Starts a stream with noise multiplier `c` (`0` disables noise) and a
    /// known `Delta^2` for the log-matrix variant.
    pub fn with_scale(config: HybridConfig, c: f64, delta_sq: f64, seed: u64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("noise multiplier must be >= 0, got {c}")));
        }
        let weights = HybridModel::with_delta_sq(config, 1.0, delta_sq, 1)?;
        let (cb, cu) = config.split(c);
        let unbounded = match config.unbounded {
            UnboundedVariant::Independent => Unbounded::Independent {
                noise: GaussianStream::new(seed, INDEPENDENT_STREAM),
                scale: cu,
                estimate: 0.0,
            },
            UnboundedVariant::LogMatrix => {
                let delta = delta_sq.sqrt();
                Unbounded::LogMatrix {
                    counter: LogMatrixCounter::with_sigma(config.params, delta, cu * delta, seed, None)?,
                    estimate: 0.0,
                }
            }
        };
        Ok(Self {
            config,
            weights,
            bounded_scale: cb,
            bounded_noise: GaussianStream::new(seed, BOUNDED_STREAM),
            unbounded,
            ctx: SeriesContext::new(),
            f1: Vec::new(),
            epoch_noise: Vec::new(),
            epoch_sum: 0.0,
            last_bounded: 0.0,
            finished: 0.0,
            t: 0,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    fn start_epoch(&mut self, k: u32) -> Result<()> {
        if k >= 1 {
            let y = self.epoch_sum;
            match &mut self.unbounded {
                Unbounded::Independent { noise, scale, estimate } => {
                    *estimate += y + *scale * noise.sample(u64::from(k - 1));
                }
                Unbounded::LogMatrix { counter, estimate } => {
                    *estimate = counter.advance(y)?;
                }
            }
            self.finished += self.last_bounded;
        }
        let n = 1usize << k;
        let model = &mut self.weights;
        if model.unbounded_rows.len() <= k as usize {
            *model = HybridModel::with_delta_sq(self.config, 1.0, model.unbounded_delta_sq, n as u64)?;
        }
        self.f1 = coeffs_f1(n)?.into_vec();
        let sd = self.bounded_scale * model.square_sums[n].sqrt();
        let mut z = vec![0.0; n];
        self.bounded_noise.fill(n as u64 - 1, &mut z);
        for v in &mut z {
            *v *= sd;
        }
        self.epoch_noise = self.ctx.product(&self.f1, &z, n);
        self.epoch_sum = 0.0;
        Ok(())
    }

    pub fn step(&mut self, x: f64) -> Result<f64> {
        check_input(self.t + 1, x)?;
        self.t += 1;
        let (k, r) = epoch_of(self.t);
        if r == 0 {
            self.start_epoch(k)?;
        }
        self.epoch_sum += x;
        self.last_bounded = self.epoch_sum + self.epoch_noise[r as usize];
        let unbounded = match &self.unbounded {
            Unbounded::Independent { estimate, .. } | Unbounded::LogMatrix { estimate, .. } => *estimate,
        };
        let w = self.weights.unbounded_weight(k as usize);
        let past = if k == 0 { 0.0 } else { w * unbounded + (1.0 - w) * self.finished };
        Ok(past + self.last_bounded)
    }
}
