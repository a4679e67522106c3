//! Real-to-complex transforms with cost accounting.
//!
//! Every transform of length `len` is charged `len / 6` budget units, so one
//! full truncated product of two `n`-term series (three transforms of length
//! `2n`) costs exactly `n` units, i.e. one `M(n)`.

use std::collections::HashMap;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::MulBudget;

const MIN_TRANSFORM: usize = 2;

/// The half-spectrum of a zero-padded real sequence.
#[derive(Clone, Debug)]
pub(crate) struct Spectrum {
    len: usize,
    bins: Vec<Complex<f64>>,
}

impl Spectrum {
    pub(crate) fn mul(&self, other: &Spectrum) -> Spectrum {
        debug_assert_eq!(self.len, other.len);
        let bins = self
            .bins
            .iter()
            .zip(&other.bins)
            .map(|(a, b)| a * b)
            .collect();
        Spectrum {
            len: self.len,
            bins,
        }
    }
}

pub(crate) fn transform_len(min_len: usize) -> usize {
    min_len.max(MIN_TRANSFORM).next_power_of_two()
}

/// Planner cache plus the multiplication budget it charges.
pub(crate) struct Transforms {
    planner: RealFftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn RealToComplex<f64>>>,
    inverse: HashMap<usize, Arc<dyn ComplexToReal<f64>>>,
}

impl Default for Transforms {
    fn default() -> Self {
        Self {
            planner: RealFftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
        }
    }
}

impl Transforms {
    /// Forward transform of `a`, zero-padded to `len`. `a` must fit.
    pub(crate) fn forward(&mut self, budget: &mut MulBudget, a: &[f64], len: usize) -> Spectrum {
        assert!(a.len() <= len, "sequence of {} terms does not fit transform {len}", a.len());
        let plan = self
            .forward
            .entry(len)
            .or_insert_with(|| self.planner.plan_fft_forward(len))
            .clone();
        let mut input = vec![0.0; len];
        input[..a.len()].copy_from_slice(a);
        let mut bins = plan.make_output_vec();
        plan.process(&mut input, &mut bins)
            .expect("buffer sizes come from the plan");
        budget.charge_transform(len);
        Spectrum { len, bins }
    }

    /// Inverse transform, normalized, returning the cyclic convolution values.
    pub(crate) fn inverse(&mut self, budget: &mut MulBudget, mut spectrum: Spectrum) -> Vec<f64> {
        let len = spectrum.len;
        let plan = self
            .inverse
            .entry(len)
            .or_insert_with(|| self.planner.plan_fft_inverse(len))
            .clone();
        // DC and Nyquist bins of a real signal are real.
        spectrum.bins[0].im = 0.0;
        if let Some(last) = spectrum.bins.last_mut() {
            last.im = 0.0;
        }
        let mut out = plan.make_output_vec();
        plan.process(&mut spectrum.bins, &mut out)
            .expect("buffer sizes come from the plan");
        budget.charge_transform(len);
        let scale = 1.0 / len as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }
}
