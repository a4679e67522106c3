use logcount_core::baselines::{HybridConfig, HybridModel, UnboundedVariant};
use logcount_core::sensitivity::integrand;
use logcount_core::{CoeffSeries, FactorPair, FactorParams, GaussianStream, SeriesContext, Sides};
use proptest::prelude::*;

fn series(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

/// Coefficients decaying like `1 / (m + 1)^2`, with a unit constant term.
fn normalized(raw: &[f64]) -> CoeffSeries {
    CoeffSeries::from_fn(raw.len(), |m| if m == 0 { 1.0 } else { raw[m] / ((m + 1) * (m + 1)) as f64 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(a in series(200), b in series(150)) {
        let mut ctx = SeriesContext::new();
        let (a, b) = (CoeffSeries::new(a).unwrap(), CoeffSeries::new(b).unwrap());
        let ab = ctx.convolve(&a, &b, 256).unwrap();
        let ba = ctx.convolve(&b, &a, 256).unwrap();
        prop_assert!(ab.max_abs_diff(&ba) < 1e-12);
    }

    #[test]
    fn convolution_matches_schoolbook(a in series(40), b in series(40)) {
        let mut ctx = SeriesContext::new();
        let fast = ctx.convolve(&CoeffSeries::new(a.clone()).unwrap(), &CoeffSeries::new(b.clone()).unwrap(), 40).unwrap();
        for m in 0..40 {
            let slow: f64 = (0..=m).map(|j| a[j] * b[m - j]).sum();
            prop_assert!((fast[m] - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_and_division(raw in series(300), num in series(300)) {
        let mut ctx = SeriesContext::new();
        let a = normalized(&raw);
        let n = 300;
        let inv = ctx.reciprocal(&a, n).unwrap();
        prop_assert!(ctx.convolve(&a, &inv, n).unwrap().max_abs_diff(&CoeffSeries::one(n).unwrap()) < 1e-10);
        let b = CoeffSeries::new(num).unwrap();
        let q = ctx.divide(&b, &a, n).unwrap();
        prop_assert!(ctx.convolve(&q, &a, n).unwrap().max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn exp_log_round_trip(raw in series(257)) {
        let mut ctx = SeriesContext::new();
        let n = raw.len();
        let a = normalized(&raw);
        let log = ctx.log_series(&a, n).unwrap();
        prop_assert!(ctx.exp_series(&log, n, None).unwrap().max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn power_multiplies_exponents(raw in series(128), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mut ctx = SeriesContext::new();
        let a = normalized(&raw);
        let n = 128;
        let left = ctx.pow_series(&a, s, n).unwrap();
        let right = ctx.pow_series(&a, t, n).unwrap();
        let both = ctx.pow_series(&a, s + t, n).unwrap();
        prop_assert!(ctx.convolve(&left, &right, n).unwrap().max_abs_diff(&both) < 1e-10);
    }

    #[test]
    fn factorization_is_valid_and_prefix_stable(
        gamma in -0.9f64..-0.505,
        delta_log in 0.0f64..1.0,
        k in 3u32..11,
    ) {
        let params = FactorParams::new(gamma, delta_log).unwrap();
        let n = 1usize << k;
        let mut pair = FactorPair::new(params, Sides::Both);
        pair.extend_to(n / 2).unwrap();
        let short = pair.left_coeffs().unwrap().to_vec();
        pair.extend_to(n).unwrap();
        prop_assert_eq!(&pair.left_coeffs().unwrap()[..n / 2], &short[..]);
        let lr = SeriesContext::new().convolve(&pair.left().unwrap(), &pair.right().unwrap(), n).unwrap();
        prop_assert!(lr.max_abs_diff(&CoeffSeries::ones(n).unwrap()) < 1e-9);
    }

    #[test]
    fn integrand_is_even(omega in 1e-3f64..1.5, delta_log in 0.0f64..1.0) {
        let params = FactorParams::new(-0.51, delta_log).unwrap();
        prop_assert_eq!(integrand(omega, params).unwrap(), integrand(-omega, params).unwrap());
    }

    #[test]
    fn noise_is_addressable(seed in any::<u64>(), start in 0u64..1_000_000, len in 1usize..64) {
        let mut block = vec![0.0; len];
        GaussianStream::new(seed, 0).fill(start, &mut block);
        let mut g = GaussianStream::new(seed, 0);
        for (i, v) in block.iter().enumerate().rev() {
            prop_assert_eq!(g.sample(start + i as u64), *v);
        }
    }

    #[test]
    fn reuse_never_hurts(rho in 0.05f64..0.95, delta_sq in 1.0f64..2000.0, t in 1u64..5000) {
        for variant in [UnboundedVariant::Independent, UnboundedVariant::LogMatrix] {
            let with = HybridConfig { rho, ..HybridConfig::new(variant) };
            let without = HybridConfig { reuse: false, ..with };
            let a = HybridModel::with_delta_sq(with, 1.0, delta_sq, t).unwrap().variance(t).unwrap();
            let b = HybridModel::with_delta_sq(without, 1.0, delta_sq, t).unwrap().variance(t).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-14));
        }
    }
}
