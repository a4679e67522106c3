//! Numerical quadrature: adaptive Gauss–Kronrod on finite intervals and an
//! exp-sinh double-exponential rule on `[a, inf)`.

use crate::error::{Error, Result};

/// An integral estimate with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Quadrature {
    type Output = Quadrature;

    fn add(self, rhs: Quadrature) -> Quadrature {
        Quadrature { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

// Kronrod nodes; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Quadrature {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Quadrature {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive 21-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `rel_tol * |value|`.
pub fn gauss_kronrod(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    const MAX_INTERVALS: usize = 2000;
    let mut intervals = vec![(a, b, gk21(&mut f, a, b))];
    loop {
        let total = intervals
            .iter()
            .fold(Quadrature { value: 0.0, error: 0.0 }, |acc, iv| acc + iv.2);
        if !total.value.is_finite() {
            return Err(Error::Domain("integrand is not finite on the interval".into()));
        }
        if total.error <= rel_tol * total.value.abs() {
            return Ok(total);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("at least one interval");
        let (lo, hi, _) = intervals[worst];
        let mid = 0.5 * (lo + hi);
        if intervals.len() >= MAX_INTERVALS || mid <= lo || mid >= hi {
            return Err(Error::Precision {
                estimate: total.value,
                error: total.error,
                tol: rel_tol,
            });
        }
        intervals[worst] = (lo, mid, gk21(&mut f, lo, mid));
        intervals.push((mid, hi, gk21(&mut f, mid, hi)));
    }
}

/// Exp-sinh rule for `int_a^inf f(x) dx`, using `x = a + exp(pi/2 sinh t)`.
///
/// Suited to integrands with at most algebraic or logarithmic singularities
/// at `a` and exponential decay at infinity. The step is halved until two
/// successive trapezoidal sums agree to `rel_tol`.
pub fn exp_sinh(mut f: impl FnMut(f64) -> f64, a: f64, rel_tol: f64) -> Result<Quadrature> {
    const MAX_LEVEL: u32 = 12;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut term = |t: f64| -> f64 {
        let e = (half_pi * t.sinh()).exp();
        let x = a + e;
        if e == 0.0 || !x.is_finite() || x == a {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * half_pi * t.cosh() * e
        }
    };

    let mut h = 0.5;
    let mut raw = sweep(&mut term, h, false, 0.0)?;
    let mut estimate = raw * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        raw += sweep(&mut term, h, true, raw)?;
        let next = raw * h;
        let error = (next - estimate).abs();
        estimate = next;
        if error <= rel_tol * estimate.abs() {
            return Ok(Quadrature { value: estimate, error });
        }
    }
    Err(Error::Precision {
        estimate,
        error: f64::NAN,
        tol: rel_tol,
    })
}

/// Sums `term(t)` over `t = +-j h` (all `j >= 0`, or odd `j` only), walking
/// outward until three consecutive terms are negligible against `scale`.
fn sweep(term: &mut impl FnMut(f64) -> f64, h: f64, odd_only: bool, scale: f64) -> Result<f64> {
    const T_MAX: f64 = 6.5;
    let mut sum = if odd_only { 0.0 } else { term(0.0) };
    for dir in [1.0, -1.0] {
        let mut small = 0;
        for k in 0u64.. {
            let j = if odd_only { 2 * k + 1 } else { k + 1 };
            let t = dir * j as f64 * h;
            if t.abs() > T_MAX {
                break;
            }
            let v = term(t);
            if !v.is_finite() {
                return Err(Error::Domain(format!("integrand is not finite near t = {t}")));
            }
            sum += v;
            if v.abs() <= 1e-18 * (scale.abs() + sum.abs()) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
    Ok(sum)
}
