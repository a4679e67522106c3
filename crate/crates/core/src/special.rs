//! A few special-function values needed by the asymptotic expansion.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

// B_2, B_4, ..., B_14.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta at an integer `s >= 2`, by Euler–Maclaurin summation.
pub fn zeta(s: u32) -> f64 {
    assert!(s >= 2, "zeta({s}) diverges or is not implemented");
    const N: f64 = 12.0;
    let sf = s as f64;
    let mut sum: f64 = (1..N as u32).map(|n| (n as f64).powf(-sf)).sum();
    sum += N.powf(1.0 - sf) / (sf - 1.0) + 0.5 * N.powf(-sf);
    // Term j: B_2j / (2j)! * s (s+1) ... (s+2j-2) * N^(-s-2j+1).
    let mut rising = sf;
    let mut factorial = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = j as f64 + 1.0;
        sum += b / factorial * rising * N.powf(-sf - 2.0 * j + 1.0);
        rising *= (sf + 2.0 * j - 1.0) * (sf + 2.0 * j);
        factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    sum
}

/// `psi^(k)(1/2)`, the `k`-th derivative of the digamma function at 1/2.
pub fn polygamma_half(k: u32) -> f64 {
    if k == 0 {
        return -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=k).map(f64::from).product();
    sign * factorial * (2f64.powi(k as i32 + 1) - 1.0) * zeta(k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(3) - 1.202_056_903_159_594_2).abs() < 1e-15);
        assert!((zeta(4) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(10) - PI.powi(10) / 93_555.0).abs() < 1e-15);
    }

    #[test]
    fn polygamma_known_values() {
        // psi'(1/2) = pi^2 / 2, psi''(1/2) = -14 zeta(3)
        assert!((polygamma_half(0) + 1.963_510_026_021_423_5).abs() < 1e-15);
        assert!((polygamma_half(1) - PI * PI / 2.0).abs() < 1e-13);
        assert!((polygamma_half(2) + 14.0 * 1.202_056_903_159_594_2).abs() < 1e-12);
    }
}
