//! Small numeric helpers on top of `libm`.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Standard normal distribution function, `0.5 * erfc(-x / sqrt(2))`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `sqrt(2 / pi)`, the smoothing constant of the half-line class.
pub fn sqrt_2_over_pi() -> f64 {
    libm::sqrt(2.0 / PI)
}

/// Binomial coefficient as `f64`; exact while the result fits in 53 bits.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc)
}

/// Checked factorial; `None` on `u128` overflow.
pub fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
pub fn falling(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    ((n - k + 1) as u128..=n as u128).try_fold(1u128, |acc, v| acc.checked_mul(v))
}
