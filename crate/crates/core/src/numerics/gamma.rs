//! Complex Gamma function (Lanczos, g = 7, n = 9).

use std::f64::consts::PI;

use super::matrix::{C64, ONE, ZERO};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(z) for Re z ≥ 1/2 (principal branch of the Lanczos form).
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, &ck) in LANCZOS.iter().enumerate().skip(1) {
        x += ck / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Reciprocal Gamma 1/Γ(z); entire, exactly zero at non-positive integers.
pub fn rgamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return ZERO;
    }
    if z.re < 0.5 {
        // 1/Γ(z) = sin(πz) Γ(1−z) / π
        let s = (z * PI).sin();
        return s * ln_gamma_right(ONE - z).exp() / PI;
    }
    (-ln_gamma_right(z)).exp()
}

/// Γ(z); infinite at poles.
pub fn gamma(z: C64) -> C64 {
    ONE / rgamma(z)
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // Γ(x) = π / (sin(πx) Γ(1−x))
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    ln_gamma_right(C64::new(x, 0.0)).re
}

/// Pochhammer (μ)_m as a real number, by direct product.
pub fn pochhammer(mu: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, k| acc * (mu + k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::re;

    #[test]
    fn factorials() {
        let mut f = 1.0;
        for n in 1..15 {
            let g = gamma(re(n as f64));
            assert!((g.re - f).abs() <= 1e-13 * f, "Γ({n})");
            assert!(g.im.abs() <= 1e-13 * f);
            f *= n as f64;
        }
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert!((gamma(re(0.5)).re - sqrt_pi).abs() < 1e-14);
        assert!((gamma(re(-0.5)).re + 2.0 * sqrt_pi).abs() < 1e-13);
        assert!((gamma(re(1.5)).re - sqrt_pi / 2.0).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_vanishes_at_poles() {
        for k in 0..6 {
            assert_eq!(rgamma(re(-(k as f64))), ZERO);
        }
        // near a pole: 1/Γ(−n + δ) ≈ (−1)^n n! δ
        let d = 1e-7;
        let v = rgamma(re(-2.0 + d));
        assert!((v.re - 2.0 * d).abs() < 1e-12);
    }

    #[test]
    fn reflection_and_recurrence() {
        let z = C64::new(0.3, 1.7);
        let lhs = gamma(z + 1.0);
        let rhs = z * gamma(z);
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
        let refl = gamma(z) * gamma(ONE - z) * (z * PI).sin();
        assert!((refl - PI).norm() < 1e-12);
    }

    #[test]
    fn ln_gamma_matches_factorial() {
        assert!((ln_gamma(11.0) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.25) - 3.625_609_908_221_908_f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(100.5) - 361.435_540_467_777_9).abs() < 1e-11 * 361.4);
    }
}
