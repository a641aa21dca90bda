//! Gamma-function helpers on top of `statrs`, extended to the whole real line.

use std::f64::consts::PI;

pub use statrs::function::erf::erfc;
pub use statrs::function::gamma::digamma;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `ln |Γ(x)|` and the sign of `Γ(x)`; poles give `(+∞, 0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (statrs::function::gamma::ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    // Γ(x)Γ(1−x) = π / sin(πx)
    let s = (PI * x).sin();
    let (l, _) = ln_gamma_signed(1.0 - x);
    ((PI / s.abs()).ln() - l, s.signum())
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).0
}

/// `1/Γ(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / gamma(x);
    }
    let (l, s) = ln_gamma_signed(x);
    s * (-l).exp()
}

/// Taylor coefficients of `1/Γ(z) = Σ_{k≥1} C[k] z^k`.
const RGAMMA_TAYLOR: [f64; 29] = [
    0.0,
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -0.000_001_250_493_482_142_670_657,
    0.000_001_133_027_231_981_695_882,
    -2.056_338_416_977_607_103e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_510e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783e-14,
    -5.348_122_539_423_017_982e-15,
    1.226_778_628_238_260_790e-15,
    -1.181_259_301_697_458_770e-16,
    1.186_692_254_751_600_333e-18,
    1.412_380_655_318_031_782e-18,
];

/// Temme's auxiliary quantities for `|μ| ≤ 1/2`:
/// `(γ1, γ2, 1/Γ(1+μ), 1/Γ(1−μ))` with
/// `γ1 = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ)` and `γ2 = (1/Γ(1−μ) + 1/Γ(1+μ))/2`.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    // Horner over even/odd coefficient subsequences in powers of μ².
    let m2 = mu * mu;
    for k in (1..RGAMMA_TAYLOR.len()).rev() {
        if k % 2 == 0 {
            g1 = g1 * m2 + RGAMMA_TAYLOR[k];
        } else {
            g2 = g2 * m2 + RGAMMA_TAYLOR[k];
        }
    }
    let gam1 = -g1;
    let gam2 = g2;
    // 1/Γ(1+μ) = γ2 − μγ1, 1/Γ(1−μ) = γ2 + μγ1
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_and_poles() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        let x = -2.5;
        // Γ(−2.5) = −8√π/15
        let exact = -8.0 * PI.sqrt() / 15.0;
        assert!((rgamma(x) * exact - 1.0).abs() < 1e-14);
        let (l, s) = ln_gamma_signed(x);
        assert_eq!(s, -1.0);
        assert!((l - exact.abs().ln()).abs() < 1e-13);
        assert!((rgamma(200.0) - (-ln_gamma(200.0)).exp()).abs() < 1e-300);
    }

    #[test]
    fn temme_quantities() {
        for mu in [-0.5, -0.2, 0.0, 1e-9, 0.3, 0.5] {
            let (g1, g2, gp, gm) = temme_gammas(mu);
            assert!((gp - rgamma(1.0 + mu)).abs() < 1e-14, "{mu}: {gp} {}", rgamma(1.0 + mu));
            assert!((gm - rgamma(1.0 - mu)).abs() < 1e-14, "{mu}");
            assert!((g2 - 0.5 * (gm + gp)).abs() < 1e-15);
            if mu.abs() > 0.1 {
                assert!((g1 - (gm - gp) / (2.0 * mu)).abs() < 1e-14);
            }
        }
        // γ1(0) = −Euler's constant
        assert!((temme_gammas(0.0).0 + 0.577_215_664_901_532_9).abs() < 1e-15);
    }
}
