//! Airy function `Ai` and its derivative on the real line.
//!
//! Maclaurin series for `|x| ≤ 2`; beyond that the Bessel representations
//! with `ζ = (2/3)|x|^{3/2}` (`K_{1/3}`, `K_{2/3}` on the right,
//! `J_{±1/3}`, `J_{±2/3}` on the left).

use std::f64::consts::PI;

use super::bessel::{bessel_j, bessel_k};
use crate::{Error, Result};

/// `Ai(0) = 3^{−2/3}/Γ(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_239_3;
/// `−Ai′(0) = 3^{−1/3}/Γ(1/3)`.
pub const AIP0: f64 = 0.258_819_403_792_806_798_4;

const SERIES_MAX: f64 = 2.0;

fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f, g and their derivatives
    let (mut tf, mut tg) = (1.0, x);
    let (mut f, mut g) = (tf, tg);
    let (mut tdf, mut tdg) = (0.5 * x * x, 1.0);
    let (mut df, mut dg) = (tdf, tdg);
    for k in 0..80 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 + 2.0) * (k3 + 3.0));
        tg *= x3 / ((k3 + 3.0) * (k3 + 4.0));
        tdf *= x3 / ((k3 + 3.0) * (k3 + 5.0));
        tdg *= x3 / ((k3 + 1.0) * (k3 + 3.0));
        f += tf;
        g += tg;
        df += tdf;
        dg += tdg;
        if tf.abs() + tg.abs() + tdf.abs() + tdg.abs() < 1e-18 {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

fn check(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("Airy argument must be finite, got {x}")))
    }
}

pub fn airy_ai(x: f64) -> Result<f64> {
    check(x)?;
    if x.abs() <= SERIES_MAX {
        return Ok(series(x).0);
    }
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        Ok((x / 3.0).sqrt() / PI * bessel_k(1.0 / 3.0, zeta)?)
    } else {
        let y = -x;
        let zeta = 2.0 / 3.0 * y * y.sqrt();
        Ok(y.sqrt() / 3.0 * (bessel_j(1.0 / 3.0, zeta)? + bessel_j(-1.0 / 3.0, zeta)?))
    }
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check(x)?;
    if x.abs() <= SERIES_MAX {
        return Ok(series(x).1);
    }
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        Ok(-x / (PI * 3f64.sqrt()) * bessel_k(2.0 / 3.0, zeta)?)
    } else {
        let y = -x;
        let zeta = 2.0 / 3.0 * y * y.sqrt();
        Ok(y / 3.0 * (bessel_j(2.0 / 3.0, zeta)? - bessel_j(-2.0 / 3.0, zeta)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma;

    #[test]
    fn origin() {
        let exact = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
        assert!((airy_ai(0.0).unwrap() - exact).abs() < 1e-15);
        assert!((airy_ai_prime(0.0).unwrap() + AIP0).abs() < 1e-16);
    }

    #[test]
    fn reference_values() {
        // extended-precision references
        let cases = [
            (-10.0, 0.040_241_238_486_443_191, 0.996_265_044_132_790_06),
            (-2.5, -0.112_325_067_692_966_09, 0.678_852_734_264_794_36),
            (-1.0, 0.535_560_883_292_352_12, -0.010_160_567_116_645_209),
            (1.5, 0.071_749_497_008_105_41, -0.097_382_012_842_301_319),
            (3.0, 0.006_591_139_357_460_719_1, -0.011_912_976_705_951_318),
            (8.0, 4.692_207_616_099_231_6e-8, -1.341_439_297_906_786_6e-7),
        ];
        for (x, ai, aip) in cases {
            let (a, d) = (airy_ai(x).unwrap(), airy_ai_prime(x).unwrap());
            assert!((a - ai).abs() < 1e-10 * ai.abs(), "Ai({x}) = {a}");
            assert!((d - aip).abs() < 1e-10 * aip.abs(), "Ai'({x}) = {d}");
        }
    }

    #[test]
    fn continuous_at_switchover() {
        for x in [-SERIES_MAX, SERIES_MAX] {
            let e = 1e-14;
            let (a, b) = (airy_ai(x - e).unwrap(), airy_ai(x + e).unwrap());
            assert!((a - b).abs() < 1e-12);
            let (a, b) = (airy_ai_prime(x - e).unwrap(), airy_ai_prime(x + e).unwrap());
            assert!((a - b).abs() < 1e-12);
        }
    }
}
