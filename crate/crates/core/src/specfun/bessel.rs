//! Real-order Bessel functions `I_ν`, `K_ν`, `J_ν` of real argument.
//!
//! Switch-over constants:
//! * `I_ν`: power series for `z ≤ 30` or `ν² > z`, large-argument expansion otherwise.
//! * `K_ν`: Temme's series for `z < 2`, Steed's continued fraction otherwise,
//!   then upward recurrence from the reduced order `|μ| ≤ 1/2`.
//! * `J_ν`: power series while its terms are monotone (`z²/4 < ν+1` or `z ≤ 2`),
//!   Hankel expansion for `z ≥ 25` and `z > ν²`, Miller's backward
//!   recurrence in between.

use std::f64::consts::PI;

use super::gamma::{ln_gamma, temme_gammas};
use crate::{Error, Result};

const I_SERIES_MAX: f64 = 30.0;
const J_HANKEL_MIN: f64 = 25.0;
const K_TEMME_MAX: f64 = 2.0;

fn check_order(nu: f64, z: f64) -> Result<()> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::domain(format!("Bessel order must exceed −1, got {nu}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be finite and ≥ 0, got {z}")));
    }
    Ok(())
}

/// `e^{−z} I_ν(z)` by the power series, all terms positive for `ν > −1`.
fn i_series_scaled(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * z * z;
    let mut term = (nu * (0.5 * z).ln() - ln_gamma(nu + 1.0) - z).exp();
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < 1e-17 * sum && k > q.sqrt() {
            break;
        }
    }
    sum
}

/// `√(2πz) e^{−z} I_ν(z)` from the large-argument expansion.
fn i_asymptotic_scaled(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * z);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{−z} I_ν(z)` for `ν > −1`, `z ≥ 0`.
pub fn bessel_i_scaled(nu: f64, z: f64) -> Result<f64> {
    check_order(nu, z)?;
    if z <= I_SERIES_MAX || nu * nu > z {
        Ok(i_series_scaled(nu, z))
    } else {
        Ok(i_asymptotic_scaled(nu, z) / (2.0 * PI * z).sqrt())
    }
}

/// Modified Bessel function of the first kind `I_ν(z)`, `ν > −1`, `z ≥ 0`.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    let s = bessel_i_scaled(nu, z)?;
    Ok(if z == 0.0 { s } else { s * z.exp() })
}

/// `ln I_ν(z)` for `z > 0`, safe for arguments where `I_ν` overflows.
pub fn ln_bessel_i(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_i_scaled(nu, z)?.ln() + z)
}

/// `(K_μ, K_{μ+1})` scaled by `e^{z}` for `|μ| ≤ 1/2`, `z > 0`.
fn k_pair_scaled(mu: f64, z: f64) -> Result<(f64, f64)> {
    let eps = 1e-16;
    let mu2 = mu * mu;
    let xi = 1.0 / z;
    if z < K_TEMME_MAX {
        let x2 = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < eps { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= dd / i;
            p /= i - mu;
            q /= i + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - i * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * eps {
                break;
            }
            i += 1.0;
            if i > 500.0 {
                return Err(Error::Unavailable("K_ν Temme series did not converge".into()));
            }
        }
        let scale = z.exp();
        Ok((sum * scale, sum1 * 2.0 * xi * scale))
    } else {
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 1.0;
        loop {
            a -= 2.0 * i;
            c = -a * c / (i + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < eps {
                break;
            }
            i += 1.0;
            if i > 100_000.0 {
                return Err(Error::Unavailable("K_ν continued fraction did not converge".into()));
            }
        }
        h *= a1;
        let kmu = (PI / (2.0 * z)).sqrt() / s;
        let k1 = kmu * (mu + z + 0.5 - h) * xi;
        Ok((kmu, k1))
    }
}

/// `e^{z} K_ν(z)` for real `ν` and `z > 0`.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() || !nu.is_finite() {
        return Err(Error::domain(format!("K_ν needs finite ν and z > 0, got ν = {nu}, z = {z}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1) = k_pair_scaled(mu, z)?;
    let xi2 = 2.0 / z;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok(kmu)
}

/// Modified Bessel function of the second kind `K_ν(z)`, `z > 0`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z)? * (-z).exp())
}

/// `ln K_ν(z)`.
pub fn ln_bessel_k(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z)?.ln() - z)
}

fn j_series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let q = -0.25 * z * z;
    let mut term = (nu * (0.5 * z).ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k * (k + nu) > -q {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn j_hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf * z);
        if term.abs() >= prev || term == 0.0 {
            break;
        }
        prev = term.abs();
        // a_k/z^k enters P with sign (−1)^{k/2} for even k, Q with (−1)^{(k−1)/2}
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `(J_ν(z), J_{ν+1}(z))` by Miller's backward recurrence, normalized with
/// `(z/2)^ν = Σ_j (ν+2j) Γ(ν+j)/j! · J_{ν+2j}(z)`.
fn j_miller(nu: f64, z: f64) -> (f64, f64) {
    let m = (z + 40.0 + 4.0 * z.sqrt()).ceil() as usize;
    let m = m + (m % 2);
    let mut f_next = 0.0;
    let mut f = 1e-300;
    let mut fs = vec![0.0; m + 2];
    fs[m] = f;
    let mut k = m;
    while k > 0 {
        let order = nu + k as f64;
        let f_prev = 2.0 * order / z * f - f_next;
        f_next = f;
        f = f_prev;
        k -= 1;
        fs[k] = f;
        if f.abs() > 1e250 {
            for v in fs.iter_mut().skip(k) {
                *v *= 1e-250;
            }
            f *= 1e-250;
            f_next *= 1e-250;
        }
    }
    // weights w_0 = Γ(ν+1), w_j = (ν+2j) Γ(ν+j)/j!, summed in units of Γ(ν+1)
    let mut g = 1.0;
    let mut sum = fs[0];
    let mut j = 1;
    while 2 * j <= m {
        if j > 1 {
            g *= (nu + j as f64 - 1.0) / j as f64;
        }
        sum += (nu + 2.0 * j as f64) * g * fs[2 * j];
        j += 1;
    }
    // (z/2)^ν / Γ(ν+1) = sum · scale
    let ln_target = nu * (0.5 * z).ln() - ln_gamma(nu + 1.0);
    let scale = ln_target.exp() / sum;
    (fs[0] * scale, fs[1] * scale)
}

fn j_pair(nu: f64, z: f64) -> (f64, f64) {
    if z <= 2.0 || 0.25 * z * z < nu + 1.0 {
        (j_series(nu, z), j_series(nu + 1.0, z))
    } else if z >= J_HANKEL_MIN && z > nu * nu {
        (j_hankel(nu, z), j_hankel(nu + 1.0, z))
    } else {
        j_miller(nu, z)
    }
}

/// Bessel function of the first kind `J_ν(z)`, `ν > −1`, `z ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    check_order(nu, z)?;
    Ok(j_pair(nu, z).0)
}

/// `(J_ν(z), J_{ν+1}(z))`.
pub fn bessel_j_pair(nu: f64, z: f64) -> Result<(f64, f64)> {
    check_order(nu, z)?;
    Ok(j_pair(nu, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate_with, QuadOptions};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn half_integer_closed_forms() {
        let z: f64 = 1.0;
        let i = bessel_i(-0.5, z).unwrap();
        assert!(rel(i, (2.0 / PI).sqrt() * z.cosh()) < 1e-14);
        let k = bessel_k(0.5, z).unwrap();
        assert!(rel(k, (PI / (2.0 * z)).sqrt() * (-z).exp()) < 1e-14);
        for z in [0.3, 2.0, 5.0, 17.0, 40.0, 300.0] {
            let j = bessel_j(0.5, z).unwrap();
            let exact = (2.0 / (PI * z)).sqrt() * z.sin();
            assert!((j - exact).abs() < 1e-13, "z = {z}: {j} vs {exact}");
            let jm = bessel_j(-0.5, z).unwrap();
            let exact = (2.0 / (PI * z)).sqrt() * z.cos();
            assert!((jm - exact).abs() < 1e-13, "z = {z}");
            let k = bessel_k(1.5, z).unwrap();
            let exact = (PI / (2.0 * z)).sqrt() * (-z).exp() * (1.0 + 1.0 / z);
            assert!(rel(k, exact) < 1e-13, "K_3/2({z})");
            if z < 700.0 {
                let i = bessel_i(0.5, z).unwrap();
                assert!(rel(i, (2.0 / (PI * z)).sqrt() * z.sinh()) < 1e-12, "I_1/2({z})");
            }
        }
    }

    #[test]
    fn small_argument_leading_term() {
        let z = 1e-8;
        assert!(rel(bessel_i(1.0, z).unwrap(), z / 2.0) < 1e-12);
    }

    #[test]
    fn i_series_matches_high_precision_value() {
        // I_0.3(2.7) from a 200-term extended-precision series
        let v = bessel_i(0.3, 2.7).unwrap();
        assert!(rel(v, 3.744_481_428_517_274) < 1e-13, "{v}");
    }

    #[test]
    fn k0_against_integral() {
        let q = integrate_with(|u: f64| (-u.cosh()).exp(), 0.0, f64::INFINITY, QuadOptions::tol(1e-16, 1e-14))
            .unwrap()
            .value;
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), q) < 1e-12);
    }

    #[test]
    fn wronskian() {
        for nu in [-0.7, 0.0, 0.3, 1.0, 2.5, 6.2] {
            for z in [0.1, 0.9, 1.99, 2.01, 7.0, 29.0, 31.0, 80.0] {
                let (i0, i1) = (bessel_i(nu, z).unwrap(), bessel_i(nu + 1.0, z).unwrap());
                let (k0, k1) = (bessel_k(nu, z).unwrap(), bessel_k(nu + 1.0, z).unwrap());
                let w = i0 * k1 + i1 * k0;
                assert!(rel(w, 1.0 / z) < 1e-9, "ν = {nu}, z = {z}: {w}");
            }
        }
    }

    #[test]
    fn j_recurrence() {
        for nu in [-0.6, 0.0, 1.0 / 3.0, 1.7, 5.5, 12.0] {
            for z in [0.5, 1.9, 3.0, 9.0, 24.9, 25.1, 60.0, 150.0] {
                let a = bessel_j(nu, z).unwrap();
                let (b, c) = bessel_j_pair(nu + 1.0, z).unwrap();
                let lhs = a + c;
                let rhs = 2.0 * (nu + 1.0) / z * b;
                let scale = a.abs().max(b.abs()).max(c.abs());
                assert!((lhs - rhs).abs() < 1e-9 * scale.max(1e-3), "ν = {nu}, z = {z}");
            }
        }
    }

    #[test]
    fn j_reference_values() {
        // extended-precision references
        let cases = [
            (-0.3, 20.0, 0.120_092_453_226_308_04),
            (-0.3, 10.0, -0.244_178_371_204_872_5),
            (0.0, 20.0, 0.167_024_664_340_583_15),
            (2.0, 20.0, -0.160_341_351_922_998_15),
            (2.0, 10.0, 0.254_630_313_685_120_6),
            (1.0 / 3.0, 15.0, 0.089_740_004_221_152_51),
            (5.5, 9.0, 0.084_387_797_491_070_18),
        ];
        for (nu, z, exact) in cases {
            let v = bessel_j(nu, z).unwrap();
            assert!((v - exact).abs() < 1e-13, "ν = {nu}, z = {z}: {v}");
        }
    }

    #[test]
    fn j_methods_agree_at_switchover() {
        for nu in [-0.3, 0.0, 2.0] {
            for z in [2.5, 4.0] {
                let s = j_series(nu, z);
                let m = j_miller(nu, z).0;
                assert!((s - m).abs() < 1e-13, "series/Miller ν = {nu}, z = {z}: {s} {m}");
            }
            for z in [25.0, 30.0, 40.0] {
                let h = j_hankel(nu, z);
                let m = j_miller(nu, z).0;
                assert!((h - m).abs() < 1e-12, "Hankel/Miller ν = {nu}, z = {z}: {h} {m}");
            }
        }
    }

    #[test]
    fn i_methods_agree_at_switchover() {
        for nu in [-0.5, 0.0, 0.7, 3.0] {
            let z = 35.0;
            let a = i_series_scaled(nu, z);
            let b = i_asymptotic_scaled(nu, z) / (2.0 * PI * z).sqrt();
            assert!(rel(a, b) < 1e-12, "ν = {nu}");
        }
    }
}
