//! Bessel-process level and line crossings, and transition densities.

use std::f64::consts::SQRT_2;

use super::series::{shared, SpectralSeries, Term};
use super::{ln_phi_bessel, DiffusionKind, DiffusionSpec, FptDensity, Representation, DEFAULT_T_MIN};
use crate::moebius::lifetime;
use crate::numeric::{integrate_with, QuadOptions};
use crate::specfun::bessel::{bessel_i_scaled, bessel_j, bessel_k_scaled};
use crate::specfun::zeros::bessel_j_zeros_shared;
use crate::specfun::rgamma;
use crate::{Error, Result};

const BESSEL_MAX_TERMS: usize = 20_000;

fn check_index(nu: f64) -> Result<()> {
    if nu > -1.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("Bessel index must exceed -1, got {nu}")))
    }
}

/// `z^{−ν} J_ν(z)`, continuous at 0.
fn j_reduced(nu: f64, z: f64) -> Result<f64> {
    if z < 1e-8 {
        return Ok(2f64.powf(-nu) * rgamma(nu + 1.0) * (1.0 - z * z / (4.0 * (nu + 1.0))));
    }
    Ok(z.powf(-nu) * bessel_j(nu, z)?)
}

fn level_series(nu: f64, x: f64, a: f64) -> std::sync::Arc<SpectralSeries> {
    let key = format!("bessel_level_{nu:?}_{x:?}_{a:?}");
    shared(&key, move || {
        let rho = x / a;
        SpectralSeries::new(
            format!("bessel_level(nu={nu}, x={x}, a={a})"),
            BESSEL_MAX_TERMS,
            move |from, to| {
                let zeros = bessel_j_zeros_shared(nu, to)?;
                zeros[from..to]
                    .iter()
                    .map(|&j| {
                        let c = j.powf(1.0 + nu) * j_reduced(nu, j * rho)?
                            / (a * a * bessel_j(nu + 1.0, j)?);
                        Ok(Term {
                            coef: c,
                            rate: j * j / (2.0 * a * a),
                        })
                    })
                    .collect()
            },
            |_| 1.0,
        )
        .clamping_negative()
    })
}

fn check_level_args(nu: f64, x: f64, a: f64) -> Result<()> {
    check_index(nu)?;
    if !(a > 0.0 && a.is_finite()) || !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("need a > 0 and x >= 0, got a = {a}, x = {x}")));
    }
    if x == a {
        return Err(Error::domain("the process starts on the level"));
    }
    Ok(())
}

/// Hitting time of level `a` by a Bessel process of index `ν` started at `x`:
/// the `j_{ν,k}` series below the level, Laplace-only above it.
pub fn bessel_level(nu: f64, x: f64, a: f64) -> Result<FptDensity> {
    check_level_args(nu, x, a)?;
    let name = format!("bessel_level(nu={nu}, x={x}, a={a})");
    if x < a {
        return Ok(FptDensity::new(
            name,
            f64::INFINITY,
            Representation::SpectralSeries {
                series: level_series(nu, x, a),
                t_min: DEFAULT_T_MIN,
            },
            Some(0.0),
        ));
    }
    let defect = if nu > 0.0 { 1.0 - (a / x).powf(2.0 * nu) } else { 0.0 };
    Ok(FptDensity::new(
        name,
        f64::INFINITY,
        Representation::LaplaceOnly(std::sync::Arc::new(move |l| bessel_level_laplace(nu, x, a, l))),
        Some(defect),
    ))
}

/// Series density for `0 ≤ x < a`.
pub fn bessel_level_density(nu: f64, x: f64, a: f64, t: f64) -> Result<f64> {
    if x >= a {
        return Err(Error::domain(format!(
            "the series density needs x < a (x = {x}, a = {a})"
        )));
    }
    bessel_level(nu, x, a)?.eval(t)
}

/// `E_x[e^{−λ²T_a/2}; T_a < ∞]`.
pub fn bessel_level_laplace(nu: f64, x: f64, a: f64, lambda: f64) -> Result<f64> {
    check_index(nu)?;
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("Laplace argument must be >= 0, got {lambda}")));
    }
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(Error::domain(format!("need a > 0 and x >= 0, got a = {a}, x = {x}")));
    }
    if x == a {
        return Ok(1.0);
    }
    if x < a {
        if lambda == 0.0 {
            return Ok(1.0);
        }
        return Ok((ln_phi_bessel(nu, x * lambda)? - ln_phi_bessel(nu, a * lambda)?).exp());
    }
    if lambda == 0.0 {
        return Ok(if nu > 0.0 { (a / x).powf(2.0 * nu) } else { 1.0 });
    }
    k_ratio(nu, x, a, lambda)
}

/// `(x/a)^{−ν} K_ν(xλ)/K_ν(aλ)` for `x > a`.
fn k_ratio(nu: f64, x: f64, a: f64, lambda: f64) -> Result<f64> {
    let kx = bessel_k_scaled(nu, x * lambda)?;
    let ka = bessel_k_scaled(nu, a * lambda)?;
    Ok((a / x).powf(nu) * kx / ka * (-(x - a) * lambda).exp())
}

/// Crossing of `a + bt` by a Bessel process started at `0 ≤ x < a`, on
/// `t < ζ^(b/a)`: the level series evaluated at `t/(1 + bt/a)` times
/// `e^{−(b/2a)(a² − x²) − b²t/2} (1 + bt/a)^{ν−1}`.
pub fn bessel_line(nu: f64, x: f64, a: f64, b: f64) -> Result<FptDensity> {
    check_level_args(nu, x, a)?;
    if x > a {
        return Err(Error::domain("the line series needs x < a"));
    }
    if b == 0.0 {
        return bessel_level(nu, x, a);
    }
    let series = level_series(nu, x, a);
    let beta = b / a;
    let shift = -(b / (2.0 * a)) * (a * a - x * x);
    let end = lifetime(beta);
    let t_min = DEFAULT_T_MIN;
    Ok(FptDensity::closed_form(
        format!("bessel_line(nu={nu}, x={x}, a={a}, b={b})"),
        end,
        None,
        move |t| {
            let s = 1.0 + beta * t;
            let tau = t / s;
            if tau < t_min {
                return Err(Error::SmallTime { t: tau, t_min });
            }
            let pre = (shift - b * b * t / 2.0).exp() * s.powf(nu - 1.0);
            Ok(pre * series.evaluate(tau)?.value)
        },
    ))
}

pub fn bessel_line_density(nu: f64, x: f64, a: f64, b: f64, t: f64) -> Result<f64> {
    bessel_line(nu, x, a, b)?.eval(t)
}

/// `ln p^ν_s(z0, u)` for the Bessel semigroup.
fn ln_bessel_kernel(nu: f64, s: f64, z0: f64, u: f64) -> Result<f64> {
    let w = z0 * u / s;
    Ok((u / s).ln() + nu * (u / z0).ln() - (u - z0) * (u - z0) / (2.0 * s)
        + bessel_i_scaled(nu, w)?.ln())
}

/// `E_x[e^{−λ²T/2}; T < a/b]` for the decreasing line `a − bt` (`a, b > 0`).
pub fn bessel_decreasing_line_laplace(nu: f64, x: f64, a: f64, b: f64, lambda: f64) -> Result<f64> {
    check_index(nu)?;
    if !(x >= 0.0) || !(a > 0.0) || !(b > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "need x >= 0, a > 0, b > 0 and finite lambda (x = {x}, a = {a}, b = {b}, lambda = {lambda})"
        )));
    }
    let s = b / (2.0 * a);
    let z0 = ((lambda * lambda + b * b) / 2.0).sqrt();
    let below = x <= a;
    let ratio = |u: f64| -> Result<f64> {
        let (xu, au) = (SQRT_2 * x * u, SQRT_2 * a * u);
        if below {
            Ok((ln_phi_bessel(nu, xu)? - ln_phi_bessel(nu, au)?).exp())
        } else {
            k_ratio(nu, x, a, SQRT_2 * u)
        }
    };
    let failure = std::cell::RefCell::new(None);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        match (ratio(u), ln_bessel_kernel(nu, s, z0, u)) {
            (Ok(r), Ok(lk)) => r * lk.exp(),
            (Err(e), _) | (_, Err(e)) => {
                failure.borrow_mut().get_or_insert(e.to_string());
                0.0
            }
        }
    };
    let opts = QuadOptions::tol(1e-15, 1e-11);
    let peak = z0.max((2.0 * (nu + 1.0) * s).sqrt());
    let head = integrate_with(&integrand, 0.0, peak, opts)?;
    let tail = integrate_with(&integrand, peak, f64::INFINITY, opts)?;
    if let Some(msg) = failure.into_inner() {
        return Err(Error::Quadrature(msg));
    }
    Ok((s * (a * a - x * x)).exp() * (head.value + tail.value))
}

/// `p^{(y)}_t(x, z)` of the h-transformed diffusion (`y = spec.y`).
pub fn transition_density(spec: &DiffusionSpec, t: f64, x: f64, z: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("transition density needs t > 0, got {t}")));
    }
    if !spec.in_state_space(x) || !spec.in_state_space(z) {
        return Err(Error::domain(format!("({x}, {z}) outside the state space of {spec}")));
    }
    let y = spec.y;
    match spec.kind {
        DiffusionKind::Brownian => {
            let d = z - x;
            Ok(spec.c() / t.sqrt() * (y * d - t * y * y / 2.0 - d * d / (2.0 * t)).exp())
        }
        DiffusionKind::Bessel { .. } => {
            let nu = spec.nu();
            let p = 2.0 * nu + 1.0;
            if z == 0.0 && p != 0.0 {
                return Ok(if p > 0.0 { 0.0 } else { f64::INFINITY });
            }
            let power = if p == 0.0 { 0.0 } else { p * (z.ln() - 0.5 * t.ln()) };
            let ln = -0.5 * t.ln() + ln_phi_bessel(nu, y * z)? - ln_phi_bessel(nu, y * x)?
                + ln_phi_bessel(nu, x * z / t)?
                + power
                - 0.5 * (t * y * y + (x * x + z * z) / t);
            Ok(ln.exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use std::f64::consts::PI;

    #[test]
    fn half_integer_laplace_reduces_to_sinh() {
        let (x, a) = (0.4, 1.3);
        for l in [0.3, 1.0, 4.0] {
            let v = bessel_level_laplace(0.5, x, a, l).unwrap();
            let e = (a / x) * (x * l).sinh() / (a * l).sinh();
            assert!((v - e).abs() < 1e-13 * e, "{v} {e}");
        }
    }

    #[test]
    fn defective_limit_above_level() {
        for nu in [0.5, 1.2] {
            let v = bessel_level_laplace(nu, 2.0, 1.0, 1e-9).unwrap();
            assert!((v - 0.5f64.powf(2.0 * nu)).abs() < 1e-6);
            assert_eq!(bessel_level_laplace(nu, 2.0, 1.0, 0.0).unwrap(), 0.5f64.powf(2.0 * nu));
        }
        assert_eq!(bessel_level_laplace(-0.3, 2.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(bessel_level_laplace(0.5, 2.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn series_laplace_matches_closed_form() {
        for (nu, x) in [(0.5, 0.3), (0.0, 0.5), (-0.5, 0.0), (1.5, 0.8)] {
            let d = bessel_level(nu, x, 1.0).unwrap();
            for l in [0.5, 1.0, 2.0] {
                let l2 = l * l / 2.0;
                let num = integrate(|t| d.eval(t).unwrap_or(0.0) * (-l2 * t).exp(), 0.0, 80.0)
                    .unwrap();
                let exact = bessel_level_laplace(nu, x, 1.0, l).unwrap();
                assert!((num - exact).abs() < 1e-6, "nu={nu} x={x} l={l}: {num} {exact}");
            }
        }
    }

    #[test]
    fn reflected_brownian_matches_image_series() {
        // |B| from 0 leaving [0, 1): image sum Σ (−1)^n (2n+1) e^{−(2n+1)²/2t}/√(2πt³)
        for t in [0.05, 0.3, 1.0, 3.0] {
            let images: f64 = (-40i32..40)
                .map(|n| {
                    let m = (2 * n + 1) as f64;
                    (if n % 2 == 0 { 1.0 } else { -1.0 }) * m * (-m * m / (2.0 * t)).exp()
                })
                .sum::<f64>()
                / (2.0 * PI * t * t * t).sqrt();
            let s = bessel_level_density(-0.5, 0.0, 1.0, t).unwrap();
            assert!((s - images).abs() < 1e-12 * images.abs().max(1e-3), "t={t}: {s} {images}");
        }
    }

    #[test]
    fn level_mass_is_one() {
        let d = bessel_level(0.7, 0.2, 1.5).unwrap();
        assert!((d.integrate(1e-3, 200.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn start_at_origin_is_continuous() {
        let a = bessel_level_density(0.3, 0.0, 1.0, 0.4).unwrap();
        let b = bessel_level_density(0.3, 1e-7, 1.0, 0.4).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn flat_line_is_level() {
        let d = bessel_line(0.5, 0.3, 1.0, 0.0).unwrap();
        assert_eq!(d.eval(0.7).unwrap(), bessel_level_density(0.5, 0.3, 1.0, 0.7).unwrap());
        let d = bessel_line(0.0, 0.5, 1.0, -0.5).unwrap();
        assert_eq!(d.support_end(), 2.0);
    }

    #[test]
    fn decreasing_line_laplace_matches_line_density() {
        for (nu, x, a, b) in [(0.5, 0.3, 1.0, 0.5), (0.0, 0.0, 1.0, 1.0), (1.0, 0.6, 1.2, 0.3)] {
            let d = bessel_line(nu, x, a, -b).unwrap();
            for l in [0.0, 1.0] {
                let l2 = l * l / 2.0;
                let num = integrate(
                    |t| d.eval(t).unwrap_or(0.0) * (-l2 * t).exp(),
                    0.0,
                    a / b,
                )
                .unwrap();
                let v = bessel_decreasing_line_laplace(nu, x, a, b, l).unwrap();
                assert!((num - v).abs() < 1e-6, "nu={nu} x={x} l={l}: {num} {v}");
            }
        }
    }

    #[test]
    fn decreasing_line_from_above_is_below_level_probability() {
        // reaching the falling line requires reaching the level first
        let v = bessel_decreasing_line_laplace(0.5, 2.0, 1.0, 0.5, 0.0).unwrap();
        assert!(v > 0.0 && v < 0.5, "{v}");
        let w = bessel_decreasing_line_laplace(0.5, 2.0, 1.0, 0.5, 1.0).unwrap();
        assert!(w < v);
    }

    #[test]
    fn brownian_transition_is_gaussian() {
        let s = DiffusionSpec::brownian(0.0);
        let (t, x, z): (f64, f64, f64) = (0.7, 0.2, -0.9);
        let g = (-(z - x) * (z - x) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
        assert!((transition_density(&s, t, x, z).unwrap() - g).abs() < 1e-15);
        let s = s.with_h(0.8).unwrap();
        let m = integrate(|z| z * transition_density(&s, 2.0, 0.5, z).unwrap(), -40.0, 40.0).unwrap();
        assert!((m - (0.5 + 0.8 * 2.0)).abs() < 1e-9);
    }

    #[test]
    fn bessel_transition_normalized_with_second_moment() {
        for delta in [0.6, 2.0, 3.0, 5.5] {
            let s = DiffusionSpec::bessel(delta, 0.0).unwrap();
            let (t, x) = (0.8, 1.1);
            let f = |z: f64| transition_density(&s, t, x, z).unwrap();
            let m0 = integrate(f, 0.0, f64::INFINITY).unwrap();
            let m2 = integrate(|z| z * z * f(z), 0.0, f64::INFINITY).unwrap();
            assert!((m0 - 1.0).abs() < 1e-8, "delta={delta}: {m0}");
            assert!((m2 - (x * x + delta * t)).abs() < 1e-6, "delta={delta}: {m2}");
        }
    }

    #[test]
    fn bessel_chapman_kolmogorov() {
        let s = DiffusionSpec::bessel(3.0, 0.0).unwrap();
        for (x, z) in [(0.5, 1.0), (1.0, 0.3), (0.0, 2.0)] {
            let lhs = integrate(
                |u| {
                    transition_density(&s, 0.4, x, u).unwrap()
                        * transition_density(&s, 0.9, u, z).unwrap()
                },
                0.0,
                f64::INFINITY,
            )
            .unwrap();
            let rhs = transition_density(&s, 1.3, x, z).unwrap();
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} {rhs}");
        }
    }

    #[test]
    fn wide_sense_bessel_is_normalized() {
        let s = DiffusionSpec::bessel(3.0, 0.0).unwrap().with_h(0.7).unwrap();
        let m = integrate(|z| transition_density(&s, 1.5, 0.4, z).unwrap(), 0.0, f64::INFINITY)
            .unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{m}");
    }
}
