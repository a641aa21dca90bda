//! Brownian crossing densities: levels, lines, square-root boundaries via the
//! Ornstein–Uhlenbeck series, and the parabola family via Airy zeros.

use std::f64::consts::PI;

use super::series::{shared, SpectralSeries, Term};
use super::{DiffusionSpec, FptDensity, Representation, DEFAULT_T_MIN};
use crate::moebius::Curve;
use crate::specfun::zeros::{airy_zeros_shared, pcf_nu_zeros_shared};
use crate::specfun::{airy_ai, airy_ai_prime, pcf_d_at_zero, pcf_d_nu_derivative_scaled};
use crate::{Error, Result};

const OU_MAX_TERMS: usize = 2000;
const AIRY_MAX_TERMS: usize = 8000;

fn check_level(a: f64) -> Result<()> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::domain(format!(
            "the boundary must start away from the process (a = {a})"
        )));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("density needs finite t > 0, got {t}")))
    }
}

/// `|a| (2πt³)^{−1/2} e^{−a²/2t}`.
pub fn bm_level_density(a: f64, t: f64) -> Result<f64> {
    bm_line_density(a, 0.0, t)
}

/// Bachelier–Lévy: `|a| (2πt³)^{−1/2} e^{−(a+bt)²/2t}`, valid for every `t > 0`.
pub fn bm_line_density(a: f64, b: f64, t: f64) -> Result<f64> {
    check_level(a)?;
    check_time(t)?;
    let r = a + b * t;
    Ok(a.abs() / (2.0 * PI * t * t * t).sqrt() * (-r * r / (2.0 * t)).exp())
}

pub fn bm_level(a: f64) -> Result<FptDensity> {
    check_level(a)?;
    Ok(FptDensity::closed_form(
        format!("bm_level(a={a})"),
        f64::INFINITY,
        Some(0.0),
        move |t| bm_level_density(a, t),
    ))
}

pub fn bm_line(a: f64, b: f64) -> Result<FptDensity> {
    check_level(a)?;
    let defect = if a * b > 0.0 { -(-2.0 * a * b).exp_m1() } else { 0.0 };
    Ok(FptDensity::closed_form(
        format!("bm_line(a={a}, b={b})"),
        f64::INFINITY,
        Some(defect),
        move |t| bm_line_density(a, b, t),
    ))
}

fn ou_series(a: f64, lambda: f64) -> std::sync::Arc<SpectralSeries> {
    let a = a.abs();
    let b = -a * lambda.sqrt();
    let key = format!("ou_{a:?}_{lambda:?}");
    shared(&key, move || {
        let scale = -0.5 * lambda * (-lambda * a * a / 4.0).exp();
        SpectralSeries::new(
            format!("ou_level(a={a}, lambda={lambda})"),
            OU_MAX_TERMS,
            move |from, to| {
                let zeros = pcf_nu_zeros_shared(b, to)?;
                zeros[from..to]
                    .iter()
                    .map(|&nu| {
                        let d0 = pcf_d_at_zero(nu);
                        let dn = pcf_d_nu_derivative_scaled(nu, b)?;
                        Ok(Term {
                            coef: scale * d0.ratio(dn),
                            rate: lambda * nu / 2.0,
                        })
                    })
                    .collect()
            },
            |_| 1.0,
        )
        .clamping_negative()
    })
}

/// Density of the first time the OU process `dU = dX − (λ/2)U dt`, `U_0 = 0`,
/// reaches `a`: the parabolic-cylinder zero series.
pub fn ou_level(a: f64, lambda: f64) -> Result<FptDensity> {
    check_level(a)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("OU rate must be positive, got {lambda}")));
    }
    let series = ou_series(a, lambda);
    Ok(FptDensity::new(
        format!("ou_level(a={a}, lambda={lambda})"),
        f64::INFINITY,
        Representation::SpectralSeries {
            series,
            t_min: DEFAULT_T_MIN,
        },
        Some(0.0),
    ))
}

pub fn ou_level_density(a: f64, lambda: f64, t: f64) -> Result<f64> {
    ou_level(a, lambda)?.eval(t)
}

/// Crossing density of `a√(1 + λt)`.
pub fn bm_sqrt(a: f64, lambda: f64) -> Result<FptDensity> {
    check_level(a)?;
    if lambda == 0.0 {
        return bm_level(a);
    }
    if lambda < 0.0 {
        let d = bm_sqrt_product(a, lambda, 0.0)?;
        return Ok(FptDensity::new(
            format!("bm_sqrt(a={a}, lambda={lambda})"),
            d.support_end(),
            d.representation().clone(),
            None,
        ));
    }
    let ou = ou_level(a, lambda)?;
    let name = format!("bm_sqrt(a={a}, lambda={lambda})");
    Ok(FptDensity::closed_form(name, f64::INFINITY, Some(0.0), move |t| {
        let s = (lambda * t).ln_1p() / lambda;
        Ok(ou.eval(s)? / (1.0 + lambda * t))
    }))
}

pub fn bm_sqrt_density(a: f64, lambda: f64, t: f64) -> Result<f64> {
    bm_sqrt(a, lambda)?.eval(t)
}

/// Crossing density of `a√((1 + λ1 t)(1 + λ2 t))`, `λ1 < λ2`, obtained by
/// transporting the `a√(1 + (λ2 − λ1)t)` density with `β = λ1`.
pub fn bm_sqrt_product(a: f64, lambda1: f64, lambda2: f64) -> Result<FptDensity> {
    check_level(a)?;
    if !(lambda1 < lambda2) {
        return Err(Error::domain(format!(
            "square-root product needs lambda1 < lambda2, got {lambda1}, {lambda2}"
        )));
    }
    let gap = lambda2 - lambda1;
    let base = bm_sqrt(a, gap)?;
    if lambda1 == 0.0 {
        return Ok(base);
    }
    let source = Curve::sqrt_product(a, gap, 0.0);
    crate::identity::transform_density(&base, &DiffusionSpec::brownian(0.0), lambda1, &source)
}

pub fn bm_sqrt_product_density(a: f64, lambda1: f64, lambda2: f64, t: f64) -> Result<f64> {
    bm_sqrt_product(a, lambda1, lambda2)?.eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParabolaKind {
    /// `1 + β²t²`
    Groeneboom,
    /// `(1 − βt)²`
    SquaredLine,
    /// `1/(1 + βt)`
    ReciprocalAffine,
}

fn groeneboom_series(beta: f64) -> std::sync::Arc<SpectralSeries> {
    let b2 = beta * beta;
    let key = format!("groeneboom_{b2:?}");
    shared(&key, move || {
        let gamma = 2.0 * b2;
        let kappa = (4.0 * b2).cbrt();
        let g = gamma / kappa;
        let b4 = b2 * b2;
        SpectralSeries::new(
            format!("groeneboom(beta={beta})"),
            AIRY_MAX_TERMS,
            move |from, to| {
                let zeros = airy_zeros_shared(to)?;
                zeros[from..to]
                    .iter()
                    .map(|&z| {
                        Ok(Term {
                            coef: g * airy_ai(z + kappa)? / airy_ai_prime(z)?,
                            rate: -g * z,
                        })
                    })
                    .collect()
            },
            move |t| (-2.0 / 3.0 * b4 * t * t * t).exp(),
        )
        .clamping_negative()
    })
}

fn groeneboom(beta: f64) -> FptDensity {
    FptDensity::new(
        format!("groeneboom(beta={beta})"),
        f64::INFINITY,
        Representation::SpectralSeries {
            series: groeneboom_series(beta),
            t_min: DEFAULT_T_MIN,
        },
        None,
    )
}

pub fn bm_parabola_family(kind: ParabolaKind, beta: f64) -> Result<FptDensity> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::domain(format!("parabola family needs beta != 0, got {beta}")));
    }
    let g = groeneboom(beta);
    match kind {
        ParabolaKind::Groeneboom => Ok(g),
        ParabolaKind::SquaredLine => {
            // Cameron–Martin with drift 2β turns (1 − βt)² into 1 + β²t².
            let name = format!("squared_line(beta={beta})");
            Ok(FptDensity::closed_form(name, f64::INFINITY, None, move |t| {
                let w = 2.0 * beta * (1.0 + beta * beta * t * t) - 2.0 * beta * beta * t;
                Ok(w.exp() * g.eval(t)?)
            }))
        }
        ParabolaKind::ReciprocalAffine => {
            let base = bm_parabola_family(ParabolaKind::SquaredLine, beta)?;
            crate::identity::transform_density(
                &base,
                &DiffusionSpec::brownian(0.0),
                beta,
                &Curve::squared_line(beta),
            )
        }
    }
}

pub fn bm_parabola_family_density(kind: ParabolaKind, beta: f64, t: f64) -> Result<f64> {
    bm_parabola_family(kind, beta)?.eval(t)
}

/// Crossing density of `a + bt²` (`ab > 0`) by Brownian scaling of the
/// `1 + β²s²` density.
pub fn parabola(a: f64, b: f64) -> Result<FptDensity> {
    check_level(a)?;
    if b == 0.0 {
        return bm_level(a);
    }
    if a * b < 0.0 {
        return Err(Error::Unavailable(format!(
            "parabola a + bt^2 with ab < 0 (a = {a}, b = {b})"
        )));
    }
    let (a, b) = (a.abs(), b.abs());
    let beta = (b * a * a * a).sqrt();
    let g = groeneboom(beta);
    let a2 = a * a;
    Ok(FptDensity::closed_form(
        format!("parabola(a={a}, b={b})"),
        f64::INFINITY,
        None,
        move |t| Ok(g.eval(t / a2)? / a2),
    ))
}
