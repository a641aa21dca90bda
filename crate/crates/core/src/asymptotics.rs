//! Transience of curves and large-time behaviour of transported densities.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::catalog::FptDensity;
use crate::moebius::{extended_to_json, Curve};
use crate::numeric::{integrate_with, QuadOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Transient,
    NonTransient,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Transient => "transient",
            Verdict::NonTransient => "non-transient",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransienceReport {
    pub curve: Curve,
    /// `∫₁^∞ t^{−3/2} f e^{−f²/2t} dt`: quadrature to the window end plus a
    /// fitted power-law tail; `+∞` when judged divergent.
    pub integral_value: f64,
    pub verdict: Verdict,
    /// Window over which the tail slope was fitted.
    pub tail_window: (f64, f64),
    /// Fitted log-log slope of the integrand (`None` if not fitted).
    pub tail_slope: Option<f64>,
}

impl TransienceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "curve": self.curve.to_json(),
            "integral_value": extended_to_json(self.integral_value),
            "verdict": self.verdict.as_str(),
            "tail_window": [self.tail_window.0, self.tail_window.1],
            "tail_slope": self.tail_slope,
        })
    }
}

/// Default end of the quadrature window for [`kep_integral_test`].
pub const KEP_WINDOW_END: f64 = 1e4;

fn kep_integrand(f: &Curve, t: f64) -> Result<f64> {
    let v = f.eval(t)?;
    Ok(t.powf(-1.5) * v * (-v * v / (2.0 * t)).exp())
}

/// Integral test on `[1, 10⁴]` with tail extrapolation.
pub fn kep_integral_test(f: &Curve) -> Result<TransienceReport> {
    kep_integral_test_on(f, KEP_WINDOW_END)
}

/// Integral test with quadrature on `[1, t_end]` and a slope fit over the
/// last decade `[t_end/10, t_end]`.
///
/// Curves with `t^{−1/2} f(t)` non-increasing over the last decade stay below
/// `C√t` and are met infinitely often; they are reported non-transient
/// without fitting.
pub fn kep_integral_test_on(f: &Curve, t_end: f64) -> Result<TransienceReport> {
    if f.lifetime().is_finite() {
        return Err(Error::domain(format!(
            "integral test needs an unbounded lifetime, curve ends at {}",
            f.lifetime()
        )));
    }
    if !(t_end > 10.0) {
        return Err(Error::domain("integral test window must extend beyond t = 10"));
    }
    let t_lo = t_end / 10.0;
    let n = 41;
    let grid: Vec<f64> = (0..n)
        .map(|k| t_lo * 10f64.powf(k as f64 / (n - 1) as f64))
        .collect();
    let scaled: Vec<f64> = grid
        .iter()
        .map(|&t| f.eval(t).map(|v| v / t.sqrt()))
        .collect::<Result<_>>()?;
    let non_increasing = scaled.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let below_zero = scaled.last().is_some_and(|&v| v <= 0.0);
    if non_increasing || below_zero {
        return Ok(TransienceReport {
            curve: f.clone(),
            integral_value: f64::INFINITY,
            verdict: Verdict::NonTransient,
            tail_window: (t_lo, t_end),
            tail_slope: None,
        });
    }

    let body = integrate_with(
        |t| kep_integrand(f, t).unwrap_or(f64::NAN),
        1.0,
        t_end,
        QuadOptions::tol(1e-300, 1e-10),
    )?
    .value;

    // least-squares slope of ln g against ln t over the last decade
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| kep_integrand(f, t).map(|g| (t.ln(), g.ln())))
        .collect::<Result<_>>()?;
    let finite: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.1.is_finite()).collect();
    let slope = if finite.len() < 2 {
        f64::NEG_INFINITY
    } else {
        let m = finite.len() as f64;
        let (sx, sy) = finite.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (x, y) in &finite {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        sxy / sxx
    };

    let g_end = kep_integrand(f, t_end)?;
    let (verdict, value) = if slope < -1.1 {
        // ∫_T^∞ g ≈ g(T) T / (|slope| − 1) for a power-law tail; an upper bound
        // for faster decay
        let tail = if slope.is_finite() {
            g_end * t_end / (-slope - 1.0)
        } else {
            0.0
        };
        (Verdict::Transient, body + tail)
    } else if slope > -0.9 {
        (Verdict::NonTransient, f64::INFINITY)
    } else {
        (Verdict::Inconclusive, body)
    };
    Ok(TransienceReport {
        curve: f.clone(),
        integral_value: value,
        verdict,
        tail_window: (t_lo, t_end),
        tail_slope: Some(slope),
    })
}

/// Large-time approximant of the density for `S^(β) f`, `β > 0`:
/// `(βt)^{−3/2} e^{−(β/2) f^β(t)²/(1+βt)} p^f(1/β)`.
pub fn large_time_beta_pos(pf: &FptDensity, f: &Curve, beta: f64, t: f64) -> Result<f64> {
    ln_large_time_beta_pos(pf, f, beta, t).map(f64::exp)
}

/// Logarithm of [`large_time_beta_pos`]; stays finite where the value underflows.
pub fn ln_large_time_beta_pos(pf: &FptDensity, f: &Curve, beta: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("large-time approximant needs β > 0, got {beta}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let p = pf.eval(1.0 / beta)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!(
            "approximant needs 0 < p^f(1/β) < ∞, got {p}"
        )));
    }
    let s = 1.0 + beta * t;
    let fb = f.transform(beta).eval(t)?;
    Ok(-1.5 * (beta * t).ln() - 0.5 * beta * fb * fb / s + p.ln())
}

/// `f(u) − u f′(u)` at `u = t/(1+βt)`.
pub fn f_tilde(f: &Curve, beta: f64, t: f64) -> Result<f64> {
    let s = 1.0 + beta * t;
    if !(s > 0.0) {
        return Err(Error::OutsideSupport { t, end: -1.0 / beta });
    }
    let u = t / s;
    Ok(f.eval(u)? - u * f.derivative(u)?)
}

/// Approximant near the bridge endpoint `1/|β|` for `β < 0`:
/// `|β|^{3/2} (2π)^{−1/2} (1 − r) (f(u) − u f′(u))`, `u = t/(1+βt)`, where
/// `r = P(T^f < ∞)`.
///
/// The caller asserts the regularity conditions (increasing, concave, regularly
/// varying with index in `[1/2, 1)`); see [`regularity_spot_check`].
pub fn bridge_endpoint_asymptotic(f: &Curve, r: f64, beta: f64, t: f64) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(Error::domain(format!("endpoint approximant needs β < 0, got {beta}")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("crossing probability r must lie in [0, 1), got {r}")));
    }
    if !f.is_closed_form() {
        return Err(Error::Unavailable(format!(
            "f′ is only available for closed-form curves, not {}",
            f.kind_name()
        )));
    }
    let ft = f_tilde(f, beta, t)?;
    Ok(beta.abs().powf(1.5) / (2.0 * PI).sqrt() * (1.0 - r) * ft)
}

/// Grid-based check that `f` is increasing and concave with `f(t)/√t`
/// increasing on `[t_lo, t_hi]`; returns the violated properties.
pub fn regularity_spot_check(f: &Curve, t_lo: f64, t_hi: f64) -> Result<Vec<String>> {
    let n = 200;
    let grid: Vec<f64> = (0..=n)
        .map(|k| t_lo * (t_hi / t_lo).powf(k as f64 / n as f64))
        .collect();
    let v: Vec<f64> = grid.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?;
    let mut issues = Vec::new();
    if v.windows(2).any(|w| w[1] < w[0]) {
        issues.push("not increasing".to_string());
    }
    let concave = grid.windows(3).zip(v.windows(3)).all(|(t, y)| {
        let s1 = (y[1] - y[0]) / (t[1] - t[0]);
        let s2 = (y[2] - y[1]) / (t[2] - t[1]);
        s2 <= s1 + 1e-12 * s1.abs().max(1.0)
    });
    if !concave {
        issues.push("not concave".to_string());
    }
    if grid.iter().zip(&v).collect::<Vec<_>>().windows(2).any(|w| {
        w[1].1 / w[1].0.sqrt() < w[0].1 / w[0].0.sqrt()
    }) {
        issues.push("f(t)/√t not increasing".to_string());
    }
    for issue in &issues {
        log::warn!("regularity spot check for {}: {issue}", f.kind_name());
    }
    Ok(issues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bm_level, bm_line_density};

    #[test]
    fn classic_verdicts() {
        let slow = Curve::power_affine(1.0, 0.75);
        let r = kep_integral_test(&slow).unwrap();
        assert_eq!(r.verdict, Verdict::Transient);
        let sqrt = Curve::sqrt_product(0.5, 1.0, 0.0);
        assert_eq!(kep_integral_test(&sqrt).unwrap().verdict, Verdict::NonTransient);
        let line = kep_integral_test(&Curve::line(1.0, 1.0)).unwrap();
        assert_eq!(line.verdict, Verdict::Transient);
        assert!(line.integral_value.is_finite());
        assert_eq!(
            kep_integral_test(&Curve::constant(2.0)).unwrap().verdict,
            Verdict::NonTransient
        );
    }

    #[test]
    fn borderline_is_inconclusive() {
        // barely above √t: the integrand decays like t^{−1} up to a slow factor
        let c = Curve::power_affine(1.0, 0.52);
        let r = kep_integral_test(&c).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive, "slope {:?}", r.tail_slope);
    }

    #[test]
    fn finite_lifetime_is_rejected() {
        assert!(kep_integral_test(&Curve::constant(1.0).transform(-1.0)).is_err());
    }

    #[test]
    fn beta_pos_ratio_approaches_one() {
        let pf = bm_level(1.0).unwrap();
        let f = Curve::constant(1.0);
        let ln_exact = |t: f64| -0.5 * (2.0 * PI * t.powi(3)).ln() - (1.0 + t).powi(2) / (2.0 * t);
        let mut last = f64::INFINITY;
        for t in [1e2, 1e3, 1e4] {
            let ln_ratio = ln_large_time_beta_pos(&pf, &f, 1.0, t).unwrap() - ln_exact(t);
            let gap = ln_ratio.exp_m1().abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-3);
        let direct = large_time_beta_pos(&pf, &f, 1.0, 50.0).unwrap() / bm_line_density(1.0, 1.0, 50.0).unwrap();
        assert!((direct - (0.01f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn beta_pos_scaling_and_decrease() {
        let pf = bm_level(1.5).unwrap();
        let f = Curve::constant(1.5);
        let (b, t) = (0.5, 40.0);
        let a1 = large_time_beta_pos(&pf, &f, b, t).unwrap();
        let a2 = large_time_beta_pos(&pf, &f, b, 2.0 * t).unwrap();
        let fb = |s: f64| f.transform(b).eval(s).unwrap();
        let e = |s: f64| (-0.5 * b * fb(s).powi(2) / (1.0 + b * s)).exp();
        assert!((a2 / a1 - 2f64.powf(-1.5) * e(2.0 * t) / e(t)).abs() < 1e-13);
        assert!(a2 < a1 && a1 > 0.0);
    }

    #[test]
    fn f_tilde_for_power_curve() {
        let f = Curve::power_affine(1.0, 0.75);
        let (beta, t) = (-1.0, 0.9);
        let u: f64 = t / (1.0 + beta * t);
        let expect = (1.0 + u).powf(0.75) - 0.75 * u * (1.0 + u).powf(-0.25);
        assert!((f_tilde(&f, beta, t).unwrap() - expect).abs() < 1e-12);
        let v = bridge_endpoint_asymptotic(&f, 0.4, beta, t).unwrap();
        assert!((v - 0.6 * expect / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(bridge_endpoint_asymptotic(&f, 0.4, 0.5, t).is_err());
        assert!(bridge_endpoint_asymptotic(&f, 1.0, beta, t).is_err());
    }

    #[test]
    fn spot_check_flags_convex_curves() {
        assert!(regularity_spot_check(&Curve::power_affine(1.0, 0.75), 5.0, 1e3).unwrap().is_empty());
        let issues = regularity_spot_check(&Curve::parabola(1.0, 1.0), 1.0, 1e3).unwrap();
        assert!(issues.iter().any(|s| s == "not concave"));
    }
}
