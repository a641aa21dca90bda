//! Parabolic cylinder function `D_ν(x)` of real order and argument.
//!
//! Orders `ν ≤ 0` come from the integral representation
//! `D_{−p}(x) = e^{−x²/4}/Γ(p) ∫₀^∞ t^{p−1} e^{−t²/2 − xt} dt`; positive
//! orders are reached by the upward recurrence
//! `D_{ν+1}(x) = x D_ν(x) − ν D_{ν−1}(x)` started from the reduced order
//! `μ = ν − ⌈ν⌉ ∈ (−1, 0]`. Values are carried as [`Scaled`] numbers since
//! `D_ν` overflows `f64` long before the orders the spectral series need.

use std::f64::consts::PI;

use super::gamma::{ln_gamma, ln_gamma_signed};
use crate::numeric::{integrate_with, QuadOptions};
use crate::{Error, Result};

/// Largest order accepted; the spectral series of the OU hitting time need
/// orders well beyond the reach of plain `f64` values.
pub const MAX_ORDER: f64 = 20_000.0;
pub const MIN_ORDER: f64 = -200.0;
pub const MAX_ABS_X: f64 = 40.0;

const RESCALE_BITS: i64 = 600;
const RESCALE: f64 = 4.149_515_568_880_993e180; // 2^600

/// A real number `m · 2^k`, used where `f64` would overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub m: f64,
    pub k: i64,
}

fn pow2(k: i64) -> f64 {
    2f64.powi(k as i32)
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { m: 0.0, k: 0 };

    fn normalized(m: f64, k: i64) -> Self {
        if m == 0.0 || !m.is_finite() {
            return Scaled { m, k: if m == 0.0 { 0 } else { k } };
        }
        let b = m.abs().log2().floor() as i64;
        Scaled {
            m: m * pow2(-b),
            k: k + b,
        }
    }

    /// `sign · e^{ln_abs}`.
    pub fn from_ln(sign: f64, ln_abs: f64) -> Self {
        if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let l2 = ln_abs / std::f64::consts::LN_2;
        let k = l2.floor();
        Self::normalized(sign.signum() * ((l2 - k) * std::f64::consts::LN_2).exp(), k as i64)
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalized(x, 0)
    }

    pub fn to_f64(self) -> f64 {
        if self.k > 1100 {
            return self.m * f64::INFINITY;
        }
        if self.k < -1200 {
            return 0.0 * self.m;
        }
        // split to keep each power of two representable
        let h = self.k / 2;
        self.m * pow2(h) * pow2(self.k - h)
    }

    pub fn signum(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }

    pub fn ln_abs(self) -> f64 {
        self.m.abs().ln() + self.k as f64 * std::f64::consts::LN_2
    }

    /// `self / other` as a plain number.
    pub fn ratio(self, other: Scaled) -> f64 {
        Scaled::normalized(self.m / other.m, self.k - other.k).to_f64()
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled::normalized(self.m * other.m, self.k + other.k)
    }

    pub fn scale(self, c: f64) -> Scaled {
        Scaled::normalized(self.m * c, self.k)
    }

    pub fn sub(self, other: Scaled) -> Scaled {
        if other.m == 0.0 {
            return self;
        }
        if self.m == 0.0 {
            return other.scale(-1.0);
        }
        let k = self.k.max(other.k);
        let a = Scaled { m: self.m, k: self.k - k }.to_f64();
        let b = Scaled { m: other.m, k: other.k - k }.to_f64();
        Scaled::normalized(a - b, k)
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `ln ∫₀^∞ t^{p−1} e^{−t²/2 − xt} dt` for `p > 0`.
fn ln_moment_integral(p: f64, x: f64) -> Result<f64> {
    let opts = quad_opts();
    if p >= 1.0 {
        let peak = 0.5 * (-x + (x * x + 4.0 * (p - 1.0)).sqrt());
        let phi = |t: f64| {
            let lt = if p == 1.0 { 0.0 } else { (p - 1.0) * t.ln() };
            lt - 0.5 * t * t - x * t
        };
        let c = if peak > 0.0 { phi(peak) } else { 0.0 };
        let g = |t: f64| {
            if t <= 0.0 {
                if p == 1.0 {
                    (-c).exp()
                } else {
                    0.0
                }
            } else {
                (phi(t) - c).exp()
            }
        };
        let left = if peak > 0.0 {
            integrate_with(g, 0.0, peak, opts)?.value
        } else {
            0.0
        };
        let right = integrate_with(g, peak, f64::INFINITY, opts)?.value;
        Ok(c + (left + right).ln())
    } else {
        let c = if x < 0.0 { 0.5 * x * x } else { 0.0 };
        // subtract the t^{p−1} singularity on [0, 1] analytically
        let head = (-c).exp()
            * (1.0 / p
                + integrate_with(
                    |t: f64| {
                        if t == 0.0 {
                            0.0
                        } else {
                            ((p - 1.0) * t.ln()).exp() * (-0.5 * t * t - x * t).exp_m1()
                        }
                    },
                    0.0,
                    1.0,
                    opts,
                )?
                .value);
        let g = |t: f64| ((p - 1.0) * t.ln() - 0.5 * t * t - x * t - c).exp();
        let split = (-x).max(1.0);
        let mid = if split > 1.0 {
            integrate_with(g, 1.0, split, opts)?.value
        } else {
            0.0
        };
        let tail = integrate_with(g, split, f64::INFINITY, opts)?.value;
        Ok(c + (head + mid + tail).ln())
    }
}

/// `D_{−p}(x)` for `p ≥ 0`.
fn d_nonpositive(p: f64, x: f64) -> Result<Scaled> {
    if p == 0.0 {
        return Ok(Scaled::from_ln(1.0, -0.25 * x * x));
    }
    let l = ln_moment_integral(p, x)?;
    Ok(Scaled::from_ln(1.0, -0.25 * x * x - ln_gamma(p) + l))
}

fn check(nu: f64, x: f64) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&nu) || !(x.abs() <= MAX_ABS_X) {
        return Err(Error::domain(format!(
            "D_ν(x) supported for ν ∈ [{MIN_ORDER}, {MAX_ORDER}], |x| ≤ {MAX_ABS_X}; got ν = {nu}, x = {x}"
        )));
    }
    Ok(())
}

/// Values `D_{μ+k}(x)` for `k = 0..=n` with `μ ∈ (−1, 0]`.
pub(crate) fn ladder(mu: f64, x: f64, n: usize) -> Result<Vec<Scaled>> {
    debug_assert!(mu > -1.0 && mu <= 0.0);
    let d0 = d_nonpositive(-mu, x)?;
    let dm1 = d_nonpositive(1.0 - mu, x)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(d0);
    let mut k = d0.k;
    let mut prev = dm1.ratio(Scaled { m: 1.0, k });
    let mut cur = d0.m;
    let mut order = mu;
    for _ in 0..n {
        let next = x * cur - order * prev;
        prev = cur;
        cur = next;
        order += 1.0;
        if cur.abs() > RESCALE {
            prev *= pow2(-RESCALE_BITS);
            cur *= pow2(-RESCALE_BITS);
            k += RESCALE_BITS;
        }
        out.push(Scaled::normalized(cur, k));
    }
    Ok(out)
}

/// `D_ν(x)` as a [`Scaled`] number.
pub fn pcf_d_scaled(nu: f64, x: f64) -> Result<Scaled> {
    check(nu, x)?;
    if nu <= 0.0 {
        return d_nonpositive(-nu, x);
    }
    let n = nu.ceil();
    let mu = nu - n;
    let values = ladder(mu, x, n as usize)?;
    Ok(*values.last().expect("ladder is never empty"))
}

/// Parabolic cylinder function `D_ν(x)`; may overflow to `±∞` for very
/// large orders, use [`pcf_d_scaled`] there.
pub fn pcf_d(nu: f64, x: f64) -> Result<f64> {
    Ok(pcf_d_scaled(nu, x)?.to_f64())
}

/// Closed form `D_ν(0) = 2^{ν/2} √π / Γ((1−ν)/2)`.
pub fn pcf_d_at_zero(nu: f64) -> Scaled {
    let ln2 = std::f64::consts::LN_2;
    if nu > -1.0 {
        // reflected form 2^{ν/2} Γ((1+ν)/2) cos(πν/2)/√π with exact period reduction
        let r = nu.rem_euclid(4.0);
        let c = (0.5 * PI * r).cos();
        let c = if (r - 1.0).abs() < 1e-300 || (r - 3.0).abs() < 1e-300 {
            0.0
        } else {
            c
        };
        Scaled::from_ln(c, 0.5 * nu * ln2 + ln_gamma(0.5 * (1.0 + nu)) - 0.5 * PI.ln())
            .scale(c.abs())
    } else {
        let (l, s) = ln_gamma_signed(0.5 * (1.0 - nu));
        Scaled::from_ln(s, 0.5 * nu * ln2 + 0.5 * PI.ln() - l)
    }
}

/// `∂D_ν(x)/∂ν` by Richardson-extrapolated central differences (step `1e−5`).
pub fn pcf_d_nu_derivative_scaled(nu: f64, x: f64) -> Result<Scaled> {
    const H: f64 = 1e-5;
    let diff = |h: f64| -> Result<Scaled> {
        let up = pcf_d_scaled(nu + h, x)?;
        let down = pcf_d_scaled(nu - h, x)?;
        Ok(up.sub(down).scale(0.5 / h))
    };
    let d1 = diff(H)?;
    let d2 = diff(0.5 * H)?;
    Ok(d2.scale(4.0).sub(d1).scale(1.0 / 3.0))
}

pub fn pcf_d_nu_derivative(nu: f64, x: f64) -> Result<f64> {
    Ok(pcf_d_nu_derivative_scaled(nu, x)?.to_f64())
}
