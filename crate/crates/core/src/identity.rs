//! Transport of crossing densities along `S^(β)`.
//!
//! If `p` is the density of the first time the diffusion meets `f`, the
//! density for `f^(β) = S^(β) f` is
//!
//! ```text
//! p^{f^β}(t) = (1+βt)^{ν−1} Φ(y f^β(t)) / Φ(y f^β(t)/(1+βt))
//!              · exp(−(β/2) y²t²/(1+βt) − (β/2) f^β(t)²/(1+βt) + (β/2) x²)
//!              · p(t/(1+βt)),      0 < t < ζ^(β).
//! ```

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::catalog::{DiffusionSpec, FptDensity, Representation};
use crate::moebius::{lifetime, transformed_lifetime, Curve};
use crate::numeric::{integrate_with, QuadOptions};
use crate::{Error, Result};

/// Density process of the transformed path law, `M(t, X_t)`.
pub fn radon_nikodym_m(spec: &DiffusionSpec, beta: f64, t: f64, x_t: f64) -> Result<f64> {
    let zeta = lifetime(beta);
    if !(t >= 0.0) || t >= zeta {
        return Err(Error::OutsideSupport { t, end: zeta });
    }
    let s = 1.0 + beta * t;
    let y = spec.y;
    let ln = (-spec.nu() - 1.0) * s.ln() + spec.ln_phi(y * x_t / s)? - spec.ln_phi(y * x_t)?
        + 0.5 * beta * (y * y * t * t / s + x_t * x_t / s - spec.x * spec.x);
    Ok(ln.exp())
}

/// `ln` of the factor multiplying `p(t/(1+βt))`.
fn ln_prefactor(spec: &DiffusionSpec, beta: f64, target: &Curve, t: f64) -> Result<f64> {
    let s = 1.0 + beta * t;
    if !(s > 0.0) {
        return Err(Error::OutsideSupport { t, end: lifetime(beta) });
    }
    let f = target.eval(t)?;
    let y = spec.y;
    Ok((spec.nu() - 1.0) * s.ln() + spec.ln_phi(y * f)? - spec.ln_phi(y * f / s)?
        - 0.5 * beta * (y * y * t * t + f * f) / s
        + 0.5 * beta * spec.x * spec.x)
}

pub(crate) fn transported_value(
    base: &FptDensity,
    spec: &DiffusionSpec,
    beta: f64,
    target: &Curve,
    t: f64,
) -> Result<f64> {
    let u = t / (1.0 + beta * t);
    let p = base.eval(u)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_prefactor(spec, beta, target, t)?.exp() * p)
}

/// Density of the crossing time of `S^(β) f`, given the density `p` of the
/// crossing time of `f` under the same `spec`.
pub fn transform_density(
    p: &FptDensity,
    spec: &DiffusionSpec,
    beta: f64,
    f: &Curve,
) -> Result<FptDensity> {
    if !beta.is_finite() {
        return Err(Error::domain(format!("beta must be finite, got {beta}")));
    }
    let f0 = f.eval(0.0)?;
    if f0 == spec.x {
        return Err(Error::domain("the curve starts at the starting point of the process"));
    }
    if beta == 0.0 {
        return Ok(p.clone());
    }
    // collapse S^(β) ∘ S^(α) into S^(α+β) on the original base
    if let Representation::Transformed {
        base,
        beta: alpha,
        spec: inner,
        source,
        ..
    } = p.representation()
    {
        if inner == spec {
            let total = alpha + beta;
            if total == 0.0 {
                return Ok((**base).clone());
            }
            return build(base, spec, total, source, p.name());
        }
    }
    build(p, spec, beta, f, p.name())
}

fn build(
    base: &FptDensity,
    spec: &DiffusionSpec,
    beta: f64,
    source: &Curve,
    name: &str,
) -> Result<FptDensity> {
    let target = source.transform(beta);
    let end = transformed_lifetime(base.support_end().min(source.lifetime()), beta)
        .min(target.lifetime());
    Ok(FptDensity::new(
        format!("S^({beta}) {name}"),
        end,
        Representation::Transformed {
            base: Box::new(base.clone()),
            beta,
            spec: *spec,
            source: source.clone(),
            target,
        },
        None,
    ))
}

/// Audit record of one transport step.
#[derive(Debug, Clone)]
pub struct TransformReceipt {
    pub spec: DiffusionSpec,
    pub beta: f64,
    pub source: Curve,
    pub target: Curve,
}

impl TransformReceipt {
    pub fn new(spec: &DiffusionSpec, beta: f64, source: &Curve) -> Self {
        TransformReceipt {
            spec: *spec,
            beta,
            source: source.clone(),
            target: source.transform(beta),
        }
    }

    /// Factor `K(t)` with `p^{f^β}(t) = K(t) · p^f(t/(1+βt))`.
    pub fn prefactor(&self, t: f64) -> Result<f64> {
        Ok(ln_prefactor(&self.spec, self.beta, &self.target, t)?.exp())
    }

    pub fn time_map(&self, t: f64) -> Result<f64> {
        crate::moebius::time_map(t, self.beta)
    }

    pub fn to_json(&self, grid: &[f64]) -> Result<Value> {
        let pre = grid.iter().map(|&t| self.prefactor(t)).collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "spec": self.spec.to_json(),
            "beta": self.beta,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "grid": grid,
            "prefactor": pre,
        }))
    }
}

/// Maps crossing times `T` of `f^(β)` to crossing times `T/(1+βT)` of `f` by
/// the `S^(−β)` path. Non-crossings (`T ≥ ζ^(β)`, including `+∞`) map to `+∞`.
pub fn stopping_time_map(samples: &[f64], beta: f64) -> Vec<f64> {
    let zeta = lifetime(beta);
    samples
        .iter()
        .map(|&t| {
            if t < zeta {
                t / (1.0 + beta * t)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Inverse of [`stopping_time_map`].
pub fn inverse_stopping_time_map(samples: &[f64], beta: f64) -> Vec<f64> {
    let zeta = lifetime(-beta);
    samples
        .iter()
        .map(|&h| {
            if h < zeta {
                h / (1.0 - beta * h)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Residual of the strong-Markov decomposition of the hitting time of 0 by a
/// Brownian motion started at `x` through the first visit to `f`:
///
/// `x e^{−x²/2t}/√(2πt³) − ∫_0^t p(r) f(r) e^{−f(r)²/2(t−r)}/√(2π(t−r)³) dr`,
///
/// where `p` is the density of the first time the motion from `x` meets `f`.
pub fn convolution_residual(f: &Curve, x: f64, t: f64, p: &FptDensity) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    let f0 = f.eval(0.0)?;
    if !(f0 > 0.0) || !(x > f0) {
        return Err(Error::domain(format!(
            "need 0 < f(0) < x (f(0) = {f0}, x = {x})"
        )));
    }
    let lhs = x / (2.0 * PI * t * t * t).sqrt() * (-x * x / (2.0 * t)).exp();
    let failure = std::cell::RefCell::new(None);
    // r = t − w²: the kernel in w is smooth at the upper end
    let integrand = |w: f64| {
        let r = t - w * w;
        if r <= 0.0 || w <= 0.0 {
            return 0.0;
        }
        let d = w * w;
        let step = || -> Result<f64> {
            let fr = f.eval(r)?;
            if fr <= 0.0 {
                return Err(Error::domain(format!("curve not positive at r = {r}")));
            }
            let kernel = fr / (2.0 * PI * d * d * d).sqrt() * (-fr * fr / (2.0 * d)).exp();
            if kernel == 0.0 {
                return Ok(0.0);
            }
            Ok(2.0 * w * p.eval(r)? * kernel)
        };
        match step() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e.to_string());
                0.0
            }
        }
    };
    let rhs = integrate_with(integrand, 0.0, t.sqrt(), QuadOptions::tol(1e-16, 1e-12))?;
    if let Some(msg) = failure.into_inner() {
        return Err(Error::Quadrature(msg));
    }
    Ok(lhs - rhs.value)
}
