//! Curve algebra for the Möbius-type family `S^(β) f(t) = (1+βt) f(t/(1+βt))`.
//!
//! Curves carry an explicit lifetime (`f64::INFINITY` is a legal value).
//! Transforming a closed-form curve stays symbolic whenever the image is
//! again a known kind; otherwise the result is a lazily evaluated
//! [`CurveKind::Transformed`] wrapper.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::numeric::MonotoneCubic;
use crate::{Error, Result};

/// Lifetime `ζ^(β)` of the transformed time axis: `1/|β|` for `β < 0`, else `+∞`.
pub fn lifetime(beta: f64) -> f64 {
    if beta < 0.0 {
        1.0 / beta.abs()
    } else {
        f64::INFINITY
    }
}

/// `t ↦ t/(1+βt)`.
pub fn time_map(t: f64, beta: f64) -> Result<f64> {
    let d = 1.0 + beta * t;
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "time map undefined: 1 + βt = {d} for t = {t}, β = {beta}"
        )));
    }
    Ok(t / d)
}

/// Inverse of [`time_map`]: `h ↦ h/(1−βh)`.
pub fn inverse_time_map(h: f64, beta: f64) -> Result<f64> {
    let d = 1.0 - beta * h;
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "inverse time map undefined: 1 − βh = {d} for h = {h}, β = {beta}"
        )));
    }
    Ok(h / d)
}

/// `S^(α) ∘ S^(β) = S^(α+β)`.
pub fn compose_transforms(alpha: f64, beta: f64) -> f64 {
    alpha + beta
}

/// Image of a lifetime `L` under `S^(β)`, i.e. `min(ζ^(β), L/(1−βL))`
/// with the limiting conventions at infinity.
pub fn transformed_lifetime(l: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return l;
    }
    let zeta = lifetime(beta);
    let image = if l.is_infinite() {
        zeta
    } else if beta * l >= 1.0 - 4.0 * f64::EPSILON {
        f64::INFINITY
    } else {
        l / (1.0 - beta * l)
    };
    zeta.min(image)
}

/// A transform parameter together with its lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParam {
    pub beta: f64,
    pub zeta: f64,
}

impl BetaParam {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            zeta: lifetime(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Constant { a: f64 },
    Line { a: f64, b: f64 },
    /// `a·√((1+λ1 t)(1+λ2 t))`
    SqrtProduct { a: f64, lambda1: f64, lambda2: f64 },
    /// `a + b t²`
    Parabola { a: f64, b: f64 },
    /// `(1−βt)²`
    SquaredLine { beta: f64 },
    /// `1/(1+βt)`
    ReciprocalAffine { beta: f64 },
    /// `a/2 − (t/a) ln((b + √(b² + 4 b1 e^{−a²/t}))/2)`
    Daniels { a: f64, b: f64, b1: f64 },
    /// `(1+βt)^α`
    PowerAffine { beta: f64, alpha: f64 },
    Tabulated(MonotoneCubic),
    Transformed { base: Box<Curve>, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    lifetime: f64,
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain("curve parameters must be finite"))
    }
}

impl Curve {
    pub fn constant(a: f64) -> Self {
        Self {
            kind: CurveKind::Constant { a },
            lifetime: f64::INFINITY,
        }
    }

    pub fn line(a: f64, b: f64) -> Self {
        Self {
            kind: CurveKind::Line { a, b },
            lifetime: f64::INFINITY,
        }
    }

    pub fn sqrt_product(a: f64, lambda1: f64, lambda2: f64) -> Self {
        let lifetime = lifetime(lambda1).min(lifetime(lambda2));
        Self {
            kind: CurveKind::SqrtProduct {
                a,
                lambda1,
                lambda2,
            },
            lifetime,
        }
    }

    pub fn parabola(a: f64, b: f64) -> Self {
        Self {
            kind: CurveKind::Parabola { a, b },
            lifetime: f64::INFINITY,
        }
    }

    pub fn squared_line(beta: f64) -> Self {
        Self {
            kind: CurveKind::SquaredLine { beta },
            lifetime: f64::INFINITY,
        }
    }

    pub fn reciprocal_affine(beta: f64) -> Self {
        Self {
            kind: CurveKind::ReciprocalAffine { beta },
            lifetime: lifetime(beta),
        }
    }

    pub fn power_affine(beta: f64, alpha: f64) -> Self {
        Self {
            kind: CurveKind::PowerAffine { beta, alpha },
            lifetime: lifetime(beta),
        }
    }

    /// Daniels curve; requires `a > 0` and a positive logarithm argument on
    /// the whole lifetime (`b1 > −b²/4` for an unbounded lifetime).
    pub fn daniels(a: f64, b: f64, b1: f64) -> Result<Self> {
        Self::daniels_on(a, b, b1, f64::INFINITY)
    }

    fn daniels_on(a: f64, b: f64, b1: f64, lifetime: f64) -> Result<Self> {
        check_finite(&[a, b, b1])?;
        if a <= 0.0 {
            return Err(Error::domain("Daniels curve needs a > 0"));
        }
        let edge = if lifetime.is_infinite() {
            1.0
        } else {
            (-a * a / lifetime).exp()
        };
        if b * b + 4.0 * b1 * edge <= 0.0 || (b <= 0.0 && b1 <= 0.0) {
            return Err(Error::domain(format!(
                "Daniels parameters invalid: need b1 > −b²/4 (b = {b}, b1 = {b1})"
            )));
        }
        Ok(Self {
            kind: CurveKind::Daniels { a, b, b1 },
            lifetime,
        })
    }

    /// Tabulated curve with knots starting at `t = 0`; evaluation beyond the
    /// last knot is an error.
    pub fn tabulated(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.first() != Some(&0.0) {
            return Err(Error::domain("tabulated curve must start at t = 0"));
        }
        let spline = MonotoneCubic::new(t, f)?;
        let lifetime = spline.domain().1;
        Ok(Self {
            kind: CurveKind::Tabulated(spline),
            lifetime,
        })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    /// Restricts the lifetime (never extends it).
    pub fn with_lifetime(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::domain("lifetime must be positive"));
        }
        if l > self.lifetime {
            return Err(Error::domain(format!(
                "lifetime {l} exceeds the curve's natural domain {}",
                self.lifetime
            )));
        }
        self.lifetime = l;
        Ok(self)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.lifetime || (t == self.lifetime && t.is_infinite()) {
            return Err(Error::OutsideSupport {
                t,
                end: self.lifetime,
            });
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.kind {
            CurveKind::Constant { a } => *a,
            CurveKind::Line { a, b } => a + b * t,
            CurveKind::SqrtProduct {
                a,
                lambda1,
                lambda2,
            } => a * ((1.0 + lambda1 * t) * (1.0 + lambda2 * t)).max(0.0).sqrt(),
            CurveKind::Parabola { a, b } => a + b * t * t,
            CurveKind::SquaredLine { beta } => (1.0 - beta * t).powi(2),
            CurveKind::ReciprocalAffine { beta } => 1.0 / (1.0 + beta * t),
            CurveKind::PowerAffine { beta, alpha } => (1.0 + beta * t).max(0.0).powf(*alpha),
            CurveKind::Daniels { a, b, b1 } => {
                if t == 0.0 {
                    return Ok(a / 2.0);
                }
                let e = (-a * a / t).exp();
                let g = b + (b * b + 4.0 * b1 * e).sqrt();
                a / 2.0 - (t / a) * (g / 2.0).ln()
            }
            CurveKind::Tabulated(s) => s.eval(t)?,
            CurveKind::Transformed { base, beta } => {
                let d = 1.0 + beta * t;
                d * base.eval(t / d)?
            }
        })
    }

    /// Time derivative `f′(t)`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.kind {
            CurveKind::Constant { .. } => 0.0,
            CurveKind::Line { b, .. } => *b,
            CurveKind::SqrtProduct {
                a,
                lambda1,
                lambda2,
            } => {
                let (p, q) = (1.0 + lambda1 * t, 1.0 + lambda2 * t);
                a * (lambda1 * q + lambda2 * p) / (2.0 * (p * q).sqrt())
            }
            CurveKind::Parabola { b, .. } => 2.0 * b * t,
            CurveKind::SquaredLine { beta } => -2.0 * beta * (1.0 - beta * t),
            CurveKind::ReciprocalAffine { beta } => -beta / (1.0 + beta * t).powi(2),
            CurveKind::PowerAffine { beta, alpha } => {
                alpha * beta * (1.0 + beta * t).powf(alpha - 1.0)
            }
            CurveKind::Daniels { a, b, b1 } => {
                if t == 0.0 {
                    return Ok(if *b > 0.0 { -b.ln() / a } else { f64::INFINITY });
                }
                let e = (-a * a / t).exp();
                let root = (b * b + 4.0 * b1 * e).sqrt();
                let g = b + root;
                let dg = 2.0 * b1 * e * a * a / (t * t * root);
                -(g / 2.0).ln() / a - (t / a) * dg / g
            }
            CurveKind::Tabulated(s) => s.derivative(t)?,
            CurveKind::Transformed { base, beta } => {
                let d = 1.0 + beta * t;
                let u = t / d;
                beta * base.eval(u)? + base.derivative(u)? / d
            }
        })
    }

    /// `S^(β) f`, simplified to a closed-form kind when possible.
    pub fn transform(&self, beta: f64) -> Curve {
        if beta == 0.0 {
            return self.clone();
        }
        let l = transformed_lifetime(self.lifetime, beta);
        let kind = match &self.kind {
            CurveKind::Constant { a } => CurveKind::Line { a: *a, b: a * beta },
            CurveKind::Line { a, b } => CurveKind::Line {
                a: *a,
                b: b + a * beta,
            },
            CurveKind::SqrtProduct {
                a,
                lambda1,
                lambda2,
            } => CurveKind::SqrtProduct {
                a: *a,
                lambda1: lambda1 + beta,
                lambda2: lambda2 + beta,
            },
            CurveKind::SquaredLine { beta: g } if *g == beta => {
                CurveKind::ReciprocalAffine { beta }
            }
            CurveKind::ReciprocalAffine { beta: g } if *g == -beta => {
                CurveKind::SquaredLine { beta: *g }
            }
            CurveKind::PowerAffine { beta: g, alpha } if *alpha == 0.0 => {
                let _ = g;
                CurveKind::Line { a: 1.0, b: beta }
            }
            CurveKind::PowerAffine { beta: g, alpha } if *alpha == 1.0 => CurveKind::Line {
                a: 1.0,
                b: g + beta,
            },
            CurveKind::PowerAffine { beta: g, alpha } if *g == -beta => CurveKind::PowerAffine {
                beta: -g,
                alpha: 1.0 - alpha,
            },
            CurveKind::Daniels { a, b, b1 } => CurveKind::Daniels {
                a: *a,
                b: b * (-beta * a * a / 2.0).exp(),
                b1: b1 * (-2.0 * beta * a * a).exp(),
            },
            CurveKind::Transformed { base, beta: g } => {
                let inner = base.transform(g + beta);
                return Curve {
                    kind: inner.kind,
                    lifetime: l,
                };
            }
            _ => CurveKind::Transformed {
                base: Box::new(self.clone()),
                beta,
            },
        };
        Curve { kind, lifetime: l }
    }

    /// True when the curve is a closed-form kind (not tabulated or wrapped).
    pub fn is_closed_form(&self) -> bool {
        !matches!(
            self.kind,
            CurveKind::Tabulated(_) | CurveKind::Transformed { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            CurveKind::Constant { .. } => "constant",
            CurveKind::Line { .. } => "line",
            CurveKind::SqrtProduct { .. } => "sqrt_product",
            CurveKind::Parabola { .. } => "parabola",
            CurveKind::SquaredLine { .. } => "squared_line",
            CurveKind::ReciprocalAffine { .. } => "reciprocal_affine",
            CurveKind::Daniels { .. } => "daniels",
            CurveKind::PowerAffine { .. } => "power_affine",
            CurveKind::Tabulated(_) => "tabulated",
            CurveKind::Transformed { .. } => "transformed",
        }
    }

    pub fn to_json(&self) -> Value {
        let params = match &self.kind {
            CurveKind::Constant { a } => json!({ "a": a }),
            CurveKind::Line { a, b } => json!({ "a": a, "b": b }),
            CurveKind::SqrtProduct {
                a,
                lambda1,
                lambda2,
            } => json!({ "a": a, "lambda1": lambda1, "lambda2": lambda2 }),
            CurveKind::Parabola { a, b } => json!({ "a": a, "b": b }),
            CurveKind::SquaredLine { beta } => json!({ "beta": beta }),
            CurveKind::ReciprocalAffine { beta } => json!({ "beta": beta }),
            CurveKind::Daniels { a, b, b1 } => json!({ "a": a, "b": b, "b1": b1 }),
            CurveKind::PowerAffine { beta, alpha } => json!({ "beta": beta, "alpha": alpha }),
            CurveKind::Tabulated(s) => {
                let (t, f) = s.knots();
                json!({ "t": t, "f": f, "interpolation": "monotone_cubic" })
            }
            CurveKind::Transformed { base, beta } => json!({ "base": base.to_json(), "beta": beta }),
        };
        json!({
            "kind": self.kind_name(),
            "params": params,
            "lifetime": extended_to_json(self.lifetime),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("curve must be a JSON object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("curve.kind missing".into()))?;
        let empty = Map::new();
        let params = obj.get("params").and_then(Value::as_object).unwrap_or(&empty);
        let p = |name: &str| -> Result<f64> {
            params
                .get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Config(format!("curve {kind}: parameter '{name}' missing")))
        };
        let curve = match kind {
            "constant" => Curve::constant(p("a")?),
            "line" => Curve::line(p("a")?, p("b")?),
            "sqrt_product" => Curve::sqrt_product(p("a")?, p("lambda1")?, p("lambda2")?),
            "parabola" => Curve::parabola(p("a")?, p("b")?),
            "squared_line" => Curve::squared_line(p("beta")?),
            "reciprocal_affine" => Curve::reciprocal_affine(p("beta")?),
            "power_affine" => Curve::power_affine(p("beta")?, p("alpha")?),
            "daniels" => {
                let l = match obj.get("lifetime") {
                    Some(l) => extended_from_json(l)?,
                    None => f64::INFINITY,
                };
                return Curve::daniels_on(p("a")?, p("b")?, p("b1")?, l);
            }
            "tabulated" => {
                let arr = |name: &str| -> Result<Vec<f64>> {
                    serde_json::from_value(params.get(name).cloned().unwrap_or(Value::Null))
                        .map_err(|_| Error::Config(format!("tabulated curve: '{name}' missing")))
                };
                Curve::tabulated(arr("t")?, arr("f")?)?
            }
            "transformed" => {
                let base = Curve::from_json(
                    params
                        .get("base")
                        .ok_or_else(|| Error::Config("transformed curve: 'base' missing".into()))?,
                )?;
                let beta = p("beta")?;
                let kind = CurveKind::Transformed {
                    base: Box::new(base.clone()),
                    beta,
                };
                Curve {
                    kind,
                    lifetime: transformed_lifetime(base.lifetime, beta),
                }
            }
            other => return Err(Error::Config(format!("unknown curve kind '{other}'"))),
        };
        match obj.get("lifetime") {
            Some(l) => {
                let l = extended_from_json(l)?;
                if l == curve.lifetime {
                    Ok(curve)
                } else {
                    curve.with_lifetime(l)
                }
            }
            None => Ok(curve),
        }
    }
}

pub(crate) fn extended_to_json(x: f64) -> Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

pub(crate) fn extended_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Config("bad number".into())),
        _ => Err(Error::Config(format!("expected number or \"inf\", got {v}"))),
    }
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Curve::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(end: f64, n: usize) -> Vec<f64> {
        let end = end.min(5.0);
        (0..n).map(|i| end * i as f64 / n as f64).collect()
    }

    fn wrapped(c: &Curve, beta: f64) -> Curve {
        Curve {
            kind: CurveKind::Transformed {
                base: Box::new(c.clone()),
                beta,
            },
            lifetime: transformed_lifetime(c.lifetime, beta),
        }
    }

    #[test]
    fn constant_maps_to_line() {
        let c = Curve::constant(1.0).transform(0.5);
        assert_eq!(c.kind(), &CurveKind::Line { a: 1.0, b: 0.5 });
        assert_eq!(c.lifetime(), f64::INFINITY);
    }

    #[test]
    fn lifetimes() {
        assert_eq!(lifetime(-2.0), 0.5);
        assert_eq!(lifetime(3.0), f64::INFINITY);
        assert_eq!(lifetime(0.0), f64::INFINITY);
        let line = Curve::constant(1.0).transform(-2.0);
        assert_eq!(line.lifetime(), 0.5);
        // the limiting-sense relation between the two lifetimes
        for b in [0.7, -0.7, 3.0] {
            assert_eq!(transformed_lifetime(lifetime(-b), b), lifetime(b));
        }
    }

    #[test]
    fn time_maps() {
        assert_eq!(time_map(1.0, 1.0).unwrap(), 0.5);
        let h = time_map(0.3, -1.5).unwrap();
        assert!((inverse_time_map(h, -1.5).unwrap() - 0.3).abs() < 1e-15);
        assert!(time_map(1.0, -1.0).is_err());
    }

    #[test]
    fn sqrt_product_rule() {
        let b = 0.3;
        let f = Curve::sqrt_product(1.0, 2.0 * b, 0.0);
        let g = f.transform(0.4);
        assert_eq!(
            g.kind(),
            &CurveKind::SqrtProduct {
                a: 1.0,
                lambda1: 2.0 * b + 0.4,
                lambda2: 0.4
            }
        );
        for t in grid(5.0, 20) {
            let lazy = wrapped(&f, 0.4).eval(t).unwrap();
            assert!((g.eval(t).unwrap() - lazy).abs() < 1e-12);
        }
    }

    #[test]
    fn symbolic_rules_agree_with_lazy_evaluation() {
        let cases = vec![
            (Curve::power_affine(0.8, 0.75), -0.8),
            (Curve::squared_line(0.8), 0.8),
            (Curve::reciprocal_affine(0.6), -0.6),
            (Curve::daniels(1.0, 1.0, 0.25).unwrap(), 0.7),
            (Curve::daniels(1.0, 1.0, 0.25).unwrap(), -0.7),
            (Curve::power_affine(0.5, 0.0), 0.3),
            (Curve::power_affine(0.5, 1.0), -0.3),
        ];
        for (f, beta) in cases {
            let g = f.transform(beta);
            assert!(g.is_closed_form(), "{:?}", g.kind());
            let lazy = wrapped(&f, beta);
            assert_eq!(g.lifetime(), lazy.lifetime());
            for t in grid(g.lifetime() * 0.999, 40) {
                let (x, y) = (g.eval(t).unwrap(), lazy.eval(t).unwrap());
                assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()), "{t}: {x} vs {y}");
                let (dx, dy) = (g.derivative(t).unwrap(), lazy.derivative(t).unwrap());
                assert!((dx - dy).abs() < 1e-9 * (1.0 + dy.abs()), "{t}: {dx} vs {dy}");
            }
        }
    }

    #[test]
    fn daniels_derivative_matches_difference_quotient() {
        let f = Curve::daniels(1.0, 1.0, 0.25).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let h = 1e-6;
            let fd = (f.eval(t + h).unwrap() - f.eval(t - h).unwrap()) / (2.0 * h);
            assert!((f.derivative(t).unwrap() - fd).abs() < 1e-7);
        }
        assert!(Curve::daniels(1.0, 1.0, -0.3).is_err());
    }

    #[test]
    fn tabulated_composition() {
        let t: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let f: Vec<f64> = t.iter().map(|s| 1.0 + (s * 0.5).sin() * 0.3).collect();
        let c = Curve::tabulated(t, f).unwrap();
        let lhs = c.transform(-0.4).transform(0.7);
        let rhs = c.transform(0.3);
        let end = lhs.lifetime().min(rhs.lifetime()).min(5.0);
        for s in grid(end, 50) {
            assert!((lhs.eval(s).unwrap() - rhs.eval(s).unwrap()).abs() < 1e-12);
        }
        assert!(c.eval(10.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let curves = vec![
            Curve::constant(1.0),
            Curve::line(1.0, -0.5).transform(0.0),
            Curve::constant(2.0).transform(-1.0),
            Curve::daniels(1.0, 1.0, 0.25).unwrap().transform(-0.5),
            Curve::parabola(1.0, 2.0).transform(0.3),
            Curve::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 2.5]).unwrap(),
        ];
        for c in curves {
            let s = serde_json::to_string(&c).unwrap();
            let back: Curve = serde_json::from_str(&s).unwrap();
            assert_eq!(back, c);
        }
    }

    fn curve_strategy() -> impl Strategy<Value = Curve> {
        prop_oneof![
            (-3.0..3.0f64).prop_map(Curve::constant),
            (-3.0..3.0f64, -2.0..2.0f64).prop_map(|(a, b)| Curve::line(a, b)),
            (0.1..3.0f64, -1.0..2.0f64, 0.0..2.0f64)
                .prop_map(|(a, l1, l2)| Curve::sqrt_product(a, l1, l2)),
            (-2.0..2.0f64, -1.0..1.0f64).prop_map(|(a, b)| Curve::parabola(a, b)),
            (-1.0..1.0f64).prop_map(Curve::squared_line),
            (0.0..1.0f64).prop_map(Curve::reciprocal_affine),
            (-1.0..1.0f64, 0.0..1.5f64).prop_map(|(b, a)| Curve::power_affine(b, a)),
            (0.5..2.0f64, 0.5..2.0f64, 0.0..0.5f64)
                .prop_map(|(a, b, b1)| Curve::daniels(a, b, b1).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn semigroup(f in curve_strategy(), alpha in -1.0..1.0f64, beta in -1.0..1.0f64) {
            let lhs = f.transform(beta).transform(alpha);
            let rhs = f.transform(compose_transforms(alpha, beta));
            let end = lhs.lifetime().min(rhs.lifetime());
            for t in grid(end * 0.98, 50) {
                let (x, y) = (lhs.eval(t).unwrap(), rhs.eval(t).unwrap());
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{} vs {} at {}", x, y, t);
            }
        }

        #[test]
        fn identity_is_exact(f in curve_strategy()) {
            prop_assert_eq!(f.transform(0.0), f);
        }

        #[test]
        fn lines_are_preserved(a in -3.0..3.0f64, b in -3.0..3.0f64, beta in -3.0..3.0f64) {
            let g = Curve::line(a, b).transform(beta);
            prop_assert_eq!(g.kind(), &CurveKind::Line { a, b: b + a * beta });
        }

        #[test]
        fn time_map_round_trip(t in 0.0..100.0f64, beta in -5.0..5.0f64) {
            prop_assume!(1.0 + beta * t > 1e-6);
            let h = time_map(t, beta).unwrap();
            let back = inverse_time_map(h, beta).unwrap();
            prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t));
        }
    }
}
