//! Crossing-time densities of Brownian motion and Bessel processes.
//!
//! A [`DiffusionSpec`] names the diffusion together with its start point and
//! h-transform parameter; an [`FptDensity`] is a crossing-time density in one
//! of four representations (closed form, spectral series, transported, or
//! Laplace transform only).

mod bessel;
mod brownian;
pub mod series;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::moebius::{Curve, CurveKind};
use crate::numeric::{integrate_with, QuadOptions};
use crate::specfun::bessel::ln_bessel_i;
use crate::specfun::ln_gamma;
use crate::{Error, Result};

pub use bessel::{
    bessel_decreasing_line_laplace, bessel_level, bessel_level_density, bessel_level_laplace,
    bessel_line, bessel_line_density, transition_density,
};
pub use brownian::{
    bm_level, bm_level_density, bm_line, bm_line_density, bm_parabola_family,
    bm_parabola_family_density, bm_sqrt, bm_sqrt_density, bm_sqrt_product,
    bm_sqrt_product_density, ou_level, ou_level_density, parabola, ParabolaKind,
};
pub use series::{SeriesValue, SpectralSeries, Term};

/// Default lower limit for series evaluation.
pub const DEFAULT_T_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiffusionKind {
    Brownian,
    Bessel { delta: f64 },
}

/// Diffusion, start point `x` and h-transform parameter `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub kind: DiffusionKind,
    pub x: f64,
    pub y: f64,
}

impl DiffusionSpec {
    pub fn brownian(x: f64) -> Self {
        DiffusionSpec {
            kind: DiffusionKind::Brownian,
            x,
            y: 0.0,
        }
    }

    pub fn bessel(delta: f64, x: f64) -> Result<Self> {
        DiffusionSpec {
            kind: DiffusionKind::Bessel { delta },
            x,
            y: 0.0,
        }
        .validated()
    }

    /// Same diffusion under the h-transform with parameter `y`.
    pub fn with_h(self, y: f64) -> Result<Self> {
        DiffusionSpec { y, ..self }.validated()
    }

    pub fn with_start(self, x: f64) -> Result<Self> {
        DiffusionSpec { x, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::domain("start point and h-parameter must be finite"));
        }
        if let DiffusionKind::Bessel { delta } = self.kind {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::domain(format!("Bessel dimension must be positive, got {delta}")));
            }
            if self.x < 0.0 || self.y < 0.0 {
                return Err(Error::domain("Bessel start point and h-parameter must be nonnegative"));
            }
        }
        Ok(self)
    }

    pub fn is_brownian(&self) -> bool {
        matches!(self.kind, DiffusionKind::Brownian)
    }

    /// Index `ν`: −1/2 for Brownian motion, `δ/2 − 1` for Bessel.
    pub fn nu(&self) -> f64 {
        match self.kind {
            DiffusionKind::Brownian => -0.5,
            DiffusionKind::Bessel { delta } => delta / 2.0 - 1.0,
        }
    }

    pub fn c(&self) -> f64 {
        match self.kind {
            DiffusionKind::Brownian => 1.0 / (2.0 * PI).sqrt(),
            DiffusionKind::Bessel { .. } => 1.0,
        }
    }

    /// `ln Φ(z)`, with `Φ = exp` (Brownian) or `Φ(z) = z^{−ν} I_ν(z)` (Bessel).
    pub fn ln_phi(&self, z: f64) -> Result<f64> {
        match self.kind {
            DiffusionKind::Brownian => Ok(z),
            DiffusionKind::Bessel { .. } => ln_phi_bessel(self.nu(), z),
        }
    }

    pub fn phi(&self, z: f64) -> Result<f64> {
        Ok(self.ln_phi(z)?.exp())
    }

    /// Whether `z` lies in the state space.
    pub fn in_state_space(&self, z: f64) -> bool {
        z.is_finite() && (self.is_brownian() || z >= 0.0)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}

impl fmt::Display for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiffusionKind::Brownian => write!(f, "brownian(x={}, y={})", self.x, self.y),
            DiffusionKind::Bessel { delta } => {
                write!(f, "bessel(delta={delta}, x={}, y={})", self.x, self.y)
            }
        }
    }
}

/// `ln(z^{−ν} I_ν(z))` for `z ≥ 0`, continuous at 0.
pub(crate) fn ln_phi_bessel(nu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Φ needs a finite nonnegative argument, got {z}")));
    }
    if z < 1.0 {
        // 2^{−ν} Σ (z²/4)^k / (k! Γ(k+ν+1))
        let q = z * z / 4.0;
        let lead = -nu * 2f64.ln() - ln_gamma(nu + 1.0);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let k = k as f64;
            term *= q / (k * (k + nu));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        return Ok(lead + sum.ln());
    }
    Ok(-nu * z.ln() + ln_bessel_i(nu, z)?)
}

pub type Evaluator = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// How a density is evaluated.
#[derive(Clone)]
pub enum Representation {
    ClosedForm(Evaluator),
    SpectralSeries {
        series: Arc<SpectralSeries>,
        t_min: f64,
    },
    /// Transport of `base` (the density of `source` under `spec`) by `S^(β)`.
    Transformed {
        base: Box<FptDensity>,
        beta: f64,
        spec: DiffusionSpec,
        source: Curve,
        target: Curve,
    },
    /// Only `λ ↦ E[e^{−λ²T/2}]` is known.
    LaplaceOnly(Evaluator),
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::ClosedForm(_) => write!(f, "ClosedForm"),
            Representation::SpectralSeries { series, t_min } => f
                .debug_struct("SpectralSeries")
                .field("series", series)
                .field("t_min", t_min)
                .finish(),
            Representation::Transformed { base, beta, .. } => f
                .debug_struct("Transformed")
                .field("base", base)
                .field("beta", beta)
                .finish(),
            Representation::LaplaceOnly(_) => write!(f, "LaplaceOnly"),
        }
    }
}

/// A crossing-time density on `(0, support_end)`.
#[derive(Debug, Clone)]
pub struct FptDensity {
    name: String,
    support_end: f64,
    repr: Representation,
    defective_mass: Option<f64>,
}

impl FptDensity {
    pub fn new(
        name: impl Into<String>,
        support_end: f64,
        repr: Representation,
        defective_mass: Option<f64>,
    ) -> Self {
        FptDensity {
            name: name.into(),
            support_end,
            repr,
            defective_mass,
        }
    }

    pub fn closed_form(
        name: impl Into<String>,
        support_end: f64,
        defective_mass: Option<f64>,
        f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, support_end, Representation::ClosedForm(Arc::new(f)), defective_mass)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// `P(T = ∞)` when known (the density integrates to one minus this).
    pub fn defective_mass(&self) -> Option<f64> {
        self.defective_mass
    }

    /// Same density with another series threshold (series representations only;
    /// transported densities forward it to their base).
    pub fn with_t_min(mut self, t_min: f64) -> Self {
        match &mut self.repr {
            Representation::SpectralSeries { t_min: m, .. } => *m = t_min,
            Representation::Transformed { base, .. } => {
                let b = std::mem::replace(base.as_mut(), FptDensity::placeholder());
                **base = b.with_t_min(t_min);
            }
            _ => {}
        }
        self
    }

    fn placeholder() -> Self {
        FptDensity::closed_form("placeholder", f64::INFINITY, None, |_| Ok(0.0))
    }

    pub fn is_evaluable(&self) -> bool {
        !matches!(self.repr, Representation::LaplaceOnly(_))
    }

    /// Density value at `t ∈ (0, support_end)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("density needs t > 0, got {t}")));
        }
        if t >= self.support_end {
            return Err(Error::OutsideSupport {
                t,
                end: self.support_end,
            });
        }
        match &self.repr {
            Representation::ClosedForm(f) => f(t),
            Representation::SpectralSeries { series, t_min } => {
                if t < *t_min {
                    return Err(Error::SmallTime { t, t_min: *t_min });
                }
                Ok(series.evaluate(t)?.value)
            }
            Representation::Transformed {
                base,
                beta,
                spec,
                target,
                ..
            } => crate::identity::transported_value(base, spec, *beta, target, t),
            Representation::LaplaceOnly(_) => Err(Error::Unavailable(format!(
                "{} is known through its Laplace transform only",
                self.name
            ))),
        }
    }

    /// `E[e^{−λ²T/2}; T < ∞]` for Laplace-only densities.
    pub fn laplace(&self, lambda: f64) -> Result<f64> {
        match &self.repr {
            Representation::LaplaceOnly(f) => f(lambda),
            _ => {
                let (lo, hi) = (0.0, self.support_end);
                let opts = QuadOptions::tol(1e-13, 1e-10);
                let l2 = lambda * lambda / 2.0;
                let r = integrate_with(
                    |t| {
                        if t <= 0.0 || t >= hi {
                            0.0
                        } else {
                            self.eval(t).unwrap_or(0.0) * (-l2 * t).exp()
                        }
                    },
                    lo,
                    hi,
                    opts,
                )?;
                Ok(r.value)
            }
        }
    }

    /// `∫_{t0}^{t1} p(t) dt`; points where evaluation fails (below a series
    /// threshold) count as zero.
    pub fn integrate(&self, t0: f64, t1: f64) -> Result<f64> {
        let hi = t1.min(self.support_end);
        if !(hi > t0) {
            return Ok(0.0);
        }
        let r = integrate_with(
            |t| match self.eval(t) {
                Ok(v) => v,
                Err(_) => 0.0,
            },
            t0.max(0.0),
            hi,
            QuadOptions::tol(1e-13, 1e-10),
        )?;
        Ok(r.value)
    }

    /// Total mass on the support.
    pub fn mass(&self) -> Result<f64> {
        self.integrate(0.0, self.support_end)
    }

    /// Samples the density on `grid`.
    pub fn tabulate(&self, grid: &[f64]) -> Result<DensityTable> {
        let values = grid.iter().map(|&t| self.eval(t)).collect::<Result<Vec<_>>>()?;
        Ok(DensityTable {
            name: self.name.clone(),
            support_end: self.support_end,
            grid: grid.to_vec(),
            values,
            defective_mass: self.defective_mass,
        })
    }
}

/// A density sampled on a grid, for export.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub name: String,
    pub support_end: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub defective_mass: Option<f64>,
}

impl DensityTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value\n");
        for (t, v) in self.grid.iter().zip(&self.values) {
            s.push_str(&format!("{t:?},{v:?}\n"));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "support": [0.0, crate::moebius::extended_to_json(self.support_end)],
            "grid": self.grid,
            "values": self.values,
            "defective_mass": self.defective_mass,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Config("malformed density table".into());
        let support = v.get("support").and_then(Value::as_array).ok_or_else(bad)?;
        let end = crate::moebius::extended_from_json(support.get(1).ok_or_else(bad)?)?;
        let nums = |key: &str| -> Result<Vec<f64>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_f64().ok_or_else(bad))
                .collect()
        };
        Ok(DensityTable {
            name: v.get("name").and_then(Value::as_str).unwrap_or("").to_string(),
            support_end: end,
            grid: nums("grid")?,
            values: nums("values")?,
            defective_mass: v.get("defective_mass").and_then(Value::as_f64),
        })
    }
}

/// Looks up the catalog density for `curve` under `spec` (with `y = 0`).
///
/// Brownian motion: constant, line, square-root, square-root product,
/// Groeneboom parabola `a + bt²`, squared line and reciprocal affine curves
/// (the last four need `x = 0`; levels and lines are shifted by the start).
/// Bessel: levels (series below, Laplace-only above) and lines started below.
pub fn for_curve(spec: &DiffusionSpec, curve: &Curve) -> Result<FptDensity> {
    if spec.y != 0.0 {
        return Err(Error::Unavailable(
            "catalog densities are for the untransformed law (y = 0)".into(),
        ));
    }
    let x = spec.x;
    let need_origin = || {
        if x == 0.0 {
            Ok(())
        } else {
            Err(Error::Unavailable(format!(
                "{} crossing densities need the start at 0",
                curve.kind_name()
            )))
        }
    };
    let d = match (spec.kind, curve.kind()) {
        (DiffusionKind::Brownian, CurveKind::Constant { a }) => bm_level(a - x)?,
        (DiffusionKind::Brownian, CurveKind::Line { a, b }) => bm_line(a - x, *b)?,
        (DiffusionKind::Brownian, CurveKind::SqrtProduct { a, lambda1, lambda2 }) => {
            need_origin()?;
            let (l1, l2) = if lambda1 <= lambda2 {
                (*lambda1, *lambda2)
            } else {
                (*lambda2, *lambda1)
            };
            if l1 == l2 {
                bm_line(*a, a * l1)?
            } else {
                bm_sqrt_product(*a, l1, l2)?
            }
        }
        (DiffusionKind::Brownian, CurveKind::Parabola { a, b }) => {
            need_origin()?;
            parabola(*a, *b)?
        }
        (DiffusionKind::Brownian, CurveKind::SquaredLine { beta }) => {
            need_origin()?;
            bm_parabola_family(ParabolaKind::SquaredLine, *beta)?
        }
        (DiffusionKind::Brownian, CurveKind::ReciprocalAffine { beta }) => {
            need_origin()?;
            bm_parabola_family(ParabolaKind::ReciprocalAffine, *beta)?
        }
        (DiffusionKind::Bessel { .. }, CurveKind::Constant { a }) => bessel_level(spec.nu(), x, *a)?,
        (DiffusionKind::Bessel { .. }, CurveKind::Line { a, b }) if x < *a => {
            bessel_line(spec.nu(), x, *a, *b)?
        }
        _ => {
            return Err(Error::Unavailable(format!(
                "no catalog density for {} under {spec}",
                curve.kind_name()
            )))
        }
    };
    let end = d.support_end().min(curve.lifetime());
    Ok(FptDensity { support_end: end, ..d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i;

    #[test]
    fn spec_constants() {
        let b = DiffusionSpec::brownian(0.0);
        assert_eq!(b.nu(), -0.5);
        assert!((b.c() - 0.398_942_280_401_432_7).abs() < 1e-16);
        let s = DiffusionSpec::bessel(3.0, 1.0).unwrap();
        assert_eq!(s.nu(), 0.5);
        assert_eq!(s.c(), 1.0);
        assert!(DiffusionSpec::bessel(0.0, 1.0).is_err());
        assert!(DiffusionSpec::bessel(2.0, -1.0).is_err());
        assert!(s.with_h(-0.1).is_err());
    }

    #[test]
    fn bessel_phi_is_continuous() {
        for nu in [-0.5, 0.0, 0.3, 2.0] {
            let s = DiffusionSpec::bessel(2.0 * nu + 2.0, 0.0).unwrap();
            let at0 = s.phi(0.0).unwrap();
            let lim = 2f64.powf(-nu) / crate::specfun::gamma(nu + 1.0);
            assert!((at0 - lim).abs() < 1e-14 * lim);
            for z in [0.5f64, 0.999, 1.0, 1.001, 4.0] {
                let direct = z.powf(-nu) * bessel_i(nu, z).unwrap();
                assert!((s.phi(z).unwrap() - direct).abs() < 1e-13 * direct, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn table_json_round_trip() {
        let d = bm_level(1.0).unwrap();
        let tab = d.tabulate(&[0.5, 1.0, 2.0]).unwrap();
        let back = DensityTable::from_json(&tab.to_json()).unwrap();
        assert_eq!(back, tab);
        assert!(tab.to_csv().starts_with("t,value\n0.5,"));
    }

    #[test]
    fn dispatch_shifts_levels_by_start() {
        let spec = DiffusionSpec::brownian(0.25);
        let d = for_curve(&spec, &Curve::constant(1.0)).unwrap();
        let e = bm_level_density(0.75, 0.6).unwrap();
        assert_eq!(d.eval(0.6).unwrap(), e);
        let s = DiffusionSpec::bessel(3.0, 2.0).unwrap();
        let far = for_curve(&s, &Curve::constant(1.0)).unwrap();
        assert!(!far.is_evaluable());
        assert!((far.laplace(0.0).unwrap() - 0.5).abs() < 1e-14);
    }
}
