//! Method of images for Brownian motion started at 0.
//!
//! For a positive measure `F` on `(0, ∞)` the function
//!
//! ```text
//! h(t, x) = (2πt)^{−1/2} ( e^{−x²/2t} − ∫ e^{−(x−s)²/2t} F(ds) )
//! ```
//!
//! solves the heat equation and vanishes on the curve `x = f(t)` defined by
//! `∫ e^{−s²/2t + sx/t} F(ds) = 1`. The crossing density of `f` is the flux
//! `−½ ∂ₓh(t, f(t)) = ½ (2πt³)^{−1/2} ∫ s e^{−(s−f(t))²/2t} F(ds)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::catalog::FptDensity;
use crate::moebius::Curve;
use crate::numeric::{brent, integrate_with, QuadOptions};
use crate::{Error, Result};

/// Named density families usable as the continuous part of a measure.
#[derive(Clone)]
pub enum DensityFamily {
    /// `weight · e^{−rate·s}` on `(0, ∞)`.
    Exponential { weight: f64, rate: f64 },
    /// `height` on `(lo, hi)`.
    Uniform { lo: f64, hi: f64, height: f64 },
    /// Caller-supplied nonnegative function on `(lo, hi)`; not serializable.
    Custom {
        name: String,
        lo: f64,
        hi: f64,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for DensityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { weight, rate } => {
                write!(f, "Exponential {{ weight: {weight}, rate: {rate} }}")
            }
            Self::Uniform { lo, hi, height } => {
                write!(f, "Uniform {{ lo: {lo}, hi: {hi}, height: {height} }}")
            }
            Self::Custom { name, lo, hi, .. } => write!(f, "Custom({name} on ({lo}, {hi}))"),
        }
    }
}

/// Continuous part `family(s) · e^{−tilt·s − damping·s²/2}`.
#[derive(Debug, Clone)]
pub struct DensityPart {
    pub family: DensityFamily,
    pub tilt: f64,
    pub damping: f64,
}

impl DensityPart {
    pub fn new(family: DensityFamily) -> Result<Self> {
        match &family {
            DensityFamily::Exponential { weight, rate } => {
                if !(*weight > 0.0 && rate.is_finite()) {
                    return Err(Error::domain("exponential part needs weight > 0 and finite rate"));
                }
            }
            DensityFamily::Uniform { lo, hi, height } => {
                if !(*lo >= 0.0 && hi > lo && hi.is_finite() && *height > 0.0) {
                    return Err(Error::domain("uniform part needs 0 ≤ lo < hi < ∞ and height > 0"));
                }
            }
            DensityFamily::Custom { lo, hi, .. } => {
                if !(*lo >= 0.0 && hi > lo) {
                    return Err(Error::domain("custom part needs 0 ≤ lo < hi"));
                }
            }
        }
        Ok(Self {
            family,
            tilt: 0.0,
            damping: 0.0,
        })
    }

    fn support(&self) -> (f64, f64) {
        match &self.family {
            DensityFamily::Exponential { .. } => (0.0, f64::INFINITY),
            DensityFamily::Uniform { lo, hi, .. } | DensityFamily::Custom { lo, hi, .. } => (*lo, *hi),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        let (lo, hi) = self.support();
        if s < lo || s > hi {
            return 0.0;
        }
        let base = match &self.family {
            DensityFamily::Exponential { weight, rate } => weight * (-rate * s).exp(),
            DensityFamily::Uniform { height, .. } => *height,
            DensityFamily::Custom { f, .. } => f(s),
        };
        base * (-self.tilt * s - 0.5 * self.damping * s * s).exp()
    }

    /// `ln ∫ g(s) e^{−(x−s)²/2t} value(s) ds` for `g(s) = s^power`, `power ∈ {0, 1}`.
    fn ln_gauss_moment(&self, t: f64, x: f64, power: i32) -> Result<f64> {
        let (lo, hi) = self.support();
        let peak = x.clamp(lo, hi);
        let shift = (x - peak) * (x - peak) / (2.0 * t);
        let w = 12.0 * t.sqrt();
        let mut cuts = vec![lo];
        for c in [peak - w, peak, peak + w] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.push(hi);
        cuts.dedup();
        let g = |s: f64| {
            let e = -(x - s) * (x - s) / (2.0 * t) + shift;
            s.powi(power) * e.exp() * self.value(s)
        };
        let opts = QuadOptions::tol(1e-300, 1e-13);
        let mut total = 0.0;
        for pair in cuts.windows(2) {
            total += integrate_with(g, pair[0], pair[1], opts)?.value;
        }
        if total <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(total.ln() - shift)
    }

    fn to_json(&self) -> Result<Value> {
        let (name, mut params) = match &self.family {
            DensityFamily::Exponential { weight, rate } => {
                ("exponential", json!({"weight": weight, "rate": rate}))
            }
            DensityFamily::Uniform { lo, hi, height } => {
                ("uniform", json!({"lo": lo, "hi": hi, "height": height}))
            }
            DensityFamily::Custom { name, .. } => {
                return Err(Error::Config(format!(
                    "custom density part '{name}' cannot be serialized"
                )))
            }
        };
        params["tilt"] = json!(self.tilt);
        params["damping"] = json!(self.damping);
        Ok(json!({"name": name, "params": params}))
    }

    fn from_json(v: &Value) -> Result<Self> {
        let name = v["name"]
            .as_str()
            .ok_or_else(|| Error::Config("density part needs a name".into()))?;
        let p = &v["params"];
        let num = |k: &str| -> Result<f64> {
            p[k].as_f64()
                .ok_or_else(|| Error::Config(format!("density part '{name}' missing '{k}'")))
        };
        let family = match name {
            "exponential" => DensityFamily::Exponential {
                weight: num("weight")?,
                rate: num("rate")?,
            },
            "uniform" => DensityFamily::Uniform {
                lo: num("lo")?,
                hi: num("hi")?,
                height: num("height")?,
            },
            other => return Err(Error::Config(format!("unknown density part '{other}'"))),
        };
        let mut part = Self::new(family)?;
        part.tilt = p["tilt"].as_f64().unwrap_or(0.0);
        part.damping = p["damping"].as_f64().unwrap_or(0.0);
        Ok(part)
    }
}

/// Positive measure on `(0, ∞)`: finitely many atoms plus an optional density.
#[derive(Debug, Clone)]
pub struct ImageMeasure {
    atoms: Vec<(f64, f64)>,
    density: Option<DensityPart>,
    pub tag: String,
}

impl ImageMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<DensityPart>) -> Result<Self> {
        if atoms.is_empty() && density.is_none() {
            return Err(Error::domain("image measure needs an atom or a density part"));
        }
        for &(s, w) in &atoms {
            if !(s > 0.0 && s.is_finite() && w > 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("invalid atom ({s}, {w})")));
            }
        }
        Ok(Self {
            atoms,
            density,
            tag: "images".into(),
        })
    }

    pub fn atom(s: f64, w: f64) -> Result<Self> {
        Self::new(vec![(s, w)], None)
    }

    /// `b δ_a + b₁ δ_{2a}`, whose boundary is the Daniels curve.
    pub fn daniels(a: f64, b: f64, b1: f64) -> Result<Self> {
        Self::new(vec![(a, b), (2.0 * a, b1)], None).map(|m| m.with_tag("daniels"))
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density_part(&self) -> Option<&DensityPart> {
        self.density.as_ref()
    }

    /// `e^{−μs} F(ds)`: moves the boundary to `f(t) + μt`.
    pub fn tilted(&self, mu: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.1 *= (-mu * a.0).exp();
        }
        if let Some(d) = &mut out.density {
            d.tilt += mu;
        }
        out
    }

    fn max_location(&self) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.0).fold(0.0, f64::max);
        let dens = self.density.as_ref().map_or(0.0, |d| {
            let hi = d.support().1;
            if hi.is_finite() {
                hi
            } else {
                1.0
            }
        });
        atoms.max(dens).max(1e-3)
    }

    /// `ln ∫ s^power e^{−(x−s)²/2t} F(ds)`.
    fn ln_kernel(&self, t: f64, x: f64, power: i32) -> Result<f64> {
        let mut logs: Vec<f64> = self
            .atoms
            .iter()
            .map(|&(s, w)| w.ln() + power as f64 * s.ln() - (x - s) * (x - s) / (2.0 * t))
            .collect();
        if let Some(d) = &self.density {
            logs.push(d.ln_gauss_moment(t, x, power)?);
        }
        Ok(log_sum_exp(&logs))
    }

    pub fn to_json(&self) -> Result<Value> {
        let atoms: Vec<Value> = self.atoms.iter().map(|&(s, w)| json!([s, w])).collect();
        let density = match &self.density {
            Some(d) => d.to_json()?,
            None => Value::Null,
        };
        Ok(json!({"tag": self.tag, "atoms": atoms, "density": density}))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let atoms = match &v["atoms"] {
            Value::Null => Vec::new(),
            Value::Array(list) => list
                .iter()
                .map(|a| match (a[0].as_f64(), a[1].as_f64()) {
                    (Some(s), Some(w)) => Ok((s, w)),
                    _ => Err(Error::Config(format!("atom must be [s, w], got {a}"))),
                })
                .collect::<Result<Vec<_>>>()?,
            other => return Err(Error::Config(format!("atoms must be a list, got {other}"))),
        };
        let density = match &v["density"] {
            Value::Null => None,
            d => Some(DensityPart::from_json(d)?),
        };
        let m = Self::new(atoms, density)?;
        Ok(match v["tag"].as_str() {
            Some(tag) => m.with_tag(tag),
            None => m,
        })
    }
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// `h(t, x)`, the heat kernel minus its image superposition.
pub fn h_function(f: &ImageMeasure, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("h needs t > 0, got {t}")));
    }
    let gauss = (-x * x / (2.0 * t)).exp();
    let images = f.ln_kernel(t, x, 0)?.exp();
    Ok((gauss - images) / (2.0 * PI * t).sqrt())
}

/// `x²/2t + ln ∫ e^{−(x−s)²/2t} F(ds)`, increasing in `x`, zero on the boundary.
fn implicit_equation(f: &ImageMeasure, t: f64, x: f64) -> Result<f64> {
    Ok(x * x / (2.0 * t) + f.ln_kernel(t, x, 0)?)
}

/// Root of `∫ e^{−s²/2t + sx/t} F(ds) = 1`.
pub fn solve_boundary(f: &ImageMeasure, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("boundary needs t > 0, got {t}")));
    }
    let smax = f.max_location();
    let mut lo = -10.0 * t.sqrt() * (1.0 + smax);
    let mut hi = 11.0 * smax;
    let g = |x: f64| implicit_equation(f, t, x);
    let mut glo = g(lo)?;
    let mut ghi = g(hi)?;
    let mut expansions = 0;
    while glo > 0.0 || ghi < 0.0 {
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Root(format!(
                "no sign change of the image equation at t = {t} in [{lo}, {hi}]"
            )));
        }
        if glo > 0.0 {
            lo = 2.0 * lo - 1.0;
            glo = g(lo)?;
        }
        if ghi < 0.0 {
            hi = 2.0 * hi + 1.0;
            ghi = g(hi)?;
        }
    }
    let failure = std::cell::RefCell::new(None);
    let (x, _) = brent(
        |x| match g(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
        300,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(x)
}

/// Crossing density of the boundary generated by `F`.
pub fn density_from_images(f: &ImageMeasure, t: f64) -> Result<f64> {
    let x = solve_boundary(f, t)?;
    let ln = f.ln_kernel(t, x, 1)?;
    Ok(0.5 * (ln - 1.5 * t.ln()).exp() / (2.0 * PI).sqrt())
}

/// `e^{−βs²/2} F(ds)`, whose boundary is `S^(β)` of the boundary of `F`.
pub fn transform_measure(f: &ImageMeasure, beta: f64) -> Result<ImageMeasure> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("measure transform needs β > 0, got {beta}")));
    }
    let mut out = f.clone();
    for a in &mut out.atoms {
        a.1 *= (-0.5 * beta * a.0 * a.0).exp();
    }
    if let Some(d) = &mut out.density {
        d.damping += beta;
    }
    out.tag = format!("{}∘S({beta})", f.tag);
    Ok(out)
}

/// The crossing density as an [`FptDensity`] on `(0, ∞)`.
pub fn images_density(f: &ImageMeasure) -> FptDensity {
    let m = f.clone();
    FptDensity::closed_form(format!("images[{}]", f.tag), f64::INFINITY, None, move |t| {
        density_from_images(&m, t)
    })
}

/// Boundary values on a grid of positive times.
pub fn boundary_on_grid(f: &ImageMeasure, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&t| solve_boundary(f, t)).collect()
}

/// Closed-form curve matching an atom-only measure with one or two atoms in
/// the Daniels configuration, if any.
pub fn closed_form_boundary(f: &ImageMeasure) -> Option<Curve> {
    if f.density.is_some() {
        return None;
    }
    match f.atoms.as_slice() {
        [(s, w)] => Some(Curve::line(s / 2.0, -w.ln() / s)),
        [(a, b), (a2, b1)] if (a2 - 2.0 * a).abs() <= 1e-15 * a2 => Curve::daniels(*a, *b, *b1).ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bm_line_density, DiffusionSpec};
    use crate::identity::transform_density;

    #[test]
    fn single_atom_closed_forms() {
        let m = ImageMeasure::atom(2.0, (-1.0f64).exp()).unwrap();
        for t in [0.05, 0.3, 1.0, 4.0, 25.0] {
            let x = solve_boundary(&m, t).unwrap();
            assert!((x - (1.0 + t / 2.0)).abs() < 1e-12, "t={t}: {x}");
            let p = density_from_images(&m, t).unwrap();
            let exact = bm_line_density(1.0, 0.5, t).unwrap();
            assert!((p - exact).abs() < 1e-10 * exact.max(1e-300) + 1e-300, "t={t}: {p} {exact}");
        }
    }

    #[test]
    fn far_left_kernel_is_gaussian() {
        let m = ImageMeasure::atom(2.0, 1.0).unwrap();
        let (t, x): (f64, f64) = (0.5, -6.0);
        let g = (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
        let h = h_function(&m, t, x).unwrap();
        assert!((h - g).abs() < 1e-12 * g);
    }

    #[test]
    fn h_vanishes_on_boundary() {
        let m = ImageMeasure::daniels(1.0, 0.7, 0.3).unwrap();
        for t in [0.1, 0.7, 3.0] {
            let x = solve_boundary(&m, t).unwrap();
            let scale = (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
            assert!(h_function(&m, t, x).unwrap().abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn small_time_h_is_positive_and_small() {
        let m = ImageMeasure::atom(1.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for t in [0.1, 0.03, 0.01, 0.003] {
            let h = h_function(&m, t, -0.5).unwrap();
            assert!(h > 0.0 && h < last);
            last = h;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn two_atoms_give_daniels() {
        let (a, b, b1) = (1.0, 1.0, 0.25);
        let m = ImageMeasure::daniels(a, b, b1).unwrap();
        let d = Curve::daniels(a, b, b1).unwrap();
        for t in [0.01, 0.2, 1.0, 5.0, 40.0] {
            let x = solve_boundary(&m, t).unwrap();
            assert!((x - d.eval(t).unwrap()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn heavier_weights_lower_the_boundary() {
        let base = ImageMeasure::new(vec![(1.0, 0.5), (3.0, 0.2)], None).unwrap();
        let heavier = ImageMeasure::new(vec![(1.0, 0.5), (3.0, 0.3)], None).unwrap();
        for t in [0.5, 2.0, 8.0] {
            assert!(solve_boundary(&heavier, t).unwrap() < solve_boundary(&base, t).unwrap());
        }
    }

    #[test]
    fn tilt_shifts_boundary_and_density() {
        let m = ImageMeasure::new(vec![(1.0, 0.5), (2.5, 0.4)], None).unwrap();
        let mu = 0.3;
        let tm = m.tilted(mu);
        for t in [0.2, 1.0, 3.0] {
            let f = solve_boundary(&m, t).unwrap();
            assert!((solve_boundary(&tm, t).unwrap() - f - mu * t).abs() < 1e-11);
            let p = density_from_images(&m, t).unwrap();
            let q = density_from_images(&tm, t).unwrap();
            let expect = (-mu * f - 0.5 * mu * mu * t).exp() * p;
            assert!((q - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn exponential_part_matches_closed_form() {
        // ∫₀^∞ w e^{−ρs} e^{(2sx−s²)/2t} ds has an erfc closed form; compare the
        // boundary equation through the h function instead: h = 0 at the root.
        let part = DensityPart::new(DensityFamily::Exponential { weight: 0.8, rate: 1.5 }).unwrap();
        let m = ImageMeasure::new(vec![], Some(part)).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let x = solve_boundary(&m, t).unwrap();
            let scale = (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
            assert!(h_function(&m, t, x).unwrap().abs() <= 1e-11 * scale);
            let direct = integrate_with(
                |s| 0.8 * (-1.5 * s).exp() * ((2.0 * s * x - s * s) / (2.0 * t)).exp(),
                0.0,
                f64::INFINITY,
                QuadOptions::default(),
            )
            .unwrap()
            .value;
            assert!((direct - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn transformed_measure_gives_transformed_curve() {
        let (a, b, b1) = (1.0, 0.6, 0.4);
        let m = ImageMeasure::daniels(a, b, b1).unwrap();
        let d = Curve::daniels(a, b, b1).unwrap();
        for beta in [0.1, 0.5, 2.0] {
            let tm = transform_measure(&m, beta).unwrap();
            for t in [0.05, 0.5, 2.0, 10.0] {
                let s = 1.0 + beta * t;
                let direct = s * d.eval(t / s).unwrap();
                assert!((solve_boundary(&tm, t).unwrap() - direct).abs() < 1e-9);
            }
        }
        assert!(transform_measure(&m, 0.0).is_err());
    }

    #[test]
    fn measure_transform_agrees_with_density_transport() {
        let spec = DiffusionSpec::brownian(0.0);
        for (a, b, b1) in [(1.0, 1.0, 0.25), (0.7, 0.4, 0.6)] {
            let m = ImageMeasure::daniels(a, b, b1).unwrap();
            let curve = closed_form_boundary(&m).unwrap();
            for beta in [0.2, 1.3] {
                let moved = transform_density(&images_density(&m), &spec, beta, &curve).unwrap();
                let tm = transform_measure(&m, beta).unwrap();
                for t in [0.1, 0.8, 3.0, 12.0] {
                    let lhs = density_from_images(&tm, t).unwrap();
                    let rhs = moved.eval(t).unwrap();
                    assert!((lhs - rhs).abs() < 1e-8 * rhs.max(1e-12), "β={beta} t={t}: {lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn atom_boundaries_are_concave() {
        let m = ImageMeasure::new(vec![(0.8, 0.6), (1.7, 0.3), (3.0, 0.2)], None).unwrap();
        let h = 0.05;
        for k in 1..60 {
            let t = k as f64 * 0.1;
            let f = |u: f64| solve_boundary(&m, u).unwrap();
            let second = f(t + h) - 2.0 * f(t) + f(t - h);
            assert!(second <= 1e-9, "t={t}: {second}");
        }
    }

    #[test]
    fn json_round_trip() {
        let part = DensityPart::new(DensityFamily::Uniform { lo: 0.5, hi: 2.0, height: 0.3 }).unwrap();
        let m = transform_measure(&ImageMeasure::new(vec![(1.0, 0.5)], Some(part)).unwrap(), 0.4)
            .unwrap();
        let back = ImageMeasure::from_json(&m.to_json().unwrap()).unwrap();
        for t in [0.3, 2.0] {
            assert_eq!(solve_boundary(&m, t).unwrap(), solve_boundary(&back, t).unwrap());
        }
        assert!(ImageMeasure::from_json(&json!({"atoms": [], "density": null})).is_err());
    }

    #[test]
    fn closed_form_boundary_recognizes_daniels() {
        let m = ImageMeasure::daniels(1.0, 0.5, 0.2).unwrap();
        assert_eq!(closed_form_boundary(&m).unwrap().kind_name(), "daniels");
        let one = ImageMeasure::atom(2.0, 0.5).unwrap();
        assert_eq!(closed_form_boundary(&one).unwrap(), Curve::line(1.0, 2f64.ln() / 2.0));
    }
}
