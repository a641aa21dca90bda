//! Command-line mini-language for curves, diffusions, image measures and grids.
//!
//! Anything starting with `{` is read as inline JSON and anything naming an
//! existing file is read as a JSON file, so complex inputs never need the
//! short forms.

use std::path::Path;

use fpt_core::catalog::DiffusionSpec;
use fpt_core::images::ImageMeasure;
use fpt_core::moebius::Curve;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Parses a count or real such as `1e6` or `250000`.
pub fn number(s: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("not a number: '{s}'")))
}

pub fn count(s: &str) -> CliResult<usize> {
    let v = number(s)?;
    if v < 1.0 || v.fract() != 0.0 || v > 1e12 {
        return Err(CliError::usage(format!("not a positive integer: '{s}'")));
    }
    Ok(v as usize)
}

fn json_source(s: &str) -> CliResult<Option<Value>> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s)
            .map(Some)
            .map_err(|e| CliError::usage(format!("invalid inline JSON: {e}")));
    }
    if Path::new(s).is_file() {
        let text = std::fs::read_to_string(s)?;
        return serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::usage(format!("invalid JSON in {s}: {e}")));
    }
    Ok(None)
}

fn split(s: &str) -> (&str, Vec<&str>) {
    match s.split_once(':') {
        Some((name, rest)) => (name, rest.split(',').map(str::trim).collect()),
        None => (s, Vec::new()),
    }
}

fn args(name: &str, raw: &[&str], n: usize) -> CliResult<Vec<f64>> {
    if raw.len() != n {
        return Err(CliError::usage(format!(
            "'{name}' takes {n} parameter(s), got {}",
            raw.len()
        )));
    }
    raw.iter().map(|s| number(s)).collect()
}

/// `constant:a`, `line:a,b`, `sqrt:a,λ` or `sqrt:a,λ1,λ2`, `parabola:a,b`,
/// `squared-line:β`, `reciprocal:β`, `daniels:a,b,b1`, `power:β,α`, or JSON.
pub fn curve(s: &str) -> CliResult<Curve> {
    if let Some(v) = json_source(s)? {
        return Ok(Curve::from_json(&v)?);
    }
    let (name, raw) = split(s);
    let c = match name {
        "constant" => Curve::constant(args(name, &raw, 1)?[0]),
        "line" => {
            let p = args(name, &raw, 2)?;
            Curve::line(p[0], p[1])
        }
        "sqrt" => match raw.len() {
            2 => {
                let p = args(name, &raw, 2)?;
                Curve::sqrt_product(p[0], p[1], 0.0)
            }
            _ => {
                let p = args(name, &raw, 3)?;
                Curve::sqrt_product(p[0], p[1], p[2])
            }
        },
        "parabola" => {
            let p = args(name, &raw, 2)?;
            Curve::parabola(p[0], p[1])
        }
        "squared-line" => Curve::squared_line(args(name, &raw, 1)?[0]),
        "reciprocal" => Curve::reciprocal_affine(args(name, &raw, 1)?[0]),
        "daniels" => {
            let p = args(name, &raw, 3)?;
            Curve::daniels(p[0], p[1], p[2])?
        }
        "power" => {
            let p = args(name, &raw, 2)?;
            Curve::power_affine(p[0], p[1])
        }
        _ => return Err(CliError::usage(format!("unknown curve '{s}'"))),
    };
    Ok(c)
}

/// `brownian` or `bessel:δ` (or a JSON spec); `x` overrides the start point.
pub fn spec(s: &str, x: Option<f64>) -> CliResult<DiffusionSpec> {
    let base = if let Some(v) = json_source(s)? {
        let sp: DiffusionSpec = serde_json::from_value(v)
            .map_err(|e| CliError::usage(format!("invalid diffusion spec: {e}")))?;
        sp.validated()?
    } else {
        let (name, raw) = split(s);
        match name {
            "brownian" | "bm" if raw.is_empty() => DiffusionSpec::brownian(0.0),
            "bessel" => DiffusionSpec::bessel(args(name, &raw, 1)?[0], 0.0)?,
            _ => return Err(CliError::usage(format!("unknown diffusion '{s}'"))),
        }
    };
    match x {
        Some(x) => Ok(base.with_start(x)?),
        None => Ok(base),
    }
}

/// `atom:s,w`, `atoms:s1,w1;s2,w2;…`, `daniels:a,b,b1`, or JSON.
pub fn measure(s: &str) -> CliResult<ImageMeasure> {
    if let Some(v) = json_source(s)? {
        return Ok(ImageMeasure::from_json(&v)?);
    }
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let m = match name {
        "atom" => {
            let raw: Vec<&str> = rest.split(',').collect();
            let p = args(name, &raw, 2)?;
            ImageMeasure::atom(p[0], p[1])?
        }
        "atoms" => {
            let atoms = rest
                .split(';')
                .map(|pair| {
                    let raw: Vec<&str> = pair.split(',').collect();
                    let p = args(name, &raw, 2)?;
                    Ok((p[0], p[1]))
                })
                .collect::<CliResult<Vec<_>>>()?;
            ImageMeasure::new(atoms, None)?
        }
        "daniels" => {
            let raw: Vec<&str> = rest.split(',').collect();
            let p = args(name, &raw, 3)?;
            ImageMeasure::daniels(p[0], p[1], p[2])?
        }
        _ => return Err(CliError::usage(format!("unknown measure '{s}'"))),
    };
    Ok(m)
}

/// `lo:hi:n` (n equally spaced points, both ends included) or `t1,t2,…`.
pub fn grid(s: &str) -> CliResult<Vec<f64>> {
    let g = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("grid must be lo:hi:n, got '{s}'")));
        }
        let (lo, hi, n) = (number(parts[0])?, number(parts[1])?, count(parts[2])?);
        if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    } else {
        s.split(',').map(number).collect::<CliResult<Vec<_>>>()?
    };
    if g.is_empty() || g.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(CliError::usage(format!("grid points must be finite and positive: '{s}'")));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpt_core::moebius::CurveKind;

    #[test]
    fn short_curves() {
        assert_eq!(curve("constant:1").unwrap(), Curve::constant(1.0));
        assert_eq!(curve("line:1,0.5").unwrap(), Curve::line(1.0, 0.5));
        assert_eq!(curve("sqrt:1,2").unwrap(), Curve::sqrt_product(1.0, 2.0, 0.0));
        assert!(matches!(curve("daniels:1,1,0.25").unwrap().kind(), CurveKind::Daniels { .. }));
        assert!(curve("line:1").is_err());
        assert!(curve("wobble:1").is_err());
    }

    #[test]
    fn inline_json_curve() {
        let c = Curve::power_affine(1.0, 0.75);
        assert_eq!(curve(&c.to_json().to_string()).unwrap(), c);
    }

    #[test]
    fn specs() {
        assert_eq!(spec("brownian", None).unwrap(), DiffusionSpec::brownian(0.0));
        let b = spec("bessel:3", Some(2.0)).unwrap();
        assert_eq!(b.x, 2.0);
        assert!((b.nu() - 0.5).abs() < 1e-15);
        assert!(spec("bessel:3", Some(-1.0)).is_err());
        assert!(spec("levy", None).is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(measure("atom:2,0.5").unwrap().atoms(), &[(2.0, 0.5)]);
        assert_eq!(measure("atoms:1,0.3;2,0.1").unwrap().atoms().len(), 2);
        assert_eq!(measure("daniels:1,1,0.25").unwrap().atoms(), &[(1.0, 1.0), (2.0, 0.25)]);
    }

    #[test]
    fn grids_and_counts() {
        assert_eq!(grid("0.5:2:4").unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(grid("0:1:3").is_err());
        assert_eq!(count("1e6").unwrap(), 1_000_000);
        assert!(count("2.5").is_err());
    }
}
