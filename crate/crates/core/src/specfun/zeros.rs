//! Zero sequences: positive zeros of `J_ν`, negative zeros of `Ai`, and the
//! positive zeros in `ν` of `ν ↦ D_ν(b)`.
//!
//! Every zero is located by a sign-changing bracket refined with Brent's
//! method until the bracket is narrower than `1e−10`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::{json, Value};

use super::airy::airy_ai;
use super::bessel::bessel_j;
use super::cache::get_or_compute;
use super::pcf::{ladder, pcf_d_scaled, Scaled};
use crate::numeric::brent;
use crate::{Error, Result};

const CERT_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroFamily {
    BesselJ(f64),
    Airy,
    ParabolicCylinderInOrder(f64),
}

impl ZeroFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ZeroFamily::BesselJ(_) => "bessel_j",
            ZeroFamily::Airy => "airy",
            ZeroFamily::ParabolicCylinderInOrder(_) => "pcf_nu",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            ZeroFamily::BesselJ(nu) => Some(nu),
            ZeroFamily::Airy => None,
            ZeroFamily::ParabolicCylinderInOrder(b) => Some(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    pub family: ZeroFamily,
    pub zeros: Vec<f64>,
}

impl ZeroTable {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family.name(),
            "param": self.family.param(),
            "zeros": self.zeros,
        })
    }
}

fn search_error(family: &str, index: usize) -> Error {
    Error::ZeroSearch {
        family: family.to_string(),
        index,
    }
}

/// Refines a sign-changing bracket and certifies the result.
fn certify<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    family: &str,
    index: usize,
) -> Result<f64> {
    let tol = 1e-14 * lo.abs().max(hi.abs()).max(1.0);
    let (z, br) = brent(&mut f, lo, hi, tol, 200).map_err(|_| search_error(family, index))?;
    if br.hi - br.lo > CERT_WIDTH {
        return Err(search_error(family, index));
    }
    if br.hi > br.lo {
        let (a, b) = (f(br.lo), f(br.hi));
        if a.signum() == b.signum() && a != 0.0 && b != 0.0 {
            return Err(search_error(family, index));
        }
    }
    Ok(z)
}

fn compute_bessel(nu: f64, prefix: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut out = prefix.to_vec();
    let f = |z: f64| bessel_j(nu, z).unwrap_or(f64::NAN);
    while out.len() < n {
        let index = out.len() + 1;
        let (mut lo, step) = match out.last() {
            Some(&z) => (z + 0.1, 0.2),
            None => (1e-3, 0.05),
        };
        let mut flo = f(lo);
        let mut found = None;
        for _ in 0..100_000 {
            let hi = lo + step;
            let fhi = f(hi);
            if !fhi.is_finite() {
                return Err(search_error("bessel_j", index));
            }
            if fhi == 0.0 {
                found = Some(hi);
                break;
            }
            if fhi.signum() != flo.signum() {
                found = Some(certify(f, lo, hi, "bessel_j", index)?);
                break;
            }
            lo = hi;
            flo = fhi;
        }
        let z = found.ok_or_else(|| search_error("bessel_j", index))?;
        if out.last().is_some_and(|&p| z <= p) {
            return Err(search_error("bessel_j", index));
        }
        out.push(z);
    }
    Ok(out)
}

/// First `k_max` positive zeros `j_{ν,1} < j_{ν,2} < …` of `J_ν`, `ν > −1`.
pub fn bessel_j_zeros(nu: f64, k_max: usize) -> Result<ZeroTable> {
    let z = bessel_j_zeros_shared(nu, k_max)?;
    Ok(ZeroTable {
        family: ZeroFamily::BesselJ(nu),
        zeros: z[..k_max].to_vec(),
    })
}

pub(crate) fn bessel_j_zeros_shared(nu: f64, k_max: usize) -> Result<Arc<Vec<f64>>> {
    if !(nu > -1.0) || k_max == 0 {
        return Err(Error::domain("Bessel zeros need ν > −1 and k_max ≥ 1"));
    }
    get_or_compute("bessel_j", Some(nu), k_max, |p, n| compute_bessel(nu, p, n))
}

/// Asymptotic location of the `k`-th Airy zero.
fn airy_guess(k: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    let t2 = t.powi(-2);
    -t.powf(2.0 / 3.0) * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * 77_125.0 / 82_944.0)))
}

fn compute_airy(prefix: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut out = prefix.to_vec();
    let f = |x: f64| airy_ai(x).unwrap_or(f64::NAN);
    while out.len() < n {
        let index = out.len() + 1;
        let g = airy_guess(index);
        let spacing = PI / g.abs().sqrt();
        let mut half = 0.25 * spacing;
        let mut root = None;
        for _ in 0..4 {
            let (lo, hi) = (g - half, g + half);
            if f(lo).signum() != f(hi).signum() {
                root = Some(certify(f, lo, hi, "airy", index)?);
                break;
            }
            half *= 1.5;
        }
        let z = root.ok_or_else(|| search_error("airy", index))?;
        if out.last().is_some_and(|&p| z >= p) {
            return Err(search_error("airy", index));
        }
        out.push(z);
    }
    Ok(out)
}

/// First `k_max` zeros `0 > z_1 > z_2 > …` of `Ai`.
pub fn airy_zeros(k_max: usize) -> Result<ZeroTable> {
    let z = airy_zeros_shared(k_max)?;
    Ok(ZeroTable {
        family: ZeroFamily::Airy,
        zeros: z[..k_max].to_vec(),
    })
}

pub(crate) fn airy_zeros_shared(k_max: usize) -> Result<Arc<Vec<f64>>> {
    if k_max == 0 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    get_or_compute("airy", None, k_max, compute_airy)
}

const PCF_STEP: f64 = 0.25;

fn compute_pcf(b: f64, n: usize) -> Result<Vec<f64>> {
    let per_unit = (1.0 / PCF_STEP) as usize;
    let mut top = 2 * n + 8;
    loop {
        // grid values D_{i/4}(b), i = 0..=per_unit·top, from one ladder per offset
        let len = per_unit * top + 1;
        let mut grid = vec![Scaled::ZERO; len];
        for off in 0..per_unit {
            let mu = -(off as f64) * PCF_STEP;
            let vals = ladder(mu, b, top + 1)?;
            for (k, v) in vals.into_iter().enumerate() {
                let i = per_unit * k;
                if i >= off && i - off < len {
                    grid[i - off] = v;
                }
            }
        }
        let mut zeros = Vec::with_capacity(n);
        let mut last = 0usize;
        for i in 1..len {
            if zeros.len() == n {
                break;
            }
            let v = grid[i];
            if v.m == 0.0 {
                zeros.push(i as f64 * PCF_STEP);
                last = i;
                continue;
            }
            let prev = grid[last];
            if prev.m != 0.0 && prev.signum() != v.signum() {
                let reference = Scaled { m: 1.0, k: prev.k };
                let f = |nu: f64| {
                    pcf_d_scaled(nu, b)
                        .map(|d| d.ratio(reference))
                        .unwrap_or(f64::NAN)
                };
                let lo = last as f64 * PCF_STEP;
                let hi = i as f64 * PCF_STEP;
                zeros.push(certify(f, lo, hi, "pcf_nu", zeros.len() + 1)?);
            }
            last = i;
        }
        if zeros.len() >= n {
            if zeros.windows(2).any(|w| w[1] <= w[0]) || zeros[0] <= 0.0 {
                return Err(search_error("pcf_nu", 0));
            }
            return Ok(zeros);
        }
        if top as f64 > super::pcf::MAX_ORDER / 2.0 {
            return Err(search_error("pcf_nu", zeros.len() + 1));
        }
        top = top * 3 / 2 + 8;
    }
}

/// First `n_max` positive zeros `ν_{1,b} < ν_{2,b} < …` of `ν ↦ D_ν(b)`.
pub fn pcf_nu_zeros(b: f64, n_max: usize) -> Result<ZeroTable> {
    let z = pcf_nu_zeros_shared(b, n_max)?;
    Ok(ZeroTable {
        family: ZeroFamily::ParabolicCylinderInOrder(b),
        zeros: z[..n_max].to_vec(),
    })
}

pub(crate) fn pcf_nu_zeros_shared(b: f64, n_max: usize) -> Result<Arc<Vec<f64>>> {
    if n_max == 0 || !b.is_finite() {
        return Err(Error::domain("PCF zeros need finite b and n_max ≥ 1"));
    }
    get_or_compute("pcf_nu", Some(b), n_max, |prefix, n| {
        if prefix.len() >= n {
            return Ok(prefix.to_vec());
        }
        compute_pcf(b, n)
    })
}
