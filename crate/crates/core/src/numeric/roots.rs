use crate::{Error, Result};

/// A sign-changing interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// Brent's method on a bracket with `f(a)·f(b) ≤ 0`.
///
/// Stops when the bracket is narrower than `2·(4ε|x| + tol)` and returns the
/// best iterate together with the final bracket.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Bracket)> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok((a, Bracket { lo: a, hi: a }));
    }
    if fb == 0.0 {
        return Ok((b, Bracket { lo: b, hi: b }));
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if fb == 0.0 {
            return Ok((b, Bracket { lo: b, hi: b }));
        }
        if xm.abs() <= tol1 {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok((b, Bracket { lo, hi }));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Root(format!("non-finite value at {b}")));
        }
    }
    Err(Error::Root(format!("no convergence after {max_iter} iterations")))
}

/// Walks right from `start` in steps of `step` (growing geometrically by
/// `growth`) until `f` changes sign; returns the first sign-changing bracket.
pub fn find_bracket_up<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    step: f64,
    growth: f64,
    max_steps: usize,
) -> Result<Bracket> {
    let mut lo = start;
    let mut flo = f(lo);
    let mut h = step;
    for _ in 0..max_steps {
        let hi = lo + h;
        let fhi = f(hi);
        if flo == 0.0 {
            return Ok(Bracket { lo, hi: lo });
        }
        if fhi.signum() != flo.signum() || fhi == 0.0 {
            return Ok(Bracket { lo, hi });
        }
        lo = hi;
        flo = fhi;
        h *= growth;
    }
    Err(Error::Root(format!(
        "no sign change within {max_steps} steps from {start}"
    )))
}
