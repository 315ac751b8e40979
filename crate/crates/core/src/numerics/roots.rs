//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Finds a root of `g` in `[a, b]` with Brent's method (bisection safeguarded
/// inverse quadratic / secant steps). Deterministic; requires a sign change.
pub fn find_root(g: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (g(a), g(b));
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return Err(Error::Bracket { a, b, fa, fb });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let scale = fa.abs().max(fb.abs()).max(1.0);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || (fb.abs() <= 1e-14 * scale && m.abs() <= 1e-12 * b.abs().max(1.0)) {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = g(b);
        if !fb.is_finite() {
            return Err(Error::Bracket { a, b, fa, fb });
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        assert!((find_root(|x| x - 1.0, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| x * x - 2.0, 1.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-10);
        assert!((r * r - 2.0).abs() <= 1e-12 * 2.0);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(find_root(|x| x * x + 1.0, 0.0, 1.0), Err(Error::Bracket { .. })));
    }

    #[test]
    fn steep_function() {
        let r = find_root(|x| (50.0 * (x - 0.3)).tanh(), -3.0, 5.0).unwrap();
        assert!((r - 0.3).abs() < 1e-13);
    }
}
