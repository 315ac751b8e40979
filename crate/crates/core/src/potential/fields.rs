use num_complex::Complex64;

use super::{Potential, RealPolynomial};
use crate::error::{Error, Result};
use crate::numerics::{Dual2, ScalarField};

/// `L = log ΔQ` as a scalar field with exact derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLaplacian {
    lap: RealPolynomial,
}

/// `ΔL`, evaluated through the second-order jet of `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianOfLog {
    log: LogLaplacian,
}

/// Returns `(L, ΔL)` for `L = log ΔQ`.
pub fn log_laplacian_fields(p: &Potential) -> (LogLaplacian, LaplacianOfLog) {
    let log = LogLaplacian { lap: p.polynomial().laplacian_polynomial() };
    (log.clone(), LaplacianOfLog { log })
}

impl LogLaplacian {
    /// The jet of `L`, or a domain error where `ΔQ ≤ 0`.
    pub fn try_jet(&self, z: Complex64) -> Result<Dual2> {
        let j = self.lap.jet(z);
        if !(j.value > 0.0) {
            return Err(Error::Domain(format!("ΔQ = {} ≤ 0 at ({}, {}); L = log ΔQ is undefined", j.value, z.re, z.im)));
        }
        Ok(j.ln())
    }
}

impl ScalarField for LogLaplacian {
    /// NaN where `ΔQ ≤ 0`, so quadrature reports the offending node.
    fn jet(&self, z: Complex64) -> Dual2 {
        self.try_jet(z).unwrap_or(Dual2 {
            value: f64::NAN,
            dx: f64::NAN,
            dy: f64::NAN,
            dxx: f64::NAN,
            dxy: f64::NAN,
            dyy: f64::NAN,
        })
    }
}

impl LaplacianOfLog {
    pub fn value(&self, z: Complex64) -> Result<f64> {
        Ok(self.log.try_jet(z)?.laplacian())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ginibre_constant() {
        let (l, dl) = log_laplacian_fields(&Potential::ginibre());
        let z = Complex64::new(0.3, 0.7);
        assert!((l.jet(z).value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(dl.value(z).unwrap(), 0.0);
    }

    #[test]
    fn quartic_radial_oracle() {
        let t = 0.1;
        let p = Potential::radial(&[(1, 0.5), (2, t / 4.0)]).unwrap();
        let (l, dl) = log_laplacian_fields(&p);
        for r in [0.1, 0.5, 0.9] {
            let z = Complex64::from_polar(r, 1.1);
            assert!((l.jet(z).value - (2.0 + 4.0 * t * r * r).ln()).abs() < 1e-14);
            // (1/r)(r L′)′ with r L′ = 8 t r² / (2 + 4 t r²)
            let d = 2.0 + 4.0 * t * r * r;
            let want = 32.0 * t / (d * d);
            assert!((dl.value(z).unwrap() - want).abs() < 1e-8);
        }
    }

    #[test]
    fn non_positive_laplacian_is_domain_error() {
        // ΔQ = 4 (1 − s + s²/4) = (s − 2)², which vanishes at |z|² = 2.
        let q = Potential::radial(&[(1, 1.0), (2, -0.25), (3, 1.0 / 36.0)]).unwrap();
        let (l, dl) = log_laplacian_fields(&q);
        let z = Complex64::new(1.0, 1.0);
        assert!(matches!(dl.value(z), Err(Error::Domain(_))));
        assert!(l.jet(z).value.is_nan());
    }
}
