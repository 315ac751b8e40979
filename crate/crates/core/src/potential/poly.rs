//! Real-valued polynomials in `z, z̄` with exact Wirtinger calculus.

use num_complex::Complex64;

use crate::numerics::{coordinates, Dual2};

/// A real polynomial on the plane, either radial `Σ a_j |z|^{2j}` or
/// Hermitian `Σ c_jk z^j z̄^k` with `c_kj = conj(c_jk)`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealPolynomial {
    Radial(Vec<(u32, f64)>),
    Hermitian(Vec<(u32, u32, Complex64)>),
}

fn powers(z: Complex64, m: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(m + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=m {
        p.push(acc);
        acc *= z;
    }
    p
}

impl RealPolynomial {
    pub fn is_radial(&self) -> bool {
        matches!(self, RealPolynomial::Radial(_))
    }

    /// Highest total degree in `(z, z̄)`.
    pub fn degree(&self) -> u32 {
        match self {
            RealPolynomial::Radial(c) => c.iter().map(|(j, _)| 2 * j).max().unwrap_or(0),
            RealPolynomial::Hermitian(c) => c.iter().map(|(j, k, _)| j + k).max().unwrap_or(0),
        }
    }

    /// The radial profile `q(s)` with `Q = q(|z|²)` and its first two
    /// derivatives in `s`.
    pub fn radial_profile(&self, s: f64) -> Option<(f64, f64, f64)> {
        let RealPolynomial::Radial(c) = self else { return None };
        let (mut q, mut q1, mut q2) = (0.0, 0.0, 0.0);
        for &(j, a) in c {
            let jf = j as f64;
            q += a * s.powi(j as i32);
            if j >= 1 {
                q1 += a * jf * s.powi(j as i32 - 1);
            }
            if j >= 2 {
                q2 += a * jf * (jf - 1.0) * s.powi(j as i32 - 2);
            }
        }
        Some((q, q1, q2))
    }

    /// `(value, ∂, ∂², ∂∂̄)` at `z`.
    fn wirtinger_data(&self, z: Complex64) -> (f64, Complex64, Complex64, f64) {
        match self {
            RealPolynomial::Radial(_) => {
                let s = z.norm_sqr();
                let (q, q1, q2) = self.radial_profile(s).unwrap();
                // Q = q(z z̄): ∂Q = q' z̄, ∂²Q = q'' z̄², ∂∂̄Q = q' + s q''.
                let zb = z.conj();
                (q, zb * q1, zb * zb * q2, q1 + s * q2)
            }
            RealPolynomial::Hermitian(c) => {
                let m = c.iter().map(|(j, k, _)| (*j).max(*k)).max().unwrap_or(0) as usize;
                let pz = powers(z, m);
                let pzb = powers(z.conj(), m);
                let mut v = Complex64::new(0.0, 0.0);
                let mut d1 = Complex64::new(0.0, 0.0);
                let mut d2 = Complex64::new(0.0, 0.0);
                let mut mixed = Complex64::new(0.0, 0.0);
                for &(j, k, cjk) in c {
                    let (j, k) = (j as usize, k as usize);
                    v += cjk * pz[j] * pzb[k];
                    if j >= 1 {
                        d1 += cjk * (j as f64) * pz[j - 1] * pzb[k];
                    }
                    if j >= 2 {
                        d2 += cjk * ((j * (j - 1)) as f64) * pz[j - 2] * pzb[k];
                    }
                    if j >= 1 && k >= 1 {
                        mixed += cjk * ((j * k) as f64) * pz[j - 1] * pzb[k - 1];
                    }
                }
                (v.re, d1, d2, mixed.re)
            }
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        match self {
            RealPolynomial::Radial(_) => self.radial_profile(z.norm_sqr()).unwrap().0,
            RealPolynomial::Hermitian(_) => self.wirtinger_data(z).0,
        }
    }

    /// Wirtinger derivative `∂Q`.
    pub fn wirtinger(&self, z: Complex64) -> Complex64 {
        self.wirtinger_data(z).1
    }

    /// `ΔQ = 4 ∂∂̄Q`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        4.0 * self.wirtinger_data(z).3
    }

    /// Value, gradient and Hessian at `z`.
    pub fn jet(&self, z: Complex64) -> Dual2 {
        match self {
            RealPolynomial::Radial(c) => {
                let (x, y) = coordinates(z);
                let s = x * x + y * y;
                let mut acc = Dual2::constant(0.0);
                for &(j, a) in c {
                    acc = acc + s.powi(j as i32) * a;
                }
                acc
            }
            RealPolynomial::Hermitian(_) => {
                let (v, d1, d2, mixed) = self.wirtinger_data(z);
                let lap = 4.0 * mixed;
                let diff = 4.0 * d2.re;
                Dual2 {
                    value: v,
                    dx: 2.0 * d1.re,
                    dy: -2.0 * d1.im,
                    dxx: 0.5 * (lap + diff),
                    dxy: -2.0 * d2.im,
                    dyy: 0.5 * (lap - diff),
                }
            }
        }
    }

    /// The polynomial `ΔQ`, itself real and of the same kind.
    pub fn laplacian_polynomial(&self) -> RealPolynomial {
        match self {
            // Δ|z|^{2j} = 4 j² |z|^{2j−2}
            RealPolynomial::Radial(c) => RealPolynomial::Radial(
                c.iter().filter(|(j, _)| *j >= 1).map(|&(j, a)| (j - 1, 4.0 * (j * j) as f64 * a)).collect(),
            ),
            RealPolynomial::Hermitian(c) => RealPolynomial::Hermitian(
                c.iter()
                    .filter(|(j, k, _)| *j >= 1 && *k >= 1)
                    .map(|&(j, k, cjk)| (j - 1, k - 1, cjk * (4 * j * k) as f64))
                    .collect(),
            ),
        }
    }

    /// Polarization `Q(z, w̄)`: analytic in `z`, anti-analytic in `w`.
    pub fn polarize(&self, z: Complex64, wbar: Complex64) -> Complex64 {
        match self {
            RealPolynomial::Radial(c) => {
                let u = z * wbar;
                c.iter().map(|&(j, a)| u.powu(j) * a).sum()
            }
            RealPolynomial::Hermitian(c) => c.iter().map(|&(j, k, cjk)| cjk * z.powu(j) * wbar.powu(k)).sum(),
        }
    }

    /// Mixed derivative `∂_1 ∂_2 Q(z, w̄)` of the polarization.
    pub fn polarized_mixed(&self, z: Complex64, wbar: Complex64) -> Complex64 {
        match self {
            RealPolynomial::Radial(c) => {
                let u = z * wbar;
                c.iter().filter(|(j, _)| *j >= 1).map(|&(j, a)| u.powu(j - 1) * (a * (j * j) as f64)).sum()
            }
            RealPolynomial::Hermitian(c) => c
                .iter()
                .filter(|(j, k, _)| *j >= 1 && *k >= 1)
                .map(|&(j, k, cjk)| cjk * ((j * k) as f64) * z.powu(j - 1) * wbar.powu(k - 1))
                .sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm() -> RealPolynomial {
        // |z|²/2 + 0.1 Re(z²) + 0.05 |z|⁴ + Re((0.02 + 0.03i) z² z̄)
        let c = Complex64::new(0.02, 0.03);
        RealPolynomial::Hermitian(vec![
            (1, 1, Complex64::new(0.5, 0.0)),
            (2, 0, Complex64::new(0.05, 0.0)),
            (0, 2, Complex64::new(0.05, 0.0)),
            (2, 2, Complex64::new(0.05, 0.0)),
            (2, 1, c * 0.5),
            (1, 2, c.conj() * 0.5),
        ])
    }

    fn fd_check(p: &RealPolynomial, z: Complex64) {
        let h = 1e-4;
        let f = |dx: f64, dy: f64| p.value(z + Complex64::new(dx, dy));
        let j = p.jet(z);
        let gx = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let gy = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        let gxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        assert!((j.dx - gx).abs() < 1e-7, "dx {} vs {}", j.dx, gx);
        assert!((j.dy - gy).abs() < 1e-7);
        assert!((j.laplacian() - lap).abs() < 1e-5, "lap {} vs {}", j.laplacian(), lap);
        assert!((j.dxy - gxy).abs() < 1e-5);
        assert!((p.laplacian(z) - j.laplacian()).abs() < 1e-12);
        assert!((p.laplacian_polynomial().value(z) - j.laplacian()).abs() < 1e-12);
    }

    #[test]
    fn hermitian_jet_matches_finite_differences() {
        fd_check(&herm(), Complex64::new(0.4, -0.7));
        fd_check(&herm(), Complex64::new(-1.1, 0.3));
    }

    #[test]
    fn radial_jet_matches_finite_differences() {
        let p = RealPolynomial::Radial(vec![(1, 0.5), (2, 0.025), (3, 0.01)]);
        fd_check(&p, Complex64::new(0.6, 0.2));
    }

    #[test]
    fn radial_and_hermitian_forms_agree() {
        let r = RealPolynomial::Radial(vec![(1, 0.5), (2, 0.25)]);
        let h = RealPolynomial::Hermitian(vec![(1, 1, Complex64::new(0.5, 0.0)), (2, 2, Complex64::new(0.25, 0.0))]);
        let z = Complex64::new(0.3, 0.9);
        let w = Complex64::new(-0.2, 0.5);
        assert!((r.value(z) - h.value(z)).abs() < 1e-15);
        assert!((r.wirtinger(z) - h.wirtinger(z)).norm() < 1e-15);
        assert!((r.polarize(z, w.conj()) - h.polarize(z, w.conj())).norm() < 1e-15);
        assert!((r.polarized_mixed(z, w.conj()) - h.polarized_mixed(z, w.conj())).norm() < 1e-15);
        let (jr, jh) = (r.jet(z), h.jet(z));
        assert!((jr.dxx - jh.dxx).abs() < 1e-14 && (jr.dxy - jh.dxy).abs() < 1e-14);
    }

    #[test]
    fn polarization_is_hermitian() {
        let p = herm();
        let z = Complex64::new(0.3, -0.4);
        let w = Complex64::new(1.2, 0.1);
        assert!((p.polarize(z, z.conj()).re - p.value(z)).abs() < 1e-14);
        assert!(p.polarize(z, z.conj()).im.abs() < 1e-14);
        assert!((p.polarize(z, w.conj()) - p.polarize(w, z.conj()).conj()).norm() < 1e-14);
    }
}
