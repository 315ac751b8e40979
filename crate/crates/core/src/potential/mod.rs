//! External potentials `Q`, their droplets and obstacle functions.

mod droplet;
mod fields;
mod poly;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use droplet::{obstacle, solve_droplet, Droplet, ObstacleFunction};
pub use fields::{log_laplacian_fields, LaplacianOfLog, LogLaplacian};
pub use poly::RealPolynomial;

use crate::error::{Error, Result};
use crate::numerics::{find_root, Dual2, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Radial,
    Hermitian,
}

/// `(Q, ∂Q, ΔQ)` at a point; entries beyond the requested order are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValue {
    pub q: f64,
    pub dq: Complex64,
    pub laplacian: f64,
}

/// A validated external potential.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    poly: RealPolynomial,
    growth_margin: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialJson {
    Radial { coeffs: Vec<(u32, f64)> },
    Hermitian { coeffs: Vec<(u32, u32, f64, f64)> },
}

const GROWTH_RADII: [f64; 2] = [1e3, 1e4];

impl Potential {
    /// `Q(z) = Σ a_j |z|^{2j}` from `(j, a_j)` pairs, `j ≥ 1`.
    pub fn radial(coeffs: &[(u32, f64)]) -> Result<Self> {
        let mut merged: Vec<(u32, f64)> = Vec::new();
        for &(j, a) in coeffs {
            if j == 0 {
                return Err(Error::InvalidPotential("radial exponents must satisfy j ≥ 1".into()));
            }
            if !a.is_finite() {
                return Err(Error::InvalidPotential(format!("coefficient a_{j} is not finite")));
            }
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|(_, a)| *a != 0.0);
        merged.sort_by_key(|(j, _)| *j);
        match merged.last() {
            None => return Err(Error::InvalidPotential("potential has no nonzero coefficients".into())),
            Some(&(j, a)) if a <= 0.0 => {
                return Err(Error::InvalidPotential(format!("leading coefficient a_{j} = {a} must be positive")))
            }
            _ => {}
        }
        Self::finish(RealPolynomial::Radial(merged))
    }

    /// `Q(z) = Σ c_jk z^j z̄^k` from `(j, k, c_jk)`; the table must be
    /// Hermitian (`c_kj = conj(c_jk)`).
    pub fn hermitian(coeffs: &[(u32, u32, Complex64)]) -> Result<Self> {
        let mut merged: Vec<(u32, u32, Complex64)> = Vec::new();
        for &(j, k, c) in coeffs {
            if !c.is_finite() {
                return Err(Error::InvalidPotential(format!("coefficient c_{j}{k} is not finite")));
            }
            match merged.iter_mut().find(|(a, b, _)| *a == j && *b == k) {
                Some(e) => e.2 += c,
                None => merged.push((j, k, c)),
            }
        }
        merged.retain(|(_, _, c)| c.norm() != 0.0);
        merged.sort_by_key(|(j, k, _)| (*j, *k));
        if merged.is_empty() {
            return Err(Error::InvalidPotential("potential has no nonzero coefficients".into()));
        }
        let scale = merged.iter().map(|(_, _, c)| c.norm()).fold(0.0, f64::max);
        for &(j, k, c) in &merged {
            let mirror = merged.iter().find(|(a, b, _)| *a == k && *b == j).map(|e| e.2).unwrap_or_default();
            if (c - mirror.conj()).norm() > 1e-12 * scale {
                return Err(Error::InvalidPotential(format!(
                    "coefficients are not Hermitian: c_{j}{k} = {c} but c_{k}{j} = {mirror}"
                )));
            }
        }
        if merged.iter().all(|(j, k, _)| *j == 0 && *k == 0) {
            return Err(Error::InvalidPotential("potential has degree zero".into()));
        }
        Self::finish(RealPolynomial::Hermitian(merged))
    }

    /// The Ginibre potential `|z|²/2`, whose droplet is the unit disk.
    pub fn ginibre() -> Self {
        Self::radial(&[(1, 0.5)]).expect("Ginibre potential is valid")
    }

    fn finish(poly: RealPolynomial) -> Result<Self> {
        let angles: Vec<f64> = match poly {
            RealPolynomial::Radial(_) => vec![0.0],
            RealPolynomial::Hermitian(_) => (0..64).map(|j| j as f64 * std::f64::consts::TAU / 64.0).collect(),
        };
        let mut margin = f64::INFINITY;
        for &r in &GROWTH_RADII {
            for &t in &angles {
                let q = poly.value(Complex64::from_polar(r, t));
                margin = margin.min(q / r.ln() - 1.0);
            }
        }
        if !(margin > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "growth condition fails: min Q(z)/log|z| − 1 = {margin} at |z| ∈ {{1e3, 1e4}}"
            )));
        }
        Ok(Potential { poly, growth_margin: margin })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let parsed: PotentialJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidPotential(e.to_string()))?;
        match parsed {
            PotentialJson::Radial { coeffs } => Self::radial(&coeffs),
            PotentialJson::Hermitian { coeffs } => Self::hermitian(
                &coeffs.into_iter().map(|(j, k, re, im)| (j, k, Complex64::new(re, im))).collect::<Vec<_>>(),
            ),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::InvalidPotential(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        let j = match &self.poly {
            RealPolynomial::Radial(c) => PotentialJson::Radial { coeffs: c.clone() },
            RealPolynomial::Hermitian(c) => {
                PotentialJson::Hermitian { coeffs: c.iter().map(|&(j, k, z)| (j, k, z.re, z.im)).collect() }
            }
        };
        serde_json::to_value(j).expect("potential serializes")
    }

    /// Canonical identifier: the compact JSON encoding.
    pub fn id(&self) -> String {
        self.to_json().to_string()
    }

    pub fn kind(&self) -> PotentialKind {
        match self.poly {
            RealPolynomial::Radial(_) => PotentialKind::Radial,
            RealPolynomial::Hermitian(_) => PotentialKind::Hermitian,
        }
    }

    pub fn is_radial(&self) -> bool {
        self.poly.is_radial()
    }

    pub fn polynomial(&self) -> &RealPolynomial {
        &self.poly
    }

    /// `min Q(z)/log|z| − 1` over the growth-check radii.
    pub fn growth_margin(&self) -> f64 {
        self.growth_margin
    }

    /// `(Q, ∂Q, ΔQ)` up to the requested derivative order (0, 1 or 2).
    pub fn eval(&self, z: Complex64, order: u8) -> PotentialValue {
        let q = self.poly.value(z);
        let dq = if order >= 1 { self.poly.wirtinger(z) } else { Complex64::new(0.0, 0.0) };
        let laplacian = if order >= 2 { self.poly.laplacian(z) } else { 0.0 };
        PotentialValue { q, dq, laplacian }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.poly.value(z)
    }

    pub fn wirtinger(&self, z: Complex64) -> Complex64 {
        self.poly.wirtinger(z)
    }

    pub fn laplacian(&self, z: Complex64) -> f64 {
        self.poly.laplacian(z)
    }

    /// `Q(r)` for radial potentials, as a function of the radius.
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        self.poly.radial_profile(r * r).map(|p| p.0)
    }

    /// `Q′(r)` for radial potentials.
    pub fn radial_derivative(&self, r: f64) -> Option<f64> {
        self.poly.radial_profile(r * r).map(|(_, q1, _)| 2.0 * r * q1)
    }

    /// `Q″(r)` for radial potentials.
    pub fn radial_second_derivative(&self, r: f64) -> Option<f64> {
        self.poly.radial_profile(r * r).map(|(_, q1, q2)| 2.0 * q1 + 4.0 * r * r * q2)
    }

    /// `Q(z, w̄)`.
    pub fn polarize(&self, z: Complex64, wbar: Complex64) -> Result<Complex64> {
        Ok(self.poly.polarize(z, wbar))
    }

    /// `(∂_1 ∂_2 Q)(z, w̄)`.
    pub fn polarized_mixed(&self, z: Complex64, wbar: Complex64) -> Result<Complex64> {
        Ok(self.poly.polarized_mixed(z, wbar))
    }

    /// Radius outside of which weighted polynomials of degree `< n` are
    /// negligible (below `e^{−75}` relative to their peak), allowing for a
    /// perturbation with `sup|h| = h_sup`.
    ///
    /// Radial potentials use the droplet: the smallest `r > R` with
    /// `2n(Q − Q̌)(r) ≥ 75 + 2 h_sup`. Hermitian potentials use the
    /// largest monomial `|z|^{2(n−1)} e^{−2nQ}` along the worst direction.
    pub fn effective_radius(&self, n: usize, h_sup: f64) -> Result<f64> {
        let target = 75.0 + 2.0 * h_sup;
        if self.is_radial() {
            let d = solve_droplet(self)?;
            let ob = obstacle(self, &d);
            let r0 = d.radius();
            let g = |r: f64| 2.0 * n as f64 * ob.deficit(Complex64::new(r, 0.0)) - target;
            let mut hi = 2.0 * r0;
            while g(hi) < 0.0 {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(Error::Domain("effective radius search diverged".into()));
                }
            }
            return find_root(g, r0, hi);
        }
        let nf = n as f64;
        let m = (n.max(1) - 1) as f64;
        let angles: Vec<f64> = (0..64).map(|j| j as f64 * std::f64::consts::TAU / 64.0).collect();
        // Exponent of the largest weighted monomial along the worst ray.
        let f = |r: f64| -> f64 {
            angles
                .iter()
                .map(|&t| 2.0 * m * r.ln() - 2.0 * nf * self.value(Complex64::from_polar(r, t)))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut peak = f64::NEG_INFINITY;
        let mut r = 1e-3;
        let mut best_r = r;
        while r < 1e4 {
            let v = f(r);
            if v > peak {
                peak = v;
                best_r = r;
            }
            if v < peak - target - 10.0 && r > 2.0 * best_r {
                break;
            }
            r *= 1.01;
        }
        let g = |r: f64| peak - target - f(r);
        let mut lo = best_r;
        let mut hi = best_r * 1.01;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 1.01;
            if hi > 1e5 {
                return Err(Error::Domain("effective radius search diverged".into()));
            }
        }
        find_root(g, lo, hi)
    }
}

impl ScalarField for Potential {
    fn jet(&self, z: Complex64) -> Dual2 {
        self.poly.jet(z)
    }
    fn value(&self, z: Complex64) -> f64 {
        self.poly.value(z)
    }
}
