use std::f64::consts::PI;

use num_complex::Complex64;

use super::Potential;
use crate::error::{Error, Result};
use crate::numerics::{find_root, make_polar_quadrature, integrate, Dual2, RadialRule, ScalarField};

/// The droplet of a radial potential: the disk `|z| ≤ R` with `R Q′(R) = 1`,
/// carrying the equilibrium density `u = ΔQ / 2π`.
#[derive(Clone, Debug, PartialEq)]
pub struct Droplet {
    potential: Potential,
    radius: f64,
    mass: f64,
}

/// Solves the radial equilibrium problem.
///
/// Requires `r Q′(r)` to be strictly increasing, which makes the support a
/// disk; the mass of the density is then re-checked by quadrature.
pub fn solve_droplet(p: &Potential) -> Result<Droplet> {
    if !p.is_radial() {
        return Err(Error::UnsupportedGeometry(
            "droplets are only computed for radial potentials (disk droplets)".into(),
        ));
    }
    let m = |r: f64| r * p.radial_derivative(r).unwrap();
    let mut hi = 1.0;
    while m(hi) <= 1.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Regularity("r Q′(r) never reaches 1".into()));
        }
    }
    // Monotonicity of r Q′(r), equivalently ΔQ ≥ 0 along rays.
    let grid = 2000;
    let span = 4.0 * hi;
    let mut prev = 0.0;
    for i in 1..=grid {
        let r = span * i as f64 / grid as f64;
        let v = m(r);
        if v <= prev {
            return Err(Error::Regularity(format!(
                "r Q′(r) is not strictly increasing near r = {r:.4}; the droplet would not be a disk"
            )));
        }
        prev = v;
    }
    let radius = find_root(|r| m(r) - 1.0, 0.0, hi)?;
    let residual = (m(radius) - 1.0).abs();
    if residual > 1e-10 {
        return Err(Error::Regularity(format!("radius equation residual {residual:e}")));
    }
    let rule = RadialRule::gauss_legendre(0.0, radius, 200)?;
    for &r in &rule.nodes {
        let lap = p.laplacian(Complex64::new(r, 0.0));
        if !(lap > 0.0) {
            return Err(Error::Regularity(format!("ΔQ = {lap} ≤ 0 at r = {r:.4} inside the droplet")));
        }
    }
    let mass = rule.integrate(|r| p.laplacian(Complex64::new(r, 0.0)) * r);
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Regularity(format!("droplet mass {mass} differs from 1")));
    }
    Ok(Droplet { potential: p.clone(), radius, mass })
}

impl Droplet {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Mass of the density computed by quadrature at construction.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() <= self.radius
    }

    /// Equilibrium density `u = ΔQ/2π · 1_S`.
    pub fn density(&self, z: Complex64) -> f64 {
        if self.contains(z) {
            self.potential.laplacian(z) / (2.0 * PI)
        } else {
            0.0
        }
    }

    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(self.radius, theta)
    }

    /// Euclidean distance to `∂S`.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (z.norm() - self.radius).abs()
    }

    /// `σ(D(0, r)) = min(r Q′(r), 1)`.
    pub fn mass_within(&self, r: f64) -> f64 {
        if r >= self.radius {
            1.0
        } else {
            r * self.potential.radial_derivative(r).unwrap()
        }
    }

    /// `∫_S f dσ` by polar quadrature on the droplet.
    pub fn integrate_against(&self, f: impl Fn(Complex64) -> f64 + Sync, n_radial: usize, n_angular: usize) -> Result<f64> {
        let rule = make_polar_quadrature(self.radius, n_radial, n_angular)?;
        integrate(&rule, |z| f(z) * self.potential.laplacian(z) / (2.0 * PI))
    }
}

/// The obstacle function `Q̌`: equal to `Q` on the droplet and to
/// `Q(R) + log(r/R)` outside.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleFunction {
    droplet: Droplet,
    boundary_value: f64,
}

pub fn obstacle(p: &Potential, d: &Droplet) -> ObstacleFunction {
    debug_assert_eq!(p, d.potential());
    let boundary_value = p.radial_value(d.radius()).unwrap();
    ObstacleFunction { droplet: d.clone(), boundary_value }
}

impl ObstacleFunction {
    pub fn droplet(&self) -> &Droplet {
        &self.droplet
    }

    pub fn value(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let big_r = self.droplet.radius;
        if r <= big_r {
            self.droplet.potential.value(z)
        } else {
            self.boundary_value + (r / big_r).ln()
        }
    }

    /// `Q − Q̌ ≥ 0`, zero on the droplet.
    pub fn deficit(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r <= self.droplet.radius {
            0.0
        } else {
            self.droplet.potential.value(z) - self.value(z)
        }
    }

    /// `∂Q̌`: `∂Q` inside, `1/(2z)` outside.
    pub fn wirtinger(&self, z: Complex64) -> Complex64 {
        if z.norm() <= self.droplet.radius {
            self.droplet.potential.wirtinger(z)
        } else {
            0.5 / z
        }
    }

    /// One-sided radial derivative `d/dr Q̌` at radius `r` (from outside at `R`).
    pub fn radial_derivative(&self, r: f64) -> f64 {
        if r < self.droplet.radius {
            self.droplet.potential.radial_derivative(r).unwrap()
        } else {
            1.0 / r
        }
    }

    /// `Q(R) + U^σ(R)` by quadrature, where `U^σ` is the logarithmic
    /// potential of the equilibrium measure. Diagnostic only.
    pub fn equilibrium_constant(&self, n_radial: usize, n_angular: usize) -> Result<f64> {
        let b = self.droplet.boundary_point(0.0);
        let u = self.droplet.integrate_against(|z| -(b - z).norm().ln(), n_radial, n_angular)?;
        Ok(self.boundary_value + u)
    }
}

impl ScalarField for ObstacleFunction {
    fn jet(&self, z: Complex64) -> Dual2 {
        if z.norm() <= self.droplet.radius {
            return self.droplet.potential.jet(z);
        }
        let r2 = z.norm_sqr();
        let (x, y) = (z.re, z.im);
        // Q(R) − log R + ½ log(x² + y²)
        Dual2 {
            value: self.value(z),
            dx: x / r2,
            dy: y / r2,
            dxx: (y * y - x * x) / (r2 * r2),
            dxy: -2.0 * x * y / (r2 * r2),
            dyy: (x * x - y * y) / (r2 * r2),
        }
    }

    fn value(&self, z: Complex64) -> f64 {
        ObstacleFunction::value(self, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ginibre_unit_disk() {
        let d = solve_droplet(&Potential::ginibre()).unwrap();
        assert!((d.radius() - 1.0).abs() < 1e-12);
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!((d.density(Complex64::new(0.3, 0.2)) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(d.density(Complex64::new(1.3, 0.0)), 0.0);
    }

    #[test]
    fn scaled_gaussian() {
        let d = solve_droplet(&Potential::radial(&[(1, 1.0)]).unwrap()).unwrap();
        assert!((d.radius() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quartic_radius_and_mass() {
        let p = Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap();
        let d = solve_droplet(&p).unwrap();
        let r = d.radius();
        assert!((r * r + 0.1 * r.powi(4) - 1.0).abs() < 1e-12);
        let mass = d.integrate_against(|_| 1.0, 64, 16).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hermitian_rejected() {
        let h = Potential::hermitian(&[(1, 1, Complex64::new(0.5, 0.0))]).unwrap();
        assert!(matches!(solve_droplet(&h), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn non_monotone_rejected() {
        // r Q′(r) = 2s q′(s) with q = s − 1.5 s² + 0.6 s³ dips for s in (0.2, 0.9).
        let p = Potential::radial(&[(1, 1.0), (2, -1.5), (3, 0.6)]).unwrap();
        assert!(matches!(solve_droplet(&p), Err(Error::Regularity(_))));
    }

    #[test]
    fn obstacle_ginibre() {
        let p = Potential::ginibre();
        let d = solve_droplet(&p).unwrap();
        let o = obstacle(&p, &d);
        assert!((o.value(Complex64::new(2.0, 0.0)) - (0.5 + 2f64.ln())).abs() < 1e-15);
        let z = Complex64::new(0.4, -0.3);
        assert_eq!(o.value(z), p.value(z));
        assert!((o.wirtinger(Complex64::new(2.0, 0.0)) * 2.0 - 0.5).norm() < 1e-15);
        // C¹ matching.
        assert!((o.radial_derivative(1.0 - 1e-15) - o.radial_derivative(1.0)).abs() < 1e-10);
        for i in 0..200 {
            let z = Complex64::from_polar(0.01 * i as f64 * 3.0, 0.3 * i as f64);
            assert!(o.value(z) <= p.value(z) + 1e-15);
        }
        // Q̌ − log|z| stays bounded.
        let far = [1e2, 1e4, 1e6].map(|r| o.value(Complex64::new(r, 0.0)) - r.ln());
        assert!(far.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn obstacle_quadratic_contact() {
        let p = Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap();
        let d = solve_droplet(&p).unwrap();
        let o = obstacle(&p, &d);
        let r = d.radius();
        let limit = 0.5 * p.radial_second_derivative(r).unwrap() + 0.5 / (r * r);
        for delta in [1e-3, 1e-2, 1e-1] {
            let ratio = o.deficit(Complex64::new(r + delta, 0.0)) / (delta * delta);
            assert!(ratio > 0.5 * limit && ratio < 2.0 * limit);
        }
        let near = o.deficit(Complex64::new(r + 1e-4, 0.0)) / 1e-8;
        assert!((near - limit).abs() < 1e-3 * limit);
    }

    #[test]
    fn equilibrium_constant_ginibre() {
        // U^σ(1) = 0 for the uniform measure on the unit disk; Q(1) = 1/2.
        let p = Potential::ginibre();
        let d = solve_droplet(&p).unwrap();
        let c = obstacle(&p, &d).equilibrium_constant(200, 256).unwrap();
        assert!((c - 0.5).abs() < 1e-3, "{c}");
    }
}
