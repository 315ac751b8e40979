//! Tensor-product quadrature on disks, annuli and star-shaped regions.
//!
//! Radial integration is Gauss–Legendre (optionally split at breakpoints so
//! that functions with finitely smooth joints still converge quickly); angular
//! integration is the uniform trapezoidal rule, which is exact for
//! trigonometric polynomials of degree below the number of angles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sum::{pairwise_sum, pairwise_sum_complex};
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let nf = n as f64;
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One-dimensional rule for `∫_a^b g(r) dr`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Parameter(format!(
                "Gauss–Legendre rule needs a < b and n ≥ 1 (a = {a}, b = {b}, n = {n})"
            )));
        }
        let (x, w) = gauss_legendre_unit(n);
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        Ok(RadialRule {
            a,
            b,
            nodes: x.iter().map(|t| c + h * t).collect(),
            weights: w.iter().map(|wi| h * wi).collect(),
        })
    }

    /// Composite Gauss–Legendre rule with panels split at every breakpoint
    /// strictly inside `(a, b)`. Nodes are distributed in proportion to panel
    /// length, with at least `min(8, n_total)` per panel.
    pub fn with_breakpoints(a: f64, b: f64, breaks: &[f64], n_total: usize) -> Result<Self> {
        let mut cuts: Vec<f64> = breaks
            .iter()
            .cloned()
            .filter(|t| t.is_finite() && *t > a + 1e-12 * (b - a) && *t < b - 1e-12 * (b - a))
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (b - a));
        let mut edges = vec![a];
        edges.extend(cuts);
        edges.push(b);
        let panels = edges.len() - 1;
        let floor = 8.min(n_total.max(1));
        let total = n_total.max(floor * panels);
        let len = b - a;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut remaining = total;
        for p in 0..panels {
            let (lo, hi) = (edges[p], edges[p + 1]);
            let np = if p + 1 == panels {
                remaining
            } else {
                let share = ((hi - lo) / len * total as f64).round() as usize;
                share.max(floor).min(remaining - floor * (panels - p - 1))
            };
            remaining -= np;
            let r = RadialRule::gauss_legendre(lo, hi, np)?;
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Ok(RadialRule { a, b, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * g(r)).collect();
        pairwise_sum(&terms)
    }
}

/// Region covered by a [`QuadratureRule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
    Star { center: [f64; 2] },
    Union { parts: Vec<Domain> },
}

impl Domain {
    /// Area when it is known in closed form.
    pub fn area(&self) -> Option<f64> {
        match self {
            Domain::Annulus { inner, outer, .. } => Some(PI * (outer * outer - inner * inner)),
            Domain::Star { .. } => None,
            Domain::Union { parts } => parts.iter().map(|p| p.area()).sum(),
        }
    }
}

/// Tensor structure retained for polar rules so that callers can exploit
/// angular FFTs or radial symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub center: Complex64,
    pub radial: RadialRule,
    pub n_angular: usize,
}

impl PolarGrid {
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_angular as f64
    }
}

/// A two-dimensional quadrature rule: nodes in the plane with positive weights.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    domain: Domain,
    polar: Option<PolarGrid>,
}

/// Builds the tensor polar rule on the disk `|z| ≤ r_max`.
pub fn make_polar_quadrature(r_max: f64, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    if n_radial < 4 || n_angular < 4 {
        return Err(Error::Parameter(format!(
            "polar quadrature needs at least 4 radial and 4 angular nodes (got {n_radial} × {n_angular})"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Parameter(format!("polar quadrature radius must be positive (got {r_max})")));
    }
    QuadratureRule::polar(Complex64::new(0.0, 0.0), RadialRule::gauss_legendre(0.0, r_max, n_radial)?, n_angular)
}

impl QuadratureRule {
    /// Tensor rule `radial × trapezoid(n_angular)` centred at `center`. The
    /// radial rule must live on a subinterval of `[0, ∞)`.
    pub fn polar(center: Complex64, radial: RadialRule, n_angular: usize) -> Result<Self> {
        if n_angular < 4 || radial.is_empty() {
            return Err(Error::Parameter("polar rule needs ≥ 4 angles and a nonempty radial rule".into()));
        }
        if radial.a < 0.0 {
            return Err(Error::Parameter(format!("radial interval starts below zero ({})", radial.a)));
        }
        let dtheta = 2.0 * PI / n_angular as f64;
        let dirs: Vec<Complex64> = (0..n_angular).map(|j| Complex64::from_polar(1.0, j as f64 * dtheta)).collect();
        let mut nodes = Vec::with_capacity(radial.len() * n_angular);
        let mut weights = Vec::with_capacity(radial.len() * n_angular);
        for (&r, &w) in radial.nodes.iter().zip(&radial.weights) {
            for d in &dirs {
                nodes.push(center + d * r);
                weights.push(w * r * dtheta);
            }
        }
        let domain = Domain::Annulus { center: [center.re, center.im], inner: radial.a, outer: radial.b };
        Ok(QuadratureRule { nodes, weights, domain, polar: Some(PolarGrid { center, radial, n_angular }) })
    }

    /// Disk of radius `r_max` around the origin with radial panels split at
    /// `breaks`.
    pub fn disk(r_max: f64, breaks: &[f64], n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::annulus(Complex64::new(0.0, 0.0), 0.0, r_max, breaks, n_radial, n_angular)
    }

    pub fn annulus(
        center: Complex64,
        inner: f64,
        outer: f64,
        breaks: &[f64],
        n_radial: usize,
        n_angular: usize,
    ) -> Result<Self> {
        if n_radial < 4 || n_angular < 4 {
            return Err(Error::Parameter(format!(
                "annulus rule needs at least 4 radial and 4 angular nodes (got {n_radial} × {n_angular})"
            )));
        }
        Self::polar(center, RadialRule::with_breakpoints(inner, outer, breaks, n_radial)?, n_angular)
    }

    /// Star-shaped region around `center` described by its radial function
    /// `rho_max(α)`: `z = center + ρ e^{iα}`, `0 ≤ ρ ≤ rho_max(α)`. Weights
    /// include the Jacobian `ρ`, so integrands with a `1/|z − center|`
    /// singularity are integrated to spectral accuracy.
    pub fn star(
        center: Complex64,
        n_radial: usize,
        n_angular: usize,
        rho_max: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n_radial < 4 || n_angular < 4 {
            return Err(Error::Parameter(format!(
                "star rule needs at least 4 radial and 4 angular nodes (got {n_radial} × {n_angular})"
            )));
        }
        let (x, w) = gauss_legendre_unit(n_radial);
        let dalpha = 2.0 * PI / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for j in 0..n_angular {
            let alpha = j as f64 * dalpha;
            let rm = rho_max(alpha);
            if !(rm >= 0.0) || !rm.is_finite() {
                return Err(Error::Parameter(format!("star rule radius must be finite and ≥ 0 (got {rm} at α = {alpha})")));
            }
            let dir = Complex64::from_polar(1.0, alpha);
            for (t, wt) in x.iter().zip(&w) {
                let rho = 0.5 * rm * (t + 1.0);
                nodes.push(center + dir * rho);
                weights.push(0.5 * rm * wt * rho * dalpha);
            }
        }
        Ok(QuadratureRule { nodes, weights, domain: Domain::Star { center: [center.re, center.im] }, polar: None })
    }

    /// Union of rules over disjoint regions.
    pub fn concat(rules: Vec<QuadratureRule>) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut parts = Vec::new();
        for r in rules {
            nodes.extend(r.nodes);
            weights.extend(r.weights);
            parts.push(r.domain);
        }
        QuadratureRule { nodes, weights, domain: Domain::Union { parts }, polar: None }
    }

    /// The same rule shifted by `c`.
    pub fn translated(&self, c: Complex64) -> Self {
        let shift = |d: &Domain| -> Domain { shift_domain(d, c) };
        QuadratureRule {
            nodes: self.nodes.iter().map(|z| z + c).collect(),
            weights: self.weights.clone(),
            domain: shift(&self.domain),
            polar: self.polar.as_ref().map(|p| PolarGrid { center: p.center + c, ..p.clone() }),
        }
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn polar_grid(&self) -> Option<&PolarGrid> {
        self.polar.as_ref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of weights, i.e. the rule's approximation of the area.
    pub fn measure(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Radius of the smallest origin-centred disk containing every node.
    pub fn extent(&self) -> f64 {
        self.nodes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn shift_domain(d: &Domain, c: Complex64) -> Domain {
    match d {
        Domain::Annulus { center, inner, outer } => {
            Domain::Annulus { center: [center[0] + c.re, center[1] + c.im], inner: *inner, outer: *outer }
        }
        Domain::Star { center } => Domain::Star { center: [center[0] + c.re, center[1] + c.im] },
        Domain::Union { parts } => Domain::Union { parts: parts.iter().map(|p| shift_domain(p, c)).collect() },
    }
}

/// Integrates a real field. Nodes are evaluated in parallel and reduced by
/// pairwise summation in node order, so the result does not depend on the
/// thread count.
pub fn integrate<F>(rule: &QuadratureRule, field: F) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let terms: Vec<f64> = rule.nodes.par_iter().zip(&rule.weights).map(|(&z, &w)| w * field(z)).collect();
    check_finite(rule, &terms, |t| t.is_finite(), |t| *t)?;
    Ok(pairwise_sum(&terms))
}

/// Complex-valued counterpart of [`integrate`].
pub fn integrate_complex<F>(rule: &QuadratureRule, field: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let terms: Vec<Complex64> = rule.nodes.par_iter().zip(&rule.weights).map(|(&z, &w)| field(z) * w).collect();
    check_finite(rule, &terms, |t| t.is_finite(), |t| if t.re.is_finite() { t.im } else { t.re })?;
    Ok(pairwise_sum_complex(&terms))
}

fn check_finite<T>(rule: &QuadratureRule, terms: &[T], ok: impl Fn(&T) -> bool, bad: impl Fn(&T) -> f64) -> Result<()> {
    if let Some(i) = terms.iter().position(|t| !ok(t)) {
        let z = rule.nodes[i];
        return Err(Error::Evaluation { node: i, x: z.re, y: z.im, value: bad(&terms[i]) });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let r = RadialRule::gauss_legendre(0.0, 2.0, 10).unwrap();
        // ∫_0^2 x^19 dx = 2^20 / 20
        assert_relative_eq!(r.integrate(|x| x.powi(19)), 2f64.powi(20) / 20.0, max_relative = 1e-13);
        let big = RadialRule::gauss_legendre(-1.0, 1.0, 400).unwrap();
        assert_relative_eq!(big.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(big.integrate(|x| x.cos()), 2.0 * 1f64.sin(), max_relative = 1e-14);
    }

    #[test]
    fn breakpoints_are_honoured() {
        let r = RadialRule::with_breakpoints(0.0, 3.0, &[1.0, 2.0, 5.0], 60).unwrap();
        assert_eq!(r.len(), 60);
        // |x - 1| has a kink at 1, which is a panel edge.
        assert_relative_eq!(r.integrate(|x| (x - 1.0).abs()), 2.5, max_relative = 1e-14);
    }

    #[test]
    fn unit_disk_area() {
        let q = make_polar_quadrature(1.0, 16, 16).unwrap();
        assert_relative_eq!(integrate(&q, |_| 1.0).unwrap(), PI, max_relative = 1e-13);
        assert_relative_eq!(q.measure(), q.domain().area().unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn closed_form_integrals() {
        let q = make_polar_quadrature(1.0, 16, 16).unwrap();
        assert_relative_eq!(integrate(&q, |z| z.re * z.re).unwrap(), PI / 4.0, max_relative = 1e-13);
        let g = make_polar_quadrature(6.0, 80, 8).unwrap();
        let v = integrate(&g, |z| (-z.norm_sqr()).exp()).unwrap();
        assert_relative_eq!(v, PI * (1.0 - (-36f64).exp()), max_relative = 1e-12);
    }

    #[test]
    fn shifted_gaussian_bump_mass() {
        let c = Complex64::new(0.3, -0.2);
        let q = make_polar_quadrature(8.0, 120, 64).unwrap().translated(c);
        let v = integrate(&q, |z| (-2.0 * (z - c).norm_sqr()).exp()).unwrap();
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn nan_reports_node() {
        let q = make_polar_quadrature(1.0, 4, 4).unwrap();
        let bad = q.nodes()[5];
        let err = integrate(&q, |z| if z == bad { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::Evaluation { node, .. } => assert_eq!(node, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(integrate(&q, |_| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_counts_rejected() {
        assert!(make_polar_quadrature(1.0, 3, 16).is_err());
        assert!(make_polar_quadrature(1.0, 16, 2).is_err());
        assert!(make_polar_quadrature(0.0, 16, 16).is_err());
    }

    #[test]
    fn star_rule_handles_cauchy_singularity() {
        // ∫_{|ζ|<1} dA(ζ) / (z − ζ) = π z̄ for |z| < 1.
        let z = Complex64::new(0.3, 0.1);
        let q = QuadratureRule::star(z, 40, 64, |a| {
            let d = Complex64::from_polar(1.0, a);
            let b = (z.conj() * d).re;
            -b + (b * b - z.norm_sqr() + 1.0).sqrt()
        })
        .unwrap();
        let v = integrate_complex(&q, |zeta| 1.0 / (z - zeta)).unwrap();
        assert!((v - PI * z.conj()).norm() < 1e-12);
        assert_relative_eq!(q.measure(), PI, max_relative = 1e-12);
    }
}
