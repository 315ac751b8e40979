//! Cauchy transforms of the equilibrium measure and of the fluctuation
//! measure `n(u_n − u)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{BasisPath, KernelModel};
use crate::numerics::{integrate, integrate_complex, make_polar_quadrature, QuadratureRule, RadialRule};
use crate::potential::{obstacle, Droplet, ObstacleFunction};

fn on_boundary(d: &Droplet, z: Complex64) -> bool {
    d.boundary_distance(z) <= 1e-12 * d.radius()
}

/// `σ(k_z) = ∫ dσ(ζ)/(z − ζ) = 2∂Q̌(z)`, closed form.
pub fn cauchy_transform_sigma(d: &Droplet, ob: &ObstacleFunction, z: Complex64) -> Result<Complex64> {
    if on_boundary(d, z) {
        return Err(Error::BoundaryEvaluation(format!("z = {z} lies on the droplet boundary")));
    }
    Ok(2.0 * ob.wirtinger(z))
}

/// Distance from `z` (inside the disk `|ζ| < r`) to the circle along `e^{iα}`.
pub(crate) fn chord(z: Complex64, r: f64, alpha: f64) -> f64 {
    let b = (z.conj() * Complex64::from_polar(1.0, alpha)).re;
    -b + (b * b + r * r - z.norm_sqr()).max(0.0).sqrt()
}

/// Rule for `∫_{|ζ|<r} g(ζ)/(z − ζ)`: centred at `z` when `z` is inside
/// (the polar Jacobian cancels the pole), a plain disk rule otherwise.
fn cauchy_rule(z: Complex64, r: f64, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    if z.norm() < r {
        QuadratureRule::star(z, n_radial, n_angular, |a| chord(z, r, a))
    } else {
        make_polar_quadrature(r, n_radial, n_angular)
    }
}

/// `∫_S u(ζ)/(z − ζ) dA(ζ)` by quadrature; the verification path for
/// [`cauchy_transform_sigma`].
pub fn cauchy_transform_quadrature(d: &Droplet, z: Complex64, n_radial: usize, n_angular: usize) -> Result<Complex64> {
    if on_boundary(d, z) {
        return Err(Error::BoundaryEvaluation(format!("z = {z} lies on the droplet boundary")));
    }
    let rule = cauchy_rule(z, d.radius(), n_radial, n_angular)?;
    integrate_complex(&rule, |s| d.density(s) / (z - s))
}

/// `D_n(z)` with an accuracy flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DnValue {
    pub value: Complex64,
    /// Set when `z` is within one quadrature spacing of `∂S`.
    pub near_boundary: bool,
}

/// `D_n` for a kernel on the radial path. For a radial density the Cauchy
/// transform reduces to the enclosed mass:
/// `D_n(z) = (∫_{|ζ|<|z|} 𝐊_n(ζ, ζ) − n σ(D(0, |z|))) / z`.
#[derive(Clone, Debug)]
pub struct DnProfile {
    n: usize,
    droplet: Droplet,
    kernel: KernelModel,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

const PANEL_NODES: usize = 24;

impl DnProfile {
    pub fn new(km: &KernelModel, d: &Droplet) -> Result<Self> {
        if km.path() != BasisPath::Radial {
            return Err(Error::Parameter("DnProfile needs a radial-path kernel; use dn_field_general".into()));
        }
        let n = km.n();
        let r_eff = km.effective_radius();
        let panels = ((r_eff * (n as f64).sqrt() * 2.0).ceil() as usize).max(8);
        let mut edges: Vec<f64> = (0..=panels).map(|i| r_eff * i as f64 / panels as f64).collect();
        if d.radius() < r_eff {
            edges.push(d.radius());
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup();
        }
        let gl = crate::numerics::quadrature::gauss_legendre_unit(PANEL_NODES);
        let mut me = DnProfile { n, droplet: d.clone(), kernel: km.clone(), edges, cumulative: Vec::new(), gl };
        let mut acc = 0.0;
        let mut cumulative = vec![0.0];
        for w in me.edges.windows(2) {
            acc += me.panel_mass(w[0], w[1]);
            cumulative.push(acc);
        }
        me.cumulative = cumulative;
        Ok(me)
    }

    /// `∫_a^b 2π s 𝐊(s, s) ds`.
    fn panel_mass(&self, a: f64, b: f64) -> f64 {
        let (x, w) = &self.gl;
        let h = 0.5 * (b - a);
        x.iter()
            .zip(w)
            .map(|(t, wt)| {
                let s = a + h * (t + 1.0);
                wt * h * 2.0 * PI * s * self.kernel.diag(Complex64::new(s, 0.0))
            })
            .sum()
    }

    /// `∫_{|ζ|<r} 𝐊_n(ζ, ζ) dA`.
    pub fn enclosed(&self, r: f64) -> f64 {
        let last = *self.edges.last().unwrap();
        if r >= last {
            return *self.cumulative.last().unwrap();
        }
        let i = self.edges.partition_point(|e| *e <= r).saturating_sub(1);
        self.cumulative[i] + self.panel_mass(self.edges[i], r)
    }

    pub fn eval(&self, z: Complex64) -> DnValue {
        let r = z.norm();
        let spacing = self.droplet.radius() / crate::kernel::DEFAULT_RADIAL_NODES as f64;
        let near_boundary = self.droplet.boundary_distance(z) < spacing;
        if r == 0.0 {
            return DnValue { value: Complex64::new(0.0, 0.0), near_boundary };
        }
        let excess = self.enclosed(r) - self.n as f64 * self.droplet.mass_within(r);
        DnValue { value: excess / z, near_boundary }
    }

    /// `∂̄D_n = π(𝐊_n(z, z) − n u(z))`.
    pub fn dbar(&self, z: Complex64) -> f64 {
        PI * (self.kernel.diag(z) - self.n as f64 * self.droplet.density(z))
    }
}

/// `D_n(z) = n ∫ (u_n(ζ) − u(ζ))/(z − ζ) dA(ζ)`.
pub fn dn_field(km: &KernelModel, d: &Droplet, z: Complex64) -> Result<DnValue> {
    if km.path() == BasisPath::Radial {
        return Ok(DnProfile::new(km, d)?.eval(z));
    }
    dn_field_general(km, d, z, 200, 256)
}

/// `D_n` for any kernel: the `u_n` part by a `z`-centred polar rule over the
/// disk of radius `R_eff`, the `u` part in closed form via `σ(k_z) = 2∂Q̌`.
pub fn dn_field_general(km: &KernelModel, d: &Droplet, z: Complex64, n_radial: usize, n_angular: usize) -> Result<DnValue> {
    let r_eff = km.effective_radius();
    let spacing = r_eff / n_radial as f64;
    let near_boundary = d.boundary_distance(z) < spacing;
    let ob = obstacle(d.potential(), d);
    let sigma = if on_boundary(d, z) {
        // Both one-sided limits of 2∂Q̌ agree on a disk: 1/z = z̄/R².
        1.0 / z
    } else {
        cauchy_transform_sigma(d, &ob, z)?
    };
    let rule = cauchy_rule(z, r_eff, n_radial, n_angular)?;
    let kpart = integrate_complex(&rule, |s| km.diag(s) / (z - s))?;
    Ok(DnValue { value: kpart - km.n() as f64 * sigma, near_boundary })
}

/// `∫ f 𝐊_n(z, z) dA − n ∫ f dσ` on a radial rule (used by tests and the
/// pairing check).
#[allow(dead_code)]
pub(crate) fn radial_nu_n(km: &KernelModel, d: &Droplet, f: impl Fn(Complex64) -> f64 + Sync) -> Result<f64> {
    let r_eff = km.effective_radius();
    let rule = QuadratureRule::polar(
        Complex64::new(0.0, 0.0),
        RadialRule::with_breakpoints(0.0, r_eff, &[d.radius()], 400)?,
        256,
    )?;
    integrate(&rule, |z| f(z) * (km.diag(z) - km.n() as f64 * d.density(z)))
}
