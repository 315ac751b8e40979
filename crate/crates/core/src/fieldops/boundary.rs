//! Boundary Fourier analysis on the droplet circle: harmonic extension,
//! Neumann jump and Dirichlet forms.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use super::TestFunction;
use crate::error::{Error, Result};
use crate::numerics::{circle_fft, integrate, inverse_circle_fft, CircleSpectrum, Dual2, QuadratureRule, ScalarField};
use crate::potential::Droplet;

/// Resolution used by the field operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOptions {
    /// Number of Fourier modes `M`; the boundary is sampled at `2M` points.
    pub modes: usize,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions { modes: 256, n_radial: 200, n_angular: 256 }
    }
}

/// Fourier coefficients `c_k` of `θ ↦ g(R e^{iθ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFourier {
    radius: f64,
    modes: usize,
    spectrum: CircleSpectrum,
}

/// Samples `g` at `2M` boundary points and transforms.
///
/// Fails with a resolution error when the top mode is not below `1e−10` of
/// the largest coefficient.
pub fn boundary_fourier<G: ScalarField + ?Sized>(g: &G, d: &Droplet, modes: usize) -> Result<BoundaryFourier> {
    if modes < 16 || !modes.is_power_of_two() {
        return Err(Error::Parameter(format!("mode count must be a power of two ≥ 16 (got {modes})")));
    }
    let r = d.radius();
    let m2 = 2 * modes;
    let samples: Vec<Complex64> = (0..m2)
        .map(|j| Complex64::new(g.value(d.boundary_point(2.0 * PI * j as f64 / m2 as f64)), 0.0))
        .collect();
    if let Some(j) = samples.iter().position(|s| !s.re.is_finite()) {
        return Err(Error::Domain(format!("boundary data is not finite at sample {j}")));
    }
    let spectrum = circle_fft(&samples)?;
    let bf = BoundaryFourier { radius: r, modes, spectrum };
    let top = bf.coeff(modes as i64 - 1).norm().max(bf.coeff(-(modes as i64)).norm());
    let max = bf.spectrum.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    if top > 1e-10 * max {
        return Err(Error::Resolution(format!(
            "boundary Fourier coefficients decay only to {:.2e} of the peak at |k| = {modes}; raise the mode count",
            top / max
        )));
    }
    Ok(bf)
}

type CacheKey = (String, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<BoundaryFourier>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<BoundaryFourier>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized [`boundary_fourier`] for test functions, keyed by
/// `(function id, R, M)`.
pub fn boundary_fourier_cached(g: &TestFunction, d: &Droplet, modes: usize) -> Result<Arc<BoundaryFourier>> {
    let key = (g.id(), d.radius().to_bits(), modes);
    if let Some(bf) = cache().read().unwrap().get(&key) {
        return Ok(bf.clone());
    }
    let bf = Arc::new(boundary_fourier(g, d, modes)?);
    cache().write().unwrap().insert(key, bf.clone());
    Ok(bf)
}

impl BoundaryFourier {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `c_k` (zero outside the computed band).
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.spectrum.get(k)
    }

    pub fn spectrum(&self) -> &CircleSpectrum {
        &self.spectrum
    }

    /// `F(z) = c_0 + 2 Σ_{k≥1} c_{−k} (R/z)^k` and its first two derivatives;
    /// the exterior extension is `Re F`.
    fn analytic(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let w = self.radius / z;
        let zi = 1.0 / z;
        let mut f = self.coeff(0);
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut f2 = Complex64::new(0.0, 0.0);
        let mut wk = Complex64::new(1.0, 0.0);
        for k in 1..self.modes as i64 {
            wk *= w;
            let t = 2.0 * self.coeff(-k) * wk;
            let kf = k as f64;
            f += t;
            f1 -= t * kf;
            f2 += t * (kf * (kf + 1.0));
        }
        (f, f1 * zi, f2 * zi * zi)
    }

    /// Exterior harmonic extension `Σ c_k (R/r)^{|k|} e^{ikθ}`, `|z| ≥ R`.
    pub fn exterior_value(&self, z: Complex64) -> f64 {
        self.analytic(z).0.re
    }

    pub fn exterior_jet(&self, z: Complex64) -> Dual2 {
        let (f, f1, f2) = self.analytic(z);
        Dual2 { value: f.re, dx: f1.re, dy: -f1.im, dxx: f2.re, dxy: -f2.im, dyy: -f2.re }
    }

    /// `∂_r g^S(R⁺ e^{iθ}) = −Σ (|k|/R) c_k e^{ikθ}`.
    pub fn exterior_normal_derivative(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, -theta);
        let mut ek = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..self.modes as i64 {
            ek *= e;
            s += self.coeff(-k) * ek * k as f64;
        }
        -2.0 * s.re / self.radius
    }

    /// `∂_r g^S(R⁺)` at the `2M` sample angles, by inverse FFT.
    pub fn exterior_normal_derivative_samples(&self) -> Result<Vec<f64>> {
        let coeffs: Vec<Complex64> = self
            .spectrum
            .modes()
            .map(|(k, c)| if k == self.spectrum.min_mode() { Complex64::new(0.0, 0.0) } else { -c * (k.abs() as f64 / self.radius) })
            .collect();
        let spec = CircleSpectrum::from_coeffs(coeffs);
        Ok(inverse_circle_fft(&spec)?.into_iter().map(|c| c.re).collect())
    }

    /// `2π Σ_{k≠0} |k| c_k conj(d_k)`: the exterior Dirichlet pairing of two
    /// harmonic extensions.
    pub fn exterior_energy(&self, other: &BoundaryFourier) -> f64 {
        let m = self.modes.min(other.modes) as i64;
        let mut s = 0.0;
        for k in 1..m {
            // c_{−k} conj(d_{−k}) = conj(c_k conj(d_k)) for real data.
            s += 2.0 * k as f64 * (self.coeff(k) * other.coeff(k).conj()).re;
        }
        2.0 * PI * s
    }
}

/// `g^S`: `g` on the droplet, the bounded harmonic extension of its boundary
/// values outside.
pub struct HarmonicExtension<'a, G: ScalarField + ?Sized> {
    g: &'a G,
    boundary: Arc<BoundaryFourier>,
}

impl<'a, G: ScalarField + ?Sized> HarmonicExtension<'a, G> {
    pub fn new(g: &'a G, d: &Droplet, modes: usize) -> Result<Self> {
        Ok(HarmonicExtension { g, boundary: Arc::new(boundary_fourier(g, d, modes)?) })
    }

    pub fn with_boundary(g: &'a G, boundary: Arc<BoundaryFourier>) -> Self {
        HarmonicExtension { g, boundary }
    }

    pub fn boundary(&self) -> &BoundaryFourier {
        &self.boundary
    }
}

impl<G: ScalarField + ?Sized> ScalarField for HarmonicExtension<'_, G> {
    fn jet(&self, z: Complex64) -> Dual2 {
        if z.norm() <= self.boundary.radius {
            self.g.jet(z)
        } else {
            self.boundary.exterior_jet(z)
        }
    }

    fn value(&self, z: Complex64) -> f64 {
        if z.norm() <= self.boundary.radius {
            self.g.value(z)
        } else {
            self.boundary.exterior_value(z)
        }
    }
}

/// `g^S(z)` with the default mode count.
pub fn harmonic_extension(g: &TestFunction, d: &Droplet, z: Complex64) -> Result<f64> {
    if z.norm() <= d.radius() {
        return Ok(g.value(z));
    }
    Ok(boundary_fourier_cached(g, d, FieldOptions::default().modes)?.exterior_value(z))
}

/// Neumann jump `𝒩g(θ) = −∂_r g(R⁻ e^{iθ}) + ∂_r g^S(R⁺ e^{iθ})`.
pub fn neumann_jump(g: &TestFunction, d: &Droplet, theta: f64) -> Result<f64> {
    let bf = boundary_fourier_cached(g, d, FieldOptions::default().modes)?;
    let p = d.boundary_point(theta);
    let inner = g.jet(p).radial_derivative(p);
    Ok(-inner + bf.exterior_normal_derivative(theta))
}

/// `𝒩g` at the `2M` boundary sample angles `θ_j = πj/M`.
pub fn neumann_jump_samples<G: ScalarField + ?Sized>(g: &G, d: &Droplet, modes: usize) -> Result<Vec<f64>> {
    let bf = boundary_fourier(g, d, modes)?;
    let outer = bf.exterior_normal_derivative_samples()?;
    let m2 = 2 * modes;
    Ok((0..m2)
        .map(|j| {
            let p = d.boundary_point(2.0 * PI * j as f64 / m2 as f64);
            -g.jet(p).radial_derivative(p) + outer[j]
        })
        .collect())
}

/// Polar rule on the droplet, with panel breaks at the given radii.
pub(crate) fn droplet_rule(d: &Droplet, breaks: &[f64], opts: &FieldOptions) -> Result<QuadratureRule> {
    QuadratureRule::disk(d.radius(), breaks, opts.n_radial, opts.n_angular)
}

/// `(1/2π) ∫_ℂ ∇f^S · ∇g^S`: interior part by quadrature, exterior part in
/// closed Fourier form.
pub fn dirichlet_form(f: &TestFunction, g: &TestFunction, d: &Droplet) -> Result<f64> {
    dirichlet_form_with(f, g, d, &FieldOptions::default())
}

pub fn dirichlet_form_with(f: &TestFunction, g: &TestFunction, d: &Droplet, opts: &FieldOptions) -> Result<f64> {
    let mut breaks = f.breakpoints().to_vec();
    breaks.extend_from_slice(g.breakpoints());
    let rule = droplet_rule(d, &breaks, opts)?;
    let interior = integrate(&rule, |z| {
        let (a, b) = (f.jet(z), g.jet(z));
        a.dx * b.dx + a.dy * b.dy
    })?;
    let bf = boundary_fourier_cached(f, d, opts.modes)?;
    let bg = boundary_fourier_cached(g, d, opts.modes)?;
    Ok((interior + bf.exterior_energy(&bg)) / (2.0 * PI))
}

/// Limiting variance `(1/2π) ∫ |∇h^S|²`.
pub fn variance_limit(h: &TestFunction, d: &Droplet) -> Result<f64> {
    dirichlet_form(h, h, d)
}

/// Limiting mean shift `(1/2π) ∫ ∇f^S · ∇h^S` under the perturbation `h`.
pub fn mt3_shift(f: &TestFunction, h: &TestFunction, d: &Droplet) -> Result<f64> {
    dirichlet_form(f, h, d)
}
