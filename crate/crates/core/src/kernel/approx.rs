use std::f64::consts::PI;

use num_complex::Complex64;

use super::KernelModel;
use crate::error::{Error, Result};
use crate::fieldops::TestFunction;
use crate::numerics::ScalarField;
use crate::potential::Potential;

/// The leading-order bulk kernel
/// `𝐊^#(z, w) = (2/π) n (∂₁∂₂Q)(z, w̄) e^{n[2Q(z, w̄) − Q(z) − Q(w)]}`,
/// multiplied by `e^{h(z) + h(w) − 2h_w(z)}` for a perturbation `h`, where
/// `h_w(z) = h(w) + (z − w) ∂h(w)`.
#[derive(Clone, Debug)]
pub struct ApproxKernel {
    potential: Potential,
    perturbation: Option<TestFunction>,
}

impl ApproxKernel {
    pub fn new(p: &Potential, h: Option<&TestFunction>) -> Result<Self> {
        // Every supported potential is a polynomial and therefore polarizable;
        // this call is kept as the single point of failure for future kinds.
        p.polarize(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?;
        Ok(ApproxKernel { potential: p.clone(), perturbation: h.cloned() })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `h(z) + h(w) − 2 h_w(z)`.
    fn perturbation_exponent(&self, z: Complex64, w: Complex64) -> Complex64 {
        match &self.perturbation {
            None => Complex64::new(0.0, 0.0),
            Some(h) => {
                let jw = h.jet(w);
                let hw_z = jw.value + (z - w) * jw.wirtinger();
                h.value(z) + jw.value - 2.0 * hw_z
            }
        }
    }

    pub fn eval(&self, n: usize, z: Complex64, w: Complex64) -> Result<Complex64> {
        let nf = n as f64;
        let wbar = w.conj();
        let mixed = self.potential.polarized_mixed(z, wbar)?;
        let pol = self.potential.polarize(z, wbar)?;
        let exponent = nf * (2.0 * pol - self.potential.value(z) - self.potential.value(w))
            + self.perturbation_exponent(z, w);
        Ok(mixed * (2.0 * nf / PI) * exponent.exp())
    }
}

/// `𝐊^#_n(z, w)`.
pub fn eval_approx_kernel(ak: &ApproxKernel, n: usize, z: Complex64, w: Complex64) -> Result<Complex64> {
    ak.eval(n, z, w)
}

/// Berezin density `B^⟨w⟩(z) = |𝐊_n(z, w)|² / 𝐊_n(w, w)`.
pub fn berezin(km: &KernelModel, w: Complex64, z: Complex64) -> Result<f64> {
    let kww = km.diag(w);
    if !(kww > 1e-300) {
        return Err(Error::DegenerateRoot(kww));
    }
    Ok(km.eval(z, w).norm_sqr() / kww)
}

/// Heat kernel `H^⟨w⟩(z) = (c n/π) e^{−c n |z − w|²}` with `c = 2∂∂̄Q(w)`.
pub fn heat_kernel(p: &Potential, n: usize, w: Complex64, z: Complex64) -> Result<f64> {
    let c = heat_rate(p, w)?;
    let cn = c * n as f64;
    Ok(cn / PI * (-cn * (z - w).norm_sqr()).exp())
}

/// `c = 2∂∂̄Q(w) = ΔQ(w)/2`.
pub fn heat_rate(p: &Potential, w: Complex64) -> Result<f64> {
    let c = 0.5 * p.laplacian(w);
    if !(c > 0.0) {
        return Err(Error::Domain(format!("2∂∂̄Q(w) = {c} ≤ 0 at w = {w}")));
    }
    Ok(c)
}

/// Heat-kernel mass outside `D(w, δ)`: `e^{−c n δ²}`.
pub fn heat_tail_mass(p: &Potential, n: usize, w: Complex64, delta: f64) -> Result<f64> {
    Ok((-heat_rate(p, w)? * n as f64 * delta * delta).exp())
}

/// `δ_n = log²n / √n`.
pub fn delta_n(n: usize) -> f64 {
    let nf = n as f64;
    nf.ln().powi(2) / nf.sqrt()
}
