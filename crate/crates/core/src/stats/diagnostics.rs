//! Finite-`n` diagnostics for the kernel estimates: exterior suppression,
//! bulk approximation by `𝐊^#`, and Berezin versus heat kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fieldops::chord;
use crate::kernel::{berezin, heat_kernel, ApproxKernel, KernelModel};
use crate::numerics::{pairwise_sum, RadialRule};
use crate::potential::{obstacle, Droplet};

/// `sup 𝐊_n(z, z) / (n e^{−2n(Q − Q̌)(z)})` over the circles `|z| = R + δ`.
pub fn exterior_bound_constant(km: &KernelModel, d: &Droplet, deltas: &[f64], n_angles: usize) -> f64 {
    let ob = obstacle(km.potential(), d);
    let n = km.n() as f64;
    let pts: Vec<Complex64> = deltas
        .iter()
        .flat_map(|&dl| {
            (0..n_angles).map(move |j| Complex64::from_polar(d.radius() + dl, 2.0 * PI * j as f64 / n_angles as f64))
        })
        .collect();
    pts.par_iter()
        .map(|&z| km.diag(z) / (n * (-2.0 * n * ob.deficit(z)).exp()))
        .reduce(|| 0.0, f64::max)
}

/// Fifty bulk pairs: ten base points in `|z| ≤ R/4`, each paired with
/// `w = z + (c/√n) e^{iφ}` for `c ∈ {0, 0.5, 1, 1.5, 2}`.
pub fn bulk_pairs(n: usize, d: &Droplet) -> Vec<(Complex64, Complex64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let s = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(50);
    for i in 0..10 {
        let rho = 0.25 * d.radius() * ((i as f64 + 0.5) / 10.0).sqrt();
        let z = d.center() + Complex64::from_polar(rho, golden * i as f64);
        for c in [0.0, 0.5, 1.0, 1.5, 2.0] {
            out.push((z, z + Complex64::from_polar(c * s, 1.0 + 2.0 * golden * i as f64)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkDiscrepancy {
    /// `max ||𝐊_n(z, w)| − |𝐊^#(z, w)||`.
    pub max_abs: f64,
    /// The same, relative to `n`.
    pub max_rel: f64,
}

pub fn bulk_kernel_discrepancy(km: &KernelModel, ak: &ApproxKernel, pairs: &[(Complex64, Complex64)]) -> Result<BulkDiscrepancy> {
    let n = km.n();
    let mut max_abs: f64 = 0.0;
    for &(z, w) in pairs {
        let exact = km.eval(z, w).norm();
        let approx = ak.eval(n, z, w)?.norm();
        max_abs = max_abs.max((exact - approx).abs());
    }
    Ok(BulkDiscrepancy { max_abs, max_rel: max_abs / n as f64 })
}

/// `sup_{|z − w| < δ} |B^⟨w⟩(z) − H^⟨w⟩(z)|` on a polar grid around `w`.
pub fn berezin_heat_discrepancy(km: &KernelModel, w: Complex64, delta: f64) -> Result<f64> {
    let p = km.potential();
    let n = km.n();
    let mut sup: f64 = 0.0;
    for i in 0..=40 {
        let rho = delta * i as f64 / 40.0;
        for j in 0..32 {
            let z = w + Complex64::from_polar(rho, 2.0 * PI * j as f64 / 32.0);
            sup = sup.max((berezin(km, w, z)? - heat_kernel(p, n, w, z)?).abs());
            if i == 0 {
                break;
            }
        }
    }
    Ok(sup)
}

/// `∫_{|z − w| > δ} B^⟨w⟩(z) dA(z)`, integrated directly over the
/// complement (inside the effective support) so that small tails keep
/// their relative accuracy.
pub fn berezin_tail(km: &KernelModel, w: Complex64, delta: f64) -> Result<f64> {
    let r_eff = km.effective_radius();
    let n_angular = 128;
    let dalpha = 2.0 * PI / n_angular as f64;
    let mut terms = Vec::new();
    for j in 0..n_angular {
        let alpha = (j as f64 + 0.5) * dalpha;
        let len = chord(w, r_eff, alpha);
        if len <= delta {
            continue;
        }
        let dir = Complex64::from_polar(1.0, alpha);
        let s = 1.0 / (km.n() as f64).sqrt();
        let breaks: Vec<f64> = (1..16).map(|k| delta + k as f64 * s).collect();
        let radial = RadialRule::with_breakpoints(delta, len, &breaks, 96)?;
        for (rho, q) in radial.nodes.iter().zip(&radial.weights) {
            terms.push(q * rho * dalpha * berezin(km, w, w + dir * rho)?);
        }
    }
    Ok(pairwise_sum(&terms))
}
