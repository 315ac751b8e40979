use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fieldops::{droplet_rule, DnProfile, FieldOptions, TestFunction};
use crate::kernel::{kernel_rule, BasisPath, KernelModel};
use crate::numerics::{integrate, integrate_complex, pairwise_sum, CompensatedComplex, QuadratureRule, ScalarField};
use crate::potential::Droplet;
use crate::sampler::Configuration;

/// Quadrature resolution for kernel integrals over the effective support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelQuadrature {
    pub n_radial: usize,
    pub n_angular: usize,
    /// Allowed relative defect of `∫ 𝐊_n(z, z) = n` on the rule.
    pub trace_tolerance: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        KernelQuadrature { n_radial: 400, n_angular: 256, trace_tolerance: 1e-8 }
    }
}

/// `Tr_n[f] = Σ f(λ_j)`. The terms are summed in sorted order, so the value
/// does not depend on the order of the points.
pub fn linear_statistic(c: &Configuration, f: &TestFunction) -> f64 {
    let mut v: Vec<f64> = c.points.iter().map(|&z| f.value(z)).collect();
    v.sort_by(f64::total_cmp);
    pairwise_sum(&v)
}

/// `σ(f) = ∫_S f u`.
pub fn sigma_pairing(f: &TestFunction, d: &Droplet) -> Result<f64> {
    let rule = droplet_rule(d, f.breakpoints(), &FieldOptions::default())?;
    integrate(&rule, |z| f.value(z) * d.density(z))
}

fn rule_for(km: &KernelModel, d: &Droplet, breaks: &[f64], q: &KernelQuadrature) -> Result<QuadratureRule> {
    let mut b = breaks.to_vec();
    b.push(d.radius());
    kernel_rule(km.potential(), km.n(), km.perturbation(), &b, q.n_radial, q.n_angular)
}

/// Diagonal `𝐊_n(z, z)` at every node, with the trace checked against `n`.
pub(crate) fn checked_diagonal(km: &KernelModel, rule: &QuadratureRule, tol: f64) -> Result<Vec<f64>> {
    let diag: Vec<f64> = rule.nodes().par_iter().map(|&z| km.diag(z)).collect();
    let terms: Vec<f64> = diag.iter().zip(rule.weights()).map(|(k, w)| k * w).collect();
    let trace = pairwise_sum(&terms);
    let n = km.n() as f64;
    if (trace - n).abs() > tol * n {
        return Err(Error::Resolution(format!(
            "kernel trace on the quadrature rule is {trace}, expected {n}; raise the node counts"
        )));
    }
    Ok(diag)
}

/// `ν_n(f) = 𝐄 Tr_n[f] − nσ(f) = ∫ f 𝐊_n(z, z) − n ∫_S f u`.
pub fn nu_n_kernel(km: &KernelModel, d: &Droplet, f: &TestFunction) -> Result<f64> {
    nu_n_kernel_with(km, d, f, &KernelQuadrature::default())
}

pub fn nu_n_kernel_with(km: &KernelModel, d: &Droplet, f: &TestFunction, q: &KernelQuadrature) -> Result<f64> {
    let rule = rule_for(km, d, f.breakpoints(), q)?;
    let diag = checked_diagonal(km, &rule, q.trace_tolerance)?;
    let n = km.n() as f64;
    let terms: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(&diag)
        .map(|((&z, w), k)| w * f.value(z) * (k - n * d.density(z)))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `ν_n(f) = −(1/π) ∫ ∂̄f · D_n`, through the Cauchy transform of the
/// fluctuation measure. Radial-path kernels only.
pub fn nu_n_pairing(km: &KernelModel, d: &Droplet, f: &TestFunction) -> Result<f64> {
    if km.path() != BasisPath::Radial {
        return Err(Error::Parameter("the pairing form needs a radial-path kernel".into()));
    }
    let prof = DnProfile::new(km, d)?;
    let q = KernelQuadrature::default();
    let rule = rule_for(km, d, f.breakpoints(), &q)?;
    let v = integrate_complex(&rule, |z| f.jet(z).wirtinger_bar() * prof.eval(z).value)?;
    Ok(-v.re / PI)
}

/// `Cov(Tr_n[f], Tr_n[g]) = ∫ f g 𝐊_n(z, z) − Σ_{ij} A_ij conj(B_ij)` with
/// `A_ij = ∫ f ψ_i conj ψ_j`, `B_ij = ∫ g ψ_i conj ψ_j`.
pub fn kernel_covariance(km: &KernelModel, d: &Droplet, f: &TestFunction, g: &TestFunction) -> Result<f64> {
    let mut breaks = f.breakpoints().to_vec();
    breaks.extend_from_slice(g.breakpoints());
    let q = KernelQuadrature::default();
    let rule = rule_for(km, d, &breaks, &q)?;
    let n = km.n();
    let nodes = rule.nodes();
    let w = rule.weights();
    let rows = km.rows(nodes);
    let fv: Vec<f64> = nodes.iter().map(|&z| f.value(z)).collect();
    let gv: Vec<f64> = nodes.iter().map(|&z| g.value(z)).collect();
    let diag_terms: Vec<f64> = (0..nodes.len()).map(|a| w[a] * fv[a] * gv[a] * rows.diag(a)).collect();
    let gram = |vals: &[f64]| -> Vec<Complex64> {
        (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let mut acc = CompensatedComplex::new();
                for a in 0..nodes.len() {
                    if vals[a] != 0.0 {
                        let r = rows.row(a);
                        acc.add(w[a] * vals[a] * r[i] * r[j].conj());
                    }
                }
                acc.value()
            })
            .collect()
    };
    let a = gram(&fv);
    let b = if f.id() == g.id() { a.clone() } else { gram(&gv) };
    let cross: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x * y.conj()).re).collect();
    Ok(pairwise_sum(&diag_terms) - pairwise_sum(&cross))
}

/// Exact finite-`n` variance of `Tr_n[f]`.
pub fn kernel_variance(km: &KernelModel, d: &Droplet, f: &TestFunction) -> Result<f64> {
    kernel_covariance(km, d, f, f)
}
