//! Kernel-exact Ward identity and the Cauchy-transform rewriting of its
//! two-point term.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fieldops::{chord, dn_field_general, DnProfile, VectorField};
use crate::kernel::{kernel_rule, BasisPath, KernelModel, RowTable};
use crate::numerics::{CompensatedComplex, QuadratureRule, RadialRule, ScalarField};
use crate::potential::{obstacle, Droplet};

/// The three expected Ward terms and their residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WardReport {
    pub n: usize,
    pub v_id: String,
    /// `𝐄 I_n = ½ ∬ (v(z) − v(w))/(z − w) R²(z, w)`.
    pub e1: Complex64,
    /// `𝐄 II_n = 2n ∫ v ∂Q R¹`.
    pub e2: Complex64,
    /// `𝐄 III_n = ∫ ∂v R¹`.
    pub e3: Complex64,
    /// `2 ∫ v ∂h R¹`; zero for unperturbed kernels.
    pub perturbation_term: Complex64,
    pub residual: Complex64,
    /// `|residual|` over the largest term magnitude.
    pub relative_residual: f64,
    pub nodes: usize,
}

impl WardReport {
    pub fn recompute_residual(&self) -> Complex64 {
        self.e1 - self.e2 + self.e3 + self.perturbation_term
    }
}

/// Tensor rule over the effective support with breaks at `∂S` and the
/// joints of `v` and `h`.
pub fn ward_rule(km: &KernelModel, v: &VectorField, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    kernel_rule(km.potential(), km.n(), km.perturbation(), &v.breakpoints(), n_radial, n_angular)
}

struct NodeData {
    v: Vec<Complex64>,
    dv: Vec<Complex64>,
    diag: Vec<f64>,
    rows: RowTable,
}

fn node_data(km: &KernelModel, v: &VectorField, rule: &QuadratureRule) -> NodeData {
    let nodes = rule.nodes();
    let rows = km.rows(nodes);
    NodeData {
        v: nodes.iter().map(|&z| v.value(z)).collect(),
        dv: nodes.iter().map(|&z| v.wirtinger_pair(z).0).collect(),
        diag: (0..nodes.len()).map(|a| rows.diag(a)).collect(),
        rows,
    }
}

/// `∬ (v(z) − v(w))/(z − w) R²(z, w)` over pairs of distinct nodes.
fn two_point_term(rule: &QuadratureRule, nd: &NodeData) -> Complex64 {
    let x = rule.nodes();
    let w = rule.weights();
    let m = x.len();
    let partial: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut acc = CompensatedComplex::new();
            for b in a + 1..m {
                if nd.v[a] == nd.v[b] {
                    continue;
                }
                let dz = x[a] - x[b];
                if dz == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let r2 = nd.diag[a] * nd.diag[b] - nd.rows.kernel(a, b).norm_sqr();
                acc.add(w[a] * w[b] * r2 * (nd.v[a] - nd.v[b]) / dz);
            }
            acc.value()
        })
        .collect();
    let mut acc = CompensatedComplex::new();
    partial.into_iter().for_each(|p| acc.add(p));
    // Pairs were visited once; the ordered double integral counts each twice.
    2.0 * acc.value()
}

fn weighted(rule: &QuadratureRule, f: impl Fn(usize, Complex64) -> Complex64) -> Complex64 {
    let mut acc = CompensatedComplex::new();
    for (a, (&z, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        acc.add(w * f(a, z));
    }
    acc.value()
}

/// Evaluates each expected Ward term by quadrature against the kernel.
pub fn ward_check_kernel(km: &KernelModel, v: &VectorField, rule: &QuadratureRule) -> Result<WardReport> {
    let n = km.n();
    let p = km.potential();
    let nd = node_data(km, v, rule);
    let e1 = 0.5 * two_point_term(rule, &nd);
    let e2 = 2.0 * n as f64 * weighted(rule, |a, z| nd.v[a] * p.wirtinger(z) * nd.diag[a]);
    let e3 = weighted(rule, |a, _| nd.dv[a] * nd.diag[a]);
    let perturbation_term = match km.perturbation() {
        Some(h) => 2.0 * weighted(rule, |a, z| nd.v[a] * h.jet(z).wirtinger() * nd.diag[a]),
        None => Complex64::new(0.0, 0.0),
    };
    let residual = e1 - e2 + e3 + perturbation_term;
    let scale = [e1, e2, e3, perturbation_term].iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(WardReport {
        n,
        v_id: v.id(),
        e1,
        e2,
        e3,
        perturbation_term,
        residual,
        relative_residual: if scale > 0.0 { residual.norm() / scale } else { 0.0 },
        nodes: rule.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionOptions {
    /// Tensor rule for the `R²` form of `𝐄 B_n`.
    pub ward_radial: usize,
    pub ward_angular: usize,
    /// Outer rule for the one-point integrals and the `|𝐊|²` double integral.
    pub outer_radial: usize,
    pub outer_angular: usize,
    /// Inner rule, centred at the outer node.
    pub inner_radial: usize,
    pub inner_angular: usize,
    /// Rule for `D_n` when the kernel is not on the radial path.
    pub dn_radial: usize,
    pub dn_angular: usize,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            ward_radial: 48,
            ward_angular: 48,
            outer_radial: 64,
            outer_angular: 64,
            inner_radial: 48,
            inner_angular: 48,
            dn_radial: 96,
            dn_angular: 96,
        }
    }
}

/// Both sides of the rewriting
/// `𝐄B_n[v] = 2∫ v ∂Q̌ 𝐊_n + ∫ v D_n u_n − (1/2n) ∬ (v(z) − v(w))/(z − w) |𝐊_n(z, w)|²`
/// and the two error terms built from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub v_id: String,
    /// `𝐄B_n = 𝐄 I_n / n`, from the `R²` double integral.
    pub lhs: Complex64,
    /// `2∫ v ∂Q 𝐊_n − σ_n(∂v + 2v∂h)`, the Ward-identity form of `𝐄B_n`.
    pub lhs_ward_form: Complex64,
    pub obstacle_term: Complex64,
    pub cauchy_term: Complex64,
    pub kernel_term: Complex64,
    pub rhs: Complex64,
    pub difference: Complex64,
    pub relative_difference: f64,
    /// `(1/n) ∬ (v(z) − v(w))/(z − w) |𝐊_n|² − σ_n(∂v)`.
    pub eps1: Complex64,
    /// `π ∫ v D_n (u_n − u)`.
    pub eps2: Complex64,
    /// `−(1/2n) ∫ ∂̄v D_n²`, the same quantity after integrating by parts.
    pub eps2_dbar: Complex64,
    /// Largest `|∫_inner |𝐊(z, w)|² dA(z) / 𝐊(w, w) − 1|` over outer nodes;
    /// a resolution diagnostic for the inner rule.
    pub berezin_defect: f64,
}

enum DnEval<'a> {
    Radial(DnProfile),
    General { km: &'a KernelModel, d: &'a Droplet, nr: usize, na: usize },
}

impl DnEval<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DnEval::Radial(p) => Ok(p.eval(z).value),
            DnEval::General { km, d, nr, na } => Ok(dn_field_general(km, d, z, *nr, *na)?.value),
        }
    }
}

/// Polar rule centred at `w` covering the disk `|z| < r_eff`, with radial
/// panel breaks at multiples of `1/√n` where `|𝐊(z, w)|²` varies.
fn centred_rule(w: Complex64, r_eff: f64, n: usize, n_radial: usize, n_angular: usize) -> Result<Vec<(Complex64, f64)>> {
    let s = 1.0 / (n as f64).sqrt();
    let breaks = [s, 2.0 * s, 4.0 * s, 8.0 * s];
    let dalpha = 2.0 * PI / n_angular as f64;
    let mut out = Vec::with_capacity(n_radial * n_angular);
    for j in 0..n_angular {
        let alpha = (j as f64 + 0.5) * dalpha;
        let len = chord(w, r_eff, alpha);
        if len <= 0.0 {
            continue;
        }
        let dir = Complex64::from_polar(1.0, alpha);
        let radial = RadialRule::with_breakpoints(0.0, len, &breaks, n_radial)?;
        for (rho, wt) in radial.nodes.iter().zip(&radial.weights) {
            out.push((w + dir * rho, wt * rho * dalpha));
        }
    }
    Ok(out)
}

pub fn ward_decomposition_check(km: &KernelModel, v: &VectorField, d: &Droplet) -> Result<DecompositionReport> {
    ward_decomposition_check_with(km, v, d, &DecompositionOptions::default())
}

pub fn ward_decomposition_check_with(
    km: &KernelModel,
    v: &VectorField,
    d: &Droplet,
    opts: &DecompositionOptions,
) -> Result<DecompositionReport> {
    let n = km.n();
    let nf = n as f64;
    let p = km.potential();
    let ob = obstacle(p, d);
    let r_eff = km.effective_radius();

    let ward = ward_check_kernel(km, v, &ward_rule(km, v, opts.ward_radial, opts.ward_angular)?)?;
    let lhs = ward.e1 / nf;

    let outer = ward_rule(km, v, opts.outer_radial, opts.outer_angular)?;
    let nodes = outer.nodes();
    let weights = outer.weights();
    let nd = node_data(km, v, &outer);
    let dbar_v: Vec<Complex64> = nodes.iter().map(|&z| v.wirtinger_pair(z).1).collect();
    let dh: Vec<Complex64> = match km.perturbation() {
        Some(h) => nodes.iter().map(|&z| h.jet(z).wirtinger()).collect(),
        None => vec![Complex64::new(0.0, 0.0); nodes.len()],
    };

    let dn = if km.path() == BasisPath::Radial {
        DnEval::Radial(DnProfile::new(km, d)?)
    } else {
        DnEval::General { km, d, nr: opts.dn_radial, na: opts.dn_angular }
    };
    let dvals: Vec<Complex64> = nodes.par_iter().map(|&z| dn.eval(z)).collect::<Result<_>>()?;

    let lhs_ward_form = weighted(&outer, |a, z| {
        (2.0 * nd.v[a] * p.wirtinger(z) - (nd.dv[a] + 2.0 * nd.v[a] * dh[a]) / nf) * nd.diag[a]
    });
    let obstacle_term = weighted(&outer, |a, z| 2.0 * nd.v[a] * ob.wirtinger(z) * nd.diag[a]);
    let cauchy_term = weighted(&outer, |a, _| nd.v[a] * dvals[a] * nd.diag[a] / nf);

    // ∬ (v(z) − v(w))/(z − w) |𝐊(z, w)|², inner rule centred at each w.
    let max_diag = nd.diag.iter().cloned().fold(0.0, f64::max);
    let per_node: Vec<(Complex64, f64)> = (0..nodes.len())
        .into_par_iter()
        .map(|a| -> Result<(Complex64, f64)> {
            let w = nodes[a];
            let kw = nd.diag[a];
            if kw <= 1e-300 {
                return Ok((Complex64::new(0.0, 0.0), 0.0));
            }
            let row_w = nd.rows.row(a);
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let mut acc = CompensatedComplex::new();
            let mut mass = 0.0;
            for (z, wt) in centred_rule(w, r_eff, n, opts.inner_radial, opts.inner_angular)? {
                km.row(z, &mut row);
                let k: Complex64 = row.iter().zip(row_w).map(|(x, y)| x * y.conj()).sum();
                let k2 = k.norm_sqr();
                mass += wt * k2;
                if k2 != 0.0 {
                    acc.add(wt * k2 * (v.value(z) - nd.v[a]) / (z - w));
                }
            }
            let defect = if kw >= 1e-6 * max_diag { (mass / kw - 1.0).abs() } else { 0.0 };
            Ok((weights[a] * acc.value(), defect))
        })
        .collect::<Result<_>>()?;
    let mut jacc = CompensatedComplex::new();
    let mut berezin_defect: f64 = 0.0;
    for (j, def) in per_node {
        jacc.add(j);
        berezin_defect = berezin_defect.max(def);
    }
    let j = jacc.value();
    let kernel_term = -j / (2.0 * nf);
    let rhs = obstacle_term + cauchy_term + kernel_term;
    let difference = lhs - rhs;
    let scale = [lhs, obstacle_term, cauchy_term, kernel_term].iter().map(|c| c.norm()).fold(0.0, f64::max);

    let sigma_dv = weighted(&outer, |a, _| nd.dv[a] * nd.diag[a] / nf);
    let eps1 = j / nf - sigma_dv;
    let eps2 = PI * weighted(&outer, |a, z| nd.v[a] * dvals[a] * (nd.diag[a] / nf - d.density(z)));
    let eps2_dbar = -weighted(&outer, |a, _| dbar_v[a] * dvals[a] * dvals[a]) / (2.0 * nf);

    Ok(DecompositionReport {
        n,
        v_id: v.id(),
        lhs,
        lhs_ward_form,
        obstacle_term,
        cauchy_term,
        kernel_term,
        rhs,
        difference,
        relative_difference: if scale > 0.0 { difference.norm() / scale } else { 0.0 },
        eps1,
        eps2,
        eps2_dbar,
        berezin_defect,
    })
}
