use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fieldops::TestFunction;
use crate::numerics::{
    hermitian_factor, log_sum_exp, CMatrix, CompensatedComplex, Domain, LowerFactor, QuadratureRule, RadialRule,
};
use crate::potential::{solve_droplet, Potential};

/// Default polar resolution for kernel work.
pub const DEFAULT_RADIAL_NODES: usize = 400;
pub const DEFAULT_ANGULAR_NODES: usize = 256;

const GRAM_CHUNK: usize = 2048;

/// How the orthonormal basis is represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisPath {
    /// Radial `Q`, no perturbation: monomials are already orthogonal.
    Radial,
    /// Monomials orthonormalized through a Cholesky factor of their Gram matrix.
    Gram,
}

/// Summary of the quadrature rule a kernel was built against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub domain: Domain,
    pub nodes: usize,
    pub measure: f64,
}

impl QuadratureInfo {
    fn of(rule: &QuadratureRule) -> Self {
        QuadratureInfo { domain: rule.domain().clone(), nodes: rule.len(), measure: rule.measure() }
    }
}

/// The weighted reproducing kernel `𝐊_n(z, w) = Σ_k ψ_k(z) conj(ψ_k(w))` of
/// the space of weighted polynomials `p e^{−n Q̃}`, `deg p < n`, where
/// `Q̃ = Q − h/n`.
///
/// Base functions are `b_k(z) = z^k e^{−nQ(z)} / √N_k` with `N_k` the
/// monomial norms (exact radial norms for radial `Q`, quadrature norms for
/// Hermitian `Q`). On the Gram path `ψ = e^{h} L^{−1} b` with `L L* = G`,
/// `G_jk = ∫ b_j conj(b_k) e^{2h}`.
#[derive(Clone, Debug)]
pub struct KernelModel {
    n: usize,
    potential: Potential,
    perturbation: Option<TestFunction>,
    path: BasisPath,
    log_norms: Vec<f64>,
    up: Vec<f64>,
    down: Vec<f64>,
    gram_diag: Vec<f64>,
    factor: Option<LowerFactor>,
    quadrature: QuadratureInfo,
    effective_radius: f64,
}

/// Estimate of `sup |h|` used to widen the effective support.
pub fn perturbation_sup(h: Option<&TestFunction>) -> f64 {
    match h {
        Some(h) => h.sup_norm(20.0),
        None => 0.0,
    }
}

/// The polar rule used by default for kernel construction and integration:
/// a disk covering the effective support, with radial panel breaks at the
/// droplet boundary and at the joints of `h`.
pub fn default_kernel_rule(p: &Potential, n: usize, h: Option<&TestFunction>) -> Result<QuadratureRule> {
    kernel_rule(p, n, h, &[], DEFAULT_RADIAL_NODES, DEFAULT_ANGULAR_NODES)
}

/// Like [`default_kernel_rule`] with explicit resolution and extra breaks.
pub fn kernel_rule(
    p: &Potential,
    n: usize,
    h: Option<&TestFunction>,
    extra_breaks: &[f64],
    n_radial: usize,
    n_angular: usize,
) -> Result<QuadratureRule> {
    let r_eff = p.effective_radius(n, perturbation_sup(h))?;
    let mut breaks: Vec<f64> = extra_breaks.to_vec();
    if p.is_radial() {
        breaks.push(solve_droplet(p)?.radius());
    }
    if let Some(h) = h {
        breaks.extend_from_slice(h.breakpoints());
    }
    QuadratureRule::disk(r_eff, &breaks, n_radial, n_angular)
}

/// Builds `𝐊_n` for `Q̃ = Q − h/n`.
///
/// Radial potentials without perturbation take the diagonal fast path; every
/// other case goes through the Gram matrix assembled on `rule`.
pub fn build_kernel(p: &Potential, n: usize, h: Option<&TestFunction>, rule: &QuadratureRule) -> Result<KernelModel> {
    let path = if p.is_radial() && h.map_or(true, |h| h.is_zero()) { BasisPath::Radial } else { BasisPath::Gram };
    build_kernel_with_path(p, n, h, rule, path)
}

/// Builds `𝐊_n` along an explicit path; `Gram` is valid for every potential.
pub fn build_kernel_with_path(
    p: &Potential,
    n: usize,
    h: Option<&TestFunction>,
    rule: &QuadratureRule,
    path: BasisPath,
) -> Result<KernelModel> {
    if n == 0 {
        return Err(Error::Parameter("kernel dimension n must be ≥ 1".into()));
    }
    let h = h.filter(|h| !h.is_zero()).cloned();
    if path == BasisPath::Radial && (!p.is_radial() || h.is_some()) {
        return Err(Error::Parameter("the radial path needs a radial potential without perturbation".into()));
    }
    let h_sup = perturbation_sup(h.as_ref());
    let effective_radius = p.effective_radius(n, h_sup)?;
    let log_norms = if p.is_radial() {
        radial_log_norms(p, n, effective_radius)?
    } else {
        quadrature_log_norms(p, n, rule)?
    };
    let mut km = KernelModel {
        n,
        potential: p.clone(),
        perturbation: h,
        path,
        up: Vec::new(),
        down: Vec::new(),
        log_norms,
        gram_diag: vec![1.0; n],
        factor: None,
        quadrature: QuadratureInfo::of(rule),
        effective_radius,
    };
    km.set_ratios();
    if path == BasisPath::Gram {
        let g = km.gram_matrix(rule)?;
        km.gram_diag = (0..n).map(|k| g[(k, k)].re).collect();
        km.factor = Some(hermitian_factor(&g).map_err(|e| match e {
            Error::Conditioning { pivot, value, .. } => Error::Conditioning {
                pivot,
                value,
                hint: format!(
                    "Gram matrix of {n} monomials is numerically singular; increase quadrature resolution or reduce n"
                ),
            },
            other => other,
        })?);
    }
    Ok(km)
}

/// `log h_k`, `h_k = 2π ∫_0^∞ r^{2k+1} e^{−2nQ(r)} dr`, by panelled
/// Gauss–Legendre on `[0, r_eff]` with panels narrower than `1/(2√n)`.
fn radial_log_norms(p: &Potential, n: usize, r_eff: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let panels = ((r_eff * nf.sqrt() * 2.0).ceil() as usize).max(4);
    let breaks: Vec<f64> = (1..panels).map(|i| r_eff * i as f64 / panels as f64).collect();
    let rule = RadialRule::with_breakpoints(0.0, r_eff, &breaks, 24 * panels)?;
    let base: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| (r.ln(), w.ln() - 2.0 * nf * p.radial_value(r).unwrap()))
        .collect();
    let norms = (0..n)
        .map(|k| {
            let e = 2.0 * k as f64 + 1.0;
            let terms: Vec<f64> = base.iter().map(|(lr, lw)| lw + e * lr).collect();
            (2.0 * PI).ln() + log_sum_exp(&terms)
        })
        .collect();
    Ok(norms)
}

/// `log N_k`, `N_k = ∫ |z|^{2k} e^{−2nQ}` on the rule.
fn quadrature_log_norms(p: &Potential, n: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let nf = n as f64;
    let base: Vec<(f64, f64)> = rule
        .nodes()
        .par_iter()
        .zip(rule.weights())
        .map(|(&z, &w)| (z.norm().ln(), w.ln() - 2.0 * nf * p.value(z)))
        .collect();
    let norms: Vec<f64> = (0..n)
        .map(|k| {
            let e = 2.0 * k as f64;
            let terms: Vec<f64> =
                base.iter().map(|(lr, lw)| if k == 0 { *lw } else { lw + e * lr }).collect();
            log_sum_exp(&terms)
        })
        .collect();
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::Resolution("monomial norms vanish on the quadrature rule".into()));
    }
    Ok(norms)
}

impl KernelModel {
    fn set_ratios(&mut self) {
        let n = self.n;
        self.up = vec![0.0; n];
        self.down = vec![0.0; n];
        for k in 1..n {
            let d = 0.5 * (self.log_norms[k - 1] - self.log_norms[k]);
            self.up[k] = d.exp();
            self.down[k] = (-d).exp();
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn perturbation(&self) -> Option<&TestFunction> {
        self.perturbation.as_ref()
    }

    pub fn path(&self) -> BasisPath {
        self.path
    }

    pub fn quadrature(&self) -> &QuadratureInfo {
        &self.quadrature
    }

    /// Radius beyond which every basis function is below `e^{−37.5}` of its peak.
    pub fn effective_radius(&self) -> f64 {
        self.effective_radius
    }

    /// Monomial norms `N_k = ‖z^k‖²` under `e^{−2nQ}`.
    pub fn norms(&self) -> Vec<f64> {
        self.log_norms.iter().map(|l| l.exp()).collect()
    }

    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    /// `‖z^k‖²` under the perturbed weight `e^{−2nQ̃}`; equals [`Self::norms`]
    /// when there is no perturbation.
    pub fn perturbed_norms(&self) -> Vec<f64> {
        self.log_norms.iter().zip(&self.gram_diag).map(|(l, g)| l.exp() * g).collect()
    }

    pub fn factor(&self) -> Option<&LowerFactor> {
        self.factor.as_ref()
    }

    /// Base functions `b_k(z)`, evaluated by a two-sided recurrence from the
    /// largest term so that nothing overflows.
    /// Unperturbed base functions `z^k e^{−nQ(z)}/√N_k`; orthonormal when
    /// the kernel is on the radial path.
    pub fn base_row(&self, z: Complex64, out: &mut [Complex64]) {
        let n = self.n;
        let nq = n as f64 * self.potential.value(z);
        let r = z.norm();
        if r == 0.0 {
            out.fill(Complex64::new(0.0, 0.0));
            out[0] = Complex64::new((-nq - 0.5 * self.log_norms[0]).exp(), 0.0);
            return;
        }
        let lr = r.ln();
        let (mut kstar, mut best) = (0, f64::NEG_INFINITY);
        for k in 0..n {
            let v = k as f64 * lr - 0.5 * self.log_norms[k];
            if v > best {
                best = v;
                kstar = k;
            }
        }
        let start = Complex64::from_polar((best - nq).exp(), kstar as f64 * z.arg());
        out[kstar] = start;
        let mut v = start;
        for k in kstar + 1..n {
            v = v * z * self.up[k];
            out[k] = v;
        }
        let zinv = 1.0 / z;
        v = start;
        for k in (0..kstar).rev() {
            v = v * zinv * self.down[k + 1];
            out[k] = v;
        }
    }

    /// Orthonormal basis values `ψ_k(z)`; `out.len()` must be `n`.
    pub fn row(&self, z: Complex64, out: &mut [Complex64]) {
        assert_eq!(out.len(), self.n, "row buffer has the wrong length");
        self.base_row(z, out);
        if let Some(f) = &self.factor {
            f.forward_solve(out);
            if let Some(h) = &self.perturbation {
                let s = h.value(z).exp();
                out.iter_mut().for_each(|c| *c *= s);
            }
        }
    }

    pub fn row_vec(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.row(z, &mut out);
        out
    }

    /// Basis rows at many points, evaluated in parallel.
    pub fn rows(&self, points: &[Complex64]) -> RowTable {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * points.len()];
        data.par_chunks_mut(n).zip(points.par_iter()).for_each(|(out, &z)| self.row(z, out));
        RowTable { n, data }
    }

    /// `𝐊_n(z, w)`.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let a = self.row_vec(z);
        let b = self.row_vec(w);
        let mut acc = CompensatedComplex::new();
        for (x, y) in a.iter().zip(&b) {
            acc.add(x * y.conj());
        }
        acc.value()
    }

    /// `𝐊_n(z, z) ≥ 0`.
    pub fn diag(&self, z: Complex64) -> f64 {
        let a = self.row_vec(z);
        crate::numerics::pairwise_sum(&a.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>())
    }

    fn e2h(&self, z: Complex64) -> f64 {
        self.perturbation.as_ref().map_or(1.0, |h| (2.0 * h.value(z)).exp())
    }

    fn gram_matrix(&self, rule: &QuadratureRule) -> Result<CMatrix> {
        let g = match rule.polar_grid() {
            Some(grid)
                if self.potential.is_radial()
                    && grid.center == Complex64::new(0.0, 0.0)
                    && grid.n_angular.is_power_of_two() =>
            {
                self.gram_polar(rule)?
            }
            _ => self.gram_generic(rule)?,
        };
        for i in 0..self.n {
            if !g[(i, i)].re.is_finite() {
                return Err(Error::Resolution(format!("Gram entry ({i}, {i}) is not finite")));
            }
        }
        Ok(g)
    }

    /// `G_jk = Σ_i 2π w_i r_i β_j(r_i) β_k(r_i) F_i[j − k]` where `F_i` are the
    /// angular Fourier coefficients of `e^{2h}` on the `i`-th ring.
    fn gram_polar(&self, rule: &QuadratureRule) -> Result<CMatrix> {
        let grid = rule.polar_grid().unwrap();
        let na = grid.n_angular;
        let n = self.n;
        let nf = n as f64;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(na);
        let rings: Vec<CMatrix> = grid
            .radial
            .nodes
            .par_iter()
            .zip(&grid.radial.weights)
            .enumerate()
            .map(|(i, (&r, &wr))| {
                let mut s: Vec<Complex64> = (0..na)
                    .map(|j| Complex64::new(self.e2h(rule.nodes()[i * na + j]), 0.0))
                    .collect();
                fft.process(&mut s);
                // F[m] = (1/N) Σ_l s_l e^{imθ_l} = conj(X[m]) / N for real samples.
                let coef = |m: i64| -> Complex64 { s[m.rem_euclid(na as i64) as usize].conj() / na as f64 };
                let lr = r.ln();
                let nq = nf * self.potential.radial_value(r).unwrap();
                let beta: Vec<f64> =
                    (0..n).map(|k| (k as f64 * lr - nq - 0.5 * self.log_norms[k]).exp()).collect();
                let c = 2.0 * PI * wr * r;
                let mut g = CMatrix::zeros(n);
                for j in 0..n {
                    for k in 0..=j {
                        g[(j, k)] = coef(j as i64 - k as i64) * (c * beta[j] * beta[k]);
                    }
                }
                g
            })
            .collect();
        Ok(sum_lower(n, rings))
    }

    fn gram_generic(&self, rule: &QuadratureRule) -> Result<CMatrix> {
        let n = self.n;
        let chunks: Vec<(usize, usize)> =
            (0..rule.len()).step_by(GRAM_CHUNK).map(|s| (s, (s + GRAM_CHUNK).min(rule.len()))).collect();
        let parts: Vec<CMatrix> = chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut g = CMatrix::zeros(n);
                let mut row = vec![Complex64::new(0.0, 0.0); n];
                for i in a..b {
                    let z = rule.nodes()[i];
                    let w = rule.weights()[i] * self.e2h(z);
                    self.base_row(z, &mut row);
                    for j in 0..n {
                        let rj = row[j] * w;
                        for k in 0..=j {
                            g[(j, k)] += rj * row[k].conj();
                        }
                    }
                }
                g
            })
            .collect();
        Ok(sum_lower(n, parts))
    }

    /// Serializable description sufficient to rebuild the model without
    /// quadrature.
    pub fn to_artifact(&self) -> KernelArtifact {
        KernelArtifact {
            n: self.n,
            potential: self.potential.to_json(),
            perturbation: self.perturbation.as_ref().map(|h| h.to_json()),
            path: self.path,
            log_norms: self.log_norms.clone(),
            gram_diag: self.gram_diag.clone(),
            factor: self.factor.clone(),
            quadrature: self.quadrature.clone(),
            effective_radius: self.effective_radius,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.to_artifact()).expect("kernel artifact serializes")
    }

    pub fn from_artifact(a: KernelArtifact) -> Result<Self> {
        let potential = Potential::from_json(&a.potential)?;
        let perturbation = a.perturbation.as_ref().map(TestFunction::from_json).transpose()?;
        let n = a.n;
        let ok = n >= 1
            && a.log_norms.len() == n
            && a.gram_diag.len() == n
            && match (&a.factor, a.path) {
                (Some(f), BasisPath::Gram) => f.dim() == n && f.is_valid(),
                (None, BasisPath::Radial) => perturbation.is_none(),
                _ => false,
            };
        if !ok {
            return Err(Error::Schema("kernel artifact is inconsistent with its declared n and path".into()));
        }
        let mut km = KernelModel {
            n,
            potential,
            perturbation,
            path: a.path,
            log_norms: a.log_norms,
            up: Vec::new(),
            down: Vec::new(),
            gram_diag: a.gram_diag,
            factor: a.factor,
            quadrature: a.quadrature,
            effective_radius: a.effective_radius,
        };
        km.set_ratios();
        Ok(km)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let a: KernelArtifact = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_artifact(a)
    }
}

/// Sums lower-triangular blocks in order and mirrors the result.
fn sum_lower(n: usize, parts: Vec<CMatrix>) -> CMatrix {
    let mut acc = vec![CompensatedComplex::new(); n * n];
    for p in &parts {
        for j in 0..n {
            for k in 0..=j {
                acc[j * n + k].add(p[(j, k)]);
            }
        }
    }
    let mut g = CMatrix::zeros(n);
    for j in 0..n {
        for k in 0..=j {
            let v = acc[j * n + k].value();
            if j == k {
                g[(j, j)] = Complex64::new(v.re, 0.0);
            } else {
                g[(j, k)] = v;
                g[(k, j)] = v.conj();
            }
        }
    }
    g
}

/// JSON form of a [`KernelModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelArtifact {
    pub n: usize,
    pub potential: Value,
    pub perturbation: Option<Value>,
    pub path: BasisPath,
    pub log_norms: Vec<f64>,
    pub gram_diag: Vec<f64>,
    pub factor: Option<LowerFactor>,
    pub quadrature: QuadratureInfo,
    pub effective_radius: f64,
}

/// Basis rows `ψ(z_a)` for a list of points, stored contiguously.
#[derive(Clone, Debug)]
pub struct RowTable {
    n: usize,
    data: Vec<Complex64>,
}

impl RowTable {
    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, a: usize) -> &[Complex64] {
        &self.data[a * self.n..(a + 1) * self.n]
    }

    /// `𝐊_n(z_a, z_b)`.
    #[inline]
    pub fn kernel(&self, a: usize, b: usize) -> Complex64 {
        let (x, y) = (self.row(a), self.row(b));
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..self.n {
            s += x[k] * y[k].conj();
        }
        s
    }

    #[inline]
    pub fn diag(&self, a: usize) -> f64 {
        self.row(a).iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `𝐊_n(z, w)`.
pub fn eval_weighted_kernel(km: &KernelModel, z: Complex64, w: Complex64) -> Complex64 {
    km.eval(z, w)
}

/// One-point function `u_n(z) = 𝐊_n(z, z)/n`.
pub fn one_point(km: &KernelModel, z: Complex64) -> f64 {
    km.diag(z) / km.n() as f64
}

/// Two-point intensity `R²(z, w) = 𝐊(z,z)𝐊(w,w) − |𝐊(z,w)|²`, floored at 0.
pub fn correlation2(km: &KernelModel, z: Complex64, w: Complex64) -> f64 {
    let a = km.row_vec(z);
    let b = km.row_vec(w);
    let kzz: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    let kww: f64 = b.iter().map(|c| c.norm_sqr()).sum();
    let mut kzw = CompensatedComplex::new();
    for (x, y) in a.iter().zip(&b) {
        kzw.add(x * y.conj());
    }
    (kzz * kww - kzw.value().norm_sqr()).max(0.0)
}
