//! Exact sampling of the projection determinantal process by sequential
//! conditioning: each new point is drawn from `‖P_V ψ(z)‖²/dim V` by
//! rejection from the unperturbed intensity, then its direction is removed
//! from `V`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Configuration, SamplerTag};
use crate::error::{Error, Result};
use crate::kernel::{BasisPath, KernelModel};
use crate::numerics::quadrature::gauss_legendre_unit;
use crate::numerics::find_root;

/// Proposals allowed per point before the sampler gives up.
pub const MAX_PROPOSALS_PER_POINT: usize = 2_000_000;

const PANEL_NODES: usize = 24;

/// Seeded generator on an independent stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse-CDF tables for the radial densities
/// `2π r^{2k+1} e^{−2nQ(r)}/N_k`, `k < n`, on `[0, R_eff]`.
#[derive(Clone, Debug)]
struct RadialTable {
    n: usize,
    edges: Vec<f64>,
    /// `cdf[k * (panels + 1) + i]` is the mass of `[0, edges[i]]`.
    cdf: Vec<f64>,
    log_norms: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
    potential: crate::potential::Potential,
}

impl RadialTable {
    fn new(km: &KernelModel, radius: f64) -> Result<Self> {
        let n = km.n();
        let r_eff = km.effective_radius();
        let panels = ((2.0 * r_eff * (n as f64).sqrt()).ceil() as usize).max(8);
        let mut edges: Vec<f64> = (0..=panels).map(|i| r_eff * i as f64 / panels as f64).collect();
        if radius < r_eff {
            edges.push(radius);
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup();
        }
        let mut t = RadialTable {
            n,
            edges,
            cdf: Vec::new(),
            log_norms: km.log_norms().to_vec(),
            gl: gauss_legendre_unit(PANEL_NODES),
            potential: km.potential().clone(),
        };
        let p = t.edges.len();
        let mut cdf = vec![0.0; n * p];
        for k in 0..n {
            for i in 1..p {
                cdf[k * p + i] = cdf[k * p + i - 1] + t.mass(k, t.edges[i - 1], t.edges[i]);
            }
        }
        t.cdf = cdf;
        Ok(t)
    }

    fn log_density(&self, k: usize, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let q = self.potential.radial_value(r).unwrap_or(f64::INFINITY);
        (2.0 * PI).ln() + (2 * k + 1) as f64 * r.ln() - 2.0 * self.n as f64 * q - self.log_norms[k]
    }

    fn mass(&self, k: usize, a: f64, b: f64) -> f64 {
        let (x, w) = &self.gl;
        let h = 0.5 * (b - a);
        x.iter().zip(w).map(|(t, wt)| wt * h * self.log_density(k, a + h * (t + 1.0)).exp()).sum()
    }

    /// Radius with CDF `u · total_k`.
    fn draw(&self, k: usize, u: f64) -> Result<f64> {
        let p = self.edges.len();
        let row = &self.cdf[k * p..(k + 1) * p];
        let target = u * row[p - 1];
        let i = row.partition_point(|c| *c <= target).clamp(1, p - 1) - 1;
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        let rest = target - row[i];
        let g = |r: f64| self.mass(k, a, r) - rest;
        match find_root(g, a, b) {
            Ok(r) => Ok(r),
            // Rounding can push the target past the panel mass by one ulp.
            Err(Error::Bracket { .. }) => Ok(if rest <= 0.0 { a } else { b }),
            Err(e) => Err(e),
        }
    }
}

/// Reusable exact sampler for one kernel.
pub struct DppSampler<'a> {
    km: &'a KernelModel,
    table: RadialTable,
    /// `1/λ_min(G)` for perturbed kernels, `1` on the radial path.
    gram_bound: f64,
}

impl<'a> DppSampler<'a> {
    pub fn new(km: &'a KernelModel) -> Result<Self> {
        if !km.potential().is_radial() {
            return Err(Error::UnsupportedPotential(
                "exact sampling needs a radial potential; use the MCMC sampler".into(),
            ));
        }
        let radius = crate::potential::solve_droplet(km.potential())?.radius();
        let gram_bound = match (km.path(), km.factor()) {
            (BasisPath::Gram, Some(f)) => 1.05 * inverse_factor_norm_sq(f),
            _ => 1.0,
        };
        Ok(DppSampler { km, table: RadialTable::new(km, radius)?, gram_bound })
    }

    pub fn sample(&self, seed: u64, stream: u64) -> Result<Configuration> {
        let km = self.km;
        let n = km.n();
        let mut rng = stream_rng(seed, stream);
        let mut removed: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        let mut base = vec![Complex64::new(0.0, 0.0); n];
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        let h = km.perturbation();
        let factor = if km.path() == BasisPath::Gram { km.factor() } else { None };
        for _ in 0..n {
            let mut tries = 0;
            loop {
                tries += 1;
                if tries > MAX_PROPOSALS_PER_POINT {
                    return Err(Error::Sampler(format!(
                        "no proposal accepted after {MAX_PROPOSALS_PER_POINT} tries (point {} of {n})",
                        points.len() + 1
                    )));
                }
                let k = rng.random_range(0..n);
                let r = self.table.draw(k, rng.random::<f64>())?;
                let z = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
                km.base_row(z, &mut base);
                let k0: f64 = base.iter().map(|c| c.norm_sqr()).sum();
                if !(k0 > 0.0 && k0.is_finite()) {
                    continue;
                }
                a.copy_from_slice(&base);
                let mut bound = k0;
                if let Some(f) = factor {
                    f.forward_solve(&mut a);
                    let hv = h.map_or(0.0, |h| h.value(z));
                    let s = hv.exp();
                    a.iter_mut().for_each(|c| *c *= s);
                    bound = k0 * (2.0 * hv).exp() * self.gram_bound;
                }
                project_out(&mut a, &removed);
                let norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
                let ratio = norm / bound;
                if ratio > 1.0 + 1e-9 {
                    return Err(Error::Sampler(format!("rejection envelope violated at {z} (ratio {ratio})")));
                }
                if rng.random::<f64>() < ratio {
                    project_out(&mut a, &removed);
                    let s = 1.0 / a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    removed.push(a.iter().map(|c| c * s).collect());
                    points.push(z);
                    break;
                }
            }
        }
        points.shuffle(&mut rng);
        Ok(Configuration {
            points,
            potential_id: km.potential().id(),
            perturbation_id: h.map(|h| h.id()),
            tag: SamplerTag::Dpp,
            seed,
            stream,
            sweep: None,
            acceptance_rate: None,
            warning: None,
        })
    }

    /// `count` independent samples on streams `0..count`, drawn in parallel.
    pub fn sample_many(&self, seed: u64, count: usize) -> Result<Vec<Configuration>> {
        (0..count as u64).into_par_iter().map(|s| self.sample(seed, s)).collect()
    }
}

/// `a ← a − Σ ⟨a, u⟩ u` for orthonormal `u`.
fn project_out(a: &mut [Complex64], removed: &[Vec<Complex64>]) {
    for u in removed {
        let c: Complex64 = a.iter().zip(u).map(|(x, y)| x * y.conj()).sum();
        a.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
}

/// `‖L^{−1}‖₂²` by power iteration on `L^{−*} L^{−1}`.
fn inverse_factor_norm_sq(f: &crate::numerics::LowerFactor) -> f64 {
    let n = f.dim();
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        f.forward_solve(&mut e);
        for i in 0..n {
            inv[i * n + j] = e[i];
        }
    }
    let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.0)).collect();
    let mut est = 0.0;
    for _ in 0..500 {
        let y: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| inv[i * n + j] * x[j]).sum()).collect();
        let x_new: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| inv[i * n + j].conj() * y[i]).sum()).collect();
        let xn = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nn = x_new.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let next = nn / xn;
        x = x_new.iter().map(|c| c / nn).collect();
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

/// One exact sample of the determinantal process of `km`.
pub fn sample_dpp(km: &KernelModel, seed: u64) -> Result<Configuration> {
    DppSampler::new(km)?.sample(seed, 0)
}
