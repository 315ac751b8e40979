//! Metropolis random walk on the Coulomb-gas Hamiltonian.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dpp::stream_rng;
use super::{Configuration, SamplerTag};
use crate::error::{Error, Result};
use crate::fieldops::TestFunction;
use crate::numerics::pairwise_sum;
use crate::potential::{solve_droplet, Potential};

/// `H_n = Σ_{j≠k} log 1/|λ_j − λ_k| + 2n Σ_j Q̃_n(λ_j)` with `Q̃_n = Q − h/n`
/// and `n = points.len()`. Coincident points give `+∞`.
pub fn hamiltonian(p: &Potential, h: Option<&TestFunction>, points: &[Complex64]) -> f64 {
    let n = points.len() as f64;
    let mut terms = Vec::with_capacity(points.len() * (points.len() + 1) / 2);
    for (j, a) in points.iter().enumerate() {
        for b in &points[j + 1..] {
            let d = (a - b).norm();
            if d == 0.0 {
                return f64::INFINITY;
            }
            terms.push(-2.0 * d.ln());
        }
    }
    terms.extend(points.iter().map(|&z| 2.0 * n * p.value(z) - 2.0 * h.map_or(0.0, |h| h.value(z))));
    // The multiset of terms does not depend on the point order; summing it
    // sorted makes the result bit-for-bit permutation invariant.
    terms.sort_by(f64::total_cmp);
    pairwise_sum(&terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Gaussian proposal scale; `None` means `1/√n`.
    #[serde(default)]
    pub proposal: Option<f64>,
    pub sweeps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thinning: u64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> u64 {
    1
}

impl ChainConfig {
    pub fn new(sweeps: u64, burn_in: u64, thinning: u64, seed: u64) -> Self {
        ChainConfig { proposal: None, sweeps, burn_in, thinning, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::Parameter(format!("sweeps ({}) must exceed burn-in ({})", self.sweeps, self.burn_in)));
        }
        if self.thinning == 0 {
            return Err(Error::Parameter("thinning must be at least 1".into()));
        }
        if let Some(s) = self.proposal {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Parameter(format!("proposal scale {s} must be positive")));
            }
        }
        Ok(())
    }

    pub fn proposal_scale(&self, n: usize) -> f64 {
        self.proposal.unwrap_or(1.0 / (n as f64).sqrt())
    }
}

/// Acceptance band outside which configurations carry a tuning warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.7);

/// Single-site Metropolis chain. Yields one configuration every `thinning`
/// sweeps after burn-in; a sweep is `n` proposals.
pub struct McmcChain {
    potential: Potential,
    h: Option<TestFunction>,
    scale: f64,
    cc: ChainConfig,
    stream: u64,
    rng: ChaCha8Rng,
    points: Vec<Complex64>,
    field: Vec<f64>,
    sweep: u64,
    proposed: u64,
    accepted: u64,
}

impl McmcChain {
    pub fn new(p: &Potential, h: Option<&TestFunction>, n: usize, cc: &ChainConfig, stream: u64) -> Result<Self> {
        cc.validate()?;
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        let d = solve_droplet(p)?;
        let mut rng = stream_rng(cc.seed, stream);
        // Start from independent uniform points on the droplet.
        let points: Vec<Complex64> = (0..n)
            .map(|_| {
                let r = d.radius() * rng.random::<f64>().sqrt();
                d.center() + Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
            })
            .collect();
        let mut chain = McmcChain {
            potential: p.clone(),
            h: h.cloned(),
            scale: cc.proposal_scale(n),
            cc: cc.clone(),
            stream,
            rng,
            field: Vec::new(),
            points,
            sweep: 0,
            proposed: 0,
            accepted: 0,
        };
        chain.field = chain.points.iter().map(|&z| chain.one_body(z)).collect();
        Ok(chain)
    }

    fn one_body(&self, z: Complex64) -> f64 {
        let n = self.points.len() as f64;
        2.0 * n * self.potential.value(z) - 2.0 * self.h.as_ref().map_or(0.0, |h| h.value(z))
    }

    /// `H(λ with λ_j → z) − H(λ)`.
    pub fn energy_change(&self, j: usize, z: Complex64, z_field: f64) -> f64 {
        let old = self.points[j];
        let mut pair = 0.0;
        for (k, &w) in self.points.iter().enumerate() {
            if k == j {
                continue;
            }
            let dn = (z - w).norm();
            if dn == 0.0 {
                return f64::INFINITY;
            }
            pair += 2.0 * ((old - w).norm().ln() - dn.ln());
        }
        pair + z_field - self.field[j]
    }

    fn step(&mut self) {
        let n = self.points.len();
        for j in 0..n {
            let dx: f64 = StandardNormal.sample(&mut self.rng);
            let dy: f64 = StandardNormal.sample(&mut self.rng);
            let z = self.points[j] + self.scale * Complex64::new(dx, dy);
            let zf = self.one_body(z);
            let dh = self.energy_change(j, z, zf);
            self.proposed += 1;
            let u: f64 = self.rng.random();
            if dh.is_finite() && (dh <= 0.0 || u < (-dh).exp()) {
                self.points[j] = z;
                self.field[j] = zf;
                self.accepted += 1;
            }
        }
        self.sweep += 1;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn emit(&self) -> Configuration {
        let rate = self.acceptance_rate();
        let warning = (rate < ACCEPTANCE_BAND.0 || rate > ACCEPTANCE_BAND.1).then(|| {
            format!(
                "acceptance rate {rate:.3} outside [{}, {}]; adjust the proposal scale",
                ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1
            )
        });
        Configuration {
            points: self.points.clone(),
            potential_id: self.potential.id(),
            perturbation_id: self.h.as_ref().map(|h| h.id()),
            tag: SamplerTag::Mcmc,
            seed: self.cc.seed,
            stream: self.stream,
            sweep: Some(self.sweep),
            acceptance_rate: Some(rate),
            warning,
        }
    }
}

impl Iterator for McmcChain {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        while self.sweep < self.cc.burn_in {
            self.step();
        }
        loop {
            if self.sweep >= self.cc.sweeps {
                return None;
            }
            self.step();
            if (self.sweep - self.cc.burn_in) % self.cc.thinning == 0 {
                return Some(self.emit());
            }
        }
    }
}

/// Post-burn-in configurations of one chain on stream 0.
pub fn sample_mcmc(p: &Potential, h: Option<&TestFunction>, n: usize, cc: &ChainConfig) -> Result<McmcChain> {
    McmcChain::new(p, h, n, cc, 0)
}
