//! Monte Carlo estimators over sampled configurations.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::linear::{linear_statistic, sigma_pairing};
use crate::error::{Error, Result};
use crate::fieldops::TestFunction;
use crate::numerics::pairwise_sum;
use crate::potential::Droplet;
use crate::sampler::Configuration;

pub const MIN_FLUCTUATION_SAMPLES: usize = 100;
pub const MIN_CLT_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McFluctuation {
    pub samples: usize,
    /// Sample mean of `Tr_n[f] − nσ(f)`.
    pub mean: f64,
    /// Sample variance of `Tr_n[f]`.
    pub variance: f64,
    /// Jackknife standard errors.
    pub mean_se: f64,
    pub variance_se: f64,
}

fn traces(samples: &[Configuration], f: &TestFunction) -> Vec<f64> {
    samples.par_iter().map(|c| linear_statistic(c, f)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
fn variance(xs: &[f64], m: f64) -> f64 {
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() as f64 - 1.0)
}

/// Leave-one-out standard error of `stat`.
fn jackknife(xs: &[f64], stat: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let n = xs.len();
    let loo: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rest = Vec::with_capacity(n - 1);
            rest.extend_from_slice(&xs[..i]);
            rest.extend_from_slice(&xs[i + 1..]);
            stat(&rest)
        })
        .collect();
    let m = mean(&loo);
    let sq: Vec<f64> = loo.iter().map(|t| (t - m) * (t - m)).collect();
    ((n as f64 - 1.0) / n as f64 * pairwise_sum(&sq)).sqrt()
}

pub fn mc_fluctuation(samples: &[Configuration], f: &TestFunction, d: &Droplet) -> Result<McFluctuation> {
    if samples.len() < MIN_FLUCTUATION_SAMPLES {
        return Err(Error::Parameter(format!(
            "{} samples given; at least {MIN_FLUCTUATION_SAMPLES} are needed",
            samples.len()
        )));
    }
    let n = samples[0].n();
    if let Some(c) = samples.iter().find(|c| c.n() != n) {
        return Err(Error::Parameter(format!("mixed configuration sizes {n} and {}", c.n())));
    }
    let shift = n as f64 * sigma_pairing(f, d)?;
    let t = traces(samples, f);
    let m = mean(&t);
    let var = variance(&t, m);
    Ok(McFluctuation {
        samples: t.len(),
        mean: m - shift,
        variance: var,
        mean_se: jackknife(&t, mean),
        variance_se: jackknife(&t, |xs| variance(xs, mean(xs))),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// Kolmogorov–Smirnov distance of the standardised values from N(0, 1).
    pub ks_statistic: f64,
    /// Asymptotic 5% critical value `1.358/√N`.
    pub ks_critical: f64,
    pub skewness: f64,
    pub skewness_se: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_se: f64,
    /// Set when the test was not run.
    pub skipped: Option<String>,
    #[serde(skip)]
    pub standardized: Vec<f64>,
}

impl CltReport {
    pub fn ks_passes(&self) -> bool {
        self.skipped.is_none() && self.ks_statistic < self.ks_critical
    }
}

/// KS distance of `xs` from the standard normal law.
pub fn ks_statistic_normal(xs: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Standardised moments and KS distance of raw statistic values.
pub fn clt_from_values(values: &[f64]) -> Result<CltReport> {
    let n = values.len();
    if n < MIN_CLT_SAMPLES {
        return Err(Error::Parameter(format!("{n} samples given; at least {MIN_CLT_SAMPLES} are needed")));
    }
    let m = mean(values);
    let var = variance(values, m);
    let nf = n as f64;
    let mut report = CltReport {
        samples: n,
        mean: m,
        variance: var,
        ks_statistic: f64::NAN,
        ks_critical: 1.358 / nf.sqrt(),
        skewness: f64::NAN,
        skewness_se: (6.0 / nf).sqrt(),
        excess_kurtosis: f64::NAN,
        kurtosis_se: (24.0 / nf).sqrt(),
        skipped: None,
        standardized: Vec::new(),
    };
    if !(var > 1e-24 * (1.0 + m * m)) {
        report.skipped = Some(format!("degenerate variance {var:e}; the statistic is constant"));
        return Ok(report);
    }
    let sd = var.sqrt();
    let z: Vec<f64> = values.iter().map(|x| (x - m) / sd).collect();
    let m3 = mean(&z.iter().map(|t| t.powi(3)).collect::<Vec<_>>());
    let m4 = mean(&z.iter().map(|t| t.powi(4)).collect::<Vec<_>>());
    report.skewness = m3;
    report.excess_kurtosis = m4 - 3.0;
    report.ks_statistic = ks_statistic_normal(&z);
    report.standardized = z;
    Ok(report)
}

pub fn clt_test(samples: &[Configuration], h: &TestFunction, _d: &Droplet) -> Result<CltReport> {
    clt_from_values(&traces(samples, h))
}
