use std::f64::consts::PI;

use serde::Serialize;

use super::boundary::{droplet_rule, neumann_jump_samples, FieldOptions};
use super::TestFunction;
use crate::error::Result;
use crate::numerics::{integrate, pairwise_sum, ScalarField};
use crate::potential::{log_laplacian_fields, Droplet, Potential};

/// `ν(f) = (1/8π)[∫_S Δf + ∫_S f ΔL + ∮_{∂S} f 𝒩(L^S) ds]` with its three
/// addends (each without the `1/8π`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NuLimit {
    pub value: f64,
    pub laplacian_term: f64,
    pub curvature_term: f64,
    pub boundary_term: f64,
}

pub fn nu_limit(f: &TestFunction, p: &Potential, d: &Droplet) -> Result<NuLimit> {
    nu_limit_with(f, p, d, &FieldOptions::default())
}

pub fn nu_limit_with(f: &TestFunction, p: &Potential, d: &Droplet, opts: &FieldOptions) -> Result<NuLimit> {
    let (log_lap, lap_log) = log_laplacian_fields(p);
    let rule = droplet_rule(d, f.breakpoints(), opts)?;
    let laplacian_term = integrate(&rule, |z| f.jet(z).laplacian())?;
    // ΔL is checked pointwise first so that a vanishing ΔQ is reported as a
    // domain error rather than a generic non-finite node.
    for &z in rule.nodes() {
        lap_log.value(z)?;
    }
    let curvature_term = integrate(&rule, |z| {
        let v = f.value(z);
        if v == 0.0 {
            0.0
        } else {
            v * lap_log.value(z).unwrap_or(f64::NAN)
        }
    })?;
    let m = opts.modes;
    let jumps = neumann_jump_samples(&log_lap, d, m)?;
    let terms: Vec<f64> = jumps
        .iter()
        .enumerate()
        .map(|(j, nj)| f.value(d.boundary_point(PI * j as f64 / m as f64)) * nj)
        .collect();
    let boundary_term = pairwise_sum(&terms) * d.radius() * PI / m as f64;
    Ok(NuLimit {
        value: (laplacian_term + curvature_term + boundary_term) / (8.0 * PI),
        laplacian_term,
        curvature_term,
        boundary_term,
    })
}
