//! One function per experiment kind. Each returns the files it produced;
//! work over the `n` list runs on the current rayon pool and is merged in
//! list order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{Continuous, Normal};

use rnm::fieldops::{dn_field, mt3_shift, nu_limit, variance_limit};
use rnm::kernel::{build_kernel, default_kernel_rule, KernelModel};
use rnm::numerics::integrate;
use rnm::potential::{obstacle, solve_droplet, Droplet};
use rnm::sampler::{write_configurations, Configuration, DppSampler, McmcChain};
use rnm::stats::{
    clt_test, mc_fluctuation, nu_n_kernel, reports_to_csv, reports_to_json, ward_check_kernel, ward_decomposition_check,
    ward_rule, FluctuationReport, Method,
};
use rnm::Result;

use crate::config::{Experiment, ExperimentKind, SamplerKind};
use crate::output::{emit_plot_data, Outputs, PlotTable, Table};

pub fn run_experiment(e: &Experiment) -> Result<Outputs> {
    let mut out = Outputs::default();
    let mut plots = Vec::new();
    match e.kind {
        ExperimentKind::Droplet => droplet(e, &mut out, &mut plots)?,
        ExperimentKind::KernelCheck => kernel_check(e, &mut out)?,
        ExperimentKind::Sample => sample(e, &mut out)?,
        ExperimentKind::Fluctuations => fluctuations(e, &mut out, &mut plots)?,
        ExperimentKind::Ward => ward(e, &mut out, &mut plots)?,
        ExperimentKind::Clt => clt(e, &mut out, &mut plots)?,
        ExperimentKind::DnField => dn(e, &mut out, &mut plots)?,
    }
    emit_plot_data(&plots, &mut out);
    Ok(out)
}

/// Seed for the `i`-th entry of the `n` list.
pub fn derived_seed(global: u64, i: usize) -> u64 {
    global ^ i as u64
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// File-name-safe form of a user id.
fn slug(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn csv_err(e: csv::Error) -> rnm::Error {
    rnm::Error::Io(std::io::Error::other(e))
}

fn kernel(e: &Experiment, n: usize) -> Result<KernelModel> {
    let h = e.perturbation.as_ref();
    build_kernel(&e.potential, n, h, &default_kernel_rule(&e.potential, n, h)?)
}

/// `f(i, n)` for every entry of the `n` list, in list order.
fn per_n<T: Send>(e: &Experiment, f: impl Fn(usize, usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    e.n.par_iter().enumerate().map(|(i, &n)| f(i, n)).collect()
}

fn draw(e: &Experiment, km: &KernelModel, seed: u64) -> Result<Vec<Configuration>> {
    match e.sampler.kind {
        SamplerKind::Dpp => DppSampler::new(km)?.sample_many(seed, e.sampler.samples),
        SamplerKind::Mcmc => {
            let mut cc = e.sampler.chain.clone().expect("validated");
            cc.seed = seed;
            Ok(McmcChain::new(&e.potential, e.perturbation.as_ref(), km.n(), &cc, 0)?.collect())
        }
    }
}

fn droplet(e: &Experiment, out: &mut Outputs, plots: &mut Vec<PlotTable>) -> Result<()> {
    let d = solve_droplet(&e.potential)?;
    let ob = obstacle(&e.potential, &d);
    let mut t = Table::new("droplet.csv", &["potential", "radius", "mass", "center_x", "center_y", "density_at_center"]);
    t.push(vec![
        e.potential.id(),
        num(d.radius()),
        num(d.mass()),
        num(d.center().re),
        num(d.center().im),
        num(d.density(d.center())),
    ]);
    out.add_table(&t).map_err(csv_err)?;
    let rows = (0..=100)
        .map(|i| {
            let r = 2.0 * d.radius() * i as f64 / 100.0;
            let z = d.center() + Complex64::new(r, 0.0);
            vec![r, d.density(z), e.potential.value(z), ob.value(z)]
        })
        .collect();
    plots.push(PlotTable {
        file_name: "droplet_profile.dat".into(),
        comments: vec![format!("radial profile of {}", e.potential.id())],
        columns: vec!["r".into(), "density".into(), "Q".into(), "obstacle".into()],
        rows,
    });
    Ok(())
}

fn kernel_check(e: &Experiment, out: &mut Outputs) -> Result<()> {
    let rows = per_n(e, |_, n| {
        let h = e.perturbation.as_ref();
        let rule = default_kernel_rule(&e.potential, n, h)?;
        let km = build_kernel(&e.potential, n, h, &rule)?;
        let trace = integrate(&rule, |z| km.diag(z))?;
        let defect = (trace - n as f64).abs() / n as f64;
        Ok(vec![
            n.to_string(),
            format!("{:?}", km.path()).to_lowercase(),
            num(trace),
            num(defect),
            (defect <= e.tolerances.trace).to_string(),
            num(km.effective_radius()),
            rule.len().to_string(),
        ])
    })?;
    let mut t =
        Table::new("kernel_check.csv", &["n", "path", "trace", "relative_defect", "pass", "effective_radius", "nodes"]);
    rows.into_iter().for_each(|r| t.push(r));
    out.add_table(&t).map_err(csv_err)
}

fn sample(e: &Experiment, out: &mut Outputs) -> Result<()> {
    let runs = per_n(e, |i, n| {
        let km = kernel(e, n)?;
        let configs = draw(e, &km, derived_seed(e.seed, i))?;
        let mut bytes = Vec::new();
        write_configurations(&mut bytes, &configs)?;
        let count = configs.len() as f64;
        let r2 = configs.iter().map(|c| c.points.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() / count;
        let acc: Vec<f64> = configs.iter().filter_map(|c| c.acceptance_rate).collect();
        let warnings = configs.iter().filter(|c| c.warning.is_some()).count();
        let row = vec![
            n.to_string(),
            format!("{:?}", e.sampler.kind).to_lowercase(),
            configs.len().to_string(),
            num(r2),
            if acc.is_empty() { String::new() } else { num(acc[acc.len() - 1]) },
            warnings.to_string(),
        ];
        Ok((format!("samples_n{n}.jsonl"), bytes, row))
    })?;
    let mut t = Table::new("samples.csv", &["n", "sampler", "count", "mean_sum_abs2", "acceptance_rate", "warnings"]);
    for (name, bytes, row) in runs {
        out.add(name, bytes);
        t.push(row);
    }
    out.add_table(&t).map_err(csv_err)
}

fn fluctuations(e: &Experiment, out: &mut Outputs, plots: &mut Vec<PlotTable>) -> Result<()> {
    if e.test_functions.is_empty() {
        return Ok(());
    }
    let d = solve_droplet(&e.potential)?;
    // Under a perturbation h the limit of ν̃_n(f) is ν(f) plus the mean shift.
    let limits: Vec<f64> = e
        .test_functions
        .iter()
        .map(|(_, f)| {
            let nu = nu_limit(f, &e.potential, &d)?.value;
            Ok(match &e.perturbation {
                Some(h) => nu + mt3_shift(f, h, &d)?,
                None => nu,
            })
        })
        .collect::<Result<_>>()?;
    let per = per_n(e, |i, n| {
        let km = kernel(e, n)?;
        let samples = match e.method {
            Method::Mc => Some(draw(e, &km, derived_seed(e.seed, i))?),
            Method::Kernel => None,
        };
        e.test_functions
            .iter()
            .zip(&limits)
            .map(|((id, f), &nu)| {
                Ok(match &samples {
                    Some(s) => {
                        let mc = mc_fluctuation(s, f, &d)?;
                        FluctuationReport::new(n, id.clone(), mc.mean, nu, Method::Mc, Some(mc.mean_se))
                    }
                    None => FluctuationReport::new(n, id.clone(), nu_n_kernel(&km, &d, f)?, nu, Method::Kernel, None),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let reports: Vec<FluctuationReport> = per.into_iter().flatten().collect();
    out.add("fluctuations.csv", reports_to_csv(&reports)?.into_bytes());
    out.add("fluctuations.json", reports_to_json(&reports)?.into_bytes());
    for (id, _) in &e.test_functions {
        let rows = reports.iter().filter(|r| &r.f_id == id).map(|r| vec![r.n as f64, r.nu_n, r.nu, r.gap, r.gap.abs()]).collect();
        plots.push(PlotTable {
            file_name: format!("gap_vs_n_{}.dat", slug(id)),
            comments: vec![format!("fluctuation gap for {id} ({:?})", e.method).to_lowercase()],
            columns: ["n", "nu_n", "nu", "gap", "abs_gap"].iter().map(|s| s.to_string()).collect(),
            rows,
        });
    }
    Ok(())
}

fn ward(e: &Experiment, out: &mut Outputs, plots: &mut Vec<PlotTable>) -> Result<()> {
    if e.fields.is_empty() {
        return Ok(());
    }
    let d = if e.decomposition { Some(solve_droplet(&e.potential)?) } else { None };
    let per = per_n(e, |_, n| {
        let km = kernel(e, n)?;
        let mut ward_rows = Vec::new();
        let mut dec_rows = Vec::new();
        for (id, v) in &e.fields {
            let rule = ward_rule(&km, v, e.quadrature.ward_radial, e.quadrature.ward_angular)?;
            let r = ward_check_kernel(&km, v, &rule)?;
            let mut row = vec![n.to_string(), id.clone()];
            for c in [r.e1, r.e2, r.e3, r.perturbation_term, r.residual] {
                row.push(num(c.re));
                row.push(num(c.im));
            }
            row.push(num(r.relative_residual));
            row.push((r.relative_residual <= e.tolerances.ward).to_string());
            ward_rows.push(row);
            if let Some(d) = &d {
                let r = ward_decomposition_check(&km, v, d)?;
                let mut row = vec![n.to_string(), id.clone()];
                for c in [r.lhs, r.rhs, r.eps1, r.eps2] {
                    row.push(num(c.re));
                    row.push(num(c.im));
                }
                row.push(num(r.relative_difference));
                dec_rows.push((row, r.eps1.norm(), r.eps2.norm()));
            }
        }
        Ok((ward_rows, dec_rows))
    })?;
    let mut t = Table::new(
        "ward.csv",
        &[
            "n", "v", "I_re", "I_im", "II_re", "II_im", "III_re", "III_im", "pert_re", "pert_im", "residual_re", "residual_im",
            "relative_residual", "pass",
        ],
    );
    let mut dt = Table::new(
        "ward_decomposition.csv",
        &["n", "v", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "eps1_re", "eps1_im", "eps2_re", "eps2_im", "relative_difference"],
    );
    let mut eps: Vec<(usize, String, f64, f64)> = Vec::new();
    for (i, (w, dec)) in per.into_iter().enumerate() {
        w.into_iter().for_each(|r| t.push(r));
        for (row, e1, e2) in dec {
            eps.push((e.n[i], row[1].clone(), e1, e2));
            dt.push(row);
        }
    }
    out.add_table(&t).map_err(csv_err)?;
    out.add_table(&dt).map_err(csv_err)?;
    if e.decomposition {
        for (id, _) in &e.fields {
            let rows = eps.iter().filter(|r| &r.1 == id).map(|r| vec![r.0 as f64, r.2, r.3]).collect();
            plots.push(PlotTable {
                file_name: format!("eps_vs_n_{}.dat", slug(id)),
                comments: vec![format!("error terms for field {id}")],
                columns: vec!["n".into(), "abs_eps1".into(), "abs_eps2".into()],
                rows,
            });
        }
    }
    Ok(())
}

fn histogram(values: &[f64], bins: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = (-4.0, 4.0);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v >= lo && v < hi {
            counts[((v - lo) / w) as usize] += 1;
        }
    }
    let normal = Normal::standard();
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let x = lo + (k as f64 + 0.5) * w;
            vec![x, c as f64 / (values.len() as f64 * w), normal.pdf(x)]
        })
        .collect()
}

fn clt(e: &Experiment, out: &mut Outputs, plots: &mut Vec<PlotTable>) -> Result<()> {
    if e.test_functions.is_empty() {
        return Ok(());
    }
    let d = solve_droplet(&e.potential)?;
    let targets: Vec<f64> = e.test_functions.iter().map(|(_, f)| variance_limit(f, &d)).collect::<Result<_>>()?;
    let per = per_n(e, |i, n| {
        let km = kernel(e, n)?;
        let samples = draw(e, &km, derived_seed(e.seed, i))?;
        e.test_functions
            .iter()
            .zip(&targets)
            .map(|((id, f), &target)| {
                let r = clt_test(&samples, f, &d)?;
                let row = vec![
                    n.to_string(),
                    id.clone(),
                    r.samples.to_string(),
                    num(r.mean),
                    num(r.variance),
                    num(target),
                    num(r.ks_statistic),
                    num(r.ks_critical),
                    r.ks_passes().to_string(),
                    num(r.skewness),
                    num(r.skewness_se),
                    num(r.excess_kurtosis),
                    num(r.kurtosis_se),
                    r.skipped.clone().unwrap_or_default(),
                ];
                let hist = r.skipped.is_none().then(|| PlotTable {
                    file_name: format!("histogram_n{n}_{}.dat", slug(id)),
                    comments: vec![format!("standardised fluctuations of {id}, n = {n}, {} samples", r.samples)],
                    columns: vec!["x".into(), "empirical_density".into(), "normal_density".into()],
                    rows: histogram(&r.standardized, e.histogram_bins),
                });
                Ok((row, hist))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "clt.csv",
        &[
            "n", "f", "samples", "mean", "variance", "variance_limit", "ks", "ks_critical", "ks_pass", "skewness", "skewness_se",
            "excess_kurtosis", "kurtosis_se", "skipped",
        ],
    );
    for (row, hist) in per.into_iter().flatten() {
        t.push(row);
        plots.extend(hist);
    }
    out.add_table(&t).map_err(csv_err)
}

fn default_points(d: &Droplet) -> Vec<Complex64> {
    (0..40).map(|i| d.center() + Complex64::new(2.0 * d.radius() * (i as f64 + 0.5) / 40.0, 0.0)).collect()
}

fn dn(e: &Experiment, out: &mut Outputs, plots: &mut Vec<PlotTable>) -> Result<()> {
    let d = solve_droplet(&e.potential)?;
    let points = if e.points.is_empty() { default_points(&d) } else { e.points.clone() };
    let per = per_n(e, |_, n| {
        let km = kernel(e, n)?;
        points.iter().map(|&z| Ok((z, dn_field(&km, &d, z)?))).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new("dn_field.csv", &["n", "x", "y", "re", "im", "abs", "near_boundary"]);
    for (&n, vals) in e.n.iter().zip(&per) {
        for (z, v) in vals {
            t.push(vec![
                n.to_string(),
                num(z.re),
                num(z.im),
                num(v.value.re),
                num(v.value.im),
                num(v.value.norm()),
                v.near_boundary.to_string(),
            ]);
        }
        plots.push(PlotTable {
            file_name: format!("dn_n{n}.dat"),
            comments: vec![format!("D_n at n = {n}; angle in units of pi")],
            columns: vec!["abs_z".into(), "angle".into(), "re".into(), "im".into()],
            rows: vals.iter().map(|(z, v)| vec![z.norm(), z.arg() / PI, v.value.re, v.value.im]).collect(),
        });
    }
    out.add_table(&t).map_err(csv_err)
}
