//! Acceptance run: one line per criterion, `PASS` or `FAIL`.
//!
//! Criteria marked "reported" print their outcome but do not fail the run;
//! every other criterion is asserted at the end.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF, Exp, Gamma};

use rnm::fieldops::*;
use rnm::kernel::*;
use rnm::numerics::{integrate, QuadratureRule, RadialRule, ScalarField};
use rnm::potential::*;
use rnm::sampler::*;
use rnm::stats::*;

struct Outcome {
    id: usize,
    pass: bool,
    asserted: bool,
    detail: String,
}

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn r2() -> Expr {
    Expr::x().pow(2) + Expr::y().pow(2)
}

fn quartic() -> Potential {
    Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap()
}

fn kernel(p: &Potential, n: usize, h: Option<&TestFunction>) -> KernelModel {
    build_kernel(p, n, h, &default_kernel_rule(p, n, h).unwrap()).unwrap()
}

/// `b ≤ 1.05 a`, or both already below `floor`.
fn not_growing(a: f64, b: f64, floor: f64) -> bool {
    b <= 1.05 * a || (a.abs() < floor && b.abs() < floor)
}

fn trend(xs: &[f64], floor: f64) -> bool {
    xs.windows(2).all(|w| not_growing(w[0], w[1], floor))
}

fn zg(g: Expr) -> VectorField {
    VectorField::new(TestFunction::new(Expr::x() * g.clone()), TestFunction::new(Expr::y() * g))
}

fn c1() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [Potential::ginibre(), quartic()] {
        for n in [8, 16, 32, 64] {
            let km = kernel(&p, n, None);
            let rule = kernel_rule(&p, n, None, &[], 400, 256).unwrap();
            let tr = integrate(&rule, |z| km.diag(z)).unwrap();
            worst = worst.max((tr - n as f64).abs() / n as f64);
        }
    }
    Outcome { id: 1, pass: worst <= 1e-6, asserted: true, detail: format!("max relative trace defect {worst:.2e} (tol 1e-6)") }
}

fn c2() -> Outcome {
    let n = 32;
    let km = kernel(&Potential::ginibre(), n, None);
    let mut worst: f64 = 0.0;
    let mut log_fact = 0.0;
    for (k, l) in km.log_norms().iter().enumerate() {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        let want = PI.ln() + log_fact - (k as f64 + 1.0) * (n as f64).ln();
        worst = worst.max((l - want).exp_m1().abs());
    }
    Outcome { id: 2, pass: worst <= 1e-9, asserted: true, detail: format!("max relative norm error {worst:.2e} over k < 32 (tol 1e-9)") }
}

fn c3() -> Outcome {
    let p = Potential::ginibre();
    let fields = [
        zg(Expr::cutoff(1.2, 2.0)),
        zg(r2() * Expr::cutoff(1.5, 2.5)),
        zg((Expr::c(-1.0) * r2()).exp()),
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut min_gain = f64::INFINITY;
    for n in [8, 16] {
        let km = kernel(&p, n, None);
        for v in &fields {
            let coarse = ward_check_kernel(&km, v, &ward_rule(&km, v, 32, 32).unwrap()).unwrap();
            let fine = ward_check_kernel(&km, v, &ward_rule(&km, v, 64, 64).unwrap()).unwrap();
            let gain = coarse.relative_residual / fine.relative_residual.max(f64::MIN_POSITIVE);
            let refines = gain >= 4.0 || coarse.relative_residual <= 1e-11;
            pass &= fine.relative_residual <= 1e-3 && coarse.relative_residual <= 1e-3 && refines;
            worst = worst.max(fine.relative_residual);
            if coarse.relative_residual > 1e-11 {
                min_gain = min_gain.min(gain);
            }
        }
    }
    let gain = if min_gain.is_finite() { format!("{min_gain:.1}x") } else { "n/a (floor)".into() };
    Outcome {
        id: 3,
        pass,
        asserted: true,
        detail: format!("3 fields x n in {{8,16}}: max relative residual {worst:.2e} (tol 1e-3); min refinement gain above floor {gain}"),
    }
}

fn c4() -> Outcome {
    let p = Potential::ginibre();
    let d = solve_droplet(&p).unwrap();
    let km = kernel(&p, 8, None);
    let mut worst: f64 = 0.0;
    for v in [zg(r2() * Expr::cutoff(1.5, 2.5)), zg((Expr::c(-1.0) * r2()).exp())] {
        let r = ward_decomposition_check(&km, &v, &d).unwrap();
        worst = worst.max(r.relative_difference);
    }
    Outcome { id: 4, pass: worst <= 1e-3, asserted: true, detail: format!("n = 8: max relative difference of the two sides {worst:.2e} (tol 1e-3)") }
}

/// Self-normalised importance sampling of `𝐄 Tr f` for the `n`-point
/// Ginibre gas, with iid complex Gaussian proposals of variance `s2`.
fn density_of_states_mc(n: usize, f: &TestFunction, samples: usize, seed: u64) -> (f64, f64) {
    let s2 = 0.7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut logw = Vec::with_capacity(samples);
    let mut tr = Vec::with_capacity(samples);
    let mut pts = vec![c(0.0, 0.0); n];
    for _ in 0..samples {
        for z in pts.iter_mut() {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            *z = c(x, y) * (s2 / 2.0f64).sqrt();
        }
        let mut lw = 0.0;
        for i in 0..n {
            let a = pts[i].norm_sqr();
            lw += -(n as f64) * a + a / s2;
            for j in 0..i {
                lw += (pts[i] - pts[j]).norm_sqr().ln();
            }
        }
        logw.push(lw);
        tr.push(pts.iter().map(|&z| f.value(z)).sum::<f64>());
    }
    let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - m).exp()).collect();
    let sw: f64 = w.iter().sum();
    let mean = w.iter().zip(&tr).map(|(w, t)| w * t).sum::<f64>() / sw;
    let var = w.iter().zip(&tr).map(|(w, t)| (w * (t - mean)).powi(2)).sum::<f64>() / (sw * sw);
    (mean, var.sqrt())
}

fn c5() -> Outcome {
    let p = Potential::ginibre();
    let d = solve_droplet(&p).unwrap();
    let f = TestFunction::new(r2() * Expr::cutoff(1.25, 2.0));
    let gaps: Vec<f64> = [16, 32, 64].iter().map(|&n| (nu_n_kernel(&kernel(&p, n, None), &d, &f).unwrap() - 0.5).abs()).collect();
    let within = gaps[2] <= 0.1 * 0.5 + 0.01;
    let strict = gaps[0] > gaps[1] && gaps[1] > gaps[2];
    // n = 4 oracle: σ(f) = ∫_{|z|<1} |z|² dA/π = 1/2, so 𝐄 Tr f = ν_4(f) + 2.
    let nu4 = nu_n_kernel(&kernel(&p, 4, None), &d, &f).unwrap();
    let (mc, se) = density_of_states_mc(4, &f, 1_000_000, 20);
    let z = (nu4 + 2.0 - mc) / se;
    Outcome {
        id: 5,
        pass: within && strict && z.abs() <= 3.0,
        asserted: true,
        detail: format!(
            "|gap| n=16,32,64: {:.3e} {:.3e} {:.3e}; n=4 kernel {:.5} vs MC {:.5} +- {:.5} ({z:+.2} SE)",
            gaps[0],
            gaps[1],
            gaps[2],
            nu4 + 2.0,
            mc,
            se
        ),
    }
}

/// `ν(f)` for `Q = |z|²/2 + t|z|⁴/4` and `f = |z|²` near the droplet, from
/// the radial reduction `L = log(2 + 4tr²)`, `ΔL = 32t/(2 + 4tr²)²`,
/// `𝒩(L^S) = −L′(R)`.
fn quartic_nu(t: f64) -> f64 {
    let r = (((1.0 + 4.0 * t).sqrt() - 1.0) / (2.0 * t)).sqrt();
    let rule = RadialRule::gauss_legendre(0.0, r, 200).unwrap();
    let curv = 2.0 * PI * rule.integrate(|s| s * s * s * 32.0 * t / (2.0 + 4.0 * t * s * s).powi(2));
    let lprime = 8.0 * t * r / (2.0 + 4.0 * t * r * r);
    (2.0 * PI * r * 2.0 * r + curv - 2.0 * PI * r * r * r * lprime) / (8.0 * PI)
}

fn c6() -> Outcome {
    let p = quartic();
    let d = solve_droplet(&p).unwrap();
    let f = TestFunction::new(r2() * Expr::cutoff(1.5, 2.5));
    let want = quartic_nu(0.1);
    let nu = nu_limit(&f, &p, &d).unwrap().value;
    let nu64 = nu_n_kernel(&kernel(&p, 64, None), &d, &f).unwrap();
    let gap = (nu64 - nu).abs();
    Outcome {
        id: 6,
        pass: (nu - want).abs() <= 1e-6 && gap <= 0.15 * nu.abs() + 0.01,
        asserted: true,
        detail: format!("nu = {nu:.10} (reduction {want:.10}); nu_64 = {nu64:.6}, gap {gap:.2e}"),
    }
}

fn c7() -> Vec<Outcome> {
    let p = Potential::ginibre();
    let d = solve_droplet(&p).unwrap();
    let h = TestFunction::new(Expr::x() * Expr::cutoff(1.5, 2.5));
    let km = kernel(&p, 64, None);
    let samples = DppSampler::new(&km).unwrap().sample_many(7, 2000).unwrap();
    let mc = mc_fluctuation(&samples, &h, &d).unwrap();
    let clt = clt_test(&samples, &h, &d).unwrap();
    let exact = kernel_variance(&km, &d, &h).unwrap();
    let target = variance_limit(&h, &d).unwrap();
    let band = (0.85..=1.15).contains(&mc.variance);
    vec![
        Outcome {
            id: 7,
            pass: band,
            asserted: false,
            detail: format!(
                "variance band (reported): sample variance {:.4} +- {:.4} vs stated target {target:.4}; exact kernel variance {exact:.6}",
                mc.variance, mc.variance_se
            ),
        },
        Outcome {
            id: 7,
            pass: clt.ks_passes() && clt.skewness.abs() <= 0.15 && clt.excess_kurtosis.abs() <= 0.3,
            asserted: true,
            detail: format!(
                "normality: KS {:.4} (5% critical {:.4}), skewness {:+.3}, excess kurtosis {:+.3}",
                clt.ks_statistic, clt.ks_critical, clt.skewness, clt.excess_kurtosis
            ),
        },
    ]
}

fn c8() -> Outcome {
    let p = Potential::ginibre();
    let d = solve_droplet(&p).unwrap();
    let h = TestFunction::new(Expr::x() * Expr::cutoff(1.5, 2.5));
    let target = mt3_shift(&h, &h, &d).unwrap();
    let shift = nu_n_kernel(&kernel(&p, 64, Some(&h)), &d, &h).unwrap() - nu_n_kernel(&kernel(&p, 64, None), &d, &h).unwrap();
    // Re z on the unit disk: interior and exterior Dirichlet energies are both π.
    Outcome {
        id: 8,
        pass: (target - 1.0).abs() < 1e-10 && (shift - target).abs() <= 0.1 * target.abs(),
        asserted: true,
        detail: format!("shift at n = 64 {shift:.6}, target {target:.6}"),
    }
}

fn c9() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, p) in [("ginibre", Potential::ginibre()), ("quartic", quartic())] {
        let d = solve_droplet(&p).unwrap();
        let cs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| exterior_bound_constant(&kernel(&p, n, None), &d, &[0.25, 0.5, 0.75, 1.0], 64))
            .collect();
        pass &= trend(&cs, 1e-9);
        detail.push(format!("{name} {:.3e} {:.3e} {:.3e}", cs[0], cs[1], cs[2]));
    }
    Outcome { id: 9, pass, asserted: true, detail: format!("fitted constants n=16,32,64: {}", detail.join("; ")) }
}

fn c10() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, p) in [("ginibre", Potential::ginibre()), ("quartic", quartic())] {
        let d = solve_droplet(&p).unwrap();
        let ak = ApproxKernel::new(&p, None).unwrap();
        let w = c(0.1, 0.05);
        let (mut bulk, mut heat, mut tail) = (Vec::new(), Vec::new(), Vec::new());
        for n in [16, 32, 64] {
            let km = kernel(&p, n, None);
            let pairs = bulk_pairs(n, &d);
            assert_eq!(pairs.len(), 50);
            let dn = delta_n(n);
            assert!(pairs.iter().all(|(z, w)| (z - w).norm() < dn));
            bulk.push(bulk_kernel_discrepancy(&km, &ak, &pairs).unwrap().max_abs);
            heat.push(berezin_heat_discrepancy(&km, w, dn).unwrap() / (n as f64 * dn));
            tail.push(berezin_tail(&km, w, dn).unwrap().max(0.0) / (n as f64 * dn.powi(3)));
        }
        pass &= trend(&bulk, 1e-9) && trend(&heat, 1e-12) && trend(&tail, 1e-12);
        detail.push(format!(
            "{name}: bulk {:.2e} {:.2e} {:.2e}, heat C {:.2e} {:.2e} {:.2e}, tail C {:.1e} {:.1e} {:.1e}",
            bulk[0], bulk[1], bulk[2], heat[0], heat[1], heat[2], tail[0], tail[1], tail[2]
        ));
    }
    Outcome { id: 10, pass, asserted: true, detail: detail.join("; ") }
}

fn c11() -> Outcome {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.1] {
        let p = if t == 0.0 { Potential::ginibre() } else { quartic() };
        let d = solve_droplet(&p).unwrap();
        let r = d.radius();
        for i in 0..100 {
            let rho = if i < 50 { r * (0.05 + 0.9 * i as f64 / 49.0) } else { r * (1.05 + 2.0 * (i - 50) as f64 / 49.0) };
            let z = Complex64::from_polar(rho, golden * i as f64);
            // 2∂Q̌: z̄(1 + t|z|²) inside, 1/z outside.
            let want = if rho < r { z.conj() * (1.0 + t * z.norm_sqr()) } else { 1.0 / z };
            let got = cauchy_transform_quadrature(&d, z, 64, 512).unwrap();
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    Outcome { id: 11, pass: worst <= 1e-6, asserted: true, detail: format!("50 interior + 50 exterior points, 2 potentials: max relative error {worst:.2e}") }
}

/// `∫_S φ Δg + ∮ φ 𝒩(g^S) ds` and `∫ g^S Δφ`.
fn green_sides(g: &TestFunction, phi: &TestFunction, d: &Droplet) -> (f64, f64) {
    let r = d.radius();
    let mut breaks = g.breakpoints().to_vec();
    breaks.extend_from_slice(phi.breakpoints());
    breaks.retain(|&b| b < r);
    let inner = QuadratureRule::disk(r, &breaks, 200, 128).unwrap();
    let a = integrate(&inner, |z| phi.value(z) * g.dual_eval(z).laplacian()).unwrap();
    let m = 128;
    let jumps = neumann_jump_samples(g, d, m).unwrap();
    let b = jumps
        .iter()
        .enumerate()
        .map(|(j, nj)| phi.value(d.boundary_point(PI * j as f64 / m as f64)) * nj)
        .sum::<f64>()
        * r
        * PI
        / m as f64;
    let ext = HarmonicExtension::new(g, d, m).unwrap();
    let mut breaks = phi.breakpoints().to_vec();
    breaks.push(r);
    let all = QuadratureRule::disk(phi.support_radius(), &breaks, 300, 256).unwrap();
    let c = integrate(&all, |z| ext.value(z) * phi.dual_eval(z).laplacian()).unwrap();
    (a + b, c)
}

fn c12() -> Outcome {
    let pairs = [
        (Expr::x(), Expr::cutoff(1.4, 2.2)),
        (Expr::x() * Expr::y(), Expr::y() * Expr::cutoff(1.2, 2.0)),
        ((Expr::c(-0.5) * r2()).exp(), Expr::cutoff(0.5, 1.8)),
        (Expr::x().pow(2) * Expr::y() + Expr::c(0.5) * Expr::y(), (Expr::c(1.0) + Expr::c(0.3) * Expr::x()) * Expr::cutoff(1.6, 2.6)),
        (Expr::x().pow(3) - Expr::c(3.0) * Expr::x() * Expr::y().pow(2), r2() * Expr::cutoff(0.8, 2.0)),
    ];
    let mut worst: f64 = 0.0;
    for p in [Potential::ginibre(), quartic()] {
        let d = solve_droplet(&p).unwrap();
        for (g, phi) in &pairs {
            let (l, r) = green_sides(&TestFunction::new(g.clone()), &TestFunction::new(phi.clone()), &d);
            worst = worst.max((l - r).abs());
        }
    }
    Outcome { id: 12, pass: worst <= 1e-5, asserted: true, detail: format!("5 pairs x 2 potentials: max |lhs - rhs| {worst:.2e} (tol 1e-5)") }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, (v / xs.len() as f64).sqrt())
}

fn c13() -> Outcome {
    let p = Potential::ginibre();
    let n = 16;
    let stat = |cfg: &Configuration| cfg.points.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let km = kernel(&p, n, None);
    let dpp: Vec<f64> = DppSampler::new(&km).unwrap().sample_many(13, 2000).unwrap().iter().map(stat).collect();
    let (m_dpp, se_dpp) = mean_se(&dpp);
    // MCMC: batch means over 8 independent chains.
    let cc = ChainConfig::new(20_000, 2_000, 10, 13);
    let mut batches = Vec::new();
    for stream in 0..8 {
        let xs: Vec<f64> = McmcChain::new(&p, None, n, &cc, stream).unwrap().map(|c| stat(&c)).collect();
        for chunk in xs.chunks(xs.len() / 10) {
            batches.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
        }
    }
    let (m_mc, se_mc) = mean_se(&batches);
    let z = (m_dpp - m_mc) / (se_dpp * se_dpp + se_mc * se_mc).sqrt();
    let exact = (n as f64 + 1.0) / 2.0;

    // n = 2: U = |λ₁ + λ₂|²/2 ~ Exp(2) and V = |λ₁ − λ₂|²/2 ~ Gamma(2, 2),
    // independent; 6 × 6 equiprobable cells.
    let k2 = kernel(&p, 2, None);
    let pairs = DppSampler::new(&k2).unwrap().sample_many(17, 10_000).unwrap();
    let eu = Exp::new(2.0).unwrap();
    let gv = Gamma::new(2.0, 2.0).unwrap();
    let cell = |x: f64, dist: &dyn Fn(f64) -> f64| ((dist(x) * 6.0).floor() as usize).min(5);
    let mut counts = [[0usize; 6]; 6];
    for cfg in &pairs {
        let (a, b) = (cfg.points[0], cfg.points[1]);
        let u = (a + b).norm_sqr() / 2.0;
        let v = (a - b).norm_sqr() / 2.0;
        counts[cell(u, &|x| eu.cdf(x))][cell(v, &|x| gv.cdf(x))] += 1;
    }
    let expected = pairs.len() as f64 / 36.0;
    let chi2: f64 = counts.iter().flatten().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let pval = 1.0 - ChiSquared::new(35.0).unwrap().cdf(chi2);
    Outcome {
        id: 13,
        pass: z.abs() <= 3.0 && pval >= 0.01,
        asserted: true,
        detail: format!(
            "n = 16 E sum|z|^2: DPP {m_dpp:.4} +- {se_dpp:.4}, MCMC {m_mc:.4} +- {se_mc:.4} ({z:+.2} SE, exact {exact}); n = 2 chi2 {chi2:.1} on 35 df, p = {pval:.3}"
        ),
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Vec<Outcome>)> = vec![
        ("trace identity", || vec![c1()]),
        ("closed-form norms", || vec![c2()]),
        ("Ward identity", || vec![c3()]),
        ("decomposition", || vec![c4()]),
        ("Ginibre mean correction", || vec![c5()]),
        ("quartic mean correction", || vec![c6()]),
        ("CLT", c7),
        ("mean shift", || vec![c8()]),
        ("exterior bound", || vec![c9()]),
        ("bulk kernel", || vec![c10()]),
        ("Cauchy identity", || vec![c11()]),
        ("Green identity", || vec![c12()]),
        ("sampler cross-validation", || vec![c13()]),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        for o in run() {
            let tag = if o.pass { "PASS" } else { "FAIL" };
            let note = if o.asserted { "" } else { " [reported, not asserted]" };
            println!("C{:<2} {tag} {name}: {} ({:.1?}){note}", o.id, o.detail, t.elapsed());
            if o.asserted && !o.pass {
                failed.push(o.id);
            }
        }
    }
    assert!(failed.is_empty(), "asserted criteria failed: {failed:?}");
}
