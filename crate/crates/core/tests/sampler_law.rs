use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rnm::fieldops::{Expr, TestFunction};
use rnm::kernel::{build_kernel, default_kernel_rule, delta_n, one_point, KernelModel};
use rnm::numerics::RadialRule;
use rnm::potential::{solve_droplet, Potential};
use rnm::sampler::*;
use rnm::stats::linear_statistic;

fn ginibre_kernel(n: usize) -> KernelModel {
    let p = Potential::ginibre();
    build_kernel(&p, n, None, &default_kernel_rule(&p, n, None).unwrap()).unwrap()
}

#[test]
fn dpp_one_point_density_and_confinement() {
    let n = 16;
    let km = ginibre_kernel(n);
    let samples = DppSampler::new(&km).unwrap().sample_many(3, 500).unwrap();
    let edges: Vec<f64> = (0..=10).map(|i| 0.12 * i as f64).collect();
    let mut counts = vec![0usize; edges.len()];
    let total = (samples.len() * n) as f64;
    for cfg in &samples {
        assert_eq!(cfg.n(), n);
        for z in &cfg.points {
            assert!(z.re.is_finite() && z.im.is_finite());
            let bin = edges.windows(2).position(|w| z.norm() < w[1]).unwrap_or(edges.len() - 1);
            counts[bin] += 1;
        }
    }
    let mut expected: Vec<f64> = edges
        .windows(2)
        .map(|w| {
            let rule = RadialRule::gauss_legendre(w[0], w[1], 24).unwrap();
            rule.integrate(|r| 2.0 * PI * r * one_point(&km, Complex64::new(r, 0.0)))
        })
        .collect();
    expected.push(1.0 - expected.iter().sum::<f64>());
    let l1: f64 = counts.iter().zip(&expected).map(|(&c, p)| (c as f64 / total - p).abs()).sum();
    assert!(l1 <= 0.05, "L1 distance {l1}");

    let d = solve_droplet(km.potential()).unwrap();
    let bound = d.radius() + 5.0 * delta_n(n);
    let inside = samples.iter().flat_map(|c| &c.points).filter(|z| z.norm() <= bound).count();
    assert!(inside as f64 >= 0.99 * total);
}

/// Exact draws of `|λ₁ − λ₂|` for the two-point Ginibre gas, density
/// `∝ |λ₁ − λ₂|² e^{−2(|λ₁|² + |λ₂|²)}`. Proposals are iid with density
/// `∝ e^{−|z|²}`; the acceptance ratio `|λ₁ − λ₂|² e^{−(|λ₁|² + |λ₂|²)}` is
/// at most `2/e`.
fn two_point_gaps(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        Complex64::new(x, y) / 2f64.sqrt()
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let ratio = (a - b).norm_sqr() * (-(a.norm_sqr() + b.norm_sqr())).exp() / (2.0 / std::f64::consts::E);
        if rng.random::<f64>() < ratio {
            out.push((a - b).norm());
        }
    }
    out
}

fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn mcmc_two_point_gap_matches_rejection_oracle() {
    let p = Potential::ginibre();
    let cc = ChainConfig::new(51_000, 1_000, 5, 21);
    let mut chain: Vec<f64> = sample_mcmc(&p, None, 2, &cc).unwrap().map(|c| (c.points[0] - c.points[1]).norm()).collect();
    assert_eq!(chain.len(), 10_000);
    let mut exact = two_point_gaps(10_000, 22);
    let ks = ks_two_sample(&mut chain, &mut exact);
    assert!(ks <= 0.05, "KS {ks}");
}

#[test]
fn dpp_two_point_gap_matches_rejection_oracle() {
    let km = ginibre_kernel(2);
    let mut dpp: Vec<f64> =
        DppSampler::new(&km).unwrap().sample_many(5, 10_000).unwrap().iter().map(|c| (c.points[0] - c.points[1]).norm()).collect();
    let mut exact = two_point_gaps(10_000, 6);
    let ks = ks_two_sample(&mut dpp, &mut exact);
    assert!(ks <= 0.05, "KS {ks}");
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64)
}

#[test]
fn split_chain_energy_diagnostic() {
    let p = Potential::ginibre();
    let n = 16;
    let cc = ChainConfig::new(10_000, 1_000, 10, 4);
    let mut halves = Vec::new();
    for stream in 0..4 {
        let energies: Vec<f64> = McmcChain::new(&p, None, n, &cc, stream).unwrap().map(|c| hamiltonian(&p, None, &c.points)).collect();
        let (a, b) = energies.split_at(energies.len() / 2);
        halves.push(a.to_vec());
        halves.push(b.to_vec());
    }
    // Gelman–Rubin on split chains.
    let len = halves[0].len() as f64;
    let stats: Vec<(f64, f64)> = halves.iter().map(|h| mean_var(h)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let (_, between) = mean_var(&means);
    let within = stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64;
    let pooled = (len - 1.0) / len * within + between;
    let r_hat = (pooled / within).sqrt();
    assert!(r_hat < 1.1, "R-hat {r_hat}");

    // First and second halves of the pooled run agree within 3 batch-mean SEs.
    let batch = |xs: &[Vec<f64>]| -> (f64, f64) {
        let bm: Vec<f64> = xs.iter().flat_map(|h| h.chunks(h.len() / 5).map(|c| c.iter().sum::<f64>() / c.len() as f64)).collect();
        let (m, v) = mean_var(&bm);
        (m, (v / bm.len() as f64).sqrt())
    };
    let first: Vec<Vec<f64>> = halves.iter().step_by(2).cloned().collect();
    let second: Vec<Vec<f64>> = halves.iter().skip(1).step_by(2).cloned().collect();
    let (m1, s1) = batch(&first);
    let (m2, s2) = batch(&second);
    assert!((m1 - m2).abs() <= 3.0 * (s1 * s1 + s2 * s2).sqrt(), "{m1} ± {s1} vs {m2} ± {s2}");
}

#[test]
fn mcmc_warns_on_poor_tuning() {
    let p = Potential::ginibre();
    let mut cc = ChainConfig::new(60, 10, 10, 1);
    cc.proposal = Some(10.0);
    let last = sample_mcmc(&p, None, 8, &cc).unwrap().last().unwrap();
    assert!(last.acceptance_rate.unwrap() < ACCEPTANCE_BAND.0);
    assert!(last.warning.is_some());
    let tuned = sample_mcmc(&p, None, 8, &ChainConfig::new(60, 10, 10, 1)).unwrap().last().unwrap();
    assert!(tuned.warning.is_none(), "{:?}", tuned.acceptance_rate);
}

#[test]
fn jsonl_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let km = ginibre_kernel(6);
    let mut configs = DppSampler::new(&km).unwrap().sample_many(9, 60).unwrap();
    let cc = ChainConfig::new(50, 10, 1, 9);
    configs.extend(sample_mcmc(&Potential::ginibre(), None, 5, &cc).unwrap());
    assert_eq!(configs.len(), 100);
    let path = dir.path().join("configs.jsonl");
    persist_configurations(&path, &configs).unwrap();
    let back = load_configurations(&path).unwrap();
    assert_eq!(back, configs);

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert!(load_configurations(&empty).unwrap().is_empty());

    let bad = dir.path().join("bad.jsonl");
    let line = configs[0].to_json().to_string().replacen("\"n\":6", "\"n\":7", 1);
    std::fs::write(&bad, format!("{}\n{line}\n", configs[1].to_json())).unwrap();
    let err = load_configurations(&bad).unwrap_err();
    assert_eq!(err.code(), "E_SCHEMA");
    assert!(err.to_string().contains("line 2"), "{err}");
}

fn arb_points() -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.5..1.5f64, -1.5..1.5f64), 2..12)
        .prop_map(|v| v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// With a symmetric proposal the Metropolis rule satisfies
    /// `e^{−H(x)} a(x → y) = e^{−H(y)} a(y → x)`: the reverse move (the
    /// same step with its sign flipped) sees exactly the opposite energy change.
    #[test]
    fn metropolis_detailed_balance(pts in arb_points(), j in 0usize..12, dx in -0.3..0.3f64, dy in -0.3..0.3f64) {
        let p = Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap();
        let j = j % pts.len();
        let mut moved = pts.clone();
        moved[j] += Complex64::new(dx, dy);
        let hx = hamiltonian(&p, None, &pts);
        let hy = hamiltonian(&p, None, &moved);
        prop_assume!(hx.is_finite() && hy.is_finite());
        let forward = (-(hy - hx)).exp().min(1.0);
        let backward = (-(hx - hy)).exp().min(1.0);
        let lhs = -hx + forward.ln();
        let rhs = -hy + backward.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + hx.abs()));
    }

    #[test]
    fn reversing_point_order_changes_no_statistic(pts in arb_points()) {
        let p = Potential::ginibre();
        let h = TestFunction::new(Expr::x() * Expr::cutoff(1.5, 2.5));
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert_eq!(hamiltonian(&p, Some(&h), &pts), hamiltonian(&p, Some(&h), &rev));
        let cfg = |points: Vec<Complex64>| Configuration {
            points,
            potential_id: p.id(),
            perturbation_id: None,
            tag: SamplerTag::Dpp,
            seed: 0,
            stream: 0,
            sweep: None,
            acceptance_rate: None,
            warning: None,
        };
        prop_assert_eq!(linear_statistic(&cfg(pts), &h), linear_statistic(&cfg(rev), &h));
    }
}
