//! Eigenvalue configurations: exact determinantal sampling, Metropolis
//! sampling of the Coulomb gas, and JSONL persistence.

mod config;
mod dpp;
mod mcmc;

pub use config::{
    load_configurations, persist_configurations, write_configurations, Configuration, ConfigurationReader, SamplerTag,
};
pub use dpp::{sample_dpp, stream_rng, DppSampler, MAX_PROPOSALS_PER_POINT};
pub use mcmc::{hamiltonian, sample_mcmc, ChainConfig, McmcChain, ACCEPTANCE_BAND};

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::fieldops::{Expr, TestFunction};
    use crate::kernel::{build_kernel, default_kernel_rule};
    use crate::potential::Potential;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn hamiltonian_examples() {
        let g = Potential::ginibre();
        assert_eq!(hamiltonian(&g, None, &[c(0.0, 0.0)]), 0.0);
        let q = Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap();
        let a: f64 = 0.7;
        let want = -2.0 * (2.0 * a).ln() + 8.0 * q.value(c(a, 0.0));
        assert!((hamiltonian(&q, None, &[c(-a, 0.0), c(a, 0.0)]) - want).abs() < 1e-14);
        assert_eq!(hamiltonian(&g, None, &[c(0.1, 0.2), c(0.1, 0.2)]), f64::INFINITY);
        let pts = [c(0.1, 0.2), c(-0.5, 0.3), c(0.9, -0.4), c(0.0, -0.7)];
        let mut rev = pts;
        rev.reverse();
        let h = TestFunction::new(Expr::x() * Expr::cutoff(1.0, 2.0));
        assert_eq!(hamiltonian(&g, Some(&h), &pts), hamiltonian(&g, Some(&h), &rev));
    }

    #[test]
    fn energy_change_matches_hamiltonian() {
        let p = Potential::radial(&[(1, 0.5), (2, 0.025)]).unwrap();
        let h = TestFunction::new(Expr::y() * Expr::cutoff(1.0, 2.0));
        let cc = ChainConfig::new(10, 2, 1, 3);
        let chain = McmcChain::new(&p, Some(&h), 5, &cc, 0).unwrap();
        let before = hamiltonian(&p, Some(&h), chain.points());
        let z = c(0.2, -0.1);
        let mut moved = chain.points().to_vec();
        moved[2] = z;
        let zf = 2.0 * 5.0 * p.value(z) - 2.0 * h.value(z);
        let dh = chain.energy_change(2, z, zf);
        assert!((dh - (hamiltonian(&p, Some(&h), &moved) - before)).abs() < 1e-10);
    }

    #[test]
    fn chain_config_validation_and_output() {
        assert!(ChainConfig::new(10, 10, 1, 0).validate().is_err());
        assert!(ChainConfig::new(10, 2, 0, 0).validate().is_err());
        let mut cc = ChainConfig::new(40, 10, 3, 9);
        cc.proposal = Some(-1.0);
        assert_eq!(cc.validate().unwrap_err().code(), "E_PARAMETER");
        cc.proposal = None;
        assert_eq!(cc.proposal_scale(16), 0.25);
        let g = Potential::ginibre();
        let out: Vec<_> = sample_mcmc(&g, None, 8, &cc).unwrap().collect();
        assert_eq!(out.len(), 10);
        assert_eq!(out[0].sweep, Some(13));
        for cfg in &out {
            cfg.validate().unwrap();
            assert_eq!(cfg.n(), 8);
        }
        let again: Vec<_> = sample_mcmc(&g, None, 8, &cc).unwrap().collect();
        assert_eq!(out, again);
    }

    #[test]
    fn dpp_is_deterministic_and_finite() {
        let p = Potential::ginibre();
        let rule = default_kernel_rule(&p, 12, None).unwrap();
        let km = build_kernel(&p, 12, None, &rule).unwrap();
        let a = sample_dpp(&km, 42).unwrap();
        let b = sample_dpp(&km, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 12);
        assert!(a.points.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let s = DppSampler::new(&km).unwrap();
        assert_ne!(s.sample(42, 1).unwrap().points, a.points);
        let hermitian = Potential::hermitian(&[(1, 1, c(0.5, 0.0)), (2, 0, c(0.05, 0.0)), (0, 2, c(0.05, 0.0))]).unwrap();
        let hr = default_kernel_rule(&hermitian, 4, None).unwrap();
        let hk = build_kernel(&hermitian, 4, None, &hr).unwrap();
        assert_eq!(sample_dpp(&hk, 1).unwrap_err().code(), "E_UNSUPPORTED_POTENTIAL");
    }

    #[test]
    fn perturbed_dpp_runs() {
        let p = Potential::ginibre();
        let h = TestFunction::new(Expr::c(0.3) * Expr::x() * Expr::cutoff(1.5, 2.5));
        let rule = default_kernel_rule(&p, 6, Some(&h)).unwrap();
        let km = build_kernel(&p, 6, Some(&h), &rule).unwrap();
        let cfg = sample_dpp(&km, 5).unwrap();
        assert_eq!(cfg.n(), 6);
        assert_eq!(cfg.perturbation_id, Some(h.id()));
    }

    #[test]
    fn jsonl_roundtrip_and_errors() {
        let p = Potential::ginibre();
        let rule = default_kernel_rule(&p, 5, None).unwrap();
        let km = build_kernel(&p, 5, None, &rule).unwrap();
        let s = DppSampler::new(&km).unwrap();
        let mut configs = s.sample_many(7, 100).unwrap();
        configs.extend(sample_mcmc(&p, None, 5, &ChainConfig::new(12, 2, 5, 1)).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        persist_configurations(&path, &configs).unwrap();
        assert_eq!(load_configurations(&path).unwrap(), configs);

        std::fs::write(&path, "").unwrap();
        assert!(load_configurations(&path).unwrap().is_empty());

        let line = configs[0].to_json().to_string();
        std::fs::write(&path, format!("{line}\n{{not json\n")).unwrap();
        match load_configurations(&path).unwrap_err() {
            crate::Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        let bad = line.replacen("\"n\":5", "\"n\":6", 1);
        std::fs::write(&path, bad).unwrap();
        assert_eq!(load_configurations(&path).unwrap_err().code(), "E_SCHEMA");
    }
}
