//! Linear statistics, fluctuation estimators, Ward-identity checks and CLT
//! diagnostics.

mod diagnostics;
mod linear;
mod mc;
mod report;
mod ward;

pub use diagnostics::{bulk_pairs, bulk_kernel_discrepancy, berezin_heat_discrepancy, berezin_tail, exterior_bound_constant, BulkDiscrepancy};
pub use linear::{
    kernel_covariance, kernel_variance, linear_statistic, nu_n_kernel, nu_n_kernel_with, nu_n_pairing, sigma_pairing,
    KernelQuadrature,
};
pub use mc::{
    clt_from_values, clt_test, ks_statistic_normal, mc_fluctuation, CltReport, McFluctuation, MIN_CLT_SAMPLES,
    MIN_FLUCTUATION_SAMPLES,
};
pub use report::{reports_to_csv, reports_to_json, FluctuationReport, Method};
pub use ward::{
    ward_check_kernel, ward_decomposition_check, ward_decomposition_check_with, ward_rule, DecompositionOptions,
    DecompositionReport, WardReport,
};
