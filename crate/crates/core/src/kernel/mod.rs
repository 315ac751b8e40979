//! Exact weighted reproducing kernels `𝐊_n` and their leading-order
//! approximations.

mod approx;
mod model;

pub use approx::{
    berezin, delta_n, eval_approx_kernel, heat_kernel, heat_rate, heat_tail_mass, ApproxKernel,
};
pub use model::{
    build_kernel, build_kernel_with_path, correlation2, default_kernel_rule, eval_weighted_kernel, kernel_rule,
    one_point, perturbation_sup, BasisPath, KernelArtifact, KernelModel, QuadratureInfo, RowTable,
    DEFAULT_ANGULAR_NODES, DEFAULT_RADIAL_NODES,
};
