//! Test functions and the potential-theoretic operations built on them:
//! harmonic extension, Neumann jump, Dirichlet forms, limit functionals and
//! Cauchy transforms.

mod boundary;
mod cauchy;
mod limits;
mod testfn;

pub use boundary::{
    boundary_fourier, boundary_fourier_cached, dirichlet_form, dirichlet_form_with, harmonic_extension, mt3_shift,
    neumann_jump, neumann_jump_samples, variance_limit, BoundaryFourier, FieldOptions, HarmonicExtension,
};
pub use cauchy::{
    cauchy_transform_quadrature, cauchy_transform_sigma, dn_field, dn_field_general, DnProfile, DnValue,
};
pub(crate) use boundary::droplet_rule;
pub(crate) use cauchy::chord;
pub use limits::{nu_limit, nu_limit_with, NuLimit};
pub use testfn::{Expr, TestFunction, VectorField};
