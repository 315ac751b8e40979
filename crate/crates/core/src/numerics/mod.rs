//! Numerical substrate shared by every other module: quadrature, dual
//! numbers, circle FFTs, Cholesky factorization and root finding.

pub mod dual;
pub mod fft;
pub mod linalg;
pub mod quadrature;
pub mod roots;
pub mod sum;

pub use dual::{coordinates, Dual2, ScalarField};
pub use fft::{circle_fft, inverse_circle_fft, CircleSpectrum};
pub use linalg::{hermitian_factor, CMatrix, LowerFactor};
pub use quadrature::{integrate, integrate_complex, make_polar_quadrature, Domain, PolarGrid, QuadratureRule, RadialRule};
pub use roots::find_root;
pub use sum::{log_sum_exp, pairwise_sum, pairwise_sum_complex, Compensated, CompensatedComplex};
