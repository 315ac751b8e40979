//! Random normal matrix ensembles and planar Coulomb gases at β = 2.
//!
//! The main entry points are [`potential::Potential`], [`kernel::build_kernel`],
//! [`sampler::sample_dpp`] and the statistics in [`stats`].

pub mod error;
pub mod fieldops;
pub mod kernel;
pub mod numerics;
pub mod potential;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/droplet.md")]
mod book_droplet {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/kernel.md")]
mod book_kernel {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sampling.md")]
mod book_sampling {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/test-functions.md")]
mod book_test_functions {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fluctuations.md")]
mod book_fluctuations {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/ward.md")]
mod book_ward {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/formats.md")]
mod book_formats {}
