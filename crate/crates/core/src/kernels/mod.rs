//! Deterministic, seedable numerical primitives.

pub mod dirichlet;
pub mod rng;
pub mod special;

pub use dirichlet::{sample_dirichlet, DirichletParams, DirichletSampler};
pub use rng::RngStream;
pub use special::{ln_beta, ln_gamma, reg_inc_beta, student_t_cdf};
