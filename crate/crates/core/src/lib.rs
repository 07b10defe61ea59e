//! Alternating-direction Lagrangian methods for structured nonconvex problems
//! `min f(x) + g(z)  s.t.  Ax + Bz = c, x ∈ X, z ∈ Z`.
//!
//! The crate is `no_std` with `alloc`. File formats, the command line and the
//! thread-pool executor live in the companion `adlm` crate.
#![no_std]

extern crate alloc;

pub mod algorithms;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod localization;
pub mod oracle;
pub mod problem;
pub mod sampling;
pub mod subsolvers;

pub use error::{Error, Result};
