//! File formats, reproducible run manifests, a thread-pool node executor and
//! the `adlm` command line on top of [`adlm_core`].

pub mod cli;
pub mod error;
pub mod executor;
pub mod manifest;
pub mod network_file;
pub mod problem_file;
pub mod summary;
pub mod trace_csv;

pub use error::{Error, Result};
