//! Configuration, execution sessions and ablation studies for the
//! variational Poisson solver.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod session;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
