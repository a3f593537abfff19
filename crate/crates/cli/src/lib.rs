//! Front ends for exemplar: the `exemplar` command and its HTTP service.

pub mod cli;
pub mod render;
pub mod server;

pub use cli::run;
