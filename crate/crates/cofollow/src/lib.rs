//! File formats, configuration, parallel drivers and the command-line
//! pipeline around `cofollow-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod io;
pub mod parallel;
pub mod pipeline;

pub use config::PipelineConfig;
pub use error::{Error, ErrorKind, Result};
pub use pipeline::{Pipeline, Step};
