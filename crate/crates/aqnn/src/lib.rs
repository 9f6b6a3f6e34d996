//! File formats, command-line tools and the streaming service around
//! [`aqnn_core`].

pub mod bench;
pub mod cli;
pub mod csv_io;
mod error;
pub mod history;
pub mod model_file;
pub mod pipeline;
pub mod report;
pub mod serve;

pub use aqnn_core;
pub use error::{AppError, Result};
