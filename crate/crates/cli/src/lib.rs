//! Command-line front end for `lrmf-core`: matrix and image input,
//! grayscale quantization, a synthetic benchmark and run reports.

pub mod bench;
pub mod error;
pub mod io;
pub mod quantize;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
