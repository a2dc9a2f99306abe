//! File formats, the T-Drive reader and the command-line driver for
//! [`relaysched_core`].

pub mod bench;
pub mod cli;
pub mod deploy;
pub mod error;
pub mod report;
pub mod scenario_file;
pub mod tdrive;

pub use error::{Error, Result};
pub use relaysched_core;
