//! Files, command line and HTTP service around `roster-core`.

pub mod bench;
pub mod cli;
pub mod clock;
pub mod formats;
pub mod jobs;
pub mod service;
