//! File formats, CLI, stimulus batch, ratings analysis and the live
//! steering service built on `retropop-core`.

pub use retropop_core as core;

pub mod analysis;
pub mod batch;
pub mod cli;
pub mod config;
pub mod error;
pub mod service;
pub mod smf;
pub mod trajectory;
pub mod wire;

pub use error::Error;
