//! Command-line front end for the productform library: graph documents,
//! analysis and verification reports, oracles and DOT export.

pub mod commands;
pub mod document;
pub mod dot;
pub mod error;

pub use commands::{FamilyParams, OracleMode, Report};
pub use document::{GraphDocument, LoadedChain};
pub use error::{CliError, Result};
