//! Random bundles, planted duplicates and brute-force oracles.
//!
//! Nothing here is used by the production crate. The oracles share only
//! the graph types with it.

pub mod fixtures;
pub mod generate;
pub mod oracle;
pub mod plant;
pub mod suites;

pub use generate::{generate, RandomBundleSpec};
pub use oracle::{oracle_simtap, oracle_simtap_beta, oracle_structure_error, OracleError};
pub use plant::{plant_duplicates, PlantError, PlantMode, PlantedPair};
