//! Library side of the `glt-schwarz` command: problem setup, the table
//! registry and the table runner.

pub mod config;
pub mod error;
pub mod problem;
pub mod registry;
pub mod table;
