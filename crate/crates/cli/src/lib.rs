//! IO companion to `prefcycles-core`: versioned JSON file formats and the
//! command implementations behind the `prefcycles` binary.

pub mod commands;
pub mod formats;
