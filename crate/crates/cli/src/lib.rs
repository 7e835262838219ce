//! Batch runner plumbing: operator-spec files, subcommands and report emission.

pub mod commands;
pub mod report;
pub mod spec;
