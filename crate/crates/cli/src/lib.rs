//! Library side of the `bisimlab` command-line tool: the LTSP file format
//! and the commands behind each subcommand.

pub mod commands;
pub mod ltsp;
