//! File formats, run plumbing and experiment recipes behind the `holo-isac`
//! command-line tool.

pub mod files;
pub mod output;
pub mod recipes;
pub mod run;
pub mod sweep;
