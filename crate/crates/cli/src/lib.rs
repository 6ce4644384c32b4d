//! Library surface of the command-line front end, split out so the
//! integration suite can drive runs in-process.

pub mod config;
pub mod run;
pub mod svg;
