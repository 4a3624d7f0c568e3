//! File formats, parameter sweeps and the command-line front end for
//! [`hapsim_core`].

pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;
