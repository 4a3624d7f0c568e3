//! Models for a two-tier vertical heterogeneous network: four terrestrial
//! small cells plus one stratospheric super macro base station (HAPS).
//!
//! The crate is `no_std` (with `alloc`) and holds everything that does not
//! touch the filesystem: geometry and mobility, the HAPS and terrestrial
//! path-loss chains, SINR and Shannon rate, the EARTH power model, greedy
//! user association, exhaustive on/off policy search and the seeded
//! per-slot simulation loop. File formats, sweeps and the command line live
//! in the `hapsim` crate.

#![no_std]
#![deny(unused_must_use, rust_2018_idioms)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod association;
pub mod error;
pub mod geometry;
pub mod power;
pub mod propagation;
pub mod radio;
pub mod reporting;
pub mod rng;
pub mod simulation;
pub mod switching;

pub use error::{Error, Result};

/// Converts a dB-domain power (dBm or dB) to linear scale (mW or ratio).
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Converts a linear power (mW or ratio) to dB.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}
