//! Run configuration, reproducible inputs, benchmark tables and field files.

pub mod config;
pub mod fieldio;
pub mod media;
pub mod prng;
pub mod suite;
