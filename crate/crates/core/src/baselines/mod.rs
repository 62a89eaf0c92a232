//! Robin-transmission baseline and exact oracles.

pub mod checks;
pub mod oned;
pub mod robin;
pub mod strip;
