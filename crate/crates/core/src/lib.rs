//! Favorable-propagation analysis for massive-MIMO ray-based channels with
//! user cluster sharing.

pub mod channel;
pub mod cli;
pub mod closedform;
pub mod fpmetrics;
pub mod geometry;
pub mod rng;
pub mod specfun;
pub mod sum;
