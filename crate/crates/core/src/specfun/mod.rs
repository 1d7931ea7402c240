//! Special functions used by the closed-form engine.

mod bessel;
mod charfn;

pub use bessel::{
    bessel_j, bessel_j_integer_sequence, bessel_order_limit, BesselTable, HalfIntOrder,
};
pub use charfn::{char_fn, AngularFamily, AngularSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {0} is not finite")]
    NonFiniteArgument(f64),
    #[error("J_{order}({x}) is outside the supported domain")]
    Domain { order: HalfIntOrder, x: f64 },
    #[error("J_{order}({x}) overflows f64")]
    Overflow { order: HalfIntOrder, x: f64 },
    #[error("{0:?} angles have no characteristic-function form")]
    UnsupportedFamily(AngularFamily),
    #[error("invalid angular spec: {0}")]
    InvalidSpec(String),
}

/// Controls where the closed-form series are cut.
///
/// Each summation window is the smallest symmetric range whose discarded
/// tail, bounded by the characteristic-function and Bessel envelopes, is
/// below `rel_tol` relative to the unit leading term. A window that would
/// need more than `max_order` terms on either side is clipped there and the
/// result is flagged as not converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub max_order: usize,
}

impl TruncationPolicy {
    pub const DEFAULT_MAX_ORDER: usize = 16_384;

    pub fn new(rel_tol: f64, max_order: usize) -> Result<Self, SpecFunError> {
        let p = Self { rel_tol, max_order };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(SpecFunError::InvalidSpec(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_order < 1 {
            return Err(SpecFunError::InvalidSpec("max_order must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_order: Self::DEFAULT_MAX_ORDER,
        }
    }
}
