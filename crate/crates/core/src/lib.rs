#![cfg_attr(not(test), no_std)]

//! Canonical-ensemble statistics of noninteracting bosons on a finite
//! spectrum, in exact rational or log-domain floating-point arithmetic.

extern crate alloc;

pub mod compositions;
pub mod error;
pub mod limits;
pub mod numerics;
pub mod occupancy;
pub mod partition;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
