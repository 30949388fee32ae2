//! Dynamic quantization for remote state estimation of continuous-time
//! linear systems.
//!
//! A local Luenberger observer tracks the plant, and its estimate is
//! sampled every `T` seconds, quantized with a uniform `N`-level quantizer
//! over a moving hyperrectangular region, and sent to a remote
//! reconstructor. Two update laws move the region between transmissions:
//! a set-based law that propagates a box through the exact flow, and a
//! norm-based law that only uses `|A|` and keeps a scalar range.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod error;
pub mod numerics;
pub mod observer;
pub mod plant;
pub mod quantizer;
pub mod reachability;
pub mod schemes;
pub mod sets;
pub mod signals;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
