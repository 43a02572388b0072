//! Wildfire detection on satellite-style imagery and fuzzy cognitive map
//! scenario forecasting.
//!
//! The crate is organised around four pieces:
//!
//! * [`nn`]: a from-scratch convolutional classifier (conv, max-pool,
//!   flatten, dense relu, dense sigmoid) trained by backpropagation on
//!   binary cross-entropy.
//! * [`localize`]: brightest-pixel bounding boxes for images classified
//!   as fire.
//! * [`fcm`]: fuzzy cognitive maps with Kosko-style activation dynamics
//!   and convergence classification.
//! * [`pipeline`]: turns detection logs into a wildfire-frequency
//!   activation and runs it through a map as a what-if scenario.
//!
//! File formats (PGM images, model JSON, map JSON) live in [`io`].

pub mod error;
pub mod fcm;
pub mod io;
pub mod localize;
pub mod nn;
pub mod pipeline;

pub use error::{Error, Result};
