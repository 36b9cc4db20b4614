//! Multi-point polar instance masks.
//!
//! An object is described by a main polar center with `n` rays plus one
//! auxiliary center with its own `n` rays in each quadrant around it. The
//! crate covers the whole round trip:
//!
//! - [`geom`]: polygons, rasters, ray casting and mass centers;
//! - [`encode`]: per-pixel training targets (distance labels, structure
//!   centerness, auxiliary displacements);
//! - [`assembly`]: stitching five fans into one contour, and oracle
//!   reconstructions from ground truth;
//! - [`loss`]: the training losses and their gradients;
//! - [`select`]: decoding dense head outputs into masks;
//! - [`dataset`]: COCO ingest, synthetic fixtures, studies and SVG output.
//!
//! Coordinates use the math convention: x to the right, y up, angles
//! counter-clockwise from +x. Slot `k` of an `n`-ray fan points at `2πk/n`.

pub mod assembly;
pub mod cli;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod geom;
pub mod loss;
pub mod numeric;
pub mod select;

pub use error::{Error, Result};
