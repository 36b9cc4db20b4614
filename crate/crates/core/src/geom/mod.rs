//! Exact and raster geometry primitives.
//!
//! Everything here works in the math convention: x grows to the right, y grows
//! upwards and angles are measured counter-clockwise from the +x axis.
//! Annotation data in image coordinates is flipped at ingestion.

pub(crate) mod object;
mod point;
mod polygon;
mod raster;
pub(crate) mod rays;

pub use object::ObjectMask;
pub use point::{Point2, Quadrant};
pub use polygon::{BoundingBox, PolygonMask};
pub use raster::{mask_iou, mass_center, quadrant_clip, rasterize, rasterize_in, RasterFrame, RasterMask, Span};
pub use rays::{check_ray_count, cast_rays, unit_direction, RayFan, EPS_RAY};

pub(crate) use raster::polygon_spans;
