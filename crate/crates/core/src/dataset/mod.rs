//! Annotation ingest, synthetic fixtures, reconstruction studies and SVG
//! rendering.

pub mod coco;
pub mod fixtures;
pub mod render;
pub mod study;

pub use coco::{ingest_path, ingest_str, AnnotationSet, ImageInfo, PolygonRecord};
pub use fixtures::{gen_fixtures, ShapeKind, Suite};
pub use render::{render_instance, RenderOptions};
pub use study::{run_study, StudyOptions, StudyReport, StudyRow};
