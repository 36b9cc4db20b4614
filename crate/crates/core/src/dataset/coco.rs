//! COCO annotation subset: images plus polygon segmentations.
//!
//! Pixel coordinates in the file have y pointing down. On ingest every
//! polygon is flipped into math convention with `y' = height - y`, using the
//! height of the referenced image.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, PolygonMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoFile {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<CocoCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub file_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: Option<u64>,
    #[serde(default)]
    pub category_id: u32,
    pub segmentation: Segmentation,
    #[serde(default)]
    pub iscrowd: u8,
}

/// Polygon lists are ingested; run-length encoded masks are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle(serde_json::Value),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageInfo {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    pub file_name: String,
}

/// One polygon of an annotation, in math convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonRecord {
    pub instance_id: u64,
    /// Index of this polygon within its annotation.
    pub part: usize,
    pub image_id: u64,
    pub category_id: u32,
    pub polygon: PolygonMask,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnnotationSet {
    pub images: Vec<ImageInfo>,
    pub polygons: Vec<PolygonRecord>,
    /// Annotations without polygon segmentations.
    pub skipped: usize,
}

impl AnnotationSet {
    pub fn image(&self, id: u64) -> Option<&ImageInfo> {
        self.images.iter().find(|im| im.id == id)
    }

    pub fn instance(&self, id: u64) -> impl Iterator<Item = &PolygonRecord> {
        self.polygons.iter().filter(move |r| r.instance_id == id)
    }

    pub fn instance_count(&self) -> usize {
        let mut ids: Vec<u64> = self.polygons.iter().map(|r| r.instance_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Polygons grouped by image id, in ascending id order.
    pub fn by_image(&self) -> BTreeMap<u64, Vec<&PolygonRecord>> {
        let mut out: BTreeMap<u64, Vec<&PolygonRecord>> = BTreeMap::new();
        for r in &self.polygons {
            out.entry(r.image_id).or_default().push(r);
        }
        out
    }
}

pub fn ingest_path(path: impl AsRef<Path>) -> Result<AnnotationSet> {
    let text = std::fs::read_to_string(path)?;
    ingest_str(&text)
}

pub fn ingest_str(text: &str) -> Result<AnnotationSet> {
    let file: CocoFile = serde_json::from_str(text)?;
    from_coco(&file)
}

pub fn from_coco(file: &CocoFile) -> Result<AnnotationSet> {
    let images: Vec<ImageInfo> = file
        .images
        .iter()
        .map(|im| ImageInfo {
            id: im.id,
            width: im.width,
            height: im.height,
            file_name: im.file_name.clone(),
        })
        .collect();
    let heights: BTreeMap<u64, f64> = images.iter().map(|im| (im.id, f64::from(im.height))).collect();

    let mut set = AnnotationSet {
        images,
        ..Default::default()
    };
    for ann in &file.annotations {
        let image_id = ann
            .image_id
            .ok_or_else(|| Error::Schema(format!("annotation {} has no image_id", ann.id)))?;
        let height = *heights
            .get(&image_id)
            .ok_or_else(|| Error::Schema(format!("annotation {} references unknown image {image_id}", ann.id)))?;
        let Segmentation::Polygons(parts) = &ann.segmentation else {
            set.skipped += 1;
            continue;
        };
        for (part, coords) in parts.iter().enumerate() {
            if coords.len() % 2 != 0 || coords.len() < 6 {
                return Err(Error::Schema(format!(
                    "annotation {} polygon {part} has {} coordinates; expected an even count of at least 6",
                    ann.id,
                    coords.len()
                )));
            }
            let vertices: Vec<Point2> = coords
                .chunks_exact(2)
                .map(|xy| Point2::new(xy[0], height - xy[1]))
                .collect();
            let polygon = PolygonMask::new(vertices)
                .map_err(|e| Error::Schema(format!("annotation {} polygon {part}: {e}", ann.id)))?;
            set.polygons.push(PolygonRecord {
                instance_id: ann.id,
                part,
                image_id,
                category_id: ann.category_id,
                polygon,
            });
        }
    }
    Ok(set)
}

/// Inverse of ingest: polygons back in pixel convention, one annotation per
/// instance id.
pub fn to_coco(set: &AnnotationSet) -> CocoFile {
    let heights: BTreeMap<u64, f64> = set.images.iter().map(|im| (im.id, f64::from(im.height))).collect();
    let mut annotations: Vec<CocoAnnotation> = Vec::new();
    for r in &set.polygons {
        let h = heights.get(&r.image_id).copied().unwrap_or(0.0);
        let coords: Vec<f64> = r.polygon.vertices().iter().flat_map(|p| [p.x, h - p.y]).collect();
        match annotations.iter_mut().find(|a| a.id == r.instance_id) {
            Some(CocoAnnotation {
                segmentation: Segmentation::Polygons(parts),
                ..
            }) => parts.push(coords),
            _ => annotations.push(CocoAnnotation {
                id: r.instance_id,
                image_id: Some(r.image_id),
                category_id: r.category_id,
                segmentation: Segmentation::Polygons(vec![coords]),
                iscrowd: 0,
            }),
        }
    }
    CocoFile {
        images: set
            .images
            .iter()
            .map(|im| CocoImage {
                id: im.id,
                width: im.width,
                height: im.height,
                file_name: im.file_name.clone(),
            })
            .collect(),
        annotations,
        categories: Vec::new(),
    }
}
