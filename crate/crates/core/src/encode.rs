//! Ground-truth target generation.
//!
//! For every pixel that belongs to an object this produces the distance
//! labels (ray lengths), the structure centerness score and the four
//! auxiliary-center displacements a multi-point polar head is trained on.
//!
//! Structure centerness at an origin splits the object into four quadrants.
//! For each quadrant it casts rays from the quadrant's mass center, clips every
//! ray at the first partition axis it crosses, and compares the resulting
//! contour with the true quadrant region by IoU. The four IoUs are averaged.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{
    cast_rays, polygon_spans, unit_direction, ObjectMask, Point2, PolygonMask, Quadrant, RasterFrame, RayFan,
};
use crate::geom::object::{run_count, run_overlap};

/// Default long-side resolution of the per-object raster used for the
/// quadrant masks behind structure centerness and auxiliary targets.
pub const DEFAULT_OBJECT_RASTER: usize = 256;

/// `sqrt(min / max)` of the ray lengths; 1 for a perfectly central point.
pub fn polar_centerness(fan: &RayFan) -> f64 {
    let (lo, hi) = fan
        .lengths()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    (lo / hi).sqrt()
}

/// Per-quadrant displacement magnitudes from `origin` to the mass center of
/// the object part lying in that quadrant.
///
/// Magnitudes are stored componentwise as nonnegative values; the quadrant
/// carries the sign (Q1 `(+,+)`, Q2 `(−,+)`, Q3 `(−,−)`, Q4 `(+,−)`).
/// An empty quadrant yields `(0, 0)`.
pub fn aux_targets(obj: &ObjectMask, origin: Point2) -> Result<[Point2; 4]> {
    ensure_inside(obj, origin)?;
    let mut out = [Point2::ORIGIN; 4];
    for q in Quadrant::ALL {
        let runs = obj.quadrant_rows(origin, q);
        if let Some(c) = obj.quadrant_mass_center(&runs) {
            let d = c - origin;
            out[q as usize] = Point2::new(d.x.abs(), d.y.abs());
        }
    }
    Ok(out)
}

fn ensure_inside(obj: &ObjectMask, origin: Point2) -> Result<()> {
    origin.ensure_finite("origin")?;
    if obj.contains(origin) {
        Ok(())
    } else {
        Err(Error::OutsideObject { x: origin.x, y: origin.y })
    }
}

/// Axis-clipped ray contour of one quadrant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantContour {
    pub quadrant: Quadrant,
    /// Mass center of the quadrant part; the rays start here.
    pub center: Point2,
    /// Clipped ray lengths, slot order.
    pub lengths: Vec<f64>,
    /// Ray endpoints, slot order. May contain repeated points when rays are
    /// clipped to zero length.
    pub vertices: Vec<Point2>,
}

impl QuadrantContour {
    pub fn polygon(&self) -> Result<PolygonMask> {
        PolygonMask::new(self.vertices.clone())
    }
}

/// Contour of `n` rays from the quadrant mass center, each cast against the
/// whole object and cut at the first crossing of either axis through `origin`.
pub fn quadrant_contour(obj: &ObjectMask, origin: Point2, quadrant: Quadrant, n: usize) -> Result<QuadrantContour> {
    origin.ensure_finite("origin")?;
    let runs = obj.quadrant_rows(origin, quadrant);
    let center = obj
        .quadrant_mass_center(&runs)
        .ok_or(Error::EmptyQuadrant(quadrant.index()))?;
    clipped_contour(obj, origin, quadrant, center, n)
}

fn clipped_contour(
    obj: &ObjectMask,
    origin: Point2,
    quadrant: Quadrant,
    center: Point2,
    n: usize,
) -> Result<QuadrantContour> {
    let fan = cast_rays(obj.polygon(), center, n)?;
    let (sx, sy) = quadrant.signs();
    let mut lengths = Vec::with_capacity(n);
    let mut vertices = Vec::with_capacity(n);
    for (k, &full) in fan.lengths().iter().enumerate() {
        let u = unit_direction(k, n);
        let mut len = full;
        // a ray only crosses an axis when heading out of the quadrant
        if u.x * sx < 0.0 {
            len = len.min(((origin.x - center.x) / u.x).max(0.0));
        }
        if u.y * sy < 0.0 {
            len = len.min(((origin.y - center.y) / u.y).max(0.0));
        }
        lengths.push(len);
        vertices.push(center + u * len);
    }
    Ok(QuadrantContour {
        quadrant,
        center,
        lengths,
        vertices,
    })
}

/// Quadrant-averaged IoU between the clipped ray contours and the true
/// quadrant parts, evaluated on the object's raster.
///
/// An empty quadrant scores 1 (both representations are empty); a non-empty
/// quadrant whose contour collapses scores 0.
pub fn structure_centerness(obj: &ObjectMask, origin: Point2, n: usize) -> Result<f64> {
    ensure_inside(obj, origin)?;
    let frame = obj.frame();
    let mut total = 0.0;
    for q in Quadrant::ALL {
        let truth = obj.quadrant_rows(origin, q);
        let Some(center) = obj.quadrant_mass_center(&truth) else {
            total += 1.0;
            continue;
        };
        let contour = clipped_contour(obj, origin, q, center, n)?;
        let drawn = polygon_spans(&contour.vertices, frame);
        let inter = run_overlap(&drawn, &truth);
        let union = run_count(&drawn) + run_count(&truth) - inter;
        total += inter as f64 / union as f64;
    }
    Ok(total / 4.0)
}

/// A polygon instance with its class id, input to [`build_target_maps`].
#[derive(Debug, Clone)]
pub struct TargetInstance {
    pub polygon: PolygonMask,
    pub class_id: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct TargetOptions {
    pub n: usize,
    /// Sampling stride in image pixels; cell `(i, j)` is centered at
    /// `((i + 0.5)·stride, (j + 0.5)·stride)`.
    pub stride: usize,
    /// Long-side resolution of each object's raster.
    pub object_raster: usize,
}

impl Default for TargetOptions {
    fn default() -> Self {
        Self {
            n: 36,
            stride: 1,
            object_raster: DEFAULT_OBJECT_RASTER,
        }
    }
}

/// Targets of one cell inside an object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PixelTargets {
    /// Index into the instance list.
    pub instance: usize,
    pub class_id: u32,
    pub rays: RayFan,
    pub structure_centerness: f64,
    /// Displacement magnitudes for Q1..Q4.
    pub aux_disp: [Point2; 4],
}

/// Per-cell ground truth over an image grid. A cell is populated iff it is
/// inside some object.
#[derive(Debug, Clone)]
pub struct TargetMaps {
    pub width: usize,
    pub height: usize,
    pub n: usize,
    pub stride: usize,
    cells: Vec<Option<PixelTargets>>,
}

impl TargetMaps {
    pub fn frame(&self) -> RasterFrame {
        RasterFrame {
            origin: Point2::ORIGIN,
            pixel: self.stride as f64,
            width: self.width,
            height: self.height,
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        self.frame().center(i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&PixelTargets> {
        self.cells[j * self.width + i].as_ref()
    }

    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    pub fn inside_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Populated cells as `(i, j, targets)` in row-major order.
    pub fn iter_inside(&self) -> impl Iterator<Item = (usize, usize, &PixelTargets)> + '_ {
        let w = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(k, c)| c.as_ref().map(|t| (k % w, k / w, t)))
    }

    pub fn polar_centerness(&self, i: usize, j: usize) -> Option<f64> {
        self.get(i, j).map(|t| polar_centerness(&t.rays))
    }
}

/// Ground-truth maps for an image of `width × height` pixels.
///
/// Pixels covered by several instances belong to the one with the smallest
/// area. Cells are evaluated in parallel; each cell's result depends only on
/// its own center and owning instance.
pub fn build_target_maps(
    instances: &[TargetInstance],
    width: usize,
    height: usize,
    opts: &TargetOptions,
) -> Result<TargetMaps> {
    crate::geom::rays::check_ray_count(opts.n)?;
    if width == 0 || height == 0 || opts.stride == 0 {
        return Err(Error::InvalidArgument(format!(
            "image {width}x{height} with stride {} has no cells",
            opts.stride
        )));
    }
    let frame = RasterFrame {
        origin: Point2::ORIGIN,
        pixel: opts.stride as f64,
        width: width.div_ceil(opts.stride),
        height: height.div_ceil(opts.stride),
    };

    let mut order: Vec<usize> = (0..instances.len()).collect();
    // larger first so smaller instances overwrite; equal areas favour the lower index
    order.sort_by(|&a, &b| {
        let (aa, ab) = (instances[a].polygon.area().abs(), instances[b].polygon.area().abs());
        ab.total_cmp(&aa).then(b.cmp(&a))
    });
    let mut owner: Vec<Option<usize>> = vec![None; frame.len()];
    for &idx in &order {
        for (j, row) in polygon_spans(instances[idx].polygon.vertices(), &frame).iter().enumerate() {
            for span in row {
                for i in span.clone() {
                    owner[j * frame.width + i] = Some(idx);
                }
            }
        }
    }

    let objects = instances
        .iter()
        .map(|inst| ObjectMask::with_resolution(inst.polygon.clone(), opts.object_raster))
        .collect::<Result<Vec<_>>>()?;

    let cells = owner
        .par_iter()
        .enumerate()
        .map(|(k, owner)| {
            let Some(idx) = *owner else { return Ok(None) };
            let center = frame.center(k % frame.width, k / frame.width);
            pixel_targets(&objects[idx], idx, instances[idx].class_id, center, opts.n).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TargetMaps {
        width: frame.width,
        height: frame.height,
        n: opts.n,
        stride: opts.stride,
        cells,
    })
}

/// Targets at a single point of a single object; what [`build_target_maps`]
/// evaluates per cell.
pub fn pixel_targets(obj: &ObjectMask, instance: usize, class_id: u32, center: Point2, n: usize) -> Result<PixelTargets> {
    Ok(PixelTargets {
        instance,
        class_id,
        rays: cast_rays(obj.polygon(), center, n)?,
        structure_centerness: structure_centerness(obj, center, n)?,
        aux_disp: aux_targets(obj, center)?,
    })
}
