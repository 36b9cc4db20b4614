use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::point::{Point2, Quadrant};
use super::polygon::{row_crossings, BoundingBox, PolygonMask};
use crate::error::{Error, Result};

/// Half-open run of pixel columns within one raster row.
pub type Span = Range<usize>;

/// Placement of a pixel grid in world coordinates.
///
/// Pixel `(i, j)` covers `[ox + i·s, ox + (i+1)·s] × [oy + j·s, oy + (j+1)·s]`
/// and is sampled at its center. Row `j` grows upwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterFrame {
    pub origin: Point2,
    pub pixel: f64,
    pub width: usize,
    pub height: usize,
}

impl RasterFrame {
    /// Unit pixels anchored at the world origin.
    pub fn unit(width: usize, height: usize) -> Self {
        Self {
            origin: Point2::ORIGIN,
            pixel: 1.0,
            width,
            height,
        }
    }

    /// Frame whose long side spans `bbox` with `long_side` pixels, padded by
    /// `margin` pixels on every side.
    pub fn fit(bbox: &BoundingBox, long_side: usize, margin: usize) -> Result<Self> {
        let extent = bbox.width().max(bbox.height());
        if long_side == 0 {
            return Err(Error::InvalidArgument("raster long side must be >= 1".into()));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::DegenerateGeometry("bounding box has no extent".into()));
        }
        let pixel = extent / long_side as f64;
        let cols = ((bbox.width() / pixel).ceil() as usize).max(1);
        let rows = ((bbox.height() / pixel).ceil() as usize).max(1);
        let pad = margin as f64 * pixel;
        Ok(Self {
            origin: Point2::new(bbox.min.x - pad, bbox.min.y - pad),
            pixel,
            width: cols + 2 * margin,
            height: rows + 2 * margin,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn center_x(&self, i: usize) -> f64 {
        self.origin.x + (i as f64 + 0.5) * self.pixel
    }

    #[inline]
    pub fn center_y(&self, j: usize) -> f64 {
        self.origin.y + (j as f64 + 0.5) * self.pixel
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.center_x(i), self.center_y(j))
    }

    /// Pixel containing `p`, if any.
    pub fn pixel_at(&self, p: Point2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.pixel).floor();
        let fy = ((p.y - self.origin.y) / self.pixel).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Smallest column `i` in `0..=width` with `center_x(i) >= x`.
    pub(crate) fn first_col_at_or_after(&self, x: f64) -> usize {
        let est = ((x - self.origin.x) / self.pixel - 0.5).ceil();
        let mut k = if est.is_nan() || est <= 0.0 {
            0
        } else if est >= self.width as f64 {
            self.width
        } else {
            est as usize
        };
        while k > 0 && self.center_x(k - 1) >= x {
            k -= 1;
        }
        while k < self.width && self.center_x(k) < x {
            k += 1;
        }
        k
    }

    /// Smallest row `j` in `0..=height` with `center_y(j) >= y`.
    pub(crate) fn first_row_at_or_after(&self, y: f64) -> usize {
        let est = ((y - self.origin.y) / self.pixel - 0.5).ceil();
        let mut k = if est.is_nan() || est <= 0.0 {
            0
        } else if est >= self.height as f64 {
            self.height
        } else {
            est as usize
        };
        while k > 0 && self.center_y(k - 1) >= y {
            k -= 1;
        }
        while k < self.height && self.center_y(k) < y {
            k += 1;
        }
        k
    }
}

/// Even-odd scanline fill of a closed polyline, sampled at pixel centers.
///
/// Pixel `i` of row `j` is filled iff an odd number of edge crossings of the
/// row's center line lie strictly to the right of its center, which is the
/// same predicate as [`PolygonMask::contains`].
pub(crate) fn polygon_spans(vertices: &[Point2], frame: &RasterFrame) -> Vec<Vec<Span>> {
    let mut rows = vec![Vec::new(); frame.height];
    let Some(bb) = BoundingBox::of_points(vertices) else {
        return rows;
    };
    let j0 = frame.first_row_at_or_after(bb.min.y);
    let j1 = frame.first_row_at_or_after(bb.max.y);
    let mut crossings = Vec::new();
    for (j, row) in rows.iter_mut().enumerate().take(j1).skip(j0) {
        row_crossings(vertices, frame.center_y(j), &mut crossings);
        for pair in crossings.chunks_exact(2) {
            let lo = frame.first_col_at_or_after(pair[0]);
            let hi = frame.first_col_at_or_after(pair[1]);
            if lo < hi {
                row.push(lo..hi);
            }
        }
    }
    rows
}

/// Binary pixel grid placed in world coordinates by a [`RasterFrame`].
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    frame: RasterFrame,
    bits: Vec<bool>,
}

impl RasterMask {
    pub fn new(frame: RasterFrame, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "bits length {} != {}x{}",
                bits.len(),
                frame.width,
                frame.height
            )));
        }
        Ok(Self { frame, bits })
    }

    pub fn empty(frame: RasterFrame) -> Self {
        Self {
            bits: vec![false; frame.len()],
            frame,
        }
    }

    pub fn from_spans(frame: RasterFrame, rows: &[Vec<Span>]) -> Self {
        let mut mask = Self::empty(frame);
        for (j, row) in rows.iter().enumerate() {
            for span in row {
                let base = j * frame.width;
                mask.bits[base + span.start..base + span.end].fill(true);
            }
        }
        mask
    }

    pub fn frame(&self) -> &RasterFrame {
        &self.frame
    }

    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.frame.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[j * self.frame.width + i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(i, j)` in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.frame.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k % w, k / w))
    }

    /// Whether the pixel containing `p` is set.
    pub fn covers(&self, p: Point2) -> bool {
        self.frame.pixel_at(p).is_some_and(|(i, j)| self.get(i, j))
    }

    pub fn iou(&self, other: &RasterMask) -> Result<f64> {
        mask_iou(self, other)
    }
}

/// Rasterize on unit pixels anchored at the world origin.
pub fn rasterize(mask: &PolygonMask, width: usize, height: usize) -> Result<RasterMask> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!("raster size {width}x{height} must be >= 1x1")));
    }
    rasterize_in(mask, &RasterFrame::unit(width, height))
}

pub fn rasterize_in(mask: &PolygonMask, frame: &RasterFrame) -> Result<RasterMask> {
    if mask.len() < 3 {
        return Err(Error::DegenerateGeometry("polygon has fewer than 3 vertices".into()));
    }
    Ok(RasterMask::from_spans(*frame, &polygon_spans(mask.vertices(), frame)))
}

/// `|a ∩ b| / |a ∪ b|`, defined as 1 when both masks are empty.
pub fn mask_iou(a: &RasterMask, b: &RasterMask) -> Result<f64> {
    if a.frame.width != b.frame.width || a.frame.height != b.frame.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.frame.width, a.frame.height, b.frame.width, b.frame.height
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Mean of set-pixel centers, accumulated with exact integer sums.
pub fn mass_center(mask: &RasterMask) -> Result<Point2> {
    let (mut n, mut si, mut sj) = (0u64, 0u64, 0u64);
    for (i, j) in mask.iter_set() {
        n += 1;
        si += i as u64;
        sj += j as u64;
    }
    centroid_from_sums(&mask.frame, n, si, sj).ok_or(Error::EmptyMask)
}

pub(crate) fn centroid_from_sums(frame: &RasterFrame, n: u64, si: u64, sj: u64) -> Option<Point2> {
    if n == 0 {
        return None;
    }
    let n = n as f64;
    Some(Point2::new(
        frame.origin.x + (si as f64 / n + 0.5) * frame.pixel,
        frame.origin.y + (sj as f64 / n + 0.5) * frame.pixel,
    ))
}

/// Set pixels whose centers fall in quadrant `quadrant` around `origin`.
pub fn quadrant_clip(mask: &RasterMask, origin: Point2, quadrant: Quadrant) -> RasterMask {
    let frame = mask.frame;
    let mut out = RasterMask::empty(frame);
    for (i, j) in mask.iter_set() {
        let dx = frame.center_x(i) - origin.x;
        let dy = frame.center_y(j) - origin.y;
        if Quadrant::of(dx, dy) == quadrant {
            out.set(i, j, true);
        }
    }
    out
}
