use super::point::{Point2, Quadrant};
use super::polygon::PolygonMask;
use super::raster::{centroid_from_sums, polygon_spans, RasterFrame, RasterMask, Span};
use crate::error::Result;

/// Pixel margin added around an object's bounding box when it is rasterized.
const FRAME_MARGIN: usize = 2;

/// A ground-truth object: its exact contour plus a raster of it.
///
/// The polygon answers ray-casting queries (distance labels); the raster
/// answers area queries (quadrant masks, mass centers, IoU). Row runs are
/// kept alongside the bitmap so per-quadrant statistics cost O(rows).
#[derive(Debug, Clone)]
pub struct ObjectMask {
    polygon: PolygonMask,
    raster: RasterMask,
    rows: Vec<Vec<Span>>,
}

impl ObjectMask {
    pub fn new(polygon: PolygonMask, frame: RasterFrame) -> Self {
        let rows = polygon_spans(polygon.vertices(), &frame);
        let raster = RasterMask::from_spans(frame, &rows);
        Self { polygon, raster, rows }
    }

    /// Rasterize over the polygon's bounding box with `long_side` pixels
    /// along its longer side.
    pub fn with_resolution(polygon: PolygonMask, long_side: usize) -> Result<Self> {
        let frame = RasterFrame::fit(&polygon.bbox(), long_side, FRAME_MARGIN)?;
        Ok(Self::new(polygon, frame))
    }

    pub fn polygon(&self) -> &PolygonMask {
        &self.polygon
    }

    pub fn raster(&self) -> &RasterMask {
        &self.raster
    }

    pub fn frame(&self) -> &RasterFrame {
        self.raster.frame()
    }

    pub fn rows(&self) -> &[Vec<Span>] {
        &self.rows
    }

    /// Inside the polygon (even-odd) or on its boundary.
    pub fn contains(&self, p: Point2) -> bool {
        self.polygon.contains(p) || self.polygon.boundary_distance(p) <= 1e-9
    }

    pub fn area_px(&self) -> usize {
        self.rows.iter().flatten().map(|s| s.len()).sum()
    }

    /// Row runs of the object restricted to `quadrant` around `origin`,
    /// using the same tie rule as [`super::quadrant_clip`].
    pub(crate) fn quadrant_rows(&self, origin: Point2, quadrant: Quadrant) -> Vec<Vec<Span>> {
        let frame = self.frame();
        let col_split = frame.first_col_at_or_after(origin.x);
        let row_split = frame.first_row_at_or_after(origin.y);
        let (sx, sy) = quadrant.signs();
        let cols = if sx > 0.0 { col_split..frame.width } else { 0..col_split };
        let rows = if sy > 0.0 { row_split..frame.height } else { 0..row_split };
        let mut out = vec![Vec::new(); frame.height];
        for j in rows {
            for span in &self.rows[j] {
                let lo = span.start.max(cols.start);
                let hi = span.end.min(cols.end);
                if lo < hi {
                    out[j].push(lo..hi);
                }
            }
        }
        out
    }

    /// Mass center of the quadrant part, `None` if it is empty.
    pub(crate) fn quadrant_mass_center(&self, quadrant_rows: &[Vec<Span>]) -> Option<Point2> {
        let (n, si, sj) = moments(quadrant_rows);
        centroid_from_sums(self.frame(), n, si, sj)
    }
}

/// `(count, Σi, Σj)` over all pixels of the runs.
pub(crate) fn moments(rows: &[Vec<Span>]) -> (u64, u64, u64) {
    let (mut n, mut si, mut sj) = (0u64, 0u64, 0u64);
    for (j, row) in rows.iter().enumerate() {
        for s in row {
            let len = (s.end - s.start) as u64;
            n += len;
            si += (s.start as u64 + s.end as u64 - 1) * len / 2;
            sj += j as u64 * len;
        }
    }
    (n, si, sj)
}

pub(crate) fn run_count(rows: &[Vec<Span>]) -> u64 {
    rows.iter().flatten().map(|s| (s.end - s.start) as u64).sum()
}

/// Number of pixels shared by two run sets over the same frame.
pub(crate) fn run_overlap(a: &[Vec<Span>], b: &[Vec<Span>]) -> u64 {
    let mut total = 0u64;
    for (ra, rb) in a.iter().zip(b) {
        let (mut x, mut y) = (0, 0);
        while x < ra.len() && y < rb.len() {
            let lo = ra[x].start.max(rb[y].start);
            let hi = ra[x].end.min(rb[y].end);
            if lo < hi {
                total += (hi - lo) as u64;
            }
            if ra[x].end <= rb[y].end {
                x += 1;
            } else {
                y += 1;
            }
        }
    }
    total
}
