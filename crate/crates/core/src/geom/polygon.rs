use serde::{Deserialize, Serialize};

use super::point::Point2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn of_points(points: &[Point2]) -> Option<Self> {
        let first = *points.first()?;
        let mut bb = BoundingBox { min: first, max: first };
        for p in &points[1..] {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }
}

/// A closed polygon stored counter-clockwise (by signed area).
///
/// Self-intersecting input is accepted; `is_simple` records whether any two
/// non-adjacent edges touch. Area and containment use the even-odd rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonMask {
    vertices: Vec<Point2>,
    simple: bool,
}

impl PolygonMask {
    pub fn new(vertices: impl Into<Vec<Point2>>) -> Result<Self> {
        let mut vertices: Vec<Point2> = vertices.into();
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("polygon vertex"));
        }
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                vertices.len()
            )));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let simple = !has_self_intersection(&vertices);
        Ok(Self { vertices, simple })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| Point2::from(c)).collect::<Vec<_>>())
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::from_xy(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    /// Regular `sides`-gon with circumradius `radius`, first vertex on the +x axis.
    pub fn regular(center: Point2, radius: f64, sides: usize) -> Result<Self> {
        let verts = (0..sides)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / sides as f64;
                Point2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect::<Vec<_>>();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area (nonnegative after CCW normalisation for simple polygons).
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::of_points(&self.vertices).expect("polygon has vertices")
    }

    /// Even-odd containment.
    pub fn contains(&self, p: Point2) -> bool {
        even_odd_contains(&self.vertices, p)
    }

    /// Distance from `p` to the nearest edge.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Convex iff every turn has the same orientation (collinear turns ignored).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let mut sign = 0.0f64;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn.abs() <= 1e-12 {
                continue;
            }
            if sign == 0.0 {
                sign = turn.signum();
            } else if turn.signum() != sign {
                return false;
            }
        }
        self.simple
    }
}

pub(crate) fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum();
    0.5 * twice
}

/// x-coordinate where edge `a→b` crosses the horizontal line at `y`, if it
/// does under the half-open rule `(a.y > y) != (b.y > y)`.
#[inline]
pub(crate) fn edge_crossing(a: Point2, b: Point2, y: f64) -> Option<f64> {
    if (a.y > y) != (b.y > y) {
        Some(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
    } else {
        None
    }
}

pub(crate) fn even_odd_contains(vertices: &[Point2], p: Point2) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        if let Some(x) = edge_crossing(vertices[i], vertices[(i + 1) % n], p.y) {
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Sorted crossings of the closed polyline with the line at height `y`.
pub(crate) fn row_crossings(vertices: &[Point2], y: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = vertices.len();
    for i in 0..n {
        if let Some(x) = edge_crossing(vertices[i], vertices[(i + 1) % n], y) {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
}


pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn has_self_intersection(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    if n < 4 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_touch(a, b, c, d) {
                return true;
            }
        }
    }
    false
}
