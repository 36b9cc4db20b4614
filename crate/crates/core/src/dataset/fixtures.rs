//! Seeded synthetic annotation sets.
//!
//! Each fixture is one instance in its own 256×256 image. Shapes are built in
//! math convention, rotated by a random angle, placed at a random position
//! and rounded to 0.01 px in pixel coordinates, so writing a set out and
//! ingesting it again reproduces the same polygons.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::coco::{AnnotationSet, ImageInfo, PolygonRecord};
use crate::error::{Error, Result};
use crate::geom::{Point2, PolygonMask};

pub const IMAGE_SIZE: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Convex,
    Concave,
    Mixed,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Self::Convex),
            "concave" => Ok(Self::Concave),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Convex => "convex",
            Self::Concave => "concave",
            Self::Mixed => "mixed",
        })
    }
}

/// Shape family of a fixture; doubles as its category id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Hull = 1,
    Regular = 2,
    LShape = 3,
    Plus = 4,
    Star = 5,
    Crescent = 6,
}

impl ShapeKind {
    pub const CONVEX: [ShapeKind; 2] = [Self::Hull, Self::Regular];
    pub const CONCAVE: [ShapeKind; 4] = [Self::LShape, Self::Plus, Self::Star, Self::Crescent];

    pub fn category_id(self) -> u32 {
        self as u32
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Hull => "hull",
            Self::Regular => "regular",
            Self::LShape => "l-shape",
            Self::Plus => "plus",
            Self::Star => "star",
            Self::Crescent => "crescent",
        }
    }

    pub fn from_category(id: u32) -> Option<Self> {
        [Self::Hull, Self::Regular, Self::LShape, Self::Plus, Self::Star, Self::Crescent]
            .into_iter()
            .find(|k| k.category_id() == id)
    }

    pub fn is_concave(self) -> bool {
        Self::CONCAVE.contains(&self)
    }
}

/// Shape family of fixture `index` within `suite`. Families cycle so every
/// suite of at least four items covers each of its families.
pub fn kind_at(suite: Suite, index: usize) -> ShapeKind {
    match suite {
        Suite::Convex => ShapeKind::CONVEX[index % 2],
        Suite::Concave => ShapeKind::CONCAVE[index % 4],
        Suite::Mixed if index.is_multiple_of(2) => ShapeKind::CONCAVE[(index / 2) % 4],
        Suite::Mixed => ShapeKind::CONVEX[(index / 2) % 2],
    }
}

/// `count` fixtures, deterministic in `seed`.
pub fn gen_fixtures(suite: Suite, count: usize, seed: u64) -> Result<AnnotationSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("fixture count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = f64::from(IMAGE_SIZE);
    let mut set = AnnotationSet::default();
    for index in 0..count {
        let kind = kind_at(suite, index);
        let id = index as u64 + 1;
        let scale = rng.gen_range(64.0..160.0);
        let shape = match kind {
            ShapeKind::Hull => hull_shape(&mut rng, scale),
            ShapeKind::Regular => regular_shape(&mut rng, scale),
            ShapeKind::LShape => l_shape(&mut rng, scale),
            ShapeKind::Plus => plus_shape(&mut rng, scale),
            ShapeKind::Star => star_shape(&mut rng, scale),
            ShapeKind::Crescent => crescent_shape(&mut rng, scale),
        };
        let theta = rng.gen_range(0.0..TAU);
        let rotated: Vec<Point2> = shape.iter().map(|&p| rotate(p, theta)).collect();
        let (lo, hi) = bounds(&rotated);
        let dx = rng.gen_range(2.0 - lo.x..=size - 2.0 - hi.x);
        let dy = rng.gen_range(2.0 - lo.y..=size - 2.0 - hi.y);
        let placed: Vec<Point2> = rotated
            .iter()
            .map(|p| Point2::new(round2(p.x + dx), size - round2(size - (p.y + dy))))
            .collect();
        let vertices = if kind == ShapeKind::Hull { convex_hull(placed) } else { placed };
        set.images.push(ImageInfo {
            id,
            width: IMAGE_SIZE,
            height: IMAGE_SIZE,
            file_name: format!("{suite}-{index:04}.png"),
        });
        set.polygons.push(PolygonRecord {
            instance_id: id,
            part: 0,
            image_id: id,
            category_id: kind.category_id(),
            polygon: PolygonMask::new(vertices)?,
        });
    }
    Ok(set)
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn rotate(p: Point2, theta: f64) -> Point2 {
    let (s, c) = theta.sin_cos();
    Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

fn bounds(points: &[Point2]) -> (Point2, Point2) {
    points.iter().fold(
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// Counter-clockwise hull without collinear vertices (monotone chain).
fn convex_hull(mut points: Vec<Point2>) -> Vec<Point2> {
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    points.dedup();
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut hull: Vec<Point2> = Vec::with_capacity(points.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(points.iter())
        } else {
            Box::new(points.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn hull_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    let count = rng.gen_range(8..=20);
    let aspect = rng.gen_range(0.6..1.0);
    (0..count)
        .map(|_| {
            let r = 0.5 * scale * rng.gen_range(0.0f64..1.0).sqrt();
            let a = rng.gen_range(0.0..TAU);
            Point2::new(r * a.cos(), aspect * r * a.sin())
        })
        .collect()
}

fn regular_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    let sides = rng.gen_range(5..=12);
    let r = 0.5 * scale;
    (0..sides)
        .map(|k| {
            let a = TAU * k as f64 / sides as f64;
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

fn l_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    let w = scale;
    let h = scale * rng.gen_range(0.7..1.0);
    let tx = w * rng.gen_range(0.3..0.6);
    let ty = h * rng.gen_range(0.3..0.6);
    [(0.0, 0.0), (w, 0.0), (w, ty), (tx, ty), (tx, h), (0.0, h)]
        .into_iter()
        .map(|(x, y)| Point2::new(x - 0.5 * w, y - 0.5 * h))
        .collect()
}

fn plus_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    let half = 0.5 * scale * rng.gen_range(0.3..0.5);
    let mut arm = || 0.5 * scale * rng.gen_range(0.6..1.0);
    let (e, n, w, s) = (arm(), arm(), arm(), arm());
    vec![
        Point2::new(half, -half),
        Point2::new(e, -half),
        Point2::new(e, half),
        Point2::new(half, half),
        Point2::new(half, n),
        Point2::new(-half, n),
        Point2::new(-half, half),
        Point2::new(-w, half),
        Point2::new(-w, -half),
        Point2::new(-half, -half),
        Point2::new(-half, -s),
        Point2::new(half, -s),
    ]
}

fn star_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    let tips = rng.gen_range(5..=9);
    let outer = 0.5 * scale;
    let inner = outer * rng.gen_range(0.35..0.6);
    (0..2 * tips)
        .map(|k| {
            let a = PI * k as f64 / tips as f64;
            let r = if k % 2 == 0 { outer * rng.gen_range(0.9..1.0) } else { inner };
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Disc of radius `R` minus a disc of radius `r` centered at `(d, 0)`, with
/// the inner disc crossing the outer boundary.
fn crescent_shape(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Point2> {
    const ARC: usize = 24;
    let big = 0.5 * scale;
    let small = big * rng.gen_range(0.6..0.85);
    let d = (big - small) + big * rng.gen_range(0.1..0.4);
    let x = (d * d + big * big - small * small) / (2.0 * d);
    let y = (big * big - x * x).sqrt();
    let phi = y.atan2(x);
    let psi = y.atan2(x - d);
    let mut out = Vec::with_capacity(2 * ARC + 2);
    for k in 0..=ARC {
        let a = phi + (TAU - 2.0 * phi) * k as f64 / ARC as f64;
        out.push(Point2::new(big * a.cos(), big * a.sin()));
    }
    for k in 1..ARC {
        let a = (TAU - psi) - (TAU - 2.0 * psi) * k as f64 / ARC as f64;
        out.push(Point2::new(d + small * a.cos(), small * a.sin()));
    }
    out
}
