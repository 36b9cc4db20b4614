use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub(crate) fn ensure_finite(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Direction of `self - from` in `[0, 2π)`.
    pub fn angle_from(self, from: Point2) -> f64 {
        let d = self - from;
        let a = d.y.atan2(d.x);
        if a < 0.0 {
            // atan2 of a tiny negative y can round to exactly TAU
            let w = a + TAU;
            if w >= TAU {
                0.0
            } else {
                w
            }
        } else {
            a
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// One of the four quadrants around a polar center.
///
/// Points on a partition axis are assigned deterministically: the closed
/// right half-plane (`dx >= 0`) belongs to Q1/Q4 and the closed upper
/// half-plane (`dy >= 0`) to Q1/Q2, so the origin itself falls in Q1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn from_index(m: u8) -> Result<Self> {
        match m {
            1 => Ok(Quadrant::Q1),
            2 => Ok(Quadrant::Q2),
            3 => Ok(Quadrant::Q3),
            4 => Ok(Quadrant::Q4),
            _ => Err(Error::InvalidArgument(format!("quadrant index {m} not in 1..=4"))),
        }
    }

    /// 1-based index.
    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    /// Classify an offset from the quadrant origin.
    pub fn of(dx: f64, dy: f64) -> Quadrant {
        match (dx >= 0.0, dy >= 0.0) {
            (true, true) => Quadrant::Q1,
            (false, true) => Quadrant::Q2,
            (false, false) => Quadrant::Q3,
            (true, false) => Quadrant::Q4,
        }
    }

    /// Unit signs `(sx, sy)` of the quadrant.
    pub fn signs(self) -> (f64, f64) {
        match self {
            Quadrant::Q1 => (1.0, 1.0),
            Quadrant::Q2 => (-1.0, 1.0),
            Quadrant::Q3 => (-1.0, -1.0),
            Quadrant::Q4 => (1.0, -1.0),
        }
    }

    pub fn next(self) -> Quadrant {
        Quadrant::ALL[(self as usize + 1) % 4]
    }

    /// Whether `p` lies in the closed quadrant around `origin`.
    pub fn contains_closed(self, origin: Point2, p: Point2, tol: f64) -> bool {
        let (sx, sy) = self.signs();
        (p.x - origin.x) * sx >= -tol && (p.y - origin.y) * sy >= -tol
    }
}

impl std::fmt::Display for Quadrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}", self.index())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_ties_follow_half_plane_rule() {
        assert_eq!(Quadrant::of(0.0, 0.0), Quadrant::Q1);
        assert_eq!(Quadrant::of(0.0, 1.0), Quadrant::Q1);
        assert_eq!(Quadrant::of(0.0, -1.0), Quadrant::Q4);
        assert_eq!(Quadrant::of(1.0, 0.0), Quadrant::Q1);
        assert_eq!(Quadrant::of(-1.0, 0.0), Quadrant::Q2);
        assert_eq!(Quadrant::of(-1.0, -1.0), Quadrant::Q3);
    }

    #[test]
    fn angle_from_is_in_range() {
        let o = Point2::ORIGIN;
        assert_eq!(Point2::new(1.0, 0.0).angle_from(o), 0.0);
        assert!((Point2::new(0.0, -1.0).angle_from(o) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        let a = Point2::new(1.0, -1e-300).angle_from(o);
        assert!((0.0..TAU).contains(&a));
    }

    #[test]
    fn quadrant_index_roundtrip() {
        for q in Quadrant::ALL {
            assert_eq!(Quadrant::from_index(q.index()).unwrap(), q);
        }
        assert!(Quadrant::from_index(0).is_err());
        assert!(Quadrant::from_index(5).is_err());
    }
}
