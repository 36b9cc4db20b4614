use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::point::Point2;
use super::polygon::PolygonMask;
use crate::error::{Error, Result};

/// Minimum ray length in pixels. Rays that miss the object are set to it.
pub const EPS_RAY: f64 = 1e-3;

/// Unit vector of slot `k` (0-based) out of `n`, at angle `2πk/n`.
///
/// Quarter-turn slots are exact so axis rays carry no rounding.
pub fn unit_direction(k: usize, n: usize) -> Point2 {
    if (4 * k).is_multiple_of(n) {
        return match (4 * k / n) % 4 {
            0 => Point2::new(1.0, 0.0),
            1 => Point2::new(0.0, 1.0),
            2 => Point2::new(-1.0, 0.0),
            _ => Point2::new(0.0, -1.0),
        };
    }
    let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
    Point2::new(c, s)
}

/// Ray counts must be positive multiples of four.
pub fn check_ray_count(n: usize) -> Result<()> {
    if n >= 4 && n.is_multiple_of(4) {
        Ok(())
    } else {
        Err(Error::InvalidRayCount(n))
    }
}

/// `n` ray lengths around a center; slot `k` points at angle `2πk/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFan {
    center: Point2,
    lengths: Vec<f64>,
}

impl RayFan {
    pub fn new(center: Point2, lengths: Vec<f64>) -> Result<Self> {
        check_ray_count(lengths.len())?;
        center.ensure_finite("ray fan center")?;
        for (slot, &value) in lengths.iter().enumerate() {
            if !(value >= EPS_RAY) || !value.is_finite() {
                return Err(Error::InvalidRayLength { slot, value });
            }
        }
        Ok(Self { center, lengths })
    }

    /// Like [`RayFan::new`] but floors lengths at [`EPS_RAY`] instead of
    /// rejecting them. Used for predicted (unconstrained) ray lengths.
    pub fn clamped(center: Point2, lengths: &[f64]) -> Result<Self> {
        let lengths = lengths
            .iter()
            .map(|&l| if l.is_finite() { l.max(EPS_RAY) } else { EPS_RAY })
            .collect();
        Self::new(center, lengths)
    }

    /// Fan with every ray of length `radius`.
    pub fn uniform(center: Point2, radius: f64, n: usize) -> Result<Self> {
        Self::new(center, vec![radius; n])
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn direction(&self, k: usize) -> Point2 {
        unit_direction(k, self.n())
    }

    pub fn endpoint(&self, k: usize) -> Point2 {
        self.center + self.direction(k) * self.lengths[k]
    }

    pub fn endpoints(&self) -> Vec<Point2> {
        (0..self.n()).map(|k| self.endpoint(k)).collect()
    }
}

/// Distance label along each of `n` directions: the farthest intersection of
/// the ray with the polygon boundary, or [`EPS_RAY`] if the ray misses.
pub fn cast_rays(mask: &PolygonMask, center: Point2, n: usize) -> Result<RayFan> {
    check_ray_count(n)?;
    center.ensure_finite("ray center")?;
    if mask.len() < 3 {
        return Err(Error::DegenerateGeometry("polygon has fewer than 3 vertices".into()));
    }
    let lengths = (0..n)
        .map(|k| farthest_hit(mask, center, unit_direction(k, n)).max(EPS_RAY))
        .collect();
    RayFan::new(center, lengths)
}

fn farthest_hit(mask: &PolygonMask, c: Point2, u: Point2) -> f64 {
    const TOL: f64 = 1e-12;
    let mut best = f64::NEG_INFINITY;
    for (a, b) in mask.edges() {
        let d = b - a;
        let w = a - c;
        let denom = u.cross(d);
        let scale = d.norm();
        if denom.abs() <= TOL * scale {
            // parallel; only a collinear edge can touch the ray
            if w.cross(u).abs() <= TOL * (1.0 + w.norm()) {
                for t in [w.dot(u), (b - c).dot(u)] {
                    if t > 0.0 {
                        best = best.max(t);
                    }
                }
            }
            continue;
        }
        let t = w.cross(d) / denom;
        let s = w.cross(u) / denom;
        if t > 0.0 && (-TOL..=1.0 + TOL).contains(&s) {
            best = best.max(t);
        }
    }
    best
}
