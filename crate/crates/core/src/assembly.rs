//! Contour construction from polar fans.
//!
//! [`assemble_single`] connects the endpoints of one fan. [`assemble_mp`]
//! stitches a main fan and four auxiliary fans (one per quadrant of the main
//! center) into one contour:
//!
//! 1. every fan yields its endpoint sequence `X_0..X_4`, and each endpoint gets
//!    its angle around the main center;
//! 2. for quadrant `m`, the main-fan endpoints on the two bounding axes span an
//!    angular window at auxiliary center `m`; only the auxiliary endpoints
//!    inside that window are kept (`X'_m`);
//! 3. the smallest and largest main-center angles of `X'_m` give `a_m`, `b_m`;
//! 4. the main-fan endpoints strictly between `b_m` and `a_{m+1}` fill the gap
//!    to the next quadrant;
//! 5. the contour is `X'_1 | gap | X'_2 | gap | X'_3 | gap | X'_4 | gap`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::encode::aux_targets;
use crate::error::{Error, Result};
use crate::geom::{cast_rays, mass_center, ObjectMask, Point2, PolygonMask, Quadrant, RayFan};

/// Angular slack when testing window membership, in radians.
pub const ANGLE_TOL: f64 = 1e-9;

/// Main fan plus one auxiliary fan per quadrant of the main center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPolarMask {
    main: RayFan,
    aux: [RayFan; 4],
}

impl MultiPolarMask {
    pub fn new(main: RayFan, aux: [RayFan; 4]) -> Result<Self> {
        let n = main.n();
        let o = main.center();
        for (q, fan) in Quadrant::ALL.into_iter().zip(&aux) {
            if fan.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "auxiliary fan {q} has {} rays, main fan has {n}",
                    fan.n()
                )));
            }
            let tol = 1e-9 * (1.0 + o.x.abs().max(o.y.abs()));
            if !q.contains_closed(o, fan.center(), tol) {
                return Err(Error::InvalidDisplacement(format!(
                    "auxiliary center ({}, {}) is not in {q} of ({}, {})",
                    fan.center().x,
                    fan.center().y,
                    o.x,
                    o.y
                )));
            }
        }
        Ok(Self { main, aux })
    }

    /// All five fans share `fan`; the auxiliary centers coincide with the main one.
    pub fn collapsed(fan: RayFan) -> Self {
        Self {
            aux: [fan.clone(), fan.clone(), fan.clone(), fan.clone()],
            main: fan,
        }
    }

    pub fn main(&self) -> &RayFan {
        &self.main
    }

    pub fn aux(&self) -> &[RayFan; 4] {
        &self.aux
    }

    pub fn n(&self) -> usize {
        self.main.n()
    }

    pub fn centers(&self) -> [Point2; 5] {
        [
            self.main.center(),
            self.aux[0].center(),
            self.aux[1].center(),
            self.aux[2].center(),
            self.aux[3].center(),
        ]
    }
}

/// Auxiliary centers from nonnegative displacement magnitudes, one per
/// quadrant: Q1 `(+,+)`, Q2 `(−,+)`, Q3 `(−,−)`, Q4 `(+,−)`.
pub fn derive_aux_centers(main: Point2, disp: &[Point2; 4]) -> Result<[Point2; 4]> {
    main.ensure_finite("main center")?;
    let mut out = [main; 4];
    for (q, d) in Quadrant::ALL.into_iter().zip(disp) {
        if !(d.x >= 0.0 && d.y >= 0.0) || !d.is_finite() {
            return Err(Error::InvalidDisplacement(format!(
                "{q} displacement ({}, {}) must be finite and nonnegative",
                d.x, d.y
            )));
        }
        let (sx, sy) = q.signs();
        out[q as usize] = Point2::new(main.x + sx * d.x, main.y + sy * d.y);
    }
    Ok(out)
}

/// Polygon through the fan endpoints in slot order.
pub fn assemble_single(fan: &RayFan) -> PolygonMask {
    // endpoints lie on distinct directions at positive distance, so they are distinct
    PolygonMask::new(fan.endpoints()).expect("fan endpoints form a polygon")
}

/// A point tagged with its direction around the main center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularPoint {
    pub point: Point2,
    /// Angle in `[0, 2π)` around the main center.
    pub angle_main: f64,
}

/// Counter-clockwise angular interval `[start, start + sweep]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleWindow {
    pub start: f64,
    pub sweep: f64,
}

impl AngleWindow {
    pub fn full() -> Self {
        Self { start: 0.0, sweep: TAU }
    }

    /// Window sweeping counter-clockwise from `lo` to `hi`. A span of a full
    /// turn or more gives the full window; `lo == hi` a zero-width one.
    pub fn from_bounds(lo: f64, hi: f64) -> Self {
        if hi - lo >= TAU {
            return Self::full();
        }
        Self {
            start: lo.rem_euclid(TAU),
            sweep: (hi - lo).rem_euclid(TAU),
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.sweep
    }

    /// Counter-clockwise offset of `angle` from the start, in `(-tol, 2π - tol]`.
    fn offset(&self, angle: f64) -> f64 {
        let off = (angle - self.start).rem_euclid(TAU);
        if off > TAU - ANGLE_TOL {
            off - TAU
        } else {
            off
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.offset(angle) <= self.sweep + ANGLE_TOL
    }

    pub fn contains_open(&self, angle: f64) -> bool {
        let off = self.offset(angle);
        off > ANGLE_TOL && off < self.sweep - ANGLE_TOL
    }
}

/// Indices of `points` whose direction seen from `vertex` lies in the closed
/// `window`, in cyclic input order starting from the run nearest the window
/// start.
pub fn subseq(points: &[Point2], vertex: Point2, window: &AngleWindow) -> Vec<usize> {
    let keep: Vec<bool> = points.iter().map(|p| window.contains(p.angle_from(vertex))).collect();
    cyclic_runs(points, vertex, window, &keep)
}

/// Like [`subseq`] with an open window: boundary directions are excluded.
pub fn subseq_open(points: &[Point2], vertex: Point2, window: &AngleWindow) -> Vec<usize> {
    let keep: Vec<bool> = points
        .iter()
        .map(|p| window.contains_open(p.angle_from(vertex)))
        .collect();
    cyclic_runs(points, vertex, window, &keep)
}

fn cyclic_runs(points: &[Point2], vertex: Point2, window: &AngleWindow, keep: &[bool]) -> Vec<usize> {
    let n = keep.len();
    if keep.iter().all(|&k| k) {
        return (0..n).collect();
    }
    let start = (0..n)
        .filter(|&i| keep[i] && !keep[(i + n - 1) % n])
        .min_by(|&a, &b| {
            let oa = window.offset(points[a].angle_from(vertex));
            let ob = window.offset(points[b].angle_from(vertex));
            oa.total_cmp(&ob).then(a.cmp(&b))
        });
    let Some(start) = start else { return Vec::new() };
    (0..n).map(|k| (start + k) % n).filter(|&i| keep[i]).collect()
}

/// The refined sequence of one quadrant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedSequence {
    /// Fan the points come from: `1..=4` for the auxiliary fan, `0` when the
    /// auxiliary window was empty and the main fan's quadrant was used.
    pub source: usize,
    pub indices: Vec<usize>,
}

/// Every intermediate of one multi-point assembly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assembly {
    /// Endpoint sequences: main fan first, then Q1..Q4.
    pub points: [Vec<AngularPoint>; 5],
    /// Angular windows at the auxiliary centers.
    pub windows: [AngleWindow; 4],
    pub refined: [RefinedSequence; 4],
    /// `(a_m, b_m)`: extreme main-center angles of each refined sequence,
    /// unwrapped around the quadrant's bisector.
    pub bounds: [(f64, f64); 4],
    /// Main-fan indices filling Q1→Q2, Q2→Q3, Q3→Q4, Q4→Q1.
    pub gaps: [Vec<usize>; 4],
    pub polygon: PolygonMask,
}

impl Assembly {
    pub fn refined_points(&self, q: usize) -> Vec<Point2> {
        let r = &self.refined[q];
        r.indices.iter().map(|&i| self.points[r.source][i].point).collect()
    }

    pub fn gap_points(&self, q: usize) -> Vec<Point2> {
        self.gaps[q].iter().map(|&i| self.points[0][i].point).collect()
    }
}

/// Multi-point assembly; see the module docs for the steps.
pub fn assemble_mp(mpm: &MultiPolarMask) -> Result<PolygonMask> {
    assemble_mp_detailed(mpm).map(|a| a.polygon)
}

pub fn assemble_mp_detailed(mpm: &MultiPolarMask) -> Result<Assembly> {
    let n = mpm.n();
    crate::geom::rays::check_ray_count(n)?;
    let o = mpm.main.center();
    let quarter = n / 4;

    let fans: [&RayFan; 5] = [&mpm.main, &mpm.aux[0], &mpm.aux[1], &mpm.aux[2], &mpm.aux[3]];
    let points: [Vec<AngularPoint>; 5] = fans.map(|fan| {
        fan.endpoints()
            .into_iter()
            .map(|p| AngularPoint {
                point: p,
                angle_main: p.angle_from(o),
            })
            .collect()
    });
    let xy: [Vec<Point2>; 5] = std::array::from_fn(|m| points[m].iter().map(|a| a.point).collect());

    let mut windows = [AngleWindow::full(); 4];
    let mut refined: [RefinedSequence; 4] = std::array::from_fn(|_| RefinedSequence {
        source: 0,
        indices: Vec::new(),
    });
    let mut bounds = [(0.0, 0.0); 4];

    for q in 0..4 {
        let c = mpm.aux[q].center();
        let from = xy[0][q * quarter];
        let to = xy[0][((q + 1) % 4) * quarter];
        windows[q] = AngleWindow::from_bounds(from.angle_from(c), to.angle_from(c));

        let kept = subseq(&xy[q + 1], c, &windows[q]);
        refined[q] = if kept.is_empty() {
            RefinedSequence {
                source: 0,
                indices: (0..=quarter).map(|k| (q * quarter + k) % n).collect(),
            }
        } else {
            RefinedSequence {
                source: q + 1,
                indices: kept,
            }
        };

        let bisector = (q as f64 + 0.5) * FRAC_PI_2;
        let src = &points[refined[q].source];
        let (lo, hi) = refined[q]
            .indices
            .iter()
            .map(|&i| unwrap_near(src[i].angle_main, bisector))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a), hi.max(a)));
        bounds[q] = (lo, hi);
    }

    let mut gaps: [Vec<usize>; 4] = Default::default();
    for q in 0..4 {
        let next = (q + 1) % 4;
        let b = bounds[q].1;
        let a = bounds[next].0 + if next == 0 { TAU } else { 0.0 };
        let sweep = a - b;
        if sweep > 0.0 {
            let window = AngleWindow {
                start: b.rem_euclid(TAU),
                sweep: sweep.min(TAU),
            };
            gaps[q] = subseq_open(&xy[0], o, &window);
        }
    }

    let mut contour = Vec::with_capacity(5 * n);
    for q in 0..4 {
        let r = &refined[q];
        contour.extend(r.indices.iter().map(|&i| xy[r.source][i]));
        contour.extend(gaps[q].iter().map(|&i| xy[0][i]));
    }
    let polygon = PolygonMask::new(contour)?;

    Ok(Assembly {
        points,
        windows,
        refined,
        bounds,
        gaps,
        polygon,
    })
}

/// Representative of `angle` in `[center - π, center + π)`.
fn unwrap_near(angle: f64, center: f64) -> f64 {
    if angle >= center - PI && angle < center + PI {
        angle
    } else if angle < center - PI {
        angle + TAU
    } else {
        angle - TAU
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionMode {
    Single,
    Multi,
}

impl std::str::FromStr for ReconstructionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single" => Ok(Self::Single),
            "multi" => Ok(Self::Multi),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for ReconstructionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Single => "single",
            Self::Multi => "multi",
        })
    }
}

/// Best-case reconstruction of a ground-truth object and its intermediates.
#[derive(Debug, Clone)]
pub struct OracleReconstruction {
    pub mode: ReconstructionMode,
    pub main: RayFan,
    pub mpm: Option<MultiPolarMask>,
    pub assembly: Option<Assembly>,
    pub polygon: PolygonMask,
}

/// Main center used for oracle reconstructions: the raster mass center, or,
/// when that falls outside the object, the object pixel center farthest from
/// the boundary (ties go to the one nearest the mass center).
pub fn oracle_main_center(obj: &ObjectMask) -> Result<Point2> {
    let c = mass_center(obj.raster())?;
    if obj.contains(c) {
        return Ok(c);
    }
    let frame = obj.frame();
    let poly = obj.polygon();
    obj.raster()
        .iter_set()
        .map(|(i, j)| frame.center(i, j))
        .filter(|&p| poly.contains(p))
        .map(|p| (poly.boundary_distance(p), p))
        .max_by(|(da, a), (db, b)| da.total_cmp(db).then(b.distance(c).total_cmp(&a.distance(c))))
        .map(|(_, p)| p)
        .ok_or(Error::EmptyMask)
}

pub fn reconstruct_oracle_detailed(obj: &ObjectMask, n: usize, mode: ReconstructionMode) -> Result<OracleReconstruction> {
    let center = oracle_main_center(obj)?;
    let main = cast_rays(obj.polygon(), center, n)?;
    match mode {
        ReconstructionMode::Single => Ok(OracleReconstruction {
            mode,
            polygon: assemble_single(&main),
            main,
            mpm: None,
            assembly: None,
        }),
        ReconstructionMode::Multi => {
            let disp = aux_targets(obj, center)?;
            let centers = derive_aux_centers(center, &disp)?;
            let mut aux = Vec::with_capacity(4);
            for c in centers {
                aux.push(cast_rays(obj.polygon(), c, n)?);
            }
            let aux: [RayFan; 4] = aux.try_into().expect("four fans");
            let mpm = MultiPolarMask::new(main.clone(), aux)?;
            let assembly = assemble_mp_detailed(&mpm)?;
            Ok(OracleReconstruction {
                mode,
                polygon: assembly.polygon.clone(),
                main,
                mpm: Some(mpm),
                assembly: Some(assembly),
            })
        }
    }
}

/// Oracle reconstruction under the single- or multi-point representation.
pub fn reconstruct_oracle(obj: &ObjectMask, n: usize, mode: ReconstructionMode) -> Result<PolygonMask> {
    reconstruct_oracle_detailed(obj, n, mode).map(|r| r.polygon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn ring(n: usize) -> Vec<Point2> {
        (0..n).map(|k| crate::geom::unit_direction(k, n) * 3.0).collect()
    }

    #[test]
    fn derive_centers_signs() {
        let d = [Point2::new(2.0, 3.0); 4];
        let c = derive_aux_centers(Point2::new(10.0, 10.0), &d).unwrap();
        assert_eq!(
            c,
            [
                Point2::new(12.0, 13.0),
                Point2::new(8.0, 13.0),
                Point2::new(8.0, 7.0),
                Point2::new(12.0, 7.0)
            ]
        );
        let z = derive_aux_centers(Point2::new(1.0, 2.0), &[Point2::ORIGIN; 4]).unwrap();
        assert_eq!(z, [Point2::new(1.0, 2.0); 4]);
        let mut bad = [Point2::ORIGIN; 4];
        bad[2] = Point2::new(-0.5, 1.0);
        assert!(matches!(
            derive_aux_centers(Point2::ORIGIN, &bad),
            Err(Error::InvalidDisplacement(_))
        ));
    }

    #[test]
    fn single_assembly_of_uniform_fan() {
        let fan = RayFan::uniform(Point2::ORIGIN, 2.0, 4).unwrap();
        let p = assemble_single(&fan);
        assert_eq!(
            p.vertices(),
            &[
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 2.0),
                Point2::new(-2.0, 0.0),
                Point2::new(0.0, -2.0)
            ]
        );
    }

    #[test]
    fn subseq_full_window_is_identity() {
        let pts = ring(36);
        assert_eq!(subseq(&pts, Point2::ORIGIN, &AngleWindow::from_bounds(0.0, TAU)), (0..36).collect::<Vec<_>>());
    }

    #[test]
    fn subseq_zero_width_picks_one() {
        let pts = ring(36);
        let a = pts[7].angle_from(Point2::ORIGIN);
        assert_eq!(subseq(&pts, Point2::ORIGIN, &AngleWindow::from_bounds(a, a)), vec![7]);
    }

    #[test]
    fn subseq_wraps_in_cyclic_order() {
        let pts = ring(36);
        let got = subseq(&pts, Point2::ORIGIN, &AngleWindow::from_bounds(deg(350.0), deg(10.0)));
        assert_eq!(got, vec![35, 0, 1]);
        let open = subseq_open(&pts, Point2::ORIGIN, &AngleWindow::from_bounds(deg(350.0), deg(10.0)));
        assert_eq!(open, vec![0]);
    }

    #[test]
    fn collapsed_assembly_equals_single() {
        let lengths: Vec<f64> = (0..36).map(|k| 5.0 + (k as f64 * 0.7).sin()).collect();
        let fan = RayFan::new(Point2::new(3.0, -2.0), lengths).unwrap();
        let a = assemble_mp_detailed(&MultiPolarMask::collapsed(fan.clone())).unwrap();
        assert_eq!(a.polygon, assemble_single(&fan));
        assert!(a.gaps.iter().all(Vec::is_empty));
        for q in 0..4 {
            assert_eq!(a.refined[q].source, q + 1);
            assert_eq!(a.refined[q].indices.len(), 10);
        }
    }

    #[test]
    fn mpm_validation() {
        let main = RayFan::uniform(Point2::ORIGIN, 1.0, 8).unwrap();
        let wrong_n = RayFan::uniform(Point2::ORIGIN, 1.0, 4).unwrap();
        assert!(MultiPolarMask::new(main.clone(), [main.clone(), main.clone(), main.clone(), wrong_n]).is_err());
        let misplaced = RayFan::uniform(Point2::new(-1.0, 1.0), 1.0, 8).unwrap();
        assert!(matches!(
            MultiPolarMask::new(main.clone(), [misplaced, main.clone(), main.clone(), main]),
            Err(Error::InvalidDisplacement(_))
        ));
    }

    #[test]
    fn unwrap_keeps_angles_near_bisector() {
        assert!((unwrap_near(deg(350.0), deg(45.0)) - deg(-10.0)).abs() < 1e-12);
        assert!((unwrap_near(deg(5.0), deg(315.0)) - deg(365.0)).abs() < 1e-12);
        assert_eq!(unwrap_near(deg(100.0), deg(135.0)), deg(100.0));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("single".parse::<ReconstructionMode>().unwrap(), ReconstructionMode::Single);
        assert_eq!(" multi".parse::<ReconstructionMode>().unwrap(), ReconstructionMode::Multi);
        assert!("both".parse::<ReconstructionMode>().is_err());
    }
}
