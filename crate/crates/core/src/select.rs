//! Turning dense head outputs into instance masks: score fusion, top-k
//! center selection, multi-point assembly and mask-level NMS.
//!
//! Grids are row-major with `j` the row (from the bottom) and `i` the column.
//! Cell `(i, j)` is centered at `((i + 0.5)·stride, (j + 0.5)·stride)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_mp, derive_aux_centers, MultiPolarMask};
use crate::encode::TargetMaps;
use crate::error::{Error, Result};
use crate::geom::{check_ray_count, mask_iou, rasterize_in, BoundingBox, Point2, PolygonMask, RasterFrame, RayFan, EPS_RAY};

pub const DEFAULT_K_MAX: usize = 1000;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.05;
pub const DEFAULT_NMS_IOU: f64 = 0.5;
/// Long-side resolution of the shared raster NMS compares masks on.
pub const DEFAULT_NMS_GRID: usize = 128;

fn default_stride() -> f64 {
    1.0
}

/// Dense predictions of one feature level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadOutputs {
    pub width: usize,
    pub height: usize,
    pub num_classes: usize,
    /// Rays per fan.
    pub n: usize,
    /// Cell size in image units.
    #[serde(default = "default_stride")]
    pub stride: f64,
    /// `C`: `width × height × num_classes`, class fastest.
    pub class_scores: Vec<f64>,
    /// `P`: `width × height`.
    pub centerness: Vec<f64>,
    /// `M`: `width × height × n`, slot fastest.
    pub rays: Vec<f64>,
    /// `A_1..A_4`: `width × height × 4` magnitude pairs, quadrant fastest.
    pub aux_disp: Vec<[f64; 2]>,
}

impl HeadOutputs {
    /// Zero scores, `EPS_RAY` rays and zero displacements.
    pub fn zeros(width: usize, height: usize, num_classes: usize, n: usize, stride: f64) -> Result<Self> {
        let out = Self {
            width,
            height,
            num_classes,
            n,
            stride,
            class_scores: vec![0.0; width * height * num_classes],
            centerness: vec![0.0; width * height],
            rays: vec![EPS_RAY; width * height * n],
            aux_disp: vec![[0.0; 2]; width * height * 4],
        };
        out.validate()?;
        Ok(out)
    }

    /// Outputs a perfect head would produce for `maps`: one-hot classes and
    /// the ground-truth structure centerness, rays and displacements inside
    /// objects; zeros elsewhere.
    pub fn from_targets(maps: &TargetMaps, num_classes: usize) -> Result<Self> {
        let mut out = Self::zeros(maps.width, maps.height, num_classes, maps.n, maps.stride as f64)?;
        for (i, j, t) in maps.iter_inside() {
            let class = t.class_id as usize;
            if class >= num_classes {
                return Err(Error::DimensionMismatch(format!(
                    "class id {class} does not fit {num_classes} classes"
                )));
            }
            let cell = out.cell(i, j);
            out.class_scores[cell * num_classes + class] = 1.0;
            out.centerness[cell] = t.structure_centerness;
            out.rays[cell * maps.n..(cell + 1) * maps.n].copy_from_slice(t.rays.lengths());
            for (m, d) in t.aux_disp.iter().enumerate() {
                out.aux_disp[cell * 4 + m] = [d.x, d.y];
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        check_ray_count(self.n)?;
        let cells = self.width * self.height;
        if cells == 0 || self.num_classes == 0 {
            return Err(Error::DimensionMismatch(format!(
                "grid {}x{} with {} classes is empty",
                self.width, self.height, self.num_classes
            )));
        }
        if !(self.stride > 0.0 && self.stride.is_finite()) {
            return Err(Error::InvalidArgument(format!("stride {} must be positive", self.stride)));
        }
        let check = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(format!("{name} has {got} entries, expected {want}")))
            }
        };
        check("class_scores", self.class_scores.len(), cells * self.num_classes)?;
        check("centerness", self.centerness.len(), cells)?;
        check("rays", self.rays.len(), cells * self.n)?;
        check("aux_disp", self.aux_disp.len(), cells * 4)
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new((i as f64 + 0.5) * self.stride, (j as f64 + 0.5) * self.stride)
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn nearest_cell(&self, p: Point2) -> (usize, usize) {
        let snap = |v: f64, len: usize| -> usize {
            let k = (v / self.stride).floor();
            if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(len - 1)
            }
        };
        (snap(p.x, self.width), snap(p.y, self.height))
    }

    pub fn rays_at(&self, i: usize, j: usize) -> &[f64] {
        let c = self.cell(i, j);
        &self.rays[c * self.n..(c + 1) * self.n]
    }

    /// Displacement magnitudes at a cell; negative predictions read as zero.
    pub fn aux_at(&self, i: usize, j: usize) -> [Point2; 4] {
        let c = self.cell(i, j);
        std::array::from_fn(|m| {
            let [x, y] = self.aux_disp[c * 4 + m];
            Point2::new(x.max(0.0), y.max(0.0))
        })
    }
}

/// `C · P` with the same layout as the class scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedScores {
    pub width: usize,
    pub height: usize,
    pub num_classes: usize,
    pub scores: Vec<f64>,
}

impl FusedScores {
    pub fn get(&self, i: usize, j: usize, class: usize) -> f64 {
        self.scores[(j * self.width + i) * self.num_classes + class]
    }
}

pub fn fuse_scores(out: &HeadOutputs) -> Result<FusedScores> {
    out.validate()?;
    let k = out.num_classes;
    let scores = out
        .class_scores
        .iter()
        .enumerate()
        .map(|(idx, &c)| c * out.centerness[idx / k])
        .collect();
    Ok(FusedScores {
        width: out.width,
        height: out.height,
        num_classes: k,
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub i: usize,
    pub j: usize,
    pub class_id: u32,
    pub score: f64,
}

/// Highest-scoring `(cell, class)` entries at or above `threshold`, best
/// first. Equal scores go to the smaller row, then column, then class.
pub fn top_k(fused: &FusedScores, k_max: usize, threshold: f64) -> Vec<Peak> {
    let k = fused.num_classes;
    let mut peaks: Vec<Peak> = fused
        .scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s >= threshold)
        .map(|(idx, &score)| {
            let cell = idx / k;
            Peak {
                i: cell % fused.width,
                j: cell / fused.width,
                class_id: (idx % k) as u32,
                score,
            }
        })
        .collect();
    peaks.sort_by(peak_order);
    peaks.truncate(k_max);
    peaks
}

fn peak_order(a: &Peak, b: &Peak) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.j.cmp(&b.j))
        .then(a.i.cmp(&b.i))
        .then(a.class_id.cmp(&b.class_id))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    /// Feature level the candidate came from.
    pub level: usize,
    pub cell: (usize, usize),
    pub center: Point2,
    pub aux_centers: [Point2; 4],
    pub class_id: u32,
    pub score: f64,
    pub mask: PolygonMask,
}

/// Multi-point mask for the center at cell `(i, j)`.
///
/// Auxiliary centers are displaced from the cell center, snapped to the cell
/// containing them (clamped to the grid), and their fans are read at those
/// cells with the cell centers as origins.
pub fn candidate_at(out: &HeadOutputs, level: usize, peak: &Peak) -> Result<Candidate> {
    let center = out.cell_center(peak.i, peak.j);
    let raw = derive_aux_centers(center, &out.aux_at(peak.i, peak.j))?;
    let main = RayFan::clamped(center, out.rays_at(peak.i, peak.j))?;
    let mut aux_centers = [center; 4];
    let mut fans = Vec::with_capacity(4);
    for (m, c) in raw.iter().enumerate() {
        let (ci, cj) = out.nearest_cell(*c);
        aux_centers[m] = out.cell_center(ci, cj);
        fans.push(RayFan::clamped(aux_centers[m], out.rays_at(ci, cj))?);
    }
    let aux: [RayFan; 4] = fans.try_into().expect("four fans");
    let mask = assemble_mp(&MultiPolarMask::new(main, aux)?)?;
    Ok(Candidate {
        level,
        cell: (peak.i, peak.j),
        center,
        aux_centers,
        class_id: peak.class_id,
        score: peak.score,
        mask,
    })
}

/// Greedy NMS on rasterized masks: visiting candidates by descending score,
/// drop any whose IoU with an already kept mask reaches `iou_thr`. Kept
/// candidates are returned in their input order.
///
/// Masks are compared on one raster fit to the union of their bounding boxes
/// with `grid` pixels on the long side.
pub fn mask_nms(cands: Vec<Candidate>, iou_thr: f64, grid: usize) -> Result<Vec<Candidate>> {
    if !(iou_thr > 0.0 && iou_thr <= 1.0) {
        return Err(Error::InvalidArgument(format!("NMS IoU threshold {iou_thr} not in (0, 1]")));
    }
    if cands.len() <= 1 {
        return Ok(cands);
    }
    let bbox = cands
        .iter()
        .map(|c| c.mask.bbox())
        .reduce(|a, b| a.union(&b))
        .expect("nonempty");
    let frame = RasterFrame::fit(&bbox, grid, 1)?;
    let rasters = cands
        .par_iter()
        .map(|c| rasterize_in(&c.mask, &frame))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[b].score.total_cmp(&cands[a].score).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for idx in order {
        let mut suppressed = false;
        for &k in &kept {
            if mask_iou(&rasters[idx], &rasters[k])? >= iou_thr {
                suppressed = true;
                break;
            }
        }
        if !suppressed {
            kept.push(idx);
        }
    }
    kept.sort_unstable();
    let mut keep = vec![false; cands.len()];
    for k in kept {
        keep[k] = true;
    }
    Ok(cands.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub k_max: usize,
    pub threshold: f64,
    pub iou_thr: f64,
    pub nms_grid: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            threshold: DEFAULT_SCORE_THRESHOLD,
            iou_thr: DEFAULT_NMS_IOU,
            nms_grid: DEFAULT_NMS_GRID,
        }
    }
}

/// fuse → top-k → multi-point assembly → mask NMS on one level.
pub fn decode_candidates(out: &HeadOutputs, opts: &DecodeOptions) -> Result<Vec<Candidate>> {
    decode_levels(std::slice::from_ref(out), opts)
}

/// Like [`decode_candidates`] over several levels: peaks of all levels share
/// one top-k budget and one NMS pass.
pub fn decode_levels(levels: &[HeadOutputs], opts: &DecodeOptions) -> Result<Vec<Candidate>> {
    if opts.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let mut peaks: Vec<(usize, Peak)> = Vec::new();
    for (level, out) in levels.iter().enumerate() {
        let fused = fuse_scores(out)?;
        peaks.extend(top_k(&fused, opts.k_max, opts.threshold).into_iter().map(|p| (level, p)));
    }
    peaks.sort_by(|(la, a), (lb, b)| {
        b.score
            .total_cmp(&a.score)
            .then(la.cmp(lb))
            .then_with(|| peak_order(a, b))
    });
    peaks.truncate(opts.k_max);

    let cands = peaks
        .par_iter()
        .map(|(level, p)| candidate_at(&levels[*level], *level, p))
        .collect::<Result<Vec<_>>>()?;
    mask_nms(cands, opts.iou_thr, opts.nms_grid)
}

/// Bounding box of every candidate mask, if any.
pub fn candidates_bbox(cands: &[Candidate]) -> Option<BoundingBox> {
    cands.iter().map(|c| c.mask.bbox()).reduce(|a, b| a.union(&b))
}
