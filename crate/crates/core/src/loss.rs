//! Training losses of the multi-point head and their composition.
//!
//! `L = L_cls + L_reg + L_sc + L_ac`: focal classification loss over every
//! cell, Polar IoU ray regression, structure-centerness cross entropy and the
//! smooth-L1 auxiliary-center loss, the last three over cells inside objects.

use serde::Serialize;

use crate::encode::TargetMaps;
use crate::error::{Error, Result};
use crate::geom::{Point2, EPS_RAY};
use crate::numeric::pairwise_sum;
use crate::select::HeadOutputs;

/// Probability clamp for the cross-entropy style losses.
pub const PROB_CLAMP: f64 = 1e-7;
pub const FOCAL_ALPHA: f64 = 0.25;
pub const FOCAL_GAMMA: f64 = 2.0;

fn check_fans(pred: &[f64], gt: &[f64]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "predicted fan has {} rays, target has {}",
            pred.len(),
            gt.len()
        )));
    }
    for (slot, &v) in pred.iter().chain(gt).enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidRayLength {
                slot: slot % pred.len().max(1),
                value: v,
            });
        }
    }
    Ok(())
}

fn max_min_sums(pred: &[f64], gt: &[f64]) -> (f64, f64) {
    let hi: Vec<f64> = pred.iter().zip(gt).map(|(&p, &g)| p.max(g)).collect();
    let lo: Vec<f64> = pred.iter().zip(gt).map(|(&p, &g)| p.min(g)).collect();
    (pairwise_sum(&hi), pairwise_sum(&lo))
}

/// `ln(Σ max(pred, gt) / Σ min(pred, gt))`.
pub fn polar_iou_loss(pred: &[f64], gt: &[f64]) -> Result<f64> {
    check_fans(pred, gt)?;
    let (hi, lo) = max_min_sums(pred, gt);
    Ok((hi / lo).ln())
}

/// Gradient of [`polar_iou_loss`] with respect to `pred`.
///
/// A slot with `pred == gt` counts in both sums, giving `1/Σmax − 1/Σmin`.
pub fn polar_iou_grad(pred: &[f64], gt: &[f64]) -> Result<Vec<f64>> {
    check_fans(pred, gt)?;
    let (hi, lo) = max_min_sums(pred, gt);
    Ok(pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let up = if p >= g { 1.0 / hi } else { 0.0 };
            let down = if p <= g { 1.0 / lo } else { 0.0 };
            up - down
        })
        .collect())
}

/// `0.5·d²` for `|d| < 1`, `|d| − 0.5` otherwise.
pub fn smooth_l1(d: f64) -> f64 {
    let a = d.abs();
    if a < 1.0 {
        0.5 * a * a
    } else {
        a - 0.5
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxDistance {
    /// Smooth L1 of each coordinate difference, summed.
    #[default]
    Componentwise,
    /// Smooth L1 of the Euclidean distance.
    Euclidean,
}

/// Auxiliary-center loss summed over the four quadrants.
pub fn aux_center_loss(pred: &[Point2; 4], gt: &[Point2; 4], distance: AuxDistance) -> f64 {
    pred.iter()
        .zip(gt)
        .map(|(p, g)| match distance {
            AuxDistance::Componentwise => smooth_l1((g.x - p.x).abs()) + smooth_l1((g.y - p.y).abs()),
            AuxDistance::Euclidean => smooth_l1(g.distance(*p)),
        })
        .sum()
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Binary cross entropy of a predicted structure centerness against its target.
pub fn structure_centerness_loss(pred: f64, gt: f64) -> f64 {
    let p = clamp_prob(pred);
    -(gt * p.ln() + (1.0 - gt) * (1.0 - p).ln())
}

/// `−α·(1 − p_t)^γ·ln p_t` with `p_t = pred` for positives and `1 − pred`
/// otherwise.
pub fn focal_loss(pred: f64, target: bool, alpha: f64, gamma: f64) -> f64 {
    let p = clamp_prob(pred);
    let pt = if target { p } else { 1.0 - p };
    -alpha * (1.0 - pt).powf(gamma) * pt.ln()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Divide each term by the number of cells inside objects (at least 1).
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub reduction: Reduction,
    pub aux_distance: AuxDistance,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: FOCAL_ALPHA,
            gamma: FOCAL_GAMMA,
            reduction: Reduction::Mean,
            aux_distance: AuxDistance::Componentwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub cls: f64,
    pub reg: f64,
    pub sc: f64,
    pub ac: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(cls: f64, reg: f64, sc: f64, ac: f64) -> Self {
        Self {
            cls,
            reg,
            sc,
            ac,
            total: cls + reg + sc + ac,
        }
    }
}

/// Full training loss of one level's outputs against its targets.
pub fn total_loss(out: &HeadOutputs, targets: &TargetMaps, cfg: &LossConfig) -> Result<LossBreakdown> {
    out.validate()?;
    if (out.width, out.height, out.n) != (targets.width, targets.height, targets.n) {
        return Err(Error::DimensionMismatch(format!(
            "outputs are {}x{} with {} rays, targets {}x{} with {}",
            out.width, out.height, out.n, targets.width, targets.height, targets.n
        )));
    }
    let k = out.num_classes;
    let mut cls_terms = Vec::with_capacity(out.class_scores.len());
    for j in 0..out.height {
        for i in 0..out.width {
            let cell = out.cell(i, j);
            let positive = targets.get(i, j).map(|t| t.class_id as usize);
            if let Some(c) = positive {
                if c >= k {
                    return Err(Error::DimensionMismatch(format!("class id {c} does not fit {k} classes")));
                }
            }
            for c in 0..k {
                cls_terms.push(focal_loss(
                    out.class_scores[cell * k + c],
                    positive == Some(c),
                    cfg.alpha,
                    cfg.gamma,
                ));
            }
        }
    }

    let (mut reg, mut sc, mut ac) = (Vec::new(), Vec::new(), Vec::new());
    for (i, j, t) in targets.iter_inside() {
        let pred: Vec<f64> = out.rays_at(i, j).iter().map(|&l| if l.is_finite() { l.max(EPS_RAY) } else { EPS_RAY }).collect();
        reg.push(polar_iou_loss(&pred, t.rays.lengths())?);
        sc.push(structure_centerness_loss(out.centerness[out.cell(i, j)], t.structure_centerness));
        let cell = out.cell(i, j);
        let pred_disp: [Point2; 4] = std::array::from_fn(|m| {
            let [x, y] = out.aux_disp[cell * 4 + m];
            Point2::new(x, y)
        });
        ac.push(aux_center_loss(&pred_disp, &t.aux_disp, cfg.aux_distance));
    }

    let norm = match cfg.reduction {
        Reduction::Mean => reg.len().max(1) as f64,
        Reduction::Sum => 1.0,
    };
    Ok(LossBreakdown::new(
        pairwise_sum(&cls_terms) / norm,
        pairwise_sum(&reg) / norm,
        pairwise_sum(&sc) / norm,
        pairwise_sum(&ac) / norm,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn polar_iou_examples() {
        let gt = [1.0, 2.0, 3.5, 0.25];
        assert_eq!(polar_iou_loss(&gt, &gt).unwrap(), 0.0);
        let twice: Vec<f64> = gt.iter().map(|g| 2.0 * g).collect();
        assert!((polar_iou_loss(&twice, &gt).unwrap() - LN_2).abs() < 1e-12);
        let g = polar_iou_grad(&twice, &gt).unwrap();
        let s: f64 = twice.iter().sum();
        assert!(g.iter().all(|&v| (v - 1.0 / s).abs() < 1e-15));
        assert!(polar_iou_grad(&gt, &gt).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn polar_iou_rejects_bad_input() {
        assert!(matches!(
            polar_iou_loss(&[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::InvalidRayLength { slot: 1, .. })
        ));
        assert!(matches!(polar_iou_loss(&[1.0], &[1.0, 1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn smooth_l1_branches() {
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(1.0), 0.5);
        assert_eq!(smooth_l1(2.0), 1.5);
        assert_eq!(smooth_l1(0.0), 0.0);
    }

    #[test]
    fn aux_loss_examples() {
        let gt = [Point2::new(1.0, 2.0); 4];
        assert_eq!(aux_center_loss(&gt, &gt, AuxDistance::Componentwise), 0.0);
        let mut off = gt;
        off[2].y += 2.0;
        assert_eq!(aux_center_loss(&off, &gt, AuxDistance::Componentwise), 1.5);
        off[2].x += 1.5;
        assert_eq!(aux_center_loss(&off, &gt, AuxDistance::Euclidean), 2.0);
    }

    #[test]
    fn cross_entropy_examples() {
        assert!(structure_centerness_loss(1.0, 1.0) <= 1e-6);
        assert!((structure_centerness_loss(0.5, 0.5) - LN_2).abs() < 1e-15);
        assert!((focal_loss(0.5, true, 1.0, 0.0) - LN_2).abs() < 1e-15);
        assert!(focal_loss(1.0, true, FOCAL_ALPHA, FOCAL_GAMMA) < 1e-12);
        let expected = 0.25 * 0.01 * -(0.9f64.ln());
        assert!((focal_loss(0.9, true, 0.25, 2.0) - expected).abs() < 1e-15);
        assert!((focal_loss(0.9, true, 0.25, 2.0) - 2.634e-4).abs() < 1e-7);
    }

    #[test]
    fn breakdown_total_is_sum() {
        let b = LossBreakdown::new(0.1, 0.2, 0.3, 0.4);
        assert_eq!(b.total, 0.1 + 0.2 + 0.3 + 0.4);
    }
}
