//! Oracle reconstruction studies: how well each representation can express
//! every annotated polygon.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::coco::{AnnotationSet, PolygonRecord};
use crate::assembly::{oracle_main_center, reconstruct_oracle, ReconstructionMode};
use crate::encode::{polar_centerness, structure_centerness};
use crate::error::{Error, Result};
use crate::geom::{cast_rays, check_ray_count, mask_iou, rasterize_in, ObjectMask};

pub const DEFAULT_STUDY_RASTER: usize = 512;

/// Fixed CSV column order.
pub const CSV_HEADER: [&str; 13] = [
    "kind",
    "instance_id",
    "part",
    "category_id",
    "mode",
    "n",
    "stat",
    "iou",
    "polar_centerness",
    "structure_centerness",
    "vertex_count",
    "wall_ms",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub n: usize,
    pub modes: Vec<ReconstructionMode>,
    /// Raster resolution on the long side of each instance's bounding box.
    pub raster: usize,
    /// Record wall time per row; off by default so reports are reproducible.
    pub timing: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            n: 36,
            modes: vec![ReconstructionMode::Single, ReconstructionMode::Multi],
            raster: DEFAULT_STUDY_RASTER,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub iou: f64,
    pub polar_centerness: f64,
    pub structure_centerness: f64,
    pub vertex_count: usize,
}

/// One (polygon, mode) reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub instance_id: u64,
    pub part: usize,
    pub category_id: u32,
    pub mode: ReconstructionMode,
    pub n: usize,
    pub concave: bool,
    pub outcome: std::result::Result<Measurement, String>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Mean,
    Median,
    ConcaveMean,
}

impl Stat {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Median => "median",
            Self::ConcaveMean => "concave_mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub mode: ReconstructionMode,
    pub n: usize,
    pub stat: Stat,
    pub iou: f64,
    /// Rows the statistic was computed from.
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl StudyReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn aggregate(&self, mode: ReconstructionMode, stat: Stat) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.mode == mode && a.stat == stat)
            .map(|a| a.iou)
    }

    /// IoU of one (instance, part, mode), if it succeeded.
    pub fn iou(&self, instance_id: u64, part: usize, mode: ReconstructionMode) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.instance_id == instance_id && r.part == part && r.mode == mode)
            .and_then(|r| r.outcome.as_ref().ok())
            .map(|m| m.iou)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let f6 = |v: f64| format!("{v:.6}");
        for r in &self.rows {
            let (iou, pc, sc, vc, err) = match &r.outcome {
                Ok(m) => (
                    f6(m.iou),
                    f6(m.polar_centerness),
                    f6(m.structure_centerness),
                    m.vertex_count.to_string(),
                    String::new(),
                ),
                Err(e) => (String::new(), String::new(), String::new(), String::new(), e.clone()),
            };
            w.write_record([
                "instance".to_string(),
                r.instance_id.to_string(),
                r.part.to_string(),
                r.category_id.to_string(),
                r.mode.to_string(),
                r.n.to_string(),
                String::new(),
                iou,
                pc,
                sc,
                vc,
                r.wall_ms.map(f6).unwrap_or_default(),
                err,
            ])?;
        }
        for a in &self.aggregates {
            w.write_record([
                "aggregate".to_string(),
                String::new(),
                String::new(),
                String::new(),
                a.mode.to_string(),
                a.n.to_string(),
                a.stat.name().to_string(),
                f6(a.iou),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Oracle reconstructions of every polygon under every requested mode.
///
/// Failures of individual polygons become error rows; the study continues.
pub fn run_study(set: &AnnotationSet, opts: &StudyOptions) -> Result<StudyReport> {
    check_ray_count(opts.n)?;
    if opts.raster == 0 {
        return Err(Error::InvalidArgument("raster resolution must be positive".into()));
    }
    let mut modes = opts.modes.clone();
    modes.sort();
    modes.dedup();

    let mut rows: Vec<StudyRow> = set
        .polygons
        .par_iter()
        .flat_map_iter(|rec| study_polygon(rec, &modes, opts))
        .collect();
    rows.sort_by_key(|r| (r.instance_id, r.part, r.mode));

    let mut aggregates = Vec::new();
    for &mode in &modes {
        let ious = |concave_only: bool| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.mode == mode && (!concave_only || r.concave))
                .filter_map(|r| r.outcome.as_ref().ok().map(|m| m.iou))
                .collect()
        };
        let all = ious(false);
        let concave = ious(true);
        if !all.is_empty() {
            aggregates.push(AggregateRow {
                mode,
                n: opts.n,
                stat: Stat::Mean,
                iou: mean(&all),
                count: all.len(),
            });
            aggregates.push(AggregateRow {
                mode,
                n: opts.n,
                stat: Stat::Median,
                iou: median(&all),
                count: all.len(),
            });
        }
        if !concave.is_empty() {
            aggregates.push(AggregateRow {
                mode,
                n: opts.n,
                stat: Stat::ConcaveMean,
                iou: mean(&concave),
                count: concave.len(),
            });
        }
    }
    Ok(StudyReport { rows, aggregates })
}

fn study_polygon(rec: &PolygonRecord, modes: &[ReconstructionMode], opts: &StudyOptions) -> Vec<StudyRow> {
    let concave = !rec.polygon.is_convex();
    let obj = ObjectMask::with_resolution(rec.polygon.clone(), opts.raster);
    let centerness = obj.as_ref().map_err(|e| e.to_string()).and_then(|obj| {
        let at_center = || -> Result<(f64, f64)> {
            let c = oracle_main_center(obj)?;
            let pc = polar_centerness(&cast_rays(obj.polygon(), c, opts.n)?);
            Ok((pc, structure_centerness(obj, c, opts.n)?))
        };
        at_center().map_err(|e| e.to_string())
    });

    modes
        .iter()
        .map(|&mode| {
            let start = Instant::now();
            let outcome = match (&obj, &centerness) {
                (Err(e), _) => Err(e.to_string()),
                (_, Err(e)) => Err(e.clone()),
                (Ok(obj), Ok((pc, sc))) => measure(obj, opts.n, mode).map(|(iou, vertex_count)| Measurement {
                    iou,
                    polar_centerness: *pc,
                    structure_centerness: *sc,
                    vertex_count,
                }),
            };
            StudyRow {
                instance_id: rec.instance_id,
                part: rec.part,
                category_id: rec.category_id,
                mode,
                n: opts.n,
                concave,
                outcome,
                wall_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
            }
        })
        .collect()
}

fn measure(obj: &ObjectMask, n: usize, mode: ReconstructionMode) -> std::result::Result<(f64, usize), String> {
    let run = || -> Result<(f64, usize)> {
        let poly = reconstruct_oracle(obj, n, mode)?;
        let iou = mask_iou(obj.raster(), &rasterize_in(&poly, obj.frame())?)?;
        Ok((iou, poly.len()))
    };
    run().map_err(|e| e.to_string())
}

/// Mean by pairwise summation.
pub fn mean(values: &[f64]) -> f64 {
    crate::numeric::pairwise_sum(values) / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
