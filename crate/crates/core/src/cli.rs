//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O failure, 2 malformed or
//! schema-violating input, 3 when some instances or images failed while the
//! rest completed. `MP_POLAR_THREADS` caps the worker pool.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::assembly::ReconstructionMode;
use crate::dataset::coco::{ingest_path, to_coco, AnnotationSet};
use crate::dataset::fixtures::{gen_fixtures, Suite};
use crate::dataset::render::{render_instance, RenderOptions};
use crate::dataset::study::{run_study, StudyOptions, DEFAULT_STUDY_RASTER};
use crate::encode::{build_target_maps, TargetInstance, TargetMaps, TargetOptions, DEFAULT_OBJECT_RASTER};
use crate::error::{Error, Result};
use crate::select::{
    decode_levels, Candidate, DecodeOptions, HeadOutputs, DEFAULT_K_MAX, DEFAULT_NMS_GRID, DEFAULT_NMS_IOU,
    DEFAULT_SCORE_THRESHOLD,
};

pub const THREADS_ENV: &str = "MP_POLAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mp-polar", version, about = "Multi-point polar mask toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write per-image training targets as sparse JSON grids.
    Encode {
        #[arg(long)]
        ann: PathBuf,
        #[arg(long, default_value_t = 36)]
        n: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Cell size in pixels.
        #[arg(long, default_value_t = 4)]
        stride: usize,
        #[arg(long, default_value_t = DEFAULT_OBJECT_RASTER)]
        object_raster: usize,
        /// Also write the head outputs a perfect model would produce.
        #[arg(long)]
        emit_head: bool,
    },
    /// Oracle reconstruction study, written as CSV.
    Study {
        #[arg(long)]
        ann: PathBuf,
        #[arg(long, default_value_t = 36)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "single,multi")]
        modes: Vec<ReconstructionMode>,
        #[arg(long, default_value_t = DEFAULT_STUDY_RASTER)]
        raster: usize,
        #[arg(long)]
        out: PathBuf,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a seeded synthetic annotation file.
    Fixtures {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one instance's oracle reconstruction as SVG.
    Render {
        #[arg(long)]
        ann: PathBuf,
        #[arg(long)]
        id: u64,
        #[arg(long, default_value = "multi")]
        mode: ReconstructionMode,
        #[arg(long, default_value_t = 36)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_STUDY_RASTER)]
        raster: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode head outputs into instance masks.
    Decode {
        #[arg(long)]
        head: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD)]
        thr: f64,
        #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
        nms_iou: f64,
        #[arg(long, default_value_t = DEFAULT_NMS_GRID)]
        nms_grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some items failed; the output covers the rest.
    Partial(usize),
}

pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Partial(_)) => 3,
        Err(Error::Parse { .. } | Error::Schema(_)) => 2,
        Err(_) => 1,
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = run(cli.command);
    match &result {
        Ok(Outcome::Partial(k)) => eprintln!("warning: {k} item(s) failed"),
        Err(e) => eprintln!("error: {e}"),
        Ok(Outcome::Success) => {}
    }
    ExitCode::from(exit_code(&result))
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Encode {
            ann,
            n,
            out,
            stride,
            object_raster,
            emit_head,
        } => encode(
            &ingest_path(ann)?,
            &TargetOptions { n, stride, object_raster },
            &out,
            emit_head,
        ),
        Command::Study {
            ann,
            n,
            modes,
            raster,
            out,
            timing,
        } => {
            let report = run_study(&ingest_path(ann)?, &StudyOptions { n, modes, raster, timing })?;
            report.write_csv(BufWriter::new(File::create(out)?))?;
            Ok(match report.failures() {
                0 => Outcome::Success,
                k => Outcome::Partial(k),
            })
        }
        Command::Fixtures { suite, count, seed, out } => {
            write_json(&out, &to_coco(&gen_fixtures(suite, count, seed)?), true)?;
            Ok(Outcome::Success)
        }
        Command::Render {
            ann,
            id,
            mode,
            n,
            raster,
            out,
        } => {
            let svg = render_instance(&ingest_path(ann)?, id, &RenderOptions { n, mode, raster })?;
            fs::write(out, svg)?;
            Ok(Outcome::Success)
        }
        Command::Decode {
            head,
            kmax,
            thr,
            nms_iou,
            nms_grid,
            out,
        } => {
            let levels = read_head(&head)?;
            let opts = DecodeOptions {
                k_max: kmax,
                threshold: thr,
                iou_thr: nms_iou,
                nms_grid,
            };
            let cands = decode_levels(&levels, &opts)?;
            write_json(&out, &MasksFile::new(&cands), true)?;
            Ok(Outcome::Success)
        }
    }
}

/// A head file holds one level or a list of levels.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum HeadFile {
    One(HeadOutputs),
    Levels(Vec<HeadOutputs>),
}

pub fn read_head(path: &Path) -> Result<Vec<HeadOutputs>> {
    let text = fs::read_to_string(path)?;
    let levels = match serde_json::from_str::<HeadFile>(&text) {
        Ok(HeadFile::One(h)) => vec![h],
        Ok(HeadFile::Levels(v)) => v,
        Err(e) if e.is_data() => {
            return Err(Error::Schema(format!("{}: not a head output file", path.display())));
        }
        Err(e) => return Err(e.into()),
    };
    for (k, level) in levels.iter().enumerate() {
        level
            .validate()
            .map_err(|e| Error::Schema(format!("{} level {k}: {e}", path.display())))?;
    }
    Ok(levels)
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if pretty {
        serde_json::to_writer_pretty(&mut w, value)?;
    } else {
        serde_json::to_writer(&mut w, value)?;
    }
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Decoded masks as written by `decode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasksFile {
    pub candidates: Vec<MaskRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub class_id: u32,
    pub score: f64,
    pub level: usize,
    pub cell: [usize; 2],
    pub center: [f64; 2],
    pub aux_centers: [[f64; 2]; 4],
    pub polygon: Vec<[f64; 2]>,
}

impl MasksFile {
    pub fn new(cands: &[Candidate]) -> Self {
        Self {
            candidates: cands
                .iter()
                .map(|c| MaskRecord {
                    class_id: c.class_id,
                    score: c.score,
                    level: c.level,
                    cell: [c.cell.0, c.cell.1],
                    center: [c.center.x, c.center.y],
                    aux_centers: c.aux_centers.map(|p| [p.x, p.y]),
                    polygon: c.mask.vertices().iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        }
    }
}

/// Sparse target grid as written by `encode`: only cells inside objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDump {
    pub image_id: u64,
    pub width: usize,
    pub height: usize,
    pub n: usize,
    pub stride: usize,
    pub cells: Vec<TargetCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCell {
    pub i: usize,
    pub j: usize,
    pub instance_id: u64,
    pub part: usize,
    pub category_id: u32,
    pub rays: Vec<f64>,
    pub structure_centerness: f64,
    pub aux_disp: [[f64; 2]; 4],
}

impl TargetDump {
    fn new(image_id: u64, maps: &TargetMaps, ids: &[(u64, usize)]) -> Self {
        Self {
            image_id,
            width: maps.width,
            height: maps.height,
            n: maps.n,
            stride: maps.stride,
            cells: maps
                .iter_inside()
                .map(|(i, j, t)| TargetCell {
                    i,
                    j,
                    instance_id: ids[t.instance].0,
                    part: ids[t.instance].1,
                    category_id: t.class_id,
                    rays: t.rays.lengths().to_vec(),
                    structure_centerness: t.structure_centerness,
                    aux_disp: t.aux_disp.map(|d| [d.x, d.y]),
                })
                .collect(),
        }
    }
}

fn encode(set: &AnnotationSet, opts: &TargetOptions, out: &Path, emit_head: bool) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let num_classes = set.polygons.iter().map(|r| r.category_id as usize + 1).max().unwrap_or(1);
    let groups = set.by_image();
    let mut failures = 0;
    for image in &set.images {
        let records = groups.get(&image.id).map(Vec::as_slice).unwrap_or(&[]);
        let instances: Vec<TargetInstance> = records
            .iter()
            .map(|r| TargetInstance {
                polygon: r.polygon.clone(),
                class_id: r.category_id,
            })
            .collect();
        let ids: Vec<(u64, usize)> = records.iter().map(|r| (r.instance_id, r.part)).collect();
        let maps = match build_target_maps(&instances, image.width as usize, image.height as usize, opts) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("image {}: {e}", image.id);
                failures += 1;
                continue;
            }
        };
        write_json(
            &out.join(format!("image_{}.targets.json", image.id)),
            &TargetDump::new(image.id, &maps, &ids),
            false,
        )?;
        if emit_head {
            let head = HeadOutputs::from_targets(&maps, num_classes)?;
            write_json(&out.join(format!("image_{}.head.json", image.id)), &head, false)?;
        }
    }
    Ok(if failures == 0 { Outcome::Success } else { Outcome::Partial(failures) })
}
