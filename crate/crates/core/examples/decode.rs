//! Decode a head synthesized from ground truth back into instance masks.

use mp_polar::encode::{build_target_maps, TargetInstance, TargetOptions};
use mp_polar::geom::{Point2, PolygonMask};
use mp_polar::select::{decode_candidates, DecodeOptions, HeadOutputs};

fn main() -> mp_polar::Result<()> {
    let instances = [
        TargetInstance {
            polygon: PolygonMask::regular(Point2::new(60.0, 60.0), 40.0, 48)?,
            class_id: 0,
        },
        TargetInstance {
            polygon: PolygonMask::rect(130.0, 100.0, 220.0, 200.0)?,
            class_id: 2,
        },
    ];
    let maps = build_target_maps(
        &instances,
        256,
        256,
        &TargetOptions {
            n: 36,
            stride: 4,
            ..Default::default()
        },
    )?;
    let head = HeadOutputs::from_targets(&maps, 3)?;
    let cands = decode_candidates(&head, &DecodeOptions::default())?;
    for c in &cands {
        println!(
            "class {} score {:.4} at ({}, {}): {} vertices, simple contour: {}",
            c.class_id,
            c.score,
            c.center.x,
            c.center.y,
            c.mask.len(),
            c.mask.is_simple()
        );
    }
    Ok(())
}
