//! Compare one-center and five-center reconstructions of a concave shape.

use mp_polar::assembly::{reconstruct_oracle_detailed, ReconstructionMode};
use mp_polar::geom::{mask_iou, rasterize_in, ObjectMask, PolygonMask};

fn main() -> mp_polar::Result<()> {
    let plus = PolygonMask::from_xy(&[
        (40.0, 0.0),
        (80.0, 0.0),
        (80.0, 40.0),
        (120.0, 40.0),
        (120.0, 80.0),
        (80.0, 80.0),
        (80.0, 120.0),
        (40.0, 120.0),
        (40.0, 80.0),
        (0.0, 80.0),
        (0.0, 40.0),
        (40.0, 40.0),
    ])?;
    let obj = ObjectMask::with_resolution(plus, 512)?;
    for mode in [ReconstructionMode::Single, ReconstructionMode::Multi] {
        let rec = reconstruct_oracle_detailed(&obj, 36, mode)?;
        let iou = mask_iou(obj.raster(), &rasterize_in(&rec.polygon, obj.frame())?)?;
        println!("{mode:>6}: IoU {iou:.4}, {} vertices, main center {:?}", rec.polygon.len(), rec.main.center());
        if let Some(asm) = &rec.assembly {
            for (q, r) in asm.refined.iter().enumerate() {
                println!("  Q{}: {} refined points from fan {}, {} gap points", q + 1, r.indices.len(), r.source, asm.gaps[q].len());
            }
        }
    }
    Ok(())
}
