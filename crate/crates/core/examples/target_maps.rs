//! Build per-cell training targets for one image with two instances.

use mp_polar::encode::{build_target_maps, TargetInstance, TargetOptions};
use mp_polar::geom::{Point2, PolygonMask};

fn main() -> mp_polar::Result<()> {
    let instances = [
        TargetInstance {
            polygon: PolygonMask::rect(8.0, 8.0, 56.0, 40.0)?,
            class_id: 0,
        },
        TargetInstance {
            polygon: PolygonMask::regular(Point2::new(96.0, 80.0), 24.0, 64)?,
            class_id: 1,
        },
    ];
    let opts = TargetOptions {
        n: 36,
        stride: 8,
        ..Default::default()
    };
    let maps = build_target_maps(&instances, 128, 128, &opts)?;
    println!("{} of {} cells lie inside an object", maps.inside_count(), maps.width * maps.height);

    let best = maps
        .iter_inside()
        .max_by(|a, b| a.2.structure_centerness.total_cmp(&b.2.structure_centerness))
        .expect("non-empty");
    let (i, j, t) = best;
    println!(
        "peak structure centerness {:.4} at cell ({i}, {j}), instance {}, center {:?}",
        t.structure_centerness,
        t.instance,
        maps.cell_center(i, j)
    );
    println!("aux displacements: {:?}", t.aux_disp);
    Ok(())
}
