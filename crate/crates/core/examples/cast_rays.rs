//! Cast a fan of rays from an interior point and report the distance labels.

use mp_polar::encode::polar_centerness;
use mp_polar::geom::{cast_rays, Point2, PolygonMask};

fn main() -> mp_polar::Result<()> {
    let l_shape = PolygonMask::from_xy(&[(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (2.0, 2.0), (2.0, 4.0), (0.0, 4.0)])?;
    let fan = cast_rays(&l_shape, Point2::new(1.0, 1.0), 36)?;
    for (k, len) in fan.lengths().iter().enumerate() {
        println!("slot {k:2} ({:5.1} deg): {len:.4}", k as f64 * 360.0 / fan.n() as f64);
    }
    println!("polar centerness: {:.4}", polar_centerness(&fan));
    Ok(())
}
