//! Evaluate the loss kernels and the full loss on a perturbed prediction.

use mp_polar::encode::{build_target_maps, TargetInstance, TargetOptions};
use mp_polar::geom::PolygonMask;
use mp_polar::loss::{focal_loss, polar_iou_grad, polar_iou_loss, smooth_l1, total_loss, LossConfig, FOCAL_ALPHA, FOCAL_GAMMA};
use mp_polar::select::HeadOutputs;

fn main() -> mp_polar::Result<()> {
    let gt = [4.0, 5.0, 6.0, 5.0];
    let pred = [3.5, 5.5, 6.0, 4.0];
    println!("polar IoU loss: {:.6}", polar_iou_loss(&pred, &gt)?);
    println!("gradient:       {:?}", polar_iou_grad(&pred, &gt)?);
    println!("smooth L1(0.5) = {}, smooth L1(2) = {}", smooth_l1(0.5), smooth_l1(2.0));
    println!("focal(0.9, positive) = {:.6}", focal_loss(0.9, true, FOCAL_ALPHA, FOCAL_GAMMA));

    let square = PolygonMask::rect(4.0, 4.0, 28.0, 28.0)?;
    let maps = build_target_maps(
        &[TargetInstance {
            polygon: square,
            class_id: 0,
        }],
        32,
        32,
        &TargetOptions {
            n: 16,
            stride: 4,
            ..Default::default()
        },
    )?;
    let exact = HeadOutputs::from_targets(&maps, 1)?;
    let mut noisy = exact.clone();
    for r in &mut noisy.rays {
        *r *= 1.1;
    }
    let cfg = LossConfig::default();
    println!("exact head: {:?}", total_loss(&exact, &maps, &cfg)?);
    println!("rays +10%:  {:?}", total_loss(&noisy, &maps, &cfg)?);
    Ok(())
}
