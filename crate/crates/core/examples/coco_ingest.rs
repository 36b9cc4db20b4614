//! Ingest a COCO annotation file; y is flipped into the math convention.

use mp_polar::dataset::ingest_str;

const SAMPLE: &str = r#"{
  "images": [{"id": 1, "width": 100, "height": 80}],
  "categories": [{"id": 3, "name": "widget"}],
  "annotations": [
    {"id": 10, "image_id": 1, "category_id": 3,
     "segmentation": [[10, 10, 40, 10, 40, 30, 10, 30], [60, 50, 90, 50, 75, 70]]},
    {"id": 11, "image_id": 1, "category_id": 3, "iscrowd": 1,
     "segmentation": {"counts": [0, 10], "size": [80, 100]}}
  ]
}"#;

fn main() -> mp_polar::Result<()> {
    let set = ingest_str(SAMPLE)?;
    println!("{} instances, {} polygons, {} skipped", set.instance_count(), set.polygons.len(), set.skipped);
    for rec in &set.polygons {
        println!("instance {} part {}: {:?}", rec.instance_id, rec.part, rec.polygon.vertices());
    }
    Ok(())
}
