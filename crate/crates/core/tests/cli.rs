use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_mp-polar");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("MP_POLAR_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn fixtures(dir: &TempDir, name: &str, suite: &str, count: &str, seed: &str) -> PathBuf {
    let p = dir.path().join(name);
    let out = run(&["fixtures", "--suite", suite, "--count", count, "--seed", seed, "--out", path_str(&p)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn fixtures_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let a = fixtures(&dir, "a.json", "mixed", "6", "17");
    let b = fixtures(&dir, "b.json", "mixed", "6", "17");
    let c = fixtures(&dir, "c.json", "mixed", "6", "18");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn study_csv_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let ann = fixtures(&dir, "f.json", "concave", "4", "3");
    let mut outputs = Vec::new();
    for (name, threads) in [("one.csv", "1"), ("four.csv", "4")] {
        let p = dir.path().join(name);
        let out = Command::new(BIN)
            .args(["study", "--ann", path_str(&ann), "--raster", "128", "--out", path_str(&p)])
            .env("MP_POLAR_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        outputs.push(std::fs::read_to_string(&p).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,instance_id,part,category_id,mode,n,stat,iou,polar_centerness,structure_centerness,vertex_count,wall_ms,error"
    );
    assert_eq!(outputs[0].lines().filter(|l| l.starts_with("instance,")).count(), 8);
    assert!(outputs[0].lines().any(|l| l.starts_with("aggregate,") && l.contains(",concave_mean,")));
}

#[test]
fn study_modes_flag_limits_rows() {
    let dir = TempDir::new().unwrap();
    let ann = fixtures(&dir, "f.json", "convex", "3", "1");
    let p = dir.path().join("s.csv");
    let out = run(&["study", "--ann", path_str(&ann), "--modes", "single", "--n", "16", "--raster", "96", "--out", path_str(&p)]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&p).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",single,16,")));
}

#[test]
fn partial_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let ann = write(
        &dir,
        "sliver.json",
        r#"{"images":[{"id":1,"width":200,"height":200}],"annotations":[
            {"id":1,"image_id":1,"category_id":1,"segmentation":[[10,10,100,10,100,90,10,90]]},
            {"id":2,"image_id":1,"category_id":1,"segmentation":[[10,150,190,150,10,150.0001]]}]}"#,
    );
    let p = dir.path().join("s.csv");
    let out = run(&["study", "--ann", path_str(&ann), "--raster", "128", "--out", path_str(&p)]);
    assert_eq!(code(&out), 3);
    let csv = std::fs::read_to_string(&p).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("instance,2,") && !l.ends_with(',')).count(), 2);
}

#[test]
fn schema_and_parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let odd = write(
        &dir,
        "odd.json",
        r#"{"images":[{"id":1,"width":8,"height":8}],"annotations":[{"id":1,"image_id":1,"segmentation":[[1,1,5,1,1]]}]}"#,
    );
    let broken = write(&dir, "broken.json", "{\"images\": [");
    let out_csv = dir.path().join("s.csv");
    for ann in [&odd, &broken] {
        let out = run(&["study", "--ann", path_str(ann), "--out", path_str(&out_csv)]);
        assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let head = write(&dir, "head.json", r#"{"width": 2, "height": 2}"#);
    let out = run(&["decode", "--head", path_str(&head), "--out", path_str(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_thread_setting_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(BIN)
        .args(["fixtures", "--suite", "convex", "--count", "1", "--out"])
        .arg(dir.path().join("f.json"))
        .env("MP_POLAR_THREADS", "many")
        .output()
        .unwrap();
    assert_ne!(code(&out), 0);
}

#[test]
fn render_writes_well_formed_svg() {
    let dir = TempDir::new().unwrap();
    let ann = fixtures(&dir, "f.json", "concave", "2", "4");
    for (mode, centers, endpoints) in [("multi", 5, 5 * 36), ("single", 1, 36)] {
        let p = dir.path().join(format!("{mode}.svg"));
        let out = run(&["render", "--ann", path_str(&ann), "--id", "1", "--mode", mode, "--raster", "128", "--out", path_str(&p)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&p).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let with_class = |prefix: &str| {
            doc.descendants()
                .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').next() == Some(prefix)))
                .count()
        };
        assert_eq!(with_class("center"), centers);
        assert_eq!(with_class("endpoint"), endpoints);
    }
    let out = run(&["render", "--ann", path_str(&ann), "--id", "99", "--out", path_str(&dir.path().join("x.svg"))]);
    assert_ne!(code(&out), 0);
}

#[test]
fn encode_then_decode_recovers_the_instance() {
    let dir = TempDir::new().unwrap();
    let ann = fixtures(&dir, "f.json", "convex", "1", "8");
    let enc = dir.path().join("enc");
    let out = run(&["encode", "--ann", path_str(&ann), "--out", path_str(&enc), "--emit-head", "--stride", "8"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let targets: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(enc.join("image_1.targets.json")).unwrap()).unwrap();
    assert_eq!(targets["n"], 36);
    let cells = targets["cells"].as_array().unwrap();
    assert!(!cells.is_empty());
    for c in cells {
        assert_eq!(c["rays"].as_array().unwrap().len(), 36);
        let sc = c["structure_centerness"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&sc));
    }

    let masks = dir.path().join("masks.json");
    let out = run(&["decode", "--head", path_str(&enc.join("image_1.head.json")), "--out", path_str(&masks)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let decoded: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&masks).unwrap()).unwrap();
    let cands = decoded["candidates"].as_array().unwrap();
    assert!(!cands.is_empty());
    let scores: Vec<f64> = cands.iter().map(|c| c["score"].as_f64().unwrap()).collect();
    assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
}
