use std::path::Path;
use std::process::{Command, Output};

use baseline_cli::formats::{maps_from_bytes, maps_to_bytes, read_gray, BaselineDoc};
use baseline_core::{ConfidenceMaps, GrayImage};
use baseline_npl::{NplArchitecture, Variant, WeightStore};

fn baseline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baseline")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path, pages: &str, seed: &str, style: &str) {
    ok(&baseline(&["synth", "--pages", pages, "--seed", seed, "--style", style, "--out", p(dir)]));
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synth(a.path(), "3", "1", "mixed");
    synth(b.path(), "3", "1", "mixed");
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap());
    }
}

#[test]
fn detect_recovers_synthetic_lines() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "1", "4", "straight");
    let out = dir.path().join("det.json");
    ok(&baseline(&["detect", "--maps", p(&dir.path().join("page_000.aruc")), "--out", p(&out), "--overlay"]));
    let gt = BaselineDoc::from_json(&std::fs::read(dir.path().join("page_000.json")).unwrap()).unwrap();
    let det = BaselineDoc::from_json(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(det.baselines.len(), gt.baselines.len());
    assert_eq!((det.width, det.height), (gt.width, gt.height));
    assert!(det.config.is_some());
    assert!(out.with_extension("png").exists());

    // the embedded config reproduces the output
    let again = dir.path().join("again.json");
    ok(&baseline(&["detect", "--maps", p(&dir.path().join("page_000.aruc")), "--config", p(&out), "--out", p(&again)]));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    // eval of the detection against itself and against the ground truth
    let report = dir.path().join("report.json");
    ok(&baseline(&["eval", "--gt", p(&out), "--hyp", p(&out), "--out", p(&report)]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["f_value"].as_f64(), Some(1.0));
    ok(&baseline(&["eval", "--gt", p(&dir.path().join("page_000.json")), "--hyp", p(&out), "--out", p(&report)]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(v["f_value"].as_f64().unwrap() > 0.95);
}

#[test]
fn multiple_maps_into_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "2", "9", "rotated");
    let outdir = dir.path().join("det");
    ok(&baseline(&[
        "detect", "--threads", "1", "--maps",
        p(&dir.path().join("page_000.aruc")), p(&dir.path().join("page_001.aruc")),
        "--out", p(&outdir),
    ]));
    assert!(outdir.join("page_000.json").exists() && outdir.join("page_001.json").exists());
}

#[test]
fn empty_maps_give_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let maps = ConfidenceMaps::new(GrayImage::zeros(40, 50), GrayImage::zeros(40, 50), None).unwrap();
    let m = dir.path().join("zero.aruc");
    std::fs::write(&m, maps_to_bytes(&maps)).unwrap();
    let out = dir.path().join("z.json");
    let r = baseline(&["detect", "--maps", p(&m), "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(0));
    let doc = BaselineDoc::from_json(&std::fs::read(&out).unwrap()).unwrap();
    assert!(doc.baselines.is_empty());
    assert_eq!((doc.width, doc.height), (50, 40));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let img = dir.path().join("img.png");
    std::fs::write(&img, baseline_cli::formats::gray_png(&GrayImage::filled(40, 40, 0.5))).unwrap();
    // image without weights or maps
    assert_eq!(baseline(&["detect", "--image", p(&img), "--out", p(&out)]).status.code(), Some(2));
    // missing input file
    assert_eq!(baseline(&["detect", "--maps", p(&dir.path().join("nope.aruc")), "--out", p(&out)]).status.code(), Some(2));
    // malformed maps
    let bad = dir.path().join("bad.aruc");
    std::fs::write(&bad, b"ARUC\x01\0\0\0").unwrap();
    assert_eq!(baseline(&["detect", "--maps", p(&bad), "--out", p(&out)]).status.code(), Some(3));
    // malformed weights
    let w = dir.path().join("w.aruw");
    std::fs::write(&w, b"ARUW\x05\0\0\0").unwrap();
    assert_eq!(baseline(&["detect", "--image", p(&img), "--weights", p(&w), "--out", p(&out)]).status.code(), Some(3));
    // well-formed weights for the wrong architecture
    std::fs::write(&w, WeightStore::new().to_bytes()).unwrap();
    assert_eq!(baseline(&["infer", "--image", p(&img), "--weights", p(&w), "--out", p(&out)]).status.code(), Some(3));
    // missing required flag and bad config value
    assert_eq!(baseline(&["eval", "--gt", p(&out), "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(baseline(&["detect", "--maps", p(&bad), "--sigma", "-1", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(baseline(&["detect", "--maps", p(&bad)]).status.code(), Some(2));
}

#[test]
fn gtgen_planes_partition() {
    let dir = tempfile::tempdir().unwrap();
    let doc = BaselineDoc { width: 60, height: 40, baselines: vec![vec![[10.0, 20.0], [50.0, 20.0]]], regions: vec![], config: None };
    let src = dir.path().join("one.json");
    std::fs::write(&src, doc.to_json()).unwrap();
    let outdir = dir.path().join("gt");
    ok(&baseline(&["gtgen", "--baselines", p(&src), "--out", p(&outdir)]));
    let planes: Vec<GrayImage> =
        ["baseline", "separator", "other"].iter().map(|n| read_gray(&outdir.join(format!("{n}.png"))).unwrap()).collect();
    for i in 0..60 * 40 {
        let sum: f32 = planes.iter().map(|pl| pl.data()[i]).sum();
        assert_eq!(sum, 1.0);
    }
    assert_eq!(planes[0].get(20, 30), 1.0);
    assert_eq!(planes[1].get(20, 10), 1.0);
}

#[test]
fn infer_and_detect_from_image() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.aruw");
    let ws = WeightStore::he_init(&NplArchitecture::reference(Variant::ARU).slots(), 3);
    std::fs::write(&w, ws.to_bytes()).unwrap();
    let img = dir.path().join("page.pgm");
    let mut pgm = b"P5\n90 70\n255\n".to_vec();
    pgm.extend((0..90 * 70).map(|i| if (i / 90) % 20 == 10 { 30u8 } else { 220u8 }));
    std::fs::write(&img, pgm).unwrap();

    let maps = dir.path().join("m.aruc");
    ok(&baseline(&["infer", "--image", p(&img), "--weights", p(&w), "--out", p(&maps), "--png"]));
    let m = maps_from_bytes(&std::fs::read(&maps).unwrap()).unwrap();
    // preprocessing halves the image
    assert_eq!(m.dims(), (35, 45));
    assert!(m.class_sum_deviation().unwrap() < 1e-5);
    assert!(maps.with_extension("baseline.png").exists());

    let out = dir.path().join("d.json");
    ok(&baseline(&["detect", "--image", p(&img), "--weights", p(&w), "--out", p(&out)]));
    let doc = BaselineDoc::from_json(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!((doc.width, doc.height), (90, 70));
}
