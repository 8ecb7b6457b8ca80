use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxsr_core::gop::simulate_frames;
use voxsr_core::io::{load_voxf, read_manifest, write_ply, write_voxf, PlyFormat};
use voxsr_core::{
    d1_psnr, downsample, gop::load_sequence, naive_upsample, projection_psnr, super_resolve,
    voxelize, BBox, GopPattern, MatchParams, PointCloud,
};

fn voxsr(args: &[&str]) -> (i32, String, String) {
    voxsr_env(args, None)
}

fn voxsr_env(args: &[&str], workers: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_voxsr"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("VOXSR_WORKERS", w),
        None => cmd.env_remove("VOXSR_WORKERS"),
    };
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

// Blob whose shape drifts between frames, with position-dependent colors.
fn write_sequence(dir: &Path, frames: usize) -> std::path::PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut manifest = String::new();
    for i in 0..frames {
        let shift = i as f64 * 0.7;
        let points: Vec<[f64; 3]> = (0..4000)
            .map(|_| {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let u: f64 = rng.random_range(-1.0..1.0);
                let r = (1.0 - u * u).sqrt();
                [10.0 + shift + 6.0 * r * t.cos(), 12.0 + 6.0 * r * t.sin(), 12.0 + 4.0 * u]
            })
            .collect();
        let colors = points.iter().map(|q| q.map(|v| (v * 9.0) as u8)).collect();
        let cloud = PointCloud::new(points, Some(colors)).unwrap();
        let name = format!("f{i}.ply");
        std::fs::write(dir.join(&name), write_ply(&cloud, PlyFormat::BinaryLittleEndian)).unwrap();
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let path = dir.join("seq.txt");
    std::fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn voxelize_writes_a_readable_frame() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = PointCloud::new(vec![[0.0; 3], [1.0, 2.0, 3.0], [0.5, 0.5, 0.5]], None).unwrap();
    let ply = dir.path().join("in.ply");
    std::fs::write(&ply, write_ply(&cloud, PlyFormat::Ascii)).unwrap();
    let out = dir.path().join("f.voxf");
    let (code, _, err) = voxsr(&["voxelize", p(&ply), "--depth", "6", "--out", p(&out)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(load_voxf(&out).unwrap(), voxelize(&cloud, 6).unwrap());
}

#[test]
fn metric_on_identical_files_prints_inf() {
    let dir = tempfile::tempdir().unwrap();
    let f = voxsr_core::VoxelFrame::new(4, &[[1, 2, 3], [4, 5, 6]], None).unwrap();
    let a = dir.path().join("a.voxf");
    std::fs::write(&a, write_voxf(&f)).unwrap();
    let (code, out, _) = voxsr(&["metric", p(&a), p(&a)]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "mean_psnr_db inf"), "{out}");
    assert!(out.lines().any(|l| l == "d1_psnr_db inf"), "{out}");
    let (_, out, _) = voxsr(&["metric", p(&a), p(&a), "--kind", "d1"]);
    assert_eq!(out.trim(), "d1_psnr_db inf");
}

#[test]
fn exit_codes() {
    let (code, _, err) = voxsr(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, _) = voxsr(&["gop", "--manifest", "x", "--bogus"]);
    assert_eq!(code, 1);
    let (code, out, _) = voxsr(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("superres"));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.voxf");
    let (code, _, err) = voxsr(&["downsample", p(&missing), "--out", p(&dir.path().join("o.voxf"))]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
    let junk = dir.path().join("junk.voxf");
    std::fs::write(&junk, b"XOVF\x01\x01\x00").unwrap();
    let (code, _, err) = voxsr(&["upsample", p(&junk), "--out", p(&dir.path().join("o.voxf"))]);
    assert_eq!(code, 2);
    assert!(err.contains("bad magic"), "{err}");
    assert!(!dir.path().join("o.voxf").exists());
    let (code, _, _) = voxsr_env(&["--help"], Some("zero"));
    assert_eq!(code, 0);
    let (code, _, err) = voxsr_env(&["downsample", p(&junk), "--out", "x"], Some("0"));
    assert_eq!(code, 1, "{err}");
}

#[test]
fn octree_encode_decode_levels() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let coords: Vec<_> = (0..300)
        .map(|_| [0; 3].map(|_: u8| rng.random_range(0..32u32)))
        .collect::<std::collections::HashSet<_>>()
        .into_iter()
        .collect();
    let f = voxsr_core::VoxelFrame::new(5, &coords, None).unwrap();
    let src = dir.path().join("f.voxf");
    std::fs::write(&src, write_voxf(&f)).unwrap();
    let tree = dir.path().join("f.voxt");
    assert_eq!(voxsr(&["octree", "encode", p(&src), "--out", p(&tree)]).0, 0);
    let back = dir.path().join("back.voxf");
    assert_eq!(voxsr(&["octree", "decode", p(&tree), "--out", p(&back)]).0, 0);
    assert_eq!(load_voxf(&back).unwrap(), f);
    assert_eq!(voxsr(&["octree", "decode", p(&tree), "--levels", "4", "--out", p(&back)]).0, 0);
    assert_eq!(load_voxf(&back).unwrap(), downsample(&f).unwrap());
}

#[test]
fn gop_csv_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_sequence(dir.path(), 5);
    let csv = dir.path().join("out.csv");
    let (code, out, err) = voxsr(&[
        "gop", "--manifest", p(&manifest), "--depth", "6", "--period", "2", "--window", "4", "--csv", p(&csv),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("2 low-resolution frames"), "{out}");

    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], voxsr_core::gop::CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 + 1);
    assert!(lines[3].starts_with("summary,,,,,,,"));

    let m = read_manifest(&std::fs::read_to_string(&manifest).unwrap(), dir.path()).unwrap();
    let frames = load_sequence(&m, 6).unwrap();
    let report = simulate_frames(&frames, GopPattern::new(2).unwrap(), MatchParams { window: 4 }).unwrap();
    assert_eq!(text, report.to_csv());
}

#[test]
fn gop_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_sequence(dir.path(), 7);
    let mut outputs = Vec::new();
    for workers in ["1", "3", "8"] {
        let csv = dir.path().join(format!("out{workers}.csv"));
        let (code, _, err) = voxsr_env(
            &["gop", "--manifest", p(&manifest), "--depth", "6", "--period", "3", "--csv", p(&csv)],
            Some(workers),
        );
        assert_eq!(code, 0, "{err}");
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn subcommands_compose_into_gop() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = write_sequence(d, 3);
    let csv = d.join("out.csv");
    let (code, _, err) = voxsr(&["gop", "--manifest", p(&manifest), "--depth", "6", "--csv", p(&csv)]);
    assert_eq!(code, 0, "{err}");
    let row: Vec<String> = std::fs::read_to_string(&csv).unwrap().lines().nth(1).unwrap().split(',').map(String::from).collect();

    // shared cube = union of the three per-frame cubes
    let bbox = (0..3)
        .map(|i| voxsr_core::io::load_ply(&d.join(format!("f{i}.ply"))).unwrap().bbox())
        .reduce(|a, b| a.union(&b))
        .unwrap();
    let BBox { min, edge } = bbox;
    let bbox_arg = format!("{},{},{},{}", min[0], min[1], min[2], edge);
    for i in 0..3 {
        let (code, _, err) = voxsr(&[
            "voxelize", p(&d.join(format!("f{i}.ply"))), "--depth", "6", "--bbox", &bbox_arg,
            "--out", p(&d.join(format!("v{i}.voxf"))),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let run = |args: &[&str]| assert_eq!(voxsr(args).0, 0, "{args:?}");
    run(&["downsample", p(&d.join("v1.voxf")), "--out", p(&d.join("low.voxf"))]);
    run(&[
        "superres", p(&d.join("low.voxf")), "--ref", p(&d.join("v0.voxf")), "--ref", p(&d.join("v2.voxf")),
        "--window", "4", "--out", p(&d.join("sr.voxf")),
    ]);
    run(&["upsample", p(&d.join("low.voxf")), "--out", p(&d.join("base.voxf"))]);
    let (_, sr_metric, _) = voxsr(&["metric", p(&d.join("v1.voxf")), p(&d.join("sr.voxf"))]);
    let (_, base_metric, _) = voxsr(&["metric", p(&d.join("v1.voxf")), p(&d.join("base.voxf"))]);
    let pick = |text: &str, key: &str| {
        text.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim().to_string()
    };
    assert_eq!(pick(&sr_metric, "mean_psnr_db"), row[3]);
    assert_eq!(pick(&base_metric, "mean_psnr_db"), row[4]);
    assert_eq!(pick(&sr_metric, "d1_psnr_db"), row[5]);
    assert_eq!(pick(&base_metric, "d1_psnr_db"), row[6]);

    // and the same numbers straight from the library
    let truth = load_voxf(&d.join("v1.voxf")).unwrap();
    let low = downsample(&truth).unwrap();
    let refs = [load_voxf(&d.join("v0.voxf")).unwrap(), load_voxf(&d.join("v2.voxf")).unwrap()];
    let sr = super_resolve(&low, &refs, MatchParams::default()).unwrap();
    assert_eq!(load_voxf(&d.join("sr.voxf")).unwrap(), sr);
    let base = naive_upsample(&low).unwrap();
    let fmt = voxsr_core::metrics::format_db;
    assert_eq!(fmt(projection_psnr(&truth, &sr).unwrap().mean_psnr), row[3]);
    assert_eq!(fmt(d1_psnr(&truth, &base).unwrap()), row[6]);
}

#[test]
fn export_writes_ply() {
    let dir = tempfile::tempdir().unwrap();
    let f = voxsr_core::VoxelFrame::new(3, &[[1, 2, 3], [7, 7, 7]], Some(vec![[1, 2, 3], [4, 5, 6]])).unwrap();
    let src = dir.path().join("f.voxf");
    std::fs::write(&src, write_voxf(&f)).unwrap();
    let out = dir.path().join("f.ply");
    assert_eq!(voxsr(&["export", p(&src), "--binary", "--out", p(&out)]).0, 0);
    let cloud = voxsr_core::io::load_ply(&out).unwrap();
    assert_eq!(cloud.points(), &[[1.0, 2.0, 3.0], [7.0, 7.0, 7.0]]);
    assert_eq!(cloud.colors().unwrap(), &[[1, 2, 3], [4, 5, 6]]);
}
