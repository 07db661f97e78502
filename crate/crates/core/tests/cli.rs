mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use mcuwidth::Raster;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcuwidth"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture_path(name: &str) -> String {
    common::fixture(name).path().display().to_string()
}

#[test]
fn estimate_prints_width() {
    let o = run(&["estimate", &fixture_path("worked_example.jpg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimated_width: 384"));
}

#[test]
fn estimate_json_report() {
    let o = run(&["estimate", "--json", &fixture_path("worked_example.jpg")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["estimated_width"], 384);
    assert_eq!(v["n"], 768);
    assert_eq!(v["K"], 16);
    let hist = v["histogram"].as_array().unwrap();
    let mode = hist.iter().max_by_key(|e| e["frequency"].as_u64()).unwrap();
    assert_eq!(mode["width"], 384);
    assert_eq!(mode["frequency"], v["mode_frequency"]);
}

#[test]
fn estimate_reads_stdin() {
    let mut child = bin()
        .args(["estimate", "-", "--strip"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let bytes = common::fixture("camera_gray.jpg").bytes();
    child.stdin.take().unwrap().write_all(&bytes).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimated_width: 504"));
    assert!(!stdout(&o).contains("declared_width"));
}

#[test]
fn two_mcu_constant_file_gives_k() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jpg");
    std::fs::write(&p, common::constant_jpeg(2, 2)).unwrap();
    let o = run(&["estimate", p.to_str().unwrap()]);
    assert!(stdout(&o).contains("estimated_width: 8"));
}

#[test]
fn truncated_file_keeps_estimate() {
    let bytes = common::fixture("worked_example.jpg").bytes();
    let ctx = mcuwidth::parse_stream(&bytes).unwrap();
    // lose the EOI and roughly half an MCU of entropy data
    let per_mcu = ctx.scan_data.len() / 768;
    let cut = ctx.scan_data.end - per_mcu / 2;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.jpg");
    std::fs::write(&p, &bytes[..cut]).unwrap();
    let o = run(&["estimate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimated_width: 384"));
}

#[test]
fn histogram_csv() {
    let o = run(&["histogram", &fixture_path("worked_example.jpg")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("width,frequency,normalized_frequency"));
    let rows: Vec<(u32, u64)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    let max = rows.iter().map(|r| r.1).max().unwrap();
    assert_eq!(rows.iter().find(|r| r.1 == max).unwrap().0, 384);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn histogram_constant_four_mcus() {
    let dir = tempfile::tempdir().unwrap();
    let jpg = dir.path().join("c.jpg");
    let csv = dir.path().join("h.csv");
    std::fs::write(&jpg, common::constant_jpeg(4, 4)).unwrap();
    let o = run(&["histogram", jpg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit_once(',').unwrap().0).collect();
    assert_eq!(rows, ["8,3", "16,2", "24,1"]);
}

#[test]
fn empty_scan_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.jpg");
    std::fs::write(&p, common::constant_jpeg(1, 1)).unwrap();
    let o = run(&["histogram", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let o = run(&["estimate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn garbage_input_exits_2_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.jpg");
    let mut bytes = common::fixture("camera_gray.jpg").bytes();
    bytes[2..6].copy_from_slice(&[0xFF, 0xC2, 0x00, 0x02]);
    std::fs::write(&p, bytes).unwrap();
    let o = run(&["estimate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 2"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["estimate"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["estimate", "/nonexistent/file.jpg"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn reconstruct_at_estimate_and_explicit_width() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.ppm");
    let src = fixture_path("worked_example.jpg");
    let o = run(&["reconstruct", &src, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = Raster::read_pnm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!((r.width, r.height, r.channels), (384, 512, 3));

    let o = run(&["reconstruct", &src, "--width", "512", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = Raster::read_pnm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r.width, 512);

    let o = run(&["reconstruct", &src, "--width", "500", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["reconstruct", &fixture_path("camera_gray.jpg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.starts_with(b"P5\n504 400\n255\n"));
}

#[test]
fn estimate_emits_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.pgm");
    let o = run(&["estimate", &fixture_path("moon_gray_rst.jpg"), "--emit-image", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = Raster::read_pnm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!((r.width, r.channels), (264, 1));
}

#[test]
fn idct_selection() {
    let src = fixture_path("astronaut_444.jpg");
    for name in ["direct", "separable"] {
        let o = run(&["--idct", name, "estimate", &src]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("estimated_width: 304"));
    }
    assert_eq!(run(&["--idct", "fft", "estimate", &src]).status.code(), Some(1));
}

#[test]
fn max_width_cap() {
    let o = run(&["estimate", "--json", "--max-width", "200", &fixture_path("worked_example.jpg")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["histogram"].as_array().unwrap().iter().all(|e| e["width"].as_u64().unwrap() <= 192));
}

#[test]
fn eval_fixture_directory() {
    let dir = common::fixtures_dir();
    let o = run(&["eval", "--json", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let fixtures = common::fixtures();
    assert_eq!(v["N"], fixtures.len());
    for f in fixtures {
        let verdict = v["verdicts"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["path"].as_str().unwrap().ends_with(&f.file))
            .unwrap();
        assert_eq!(verdict["correct"], f.expect_correct, "{}", f.file);
        if f.class == "periodic" {
            assert_eq!(verdict["correct"], false);
        }
    }

    let table = stdout(&run(&["eval", dir.to_str().unwrap()]));
    assert!(table.contains("acc(%)"));
    assert!(table.contains("periodic_rules.jpg"));
}

#[test]
fn eval_strip_gives_same_estimates() {
    let dir = common::fixtures_dir();
    let get = |extra: &[&str]| {
        let mut args = vec!["eval", "--json", dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let v: serde_json::Value = serde_json::from_slice(&run(&args).stdout).unwrap();
        v["verdicts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| (x["path"].clone(), x["w_estimated"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(get(&[]), get(&["--strip"]));
}

#[test]
fn eval_empty_directory_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["eval", dir.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn synth_then_eval_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run_no in 0..2 {
        let out = dir.path().join(format!("run{run_no}"));
        let o = run(&["synth", "--out", out.to_str().unwrap(), "--count", "12", "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0));
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.as_array().unwrap().len(), 12);
        let o = run(&["eval", "--json", out.to_str().unwrap()]);
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        for verdict in v["verdicts"].as_array_mut().unwrap() {
            let name = verdict["path"].as_str().unwrap().rsplit('/').next().unwrap().to_string();
            verdict["path"] = name.into();
        }
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn synth_rejects_bad_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--out", dir.path().to_str().unwrap(), "--widths", "500:174"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn strip_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jpg");
    let o = run(&["strip", &fixture_path("rocket_420.jpg"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let ctx = mcuwidth::parse_stream(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(ctx.declared_width, None);
    let o = run(&["estimate", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("estimated_width: 336"));
}
