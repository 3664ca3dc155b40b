use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use shearad::io::{read_srs1, write_srg1, Domain};
use shearad::{Complex64, Grid1D, SampledSignal2D};

const SMALL: &str = r#"{
  "grid": {"n": 32, "extent": 8, "n_v": 33, "n_s": 17, "n_a": 5, "a_min": 0.25},
  "signal": "gaussian"
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shearad"));
    c.env_remove("SHEARLET_RADON_THREADS");
    c
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Path, cmd: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{cmd}_report.json"))).unwrap()).unwrap()
}

fn error_doc(o: &Output) -> Value {
    serde_json::from_slice(o.stdout.trim_ascii()).expect("error JSON on stdout")
}

#[test]
fn gen_is_deterministic_under_seed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", r#"{"grid": {"n": 32, "extent": 8}, "signal": "random-bandlimited"}"#);
    let (a, b, c) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    assert!(run("gen", &cfg, &a, &["--seed", "5", "--quiet"]).status.success());
    assert!(run("gen", &cfg, &b, &["--seed", "5", "--quiet"]).status.success());
    assert!(run("gen", &cfg, &c, &["--seed", "6", "--quiet"]).status.success());
    let read = |p: &Path| std::fs::read(p.join("signal.srg")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        std::fs::read(a.join("gen_report.json")).unwrap(),
        std::fs::read(b.join("gen_report.json")).unwrap()
    );
}

#[test]
fn radon_of_zero_signal_is_zero() {
    let d = tempfile::tempdir().unwrap();
    let g = Grid1D::new(32, 8.0).unwrap();
    let input = d.path().join("zero.srg");
    write_srg1(&input, &SampledSignal2D::zeros(g, g), Domain::Space).unwrap();
    let body = format!(
        r#"{{"grid": {{"n": 32, "extent": 8, "n_v": 33}}, "io": {{"input": {}}}}}"#,
        serde_json::to_string(&input).unwrap()
    );
    let cfg = config(d.path(), "c.json", &body);
    let out = d.path().join("out");
    let o = run("radon", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, report(&out, "radon"));
    for name in ["sinogram_h.srs", "sinogram_v.srs"] {
        let s = read_srs1(&out.join(name)).unwrap();
        assert!(s.values().iter().all(|z| *z == Complex64::default()));
    }
}

#[test]
fn compare_on_gaussian_at_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", "{}");
    let out = d.path().join("out");
    let o = run("compare", &cfg, &out, &["--quiet"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let r = report(&out, "compare");
    assert!(r["details"]["relative_l2"].as_f64().unwrap() < 1e-2);
    assert_eq!(r["pass"], true);
}

#[test]
fn smooth_energy_on_gaussian_at_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", r#"{"mode": "smooth", "signal": "gaussian"}"#);
    let out = d.path().join("out");
    assert!(run("energy", &cfg, &out, &["--quiet"]).status.success());
    let ratio = report(&out, "energy")["details"]["ratio"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&ratio), "{ratio}");
}

#[test]
fn tolerance_breach_exits_one_with_error_json() {
    let d = tempfile::tempdir().unwrap();
    let body = SMALL.replace(r#""signal": "gaussian""#, r#""signal": "gaussian", "lowpass": "horizontal""#);
    let body = body.replace(r#""a_min": 0.25"#, r#""a_min": 0.25, "v_max": 1"#);
    let cfg = config(d.path(), "c.json", &body);
    let out = d.path().join("out");
    let o = run("compare", &cfg, &out, &["--quiet"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_doc(&o);
    assert_eq!(e["error"]["kind"], "tolerance");
    let failed: Vec<&str> = e["error"]["failed_checks"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(failed.contains(&"lowpass_relative_l2"), "{failed:?}");
    assert_eq!(report(&out, "compare")["pass"], false);
}

#[test]
fn malformed_inputs_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");

    let o = bin().arg("gen").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_doc(&o)["error"]["kind"], "usage");

    let o = run("gen", &d.path().join("missing.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_doc(&o)["error"]["kind"], "config");

    for body in [r#"{"grid": {"n": 100}}"#, r#"{"colour": 1}"#, r#"{"signal": "disk"}"#, "not json"] {
        let cfg = config(d.path(), "bad.json", body);
        let o = run("gen", &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert_eq!(error_doc(&o)["error"]["kind"], "config", "{body}");
    }

    let cfg = config(d.path(), "fmt.json", r#"{"io": {"export_format": "png"}}"#);
    assert_eq!(run("export", &cfg, &out, &[]).status.code(), Some(2));

    let cfg = config(d.path(), "noinput.json", "{}");
    let o = run("export", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_doc(&o)["error"]["kind"], "invalid_input");

    let cfg = config(d.path(), "ok.json", SMALL);
    let o = bin()
        .args(["gen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("SHEARLET_RADON_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_doc(&o)["error"]["kind"], "environment");
}

#[test]
fn thread_cap_is_honoured_and_output_unchanged() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", SMALL);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let o = bin()
        .args(["synth", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&a)
        .env("SHEARLET_RADON_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 thread(s)"));
    assert!(run("synth", &cfg, &b, &["--quiet"]).status.success());
    for f in ["reconstruction.srg", "reconstruction.srg.json", "synth_report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tomography_from_sinogram_files() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", SMALL);
    let sino = d.path().join("sino");
    assert!(run("radon", &cfg, &sino, &["--quiet"]).status.success());
    let body = SMALL.replace(
        r#""signal": "gaussian""#,
        &format!(
            r#""signal": "gaussian", "io": {{"sinogram_h": {}, "sinogram_v": {}}}"#,
            serde_json::to_string(&sino.join("sinogram_h.srs")).unwrap(),
            serde_json::to_string(&sino.join("sinogram_v.srs")).unwrap()
        ),
    );
    let cfg2 = config(d.path(), "c2.json", &body);
    let out = d.path().join("out");
    let o = run("synth", &cfg2, &out, &["--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out, "synth");
    assert_eq!(r["details"]["ground_truth"], "none");
    assert!(r["checks"].as_array().unwrap().is_empty());
    assert!(out.join("reconstruction.srg").exists());

    let only_h = SMALL.replace(
        r#""signal": "gaussian""#,
        &format!(r#""io": {{"sinogram_h": {}}}"#, serde_json::to_string(&sino.join("sinogram_h.srs")).unwrap()),
    );
    let cfg3 = config(d.path(), "c3.json", &only_h);
    assert_eq!(run("synth", &cfg3, &out, &["--quiet"]).status.code(), Some(2));
}

#[test]
fn sinogram_pgm_peaks_at_the_origin() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", SMALL);
    let sino = d.path().join("sino");
    assert!(run("radon", &cfg, &sino, &["--quiet"]).status.success());
    let body = format!(
        r#"{{"io": {{"input": {}, "export_format": "pgm"}}}}"#,
        serde_json::to_string(&sino.join("sinogram_h.srs")).unwrap()
    );
    let cfg2 = config(d.path(), "e.json", &body);
    let out = d.path().join("out");
    assert!(run("export", &cfg2, &out, &["--quiet"]).status.success());
    let bytes = std::fs::read(out.join("export.pgm")).unwrap();
    let r = report(&out, "export");
    let (rows, cols) = (r["details"]["rows"].as_u64().unwrap() as usize, r["details"]["cols"].as_u64().unwrap() as usize);
    let px = &bytes[bytes.len() - rows * cols..];
    // v = 0 is the middle row, t = 0 the node n_t / 2; neighbours may tie
    // after quantization.
    assert_eq!(px[(rows / 2) * cols + cols / 2], 255);
    assert!(px.iter().enumerate().filter(|(_, &p)| p == 255).all(|(i, _)| i % cols == cols / 2));
    let scale: Value = serde_json::from_str(&std::fs::read_to_string(out.join("export.pgm.json")).unwrap()).unwrap();
    assert!(scale["max"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_tensor_slice_exports_black_and_csv_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let g = Grid1D::new(32, 8.0).unwrap();
    let input = d.path().join("zero.srg");
    write_srg1(&input, &SampledSignal2D::zeros(g, g), Domain::Space).unwrap();
    let body = SMALL.replace(
        r#""signal": "gaussian""#,
        &format!(r#""io": {{"input": {}}}"#, serde_json::to_string(&input).unwrap()),
    );
    let cfg = config(d.path(), "c.json", &body);
    let coeffs = d.path().join("coeffs");
    assert!(run("shearlet", &cfg, &coeffs, &["--quiet"]).status.success());

    let body = format!(
        r#"{{"io": {{"input": {}, "export_format": "pgm", "export_slice": [2, 8]}}}}"#,
        serde_json::to_string(&coeffs.join("coeff_v.src")).unwrap()
    );
    let out = d.path().join("pgm");
    assert!(run("export", &config(d.path(), "p.json", &body), &out, &["--quiet"]).status.success());
    let bytes = std::fs::read(out.join("export.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n32 32\n255\n"));
    assert!(bytes[bytes.len() - 32 * 32..].iter().all(|&b| b == 0));

    let bad = body.replace("[2, 8]", "[99, 0]");
    assert_eq!(run("export", &config(d.path(), "b.json", &bad), &out, &[]).status.code(), Some(2));

    let gen = d.path().join("gen");
    let cfg = config(d.path(), "g.json", r#"{"grid": {"n": 16, "extent": 4}, "signal": "two-bumps"}"#);
    assert!(run("gen", &cfg, &gen, &["--quiet"]).status.success());
    let body = format!(
        r#"{{"io": {{"input": {}, "export_format": "csv"}}}}"#,
        serde_json::to_string(&gen.join("signal.srg")).unwrap()
    );
    let out = d.path().join("csv");
    assert!(run("export", &config(d.path(), "x.json", &body), &out, &["--quiet"]).status.success());
    let table = shearad::export::read_csv(&out.join("export.csv")).unwrap();
    let (f, _) = shearad::io::read_srg1(&gen.join("signal.srg")).unwrap();
    assert_eq!(table.values, f.values());
    assert_eq!(report(&out, "export")["pass"], true);
}

#[test]
fn window_and_shearlet_reports() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "c.json", SMALL);
    let out = d.path().join("out");
    assert!(run("window", &cfg, &out, &["--quiet"]).status.success());
    let r = report(&out, "window");
    assert_eq!(r["pass"], true);
    assert!(out.join("window.srg").exists() && out.join("partition.json").exists());
    let part: Value = serde_json::from_str(&std::fs::read_to_string(out.join("partition.json")).unwrap()).unwrap();
    assert_eq!(part["mode"], "smooth");

    for route in ["direct", "q_route", "radon_route"] {
        let body = SMALL.replace(r#""signal": "gaussian""#, &format!(r#""route": "{route}""#));
        let o = run("shearlet", &config(d.path(), "s.json", &body), &out, &["--quiet"]);
        assert!(o.status.success(), "{route}: {}", String::from_utf8_lossy(&o.stdout));
        let r = report(&out, "shearlet");
        assert_eq!(r["details"]["route"], route);
        let c = shearad::io::read_src1(&out.join("coeff_h.src")).unwrap();
        assert_eq!(c.values.len(), 32 * 32 * 17 * 10);
    }
}
