use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fal_cli::{DerivativeReport, RunDocument, RunSummary};
use fal_core::claims::ClaimResult;
use fal_core::convergence::ConvergenceReport;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tempfile::TempDir;

fn fal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fal"))
        .args(args)
        .output()
        .expect("spawn fal")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn round_trips<T: Serialize + DeserializeOwned>(text: &str) {
    let v: T = serde_json::from_str(text).unwrap();
    let mut again = serde_json::to_string_pretty(&v).unwrap();
    again.push('\n');
    assert_eq!(again, text);
}

fn out(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn derivative_headers_and_negative_axis() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "curve.csv");
    let o = fal(&["derivative", "--preset", "fig1b", "--out", path_str(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&p);
    assert_eq!(text.lines().next().unwrap(), "s,d_re,d_im,singular_flag");
    let rows = rows(&text);
    assert_eq!(rows.len(), 121);
    for r in &rows {
        if r[0] < 0.0 {
            assert!(r[1].abs() <= 1e-12, "{r:?}");
        }
        if r[0] == 0.0 {
            assert_eq!(r[3], 1.0);
            assert!(r[1].is_nan());
        } else {
            assert_eq!(r[3], 0.0);
        }
    }
    assert!(!out(&dir, "curve.json").exists());
}

#[test]
fn derivative_order_zero_is_the_parabola() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "p.csv");
    let o = fal(&[
        "derivative",
        "--nu",
        "0",
        "--domain",
        "-4:8:25",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0);
    for r in rows(&read(&p)) {
        let e = 10.0 + 2.0 * (r[0] - 5.0) * (r[0] - 5.0);
        assert!((r[1] - e).abs() <= 1e-12 * e, "{r:?}");
        assert_eq!(r[3], 0.0);
    }
}

#[test]
fn derivative_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "curve.json");
    let o = fal(&[
        "derivative",
        "--preset",
        "fig1a",
        "--format",
        "json",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0);
    round_trips::<DerivativeReport>(&read(&p));
}

#[test]
fn run_from_minimizer_is_a_single_row() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "run.csv");
    let o = fal(&[
        "run",
        "--s0",
        "5",
        "--nu",
        "0.5",
        "--mu",
        "0.01",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0);
    let text = read(&p);
    assert_eq!(text.lines().next().unwrap(), "k,s_re,s_im,abs_err");
    assert_eq!(rows(&text), vec![vec![0.0, 5.0, 0.0, 0.0]]);
    let side: RunSummary = serde_json::from_str(&read(&out(&dir, "run.json"))).unwrap();
    assert_eq!(side.steps, 0);
}

#[test]
fn run_from_negative_start_complexifies() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "neg.csv");
    let o = fal(&[
        "run",
        "--s-star",
        "-0.6406",
        "--s0",
        "-0.25",
        "--nu",
        "0.5",
        "--mu",
        "0.01",
        "--max-iters",
        "50",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0);
    let side = read(&out(&dir, "neg.json"));
    round_trips::<RunSummary>(&side);
    let side: RunSummary = serde_json::from_str(&side).unwrap();
    assert_eq!(side.complexification_index, Some(1));
}

#[test]
fn run_preset_lands_near_target_value() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "slow.json");
    let o = fal(&[
        "run",
        "--preset",
        "fig2a",
        "--max-iters",
        "2000",
        "--format",
        "json",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0);
    let text = read(&p);
    round_trips::<RunDocument>(&text);
    let doc: RunDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.rows.len(), 2001);
    assert!(
        (doc.summary.final_re - 4.316).abs() <= 0.05,
        "{}",
        doc.summary.final_re
    );
}

#[test]
fn compare_presets_are_ordered() {
    for preset in ["fig2a", "fig2b"] {
        let dir = TempDir::new().unwrap();
        let p = out(&dir, "cmp.csv");
        let o = fal(&["compare", "--preset", preset, "--out", path_str(&p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = read(&p);
        assert_eq!(
            text.lines().next().unwrap(),
            "k,fal_re,eq21,eq21star,baseline"
        );
        let side = read(&out(&dir, "cmp.json"));
        round_trips::<ConvergenceReport>(&side);
        let report: ConvergenceReport = serde_json::from_str(&side).unwrap();
        assert!(report.ordering_holds(), "{preset}: {report:?}");
        assert_eq!(
            rows(&text).len(),
            report.fal_actual.steady_state_index.unwrap() + 1
        );
    }
}

#[test]
fn compare_degenerate_start() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "deg.json");
    let o = fal(&[
        "compare",
        "--preset",
        "fig2a",
        "--s0",
        "4.285600001",
        "--criterion",
        "first-passage:7.2e-4",
        "--format",
        "json",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: ConvergenceReport = serde_json::from_str(&read(&p)).unwrap();
    assert_eq!(r.corrected.steady_state_index, Some(0));
    assert_eq!(r.fal_actual.steady_state_index, Some(0));
    assert_eq!(r.baseline.steady_state_index, Some(0));
    // the exponential estimate ignores the start
    assert_eq!(r.naive.steady_state_index, Some(29));
}

#[test]
fn claims_report() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "claims.json");
    let o = fal(&["claims", "--out", path_str(&p)]);
    let text = read(&p);
    round_trips::<Vec<ClaimResult>>(&text);
    let claims: Vec<ClaimResult> = serde_json::from_str(&text).unwrap();
    let get = |id: &str| claims.iter().find(|c| c.id == id).unwrap();
    let eq3 = get("eq3prime");
    assert_eq!(eq3.evidence["re"], 0.0);
    assert!((eq3.evidence["im"] + std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-9);
    assert!(get("nu_zero_parabola").status.is_ok());
    assert!(get("count_ordering").status.is_ok());
    let failing = claims.iter().filter(|c| !c.status.is_ok()).count();
    assert_eq!(code(&o), if failing == 0 { 0 } else { 4 });
}

#[test]
fn invalid_flags_write_nothing() {
    let cases: &[&[&str]] = &[
        &[
            "run", "--mu", "0.1", "--chi", "0.2", "--s0", "3", "--nu", "0.5",
        ],
        &["run", "--s0", "0", "--nu", "0.5", "--mu", "0.1"],
        &["run", "--s0", "3", "--nu", "2", "--mu", "0.1"],
        &["run", "--s0", "3", "--nu", "0.5"],
        &["compare", "--preset", "fig9"],
        &["compare", "--preset", "fig1a"],
        &["compare", "--preset", "fig2a", "--criterion", "plateau:-1"],
        &["compare", "--preset", "fig2a", "--criterion", "settle:1e-3"],
        &["compare", "--chi", "0.25", "--nu", "0.5", "--s0", "3"],
        &["derivative", "--nu", "0.5", "--domain", "8:-4:10"],
        &["derivative", "--nu", "-0.5"],
        &["derivative", "--preset", "fig2a"],
        &["claims", "--max-iters", "0"],
    ];
    for args in cases {
        let dir = TempDir::new().unwrap();
        let p = out(&dir, "x.csv");
        let mut full = args.to_vec();
        full.extend(["--out", path_str(&p)]);
        let o = fal(&full);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(
            std::fs::read_dir(dir.path()).unwrap().count(),
            0,
            "{args:?} left files behind"
        );
    }
}

#[test]
fn sidecar_collision_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let p = out(&dir, "trace.json");
    let o = fal(&[
        "run",
        "--s0",
        "6",
        "--nu",
        "0.5",
        "--mu",
        "0.01",
        "--max-iters",
        "3",
        "--format",
        "csv",
        "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!p.exists());
}

#[test]
fn stdout_when_no_out_path() {
    let o = fal(&["derivative", "--nu", "1.5", "--domain", "1:2:3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("s,d_re,d_im,singular_flag\n1.0000000000000000e0,"));
}
