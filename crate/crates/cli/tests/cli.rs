use std::io::Write;
use std::process::{Command, Output};

use fermi_equilibria::density::{Density, FermiDiracDensity};
use fermi_equilibria::fermi::{sphere_area, Dimension};
use fermi_equilibria::numerics::QuadratureSpec;
use serde_json::Value;

fn fermi_eq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermi-eq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_ball_moments() {
    let n = Dimension::new(3).unwrap();
    let m0 = sphere_area(n) / 3.0;
    let m2 = sphere_area(n) / 5.0;
    let out = fermi_eq(&[
        "classify",
        "--n",
        "3",
        "--m0",
        &m0.to_string(),
        "--m2",
        &m2.to_string(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], "fermi-equilibria/1");
    assert_eq!(v["result"]["classification"]["regime"], "RegimeII");
    let r = v["result"]["classification"]["radius"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-10);
}

#[test]
fn classify_rounded_ball_moments_needs_looser_tolerance() {
    let base = [
        "classify", "--n", "3", "--m0", "4.18879", "--m2", "2.51327", "--json",
    ];
    let strict = fermi_eq(&base);
    assert_eq!(strict.status.code(), Some(1));
    assert_eq!(
        json_of(&strict)["result"]["classification"]["regime"],
        "Infeasible"
    );

    let mut loose = base.to_vec();
    loose.extend(["--tol", "1e-5"]);
    let out = fermi_eq(&loose);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let r = v["result"]["classification"]["radius"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-6);
}

#[test]
fn invert_round_trip() {
    let spec = QuadratureSpec::default();
    let f: Density = FermiDiracDensity::centered(1.0, 1.0, Dimension::new(2).unwrap())
        .unwrap()
        .into();
    let m = f.compute_moments(&spec).unwrap();
    let out = fermi_eq(&[
        "invert",
        "--n",
        "2",
        "--m0",
        &m.m0.to_string(),
        "--m2",
        &m.m2.to_string(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((v["result"]["a"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert!((v["result"]["b"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert!(v["result"]["residuals"]["m0"].as_f64().unwrap() < 1e-9);
    assert!(v["result"]["residuals"]["m2"].as_f64().unwrap() < 1e-9);
}

#[test]
fn reuleaux_check_fails_with_witness() {
    let out = fermi_eq(&[
        "geometry", "check", "--shape", "reuleaux", "--pairs", "100000", "--seed", "7", "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["manifest"]["subcommand"], "geometry check");
    let w = &v["result"]["witnesses"][0];
    for key in ["x", "y", "sigma", "candidate1", "candidate2"] {
        assert_eq!(w[key].as_array().unwrap().len(), 2, "{key}");
    }
}

#[test]
fn ball_check_passes() {
    let out = fermi_eq(&[
        "geometry", "check", "--shape", "ball", "--n", "3", "--pairs", "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "residual",
        "--n",
        "2",
        "--kind",
        "fd",
        "--samples",
        "20000",
        "--seed",
        "5",
        "--json",
        "--no-timestamp",
    ];
    let a = fermi_eq(&args);
    let b = fermi_eq(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a)["manifest"]["timestamp"].is_null());
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |w: &str| {
        let out = fermi_eq(&[
            "dissipation",
            "--n",
            "2",
            "--kind",
            "fd",
            "--a",
            "2",
            "--samples",
            "30000",
            "--workers",
            w,
            "--json",
            "--no-timestamp",
        ]);
        json_of(&out)["result"].clone()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn manifest_carries_timestamp_and_flags() {
    let out = fermi_eq(&["fermi-int", "--n", "3", "--s", "2", "--t", "0.5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let m = &v["manifest"];
    assert!(m["timestamp"].as_str().unwrap().contains('T'));
    assert_eq!(m["flags"]["s"], 2.0);
    assert_eq!(m["flags"]["t"], 0.5);
    assert!(m["versions"].as_str().unwrap().starts_with("fermi-eq "));
    for r in v["result"]["residuals"].as_array().unwrap() {
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn p_curve_as_csv() {
    let out = fermi_eq(&["fermi-int", "--n", "2", "--points", "7", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["t", "p", "p_normalized"]);
    let p: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(p.len(), 7);
    assert!(p.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn moments_from_csv_file() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "r,value\n0,1\n1,1\n1.000001,0").unwrap();
    let path = file.path().to_str().unwrap();
    let out = fermi_eq(&[
        "moments", "--input", path, "--n", "2", "--tol", "1e-5", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["classification"]["regime"], "RegimeII");
    assert!(v["result"]["entropy"].as_f64().unwrap().abs() < 1e-5);
}

#[test]
fn annulus_is_not_an_equilibrium() {
    let out = fermi_eq(&[
        "residual",
        "--n",
        "2",
        "--kind",
        "annulus",
        "--samples",
        "20000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = fermi_eq(&["verify", "--n", "2", "--kind", "annulus", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        json_of(&out)["result"]["report"]["functional_form"]["pass"],
        false
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fermi_eq(&["bogus"]).status.code(), Some(2));
    assert_eq!(fermi_eq(&["classify", "--n", "3"]).status.code(), Some(2));
    let out = fermi_eq(&["fermi-int", "--n", "1", "--s", "1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = fermi_eq(&["geometry", "check", "--shape", "reuleaux", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
