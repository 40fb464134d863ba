use std::fs;
use std::path::Path;
use std::process::Command;

use chaosadapt::io::{
    gaussian_to_uniform, read_dataset_csv, read_expansion, read_manifest, uniform_to_gaussian, write_dataset_csv,
    ColumnSchema, ParameterRange,
};
use chaosadapt::Dataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaosadapt"))
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_is_bitwise(
        (rows, cols, vals) in (1usize..12, 1usize..5).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), prop::collection::vec(finite(), r * (c + 1)))
        })
    ) {
        let x = DMatrix::from_row_slice(rows, cols, &vals[..rows * cols]);
        let u = DVector::from_column_slice(&vals[rows * cols..]);
        let data = Dataset::new(x, u).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset_csv(&data, &path).unwrap();
        let back = read_dataset_csv(&path, &ColumnSchema::default()).unwrap();
        prop_assert_eq!(back.inputs().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        data.inputs().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back.outputs(), data.outputs());
    }

    #[test]
    fn physical_mapping_round_trip(t in prop::collection::vec(0.0..1.0f64, 1..12)) {
        let ranges: Vec<ParameterRange> = (0..t.len())
            .map(|i| ParameterRange::new(format!("p{i}"), -3.0 * i as f64, 1.0 + i as f64 * i as f64).unwrap())
            .collect();
        let theta: Vec<f64> = t.iter().zip(&ranges).map(|(s, r)| r.lower + s * r.width()).collect();
        let xi = uniform_to_gaussian(&theta, &ranges).unwrap();
        let back = gaussian_to_uniform(&xi, &ranges).unwrap();
        for ((a, b), r) in theta.iter().zip(&back).zip(&ranges) {
            // boundary values are clipped to the 1e-12 quantile
            prop_assert!((a - b).abs() < 1e-9 + 2e-12 * r.width());
        }
    }
}

#[test]
fn generate_adapt_density_evaluate_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["generate", "--testbed", "ridge", "--dim", "12", "--n", "180", "--seed", "1", "-o", "data.csv"], d);
    let data = read_dataset_csv(&d.join("data.csv"), &ColumnSchema::default()).unwrap();
    assert_eq!((data.len(), data.dimension()), (180, 12));
    let header = fs::read_to_string(d.join("data.csv")).unwrap();
    assert!(header.starts_with("xi_1,xi_2,"));
    assert!(header.lines().next().unwrap().ends_with(",xi_12,u"));

    run_ok(
        &["adapt", "--data", "data.csv", "--order", "3", "--dmax", "3", "--seed", "1", "--restarts", "3", "-o", "run"],
        d,
    );
    for f in ["manifest.json", "d1.json", "d2.json", "d3.json", "residuals.csv"] {
        assert!(d.join("run").join(f).exists(), "{f}");
    }
    let manifest = read_manifest(&d.join("run/manifest.json")).unwrap();
    assert_eq!(manifest.stages.len(), 3);
    assert_eq!(manifest.config.seed, 1);
    assert_eq!(manifest.dataset_digest, data.digest());
    let e1 = read_expansion(&d.join("run/d1.json")).unwrap();
    assert_eq!(e1.reduced_dim(), 1);

    let out = run_ok(&["adapt", "--replay", "run/manifest.json"], d);
    assert!(out.contains("replay matches"));

    run_ok(&["density", "--expansion", "run/d1.json", "--samples", "20000", "-o", "pdf.csv"], d);
    let pdf = fs::read_to_string(d.join("pdf.csv")).unwrap();
    assert!(pdf.starts_with("x,pdf\n"));
    assert_eq!(pdf.lines().count(), 513);

    let out = run_ok(&["evaluate", "--expansion", "run/d2.json", "--data", "data.csv", "-o", "pred.csv"], d);
    let rms: f64 = out.trim().trim_start_matches("rms_error=").parse().unwrap();
    assert!(rms < 1e-2, "{rms}");

    let out = run_ok(&["report", "--run", "run"], d);
    assert!(out.contains("carryover 1→2"));

    let out = run_ok(&["crossval", "--data", "data.csv", "--order", "2", "--seed", "3", "-o", "cv.csv"], d);
    assert!(out.contains("selected_epsilon="));
}

#[test]
fn physical_campaign_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut ranges = String::from("name,lower,upper\n");
    for i in 0..11 {
        ranges += &format!("theta_{i},{},{}\n", i as f64, 2.0 * i as f64 + 1.0);
    }
    fs::write(d.join("ranges.csv"), ranges).unwrap();
    run_ok(
        &["generate", "--testbed", "ridge", "--dim", "11", "--n", "256", "--seed", "5", "--ranges", "ranges.csv", "-o", "campaign.csv"],
        d,
    );
    let text = fs::read_to_string(d.join("campaign.csv")).unwrap();
    assert!(text.starts_with("theta_0,theta_1,"));
    run_ok(
        &["adapt", "--data", "campaign.csv", "--ranges", "ranges.csv", "--order", "3", "--dmax", "2", "--seed", "2", "--restarts", "2", "-o", "run"],
        d,
    );
    let out = run_ok(&["adapt", "--replay", "run/manifest.json", "--ranges", "ranges.csv"], d);
    assert!(out.contains("replay matches 2"));
}

#[test]
fn config_file_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["generate", "--testbed", "ridge", "--dim", "4", "--n", "30", "-o", "data.csv"], d);
    fs::write(d.join("solver.cfg"), "restarts = 2\nseed = 11\ndr.max_iterations = 300\nmax_outer_iterations = 4\n").unwrap();
    run_ok(&["adapt", "--data", "data.csv", "--order", "2", "--config", "solver.cfg", "-o", "run"], d);
    let m = read_manifest(&d.join("run/manifest.json")).unwrap();
    assert_eq!((m.config.restarts, m.config.seed, m.config.dr.max_iterations), (2, 11, 300));
    // explicit flags win over the file
    run_ok(&["adapt", "--data", "data.csv", "--order", "2", "--config", "solver.cfg", "--seed", "4", "-o", "run2"], d);
    assert_eq!(read_manifest(&d.join("run2/manifest.json")).unwrap().config.seed, 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let usage = bin().args(["adapt", "--no-such-flag"]).current_dir(d).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let usage = bin().current_dir(d).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    fs::write(d.join("bad.csv"), "a,b,u\n1,2,3\n4,5\n").unwrap();
    let out = bin()
        .args(["adapt", "--data", "bad.csv", "-o", "run"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv:3"), "{err}");

    let out = bin()
        .args(["evaluate", "--expansion", "missing.json", "--data", "bad.csv", "-o", "x.csv"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}
