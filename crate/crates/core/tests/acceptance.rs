//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use chaosadapt::adaptation::{adapt_successive, variance_share, AdaptConfig, AdaptedExpansion};
use chaosadapt::chaos::{enumerate_multiindices, measurement_matrix, rotated_measurement_matrix, sample_expansion};
use chaosadapt::cli::write_run;
use chaosadapt::crossval::{select_epsilon, EpsilonGrid};
use chaosadapt::io::{
    gaussian_to_uniform, ks_distance, read_dataset_csv, read_manifest, read_ranges, uniform_to_gaussian,
    write_dataset_csv, write_table_csv, ColumnSchema, ParameterRange,
};
use chaosadapt::rng::{gaussian_matrix, seeded_rng};
use chaosadapt::sparse::{BpdnSolver, DrConfig};
use chaosadapt::stiefel::{random_stiefel, ProjectionMatrix};
use chaosadapt::testbeds::{
    generate_dataset, ridge_exact_adaptation, solve_problem, BurgersProblem, BurgersSpec, ForcingCase, RidgeSpec,
    Testbed,
};
use chaosadapt::Dataset;
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ridge_runs(dmax: usize) -> (Dataset, Vec<AdaptedExpansion>, f64) {
    let data = generate_dataset(&Testbed::Ridge(RidgeSpec::new(12).unwrap()), 180, 2024).unwrap();
    let config = AdaptConfig {
        seed: 17,
        ..AdaptConfig::default()
    };
    let start = Instant::now();
    let runs = adapt_successive(&data, dmax, 3, &config).unwrap();
    (data, runs, start.elapsed().as_secs_f64())
}

fn ridge_recovery(run: &AdaptedExpansion, seconds: f64) -> Outcome {
    let (w_true, oracle) = ridge_exact_adaptation(&RidgeSpec::new(12).unwrap()).unwrap();
    let align: f64 = run.projection.row(0).iter().zip(w_true.row(0)).map(|(a, b)| a * b).sum();
    let worst = run
        .expansion
        .coefficients()
        .iter()
        .zip(oracle.coefficients())
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max);
    outcome(
        align.abs() >= 0.99 && worst < 0.05 && seconds < 120.0,
        format!(
            "|<w, 1/sqrt(d)>| = {:.6}, worst coefficient rel. error = {:.2e}, {:.1}s",
            align.abs(),
            worst,
            seconds
        ),
    )
}

fn coinciding_densities(runs: &[AdaptedExpansion]) -> Outcome {
    let samples: Vec<Vec<f64>> = runs
        .iter()
        .enumerate()
        .map(|(k, r)| sample_expansion(&r.expansion, 100_000, 900 + k as u64).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            worst = worst.max(ks_distance(&samples[i], &samples[j]).unwrap());
        }
    }
    outcome(worst < 0.02, format!("max pairwise KS distance = {worst:.4}"))
}

fn second_row_share(runs: &[AdaptedExpansion]) -> Outcome {
    let share = variance_share(&runs[1].expansion, 1);
    outcome(share < 0.01, format!("variance share of second-coordinate terms = {share:.3e}"))
}

fn interchanges(run: &AdaptedExpansion) -> Outcome {
    outcome(
        run.converged && run.outer_iterations <= 10,
        format!("converged = {}, outer iterations = {}", run.converged, run.outer_iterations),
    )
}

fn burgers_monotone() -> Outcome {
    let spec = BurgersSpec {
        modes: 20,
        nx: 128,
        nt: 128,
        ..BurgersSpec::with_case(ForcingCase::Uniform)
    };
    let data = generate_dataset(&Testbed::Burgers(spec), 200, 77).unwrap();
    let config = AdaptConfig {
        seed: 5,
        ..AdaptConfig::default()
    };
    let runs = adapt_successive(&data, 3, 3, &config).unwrap();
    let res: Vec<f64> = runs.iter().map(|r| r.l2_residual).collect();
    let pass = res.windows(2).all(|w| w[1] <= w[0] + 1e-8);
    let shown: Vec<String> = res.iter().map(|r| format!("{r:.4e}")).collect();
    outcome(pass, format!("residuals for d' = 1, 2, 3: {}", shown.join(", ")))
}

fn gradient_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let d = 3 + (k as usize % 6);
        let reduced = 1 + (k as usize % 3).min(d - 1);
        let order = 1 + (k as usize % 4);
        let inst = common::misfit_instance(1000 + k, d, reduced, order, 40);
        worst = worst.max(common::gradient_relative_error(&inst, 1e-5));
    }
    outcome(worst < 1e-6, format!("max relative gradient error over 20 instances = {worst:.2e}"))
}

fn rotation_equivalence() -> Outcome {
    let d = 8;
    let mut rng = seeded_rng(55);
    let x = gaussian_matrix(&mut rng, 120, d);
    let u = DVector::from_iterator(120, (0..120).map(|i| (x[(i, 0)] - x[(i, 3)]).tanh() + 0.3 * x[(i, 5)].powi(2)));
    let data = Dataset::new(x, u).unwrap();
    let set = enumerate_multiindices(3, 3).unwrap();
    let w = random_stiefel(d, 3, None, 12).unwrap();
    let base = common::ls_residual(&rotated_measurement_matrix(&w, data.inputs(), &set).unwrap(), data.outputs());
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let b = common::random_orthogonal(3, 300 + k);
        let bw = ProjectionMatrix::new(&b * w.matrix(), 0).unwrap();
        let r = common::ls_residual(&rotated_measurement_matrix(&bw, data.inputs(), &set).unwrap(), data.outputs());
        worst = worst.max((r - base).abs() / base);
    }
    outcome(worst < 1e-8, format!("max relative residual change over 10 rotations = {worst:.2e}"))
}

fn planted_recovery() -> Outcome {
    let mut rng = seeded_rng(808);
    let set = enumerate_multiindices(12, 3).unwrap();
    let points = gaussian_matrix(&mut rng, 180, 12);
    let psi = measurement_matrix(&points, &set).unwrap();
    let mut support: Vec<usize> = (0..set.len()).collect();
    support.shuffle(&mut rng);
    let mut truth = DVector::zeros(set.len());
    for &j in &support[..5] {
        let mag: f64 = rng.gen_range(1.0..3.0);
        truth[j] = if rng.gen_bool(0.5) { mag } else { -mag };
    }
    let u = &psi * &truth;
    let solver = BpdnSolver::new(psi, u.clone()).unwrap();
    let sol = solver.solve(1e-6 * u.norm(), &DrConfig::default(), None).unwrap();
    let rel = (&sol.coefficients - &truth).norm() / truth.norm();
    outcome(rel < 1e-2, format!("180x455, 5-sparse: relative error = {rel:.2e}"))
}

fn crossval_contract() -> Outcome {
    let mut rng = seeded_rng(31);
    let x = gaussian_matrix(&mut rng, 50, 4);
    let u = DVector::from_iterator(
        50,
        (0..50).map(|i| 0.5 + x[(i, 1)] - 0.8 * x[(i, 0)] * x[(i, 2)] + 0.02 * rng.gen_range(-1.0..1.0)),
    );
    let data = Dataset::new(x, u).unwrap();
    let set = enumerate_multiindices(4, 3).unwrap();
    let dr = DrConfig::default();
    let rep = select_epsilon(&data, None, &set, &EpsilonGrid::RelativeToData { count: 10 }, 0.8, 6, &dr).unwrap();
    let min = rep.validation_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let exact = rep.selected_epsilon == (data.len() as f64 / rep.n_train as f64).sqrt() * min;
    let reference = common::straight_line_crossval(&data, &set, 10, 0.8, 6, &dr);
    let agree = (rep.selected_epsilon - reference).abs() <= 1e-12 * reference;
    outcome(
        exact && agree,
        format!(
            "selected = {:.6e}, scaled-min identity exact = {exact}, straight-line = {reference:.6e}",
            rep.selected_epsilon
        ),
    )
}

fn campaign_pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let names = [
        "inflow_mach", "inflow_temp", "turb_intensity", "turb_length", "fuel_temp", "fuel_pressure", "prandtl_t",
        "schmidt_t", "smag_cs", "wall_temp", "inj_angle",
    ];
    let mut text = String::from("name,lower,upper\n");
    for (i, n) in names.iter().enumerate() {
        text += &format!("{n},{},{}\n", 0.5 * i as f64, 1.0 + i as f64);
    }
    fs::write(d.join("ranges.csv"), text).unwrap();
    let ranges: Vec<ParameterRange> = read_ranges(&d.join("ranges.csv")).unwrap();

    // synthetic campaign: QoI driven by a 2-d projection of the Gaussian inputs
    let gauss = gaussian_matrix(&mut seeded_rng(256), 256, 11);
    let mut rows = Vec::new();
    for i in 0..256 {
        let xi: Vec<f64> = gauss.row(i).iter().copied().collect();
        let a = (xi[0] + xi[1] - xi[4]) / 3f64.sqrt();
        let b = (xi[2] - xi[7]) / 2f64.sqrt();
        let mut row = gaussian_to_uniform(&xi, &ranges).unwrap();
        row.push(1.0 + a + 0.3 * a * b + 0.1 * b * b);
        rows.push(row);
    }
    let mut headers: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    headers.push("u".into());
    write_table_csv(&d.join("campaign.csv"), &headers, &rows).unwrap();

    let data = read_dataset_csv(&d.join("campaign.csv"), &ColumnSchema::Physical(ranges.clone())).unwrap();
    let shape_ok = data.len() == 256 && data.dimension() == 11;

    // Gaussian-space CSV round trip
    write_dataset_csv(&data, &d.join("gauss.csv")).unwrap();
    let back = read_dataset_csv(&d.join("gauss.csv"), &ColumnSchema::default()).unwrap();
    let csv_ok = back == data;

    // Φ / Φ⁻¹ round trip
    let mut worst_map: f64 = 0.0;
    let mut rng = seeded_rng(3);
    for _ in 0..1000 {
        let theta: Vec<f64> = ranges.iter().map(|r| rng.gen_range(r.lower..r.upper)).collect();
        let xi = uniform_to_gaussian(&theta, &ranges).unwrap();
        let again = gaussian_to_uniform(&xi, &ranges).unwrap();
        for (a, b) in theta.iter().zip(&again) {
            worst_map = worst_map.max((a - b).abs());
        }
    }
    let map_ok = worst_map < 1e-9;

    let config = AdaptConfig {
        seed: 8,
        restarts: 4,
        ..AdaptConfig::default()
    };
    let runs = adapt_successive(&data, 2, 3, &config).unwrap();
    let run_dir = d.join("run");
    write_run(&run_dir, &config, 3, &data, &d.join("campaign.csv"), &runs).unwrap();
    let manifest = read_manifest(&run_dir.join("manifest.json")).unwrap();
    let replay_data = read_dataset_csv(
        std::path::Path::new(manifest.dataset_path.as_deref().unwrap()),
        &ColumnSchema::Physical(ranges),
    )
    .unwrap();
    let replay = adapt_successive(&replay_data, manifest.max_reduced, manifest.order, &manifest.config).unwrap();
    let replay_ok = replay_data.digest() == manifest.dataset_digest && manifest.matches(&replay);

    outcome(
        shape_ok && csv_ok && map_ok && replay_ok,
        format!(
            "256x11 ingest = {shape_ok}, csv round trip = {csv_ok}, map round trip max err = {worst_map:.1e}, manifest replay = {replay_ok}"
        ),
    )
}

struct Manufactured {
    nu: f64,
}

impl BurgersProblem for Manufactured {
    fn initial(&self, x: f64) -> f64 {
        1.0 + (2.0 * x).sin()
    }
    fn boundary(&self, _t: f64) -> (f64, f64) {
        (1.0, 1.0)
    }
    fn source(&self, x: f64, t: f64) -> f64 {
        let e = (-t).exp();
        let v = 1.0 + (2.0 * x).sin() * e;
        let vt = -(2.0 * x).sin() * e;
        let vx = 2.0 * (2.0 * x).cos() * e;
        let vxx = -4.0 * (2.0 * x).sin() * e;
        vt + v * vx - self.nu * vxx
    }
}

fn manufactured_order() -> Outcome {
    let p = Manufactured { nu: 0.5 };
    let mut errors = Vec::new();
    for n in [32usize, 64, 128, 256, 512] {
        let field = solve_problem(&p, 0.5, n, n, 1e-12, 25).unwrap();
        let h = 2.0 * PI / n as f64;
        let err = field
            .x
            .iter()
            .zip(field.final_slice())
            .map(|(x, v)| (v - (1.0 + (2.0 * x).sin() * (-1.0f64).exp())).powi(2) * h)
            .sum::<f64>()
            .sqrt();
        errors.push(err);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let finest = *orders.last().unwrap();
    outcome(
        finest >= 1.0,
        format!("observed orders {orders:.3?}; full-fidelity case (i) run is documented, not gated"),
    )
}

fn main() -> ExitCode {
    let (_, runs, seconds) = ridge_runs(3);
    let (_, single, single_seconds) = ridge_runs(1);
    let _ = seconds;
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("ridge adaptation recovery", Box::new(|| ridge_recovery(&single[0], single_seconds))),
        ("coinciding densities", Box::new(|| coinciding_densities(&runs))),
        ("second-row insignificance", Box::new(|| second_row_share(&runs))),
        ("outer-loop convergence bound", Box::new(|| interchanges(&single[0]))),
        ("residual monotonicity (burgers)", Box::new(burgers_monotone)),
        ("gradient correctness", Box::new(gradient_check)),
        ("rotation equivalence", Box::new(rotation_equivalence)),
        ("planted sparse recovery", Box::new(planted_recovery)),
        ("cross-validation contract", Box::new(crossval_contract)),
        ("campaign ingestion pipeline", Box::new(campaign_pipeline)),
        ("burgers solver convergence order", Box::new(manufactured_order)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
