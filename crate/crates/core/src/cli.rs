//! Command-line front end: `generate`, `adapt`, `crossval`, `density`,
//! `evaluate` and `report`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::adaptation::{
    adapt_successive, coefficient_carryover_report, variance_share, AdaptConfig, AdaptedExpansion,
};
use crate::chaos::{enumerate_multiindices, sample_expansion};
use crate::crossval::select_epsilon;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::{
    apply_override, apply_overrides, format_real, gaussian_to_uniform, kde_density, parse_overrides, read_dataset_csv,
    read_expansion, read_manifest, read_ranges, write_atomic, write_dataset_csv, write_expansion, write_manifest,
    write_table_csv, Bandwidth, ColumnSchema, RunManifest,
};
use crate::stiefel::ProjectionMatrix;
use crate::testbeds::{generate_dataset, BurgersSpec, ForcingCase, RidgeSpec, Testbed};

#[derive(Debug, Parser)]
#[command(name = "chaosadapt", version, about = "Basis adaptation for Hermite chaos surrogates")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic testbed into a dataset CSV.
    Generate(GenerateArgs),
    /// Fit adapted expansions for reduced dimensions 1..=dmax.
    Adapt(AdaptArgs),
    /// Cross-validate the ℓ1 fit tolerance.
    Crossval(CrossvalArgs),
    /// Kernel density of an expansion's output distribution.
    Density(DensityArgs),
    /// Evaluate an expansion at the inputs of a dataset.
    Evaluate(EvaluateArgs),
    /// Summarize an adaptation run directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TestbedKind {
    Ridge,
    Burgers,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ForcingArg {
    Decaying,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub testbed: TestbedKind,
    /// Input dimension (number of forcing modes for burgers).
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub forcing: ForcingArg,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long, default_value_t = 128)]
    pub nt: usize,
    /// Write physical parameter columns mapped through these ranges.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Flags shared by the fitting commands.
#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 1)]
    pub dmax: usize,
    /// `auto` or a fixed tolerance.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// File of `key=value` solver overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl SolverArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn build_config(&self) -> Result<AdaptConfig> {
        let mut config = AdaptConfig::default();
        if let Some(path) = &self.config {
            let pairs = parse_overrides(&crate::error::read_text(path)?, path)?;
            apply_overrides(&mut config, &pairs)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(r) = self.restarts {
            apply_override(&mut config, "restarts", &r.to_string())?;
        }
        if let Some(e) = &self.epsilon {
            apply_override(&mut config, "epsilon", e)?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `name,lower,upper` table for physical input columns.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        load_dataset(&self.data, self.ranges.as_deref())
    }
}

fn load_dataset(path: &Path, ranges: Option<&Path>) -> Result<Dataset> {
    let schema = match ranges {
        Some(r) => ColumnSchema::Physical(read_ranges(r)?),
        None => ColumnSchema::default(),
    };
    read_dataset_csv(path, &schema)
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Dataset CSV (defaults to the manifest's dataset with --replay).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Re-run the adaptation recorded in a manifest and check the results.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Use the projection of this expansion instead of the raw inputs.
    #[arg(long)]
    pub expansion: Option<PathBuf>,
    /// Grid table output (`epsilon,validation_error`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Expansion to sample.
    #[arg(long, conflicts_with = "data")]
    pub expansion: Option<PathBuf>,
    /// Use the output column of a dataset instead.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// `auto` (Silverman) or a positive width.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub expansion: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Table of `u,prediction`.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `adapt`.
    #[arg(long)]
    pub run: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Adapt(a) => adapt(&a),
        Command::Crossval(a) => crossval(&a),
        Command::Density(a) => density(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Report(a) => report(&a),
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let testbed = match a.testbed {
        TestbedKind::Ridge => Testbed::Ridge(RidgeSpec::new(a.dim)?),
        TestbedKind::Burgers => Testbed::Burgers(BurgersSpec {
            modes: a.dim,
            nx: a.nx,
            nt: a.nt,
            ..BurgersSpec::with_case(match a.forcing {
                ForcingArg::Decaying => ForcingCase::Decaying,
                ForcingArg::Uniform => ForcingCase::Uniform,
            })
        }),
    };
    let data = generate_dataset(&testbed, a.n, a.seed)?;
    match &a.ranges {
        None => write_dataset_csv(&data, &a.output)?,
        Some(path) => {
            let ranges = read_ranges(path)?;
            if ranges.len() != data.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: data.dimension(),
                    actual: ranges.len(),
                    context: "parameter ranges vs testbed dimension",
                });
            }
            let mut headers: Vec<String> = ranges.iter().map(|r| r.name.clone()).collect();
            headers.push("u".into());
            let rows = (0..data.len())
                .map(|i| {
                    let xi: Vec<f64> = data.inputs().row(i).iter().copied().collect();
                    let mut row = gaussian_to_uniform(&xi, &ranges)?;
                    row.push(data.outputs()[i]);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            write_table_csv(&a.output, &headers, &rows)?;
        }
    }
    info!("wrote {} samples to {}", data.len(), a.output.display());
    Ok(())
}

fn adapt(a: &AdaptArgs) -> Result<()> {
    let data_path = a.data.clone();
    let ranges = a.ranges.clone();
    if let Some(manifest_path) = &a.replay {
        return replay(manifest_path, data_path.as_deref(), ranges.as_deref());
    }
    let data_path = data_path.ok_or_else(|| Error::InvalidArgument("--data is required".into()))?;
    let out = a
        .output
        .clone()
        .ok_or_else(|| Error::InvalidArgument("--output is required".into()))?;
    let data = load_dataset(&data_path, ranges.as_deref())?;
    let config = a.solver.build_config()?;
    let results = adapt_successive(&data, a.solver.dmax, a.solver.order, &config)?;
    write_run(&out, &config, a.solver.order, &data, &data_path, &results)?;
    for r in &results {
        println!(
            "d'={} residual={} epsilon={} iterations={}",
            r.reduced_dim(),
            format_real(r.l2_residual),
            r.fit_epsilon.map_or("ols".into(), format_real),
            r.outer_iterations
        );
    }
    Ok(())
}

/// Writes `manifest.json`, `d<k>.json` per stage and `residuals.csv`.
pub fn write_run(
    out: &Path,
    config: &AdaptConfig,
    order: usize,
    data: &Dataset,
    data_path: &Path,
    results: &[AdaptedExpansion],
) -> Result<()> {
    fs::create_dir_all(out)?;
    for r in results {
        write_expansion(r, &out.join(format!("d{}.json", r.reduced_dim())))?;
    }
    let rows: Vec<Vec<f64>> = results
        .iter()
        .map(|r| {
            vec![
                r.reduced_dim() as f64,
                r.l2_residual,
                r.fit_epsilon.unwrap_or(f64::NAN),
                r.outer_iterations as f64,
            ]
        })
        .collect();
    write_table_csv(
        &out.join("residuals.csv"),
        &["reduced_dim", "l2_residual", "fit_epsilon", "outer_iterations"],
        &rows,
    )?;
    let dataset_path = fs::canonicalize(data_path)
        .unwrap_or_else(|_| data_path.to_path_buf())
        .display()
        .to_string();
    let manifest = RunManifest::new(config, order, data, Some(dataset_path), results);
    write_manifest(&manifest, &out.join("manifest.json"))
}

fn replay(manifest_path: &Path, data_path: Option<&Path>, ranges: Option<&Path>) -> Result<()> {
    let manifest = read_manifest(manifest_path)?;
    let path = match (data_path, &manifest.dataset_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(Error::InvalidArgument("manifest names no dataset; pass --data".into())),
    };
    let data = load_dataset(&path, ranges)?;
    if data.digest() != manifest.dataset_digest {
        return Err(Error::InvalidArgument(format!(
            "dataset {} does not match the manifest digest",
            path.display()
        )));
    }
    let results = adapt_successive(&data, manifest.max_reduced, manifest.order, &manifest.config)?;
    if !manifest.matches(&results) {
        return Err(Error::InvalidArgument("replay differs from the recorded results".into()));
    }
    println!("replay matches {} recorded stages", results.len());
    Ok(())
}

fn crossval(a: &CrossvalArgs) -> Result<()> {
    let data = a.data.load()?;
    let config = a.solver.build_config()?;
    let projection: Option<ProjectionMatrix> = a
        .expansion
        .as_ref()
        .map(|p| read_expansion(p).map(|e| e.projection))
        .transpose()?;
    let dim = projection.as_ref().map_or(data.dimension(), |w| w.reduced_dim());
    let set = enumerate_multiindices(dim, a.solver.order)?;
    let rep = select_epsilon(
        &data,
        projection.as_ref(),
        &set,
        &config.crossval_grid,
        config.crossval_train_fraction,
        config.seed,
        &config.dr,
    )?;
    if let Some(out) = &a.output {
        let rows: Vec<Vec<f64>> = rep
            .epsilon_grid
            .iter()
            .zip(&rep.validation_errors)
            .map(|(e, v)| vec![*e, *v])
            .collect();
        write_table_csv(out, &["epsilon", "validation_error"], &rows)?;
    }
    println!("selected_epsilon={}", format_real(rep.selected_epsilon));
    println!("min_validation_error={}", format_real(rep.min_validation_error));
    println!("n_train={} n_valid={} skipped={}", rep.n_train, rep.n_valid, rep.skipped.len());
    Ok(())
}

fn density(a: &DensityArgs) -> Result<()> {
    let samples = match (&a.expansion, &a.data) {
        (Some(e), None) => sample_expansion(&read_expansion(e)?.expansion, a.samples, a.seed)?,
        (None, Some(d)) => load_dataset(d, None)?.outputs().iter().copied().collect(),
        _ => return Err(Error::InvalidArgument("pass exactly one of --expansion or --data".into())),
    };
    let bandwidth = if a.bandwidth.eq_ignore_ascii_case("auto") {
        Bandwidth::Auto
    } else {
        Bandwidth::Fixed(
            a.bandwidth
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad bandwidth `{}`", a.bandwidth)))?,
        )
    };
    let curve = kde_density(&samples, a.grid, bandwidth)?;
    let rows: Vec<Vec<f64>> = curve
        .abscissae
        .iter()
        .zip(&curve.pdf_values)
        .map(|(x, p)| vec![*x, *p])
        .collect();
    write_table_csv(&a.output, &["x", "pdf"], &rows)?;
    println!("bandwidth={}", format_real(curve.bandwidth));
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let e = read_expansion(&a.expansion)?;
    let data = a.data.load()?;
    let pred = e.evaluate_many(data.inputs())?;
    let rows: Vec<Vec<f64>> = data.outputs().iter().zip(&pred).map(|(u, p)| vec![*u, *p]).collect();
    write_table_csv(&a.output, &["u", "prediction"], &rows)?;
    let rms = (data
        .outputs()
        .iter()
        .zip(&pred)
        .map(|(u, p)| (u - p).powi(2))
        .sum::<f64>()
        / data.len() as f64)
        .sqrt();
    println!("rms_error={}", format_real(rms));
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let manifest = read_manifest(&a.run.join("manifest.json"))?;
    let mut results = Vec::new();
    for k in 1..=manifest.max_reduced {
        results.push(read_expansion(&a.run.join(format!("d{k}.json")))?);
    }
    let mut text = String::new();
    text += &format!(
        "dataset {} ({} samples, {} inputs), order {}\n",
        manifest.dataset_digest, manifest.dataset_rows, manifest.dataset_dim, manifest.order
    );
    text += "d'  residual                 epsilon                  iters  last-row share\n";
    for r in &results {
        let share = variance_share(&r.expansion, r.reduced_dim() - 1);
        text += &format!(
            "{:<3} {:<24} {:<24} {:<6} {:.3e}\n",
            r.reduced_dim(),
            format_real(r.l2_residual),
            r.fit_epsilon.map_or("ols".into(), format_real),
            r.outer_iterations,
            share
        );
    }
    for c in coefficient_carryover_report(&results)? {
        text += &format!(
            "carryover {}→{}: ‖Δc‖ = {:.4e} of ‖c‖ = {:.4e}\n",
            c.from_dim, c.to_dim, c.difference_norm, c.current_norm
        );
    }
    write_atomic(&a.run.join("report.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}
