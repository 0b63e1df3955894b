//! Command-line front end: config files, flag overrides, and artifact
//! emission with per-file manifests.
//!
//! Every command writes its main artifact plus a `<name>.manifest.json`
//! recording the tool version, the effective seed, and a hash of the
//! resolved configuration. Manifests carry no timestamps, so two runs with
//! the same inputs produce byte-identical files.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{load_csv_path, CsvSchema, Dataset, FitResult, FitSpec};
use crate::error::Error;
use crate::estimators::{fit, lambda_guideline, Estimator};
use crate::eval::{
    make_folds, run_experiment, simulation_grid, ExperimentGrid, ExperimentResult,
    MetricAggregation, SimulationRow,
};
use crate::metrics::{metrics_report, MetricsReport};
use crate::synth::{
    generate_analysis_data, generate_population, AnalysisCoefficients, ScenarioSpec,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(
    name = "fairreg",
    version,
    about = "Fair regression for continuous outcomes: synthetic data, constrained fits, fairness reports"
)]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for grid evaluation (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the synthetic simulation population (x1..x9, a1, a2, y1, y2).
    SimulatePopulation(SimulatePopulationArgs),
    /// Generate the claims-style analysis dataset with the `mhsud` group.
    GenerateAnalysis(GenerateAnalysisArgs),
    /// Fit one estimator on a CSV dataset; optionally diff against a baseline.
    Fit(FitArgs),
    /// Evaluate a grid of estimators under k-fold cross-validation.
    Experiment(ExperimentArgs),
    /// Repeated-subsample simulation study on a generated population.
    ReplicateSim(ReplicateSimArgs),
}

#[derive(Args, Debug)]
pub struct SimulatePopulationArgs {
    #[arg(long)]
    pub rows: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GenerateAnalysisArgs {
    #[arg(long)]
    pub rows: Option<usize>,
    /// Coefficient table file; defaults to the shipped calibration.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub outcome: Option<String>,
    /// Protected-group column to target.
    #[arg(long)]
    pub group: Option<String>,
    /// Estimator name (ols, avg_constrained, weighted_avg_constrained,
    /// cov_constrained, mrd_penalized, netcomp_penalized, netcomp_constrained).
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    /// Interpret z as a fraction of the group's mean outcome.
    #[arg(long)]
    pub z_fraction: bool,
    /// Parameter-free baseline estimator for a coefficient-diff table.
    #[arg(long)]
    pub baseline: Option<String>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long)]
    pub group: Option<String>,
    /// Number of CV folds.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReplicateSimArgs {
    /// Simulation scenario (1, 2, or 3).
    #[arg(long)]
    pub scenario: Option<u8>,
    #[arg(long)]
    pub population_size: Option<usize>,
    /// Rows drawn per replicate.
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Group targeted by the estimator grid (a1 or a2).
    #[arg(long)]
    pub group: Option<String>,
}

// ---------------------------------------------------------------------------
// Config file

/// On-disk run configuration. Each command reads its own section; command
/// line flags win over config values, which win over built-in defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<OutputFormat>,
    pub simulate_population: SimulatePopulationConfig,
    pub generate_analysis: GenerateAnalysisConfig,
    pub fit: FitConfig,
    pub experiment: ExperimentConfig,
    pub replicate_sim: ReplicateSimConfig,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulatePopulationConfig {
    pub rows: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateAnalysisConfig {
    pub rows: Option<usize>,
    pub coefficients: Option<PathBuf>,
}

/// Column selection shared by `fit` and `experiment`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemaConfig {
    pub outcome: Option<String>,
    /// Feature columns; empty means every non-outcome, non-group, non-id
    /// column in header order.
    pub features: Vec<String>,
    pub group_cols: Vec<String>,
    pub id_col: Option<String>,
    pub add_intercept: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub schema: SchemaConfig,
    pub group: Option<String>,
    pub estimator: Option<Estimator>,
    pub baseline: Option<Estimator>,
    pub solver_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub data: Option<PathBuf>,
    pub schema: SchemaConfig,
    pub group: Option<String>,
    /// Estimator grid; empty means a default grid with the lambda guideline
    /// for the loaded sample size.
    pub specs: Vec<Estimator>,
    pub k: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplicateSimConfig {
    pub scenario: Option<u8>,
    pub population_size: Option<usize>,
    pub sample_size: Option<usize>,
    pub draws: Option<usize>,
    pub k: Option<usize>,
    pub group: Option<String>,
    /// Second group reported alongside the targeted one.
    pub other_group: Option<String>,
    pub specs: Vec<Estimator>,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

// ---------------------------------------------------------------------------
// Entry point

/// Parse `args` and run; returns the process exit code (0 ok, 1 config
/// error, 2 runtime/solver error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out_dir = cli
        .out_dir
        .or(cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let format = cli.format.or(cfg.format).unwrap_or(OutputFormat::Csv);
    if let Some(w) = cli.workers.or(cfg.workers) {
        if w == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        // ignore failure: the global pool may already exist in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let ctx = Context {
        seed,
        out_dir,
        format,
    };
    match cli.command {
        Command::SimulatePopulation(a) => cmd_simulate_population(&ctx, &cfg, &a),
        Command::GenerateAnalysis(a) => cmd_generate_analysis(&ctx, &cfg, &a),
        Command::Fit(a) => cmd_fit(&ctx, &cfg, &a),
        Command::Experiment(a) => cmd_experiment(&ctx, &cfg, &a),
        Command::ReplicateSim(a) => cmd_replicate_sim(&ctx, &cfg, &a),
    }
}

struct Context {
    seed: u64,
    out_dir: PathBuf,
    format: OutputFormat,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

// ---------------------------------------------------------------------------
// Manifests

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config_sha256: String,
    output: String,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<serde_json::Value>,
}

fn config_hash<T: Serialize>(effective: &T) -> Result<String, Error> {
    let bytes = serde_json::to_vec(effective)
        .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn write_manifest(output_path: &Path, manifest: &Manifest) -> Result<(), Error> {
    let mut name = output_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    let path = output_path.with_file_name(name);
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

fn json_value<T: Serialize>(v: &T) -> Result<serde_json::Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Config(format!("cannot serialize: {e}")))
}

fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialize: {e}")))?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate-population

fn cmd_simulate_population(
    ctx: &Context,
    cfg: &RunConfig,
    args: &SimulatePopulationArgs,
) -> Result<(), Error> {
    let rows = args.rows.or(cfg.simulate_population.rows).unwrap_or(100_000);
    if rows == 0 {
        return Err(Error::Config("rows must be >= 1".into()));
    }
    let effective = (rows, ctx.seed);
    let pop = generate_population(rows, ctx.seed);

    let names = [
        "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "a1", "a2", "y1", "y2",
    ];
    let col = |j: usize, i: usize| -> f64 {
        match j {
            0..=8 => pop.x[j][i],
            9 => pop.a1[i] as u8 as f64,
            10 => pop.a2[i] as u8 as f64,
            11 => pop.y1[i],
            _ => pop.y2[i],
        }
    };
    let mut moments = serde_json::Map::new();
    for (j, name) in names.iter().enumerate() {
        let mean = (0..rows).map(|i| col(j, i)).sum::<f64>() / rows as f64;
        moments.insert(format!("mean_{name}"), json_value(&mean)?);
    }

    let out = match ctx.format {
        OutputFormat::Csv => {
            let path = ctx.path("population.csv");
            let mut wtr = csv::Writer::from_path(&path)?;
            wtr.write_record(names)?;
            for i in 0..rows {
                let rec: Vec<String> = (0..names.len()).map(|j| format!("{}", col(j, i))).collect();
                wtr.write_record(&rec)?;
            }
            wtr.flush()?;
            path
        }
        OutputFormat::Json => {
            let path = ctx.path("population.json");
            let records: Vec<serde_json::Value> = (0..rows)
                .map(|i| {
                    serde_json::Value::Object(
                        names
                            .iter()
                            .enumerate()
                            .map(|(j, name)| (name.to_string(), serde_json::json!(col(j, i))))
                            .collect(),
                    )
                })
                .collect();
            write_json_pretty(&path, &records)?;
            path
        }
    };
    write_manifest(
        &out,
        &Manifest {
            tool: "fairreg",
            version: env!("CARGO_PKG_VERSION"),
            command: "simulate-population",
            seed: ctx.seed,
            config_sha256: config_hash(&effective)?,
            output: out.file_name().unwrap().to_string_lossy().into_owned(),
            rows,
            summary: Some(serde_json::Value::Object(moments)),
        },
    )
}

// ---------------------------------------------------------------------------
// generate-analysis

fn cmd_generate_analysis(
    ctx: &Context,
    cfg: &RunConfig,
    args: &GenerateAnalysisArgs,
) -> Result<(), Error> {
    let rows = args.rows.or(cfg.generate_analysis.rows).unwrap_or(20_000);
    let coef_path = args
        .coefficients
        .clone()
        .or(cfg.generate_analysis.coefficients.clone());
    let coefs = match &coef_path {
        None => AnalysisCoefficients::shipped_default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            AnalysisCoefficients::from_table_str(&text)?
        }
    };
    let effective = (rows, ctx.seed, coefs.to_table_string());
    let (ds, summary) = generate_analysis_data(&coefs, rows, ctx.seed)?;

    let out = match ctx.format {
        OutputFormat::Csv => {
            let path = ctx.path("analysis.csv");
            ds.write_csv_path(&path)?;
            path
        }
        OutputFormat::Json => {
            let path = ctx.path("analysis.json");
            let records: Vec<serde_json::Value> = (0..ds.n())
                .map(|i| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("id".into(), serde_json::json!(ds.ids[i]));
                    obj.insert("y".into(), serde_json::json!(ds.y[i]));
                    for (j, name) in ds.feature_names.iter().enumerate() {
                        obj.insert(name.clone(), serde_json::json!(ds.x[(i, j)]));
                    }
                    for (g, mask) in &ds.groups {
                        obj.insert(g.clone(), serde_json::json!(mask[i] as u8));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            write_json_pretty(&path, &records)?;
            path
        }
    };
    write_manifest(
        &out,
        &Manifest {
            tool: "fairreg",
            version: env!("CARGO_PKG_VERSION"),
            command: "generate-analysis",
            seed: ctx.seed,
            config_sha256: config_hash(&effective)?,
            output: out.file_name().unwrap().to_string_lossy().into_owned(),
            rows,
            summary: Some(json_value(&summary)?),
        },
    )
}

// ---------------------------------------------------------------------------
// fit

fn estimator_from_flags(args: &FitArgs) -> Result<Option<Estimator>, Error> {
    let Some(name) = &args.estimator else {
        return Ok(None);
    };
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Error::Config(format!("estimator `{name}` requires --{flag}")))
    };
    let est = match name.as_str() {
        "ols" => Estimator::Ols,
        "avg_constrained" => Estimator::AvgConstrained,
        "weighted_avg_constrained" => Estimator::WeightedAvgConstrained {
            alpha: need(args.alpha, "alpha")?,
        },
        "cov_constrained" => Estimator::CovConstrained {
            m: need(args.m, "m")?,
        },
        "mrd_penalized" => Estimator::MrdPenalized {
            lambda: need(args.lambda, "lambda")?,
        },
        "netcomp_penalized" => Estimator::NetcompPenalized {
            lambda: need(args.lambda, "lambda")?,
        },
        "netcomp_constrained" => Estimator::NetcompConstrained {
            z: need(args.z, "z")?,
            z_fraction_of_group_mean: args.z_fraction,
        },
        other => {
            return Err(Error::Config(format!("unknown estimator `{other}`")));
        }
    };
    Ok(Some(est))
}

fn baseline_from_flag(name: &str) -> Result<Estimator, Error> {
    match name {
        "ols" => Ok(Estimator::Ols),
        "avg_constrained" => Ok(Estimator::AvgConstrained),
        other => Err(Error::Config(format!(
            "baseline flag supports parameter-free estimators (ols, avg_constrained); \
             use a config file for `{other}`"
        ))),
    }
}

/// Resolve the column selection against the file header. An empty feature
/// list means every column that is not the outcome, a group, or the id.
fn resolve_schema(
    data: &Path,
    schema: &SchemaConfig,
    outcome_flag: Option<&String>,
    group: &str,
) -> Result<CsvSchema, Error> {
    let outcome = outcome_flag
        .cloned()
        .or(schema.outcome.clone())
        .unwrap_or_else(|| "y".to_string());
    let mut group_cols = schema.group_cols.clone();
    if group_cols.is_empty() {
        group_cols.push(group.to_string());
    } else if !group_cols.iter().any(|g| g == group) {
        return Err(Error::Config(format!(
            "group `{group}` is not among the configured group columns"
        )));
    }
    let header: Vec<String> = {
        let f = std::fs::File::open(data)?;
        let mut rdr = csv::Reader::from_reader(f);
        rdr.headers()?.iter().map(str::to_string).collect()
    };
    let id_col = match &schema.id_col {
        Some(c) => Some(c.clone()),
        None if header.iter().any(|h| h == "id") => Some("id".to_string()),
        None => None,
    };
    let features = if schema.features.is_empty() {
        header
            .iter()
            .filter(|h| {
                **h != outcome && !group_cols.contains(h) && Some(h.as_str()) != id_col.as_deref()
            })
            .cloned()
            .collect()
    } else {
        schema.features.clone()
    };
    Ok(CsvSchema {
        outcome_col: outcome,
        feature_cols: features,
        group_cols,
        id_col,
        add_intercept: schema.add_intercept.unwrap_or(false),
    })
}

#[derive(Serialize)]
struct FitDiagnostics {
    estimator: String,
    group: String,
    constraint_active: bool,
    multiplier: f64,
    kkt_residual: f64,
    objective_value: f64,
    rank_deficient: bool,
    notes: Vec<String>,
    in_sample: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<String>,
}

fn in_sample_report(ds: &Dataset, fitres: &FitResult, group: &str) -> Result<MetricsReport, Error> {
    let yhat = ds.predict(&fitres.theta);
    metrics_report(yhat.as_slice(), ds.y.as_slice(), &ds.groups[group], None)
}

fn cmd_fit(ctx: &Context, cfg: &RunConfig, args: &FitArgs) -> Result<(), Error> {
    let fc = &cfg.fit;
    let data = args
        .data
        .clone()
        .or(fc.data.clone())
        .ok_or_else(|| Error::Config("fit: no input data file given (--data)".into()))?;
    let group = args
        .group
        .clone()
        .or(fc.group.clone())
        .unwrap_or_else(|| "mhsud".to_string());
    let estimator = estimator_from_flags(args)?
        .or(fc.estimator.clone())
        .ok_or_else(|| Error::Config("fit: no estimator given (--estimator)".into()))?;
    let baseline = match &args.baseline {
        Some(name) => Some(baseline_from_flag(name)?),
        None => fc.baseline.clone(),
    };
    let schema = resolve_schema(&data, &fc.schema, args.outcome.as_ref(), &group)?;
    let hash = config_hash(&(&data, &schema, &group, &estimator, &baseline, ctx.seed))?;

    let ds = load_csv_path(&data, &schema)?;
    let mut spec = FitSpec::new(estimator, group.clone());
    if let Some(tol) = fc.solver_tol {
        spec.solver_tol = tol;
    }
    let result = fit(&ds, &spec)?;
    let base_result = baseline
        .map(|b| {
            let mut bs = FitSpec::new(b, group.clone());
            bs.solver_tol = spec.solver_tol;
            fit(&ds, &bs)
        })
        .transpose()?;

    // theta table; with a baseline, also the per-coefficient change sorted
    // largest-magnitude first
    let mut rows: Vec<(String, f64, Option<(f64, f64)>)> = ds
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let delta = base_result
                .as_ref()
                .map(|b| (b.theta[j], result.theta[j] - b.theta[j]));
            (name.clone(), result.theta[j], delta)
        })
        .collect();
    if base_result.is_some() {
        rows.sort_by(|a, b| {
            let (da, db) = (a.2.unwrap().1.abs(), b.2.unwrap().1.abs());
            db.partial_cmp(&da).unwrap().then_with(|| a.0.cmp(&b.0))
        });
    }

    let diagnostics = FitDiagnostics {
        estimator: spec.estimator.label(),
        group: group.clone(),
        constraint_active: result.constraint_active,
        multiplier: result.multiplier,
        kkt_residual: result.kkt_residual,
        objective_value: result.objective_value,
        rank_deficient: result.rank_deficient,
        notes: result.notes.clone(),
        in_sample: in_sample_report(&ds, &result, &group)?,
        baseline: base_result.as_ref().map(|b| b.spec.estimator.label()),
    };

    let out = match ctx.format {
        OutputFormat::Csv => {
            let path = ctx.path("theta.csv");
            let mut wtr = csv::Writer::from_path(&path)?;
            if base_result.is_some() {
                wtr.write_record(["feature", "coefficient", "baseline", "diff"])?;
            } else {
                wtr.write_record(["feature", "coefficient"])?;
            }
            for (name, coef, delta) in &rows {
                match delta {
                    Some((base, d)) => wtr.write_record([
                        name.clone(),
                        format!("{coef}"),
                        format!("{base}"),
                        format!("{d}"),
                    ])?,
                    None => wtr.write_record([name.clone(), format!("{coef}")])?,
                }
            }
            wtr.flush()?;
            path
        }
        OutputFormat::Json => {
            let path = ctx.path("theta.json");
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|(name, coef, delta)| match delta {
                    Some((base, d)) => serde_json::json!({
                        "feature": name, "coefficient": coef, "baseline": base, "diff": d,
                    }),
                    None => serde_json::json!({"feature": name, "coefficient": coef}),
                })
                .collect();
            write_json_pretty(&path, &records)?;
            path
        }
    };
    write_json_pretty(&ctx.path("diagnostics.json"), &diagnostics)?;
    write_manifest(
        &out,
        &Manifest {
            tool: "fairreg",
            version: env!("CARGO_PKG_VERSION"),
            command: "fit",
            seed: ctx.seed,
            config_sha256: hash,
            output: out.file_name().unwrap().to_string_lossy().into_owned(),
            rows: ds.n(),
            summary: Some(json_value(&diagnostics)?),
        },
    )
}

// ---------------------------------------------------------------------------
// experiment

fn default_analysis_grid(n: usize) -> Vec<Estimator> {
    let lambda = lambda_guideline(n);
    vec![
        Estimator::Ols,
        Estimator::AvgConstrained,
        Estimator::WeightedAvgConstrained { alpha: 0.2 },
        Estimator::CovConstrained { m: 0.5 },
        Estimator::MrdPenalized { lambda },
        Estimator::NetcompPenalized { lambda },
    ]
}

fn write_experiment_table(
    ctx: &Context,
    name: &str,
    result: &ExperimentResult,
) -> Result<PathBuf, Error> {
    match ctx.format {
        OutputFormat::Csv => {
            let path = ctx.path(&format!("{name}.csv"));
            let mut wtr = csv::Writer::from_path(&path)?;
            let mut header = vec!["estimator".to_string()];
            header.extend(MetricsReport::CSV_HEADER.iter().map(|s| s.to_string()));
            header.push("error".to_string());
            wtr.write_record(&header)?;
            for row in &result.rows {
                let mut rec = vec![row.spec.estimator.label()];
                rec.extend(row.cv_metrics.csv_fields());
                rec.push(String::new());
                wtr.write_record(&rec)?;
            }
            for (spec, err) in &result.failures {
                let mut rec = vec![spec.estimator.label()];
                rec.extend(std::iter::repeat_n(
                    "NA".to_string(),
                    MetricsReport::CSV_HEADER.len(),
                ));
                rec.push(err.to_string());
                wtr.write_record(&rec)?;
            }
            wtr.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = ctx.path(&format!("{name}.json"));
            #[derive(Serialize)]
            struct Record<'a> {
                estimator: String,
                cv: Option<&'a MetricsReport>,
                in_sample: Option<&'a MetricsReport>,
                error: Option<String>,
            }
            let mut records: Vec<Record> = result
                .rows
                .iter()
                .map(|r| Record {
                    estimator: r.spec.estimator.label(),
                    cv: Some(&r.cv_metrics),
                    in_sample: Some(&r.in_sample_metrics),
                    error: None,
                })
                .collect();
            records.extend(result.failures.iter().map(|(spec, err)| Record {
                estimator: spec.estimator.label(),
                cv: None,
                in_sample: None,
                error: Some(err.to_string()),
            }));
            write_json_pretty(&path, &records)?;
            Ok(path)
        }
    }
}

fn cmd_experiment(ctx: &Context, cfg: &RunConfig, args: &ExperimentArgs) -> Result<(), Error> {
    let ec = &cfg.experiment;
    let data = args
        .data
        .clone()
        .or(ec.data.clone())
        .ok_or_else(|| Error::Config("experiment: no input data file given (--data)".into()))?;
    let group = args
        .group
        .clone()
        .or(ec.group.clone())
        .unwrap_or_else(|| "mhsud".to_string());
    let k = args.k.or(ec.k).unwrap_or(5);
    let schema = resolve_schema(&data, &ec.schema, args.outcome.as_ref(), &group)?;
    let ds = load_csv_path(&data, &schema)?;
    let estimators = if ec.specs.is_empty() {
        default_analysis_grid(ds.n())
    } else {
        ec.specs.clone()
    };
    let effective = (&data, &schema, &group, &estimators, k, ctx.seed);

    let grid = ExperimentGrid {
        specs: estimators
            .iter()
            .map(|e| FitSpec::new(e.clone(), group.clone()))
            .collect(),
        cv: make_folds(ds.n(), k, ctx.seed)?,
        aggregation: MetricAggregation::Pooled,
    };
    let result = run_experiment(&ds, &grid)?;
    let out = write_experiment_table(ctx, "experiment", &result)?;
    let all_ok = result.failures.is_empty();
    write_manifest(
        &out,
        &Manifest {
            tool: "fairreg",
            version: env!("CARGO_PKG_VERSION"),
            command: "experiment",
            seed: ctx.seed,
            config_sha256: config_hash(&effective)?,
            output: out.file_name().unwrap().to_string_lossy().into_owned(),
            rows: result.rows.len() + result.failures.len(),
            summary: Some(serde_json::json!({
                "k": k,
                "n": ds.n(),
                "failed_specs": result.failures.len(),
            })),
        },
    )?;
    if !all_ok {
        return Err(Error::Solver(format!(
            "{} of {} specs failed; see the experiment table's error column",
            result.failures.len(),
            result.rows.len() + result.failures.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// replicate-sim

fn cmd_replicate_sim(ctx: &Context, cfg: &RunConfig, args: &ReplicateSimArgs) -> Result<(), Error> {
    let rc = &cfg.replicate_sim;
    let scenario_id = args.scenario.or(rc.scenario).unwrap_or(1);
    let population_size = args
        .population_size
        .or(rc.population_size)
        .unwrap_or(100_000);
    let sample_size = args.sample_size.or(rc.sample_size).unwrap_or(10_000);
    let draws = args.draws.or(rc.draws).unwrap_or(50);
    let k = args.k.or(rc.k).unwrap_or(5);
    let group = args
        .group
        .clone()
        .or(rc.group.clone())
        .unwrap_or_else(|| "a1".to_string());
    let other_group = rc
        .other_group
        .clone()
        .unwrap_or_else(|| if group == "a2" { "a1".into() } else { "a2".into() });
    let specs: Vec<FitSpec> = if rc.specs.is_empty() {
        simulation_grid(&group)
    } else {
        rc.specs
            .iter()
            .map(|e| FitSpec::new(e.clone(), group.clone()))
            .collect()
    };
    let effective = (
        scenario_id,
        population_size,
        sample_size,
        draws,
        k,
        &group,
        &other_group,
        &specs,
        ctx.seed,
    );

    let scenario = ScenarioSpec::new(scenario_id)?;
    let pop = generate_population(population_size, ctx.seed);
    let table = crate::eval::replicate_simulation(
        &pop,
        &scenario,
        &specs,
        &other_group,
        sample_size,
        draws,
        ctx.seed,
        k,
    )?;

    let out = match ctx.format {
        OutputFormat::Csv => {
            let path = ctx.path("replicate_sim.csv");
            let mut wtr = csv::Writer::from_path(&path)?;
            wtr.write_record([
                "estimator",
                "r2",
                "pred_ratio_g",
                "net_comp_g",
                "net_comp_other",
                "fair_cov",
                "draws",
            ])?;
            for row in &table {
                wtr.write_record([
                    row.estimator.clone(),
                    format!("{}", row.r2),
                    format!("{}", row.pred_ratio_g),
                    format!("{}", row.net_comp_g),
                    format!("{}", row.net_comp_g2),
                    format!("{}", row.fair_cov),
                    format!("{}", row.draws_used),
                ])?;
            }
            wtr.flush()?;
            path
        }
        OutputFormat::Json => {
            let path = ctx.path("replicate_sim.json");
            write_json_pretty::<Vec<SimulationRow>>(&path, &table)?;
            path
        }
    };
    write_manifest(
        &out,
        &Manifest {
            tool: "fairreg",
            version: env!("CARGO_PKG_VERSION"),
            command: "replicate-sim",
            seed: ctx.seed,
            config_sha256: config_hash(&effective)?,
            output: out.file_name().unwrap().to_string_lossy().into_owned(),
            rows: table.len(),
            summary: Some(serde_json::json!({
                "scenario": scenario_id,
                "population_size": population_size,
                "sample_size": sample_size,
                "draws": draws,
                "k": k,
                "group": group,
            })),
        },
    )
}
