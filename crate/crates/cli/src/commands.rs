//! Subcommand definitions and their implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ecc_core::chi::{chi_curve, q_grid};
use ecc_core::curves::{center, FunctionalSample, PairedSample};
use ecc_core::ecc::{estimate_pipeline, pairwise_matrix, PipelineOptions};
use ecc_core::simulate::{
    generate_paired, invert_oracle, BiasExperiment, DgpConfig, DgpVariant, ExperimentTable,
};
use ecc_core::tail::{hill_series, KSelection};
use ecc_core::transform::power_transform;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::{parse_curve_file, write_curve_file, write_curves};
use crate::resample::resample_linear;

/// Version of the JSON documents written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

/// Extremal correlation of paired functional data.
#[derive(Debug, Parser)]
#[command(name = "ecc", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the estimation pipeline on two curve files and print a JSON report.
    Estimate(EstimateArgs),
    /// Pipeline estimate for every pair of curve files, as a CSV matrix.
    Pairwise(PairwiseArgs),
    /// Hill plot data of the curve norms of one file.
    Hill(HillArgs),
    /// chi(q) and chibar(q) of the curve norms of two files.
    Chi(ChiArgs),
    /// Draw a paired sample from a simulation model.
    Simulate(SimulateArgs),
    /// Monte Carlo bias experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Map the curves of a file to a different tail index.
    Transform(TransformArgs),
    /// Interpolate the curves of a file onto a regular grid of another size.
    Resample(ResampleArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Fixed number of upper order statistics.
    #[arg(long, conflicts_with = "kselect")]
    pub k: Option<usize>,
    /// Data-driven choice of k: mindist or ks.
    #[arg(long, default_value = "mindist")]
    pub kselect: KSelection,
    /// Tail index both margins are mapped to when theirs differ.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub alpha_target: f64,
    /// Margins whose tail indices differ by at most this are left as is.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub tau: f64,
    /// Do not subtract the sample mean curve first.
    #[arg(long)]
    pub no_center: bool,
}

impl PipelineArgs {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            k_selection: self.k.map_or(self.kselect, KSelection::Fixed),
            alpha_target: self.alpha_target,
            tau: self.tau,
            center: !self.no_center,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct PairwiseArgs {
    #[arg(long, num_args = 2.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Also write the full reports as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HillArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Largest k in the plot; defaults to n / 2.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub no_center: bool,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Levels as start:stop:step.
    #[arg(long, default_value = "0.8:0.99:0.01")]
    pub qgrid: String,
    #[arg(long)]
    pub no_center: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Target extremal correlation (ignored by the bernoulli and shared
    /// models, whose correlation is fixed by their structure).
    #[arg(long, allow_negative_numbers = true)]
    pub rho_xy: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "J", default_value_t = 100)]
    pub grid_len: usize,
    #[arg(long)]
    pub seed: u64,
    /// base, shared, bernoulli:<pA>,<pB> or phase:<delta>.
    #[arg(long, default_value = "base")]
    pub variant: DgpVariant,
    #[arg(long, default_value_t = ecc_core::simulate::DEFAULT_NOISE_SD, allow_negative_numbers = true)]
    pub noise_sd: f64,
    /// Output prefix; writes <prefix>_x.csv and <prefix>_y.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; falls back to ECC_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write the full tables as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_source: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_target: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "J")]
    pub grid_len: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Executes `cmd`, writing its primary output to `out`.
pub fn run(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Estimate(a) => estimate(a, out),
        Command::Pairwise(a) => pairwise(a, out),
        Command::Hill(a) => hill(a, out),
        Command::Chi(a) => chi(a, out),
        Command::Simulate(a) => simulate(a),
        Command::Experiment(a) => experiment(a, out),
        Command::Transform(a) => {
            let s = parse_curve_file(&a.input)?;
            let g = power_transform(&s, a.alpha_source, a.alpha_target)
                .map_err(CliError::core("transform"))?;
            emit_curves(&g, a.output.as_deref(), out)
        }
        Command::Resample(a) => {
            let s = parse_curve_file(&a.input)?;
            emit_curves(&resample_linear(&s, a.grid_len)?, a.output.as_deref(), out)
        }
    }
}

fn emit_curves(s: &FunctionalSample, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_curve_file(s, p),
        None => write_curves(s, out).map_err(|e| CliError::internal("write_curves", e)),
    }
}

fn write_json<T: Serialize>(operation: &'static str, value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::internal(operation, e))?;
    writeln!(out).map_err(|e| CliError::internal(operation, e))
}

fn write_json_file<T: Serialize>(operation: &'static str, value: &T, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_json(operation, value, &mut buf)?;
    fs::write(path, buf)
        .map_err(|e| CliError::internal(operation, format!("{}: {e}", path.display())))
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

fn csv_err(operation: &'static str) -> impl Fn(csv::Error) -> CliError {
    move |e| CliError::internal(operation, e)
}

fn load_pair(x: &Path, y: &Path) -> Result<PairedSample> {
    PairedSample::new(parse_curve_file(x)?, parse_curve_file(y)?)
        .map_err(CliError::core("load_pair"))
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(
        || p.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

#[derive(Serialize)]
struct EstimateDoc<'a> {
    schema_version: u32,
    x: &'a Path,
    y: &'a Path,
    report: ecc_core::ecc::PipelineReport,
}

fn estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let p = load_pair(&a.x, &a.y)?;
    let report =
        estimate_pipeline(&p, &a.pipeline.options()).map_err(CliError::core("estimate"))?;
    write_json(
        "estimate",
        &EstimateDoc {
            schema_version: SCHEMA_VERSION,
            x: &a.x,
            y: &a.y,
            report,
        },
        out,
    )
}

#[derive(Serialize)]
struct PairwiseDoc {
    schema_version: u32,
    labels: Vec<String>,
    options: PipelineOptions,
    result: ecc_core::ecc::PairwiseResult,
}

fn pairwise(a: &PairwiseArgs, out: &mut dyn Write) -> Result<()> {
    let samples = a
        .inputs
        .iter()
        .map(|p| parse_curve_file(p))
        .collect::<Result<Vec<_>>>()?;
    let opts = a.pipeline.options();
    let result = pairwise_matrix(&samples, &opts).map_err(CliError::core("pairwise"))?;
    let labels: Vec<String> = a.inputs.iter().map(|p| stem(p)).collect();

    let mut w = csv_writer(out);
    let err = csv_err("pairwise");
    w.write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))
        .map_err(&err)?;
    for (label, row) in labels.iter().zip(&result.rho) {
        w.write_record(std::iter::once(label.clone()).chain(row.iter().map(f64::to_string)))
            .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::internal("pairwise", e))?;
    if let Some(path) = &a.json {
        let doc = PairwiseDoc {
            schema_version: SCHEMA_VERSION,
            labels,
            options: opts,
            result,
        };
        write_json_file("pairwise", &doc, path)?;
    }
    Ok(())
}

fn norms(path: &Path, centered: bool) -> Result<Vec<f64>> {
    let s = parse_curve_file(path)?;
    Ok(if centered {
        center(&s).norms()
    } else {
        s.norms()
    })
}

fn hill(a: &HillArgs, out: &mut dyn Write) -> Result<()> {
    let v = norms(&a.input, !a.no_center)?;
    let n = v.len();
    let k_max = a
        .kmax
        .unwrap_or((n / 2).clamp(2, n.saturating_sub(1).max(2)));
    let series = hill_series(&v, k_max).map_err(CliError::core("hill"))?;
    let mut w = csv_writer(out);
    let err = csv_err("hill");
    w.write_record(["k", "alpha", "lo", "hi"]).map_err(&err)?;
    for e in &series.entries {
        w.write_record([
            e.k.to_string(),
            e.alpha_hat.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::internal("hill", e))
}

/// Parses `start:stop:step`.
pub fn parse_qgrid(s: &str) -> Result<Vec<f64>> {
    const OP: &str = "parse_qgrid";
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(CliError::parse(
            OP,
            format!("expected start:stop:step, got {s:?}"),
        ));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::parse(OP, format!("not a number: {t:?}")))
    };
    q_grid(num(start)?, num(stop)?, num(step)?).map_err(|e| CliError::parse(OP, e.to_string()))
}

fn chi(a: &ChiArgs, out: &mut dyn Write) -> Result<()> {
    let grid = parse_qgrid(&a.qgrid)?;
    let (u, v) = (norms(&a.x, !a.no_center)?, norms(&a.y, !a.no_center)?);
    let series = chi_curve(&u, &v, &grid).map_err(CliError::core("chi"))?;
    let mut w = csv_writer(out);
    let err = csv_err("chi");
    w.write_record([
        "q",
        "chi",
        "chibar",
        "chi_lo",
        "chi_hi",
        "chibar_lo",
        "chibar_hi",
        "raw_chibar",
    ])
    .map_err(&err)?;
    for e in &series.entries {
        let row = [
            e.q,
            e.chi,
            e.chibar,
            e.chi_lo,
            e.chi_hi,
            e.chibar_lo,
            e.chibar_hi,
            e.raw_chibar,
        ];
        w.write_record(row.iter().map(f64::to_string))
            .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::internal("chi", e))
}

/// `<prefix>_x.csv` and `<prefix>_y.csv`.
pub fn simulate_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with("_x.csv"), with("_y.csv"))
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    const OP: &str = "simulate";
    if a.rho_xy.is_nan() || a.rho_xy.abs() > 1.0 {
        return Err(CliError::Core {
            operation: OP,
            source: ecc_core::Error::Domain(format!(
                "rho_xy must lie in [-1, 1], got {}",
                a.rho_xy
            )),
        });
    }
    let cfg = DgpConfig::new(invert_oracle(a.rho_xy, a.alpha), a.alpha, a.n, a.seed)
        .with_grid_len(a.grid_len)
        .with_variant(a.variant)
        .with_noise_sd(a.noise_sd);
    let p = generate_paired(&cfg).map_err(CliError::core(OP))?;
    let (xp, yp) = simulate_paths(&a.out);
    write_curve_file(p.x(), &xp)?;
    write_curve_file(p.y(), &yp)
}

fn default_kselect() -> String {
    "mindist".into()
}

fn default_variant() -> String {
    "base".into()
}

fn default_grid_len() -> usize {
    100
}

fn default_noise_sd() -> f64 {
    ecc_core::simulate::DEFAULT_NOISE_SD
}

/// Contents of an experiment config file.
///
/// ```toml
/// alpha = 3.0
/// n = [100, 500, 2000]
/// targets = [-0.9, 0.0, 0.9]
/// reps = 1000
/// seed = 1
/// kselect = "mindist"   # optional: mindist, ks or fixed:<k>
/// variant = "base"      # optional: base, shared, bernoulli:<pA>,<pB>, phase:<delta>
/// J = 100               # optional grid size
/// noise_sd = 0.5        # optional
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub n: Vec<usize>,
    #[serde(default)]
    pub targets: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_kselect")]
    pub kselect: String,
    #[serde(default = "default_variant")]
    pub variant: String,
    #[serde(rename = "J", default = "default_grid_len")]
    pub grid_len: usize,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::parse("experiment_config", e.to_string()))
    }

    /// One experiment per sample size.
    pub fn experiments(&self) -> Result<Vec<BiasExperiment>> {
        const OP: &str = "experiment_config";
        let k_selection: KSelection = self
            .kselect
            .parse()
            .map_err(|e: ecc_core::Error| CliError::parse(OP, e.to_string()))?;
        let variant: DgpVariant = self
            .variant
            .parse()
            .map_err(|e: ecc_core::Error| CliError::parse(OP, e.to_string()))?;
        if self.n.is_empty() {
            return Err(CliError::parse(OP, "n must list at least one sample size"));
        }
        Ok(self
            .n
            .iter()
            .map(|&n| {
                BiasExperiment::new(
                    self.targets.clone(),
                    self.alpha,
                    n,
                    self.reps,
                    k_selection,
                    self.seed,
                )
                .with_variant(variant)
                .with_grid_len(self.grid_len)
                .with_noise_sd(self.noise_sd)
            })
            .collect())
    }
}

/// `--threads`, else `ECC_THREADS`, else `None` (all cores).
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ECC_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map(Some).map_err(|_| {
            CliError::parse(
                "experiment",
                format!("ECC_THREADS must be a positive integer, got {v:?}"),
            )
        }),
        _ => Ok(None),
    }
}

#[derive(Serialize)]
struct ExperimentDoc<'a> {
    schema_version: u32,
    config: &'a ExperimentConfig,
    tables: &'a [ExperimentTable],
}

/// Wide layout: one row per target, one column group per sample size.
pub fn write_experiment_csv(tables: &[ExperimentTable], out: &mut dyn Write) -> Result<()> {
    let err = csv_err("experiment");
    let mut w = csv_writer(out);
    let mut header = vec!["rho_xy".to_string()];
    for t in tables {
        let n = t.rows.first().map_or(0, |r| r.n);
        for col in ["mean", "bias", "se", "k", "failed"] {
            header.push(format!("{col}_n{n}"));
        }
    }
    w.write_record(&header).map_err(&err)?;
    let rows = tables.first().map_or(0, |t| t.rows.len());
    for i in 0..rows {
        let mut rec = vec![tables[0].rows[i].rho_xy_target.to_string()];
        for t in tables {
            let r = &t.rows[i];
            rec.extend([
                r.mean.to_string(),
                r.abs_bias.to_string(),
                r.se.to_string(),
                r.mean_k.to_string(),
                r.failed.to_string(),
            ]);
        }
        w.write_record(&rec).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::internal("experiment", e))
}

fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| {
        CliError::parse("experiment_config", format!("{}: {e}", a.config.display()))
    })?;
    let config = ExperimentConfig::parse(&text)?;
    let experiments = config.experiments()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count(a.threads)? {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::internal("experiment", e))?;
    let tables = pool
        .install(|| {
            experiments
                .iter()
                .map(BiasExperiment::run)
                .collect::<ecc_core::Result<Vec<_>>>()
        })
        .map_err(CliError::core("experiment"))?;
    write_experiment_csv(&tables, out)?;
    if let Some(path) = &a.json {
        let doc = ExperimentDoc {
            schema_version: SCHEMA_VERSION,
            config: &config,
            tables: &tables,
        };
        write_json_file("experiment", &doc, path)?;
    }
    Ok(())
}
