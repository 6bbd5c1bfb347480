use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robustbf::channel::{ArrayLayout, TrajectorySpec};
use robustbf::neighborhood::{Selection, ThresholdMetric};
use robustbf::optimizer::InitStrategy;
use robustbf_harness::experiment::{self, Query};
use robustbf_harness::verify::{run_verify, VerifyOptions};
use robustbf_harness::{ExperimentConfig, HarnessError, SweepSpec};
use serde_json::{json, Map, Value};

/// Robust downlink beamforming codebooks from a historical CSI database.
///
/// Configuration flags override the built-in defaults; a `--config` JSON
/// document (or a metadata file written by this tool) overrides both.
#[derive(Debug, Parser)]
#[command(name = "robustbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the environment and write the CSI database plus metadata.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Database output (JSON lines).
        #[arg(long, default_value = "csi_db.jsonl")]
        db: PathBuf,
        /// Metadata output (JSON, holds the full configuration).
        #[arg(long, default_value = "csi_db.meta.json")]
        meta: PathBuf,
    },
    /// Build the neighborhood channel list around a query.
    Neighborhood {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        db: PathBuf,
        /// JSON output; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design the MMS codebook for a query and compare it with EBF and MRT.
    Design {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        db: PathBuf,
        /// Codebook and comparison output (JSON).
        #[arg(long, default_value = "codebook.json")]
        out: PathBuf,
    },
    /// Run a sweep experiment and write per-trial CSV rows.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Per-trial CSV output.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Per-point averages (CSV); defaults to `<out stem>.summary.csv`.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Metadata (JSON); defaults to `<out stem>.meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Also write the environment's database next to the CSV.
        #[arg(long)]
        save_db: Option<PathBuf>,
    },
    /// Run the built-in property and oracle suite.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Smaller instance counts for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// JSON report output; the report is always printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TrajectoryKind {
    Circular,
    Zigzag,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitKind {
    Mrt,
    Ebf,
    BestBaseline,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Axis {
    Neighbors,
    Threshold,
    Angle,
    CodebookSize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    Squared,
    Unsquared,
}

impl From<Metric> for ThresholdMetric {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Squared => ThresholdMetric::Squared,
            Metric::Unsquared => ThresholdMetric::Unsquared,
        }
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Database index of the outdated CSI (default: the last record).
    #[arg(long, conflicts_with = "query_vector")]
    query_index: Option<usize>,
    /// JSON file `{"re": [...], "im": [...]}` holding the outdated CSI.
    #[arg(long)]
    query_vector: Option<PathBuf>,
}

impl QueryArgs {
    fn query(&self) -> Result<Query, HarnessError> {
        match &self.query_vector {
            Some(path) => Query::from_vector_file(path),
            None => Ok(Query::Index(self.query_index)),
        }
    }
}

/// Flags mirroring [`ExperimentConfig`] fields.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON configuration; its fields override every flag below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    trajectory: Option<TrajectoryKind>,
    /// Number of database records N.
    #[arg(long)]
    points: Option<usize>,
    /// Seconds between records (timestamps are null without it).
    #[arg(long)]
    sample_period: Option<f64>,
    /// Array columns × rows at half-wavelength spacing.
    #[arg(long, requires = "rows")]
    columns: Option<usize>,
    #[arg(long, requires = "columns")]
    rows: Option<usize>,
    /// Per-vector power budget in dBW.
    #[arg(long, allow_hyphen_values = true)]
    power_dbw: Option<f64>,
    /// Codebook size L.
    #[arg(long)]
    codebook_size: Option<usize>,
    /// Top-T initial matching.
    #[arg(long, conflicts_with = "gamma")]
    top_t: Option<usize>,
    /// Threshold initial matching.
    #[arg(long)]
    gamma: Option<f64>,
    /// What a threshold is compared against.
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    /// Local expansion half-window k.
    #[arg(long)]
    k: Option<usize>,
    /// Skip the most recent record during matching.
    #[arg(long)]
    exclude_query: bool,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    eps_outer: Option<f64>,
    #[arg(long)]
    eps_inner: Option<f64>,
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    /// Seed of `--init random`.
    #[arg(long)]
    init_seed: Option<u64>,
    /// Extra random-start runs of the solver.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    restart_seed: Option<u64>,
    /// Sweep axis.
    #[arg(long, value_enum, requires = "values")]
    axis: Option<Axis>,
    /// Comma-separated ascending sweep values.
    #[arg(long, value_delimiter = ',', requires = "axis")]
    values: Option<Vec<f64>>,
    /// Trials per sweep value.
    #[arg(long)]
    trials: Option<usize>,
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let base = ExperimentConfig::default();
        let mut o = Map::new();
        let mut put = |key: &str, v: Value| {
            o.insert(key.to_string(), v);
        };
        if let Some(s) = self.seed {
            put("seed", json!(s));
        }
        let mut trajectory = match self.trajectory {
            Some(TrajectoryKind::Circular) => TrajectorySpec::circular_default(),
            Some(TrajectoryKind::Zigzag) => TrajectorySpec::zigzag_default(),
            None => base.trajectory.clone(),
        };
        if let Some(n) = self.points {
            trajectory = trajectory.with_points(n);
        }
        put("trajectory", to_value(&trajectory));
        if let Some(dt) = self.sample_period {
            put("sample_period", json!(dt));
        }
        if let (Some(columns), Some(rows)) = (self.columns, self.rows) {
            put(
                "environment",
                json!({"array": ArrayLayout::Grid { columns, rows }}),
            );
        }
        if let Some(p) = self.power_dbw {
            put("power_dbw", json!(p));
        }
        if let Some(l) = self.codebook_size {
            put("codebook_size", json!(l));
        }
        let mut nb = base.neighborhood;
        if let Some(count) = self.top_t {
            nb.selection = Selection::TopT { count };
        }
        if let Some(gamma) = self.gamma {
            nb.selection = Selection::Threshold {
                gamma,
                metric: self.metric.map(Into::into).unwrap_or_default(),
            };
        }
        if let Some(k) = self.k {
            nb.k = k;
        }
        nb.exclude_query |= self.exclude_query;
        put("neighborhood", to_value(nb));

        let mut solver = base.solver.clone();
        if let Some(v) = self.max_outer {
            solver.max_outer = v;
        }
        if let Some(v) = self.eps_outer {
            solver.eps_outer = v;
        }
        if let Some(v) = self.eps_inner {
            solver.eps_inner = v;
        }
        if let Some(v) = self.restarts {
            solver.restarts = v;
        }
        if let Some(v) = self.restart_seed {
            solver.restart_seed = v;
        }
        if let Some(init) = self.init {
            solver.init = match init {
                InitKind::Mrt => InitStrategy::Mrt,
                InitKind::Ebf => InitStrategy::Ebf,
                InitKind::BestBaseline => InitStrategy::BestBaseline,
                InitKind::Random => InitStrategy::Random {
                    seed: self.init_seed.unwrap_or(0),
                },
            };
        }
        put("solver", to_value(&solver));

        if let (Some(axis), Some(values)) = (self.axis, &self.values) {
            let metric = self.metric.map(ThresholdMetric::from).unwrap_or_default();
            let counts = || -> Result<Vec<usize>, HarnessError> {
                values
                    .iter()
                    .map(|&v| {
                        if v >= 0.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(HarnessError::Validation(format!(
                                "sweep value {v} is not a count"
                            )))
                        }
                    })
                    .collect()
            };
            let sweep = match axis {
                Axis::Neighbors => SweepSpec::Neighbors { values: counts()? },
                Axis::CodebookSize => SweepSpec::CodebookSize { values: counts()? },
                Axis::Threshold => SweepSpec::Threshold {
                    values: values.clone(),
                    metric,
                },
                Axis::Angle => SweepSpec::Angle {
                    values: values.clone(),
                    metric,
                },
            };
            put("sweep", to_value(sweep));
        }
        if let Some(t) = self.trials {
            put("trials", json!(t));
        }

        let mut cfg = base.overlaid(Value::Object(o))?;
        if let Some(path) = &self.config {
            cfg = cfg.overlaid(robustbf_harness::config::read_json_file(path)?)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let mut stdout = experiment::stdout_writer();
    let io = |e: std::io::Error| HarnessError::io("<stdout>", e);
    match cli.command {
        Command::Generate { config, db, meta } => {
            let cfg = config.resolve()?;
            let summary = experiment::generate(&cfg, &db, &meta)?;
            writeln!(
                stdout,
                "wrote {} records (M = {}, {} scatterers) to {}; metadata in {}",
                summary.records,
                summary.antennas,
                summary.scatterers,
                db.display(),
                meta.display()
            )
            .map_err(io)?;
        }
        Command::Neighborhood {
            config,
            query,
            db,
            out,
        } => {
            let cfg = config.resolve()?;
            let database = experiment::load_database(&db)?;
            let (export, _, _) =
                experiment::neighborhood(&database, &query.query()?, &cfg.neighborhood)?;
            match out {
                Some(path) => {
                    experiment::write_json(&path, &export)?;
                    writeln!(
                        stdout,
                        "K = {} channels from {} initial matches; written to {}",
                        export.member_indices.len(),
                        export.initial_indices.len(),
                        path.display()
                    )
                    .map_err(io)?;
                }
                None => {
                    serde_json::to_writer_pretty(&mut stdout, &export)
                        .map_err(|e| HarnessError::Validation(e.to_string()))?;
                    writeln!(stdout).map_err(io)?;
                }
            }
        }
        Command::Design {
            config,
            query,
            db,
            out,
        } => {
            let cfg = config.resolve()?;
            let database = experiment::load_database(&db)?;
            let report = experiment::design(&database, &query.query()?, &cfg)?;
            experiment::write_json(&out, &report)?;
            write!(stdout, "{}", report.table()).map_err(io)?;
            if !report.dominance_ok {
                writeln!(stdout, "warning: MMS fell below a baseline").map_err(io)?;
            }
            writeln!(stdout, "codebook written to {}", out.display()).map_err(io)?;
        }
        Command::Sweep {
            config,
            out,
            summary,
            meta,
            save_db,
        } => {
            let cfg = config.resolve()?;
            let scenario = experiment::build_scenario(&cfg)?;
            if let Some(path) = save_db {
                let mut buf = Vec::new();
                scenario.db.write_jsonl(&mut buf)?;
                std::fs::write(&path, buf).map_err(|e| HarnessError::io(&path, e))?;
            }
            let outcome = experiment::run_sweep(&cfg, &scenario)?;
            let summary = summary.unwrap_or_else(|| sibling(&out, ".summary.csv"));
            let meta = meta.unwrap_or_else(|| sibling(&out, ".meta.json"));
            outcome.write(&cfg, &scenario.db, &out, Some(&summary), Some(&meta))?;
            experiment::write_summary_table(&outcome, &mut stdout).map_err(io)?;
            let errors = outcome.errors().len();
            writeln!(
                stdout,
                "{} rows in {} ({} failed cells); summary {}; metadata {}",
                outcome.trials.len() * 3,
                out.display(),
                errors,
                summary.display(),
                meta.display()
            )
            .map_err(io)?;
        }
        Command::Verify { seed, quick, out } => {
            let mut opts = VerifyOptions::default();
            if quick {
                opts.minorant_samples = 1000;
                opts.ascent_instances = 10;
                opts.exact_csi_instances = 5;
                opts.oracle_instances = 5;
                opts.monotonicity_pairs = 5;
            }
            if let Some(s) = seed {
                opts.seed = s;
            }
            let report = run_verify(&opts);
            serde_json::to_writer_pretty(&mut stdout, &report)
                .map_err(|e| HarnessError::Validation(e.to_string()))?;
            writeln!(stdout).map_err(io)?;
            if let Some(path) = out {
                experiment::write_json(&path, &report)?;
            }
            if !report.passed {
                stdout.flush().map_err(io)?;
                return Err(HarnessError::VerificationFailed {
                    failed: report.failed(),
                    total: report.checks.len(),
                });
            }
        }
    }
    stdout.flush().map_err(io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
