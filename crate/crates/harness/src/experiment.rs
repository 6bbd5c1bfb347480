//! The pipeline behind the `generate`, `neighborhood`, `design` and `sweep`
//! subcommands.
//!
//! Every random draw descends from the master seed: the environment and the
//! database use one ChaCha stream seeded with it, and trial `t` of a sweep
//! owns the stream seeded with [`trial_seed`]`(seed, t)`. Trials share their
//! query across sweep values, so neighboring sweep points are compared on
//! matched draws, and the parallel schedule never influences the output.

use std::fmt;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robustbf::channel::{generate_trajectory, sample_on_path, CsiDatabase, Environment};
use robustbf::neighborhood::{
    build_neighborhood, ComplexParts, NeighborhoodExport, NeighborhoodList, NeighborhoodParams,
    QueryRef, Selection,
};
use robustbf::optimizer::{
    ebf_codebook, gain_db, min_sum_gain, mrt_codebook, sca_design_with_reference, sum_gains,
    CodebookExport, GainSummary, SolverConfig, SolverReport,
};
use robustbf::{CVector64, Codebook64};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{read_json_file, ExperimentConfig, SweepSpec};
use crate::HarnessError;

/// Value of the `generator` field in every metadata document.
pub const GENERATOR: &str = "robustbf";

/// Slack on the MMS ≥ max(MRT, EBF) runtime check.
pub const DOMINANCE_TOLERANCE: f64 = 1e-8;

const AVERAGING_NOTE: &str = "per (sweep value, scheme): arithmetic mean of the linear min-sum gain over the \
     successful trials, reported in dB; std_error_db is the standard error of that mean mapped to dB by the \
     delta method (10/ln 10 · se/mean)";

/// Beamforming scheme compared in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MMS")]
    Mms,
    #[serde(rename = "EBF")]
    Ebf,
    #[serde(rename = "MRT")]
    Mrt,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mms, Scheme::Ebf, Scheme::Mrt];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mms => "MMS",
            Scheme::Ebf => "EBF",
            Scheme::Mrt => "MRT",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The environment and database fixed by a configuration's master seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub env: Environment<f64>,
    pub db: CsiDatabase<f64>,
}

pub fn build_scenario(cfg: &ExperimentConfig) -> Result<Scenario, HarnessError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let env = cfg.environment.build::<f64, _>(&mut rng)?;
    let trajectory = generate_trajectory(&cfg.trajectory, &env.room, &mut rng)?;
    let db = robustbf::channel::generate_database(&trajectory, &env, cfg.sample_period)?;
    Ok(Scenario { env, db })
}

/// Seed of trial `trial`'s private RNG stream (a splitmix64 step).
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn pretty(value: &impl Serialize) -> Result<Vec<u8>, HarnessError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Validation(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateSummary {
    pub records: usize,
    pub antennas: usize,
    pub scatterers: usize,
}

/// Writes the JSON-lines database and a metadata document holding the full
/// configuration (re-loadable with `--config`).
pub fn generate(
    cfg: &ExperimentConfig,
    db_path: &Path,
    meta_path: &Path,
) -> Result<GenerateSummary, HarnessError> {
    let scenario = build_scenario(cfg)?;
    let mut buf = Vec::new();
    scenario.db.write_jsonl(&mut buf)?;
    write_file(db_path, &buf)?;
    let summary = GenerateSummary {
        records: scenario.db.len(),
        antennas: scenario.db.dim(),
        scatterers: scenario.env.field.len(),
    };
    let meta = json!({
        "generator": GENERATOR,
        "version": env!("CARGO_PKG_VERSION"),
        "kind": "database",
        "record_format": "one JSON object per line: {\"idx\", \"t\", \"pos\", \"re\", \"im\"}",
        "database": summary,
        "config": cfg,
    });
    write_file(meta_path, &pretty(&meta)?)?;
    Ok(summary)
}

pub fn load_database(path: &Path) -> Result<CsiDatabase<f64>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    CsiDatabase::read_jsonl(BufReader::new(file)).map_err(|e| match e {
        robustbf::channel::ChannelError::Io(source) => HarnessError::io(path, source),
        other => HarnessError::Validation(format!("{}: {other}", path.display())),
    })
}

// ------------------------------------------------------------ neighborhood

/// Where the outdated CSI `ĝ` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    /// A database record; `None` means the most recent one.
    Index(Option<usize>),
    Vector(CVector64),
}

impl Query {
    /// Reads a vector given as `{"re": [...], "im": [...]}`.
    pub fn from_vector_file(path: &Path) -> Result<Self, HarnessError> {
        let parts: ComplexParts = serde_json::from_value(read_json_file(path)?)
            .map_err(|e| HarnessError::Validation(format!("{}: {e}", path.display())))?;
        Ok(Query::Vector(parts.to_vector()?))
    }

    pub fn resolve(&self, db: &CsiDatabase<f64>) -> Result<(QueryRef, CVector64), HarnessError> {
        match self {
            Query::Index(index) => {
                let i = index.unwrap_or(db.len() - 1);
                let record = db.get(i).ok_or_else(|| {
                    HarnessError::Validation(format!(
                        "query index {i} is out of range for a database of {} records",
                        db.len()
                    ))
                })?;
                Ok((QueryRef::Index { query_index: i }, record.h.clone()))
            }
            Query::Vector(v) => {
                if v.dim() != db.dim() {
                    return Err(HarnessError::Validation(format!(
                        "query vector has {} entries but the database channels have {}",
                        v.dim(),
                        db.dim()
                    )));
                }
                Ok((
                    QueryRef::Vector {
                        query_vector: ComplexParts::from_vector(v),
                    },
                    v.clone(),
                ))
            }
        }
    }
}

pub fn neighborhood(
    db: &CsiDatabase<f64>,
    query: &Query,
    params: &NeighborhoodParams,
) -> Result<(NeighborhoodExport, NeighborhoodList<f64>, CVector64), HarnessError> {
    let (query_ref, g) = query.resolve(db)?;
    let list = build_neighborhood(db, &g, params)?;
    Ok((NeighborhoodExport::new(query_ref, *params, &list), list, g))
}

// ------------------------------------------------------------------ design

/// One scheme's codebook and its min-sum gain on the neighborhood.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub codebook: Codebook64,
    pub min_sum_gain: f64,
    /// `Σ_ℓ |h^H f_ℓ|²/‖h‖²` at the true channel, when one is known.
    pub realized_gain: Option<f64>,
}

/// All three schemes on one neighborhood. Baseline failures (for example
/// EBF with `L > M`) are kept per scheme; an MMS failure fails the whole
/// evaluation.
#[derive(Debug)]
pub struct Evaluation {
    pub mms: SchemeResult,
    pub report: SolverReport,
    pub ebf: Result<SchemeResult, HarnessError>,
    pub mrt: Result<SchemeResult, HarnessError>,
}

impl Evaluation {
    pub fn gain(&self, scheme: Scheme) -> Option<f64> {
        self.result(scheme).map(|r| r.min_sum_gain)
    }

    pub fn result(&self, scheme: Scheme) -> Option<&SchemeResult> {
        match scheme {
            Scheme::Mms => Some(&self.mms),
            Scheme::Ebf => self.ebf.as_ref().ok(),
            Scheme::Mrt => self.mrt.as_ref().ok(),
        }
    }

    /// `max(MRT, EBF) - MMS` when positive beyond [`DOMINANCE_TOLERANCE`].
    pub fn dominance_shortfall(&self) -> Option<f64> {
        let best = [Scheme::Ebf, Scheme::Mrt]
            .iter()
            .filter_map(|&s| self.gain(s))
            .fold(f64::NEG_INFINITY, f64::max);
        let shortfall = best - self.mms.min_sum_gain;
        (shortfall > DOMINANCE_TOLERANCE).then_some(shortfall)
    }
}

fn scheme_result(
    codebook: Codebook64,
    channels: &[CVector64],
    truth: Option<&CVector64>,
) -> Result<SchemeResult, HarnessError> {
    let min_sum_gain = min_sum_gain(&codebook, channels)?;
    let realized_gain = match truth {
        Some(h) => Some(sum_gains(&codebook, std::slice::from_ref(h))?[0]),
        None => None,
    };
    Ok(SchemeResult {
        codebook,
        min_sum_gain,
        realized_gain,
    })
}

pub fn evaluate(
    channels: &[CVector64],
    reference: &CVector64,
    power: f64,
    size: usize,
    solver: &SolverConfig,
    truth: Option<&CVector64>,
) -> Result<Evaluation, HarnessError> {
    let (mms, report) = sca_design_with_reference(channels, Some(reference), power, size, solver)?;
    let mms = scheme_result(mms, channels, truth)?;
    let ebf = ebf_codebook(channels, power, size)
        .map_err(HarnessError::from)
        .and_then(|cb| scheme_result(cb, channels, truth));
    let mrt = mrt_codebook(reference, power, size)
        .map_err(HarnessError::from)
        .and_then(|cb| scheme_result(cb, channels, truth));
    Ok(Evaluation {
        mms,
        report,
        ebf,
        mrt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: Scheme,
    pub min_sum_gain: Option<f64>,
    pub gain_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Output document of `design`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub generator: String,
    pub neighborhood: NeighborhoodExport,
    pub power_w: f64,
    /// The MMS codebook with its metrics and solver report.
    pub codebook: CodebookExport,
    pub ebf: Option<CodebookExport>,
    pub mrt: Option<CodebookExport>,
    pub comparison: Vec<ComparisonRow>,
    pub dominance_ok: bool,
}

impl DesignReport {
    pub fn gain(&self, scheme: Scheme) -> Option<f64> {
        self.comparison
            .iter()
            .find(|r| r.scheme == scheme)
            .and_then(|r| r.min_sum_gain)
    }

    /// Fixed-width comparison table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "K = {}, L = {}, P = {} W\n{:<6} {:>16} {:>12}\n",
            self.neighborhood.member_indices.len(),
            self.codebook.l,
            self.power_w,
            "scheme",
            "min-sum gain",
            "gain [dB]"
        );
        for row in &self.comparison {
            match (row.min_sum_gain, row.gain_db) {
                (Some(g), Some(db)) => {
                    out.push_str(&format!("{:<6} {:>16.9} {:>12.4}\n", row.scheme, g, db))
                }
                _ => out.push_str(&format!(
                    "{:<6} {:>16} {:>12}  {}\n",
                    row.scheme,
                    "-",
                    "-",
                    row.error.as_deref().unwrap_or("")
                )),
            }
        }
        out
    }
}

pub fn design(
    db: &CsiDatabase<f64>,
    query: &Query,
    cfg: &ExperimentConfig,
) -> Result<DesignReport, HarnessError> {
    cfg.neighborhood.validate()?;
    cfg.solver.validate()?;
    let (export, list, g) = neighborhood(db, query, &cfg.neighborhood)?;
    let power = cfg.power_watts();
    let eval = evaluate(
        &list.channels,
        &g,
        power,
        cfg.codebook_size,
        &cfg.solver,
        None,
    )?;

    let metrics = |r: &SchemeResult| GainSummary::evaluate(&r.codebook, &list.channels);
    let codebook = CodebookExport::new(
        &eval.mms.codebook,
        Some(metrics(&eval.mms)?),
        Some(eval.report.clone()),
    );
    let mut ebf = None;
    let mut mrt = None;
    let mut comparison = Vec::new();
    for scheme in Scheme::ALL {
        let row = match eval.result(scheme) {
            Some(r) => ComparisonRow {
                scheme,
                min_sum_gain: Some(r.min_sum_gain),
                gain_db: Some(gain_db(r.min_sum_gain)),
                error: None,
            },
            None => {
                let err = match scheme {
                    Scheme::Ebf => eval.ebf.as_ref().err(),
                    _ => eval.mrt.as_ref().err(),
                };
                ComparisonRow {
                    scheme,
                    min_sum_gain: None,
                    gain_db: None,
                    error: err.map(|e| e.to_string()),
                }
            }
        };
        comparison.push(row);
        if scheme != Scheme::Mms {
            let export = match eval.result(scheme) {
                Some(r) => Some(CodebookExport::new(&r.codebook, Some(metrics(r)?), None)),
                None => None,
            };
            if scheme == Scheme::Ebf {
                ebf = export;
            } else {
                mrt = export;
            }
        }
    }
    Ok(DesignReport {
        generator: GENERATOR.into(),
        neighborhood: export,
        power_w: power,
        codebook,
        ebf,
        mrt,
        comparison,
        dominance_ok: eval.dominance_shortfall().is_none(),
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), HarnessError> {
    write_file(path, &pretty(value)?)
}

// ------------------------------------------------------------------- sweep

/// Neighborhood parameters and codebook size at one sweep value.
pub fn point_setup(cfg: &ExperimentConfig, index: usize) -> (NeighborhoodParams, usize) {
    let mut params = cfg.neighborhood;
    let mut size = cfg.codebook_size;
    match &cfg.sweep {
        SweepSpec::Neighbors { values } => {
            params.selection = Selection::TopT {
                count: values[index],
            }
        }
        SweepSpec::Threshold { values, metric } => {
            params.selection = Selection::Threshold {
                gamma: values[index],
                metric: *metric,
            }
        }
        SweepSpec::Angle { values, metric } => {
            params.selection = Selection::max_angle_deg(values[index], *metric)
        }
        SweepSpec::CodebookSize { values } => size = values[index],
    }
    (params, size)
}

/// One (sweep value, trial) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// Neighborhood size; `None` when the neighborhood could not be built.
    #[serde(rename = "K")]
    pub k: Option<usize>,
    /// Min-sum gain (linear) per scheme in [`Scheme::ALL`] order.
    pub gains: Vec<Option<f64>>,
    pub realized: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    pub dominance_shortfall: Option<f64>,
}

impl TrialOutcome {
    pub fn gain(&self, scheme: Scheme) -> Option<f64> {
        self.gains[scheme_index(scheme)]
    }
}

fn scheme_index(scheme: Scheme) -> usize {
    Scheme::ALL
        .iter()
        .position(|&s| s == scheme)
        .expect("listed scheme")
}

/// Per-trial CSV row; `gain_db` reads `error` for failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: String,
    pub scheme: Scheme,
    pub gain_db: String,
    #[serde(rename = "K")]
    pub k: String,
    pub trial: usize,
    pub seed: u64,
}

/// Aggregate over the trials of one (sweep value, scheme) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub mean_gain: Option<f64>,
    pub mean_gain_db: Option<f64>,
    pub std_error_db: Option<f64>,
    pub mean_k: Option<f64>,
    pub mean_realized_gain_db: Option<f64>,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialError {
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub axis: &'static str,
    pub values: Vec<f64>,
    pub trials: Vec<TrialOutcome>,
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

impl SweepOutcome {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::with_capacity(self.trials.len() * Scheme::ALL.len());
        for t in &self.trials {
            for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
                rows.push(ResultRow {
                    sweep_value: format_value(t.sweep_value),
                    scheme,
                    gain_db: t.gains[i]
                        .map_or_else(|| "error".into(), |g| format!("{:.9}", gain_db(g))),
                    k: t.k.map_or_else(String::new, |k| k.to_string()),
                    trial: t.trial,
                    seed: t.seed,
                });
            }
        }
        rows
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        for &value in &self.values {
            let cells: Vec<&TrialOutcome> = self
                .trials
                .iter()
                .filter(|t| t.sweep_value == value)
                .collect();
            for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
                let ok: Vec<&TrialOutcome> = cells
                    .iter()
                    .copied()
                    .filter(|t| t.gains[i].is_some())
                    .collect();
                let gains: Vec<f64> = ok.iter().filter_map(|t| t.gains[i]).collect();
                let n = gains.len();
                let mean = (n > 0).then(|| gains.iter().sum::<f64>() / n as f64);
                let se = mean.filter(|_| n > 1).map(|m| {
                    let var = gains.iter().map(|g| (g - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                    (var / n as f64).sqrt()
                });
                let realized: Vec<f64> = ok.iter().filter_map(|t| t.realized[i]).collect();
                out.push(SummaryRow {
                    sweep_value: value,
                    scheme,
                    mean_gain: mean,
                    mean_gain_db: mean.map(gain_db),
                    std_error_db: match (mean, se) {
                        (Some(m), Some(s)) if m > 0.0 => {
                            Some(10.0 / std::f64::consts::LN_10 * s / m)
                        }
                        (Some(_), None) => Some(0.0),
                        _ => None,
                    },
                    mean_k: (n > 0)
                        .then(|| ok.iter().filter_map(|t| t.k).sum::<usize>() as f64 / n as f64),
                    mean_realized_gain_db: (!realized.is_empty())
                        .then(|| gain_db(realized.iter().sum::<f64>() / realized.len() as f64)),
                    trials_ok: n,
                    trials_failed: cells.len() - n,
                });
            }
        }
        out
    }

    pub fn errors(&self) -> Vec<TrialError> {
        let mut out = Vec::new();
        for t in &self.trials {
            for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
                if let Some(message) = &t.errors[i] {
                    out.push(TrialError {
                        sweep_value: t.sweep_value,
                        trial: t.trial,
                        seed: t.seed,
                        scheme,
                        message: message.clone(),
                    });
                }
            }
        }
        out
    }

    /// Mean gain of `scheme` per sweep value, with its standard error in dB.
    pub fn mean_db(&self, scheme: Scheme) -> Vec<(f64, Option<f64>, Option<f64>)> {
        self.summary()
            .into_iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| (r.sweep_value, r.mean_gain_db, r.std_error_db))
            .collect()
    }

    pub fn dominance_violations(&self) -> Vec<&TrialOutcome> {
        self.trials
            .iter()
            .filter(|t| t.dominance_shortfall.is_some())
            .collect()
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows() {
            w.serialize(row)
                .map_err(|e| HarnessError::Validation(e.to_string()))?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::Validation(e.to_string()))
    }

    pub fn summary_csv_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.summary() {
            w.serialize(row)
                .map_err(|e| HarnessError::Validation(e.to_string()))?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::Validation(e.to_string()))
    }

    pub fn metadata(&self, cfg: &ExperimentConfig, db: &CsiDatabase<f64>) -> serde_json::Value {
        let violations: Vec<_> = self
            .dominance_violations()
            .into_iter()
            .map(|t| json!({"sweep_value": t.sweep_value, "trial": t.trial, "shortfall": t.dominance_shortfall}))
            .collect();
        json!({
            "generator": GENERATOR,
            "version": env!("CARGO_PKG_VERSION"),
            "kind": "sweep",
            "axis": self.axis,
            "values": self.values,
            "averaging": AVERAGING_NOTE,
            "query": "fresh position on the trajectory's noise model per trial, shared by all sweep values; \
                      its channel is both the outdated CSI and the true channel for realized gain",
            "database": {"records": db.len(), "antennas": db.dim()},
            "summary": self.summary(),
            "errors": self.errors(),
            "dominance_violations": violations,
            "config": cfg,
        })
    }

    /// Writes the per-trial CSV, and optionally the summary CSV and metadata.
    pub fn write(
        &self,
        cfg: &ExperimentConfig,
        db: &CsiDatabase<f64>,
        csv_path: &Path,
        summary_path: Option<&Path>,
        meta_path: Option<&Path>,
    ) -> Result<(), HarnessError> {
        write_file(csv_path, &self.csv_bytes()?)?;
        if let Some(p) = summary_path {
            write_file(p, &self.summary_csv_bytes()?)?;
        }
        if let Some(p) = meta_path {
            write_file(p, &pretty(&self.metadata(cfg, db))?)?;
        }
        Ok(())
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    db: &CsiDatabase<f64>,
    query: &CVector64,
    value_index: usize,
    value: f64,
    trial: usize,
    seed: u64,
) -> TrialOutcome {
    let (params, size) = point_setup(cfg, value_index);
    let mut out = TrialOutcome {
        sweep_value: value,
        trial,
        seed,
        k: None,
        gains: vec![None; 3],
        realized: vec![None; 3],
        errors: vec![None; 3],
        dominance_shortfall: None,
    };
    let fail_all = |out: &mut TrialOutcome, e: HarnessError| {
        let message = format!("{}: {e}", e.kind());
        out.errors = vec![Some(message); 3];
    };
    let list = match build_neighborhood(db, query, &params) {
        Ok(list) => list,
        Err(e) => {
            fail_all(&mut out, e.into());
            return out;
        }
    };
    out.k = Some(list.len());
    match evaluate(
        &list.channels,
        query,
        cfg.power_watts(),
        size,
        &cfg.solver,
        Some(query),
    ) {
        Ok(eval) => {
            for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
                match eval.result(scheme) {
                    Some(r) => {
                        out.gains[i] = Some(r.min_sum_gain);
                        out.realized[i] = r.realized_gain;
                    }
                    None => {
                        let e = match scheme {
                            Scheme::Ebf => eval.ebf.as_ref().err(),
                            _ => eval.mrt.as_ref().err(),
                        };
                        out.errors[i] = e.map(|e| format!("{}: {e}", e.kind()));
                    }
                }
            }
            out.dominance_shortfall = eval.dominance_shortfall();
        }
        Err(e) => fail_all(&mut out, e),
    }
    out
}

/// Draws trial `trial`'s query channel.
pub fn trial_query(
    cfg: &ExperimentConfig,
    env: &Environment<f64>,
    trial: usize,
) -> Result<CVector64, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    let position = sample_on_path(&cfg.trajectory, &env.room, &mut rng)?;
    Ok(env.channel_at(&position)?)
}

/// Runs every (sweep value, trial) cell. Cells are evaluated in parallel and
/// collected in (value, trial) order.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
) -> Result<SweepOutcome, HarnessError> {
    cfg.validate()?;
    let values = cfg.sweep.values_f64();
    let queries: Vec<(u64, Result<CVector64, String>)> = (0..cfg.trials)
        .map(|t| {
            let q = trial_query(cfg, &scenario.env, t).map_err(|e| format!("{}: {e}", e.kind()));
            (trial_seed(cfg.seed, t), q)
        })
        .collect();
    let cells: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..cfg.trials).map(move |t| (v, t)))
        .collect();
    let trials = cells
        .par_iter()
        .map(|&(v, t)| {
            let (seed, query) = &queries[t];
            match query {
                Ok(q) => run_cell(cfg, &scenario.db, q, v, values[v], t, *seed),
                Err(message) => TrialOutcome {
                    sweep_value: values[v],
                    trial: t,
                    seed: *seed,
                    k: None,
                    gains: vec![None; 3],
                    realized: vec![None; 3],
                    errors: vec![Some(message.clone()); 3],
                    dominance_shortfall: None,
                },
            }
        })
        .collect();
    Ok(SweepOutcome {
        axis: cfg.sweep.axis_name(),
        values,
        trials,
    })
}

/// Prints the summary as an aligned table.
pub fn write_summary_table(outcome: &SweepOutcome, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>12} {:<6} {:>12} {:>10} {:>8} {:>6}",
        outcome.axis, "scheme", "mean [dB]", "se [dB]", "mean K", "fail"
    )?;
    for r in outcome.summary() {
        let f =
            |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |v| format!("{v:.p$}"));
        writeln!(
            out,
            "{:>12} {:<6} {:>12} {:>10} {:>8} {:>6}",
            format_value(r.sweep_value),
            r.scheme,
            f(r.mean_gain_db, 4),
            f(r.std_error_db, 4),
            f(r.mean_k, 1),
            r.trials_failed
        )?;
    }
    Ok(())
}

pub fn stdout_writer() -> BufWriter<std::io::Stdout> {
    BufWriter::new(std::io::stdout())
}
