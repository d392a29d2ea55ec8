//! Per-split scoring of an estimator on a generated dataset.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use physprop_core::gru::GruModel;
use physprop_core::metrics::{build_relative_pairs, EvalReport, MetricKind, ViewpointSample};
use physprop_core::oracle::{relative_score, Estimate, EstimatorId, OracleError};
use physprop_core::pipeline::{estimate, EstimatorKind, PipelineError};
use physprop_core::scene::PropertyKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::FileAudit;
use crate::dataset::{
    load_dataset_manifest, load_split, to_json_pretty, DatasetRecord, Manifest, Split, SplitSizes,
    SCHEMA_VERSION,
};
use crate::error::{HarnessError, Result};
use crate::train::load_checkpoint;

/// Elasticity reported for clips whose rebound is too small to detect.
pub const NO_BOUNCE_ESTIMATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Absolute,
    Relative,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Absolute => "absolute",
            Task::Relative => "relative",
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(Task::Absolute),
            "relative" => Ok(Task::Relative),
            _ => Err(format!("unknown task `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Defaults to the oracle of the dataset's property.
    pub estimator: Option<EstimatorKind>,
    pub task: Task,
    /// Evenly subsample each clip to this many frames.
    pub frames: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    /// Overrides the manifest's pair count.
    pub relative_pairs: Option<usize>,
    pub log_pearson: bool,
    /// Defaults to `<dataset>/reports`.
    pub out: Option<PathBuf>,
}

impl EvalOptions {
    pub fn new(task: Task) -> Self {
        Self {
            estimator: None,
            task,
            frames: None,
            checkpoint: None,
            relative_pairs: None,
            log_pearson: false,
            out: None,
        }
    }
}

/// One report file: the metric for one split plus the run settings behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub dataset_seed: u64,
    pub estimator: EstimatorKind,
    pub task: Task,
    pub noise_sigma: f64,
    pub frames: Option<usize>,
    pub sizes: SplitSizes,
    pub reference_sizes: SplitSizes,
    pub group_size: usize,
    /// Clips scored with [`NO_BOUNCE_ESTIMATE`].
    pub fallbacks: usize,
    /// Clips left out, as `id: reason`.
    pub failures: Vec<String>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordEstimate {
    pub id: String,
    pub group: u64,
    pub truth: f64,
    pub estimate: Result<Estimate, String>,
    pub fallback: bool,
}

fn estimator_id(kind: EstimatorKind) -> EstimatorId {
    match kind {
        EstimatorKind::RatioOracle => EstimatorId::RatioOracle,
        EstimatorKind::PeakFrame => EstimatorId::PeakFrame,
        EstimatorKind::SlopeOracle => EstimatorId::SlopeOracle,
        EstimatorKind::ParabolaOracle => EstimatorId::ParabolaOracle,
        EstimatorKind::NaiveParabola => EstimatorId::NaiveParabola,
        EstimatorKind::Gru => EstimatorId::Gru,
    }
}

fn estimate_record(
    record: &DatasetRecord,
    estimator: EstimatorKind,
    frames: Option<usize>,
    model: Option<&GruModel>,
) -> RecordEstimate {
    let observed = match frames {
        Some(n) => record
            .observations
            .subsample(n)
            .map_err(PipelineError::from),
        None => Ok(record.observations.clone()),
    };
    let result = observed.and_then(|obs| estimate(&record.scene, &obs, estimator, model));
    let (estimate, fallback) = match result {
        Ok(e) => (Ok(e), false),
        Err(PipelineError::Oracle(OracleError::NoBounce(_))) => (
            Ok(Estimate {
                value: NO_BOUNCE_ESTIMATE,
                property: PropertyKind::Elasticity,
                estimator: estimator_id(estimator),
            }),
            true,
        ),
        Err(e) => (Err(e.to_string()), false),
    };
    RecordEstimate {
        id: record.id.clone(),
        group: record.group,
        truth: record.ground_truth,
        estimate,
        fallback,
    }
}

/// Runs `estimator` on every record, in parallel, keeping record order.
pub fn estimate_records(
    records: &[DatasetRecord],
    estimator: EstimatorKind,
    frames: Option<usize>,
    model: Option<&GruModel>,
) -> Vec<RecordEstimate> {
    records
        .par_iter()
        .map(|r| estimate_record(r, estimator, frames, model))
        .collect()
}

/// Seed of the relative-pair draw for `split`.
pub fn pair_seed(dataset_seed: u64, split: Split) -> u64 {
    let tag = match split {
        Split::Train => 0,
        Split::Test1 => 1,
        Split::Test2 => 2,
    };
    dataset_seed ^ (tag << 56)
}

/// Metric and CSV rows for one split.
pub fn score_split(
    property: PropertyKind,
    split: Split,
    task: Task,
    estimates: &[RecordEstimate],
    relative_pairs: usize,
    seed: u64,
    log_pearson: bool,
) -> Result<(EvalReport, String)> {
    let ok: Vec<(&RecordEstimate, &Estimate)> = estimates
        .iter()
        .filter_map(|r| r.estimate.as_ref().ok().map(|e| (r, e)))
        .collect();
    let numeric =
        |e: physprop_core::metrics::MetricsError| HarnessError::Numeric(format!("{split}: {e}"));
    let mut csv = String::new();
    let report = match task {
        Task::Absolute => {
            csv.push_str("id,prediction,ground_truth\n");
            let mut pairs = Vec::with_capacity(ok.len());
            for (r, e) in &ok {
                writeln!(csv, "{},{},{}", r.id, e.value, r.truth).expect("write to string");
                pairs.push((e.value, r.truth));
            }
            let metric = if log_pearson {
                MetricKind::PearsonLog
            } else {
                MetricKind::Pearson
            };
            EvalReport::new(property, split.as_str(), metric, pairs).map_err(numeric)?
        }
        Task::Relative => {
            csv.push_str("first,second,score,label\n");
            let samples: Vec<ViewpointSample> = ok
                .iter()
                .map(|(r, _)| ViewpointSample {
                    group: r.group,
                    truth: r.truth,
                })
                .collect();
            let drawn =
                build_relative_pairs(&samples, Some(relative_pairs), seed).map_err(numeric)?;
            let mut pairs = Vec::with_capacity(drawn.len());
            for p in drawn {
                let (a, ea) = ok[p.first];
                let (b, eb) = ok[p.second];
                let score = relative_score(ea, eb)
                    .map_err(|e| HarnessError::Numeric(format!("{split}: {e}")))?;
                let label = if p.label { 1.0 } else { 0.0 };
                writeln!(csv, "{},{},{},{}", a.id, b.id, score, label as u8)
                    .expect("write to string");
                pairs.push((score, label));
            }
            EvalReport::new(property, split.as_str(), MetricKind::RocAuc, pairs).map_err(numeric)?
        }
    };
    if !report.value.is_finite() {
        return Err(HarnessError::Numeric(format!(
            "{split}: metric is not finite"
        )));
    }
    Ok((report, csv))
}

pub fn report_stem(estimator: EstimatorKind, task: Task, split: Split) -> String {
    format!("{}-{}-{}", estimator.as_str(), task.as_str(), split)
}

/// Scores test splits of the dataset in `dir` and writes
/// `<estimator>-<task>-<split>.json` and `.csv` for each.
pub fn evaluate(dir: &Path, options: &EvalOptions, audit: &FileAudit) -> Result<Vec<ReportFile>> {
    let manifest = load_dataset_manifest(dir, audit)?;
    evaluate_with_manifest(dir, &manifest, options, audit)
}

pub fn evaluate_with_manifest(
    dir: &Path,
    manifest: &Manifest,
    options: &EvalOptions,
    audit: &FileAudit,
) -> Result<Vec<ReportFile>> {
    let estimator = options
        .estimator
        .unwrap_or_else(|| EstimatorKind::oracle_for(manifest.property));
    if estimator.property() != manifest.property {
        return Err(HarnessError::Usage(format!(
            "estimator {} does not apply to {} data",
            estimator.as_str(),
            manifest.property
        )));
    }
    let model = match (estimator, &options.checkpoint) {
        (EstimatorKind::Gru, Some(path)) => Some(load_checkpoint(path, audit)?),
        (EstimatorKind::Gru, None) => {
            return Err(HarnessError::Usage(
                "the gru estimator needs --checkpoint".into(),
            ))
        }
        _ => None,
    };
    let pairs = options.relative_pairs.unwrap_or(manifest.relative_pairs);
    let out = options.out.clone().unwrap_or_else(|| dir.join("reports"));
    let mut files = Vec::new();
    for split in Split::TESTS {
        let records = load_split(dir, manifest, split, audit)?;
        let estimates = estimate_records(&records, estimator, options.frames, model.as_ref());
        let (report, csv) = score_split(
            manifest.property,
            split,
            options.task,
            &estimates,
            pairs,
            pair_seed(manifest.seed, split),
            options.log_pearson,
        )?;
        let file = ReportFile {
            schema_version: SCHEMA_VERSION,
            dataset_seed: manifest.seed,
            estimator,
            task: options.task,
            noise_sigma: manifest.noise_sigma,
            frames: options.frames,
            sizes: manifest.sizes,
            reference_sizes: manifest.reference_sizes,
            group_size: manifest.group_size,
            fallbacks: estimates.iter().filter(|e| e.fallback).count(),
            failures: estimates
                .iter()
                .filter_map(|e| e.estimate.as_ref().err().map(|m| format!("{}: {m}", e.id)))
                .collect(),
            report,
        };
        let stem = report_stem(estimator, options.task, split);
        audit.write_atomic(&out.join(format!("{stem}.json")), &to_json_pretty(&file)?)?;
        audit.write_atomic(&out.join(format!("{stem}.csv")), csv.as_bytes())?;
        files.push(file);
    }
    Ok(files)
}
