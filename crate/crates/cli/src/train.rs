//! GRU training on the train split.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use physprop_core::gru::{train, Checkpoint, GruModel, TrainConfig};
use physprop_core::observe::CentroidSequence;
use physprop_core::pipeline::{gru_input, Observations};
use physprop_core::scene::PropertyKind;

use crate::audit::FileAudit;
use crate::dataset::{load_dataset_manifest, load_split, to_json_pretty, DatasetRecord, Split};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub config: TrainConfig,
    pub checkpoint: PathBuf,
    /// Defaults to the checkpoint path with a `.csv` extension.
    pub curve: Option<PathBuf>,
    pub frames: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub examples: usize,
    /// Clips without a detectable ground contact.
    pub skipped: usize,
    pub steps: u64,
    pub final_loss: f64,
    pub curve: PathBuf,
}

fn centroids(obs: &Observations) -> Option<&CentroidSequence> {
    match obs {
        Observations::Centroids(s) => Some(s),
        _ => None,
    }
}

/// A GRU input sequence and its elasticity target.
pub type Example = (Vec<f64>, f64);

/// `(normalized trajectory, elasticity)` pairs. Returns the examples and the
/// number of clips skipped.
pub fn training_set(
    records: &[DatasetRecord],
    frames: Option<usize>,
) -> Result<(Vec<Example>, usize)> {
    let mut data = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for r in records {
        let obs = match frames {
            Some(n) => r
                .observations
                .subsample(n)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", r.id)))?,
            None => r.observations.clone(),
        };
        let seq = centroids(&obs)
            .ok_or_else(|| HarnessError::Data(format!("{}: not a bounce clip", r.id)))?;
        match gru_input(seq) {
            Ok(x) => data.push((x, r.ground_truth)),
            Err(_) => skipped += 1,
        }
    }
    Ok((data, skipped))
}

pub fn load_checkpoint(path: &Path, audit: &FileAudit) -> Result<GruModel> {
    let text = audit.read_to_string(path)?;
    let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    GruModel::from_checkpoint(&ck)
        .map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))
}

pub fn save_checkpoint(model: &GruModel, path: &Path, audit: &FileAudit) -> Result<()> {
    audit.write_atomic(path, &to_json_pretty(&model.to_checkpoint())?)
}

/// Trains on the train split of `dir`; no other split is opened.
pub fn train_gru(dir: &Path, options: &TrainOptions, audit: &FileAudit) -> Result<TrainSummary> {
    let manifest = load_dataset_manifest(dir, audit)?;
    if manifest.property != PropertyKind::Elasticity {
        return Err(HarnessError::Usage(format!(
            "the gru readout is trained on elasticity data, not {}",
            manifest.property
        )));
    }
    let records = load_split(dir, &manifest, Split::Train, audit)?;
    let (data, skipped) = training_set(&records, options.frames)?;
    if data.is_empty() {
        return Err(HarnessError::Data("train split has no usable clips".into()));
    }
    let outcome = train(&options.config, &data).map_err(|e| match e {
        physprop_core::gru::GruError::NonFinite => HarnessError::Numeric(e.to_string()),
        physprop_core::gru::GruError::InvalidConfig(_) => HarnessError::Usage(e.to_string()),
        _ => HarnessError::Data(e.to_string()),
    })?;
    save_checkpoint(&outcome.model, &options.checkpoint, audit)?;
    let curve = options
        .curve
        .clone()
        .unwrap_or_else(|| options.checkpoint.with_extension("csv"));
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in outcome.epoch_losses.iter().enumerate() {
        writeln!(csv, "{},{}", i + 1, l).expect("write to string");
    }
    audit.write_atomic(&curve, csv.as_bytes())?;
    Ok(TrainSummary {
        examples: data.len(),
        skipped,
        steps: outcome.model.steps,
        final_loss: outcome.epoch_losses.last().copied().unwrap_or(f64::NAN),
        curve,
    })
}
