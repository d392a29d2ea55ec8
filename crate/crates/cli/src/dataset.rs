//! Dataset records, manifests and split generation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use physprop_core::pipeline::{render_scene, Observations, PipelineError, Timing};
use physprop_core::scene::{sample_scene, Domain, PropertyKind, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::FileAudit;
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_GROUP_SIZE: usize = 4;
pub const DEFAULT_RELATIVE_PAIRS: usize = 200;
pub const DEFAULT_NOISE_SIGMA: f64 = 1.0;

/// Split sizes of the full-size benchmark this desk-scale dataset stands in for.
pub const REFERENCE_SIZES: SplitSizes = SplitSizes {
    train: 10_000,
    test_1: 1_000,
    test_2: 1_000,
};

/// Attempts per record at drawing dynamics that stay in view.
const MAX_DRAWS: usize = 64;

/// Fewest frames a clip may keep after cutting it where the object leaves
/// the image.
pub const MIN_VISIBLE_FRAMES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "train")]
    Train,
    #[serde(rename = "test-1")]
    Test1,
    #[serde(rename = "test-2")]
    Test2,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test1, Split::Test2];
    pub const TESTS: [Split; 2] = [Split::Test1, Split::Test2];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test1 => "test-1",
            Split::Test2 => "test-2",
        }
    }

    /// Train and test-1 share the in-distribution domain; test-2 is shifted.
    pub fn domain(self) -> Domain {
        match self {
            Split::Train | Split::Test1 => Domain::A1,
            Split::Test2 => Domain::A2,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.as_str())
    }

    fn stream(self) -> u64 {
        match self {
            Split::Train => 1,
            Split::Test1 => 2,
            Split::Test2 => 3,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown split `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    #[serde(rename = "test-1")]
    pub test_1: usize,
    #[serde(rename = "test-2")]
    pub test_2: usize,
}

impl SplitSizes {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Test1 => self.test_1,
            Split::Test2 => self.test_2,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.test_1 + self.test_2
    }
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 200,
            test_1: 100,
            test_2: 100,
        }
    }
}

/// `train,test-1,test-2`, e.g. `200,100,100`.
impl FromStr for SplitSizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad split size `{p}`: {e}"))
            })
            .collect::<Result<_, _>>()?;
        let [train, test_1, test_2] = parts[..] else {
            return Err(format!("expected three comma-separated sizes, got `{s}`"));
        };
        Ok(Self {
            train,
            test_1,
            test_2,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub property: PropertyKind,
    pub sizes: SplitSizes,
    pub noise_sigma: f64,
    pub seed: u64,
    pub group_size: usize,
    pub relative_pairs: usize,
    pub timing: Timing,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(property: PropertyKind, out: impl Into<PathBuf>) -> Self {
        Self {
            property,
            sizes: SplitSizes::default(),
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
            group_size: DEFAULT_GROUP_SIZE,
            relative_pairs: DEFAULT_RELATIVE_PAIRS,
            timing: Timing::default_for(property),
            out: out.into(),
        }
    }

    pub fn from_manifest(manifest: &Manifest, out: impl Into<PathBuf>) -> Self {
        Self {
            property: manifest.property,
            sizes: manifest.sizes,
            noise_sigma: manifest.noise_sigma,
            seed: manifest.seed,
            group_size: manifest.group_size,
            relative_pairs: manifest.relative_pairs,
            timing: manifest.timing,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(HarnessError::Usage(m.to_string()));
        if Split::ALL.iter().any(|s| self.sizes.get(*s) == 0) {
            return usage("every split needs at least one record");
        }
        if self.group_size < 2 {
            return usage("viewpoint groups need at least two members");
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return usage("noise sigma must be finite and non-negative");
        }
        if !(self.timing.fps > 0.0 && self.timing.duration > 0.0) {
            return usage("frame rate and duration must be positive");
        }
        if self.relative_pairs == 0 {
            return usage("relative pair count must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub split: Split,
    pub file: String,
    pub records: usize,
}

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub property: PropertyKind,
    pub seed: u64,
    pub noise_sigma: f64,
    pub sizes: SplitSizes,
    pub reference_sizes: SplitSizes,
    pub group_size: usize,
    pub relative_pairs: usize,
    pub timing: Timing,
    pub splits: Vec<SplitFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub schema_version: u32,
    pub id: String,
    pub property: PropertyKind,
    pub split: Split,
    /// Viewpoint group; members share one camera.
    pub group: u64,
    /// Seed of the scene draw.
    pub seed: u64,
    pub noise_seed: u64,
    pub scene: Scene,
    pub observations: Observations,
    pub ground_truth: f64,
}

struct RecordPlan {
    index: usize,
    group: u64,
    camera_seed: u64,
    seed: u64,
    noise_seed: u64,
}

fn plan_split(config: &RunConfig, split: Split) -> Vec<RecordPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(split.stream());
    let n = config.sizes.get(split);
    let mut plans = Vec::with_capacity(n);
    let mut camera_seed = 0;
    for index in 0..n {
        if index % config.group_size == 0 {
            camera_seed = rng.random();
        }
        plans.push(RecordPlan {
            index,
            group: (index / config.group_size) as u64,
            camera_seed,
            seed: rng.random(),
            noise_seed: rng.random(),
        });
    }
    plans
}

fn build_record(config: &RunConfig, split: Split, plan: &RecordPlan) -> Result<DatasetRecord> {
    let domain = split.domain();
    let camera = *sample_scene(config.property, domain, plan.camera_seed).camera();
    // A sliding cube can leave the image before the clip has enough frames;
    // such dynamics are redrawn from a stream tied to the record seed.
    let mut redraw = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut seed = plan.seed;
    for _ in 0..MAX_DRAWS {
        let scene = sample_scene(config.property, domain, seed).with_camera(camera);
        match render_scene(&scene, config.timing, config.noise_sigma, plan.noise_seed) {
            Ok(observations) if observations.frame_count() >= MIN_VISIBLE_FRAMES => {
                return Ok(DatasetRecord {
                    schema_version: SCHEMA_VERSION,
                    id: format!("{}-{}-{:05}", config.property, split, plan.index),
                    property: config.property,
                    split,
                    group: plan.group,
                    seed,
                    noise_seed: plan.noise_seed,
                    ground_truth: scene.ground_truth(),
                    scene,
                    observations,
                })
            }
            Ok(_) | Err(PipelineError::OutOfView) | Err(PipelineError::Observe(_)) => {
                seed = redraw.random()
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(HarnessError::Data(format!(
        "{split} record {}: no in-view scene after {MAX_DRAWS} draws",
        plan.index
    )))
}

/// Builds the records of one split. Records are rendered in parallel and
/// returned in index order.
pub fn generate_split(config: &RunConfig, split: Split) -> Result<Vec<DatasetRecord>> {
    plan_split(config, split)
        .par_iter()
        .map(|p| build_record(config, split, p))
        .collect()
}

fn to_jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| HarnessError::Data(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub(crate) fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out =
        serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Data(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes every split file and then the manifest into `config.out`.
pub fn generate(config: &RunConfig, audit: &FileAudit) -> Result<Manifest> {
    config.validate()?;
    let mut splits = Vec::new();
    for split in Split::ALL {
        let records = generate_split(config, split)?;
        let file = split.file_name();
        audit.write_atomic(&config.out.join(&file), &to_jsonl(&records)?)?;
        splits.push(SplitFile {
            split,
            file,
            records: records.len(),
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        property: config.property,
        seed: config.seed,
        noise_sigma: config.noise_sigma,
        sizes: config.sizes,
        reference_sizes: REFERENCE_SIZES,
        group_size: config.group_size,
        relative_pairs: config.relative_pairs,
        timing: config.timing,
        splits,
    };
    audit.write_atomic(&config.out.join(MANIFEST_FILE), &to_json_pretty(&manifest)?)?;
    Ok(manifest)
}

fn check_version(path: &Path, found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(HarnessError::Schema {
            path: path.to_path_buf(),
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

#[derive(Deserialize)]
struct Versioned {
    schema_version: u32,
}

fn parse_versioned<T: for<'de> Deserialize<'de>>(
    path: &Path,
    line: usize,
    text: &str,
) -> Result<T> {
    let parse_err = |e: serde_json::Error| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    };
    let v: Versioned = serde_json::from_str(text).map_err(parse_err)?;
    check_version(path, v.schema_version)?;
    serde_json::from_str(text).map_err(parse_err)
}

pub fn load_manifest(path: &Path, audit: &FileAudit) -> Result<Manifest> {
    parse_versioned(path, 1, &audit.read_to_string(path)?)
}

/// Manifest of the dataset in `dir`.
pub fn load_dataset_manifest(dir: &Path, audit: &FileAudit) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(HarnessError::Data(format!(
            "{}: no dataset manifest",
            dir.display()
        )));
    }
    load_manifest(&path, audit)
}

/// Records of one split, checked against the manifest.
pub fn load_split(
    dir: &Path,
    manifest: &Manifest,
    split: Split,
    audit: &FileAudit,
) -> Result<Vec<DatasetRecord>> {
    let entry = manifest
        .splits
        .iter()
        .find(|s| s.split == split)
        .ok_or_else(|| HarnessError::Data(format!("manifest lists no {split} split")))?;
    let path = dir.join(&entry.file);
    let text = audit.read_to_string(&path)?;
    let mut records = Vec::with_capacity(entry.records);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = parse_versioned(&path, i + 1, line)?;
        if rec.split != split || rec.property != manifest.property {
            return Err(HarnessError::Parse {
                path: path.clone(),
                line: i + 1,
                message: format!(
                    "record {} belongs to {} {}",
                    rec.id, rec.property, rec.split
                ),
            });
        }
        rec.observations
            .validate()
            .map_err(|e| HarnessError::Parse {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
        records.push(rec);
    }
    if records.len() != entry.records {
        return Err(HarnessError::Data(format!(
            "{}: {} records, manifest says {}",
            path.display(),
            records.len(),
            entry.records
        )));
    }
    Ok(records)
}

/// Record ids that occur in more than one place, with their splits.
pub fn duplicate_ids(records: &[DatasetRecord]) -> BTreeMap<String, Vec<Split>> {
    let mut seen: BTreeMap<String, Vec<Split>> = BTreeMap::new();
    for r in records {
        seen.entry(r.id.clone()).or_default().push(r.split);
    }
    seen.retain(|_, v| v.len() > 1);
    seen
}
