//! Simulation, observation and estimation of dynamic physical properties:
//! elasticity of a bouncing ball, viscosity of a spreading liquid and
//! dynamic friction of a sliding cube.
//!
//! The crate is organized bottom-up:
//!
//! - [`scene`]: scene types and nuisance-domain sampling
//! - [`sim`]: closed-form world tracks
//! - [`camera`]: pinhole projection and homographies
//! - [`observe`]: image-space measurement sequences
//! - [`oracle`]: the per-property estimators and relative scoring
//! - [`gru`]: a GRU regressor with hand-written gradients
//! - [`metrics`]: ROC AUC, Pearson correlation and pair sampling
//! - [`pipeline`]: scene-to-estimate glue

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod fit;
pub mod gru;
pub mod metrics;
pub mod observe;
pub mod oracle;
pub mod pipeline;
pub mod scene;
pub mod sim;

pub use camera::{apply_homography, estimate_homography, Homography, PinholeCamera, Pixel};
pub use gru::{GruModel, GruParams, LossKind, TrainConfig};
pub use metrics::{pearson, roc_auc, EvalReport, MetricKind};
pub use observe::{subsample_frames, ObservationSequence};
pub use oracle::{relative_score, Estimate, EstimatorId, NormalizedTrajectory};
pub use pipeline::{estimate, render_scene, EstimatorKind, Observations, Timing};
pub use scene::{sample_scene, CameraPose, Domain, PropertyKind, Scene};
pub use sim::WorldTrack;
