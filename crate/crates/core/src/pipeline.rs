//! Scene → observations → estimate glue shared by the harness and tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{CameraError, PinholeCamera};
use crate::gru::GruModel;
use crate::observe::{
    render_observations, visible_prefix, AreaSequence, CentroidSequence, CornerSequence,
    ObserveError,
};
use crate::oracle::{
    estimate_elasticity_gru, estimate_elasticity_peak, estimate_elasticity_ratio,
    estimate_friction, estimate_friction_naive, estimate_viscosity, normalize_trajectory,
    rebound_window, settled_bounce_ratio, Estimate, EstimatorId, OracleError,
};
use crate::scene::{PropertyKind, Scene};
use crate::sim::{
    simulate_bounce, simulate_slide, simulate_spread, DEFAULT_BOUNCE_DURATION, DEFAULT_FPS,
    DEFAULT_SLIDE_DURATION, DEFAULT_SPREAD_DURATION,
};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Observe(#[from] ObserveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("fewer than 2 frames stay in view")]
    OutOfView,
    #[error("estimator {estimator} does not apply to {property}")]
    EstimatorMismatch {
        estimator: &'static str,
        property: PropertyKind,
    },
    #[error("scene and observations describe different properties")]
    PropertyMismatch,
}

/// Image-space measurements of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observations {
    /// Ball centroid pixels, `y` up.
    Centroids(CentroidSequence),
    /// Liquid footprint area, px².
    Areas(AreaSequence),
    /// Cube top-face corner pixels, `y` up.
    Corners(CornerSequence),
}

impl Observations {
    pub fn property(&self) -> PropertyKind {
        match self {
            Observations::Centroids(_) => PropertyKind::Elasticity,
            Observations::Areas(_) => PropertyKind::Viscosity,
            Observations::Corners(_) => PropertyKind::Friction,
        }
    }

    pub fn times(&self) -> &[f64] {
        match self {
            Observations::Centroids(s) => &s.times,
            Observations::Areas(s) => &s.times,
            Observations::Corners(s) => &s.times,
        }
    }

    pub fn frame_count(&self) -> usize {
        self.times().len()
    }

    pub fn validate(&self) -> Result<(), ObserveError> {
        match self {
            Observations::Centroids(s) => s.validate(),
            Observations::Areas(s) => s.validate(),
            Observations::Corners(s) => s.validate(),
        }
    }

    pub fn subsample(&self, n: usize) -> Result<Self, ObserveError> {
        Ok(match self {
            Observations::Centroids(s) => Observations::Centroids(s.subsample(n)?),
            Observations::Areas(s) => Observations::Areas(s.subsample(n)?),
            Observations::Corners(s) => Observations::Corners(s.subsample(n)?),
        })
    }
}

/// Frame rate and clip length used when rendering a scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub fps: f64,
    pub duration: f64,
}

impl Timing {
    pub fn default_for(property: PropertyKind) -> Self {
        let duration = match property {
            PropertyKind::Elasticity => DEFAULT_BOUNCE_DURATION,
            PropertyKind::Viscosity => DEFAULT_SPREAD_DURATION,
            PropertyKind::Friction => DEFAULT_SLIDE_DURATION,
        };
        Self {
            fps: DEFAULT_FPS,
            duration,
        }
    }
}

/// Simulates `scene` and observes it through the standard camera.
///
/// A sliding cube may leave the image before the clip ends; its track is cut
/// at the last frame where all four corners are visible.
pub fn render_scene(
    scene: &Scene,
    timing: Timing,
    noise_sigma: f64,
    seed: u64,
) -> Result<Observations, PipelineError> {
    let camera = PinholeCamera::standard(*scene.camera())?;
    Ok(match scene {
        Scene::Elasticity(s) => {
            let track = simulate_bounce(s, timing.duration, timing.fps);
            Observations::Centroids(render_observations(&track, &camera, noise_sigma, seed)?)
        }
        Scene::Viscosity(s) => {
            let track = simulate_spread(s, timing.duration, timing.fps);
            Observations::Areas(render_observations(&track, &camera, noise_sigma, seed)?)
        }
        Scene::Friction(s) => {
            let track = simulate_slide(s, timing.duration, timing.fps);
            let visible = visible_prefix(&track, &camera);
            let track = track
                .truncated(visible)
                .map_err(|_| PipelineError::OutOfView)?;
            Observations::Corners(render_observations(&track, &camera, noise_sigma, seed)?)
        }
    })
}

/// The oracle estimators and the GRU readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    RatioOracle,
    PeakFrame,
    SlopeOracle,
    ParabolaOracle,
    NaiveParabola,
    Gru,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::RatioOracle => "ratio-oracle",
            EstimatorKind::PeakFrame => "peak-frame",
            EstimatorKind::SlopeOracle => "slope-oracle",
            EstimatorKind::ParabolaOracle => "parabola-oracle",
            EstimatorKind::NaiveParabola => "naive-parabola",
            EstimatorKind::Gru => "gru",
        }
    }

    pub fn property(self) -> PropertyKind {
        match self {
            EstimatorKind::RatioOracle | EstimatorKind::PeakFrame | EstimatorKind::Gru => {
                PropertyKind::Elasticity
            }
            EstimatorKind::SlopeOracle => PropertyKind::Viscosity,
            EstimatorKind::ParabolaOracle | EstimatorKind::NaiveParabola => PropertyKind::Friction,
        }
    }

    /// The oracle that goes with each property.
    pub fn oracle_for(property: PropertyKind) -> Self {
        match property {
            PropertyKind::Elasticity => EstimatorKind::RatioOracle,
            PropertyKind::Viscosity => EstimatorKind::SlopeOracle,
            PropertyKind::Friction => EstimatorKind::ParabolaOracle,
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            EstimatorKind::RatioOracle,
            EstimatorKind::PeakFrame,
            EstimatorKind::SlopeOracle,
            EstimatorKind::ParabolaOracle,
            EstimatorKind::NaiveParabola,
            EstimatorKind::Gru,
        ]
        .into_iter()
        .find(|e| e.as_str() == s)
        .ok_or_else(|| format!("unknown estimator `{s}`"))
    }
}

/// Vertical centroid series of a bounce clip.
pub fn centroid_heights(seq: &CentroidSequence) -> Vec<f64> {
    seq.frames.iter().map(|p| p[1]).collect()
}

/// GRU input for a bounce clip: the normalized heights through the first
/// rebound.
pub fn gru_input(seq: &CentroidSequence) -> Result<Vec<f64>, OracleError> {
    rebound_window(&centroid_heights(seq))
}

/// Runs `estimator` on `observations` of `scene`.
///
/// The scene supplies only what the pipeline would know in practice: cube
/// size and gravity for friction.
pub fn estimate(
    scene: &Scene,
    observations: &Observations,
    estimator: EstimatorKind,
    model: Option<&GruModel>,
) -> Result<Estimate, PipelineError> {
    if estimator.property() != observations.property() {
        return Err(PipelineError::EstimatorMismatch {
            estimator: estimator.as_str(),
            property: observations.property(),
        });
    }
    if scene.property() != observations.property() {
        return Err(PipelineError::PropertyMismatch);
    }
    let est = match (observations, scene) {
        (Observations::Centroids(seq), _) => match estimator {
            EstimatorKind::Gru => {
                let model = model.ok_or(OracleError::Model(crate::gru::GruError::NotTrained))?;
                estimate_elasticity_gru(&gru_input(seq)?, model)?
            }
            _ => {
                let heights = centroid_heights(seq);
                match normalize_trajectory(&seq.times, &heights, seq.noise_sigma) {
                    Ok(traj) if estimator == EstimatorKind::PeakFrame => {
                        estimate_elasticity_peak(&traj)?
                    }
                    Ok(traj) => estimate_elasticity_ratio(&traj)?,
                    Err(OracleError::NoBounce(reason))
                        if estimator == EstimatorKind::RatioOracle =>
                    {
                        let ratio = settled_bounce_ratio(&seq.times, &heights, seq.noise_sigma)
                            .ok_or(OracleError::NoBounce(reason))?;
                        Estimate::new(
                            ratio.sqrt(),
                            PropertyKind::Elasticity,
                            EstimatorId::RatioOracle,
                        )?
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        },
        (Observations::Areas(seq), _) => estimate_viscosity(&seq.frames, &seq.times)?,
        (Observations::Corners(seq), Scene::Friction(fs)) => {
            if estimator == EstimatorKind::NaiveParabola {
                estimate_friction_naive(&seq.frames, &seq.times, fs.cube_size, fs.gravity)?
            } else {
                estimate_friction(&seq.frames, &seq.times, fs.cube_size, fs.gravity)?
            }
        }
        (Observations::Corners(_), _) => return Err(PipelineError::PropertyMismatch),
    };
    Ok(est)
}
