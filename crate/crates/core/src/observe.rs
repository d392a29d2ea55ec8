//! Image-space measurements derived from world tracks.
//!
//! These are the analytic stand-ins for segmentation output: ball centroids,
//! liquid footprint areas and cube top-face corners. Pixel `y` is flipped at
//! construction so it grows upward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{CameraError, PinholeCamera, Pixel};
use crate::sim::{BallState, CubeState, FootprintState, WorldTrack};

#[derive(Debug, Error, PartialEq)]
pub enum ObserveError {
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("cannot sample {requested} frames from a sequence of {available}")]
    FrameCountOutOfRange { requested: usize, available: usize },
    #[error("noise sigma must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("observation sequence is malformed: {0}")]
    Malformed(&'static str),
}

/// Per-frame image measurements plus the noise level that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSequence<M> {
    pub times: Vec<f64>,
    pub frames: Vec<M>,
    pub noise_sigma: f64,
}

pub type CentroidSequence = ObservationSequence<Pixel>;
pub type AreaSequence = ObservationSequence<f64>;
pub type CornerSequence = ObservationSequence<[Pixel; 4]>;

impl<M: Clone> ObservationSequence<M> {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn validate(&self) -> Result<(), ObserveError> {
        if self.times.len() != self.frames.len() {
            return Err(ObserveError::Malformed("times and frames differ in length"));
        }
        if self.times.len() < 2 {
            return Err(ObserveError::Malformed("fewer than 2 frames"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ObserveError::Malformed("times not strictly increasing"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(ObserveError::Malformed("negative noise sigma"));
        }
        Ok(())
    }

    /// Keeps `n` frames at indices `round(k·(N−1)/(n−1))`, `k = 0..n`,
    /// rounding halves up. Always includes the first and last frame.
    pub fn subsample(&self, n: usize) -> Result<Self, ObserveError> {
        let idx = subsample_indices(self.frame_count(), n)?;
        Ok(Self {
            times: idx.iter().map(|&i| self.times[i]).collect(),
            frames: idx.iter().map(|&i| self.frames[i].clone()).collect(),
            noise_sigma: self.noise_sigma,
        })
    }
}

/// Indices picked by [`subsample_frames`].
pub fn subsample_indices(available: usize, n: usize) -> Result<Vec<usize>, ObserveError> {
    if n < 2 || n > available {
        return Err(ObserveError::FrameCountOutOfRange {
            requested: n,
            available,
        });
    }
    let span = available - 1;
    let steps = n - 1;
    Ok((0..n)
        .map(|k| (2 * k * span + steps) / (2 * steps))
        .collect())
}

pub fn subsample_frames<M: Clone>(
    seq: &ObservationSequence<M>,
    n: usize,
) -> Result<ObservationSequence<M>, ObserveError> {
    seq.subsample(n)
}

/// A world state that can be seen by a camera.
pub trait Observable {
    type Measurement: Clone;

    fn observe(&self, camera: &PinholeCamera) -> Result<Self::Measurement, CameraError>;

    /// Adds zero-mean Gaussian pixel noise of scale `sigma`.
    fn perturb(m: &mut Self::Measurement, sigma: f64, rng: &mut ChaCha8Rng);

    /// Whether the measurement lies inside the image.
    fn in_frame(m: &Self::Measurement, camera: &PinholeCamera) -> bool;
}

fn flip(camera: &PinholeCamera, p: Pixel) -> Pixel {
    [p[0], camera.image_size()[1] - p[1]]
}

fn inside(camera: &PinholeCamera, p: &Pixel) -> bool {
    let [w, h] = camera.image_size();
    (0.0..=w).contains(&p[0]) && (0.0..=h).contains(&p[1])
}

fn gaussian(sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, sigma)
        .expect("sigma validated")
        .sample(rng)
}

impl Observable for BallState {
    type Measurement = Pixel;

    fn observe(&self, camera: &PinholeCamera) -> Result<Pixel, CameraError> {
        Ok(flip(camera, camera.project(self.centroid)?))
    }

    fn perturb(m: &mut Pixel, sigma: f64, rng: &mut ChaCha8Rng) {
        m[0] += gaussian(sigma, rng);
        m[1] += gaussian(sigma, rng);
    }

    fn in_frame(m: &Pixel, camera: &PinholeCamera) -> bool {
        inside(camera, m)
    }
}

impl Observable for FootprintState {
    /// Image area in px², using the local affine map at the footprint center.
    type Measurement = f64;

    fn observe(&self, camera: &PinholeCamera) -> Result<f64, CameraError> {
        Ok(self.area * camera.ground_area_scale(self.center)?)
    }

    /// Noise enters through the equivalent image radius.
    fn perturb(m: &mut f64, sigma: f64, rng: &mut ChaCha8Rng) {
        let radius = (*m / std::f64::consts::PI).sqrt() + gaussian(sigma, rng);
        *m = std::f64::consts::PI * radius.max(0.0).powi(2);
    }

    fn in_frame(_: &f64, _: &PinholeCamera) -> bool {
        true
    }
}

impl Observable for CubeState {
    type Measurement = [Pixel; 4];

    fn observe(&self, camera: &PinholeCamera) -> Result<[Pixel; 4], CameraError> {
        let mut out = [[0.0; 2]; 4];
        for (o, c) in out.iter_mut().zip(&self.corners) {
            *o = flip(camera, camera.project(*c)?);
        }
        Ok(out)
    }

    fn perturb(m: &mut [Pixel; 4], sigma: f64, rng: &mut ChaCha8Rng) {
        for p in m.iter_mut() {
            p[0] += gaussian(sigma, rng);
            p[1] += gaussian(sigma, rng);
        }
    }

    fn in_frame(m: &[Pixel; 4], camera: &PinholeCamera) -> bool {
        m.iter().all(|p| inside(camera, p))
    }
}

/// Projects every state of `track`, then adds noise drawn from a ChaCha8
/// stream seeded with `seed`. `noise_sigma = 0` gives exact projections.
pub fn render_observations<S: Observable>(
    track: &WorldTrack<S>,
    camera: &PinholeCamera,
    noise_sigma: f64,
    seed: u64,
) -> Result<ObservationSequence<S::Measurement>, ObserveError> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(ObserveError::InvalidNoise(noise_sigma));
    }
    let mut frames = track
        .states()
        .iter()
        .map(|s| s.observe(camera))
        .collect::<Result<Vec<_>, _>>()?;
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in &mut frames {
            S::perturb(m, noise_sigma, &mut rng);
        }
    }
    Ok(ObservationSequence {
        times: track.times().to_vec(),
        frames,
        noise_sigma,
    })
}

/// Number of leading states that project in front of the camera and inside
/// the image.
pub fn visible_prefix<S: Observable>(track: &WorldTrack<S>, camera: &PinholeCamera) -> usize {
    track
        .states()
        .iter()
        .take_while(|s| {
            s.observe(camera)
                .map(|m| S::in_frame(&m, camera))
                .unwrap_or(false)
        })
        .count()
}
