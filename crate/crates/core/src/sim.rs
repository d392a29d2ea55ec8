//! Closed-form world-space integration of the three scenarios.
//!
//! Every scenario has an exact piecewise-analytic solution, so tracks are
//! sampled from formulas rather than stepped by an integrator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ElasticityScene, FrictionScene, ViscosityScene};

pub const DEFAULT_FPS: f64 = 60.0;
pub const DEFAULT_BOUNCE_DURATION: f64 = 2.5;
pub const DEFAULT_SPREAD_DURATION: f64 = 1.5;
pub const DEFAULT_SLIDE_DURATION: f64 = 2.0;

/// Apex heights below this fraction of the drop height count as resting.
const REST_FRACTION: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("track needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("times and states differ in length ({times} vs {states})")]
    LengthMismatch { times: usize, states: usize },
    #[error("sample times must be strictly increasing (index {0})")]
    NonMonotonicTime(usize),
    #[error("non-finite value in track")]
    NonFinite,
}

/// Time-stamped world-space ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldTrack<S> {
    times: Vec<f64>,
    states: Vec<S>,
}

/// Anything stored in a [`WorldTrack`] can report whether it is finite.
pub trait TrackState {
    fn is_finite(&self) -> bool;
}

impl<S: TrackState> WorldTrack<S> {
    pub fn new(times: Vec<f64>, states: Vec<S>) -> Result<Self, TrackError> {
        if times.len() != states.len() {
            return Err(TrackError::LengthMismatch {
                times: times.len(),
                states: states.len(),
            });
        }
        if times.len() < 2 {
            return Err(TrackError::TooShort(times.len()));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(TrackError::NonMonotonicTime(i + 1));
        }
        if times.iter().any(|t| !t.is_finite()) || states.iter().any(|s| !s.is_finite()) {
            return Err(TrackError::NonFinite);
        }
        Ok(Self { times, states })
    }
}

impl<S> WorldTrack<S> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Keeps the first `n` samples.
    pub fn truncated(mut self, n: usize) -> Result<Self, TrackError> {
        if n < 2 {
            return Err(TrackError::TooShort(n));
        }
        self.times.truncate(n);
        self.states.truncate(n);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub centroid: [f64; 3],
    pub vertical_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintState {
    pub center: [f64; 3],
    pub radius: f64,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeState {
    /// Center of the cube body.
    pub centroid: [f64; 3],
    /// Signed speed along the motion axis.
    pub velocity: f64,
    /// Top-face corners, counter-clockwise seen from above starting at (-,-).
    pub corners: [[f64; 3]; 4],
}

fn finite3(v: &[f64; 3]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl TrackState for BallState {
    fn is_finite(&self) -> bool {
        finite3(&self.centroid) && self.vertical_velocity.is_finite()
    }
}

impl TrackState for FootprintState {
    fn is_finite(&self) -> bool {
        finite3(&self.center) && self.radius.is_finite() && self.area.is_finite()
    }
}

impl TrackState for CubeState {
    fn is_finite(&self) -> bool {
        finite3(&self.centroid) && self.velocity.is_finite() && self.corners.iter().all(finite3)
    }
}

pub type BounceTrack = WorldTrack<BallState>;
pub type SpreadTrack = WorldTrack<FootprintState>;
pub type SlideTrack = WorldTrack<CubeState>;

/// Sample times `0, 1/fps, ...` up to and including `duration`.
pub fn frame_times(duration: f64, fps: f64) -> Vec<f64> {
    assert!(
        duration > 0.0 && fps > 0.0,
        "duration and fps must be positive"
    );
    let n = (duration * fps + 1e-9).floor() as usize + 1;
    (0..n.max(2)).map(|i| i as f64 / fps).collect()
}

/// Flight segments of a dropped ball: free fall, then rebounds scaled by `e`.
#[derive(Debug, Clone)]
pub struct BounceSchedule {
    drop_height: f64,
    gravity: f64,
    /// Impact times, increasing.
    impacts: Vec<f64>,
    /// Rebound speed leaving each impact.
    rebound_speeds: Vec<f64>,
}

impl BounceSchedule {
    pub fn new(scene: &ElasticityScene, horizon: f64) -> Self {
        let g = scene.gravity;
        let h = scene.drop_height;
        let first = (2.0 * h / g).sqrt();
        let mut impacts = vec![first];
        let mut rebound_speeds = Vec::new();
        let mut speed = g * first;
        let mut t = first;
        loop {
            speed *= scene.restitution;
            rebound_speeds.push(speed);
            let apex = speed * speed / (2.0 * g);
            if apex <= REST_FRACTION * h || t > horizon {
                break;
            }
            t += 2.0 * speed / g;
            impacts.push(t);
        }
        Self {
            drop_height: h,
            gravity: g,
            impacts,
            rebound_speeds,
        }
    }

    /// Height of the ball's lowest point and its vertical velocity at `t`.
    pub fn state_at(&self, t: f64) -> (f64, f64) {
        let g = self.gravity;
        if t < self.impacts[0] {
            return (self.drop_height - 0.5 * g * t * t, -g * t);
        }
        // index of the last impact at or before t
        let k = self.impacts.partition_point(|&ti| ti <= t) - 1;
        let rebound = self.rebound_speeds[k];
        let tau = t - self.impacts[k];
        let last_flight = k + 1 == self.impacts.len();
        if last_flight && tau >= 2.0 * rebound / g {
            return (0.0, 0.0);
        }
        let z = rebound * tau - 0.5 * g * tau * tau;
        (z.max(0.0), rebound - g * tau)
    }

    /// `(time, height)` of every rebound apex.
    pub fn apexes(&self) -> Vec<(f64, f64)> {
        self.impacts
            .iter()
            .zip(&self.rebound_speeds)
            .map(|(&ti, &v)| (ti + v / self.gravity, v * v / (2.0 * self.gravity)))
            .collect()
    }

    pub fn impacts(&self) -> &[f64] {
        &self.impacts
    }
}

/// Ball dropped from rest at the origin, bouncing vertically.
pub fn simulate_bounce(scene: &ElasticityScene, duration: f64, fps: f64) -> BounceTrack {
    let times = frame_times(duration, fps);
    let schedule = BounceSchedule::new(scene, duration);
    let states = times
        .iter()
        .map(|&t| {
            let (z, v) = schedule.state_at(t);
            BallState {
                centroid: [0.0, 0.0, scene.ball_radius + z],
                vertical_velocity: v,
            }
        })
        .collect();
    WorldTrack::new(times, states).expect("closed-form bounce track is valid")
}

/// Liquid column falling onto the ground and spreading linearly in area.
pub fn simulate_spread(scene: &ViscosityScene, duration: f64, fps: f64) -> SpreadTrack {
    let times = frame_times(duration, fps);
    let a0 = scene.initial_area();
    let tc = scene.contact_time();
    let rate = scene.spread_rate();
    let states = times
        .iter()
        .map(|&t| {
            let area = if t <= tc { a0 } else { a0 + rate * (t - tc) };
            FootprintState {
                center: [0.0; 3],
                radius: (area / std::f64::consts::PI).sqrt(),
                area,
            }
        })
        .collect();
    WorldTrack::new(times, states).expect("closed-form spread track is valid")
}

/// Displacement and velocity of a sliding cube under kinetic friction.
pub fn slide_motion(scene: &FrictionScene, t: f64) -> (f64, f64) {
    let a = scene.deceleration();
    let t = t.min(scene.stop_time());
    let v = scene.initial_speed - a * t;
    (scene.initial_speed * t - 0.5 * a * t * t, v.max(0.0))
}

/// Cube sliding along its motion axis on the ground plane until friction stops it.
pub fn simulate_slide(scene: &FrictionScene, duration: f64, fps: f64) -> SlideTrack {
    let times = frame_times(duration, fps);
    let half = 0.5 * scene.cube_size;
    let axis = scene.motion_axis.index();
    let states = times
        .iter()
        .map(|&t| {
            let (s, v) = slide_motion(scene, t);
            let mut c = [scene.initial_position[0], scene.initial_position[1], half];
            c[axis] += s;
            let top = scene.cube_size;
            let corners = [
                [c[0] - half, c[1] - half, top],
                [c[0] + half, c[1] - half, top],
                [c[0] + half, c[1] + half, top],
                [c[0] - half, c[1] + half, top],
            ];
            CubeState {
                centroid: c,
                velocity: v,
                corners,
            }
        })
        .collect();
    WorldTrack::new(times, states).expect("closed-form slide track is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Axis, CameraPose, CUBE_SIZE, GRAVITY};

    fn pose() -> CameraPose {
        CameraPose {
            radius: 1.5,
            height: 1.0,
            azimuth: 0.5,
            look_at: [0.0; 3],
        }
    }

    pub(crate) fn ball(e: f64, h: f64) -> ElasticityScene {
        ElasticityScene {
            restitution: e,
            drop_height: h,
            ball_radius: 0.1,
            gravity: GRAVITY,
            camera: pose(),
            color: [0.5, 0.5, 0.0],
        }
    }

    fn cube(mu: f64, v0: f64) -> FrictionScene {
        FrictionScene {
            friction_coeff: mu,
            initial_position: [0.0, 0.0],
            initial_speed: v0,
            motion_axis: Axis::X,
            cube_size: CUBE_SIZE,
            gravity: GRAVITY,
            camera: pose(),
            color: [0.0; 3],
        }
    }

    #[test]
    fn first_apex_is_e_squared_h() {
        let s = BounceSchedule::new(&ball(0.5, 1.0), 5.0);
        let (_, h1) = s.apexes()[0];
        assert!((h1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn second_apex_closed_form() {
        let s = BounceSchedule::new(&ball(0.9, 0.3), 5.0);
        let (_, h2) = s.apexes()[1];
        assert!((h2 - 0.19683).abs() < 1e-12, "{h2}");
    }

    #[test]
    fn sampled_apex_recovers_restitution() {
        for &e in &[0.1, 0.35, 0.5, 0.77, 0.9] {
            let scene = ball(e, 0.3);
            let s = BounceSchedule::new(&scene, 5.0);
            let (t_apex, _) = s.apexes()[0];
            let (z, v) = s.state_at(t_apex);
            assert!(v.abs() < 1e-12);
            assert!(((z / scene.drop_height).sqrt() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn apex_ratio_is_e_squared() {
        let e = 0.8;
        let apexes = BounceSchedule::new(&ball(e, 0.4), 10.0).apexes();
        assert!(apexes.len() > 5);
        for w in apexes.windows(2) {
            assert!(w[1].1 < w[0].1);
            assert!((w[1].1 / w[0].1 - e * e).abs() < 1e-9);
        }
    }

    #[test]
    fn bounce_never_below_radius_and_deterministic() {
        let scene = ball(0.7, 0.35);
        let a = simulate_bounce(&scene, DEFAULT_BOUNCE_DURATION, DEFAULT_FPS);
        let b = simulate_bounce(&scene, DEFAULT_BOUNCE_DURATION, DEFAULT_FPS);
        assert_eq!(a, b);
        assert_eq!(a.len(), 151);
        assert!(a
            .states()
            .iter()
            .all(|s| s.centroid[2] >= scene.ball_radius));
        assert!((a.states()[0].centroid[2] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn ball_comes_to_rest() {
        let scene = ball(0.3, 0.3);
        let track = simulate_bounce(&scene, 3.0, 60.0);
        let last = track.states().last().unwrap();
        assert_eq!(last.centroid[2], scene.ball_radius);
        assert_eq!(last.vertical_velocity, 0.0);
    }

    #[test]
    fn spread_is_linear_after_contact() {
        let scene = ViscosityScene {
            viscosity: 1e-3,
            column_radius: 0.05,
            column_height: 0.1,
            drop_height: 0.056,
            spread_constant: 1e-5,
            gravity: GRAVITY,
            camera: pose(),
            color: [0.0; 3],
        };
        assert!((scene.spread_rate() - 1e-2).abs() < 1e-15);
        let track = simulate_spread(&scene, DEFAULT_SPREAD_DURATION, DEFAULT_FPS);
        let a0 = std::f64::consts::PI * 0.05 * 0.05;
        let tc = scene.contact_time();
        for (t, s) in track.times().iter().zip(track.states()) {
            if *t <= tc {
                assert_eq!(s.area, a0);
            } else {
                assert!((s.area - (a0 + 1e-2 * (t - tc))).abs() < 1e-15);
            }
        }
        assert!(track.states().windows(2).all(|w| w[1].area >= w[0].area));

        let doubled = ViscosityScene {
            viscosity: 2e-3,
            ..scene.clone()
        };
        assert!((doubled.spread_rate() * 2.0 - scene.spread_rate()).abs() < 1e-15);
    }

    #[test]
    fn slide_stop_time_and_distance() {
        let scene = cube(0.1, 0.981);
        assert!((scene.stop_time() - 1.0).abs() < 1e-12);
        assert!((scene.sliding_distance() - 0.4905).abs() < 1e-12);
        let track = simulate_slide(&scene, DEFAULT_SLIDE_DURATION, DEFAULT_FPS);
        for (t, s) in track.times().iter().zip(track.states()) {
            if *t > 1.0 {
                assert_eq!(s.velocity, 0.0);
                assert!((s.centroid[0] - 0.4905).abs() < 1e-12);
            }
        }
        let v: Vec<f64> = track.states().iter().map(|s| s.velocity).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn slide_second_difference_is_deceleration() {
        let scene = cube(0.15, 0.9);
        let fps = 60.0;
        let track = simulate_slide(&scene, 2.0, fps);
        let x: Vec<f64> = track.states().iter().map(|s| s.centroid[0]).collect();
        let dt = 1.0 / fps;
        for i in 1..x.len() - 1 {
            if track.times()[i + 1] < scene.stop_time() {
                let acc = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (dt * dt);
                assert!((acc + 0.15 * GRAVITY).abs() < 1e-6, "{acc}");
            }
        }
    }

    #[test]
    fn slide_corners_surround_centroid() {
        let track = simulate_slide(&cube(0.1, 0.8), 1.0, 30.0);
        for s in track.states() {
            let mean_x: f64 = s.corners.iter().map(|c| c[0]).sum::<f64>() / 4.0;
            let mean_y: f64 = s.corners.iter().map(|c| c[1]).sum::<f64>() / 4.0;
            assert!((mean_x - s.centroid[0]).abs() < 1e-15);
            assert!((mean_y - s.centroid[1]).abs() < 1e-15);
            assert!(s.corners.iter().all(|c| c[2] == CUBE_SIZE));
        }
    }

    #[test]
    fn track_validation() {
        let state = BallState {
            centroid: [0.0; 3],
            vertical_velocity: 0.0,
        };
        assert_eq!(
            WorldTrack::new(vec![0.0], vec![state]).unwrap_err(),
            TrackError::TooShort(1)
        );
        assert_eq!(
            WorldTrack::new(vec![0.0, 0.0], vec![state, state]).unwrap_err(),
            TrackError::NonMonotonicTime(1)
        );
        let bad = BallState {
            centroid: [f64::NAN, 0.0, 0.0],
            vertical_velocity: 0.0,
        };
        assert_eq!(
            WorldTrack::new(vec![0.0, 1.0], vec![state, bad]).unwrap_err(),
            TrackError::NonFinite
        );
    }

    #[test]
    fn frame_count_includes_endpoint() {
        assert_eq!(frame_times(2.5, 60.0).len(), 151);
        assert_eq!(frame_times(1.5, 60.0).len(), 91);
        assert_eq!(frame_times(2.0, 60.0).len(), 121);
    }
}
