//! Scene parameterizations and nuisance-domain sampling.
//!
//! Each scenario has its own scene type. [`sample_scene`] draws every field
//! uniformly from the range of the requested domain; constant fields take
//! their fixed value. Draw order is fixed (camera, color, dynamics) so a seed
//! always produces the same scene for a given release.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Standard gravity used by every scenario, m/s².
pub const GRAVITY: f64 = 9.81;

/// Radius of the bouncing ball, meters.
pub const BALL_RADIUS: f64 = 0.1;

/// Edge length of the sliding cube, meters.
pub const CUBE_SIZE: f64 = 0.1;

/// Liquid column radius, meters.
pub const COLUMN_RADIUS: f64 = 0.05;

/// Liquid column height, meters.
pub const COLUMN_HEIGHT: f64 = 0.1;

/// Height of the liquid column's lower end at release, meters.
pub const COLUMN_DROP_HEIGHT: f64 = 0.056;

/// Plate radius the spreading footprint must stay inside, meters.
pub const PLATE_RADIUS: f64 = 0.3;

/// Viscosity range shared by both domains.
pub const VISCOSITY_RANGE: (f64, f64) = (5e-5, 1e-2);

/// Area growth constant: `dA/dt = SPREAD_CONSTANT / viscosity`.
///
/// Chosen so the footprint of the least viscous liquid stays inside
/// [`PLATE_RADIUS`] over the default spread window.
pub const SPREAD_CONSTANT: f64 = 9.8e-6;

/// Camera standoff radius shared by every scenario and domain.
pub const CAMERA_RADIUS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    Elasticity,
    Viscosity,
    Friction,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 3] = [Self::Elasticity, Self::Viscosity, Self::Friction];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Elasticity => "elasticity",
            Self::Viscosity => "viscosity",
            Self::Friction => "friction",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "elasticity" => Ok(Self::Elasticity),
            "viscosity" => Ok(Self::Viscosity),
            "friction" => Ok(Self::Friction),
            other => Err(format!("unknown property `{other}`")),
        }
    }
}

/// Nuisance-parameter domain. `A1` feeds train and test-1, `A2` test-2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    A1,
    A2,
}

/// Camera placement on a cylinder around the scene origin.
///
/// The camera sits at `(R cos α, R sin α, h)` and looks at `look_at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub radius: f64,
    pub height: f64,
    pub azimuth: f64,
    pub look_at: [f64; 3],
}

impl CameraPose {
    pub fn position(&self) -> [f64; 3] {
        [
            self.radius * self.azimuth.cos(),
            self.radius * self.azimuth.sin(),
            self.height,
        ]
    }
}

/// Ground-plane axis a cube slides along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityScene {
    pub restitution: f64,
    /// Release height of the ball's lowest point above the ground.
    pub drop_height: f64,
    pub ball_radius: f64,
    pub gravity: f64,
    pub camera: CameraPose,
    /// Appearance only; no physical effect.
    pub color: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscosityScene {
    pub viscosity: f64,
    pub column_radius: f64,
    pub column_height: f64,
    /// Release height of the column's lower end above the ground.
    pub drop_height: f64,
    pub spread_constant: f64,
    pub gravity: f64,
    pub camera: CameraPose,
    pub color: [f64; 3],
}

impl ViscosityScene {
    /// Footprint area before contact, the column cross-section.
    pub fn initial_area(&self) -> f64 {
        PI * self.column_radius * self.column_radius
    }

    /// Post-contact area growth rate.
    pub fn spread_rate(&self) -> f64 {
        self.spread_constant / self.viscosity
    }

    /// Free-fall time until the column touches the ground.
    pub fn contact_time(&self) -> f64 {
        (2.0 * self.drop_height / self.gravity).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrictionScene {
    pub friction_coeff: f64,
    /// Initial ground-plane position of the cube center.
    pub initial_position: [f64; 2],
    pub initial_speed: f64,
    pub motion_axis: Axis,
    pub cube_size: f64,
    pub gravity: f64,
    pub camera: CameraPose,
    pub color: [f64; 3],
}

impl FrictionScene {
    pub fn deceleration(&self) -> f64 {
        self.friction_coeff * self.gravity
    }

    pub fn stop_time(&self) -> f64 {
        self.initial_speed / self.deceleration()
    }

    pub fn sliding_distance(&self) -> f64 {
        self.initial_speed * self.initial_speed / (2.0 * self.deceleration())
    }
}

/// A fully parameterized synthetic clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "kebab-case")]
pub enum Scene {
    Elasticity(ElasticityScene),
    Viscosity(ViscosityScene),
    Friction(FrictionScene),
}

impl Scene {
    pub fn property(&self) -> PropertyKind {
        match self {
            Scene::Elasticity(_) => PropertyKind::Elasticity,
            Scene::Viscosity(_) => PropertyKind::Viscosity,
            Scene::Friction(_) => PropertyKind::Friction,
        }
    }

    /// The target property value.
    pub fn ground_truth(&self) -> f64 {
        match self {
            Scene::Elasticity(s) => s.restitution,
            Scene::Viscosity(s) => s.viscosity,
            Scene::Friction(s) => s.friction_coeff,
        }
    }

    pub fn camera(&self) -> &CameraPose {
        match self {
            Scene::Elasticity(s) => &s.camera,
            Scene::Viscosity(s) => &s.camera,
            Scene::Friction(s) => &s.camera,
        }
    }

    /// Same scene seen from a different viewpoint.
    pub fn with_camera(mut self, camera: CameraPose) -> Self {
        match &mut self {
            Scene::Elasticity(s) => s.camera = camera,
            Scene::Viscosity(s) => s.camera = camera,
            Scene::Friction(s) => s.camera = camera,
        }
        self
    }
}

/// Uniform draw from the open interval `(lo, hi)`.
fn open_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

fn sample_camera<R: Rng>(rng: &mut R, property: PropertyKind, domain: Domain) -> CameraPose {
    let (height, azimuth, xl, yl) = match domain {
        Domain::A1 => ((0.5, 1.5), (0.0, FRAC_PI_2), (-0.1, 0.1), (-0.1, 0.1)),
        Domain::A2 => ((0.25, 0.5), (FRAC_PI_2, 2.0 * PI), (0.1, 0.2), (-0.2, -0.1)),
    };
    let zl = match (property, domain) {
        (PropertyKind::Friction, Domain::A1) => (-0.1, 0.12),
        (PropertyKind::Friction, Domain::A2) => (-0.14, -0.1),
        (_, Domain::A1) => (0.05, 0.27),
        (_, Domain::A2) => (-0.05, 0.05),
    };
    CameraPose {
        radius: CAMERA_RADIUS,
        height: open_uniform(rng, height.0, height.1),
        azimuth: open_uniform(rng, azimuth.0, azimuth.1),
        look_at: [
            open_uniform(rng, xl.0, xl.1),
            open_uniform(rng, yl.0, yl.1),
            open_uniform(rng, zl.0, zl.1),
        ],
    }
}

fn sample_color<R: Rng>(rng: &mut R, property: PropertyKind, domain: Domain) -> [f64; 3] {
    let mut unit = || open_uniform(rng, 0.0, 1.0);
    match (property, domain) {
        (_, Domain::A1) => [unit(), unit(), 0.0],
        (PropertyKind::Friction, Domain::A2) => [unit(), unit(), unit()],
        (_, Domain::A2) => [0.0, 0.0, unit()],
    }
}

/// Draws a scene for `property` from `domain`.
///
/// Uses ChaCha8 seeded with `seed`; identical arguments give identical scenes.
pub fn sample_scene(property: PropertyKind, domain: Domain, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let camera = sample_camera(&mut rng, property, domain);
    let color = sample_color(&mut rng, property, domain);
    match property {
        PropertyKind::Elasticity => {
            let drop = match domain {
                Domain::A1 => (0.25, 0.4),
                Domain::A2 => (0.4, 0.5),
            };
            Scene::Elasticity(ElasticityScene {
                drop_height: open_uniform(&mut rng, drop.0, drop.1),
                restitution: open_uniform(&mut rng, 0.0, 1.0),
                ball_radius: BALL_RADIUS,
                gravity: GRAVITY,
                camera,
                color,
            })
        }
        PropertyKind::Viscosity => Scene::Viscosity(ViscosityScene {
            viscosity: open_uniform(&mut rng, VISCOSITY_RANGE.0, VISCOSITY_RANGE.1),
            column_radius: COLUMN_RADIUS,
            column_height: COLUMN_HEIGHT,
            drop_height: COLUMN_DROP_HEIGHT,
            spread_constant: SPREAD_CONSTANT,
            gravity: GRAVITY,
            camera,
            color,
        }),
        PropertyKind::Friction => {
            let (x0, y0, v0) = match domain {
                Domain::A1 => ((-0.1, 0.1), (-0.1, 0.1), (0.6, 1.0)),
                Domain::A2 => ((-0.15, -0.1), (0.1, 0.15), (1.0, 1.2)),
            };
            let initial_position = [
                open_uniform(&mut rng, x0.0, x0.1),
                open_uniform(&mut rng, y0.0, y0.1),
            ];
            let motion_axis = if rng.random_bool(0.5) {
                Axis::X
            } else {
                Axis::Y
            };
            Scene::Friction(FrictionScene {
                initial_position,
                initial_speed: open_uniform(&mut rng, v0.0, v0.1),
                motion_axis,
                friction_coeff: open_uniform(&mut rng, 0.0, 0.2),
                cube_size: CUBE_SIZE,
                gravity: GRAVITY,
                camera,
                color,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_open(v: f64, lo: f64, hi: f64) -> bool {
        v > lo && v < hi
    }

    #[test]
    fn elasticity_a1_ranges() {
        for seed in 0..200 {
            let Scene::Elasticity(s) = sample_scene(PropertyKind::Elasticity, Domain::A1, seed)
            else {
                panic!("wrong scenario");
            };
            assert!(in_open(s.restitution, 0.0, 1.0));
            assert!(in_open(s.drop_height, 0.25, 0.4));
            assert_eq!(s.ball_radius, 0.1);
            assert!(in_open(s.camera.height, 0.5, 1.5));
            assert!(in_open(s.camera.azimuth, 0.0, FRAC_PI_2));
            assert!(in_open(s.camera.look_at[2], 0.05, 0.27));
            assert_eq!(s.color[2], 0.0);
        }
    }

    #[test]
    fn friction_a2_ranges() {
        let mut axes = [0usize; 2];
        for seed in 0..200 {
            let Scene::Friction(s) = sample_scene(PropertyKind::Friction, Domain::A2, seed) else {
                panic!("wrong scenario");
            };
            assert!(in_open(s.friction_coeff, 0.0, 0.2));
            assert!(in_open(s.initial_speed, 1.0, 1.2));
            assert!(in_open(s.initial_position[0], -0.15, -0.1));
            assert!(in_open(s.initial_position[1], 0.1, 0.15));
            assert_eq!(s.cube_size, 0.1);
            assert!(in_open(s.camera.look_at[2], -0.14, -0.1));
            assert!(in_open(s.camera.azimuth, FRAC_PI_2, 2.0 * PI));
            axes[s.motion_axis.index()] += 1;
        }
        assert!(axes[0] > 50 && axes[1] > 50, "axis split {axes:?}");
    }

    #[test]
    fn viscosity_constants_and_determinism() {
        let a = sample_scene(PropertyKind::Viscosity, Domain::A1, 42);
        let b = sample_scene(PropertyKind::Viscosity, Domain::A1, 42);
        assert_eq!(a, b);
        let Scene::Viscosity(s) = a else {
            unreachable!()
        };
        assert!(in_open(s.viscosity, 5e-5, 1e-2));
        assert_eq!(s.column_radius, 0.05);
        assert_eq!(s.column_height, 0.1);
        assert_eq!(s.drop_height, 0.056);
        assert_ne!(
            sample_scene(PropertyKind::Viscosity, Domain::A1, 43),
            sample_scene(PropertyKind::Viscosity, Domain::A1, 42)
        );
    }

    #[test]
    fn camera_position_convention() {
        let pose = CameraPose {
            radius: 1.5,
            height: 0.7,
            azimuth: FRAC_PI_2,
            look_at: [0.0; 3],
        };
        let p = pose.position();
        assert!(p[0].abs() < 1e-15);
        assert_eq!(p[1], 1.5);
        assert_eq!(p[2], 0.7);
    }

    #[test]
    fn spread_constant_keeps_footprint_on_plate() {
        let scene = ViscosityScene {
            viscosity: VISCOSITY_RANGE.0,
            column_radius: COLUMN_RADIUS,
            column_height: COLUMN_HEIGHT,
            drop_height: COLUMN_DROP_HEIGHT,
            spread_constant: SPREAD_CONSTANT,
            gravity: GRAVITY,
            camera: CameraPose {
                radius: 1.5,
                height: 1.0,
                azimuth: 0.3,
                look_at: [0.0; 3],
            },
            color: [0.0; 3],
        };
        let window = crate::sim::DEFAULT_SPREAD_DURATION - scene.contact_time();
        let area = scene.initial_area() + scene.spread_rate() * window;
        assert!((area / PI).sqrt() <= PLATE_RADIUS);
    }
}
