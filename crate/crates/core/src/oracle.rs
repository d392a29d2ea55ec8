//! Oracle estimators for elasticity, viscosity and friction, and the
//! relative decision score between two clips.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{apply_homography, estimate_homography, CameraError, Pixel};
use crate::fit::{eval_quadratic, fit_line, fit_mobius, fit_quadratic};
use crate::gru::{GruError, GruModel};
use crate::scene::PropertyKind;

/// Moving-average window used for key-point detection.
pub const SMOOTHING_WINDOW: usize = 3;
/// Relative area growth that marks the first contact frame.
pub const CONTACT_AREA_THRESHOLD: f64 = 0.01;
/// One-frame displacement, as a fraction of the cube size, that marks a stop.
pub const STOP_DISPLACEMENT_FRACTION: f64 = 1e-3;
/// Minimum post-contact samples for the area slope.
pub const MIN_SPREAD_SAMPLES: usize = 5;
/// Minimum moving frames for the parabola fit.
pub const MIN_SLIDE_SAMPLES: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("no bounce detected: {0}")]
    NoBounce(&'static str),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("area slope is not positive ({0})")]
    NonPositiveSlope(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("first-frame corners are degenerate")]
    DegenerateCorners,
    #[error("parabola curvature does not oppose the motion (alpha {alpha}, beta {beta})")]
    WrongCurvature { alpha: f64, beta: f64 },
    #[error("estimate must be positive, got {0}")]
    NonPositiveEstimate(f64),
    #[error("estimate is not finite")]
    NonFinite,
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Model(#[from] GruError),
}

/// Which pipeline produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorId {
    /// Sub-frame bounce/drop height ratio.
    RatioOracle,
    /// Height ratio read off the detected peak frame.
    PeakFrame,
    SlopeOracle,
    ParabolaOracle,
    /// Parabola fitted in image space with a first-frame pixel scale.
    NaiveParabola,
    Gru,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub property: PropertyKind,
    pub estimator: EstimatorId,
}

impl Estimate {
    pub fn new(
        value: f64,
        property: PropertyKind,
        estimator: EstimatorId,
    ) -> Result<Self, OracleError> {
        if !value.is_finite() {
            return Err(OracleError::NonFinite);
        }
        let needs_positive = matches!(property, PropertyKind::Viscosity | PropertyKind::Friction);
        if needs_positive && !(value > 0.0) {
            return Err(OracleError::NonPositiveEstimate(value));
        }
        Ok(Self {
            value,
            property,
            estimator,
        })
    }
}

/// A bounce trajectory rescaled so the first contact frame is 0 and the drop
/// frame is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub drop_idx: usize,
    pub contact_idx: usize,
    pub peak_idx: usize,
    /// Bounce apex over drop height, located between frames by fitting the
    /// ballistic segments on either side of the first contact. Falls back to
    /// `values[peak_idx]` when the bounce has too few frames to fit.
    pub bounce_ratio: f64,
}

/// Centered moving average; windows are truncated at the ends.
pub fn smooth(y: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(y.len());
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn argmin_near(y: &[f64], center: usize, lo_bound: usize) -> usize {
    let lo = center.saturating_sub(1).max(lo_bound);
    let hi = (center + 1).min(y.len() - 1);
    (lo..=hi).fold(lo, |best, i| if y[i] < y[best] { i } else { best })
}

fn argmax_near(y: &[f64], center: usize, lo_bound: usize) -> usize {
    let lo = center.saturating_sub(1).max(lo_bound);
    let hi = (center + 1).min(y.len() - 1);
    (lo..=hi).fold(lo, |best, i| if y[i] > y[best] { i } else { best })
}

/// First local minimum of the smoothed series inside the lower half of its
/// range, refined on the raw series.
///
/// Smoothing can flatten a small rebound into the resting level, so the raw
/// series is scanned up to the smoothed candidate for an earlier minimum.
fn detect_contact(y: &[f64], s: &[f64]) -> Option<usize> {
    let lowest = s.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = s[0] - 0.5 * (s[0] - lowest);
    let i = (1..s.len() - 1).find(|&i| s[i] <= s[i - 1] && s[i] <= s[i + 1] && s[i] < threshold)?;
    let raw = (1..(i + 2).min(y.len() - 1))
        .find(|&j| y[j] <= y[j - 1] && y[j] < y[j + 1] && y[j] < threshold);
    Some(raw.unwrap_or_else(|| argmin_near(y, i, 1)))
}

/// First local maximum after contact that rises more than `floor` above it.
///
/// A rebound lasts at most twice the fall, so the search stops at frame
/// `3·contact`.
fn detect_peak(y: &[f64], s: &[f64], contact: usize, floor: f64) -> Option<usize> {
    let base = y[contact];
    let end = (3 * contact + 1).max(contact + 2).min(y.len() - 1);
    let smoothed = (contact + 1..end)
        .find(|&j| s[j] >= s[j - 1] && s[j] > s[j + 1] && s[j] - base > floor)
        .map(|j| argmax_near(y, j, contact + 1));
    smoothed.or_else(|| {
        (contact + 1..end).find(|&j| y[j] >= y[j - 1] && y[j] > y[j + 1] && y[j] - base > floor)
    })
}

/// Rescales `y` by drop and contact levels: `(y - y[contact]) / (y[0] - y[contact])`.
///
/// Unlike [`normalize_trajectory`] this needs only a detectable contact, so it
/// also works for clips whose bounce is lost in noise.
pub fn normalized_values(y: &[f64]) -> Result<Vec<f64>, OracleError> {
    if y.len() < 3 {
        return Err(OracleError::NoBounce("fewer than 3 samples"));
    }
    let s = smooth(y, SMOOTHING_WINDOW);
    let contact = detect_contact(y, &s).ok_or(OracleError::NoBounce("no ground contact"))?;
    let range = y[0] - y[contact];
    if !(range > 0.0) {
        return Err(OracleError::NoBounce("series does not descend"));
    }
    Ok(y.iter().map(|v| (v - y[contact]) / range).collect())
}

/// Normalized values from the drop through the end of the first rebound.
///
/// A rebound lasts at most twice the fall, so frames past `3·contact` only
/// show later, smaller bounces and rest. This is the GRU input.
pub fn rebound_window(y: &[f64]) -> Result<Vec<f64>, OracleError> {
    let mut values = normalized_values(y)?;
    let contact = values
        .iter()
        .position(|v| *v == 0.0)
        .ok_or(OracleError::NoBounce("no ground contact"))?;
    values.truncate((3 * contact + 1).max(3));
    Ok(values)
}

/// Detects drop, first contact and first bounce peak of a vertical image
/// trajectory (`y` grows upward) and normalizes it to `[0, 1]`.
///
/// A bounce must rise more than `3·noise_sigma` above the contact frame.
pub fn normalize_trajectory(
    times: &[f64],
    y: &[f64],
    noise_sigma: f64,
) -> Result<NormalizedTrajectory, OracleError> {
    if times.len() != y.len() {
        return Err(OracleError::LengthMismatch(times.len(), y.len()));
    }
    if y.len() < 3 {
        return Err(OracleError::NoBounce("fewer than 3 samples"));
    }
    let s = smooth(y, SMOOTHING_WINDOW);
    let contact = detect_contact(y, &s).ok_or(OracleError::NoBounce("no ground contact"))?;
    let range = y[0] - y[contact];
    if !(range > 0.0) {
        return Err(OracleError::NoBounce("series does not descend"));
    }
    let floor = (3.0 * noise_sigma).max(1e-9 * range);
    let peak = detect_peak(y, &s, contact, floor).ok_or(OracleError::NoBounce(
        "no ascent above the noise floor after contact",
    ))?;
    let values: Vec<f64> = y.iter().map(|v| (v - y[contact]) / range).collect();
    let heights = linearize_fall(times, y, contact);
    let bounce_ratio = refine_bounce_ratio(
        times,
        heights.as_deref().unwrap_or(y),
        contact,
        peak,
        noise_sigma,
    )
    .unwrap_or(values[peak]);
    Ok(NormalizedTrajectory {
        times: times.to_vec(),
        values,
        drop_idx: 0,
        contact_idx: contact,
        peak_idx: peak,
        bounce_ratio,
    })
}

/// Removes perspective along the line the ball moves on.
///
/// Image height is a Möbius function of world height along a vertical line,
/// and a drop from rest at the first frame puts world height linear in
/// `s = (t − t₀)²`. Fitting `y = (a + b·s)/(1 + g·s)` on the descent and
/// mapping every sample to `a + b·s(y)` gives pixel heights that are affine
/// in world height.
fn linearize_fall(times: &[f64], y: &[f64], contact: usize) -> Option<Vec<f64>> {
    let t0 = times[0];
    let s: Vec<f64> = times[..contact].iter().map(|t| (t - t0).powi(2)).collect();
    let [a, b, g] = fit_mobius(&s, &y[..contact])?;
    let mut out = Vec::with_capacity(y.len());
    for v in y {
        let den = b - g * v;
        if !(den * b > 0.0) {
            return None;
        }
        out.push(a + b * (v - a) / den);
    }
    Some(out)
}

/// Sub-frame bounce ratio from two ballistic fits.
///
/// The descent (frames before contact) gets a free quadratic. The first
/// rebound shares its curvature, since gravity and image scale are the same,
/// which leaves a line fit. That fit starts on the frames up to the peak and
/// is widened to every frame before the predicted landing. The two parabolas
/// meet at the contact instant; the rebound vertex is the apex, which cannot
/// be more than `|c|·dt²` above the highest rebound frame.
fn refine_bounce_ratio(
    times: &[f64],
    y: &[f64],
    contact: usize,
    peak: usize,
    noise_sigma: f64,
) -> Option<f64> {
    let descent = fit_quadratic(&times[..contact], &y[..contact])?;
    let curvature = descent[2];
    if !(curvature < 0.0) {
        return None;
    }
    let range = y[0] - y[contact];
    let tol = (3.0 * noise_sigma).max(1e-9 * range);
    let contact_on_descent = (y[contact] - eval_quadratic(&descent, times[contact])).abs() <= tol;
    let first = if contact_on_descent {
        contact + 1
    } else {
        contact
    };
    let dt = times[1] - times[0];
    let slack = if noise_sigma > 0.0 { dt } else { 1e-9 * dt };

    let fit = |last: usize| -> Option<(f64, f64, f64)> {
        let t_up = &times[first..=last];
        let z: Vec<f64> = t_up
            .iter()
            .zip(&y[first..=last])
            .map(|(t, v)| v - curvature * t * t)
            .collect();
        let (slope, intercept) = fit_line(t_up, &z)?;
        if (descent[1] - slope).abs() < f64::EPSILON {
            return None;
        }
        let t_contact = (intercept - descent[0]) / (descent[1] - slope);
        let landing = -slope / curvature - t_contact;
        Some((slope, intercept, landing))
    };
    let mut last = peak.max(first + 1);
    if last >= y.len() {
        return None;
    }
    let (mut slope, mut intercept, mut landing) = fit(last)?;
    for _ in 0..4 {
        let airborne = times.partition_point(|t| *t < landing - slack);
        let widened = airborne.saturating_sub(1).max(last).min(y.len() - 1);
        if widened == last {
            break;
        }
        last = widened;
        (slope, intercept, landing) = fit(last)?;
    }
    let t_contact = (intercept - descent[0]) / (descent[1] - slope);

    // The contact must fall between the last descent frame and the first
    // rebound frame, and the rebound must still be airborne at `last`.
    let before = times[first - 1];
    if t_contact < before - slack || t_contact > times[first] + slack {
        return None;
    }
    if landing < times[last] - slack {
        return None;
    }
    let ascent = [intercept, slope, curvature];
    let ground = eval_quadratic(&descent, t_contact);
    let t_apex = -slope / (2.0 * curvature);
    let highest = y[first..=last]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let reach = -curvature * dt * dt + 3.0 * noise_sigma;
    let apex = eval_quadratic(&ascent, t_apex).clamp(highest - 3.0 * noise_sigma, highest + reach);
    let drop = eval_quadratic(&descent, times[0]);
    let ratio = (apex - ground) / (drop - ground);
    (ratio.is_finite() && (0.0..=1.5).contains(&ratio)).then_some(ratio)
}

/// Bounce ratio of a clip that settles on the ground without a frame-level
/// peak, as when the only rebound frames fall after the apex.
///
/// The resting level is the ground. A quadratic through the upper part of the
/// descent gives gravity's curvature and the impact instant; the frames
/// between impact and rest are the rebound arc, which leaves only its launch
/// speed to fit.
pub fn settled_bounce_ratio(times: &[f64], y: &[f64], noise_sigma: f64) -> Option<f64> {
    let n = y.len();
    if times.len() != n || n < 8 {
        return None;
    }
    let range = y[0] - y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(range > 0.0) {
        return None;
    }
    let tol = (3.0 * noise_sigma).max(1e-9 * range);
    let rest_level = y[n - 1];
    let rest = n - y
        .iter()
        .rev()
        .take_while(|v| (*v - rest_level).abs() <= tol)
        .count();
    if rest + 3 > n {
        return None;
    }
    let upper = y
        .iter()
        .take_while(|v| **v > rest_level + 0.25 * range)
        .count();
    if upper < 4 || upper >= rest {
        return None;
    }
    let h = linearize_fall(times, y, upper).unwrap_or_else(|| y.to_vec());
    let ground = h[rest..].iter().sum::<f64>() / (n - rest) as f64;
    let [c0, c1, c] = fit_quadratic(&times[..upper], &h[..upper])?;
    if !(c < 0.0) {
        return None;
    }
    let disc = c1 * c1 - 4.0 * c * (c0 - ground);
    if !(disc >= 0.0) {
        return None;
    }
    let t_impact = (-c1 - disc.sqrt()) / (2.0 * c);
    let dt = times[1] - times[0];
    let slack = if noise_sigma > 0.0 { dt } else { 1e-9 * dt };
    let arc: Vec<(f64, f64)> = (upper..rest)
        .filter(|&j| times[j] > t_impact + slack)
        .map(|j| {
            (
                times[j] - t_impact,
                h[j] - ground - c * (times[j] - t_impact).powi(2),
            )
        })
        .collect();
    if arc.is_empty() {
        return None;
    }
    let speed = arc.iter().map(|(tau, z)| tau * z).sum::<f64>()
        / arc.iter().map(|(tau, _)| tau * tau).sum::<f64>();
    if !(speed > 0.0) {
        return None;
    }
    // The arc frames must be airborne and the first rest frame must not be.
    let landing = t_impact - speed / c;
    if arc.iter().any(|(tau, _)| t_impact + tau > landing + slack) || times[rest] < landing - slack
    {
        return None;
    }
    let drop = eval_quadratic(&[c0, c1, c], times[0]);
    let ratio = -speed * speed / (4.0 * c) / (drop - ground);
    (ratio.is_finite() && (0.0..=1.5).contains(&ratio)).then_some(ratio)
}

/// `e = sqrt(h_bounce / h_drop)` with the sub-frame bounce ratio.
pub fn estimate_elasticity_ratio(traj: &NormalizedTrajectory) -> Result<Estimate, OracleError> {
    Estimate::new(
        traj.bounce_ratio.max(0.0).sqrt(),
        PropertyKind::Elasticity,
        EstimatorId::RatioOracle,
    )
}

/// `e = sqrt(value at the peak frame)`, the plain frame-level heuristic.
pub fn estimate_elasticity_peak(traj: &NormalizedTrajectory) -> Result<Estimate, OracleError> {
    Estimate::new(
        traj.values[traj.peak_idx].max(0.0).sqrt(),
        PropertyKind::Elasticity,
        EstimatorId::PeakFrame,
    )
}

/// Regresses elasticity from a normalized value sequence with a trained GRU.
pub fn estimate_elasticity_gru(values: &[f64], model: &GruModel) -> Result<Estimate, OracleError> {
    let value = model.predict(values)?;
    Estimate::new(value, PropertyKind::Elasticity, EstimatorId::Gru)
}

/// Viscosity as the inverse slope of the normalized footprint area.
///
/// The first frame is taken as the pre-contact footprint. Contact is the first
/// frame exceeding it by [`CONTACT_AREA_THRESHOLD`]; areas are normalized by
/// the pre-contact footprint (the footprint at the instant of contact) and the
/// slope is an OLS fit over the contact frame and everything after it.
pub fn estimate_viscosity(areas: &[f64], times: &[f64]) -> Result<Estimate, OracleError> {
    if areas.len() != times.len() {
        return Err(OracleError::LengthMismatch(areas.len(), times.len()));
    }
    let base = *areas.first().ok_or(OracleError::InsufficientSamples {
        needed: MIN_SPREAD_SAMPLES,
        got: 0,
    })?;
    if !(base > 0.0) {
        return Err(OracleError::NonPositiveSlope(0.0));
    }
    let Some(contact) = areas
        .iter()
        .position(|a| *a > (1.0 + CONTACT_AREA_THRESHOLD) * base)
    else {
        return Err(OracleError::NonPositiveSlope(0.0));
    };
    let post = areas.len() - contact;
    if post < MIN_SPREAD_SAMPLES {
        return Err(OracleError::InsufficientSamples {
            needed: MIN_SPREAD_SAMPLES,
            got: post,
        });
    }
    let normalized: Vec<f64> = areas[contact..].iter().map(|a| a / base).collect();
    let (slope, _) =
        fit_line(&times[contact..], &normalized).ok_or(OracleError::NonPositiveSlope(0.0))?;
    if !(slope > 0.0) {
        return Err(OracleError::NonPositiveSlope(slope));
    }
    Estimate::new(
        1.0 / slope,
        PropertyKind::Viscosity,
        EstimatorId::SlopeOracle,
    )
}

/// Moving coordinate, first stop frame, and fit over the moving phase.
struct SlideFit {
    alpha: f64,
    beta: f64,
}

/// Picks the axis with the larger travel, trims frames at and after the stop,
/// and fits `x = αt² + βt + c`.
fn fit_slide(
    points: &[Pixel],
    times: &[f64],
    stop_threshold: f64,
) -> Result<SlideFit, OracleError> {
    let extent = |k: usize| {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[k]), hi.max(p[k]))
            });
        hi - lo
    };
    let axis = if extent(0) >= extent(1) { 0 } else { 1 };
    let x: Vec<f64> = points.iter().map(|p| p[axis]).collect();
    // The sample just before the first sub-threshold step may already be at
    // rest, so it is dropped too.
    let end = (1..x.len())
        .find(|&i| (x[i] - x[i - 1]).abs() < stop_threshold)
        .map_or(x.len(), |i| i.saturating_sub(1));
    if end < MIN_SLIDE_SAMPLES {
        return Err(OracleError::InsufficientSamples {
            needed: MIN_SLIDE_SAMPLES,
            got: end,
        });
    }
    let t0 = times[0];
    let t: Vec<f64> = times[..end].iter().map(|ti| ti - t0).collect();
    let c = fit_quadratic(&t, &x[..end]).ok_or(OracleError::InsufficientSamples {
        needed: MIN_SLIDE_SAMPLES,
        got: end,
    })?;
    let (alpha, beta) = (c[2], c[1]);
    let tol = 1e-12 * (beta.abs() + 1.0);
    if alpha.abs() <= tol || alpha.signum() == beta.signum() {
        return Err(OracleError::WrongCurvature { alpha, beta });
    }
    Ok(SlideFit { alpha, beta })
}

/// Axis-aligned metric square matching the corner order of the top face.
fn metric_square(size: f64) -> [Pixel; 4] {
    [[0.0, 0.0], [size, 0.0], [size, size], [0.0, size]]
}

/// Dynamic friction from the top-face corners of a sliding cube.
///
/// A homography from the first-frame corners to a metric square rectifies
/// every frame; the rectified corner mean is the trajectory. `μ_k = 2|α|/g`.
pub fn estimate_friction(
    corners: &[[Pixel; 4]],
    times: &[f64],
    cube_size: f64,
    gravity: f64,
) -> Result<Estimate, OracleError> {
    if corners.len() != times.len() {
        return Err(OracleError::LengthMismatch(corners.len(), times.len()));
    }
    let first = corners.first().ok_or(OracleError::InsufficientSamples {
        needed: MIN_SLIDE_SAMPLES,
        got: 0,
    })?;
    let h = estimate_homography(first, &metric_square(cube_size)).map_err(|e| match e {
        CameraError::DegenerateConfiguration | CameraError::Singular => {
            OracleError::DegenerateCorners
        }
        other => other.into(),
    })?;
    let centers = corners
        .iter()
        .map(|quad| {
            let mut c = [0.0; 2];
            for p in quad {
                let r = apply_homography(&h, *p)?;
                c[0] += 0.25 * r[0];
                c[1] += 0.25 * r[1];
            }
            Ok(c)
        })
        .collect::<Result<Vec<Pixel>, CameraError>>()?;
    let fit = fit_slide(&centers, times, STOP_DISPLACEMENT_FRACTION * cube_size)?;
    debug_assert!(fit.alpha * fit.beta < 0.0);
    Estimate::new(
        2.0 * fit.alpha.abs() / gravity,
        PropertyKind::Friction,
        EstimatorId::ParabolaOracle,
    )
}

/// Image-space parabola with a first-frame pixel scale; ignores perspective.
pub fn estimate_friction_naive(
    corners: &[[Pixel; 4]],
    times: &[f64],
    cube_size: f64,
    gravity: f64,
) -> Result<Estimate, OracleError> {
    if corners.len() != times.len() {
        return Err(OracleError::LengthMismatch(corners.len(), times.len()));
    }
    let first = corners.first().ok_or(OracleError::InsufficientSamples {
        needed: MIN_SLIDE_SAMPLES,
        got: 0,
    })?;
    let edge_px = (0..4)
        .map(|k| {
            let (a, b) = (first[k], first[(k + 1) % 4]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .sum::<f64>()
        / 4.0;
    if !(edge_px > 0.0) {
        return Err(OracleError::DegenerateCorners);
    }
    let meters_per_px = cube_size / edge_px;
    let centers: Vec<Pixel> = corners
        .iter()
        .map(|q| {
            let sx = q.iter().map(|p| p[0]).sum::<f64>() / 4.0;
            let sy = q.iter().map(|p| p[1]).sum::<f64>() / 4.0;
            [sx, sy]
        })
        .collect();
    let fit = fit_slide(&centers, times, STOP_DISPLACEMENT_FRACTION * edge_px)?;
    Estimate::new(
        2.0 * fit.alpha.abs() * meters_per_px / gravity,
        PropertyKind::Friction,
        EstimatorId::NaiveParabola,
    )
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `σ(log(e1 / e2))`: above 0.5 exactly when `e1 > e2`.
pub fn relative_score(first: &Estimate, second: &Estimate) -> Result<f64, OracleError> {
    for v in [first.value, second.value] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(OracleError::NonPositiveEstimate(v));
        }
    }
    Ok(sigmoid(first.value.ln() - second.value.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(v: f64) -> Estimate {
        Estimate::new(v, PropertyKind::Viscosity, EstimatorId::SlopeOracle).unwrap()
    }

    #[test]
    fn relative_score_values() {
        assert_eq!(relative_score(&est(1.3), &est(1.3)).unwrap(), 0.5);
        let s = relative_score(&est(2.0), &est(1.0)).unwrap();
        // σ(ln 2) = 2 / 3
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
        let swapped = relative_score(&est(1.0), &est(2.0)).unwrap();
        assert!((s + swapped - 1.0).abs() < 1e-12);
        let zero = Estimate {
            value: 0.0,
            property: PropertyKind::Elasticity,
            estimator: EstimatorId::RatioOracle,
        };
        assert!(matches!(
            relative_score(&zero, &est(1.0)),
            Err(OracleError::NonPositiveEstimate(_))
        ));
    }

    #[test]
    fn estimate_rejects_non_positive_viscosity() {
        assert!(Estimate::new(0.0, PropertyKind::Viscosity, EstimatorId::SlopeOracle).is_err());
        assert!(Estimate::new(f64::NAN, PropertyKind::Elasticity, EstimatorId::Gru).is_err());
        assert!(Estimate::new(0.0, PropertyKind::Elasticity, EstimatorId::Gru).is_ok());
    }

    #[test]
    fn peak_values_map_to_restitution() {
        let traj = NormalizedTrajectory {
            times: vec![0.0, 1.0, 2.0, 3.0],
            values: vec![1.0, 0.0, 0.25, 0.0],
            drop_idx: 0,
            contact_idx: 1,
            peak_idx: 2,
            bounce_ratio: 0.25,
        };
        assert_eq!(estimate_elasticity_ratio(&traj).unwrap().value, 0.5);
        assert_eq!(estimate_elasticity_peak(&traj).unwrap().value, 0.5);
        let traj = NormalizedTrajectory {
            values: vec![1.0, 0.0, 0.81, 0.0],
            bounce_ratio: 0.81,
            ..traj
        };
        assert!((estimate_elasticity_ratio(&traj).unwrap().value - 0.9).abs() < 1e-15);
    }

    #[test]
    fn decreasing_series_has_no_bounce() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 / 60.0).collect();
        let y: Vec<f64> = t.iter().map(|t| 100.0 - 50.0 * t * t).collect();
        assert!(matches!(
            normalize_trajectory(&t, &y, 0.0),
            Err(OracleError::NoBounce(_))
        ));
    }

    #[test]
    fn settled_bounce_recovered_from_one_post_apex_frame() {
        let g = 9.81;
        let e: f64 = 1.0 / 30.0;
        let t_fall = 28.0 / 60.0 - 0.016;
        let h0 = 0.5 * g * t_fall * t_fall;
        let v = e * g * t_fall;
        let t: Vec<f64> = (0..60).map(|i| f64::from(i) / 60.0).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&t| {
                let tau = t - t_fall;
                if tau < 0.0 {
                    h0 - 0.5 * g * t * t
                } else {
                    (v * tau - 0.5 * g * tau * tau).max(0.0)
                }
            })
            .collect();
        assert!(y[28] > 0.0 && y[28] < y[27]);
        assert!(matches!(
            normalize_trajectory(&t, &y, 0.0),
            Err(OracleError::NoBounce(_))
        ));
        let ratio = settled_bounce_ratio(&t, &y, 0.0).unwrap();
        assert!((ratio - e * e).abs() < 1e-9 * e * e, "{ratio}");
    }

    #[test]
    fn hand_made_v_normalizes() {
        let t: Vec<f64> = (0..9).map(f64::from).collect();
        let y = [10.0, 8.0, 4.0, 0.0, 2.0, 3.0, 2.0, 0.0, 0.0];
        let traj = normalize_trajectory(&t, &y, 0.0).unwrap();
        assert_eq!(traj.contact_idx, 3);
        assert_eq!(traj.peak_idx, 5);
        assert_eq!(traj.values[0], 1.0);
        assert_eq!(traj.values[3], 0.0);
        assert!((traj.values[5] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rebound_window_stops_after_three_fall_lengths() {
        let mut y = vec![10.0, 8.0, 4.0, 0.0, 2.0, 3.0, 2.0, 0.0, 0.0, 0.5, 0.0];
        y.extend([0.0; 20]);
        let w = rebound_window(&y).unwrap();
        assert_eq!(w.len(), 10);
        assert_eq!(w[3], 0.0);
        assert!((w[5] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn smoothing_keeps_length_and_mean() {
        let s = smooth(&[0.0, 3.0, 6.0, 3.0], 3);
        assert_eq!(s, vec![1.5, 3.0, 4.0, 4.5]);
    }

    #[test]
    fn viscosity_from_linear_area() {
        let t: Vec<f64> = (0..60).map(|i| i as f64 / 60.0).collect();
        let a: Vec<f64> = t.iter().map(|t| 1.0 + 2.0 * t).collect();
        let e = estimate_viscosity(&a, &t).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn viscosity_errors() {
        let t: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(
            estimate_viscosity(&[3.0; 20], &t).unwrap_err(),
            OracleError::NonPositiveSlope(0.0)
        );
        let mut late = vec![1.0; 20];
        for (i, a) in late.iter_mut().enumerate().skip(17) {
            *a = 1.0 + i as f64;
        }
        assert!(matches!(
            estimate_viscosity(&late, &t),
            Err(OracleError::InsufficientSamples { got: 3, .. })
        ));
    }

    #[test]
    fn rectified_track_gives_acceleration_over_g() {
        // Already-metric corners: rectification is a pure translation.
        let t: Vec<f64> = (0..40).map(|i| i as f64 / 60.0).collect();
        let corners: Vec<[Pixel; 4]> = t
            .iter()
            .map(|t| {
                let x = 0.9 * t - 0.5 * 0.981 * t * t;
                [[x, 0.0], [x + 0.1, 0.0], [x + 0.1, 0.1], [x, 0.1]]
            })
            .collect();
        let e = estimate_friction(&corners, &t, 0.1, 9.81).unwrap();
        assert!((e.value - 0.1).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn friction_wrong_curvature() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 / 60.0).collect();
        let corners: Vec<[Pixel; 4]> = t
            .iter()
            .map(|t| {
                let x = 0.9 * t + 0.5 * t * t;
                [[x, 0.0], [x + 0.1, 0.0], [x + 0.1, 0.1], [x, 0.1]]
            })
            .collect();
        assert!(matches!(
            estimate_friction(&corners, &t, 0.1, 9.81),
            Err(OracleError::WrongCurvature { .. })
        ));
    }

    #[test]
    fn friction_degenerate_corners() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let quad = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 1.0]];
        assert_eq!(
            estimate_friction(&[quad; 6], &t, 0.1, 9.81).unwrap_err(),
            OracleError::DegenerateCorners
        );
    }
}
