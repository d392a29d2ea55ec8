//! Pinhole projection with look-at orientation, and planar homographies.

use nalgebra::{Matrix2x3, Matrix3, SMatrix, Vector3};
use thiserror::Error;

use crate::scene::CameraPose;

/// Image width and height in pixels.
pub const IMAGE_SIZE: f64 = 512.0;
/// Focal length in pixels (about 53° horizontal field of view).
pub const FOCAL_PX: f64 = 512.0;

pub type Pixel = [f64; 2];

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("point is not in front of the camera (depth {0})")]
    BehindCamera(f64),
    #[error("camera looks at its own position")]
    DegenerateLookAt,
    #[error("viewing direction is parallel to the up vector")]
    VerticalViewDirection,
    #[error("focal length must be positive")]
    InvalidFocal,
    #[error("three of the four points are collinear")]
    DegenerateConfiguration,
    #[error("homography maps the point to infinity")]
    PointAtInfinity,
    #[error("homography is singular")]
    Singular,
}

/// A pinhole camera looking from `pose.position()` toward `pose.look_at`,
/// with world `+z` as up.
///
/// Pixel coordinates follow the row convention: `x` grows right, `y` grows
/// downward, and the optical axis hits `(cx, cy)`.
#[derive(Debug, Clone)]
pub struct PinholeCamera {
    pose: CameraPose,
    focal: f64,
    principal: Pixel,
    size: [f64; 2],
    position: Vector3<f64>,
    right: Vector3<f64>,
    down: Vector3<f64>,
    forward: Vector3<f64>,
}

impl PinholeCamera {
    pub fn new(
        pose: CameraPose,
        focal: f64,
        principal: Pixel,
        size: [f64; 2],
    ) -> Result<Self, CameraError> {
        if !(focal > 0.0) {
            return Err(CameraError::InvalidFocal);
        }
        let position = Vector3::from(pose.position());
        let target = Vector3::from(pose.look_at);
        let forward = target - position;
        let dist = forward.norm();
        if dist < 1e-12 {
            return Err(CameraError::DegenerateLookAt);
        }
        let forward = forward / dist;
        let up = Vector3::z();
        let right = forward.cross(&up);
        if right.norm() < 1e-9 {
            return Err(CameraError::VerticalViewDirection);
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        Ok(Self {
            pose,
            focal,
            principal,
            size,
            position,
            right,
            down,
            forward,
        })
    }

    /// The fixed 512×512 camera used for every generated scene.
    pub fn standard(pose: CameraPose) -> Result<Self, CameraError> {
        Self::new(
            pose,
            FOCAL_PX,
            [IMAGE_SIZE / 2.0, IMAGE_SIZE / 2.0],
            [IMAGE_SIZE, IMAGE_SIZE],
        )
    }

    pub fn pose(&self) -> &CameraPose {
        &self.pose
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn principal_point(&self) -> Pixel {
        self.principal
    }

    pub fn image_size(&self) -> [f64; 2] {
        self.size
    }

    /// Camera-frame coordinates `(right, down, depth)` of a world point.
    pub fn to_camera_frame(&self, point: [f64; 3]) -> Vector3<f64> {
        let d = Vector3::from(point) - self.position;
        Vector3::new(d.dot(&self.right), d.dot(&self.down), d.dot(&self.forward))
    }

    pub fn project(&self, point: [f64; 3]) -> Result<Pixel, CameraError> {
        let c = self.to_camera_frame(point);
        if !(c.z > 0.0) {
            return Err(CameraError::BehindCamera(c.z));
        }
        Ok([
            self.principal[0] + self.focal * c.x / c.z,
            self.principal[1] + self.focal * c.y / c.z,
        ])
    }

    /// Jacobian of the projection w.r.t. the world point, a 2×3 matrix.
    pub fn projection_jacobian(&self, point: [f64; 3]) -> Result<Matrix2x3<f64>, CameraError> {
        let c = self.to_camera_frame(point);
        if !(c.z > 0.0) {
            return Err(CameraError::BehindCamera(c.z));
        }
        let inv = self.focal / c.z;
        let row_x = (self.right - self.forward * (c.x / c.z)) * inv;
        let row_y = (self.down - self.forward * (c.y / c.z)) * inv;
        Ok(Matrix2x3::from_rows(&[
            row_x.transpose(),
            row_y.transpose(),
        ]))
    }

    /// Area scale (px² per m²) of the local affine approximation of the
    /// ground plane `z = point.z` around `point`.
    pub fn ground_area_scale(&self, point: [f64; 3]) -> Result<f64, CameraError> {
        let j = self.projection_jacobian(point)?;
        Ok((j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)]).abs())
    }
}

/// A planar projective map, stored normalized so `h[2][2] = 1` when possible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    matrix: Matrix3<f64>,
}

impl Homography {
    pub fn from_matrix(matrix: Matrix3<f64>) -> Result<Self, CameraError> {
        let scale = matrix.abs().max();
        if !(scale > 0.0) || !matrix.iter().all(|v| v.is_finite()) {
            return Err(CameraError::Singular);
        }
        let m = matrix / scale;
        if m.determinant().abs() < 1e-14 {
            return Err(CameraError::Singular);
        }
        let m = if m[(2, 2)].abs() > 1e-12 {
            m / m[(2, 2)]
        } else {
            m / m.norm()
        };
        Ok(Self { matrix: m })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Result<Self, CameraError> {
        let inv = self.matrix.try_inverse().ok_or(CameraError::Singular)?;
        Self::from_matrix(inv)
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &Homography) -> Result<Self, CameraError> {
        Self::from_matrix(self.matrix * first.matrix)
    }

    pub fn apply(&self, p: Pixel) -> Result<Pixel, CameraError> {
        apply_homography(self, p)
    }
}

pub fn apply_homography(h: &Homography, p: Pixel) -> Result<Pixel, CameraError> {
    let v = h.matrix * Vector3::new(p[0], p[1], 1.0);
    let scale = h.matrix.row(2).abs().sum() * (1.0 + p[0].abs() + p[1].abs());
    if v.z.abs() <= 1e-14 * scale {
        return Err(CameraError::PointAtInfinity);
    }
    Ok([v.x / v.z, v.y / v.z])
}

/// Translate to the centroid and scale to mean distance √2.
fn normalizing_transform(pts: &[Pixel; 4]) -> Matrix3<f64> {
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let mean = pts
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / 4.0;
    let s = if mean > 0.0 {
        std::f64::consts::SQRT_2 / mean
    } else {
        1.0
    };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn transform(t: &Matrix3<f64>, p: Pixel) -> Pixel {
    [t[(0, 0)] * p[0] + t[(0, 2)], t[(1, 1)] * p[1] + t[(1, 2)]]
}

/// True when some triple of the (already normalized) points is collinear.
fn has_collinear_triple(pts: &[Pixel; 4]) -> bool {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    TRIPLES.iter().any(|&[a, b, c]| {
        let (p, q, r) = (pts[a], pts[b], pts[c]);
        let cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        cross.abs() < 1e-9
    })
}

/// Direct linear transform from four correspondences with Hartley
/// normalization: returns `H` with `H·src_i ∝ dst_i`.
pub fn estimate_homography(src: &[Pixel; 4], dst: &[Pixel; 4]) -> Result<Homography, CameraError> {
    if src
        .iter()
        .chain(dst)
        .any(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(CameraError::DegenerateConfiguration);
    }
    let ts = normalizing_transform(src);
    let td = normalizing_transform(dst);
    let ns: [Pixel; 4] = std::array::from_fn(|i| transform(&ts, src[i]));
    let nd: [Pixel; 4] = std::array::from_fn(|i| transform(&td, dst[i]));
    if has_collinear_triple(&ns) || has_collinear_triple(&nd) {
        return Err(CameraError::DegenerateConfiguration);
    }

    // 8 equations, padded with a zero row so the SVD yields the full V.
    let mut a = SMatrix::<f64, 9, 9>::zeros();
    for (k, (s, d)) in ns.iter().zip(&nd).enumerate() {
        let (x, y) = (s[0], s[1]);
        let (u, v) = (d[0], d[1]);
        let r0 = 2 * k;
        let r1 = r0 + 1;
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(CameraError::Singular)?;
    let (min_idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nine singular values");
    let h = v_t.row(min_idx);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td.try_inverse().ok_or(CameraError::Singular)?;
    Homography::from_matrix(td_inv * hn * ts)
}
