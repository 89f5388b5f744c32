//! Hemisphere camera rig: Fibonacci viewpoints, look-at poses and a pinhole model.

use crate::error::{Error, Result};
use crate::geom;
use crate::plating::PlateSpec;
use crate::scalar::Real;
use crate::Vec3;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigConfig {
    pub n_views: usize,
    pub hemisphere_radius_m: f64,
    pub min_elevation_rad: f64,
    pub focal_range_mm: [f64; 2],
    pub sensor_width_mm: f64,
    pub image_width_px: u32,
    pub image_height_px: u32,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            n_views: 12,
            hemisphere_radius_m: 0.45,
            min_elevation_rad: 15f64.to_radians(),
            focal_range_mm: [24.0, 50.0],
            sensor_width_mm: 36.0,
            image_width_px: 512,
            image_height_px: 512,
        }
    }
}

impl RigConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_views == 0 {
            return Err(Error::validation("rig.n_views", "must be at least 1"));
        }
        if !(self.hemisphere_radius_m.is_finite() && self.hemisphere_radius_m > 0.0) {
            return Err(Error::validation("rig.hemisphere_radius_m", "must be positive"));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.min_elevation_rad) {
            return Err(Error::validation(
                "rig.min_elevation_rad",
                format!("must lie in [0, pi/2), got {}", self.min_elevation_rad),
            ));
        }
        let [lo, hi] = self.focal_range_mm;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::validation("rig.focal_range_mm", "need 0 < f_min <= f_max"));
        }
        if !(self.sensor_width_mm.is_finite() && self.sensor_width_mm > 0.0) {
            return Err(Error::validation("rig.sensor_width_mm", "must be positive"));
        }
        if self.image_width_px == 0 || self.image_height_px == 0 {
            return Err(Error::validation("rig.image_size", "width and height must be non-zero"));
        }
        Ok(())
    }
}

/// Points on the upper hemisphere around `center`, evenly spread in `sin(elevation)` above
/// `min_elev` and in golden-angle steps of azimuth.
pub fn fibonacci_hemisphere<T: Real>(n: usize, radius: T, min_elev: T, center: geom::Vec3<T>) -> Vec<geom::Vec3<T>> {
    let min_sin = min_elev.sin();
    let golden_conj = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let nf = T::from_usize(n).unwrap_or_else(T::one);
    (0..n)
        .map(|i| {
            let fi = T::from_usize(i).unwrap_or_else(T::zero);
            let s = min_sin + (T::one() - min_sin) * (fi + T::lit(0.5)) / nf;
            let phi = s.asin();
            let theta = T::TAU() * fi * golden_conj;
            let (cp, sp) = (phi.cos(), phi.sin());
            center + geom::Vec3::new(cp * theta.cos(), cp * theta.sin(), sp) * radius
        })
        .collect()
}

/// Smallest angle subtended at `center` by any two of `points`; `None` for fewer than two.
pub fn min_angular_separation<T: Real>(points: &[geom::Vec3<T>], center: geom::Vec3<T>) -> Option<T> {
    let mut best: Option<T> = None;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let (u, v) = (a - center, b - center);
            // atan2 keeps precision for nearly parallel directions, unlike acos
            let angle = u.cross(v).norm().atan2(u.dot(v));
            best = Some(best.map_or(angle, |m| if angle < m { angle } else { m }));
        }
    }
    best
}

/// Pinhole intrinsics: square pixels, principal point at the image centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pinhole<T> {
    /// Focal length in pixels.
    pub focal_px: T,
    pub width: u32,
    pub height: u32,
}

impl<T: Real> Pinhole<T> {
    pub fn new(focal_mm: T, sensor_width_mm: T, width: u32, height: u32) -> Self {
        let w = T::from_u32(width).unwrap_or_else(T::one);
        Self {
            focal_px: focal_mm / sensor_width_mm * w,
            width,
            height,
        }
    }

    pub fn principal_point(&self) -> (T, T) {
        let half = T::lit(0.5);
        (
            T::from_u32(self.width).unwrap_or_else(T::zero) * half,
            T::from_u32(self.height).unwrap_or_else(T::zero) * half,
        )
    }

    /// Camera-frame offsets `(x, y)` of the ray through pixel centre `(px, py)` at unit depth;
    /// `x` grows to the right and `y` downwards.
    pub fn pixel_offsets(&self, px: u32, py: u32) -> (T, T) {
        let (cx, cy) = self.principal_point();
        let half = T::lit(0.5);
        let u = T::from_u32(px).unwrap_or_else(T::zero) + half;
        let v = T::from_u32(py).unwrap_or_else(T::zero) + half;
        ((u - cx) / self.focal_px, (v - cy) / self.focal_px)
    }

    /// Image coordinates of a camera-frame point at depth `z > 0`.
    pub fn project(&self, x: T, y: T, z: T) -> (T, T) {
        let (cx, cy) = self.principal_point();
        (cx + self.focal_px * x / z, cy + self.focal_px * y / z)
    }

    /// Row-major 3×3 intrinsic matrix.
    pub fn matrix(&self) -> [[T; 3]; 3] {
        let (cx, cy) = self.principal_point();
        let (o, z) = (T::one(), T::zero());
        [[self.focal_px, z, cx], [z, self.focal_px, cy], [z, z, o]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub focal_length_mm: f64,
    pub sensor_width_mm: f64,
    pub image_width_px: u32,
    pub image_height_px: u32,
}

impl CameraPose {
    pub fn forward(&self) -> Vec3 {
        (self.look_at - self.position).normalize()
    }

    /// Image-right axis in world space.
    pub fn right(&self) -> Vec3 {
        self.forward().cross(self.up).normalize()
    }

    /// Horizontal field of view in radians.
    pub fn fov_x(&self) -> f64 {
        2.0 * (self.sensor_width_mm / (2.0 * self.focal_length_mm)).atan()
    }

    pub fn pinhole(&self) -> Pinhole<f64> {
        Pinhole::new(
            self.focal_length_mm,
            self.sensor_width_mm,
            self.image_width_px,
            self.image_height_px,
        )
    }

    /// World-space direction through pixel `(px, py)`, scaled so its forward component is 1.
    pub fn pixel_direction(&self, px: u32, py: u32) -> Vec3 {
        let (x, y) = self.pinhole().pixel_offsets(px, py);
        self.forward() + self.right() * x - self.up * y
    }

    /// Camera-frame coordinates `(right, down, forward)` of a world point.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = p - self.position;
        Vec3::new(d.dot(self.right()), -d.dot(self.up), d.dot(self.forward()))
    }

    /// Pixel coordinates of a world point, or `None` behind the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let c = self.to_camera(p);
        (c.z > 0.0).then(|| self.pinhole().project(c.x, c.y, c.z))
    }

    /// Row-major 3×4 world-to-camera extrinsics `[R | t]`, camera axes right/down/forward.
    pub fn extrinsics(&self) -> [[f64; 4]; 3] {
        let axes = [self.right(), -self.up, self.forward()];
        axes.map(|a| [a.x, a.y, a.z, -a.dot(self.position)])
    }
}

/// World up projected perpendicular to `forward`, falling back to +y for a camera at zenith.
fn view_up(forward: Vec3) -> Vec3 {
    let up = Vec3::unit_z() - forward * forward.z;
    if up.norm() > 1e-9 {
        up.normalize()
    } else {
        (Vec3::unit_y() - forward * forward.y).normalize()
    }
}

/// One camera per hemisphere point, all aimed at the plate surface centre, with focal lengths
/// drawn independently from the configured range.
pub fn build_rig<R: Rng + ?Sized>(plate: &PlateSpec, config: &RigConfig, rng: &mut R) -> Result<Vec<CameraPose>> {
    config.validate()?;
    let look_at = plate.surface_center();
    let [f_lo, f_hi] = config.focal_range_mm;
    fibonacci_hemisphere(
        config.n_views,
        config.hemisphere_radius_m,
        config.min_elevation_rad,
        look_at,
    )
    .into_iter()
    .map(|position| {
        let focal_length_mm = if f_hi > f_lo { rng.gen_range(f_lo..=f_hi) } else { f_lo };
        Ok(CameraPose {
            position,
            look_at,
            up: view_up((look_at - position).normalize()),
            focal_length_mm,
            sensor_width_mm: config.sensor_width_mm,
            image_width_px: config.image_width_px,
            image_height_px: config.image_height_px,
        })
    })
    .collect()
}

/// `k` distinct view indices out of `n_total`, sorted ascending.
pub fn select_views<R: Rng + ?Sized>(n_total: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > n_total {
        return Err(Error::Range(format!("cannot select {k} views out of {n_total}")));
    }
    let mut picked = index::sample(rng, n_total, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}
