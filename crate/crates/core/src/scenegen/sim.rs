//! Analytic ray casting of scenes into LiDAR returns.

use super::rng::SplitMix64;
use super::{Scene, SceneObject, INTENSITY_GROUND, INTENSITY_PEDESTRIAN, INTENSITY_VEHICLE};
use crate::range_image::RangeImageSet;
use crate::types::{Point3, SensorModel};
use crate::PointCloud;

struct Ray {
    origin: Point3,
    dir: [f64; 3],
}

fn hit_ground(ray: &Ray, z: f64, half_extent: f64) -> Option<f64> {
    if ray.dir[2] == 0.0 {
        return None;
    }
    let t = (z - ray.origin.z) / ray.dir[2];
    if t <= 0.0 {
        return None;
    }
    let x = ray.origin.x + t * ray.dir[0];
    let y = ray.origin.y + t * ray.dir[1];
    if x.abs() <= half_extent && y.abs() <= half_extent {
        Some(t)
    } else {
        None
    }
}

/// Slab test against a yaw-rotated box; returns the entry distance only
/// (rays starting inside an object see no surface).
fn hit_box(ray: &Ray, center: &Point3, l: f64, w: f64, h: f64, yaw: f64) -> Option<f64> {
    let (sin_y, cos_y) = yaw.sin_cos();
    // ray in the box frame
    let ox = ray.origin.x - center.x;
    let oy = ray.origin.y - center.y;
    let oz = ray.origin.z - center.z;
    let o = [
        cos_y * ox + sin_y * oy,
        -sin_y * ox + cos_y * oy,
        oz,
    ];
    let d = [
        cos_y * ray.dir[0] + sin_y * ray.dir[1],
        -sin_y * ray.dir[0] + cos_y * ray.dir[1],
        ray.dir[2],
    ];
    let half = [l / 2.0, w / 2.0, h / 2.0];
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a].abs() > half[a] {
                return None;
            }
            continue;
        }
        let t1 = (-half[a] - o[a]) / d[a];
        let t2 = (half[a] - o[a]) / d[a];
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        t_enter = t_enter.max(lo);
        t_exit = t_exit.min(hi);
        if t_enter > t_exit {
            return None;
        }
    }
    if t_enter > 0.0 {
        Some(t_enter)
    } else {
        None
    }
}

/// Capped vertical cylinder: nearest of the side surface and the two discs.
fn hit_cylinder(ray: &Ray, center: &Point3, radius: f64, height: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t > 0.0 && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    let (zmin, zmax) = (center.z - height / 2.0, center.z + height / 2.0);
    let ox = ray.origin.x - center.x;
    let oy = ray.origin.y - center.y;
    let a = ray.dir[0] * ray.dir[0] + ray.dir[1] * ray.dir[1];
    if a > 0.0 {
        let b = 2.0 * (ox * ray.dir[0] + oy * ray.dir[1]);
        let c = ox * ox + oy * oy - radius * radius;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                let z = ray.origin.z + t * ray.dir[2];
                if z >= zmin && z <= zmax {
                    consider(t);
                }
            }
        }
    }
    if ray.dir[2] != 0.0 {
        for zc in [zmin, zmax] {
            let t = (zc - ray.origin.z) / ray.dir[2];
            let x = ray.origin.x + t * ray.dir[0] - center.x;
            let y = ray.origin.y + t * ray.dir[1] - center.y;
            if x * x + y * y <= radius * radius {
                consider(t);
            }
        }
    }
    best
}

/// Nearest hit over the whole scene with its material intensity.
fn cast(scene: &Scene, ray: &Ray) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |t: Option<f64>, intensity: f64| {
        if let Some(t) = t {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, intensity));
            }
        }
    };
    if let Some(g) = &scene.ground {
        consider(hit_ground(ray, g.z, g.half_extent_m), INTENSITY_GROUND);
    }
    for obj in &scene.objects {
        match obj {
            SceneObject::BoxVehicle {
                center,
                length,
                width,
                height,
                yaw_rad,
            } => consider(
                hit_box(ray, center, *length, *width, *height, *yaw_rad),
                INTENSITY_VEHICLE,
            ),
            SceneObject::CylinderPedestrian {
                center,
                radius,
                height,
            } => consider(hit_cylinder(ray, center, *radius, *height), INTENSITY_PEDESTRIAN),
        }
    }
    best
}

/// Trace one full revolution of `sensor` through `scene`.
///
/// Columns sweep the revolution and beams sweep each column, so the returned
/// cloud is ordered column-major. Gaussian range noise (`noise_sigma_m`,
/// stream seeded by `noise_seed`) is applied along the ray; noisy returns
/// falling outside [range_min, range_max] are dropped. The returned image set
/// is exactly consistent with the cloud: the cloud is built from the same
/// quantities stored in the images, via the same `SensorModel` math.
pub fn simulate_lidar(
    scene: &Scene,
    sensor: &SensorModel,
    noise_sigma_m: f64,
    noise_seed: u64,
) -> (PointCloud, RangeImageSet) {
    let mut images = RangeImageSet::new_empty(sensor);
    let mut points = Vec::new();
    let mut intensity = Vec::new();
    let mut rng = SplitMix64::new(noise_seed);
    for col in 0..sensor.n_cols {
        for row in 0..sensor.n_beams {
            let az = sensor.pixel_azimuth_rad(row, col, 0.0);
            let ray = Ray {
                origin: sensor.origin,
                dir: sensor.beam_direction(row, az),
            };
            let Some((t, mat)) = cast(scene, &ray) else {
                continue;
            };
            if t < sensor.range_min_m || t > sensor.range_max_m {
                continue;
            }
            let r = if noise_sigma_m > 0.0 {
                t + noise_sigma_m * rng.next_gaussian()
            } else {
                t
            };
            if r < sensor.range_min_m || r > sensor.range_max_m {
                continue;
            }
            let idx = images.idx(row, col);
            images.range_m[idx] = r;
            images.intensity[idx] = mat;
            points.push(sensor.point_at(row, az, r));
            intensity.push(mat);
        }
    }
    let cloud = PointCloud::new(points, Some(intensity))
        .expect("simulated returns are finite by construction");
    (cloud, images)
}
