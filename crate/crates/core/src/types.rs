//! Shared geometric types: points, clouds, bounding boxes, and the sensor model.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate at point index {0}")]
    NonFinitePoint(usize),
    #[error("intensity length {got} does not match point count {expected}")]
    IntensityLengthMismatch { got: usize, expected: usize },
    #[error("intensity at index {0} is not a finite value in [0, 1]")]
    InvalidIntensity(usize),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
}

/// A point in 3D space, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

/// An axis-aligned bounding box. `min` is component-wise <= `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    /// Euclidean length of the main diagonal.
    pub fn diagonal(&self) -> f64 {
        self.min.distance(&self.max)
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        ]
    }

    /// Largest per-axis extent.
    pub fn max_extent(&self) -> f64 {
        let e = self.extent();
        e[0].max(e[1]).max(e[2])
    }

    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Smallest cube with the same `min` corner that covers the box.
    pub fn cubified(&self) -> Aabb {
        let e = self.max_extent();
        Aabb {
            min: self.min,
            max: Point3::new(self.min.x + e, self.min.y + e, self.min.z + e),
        }
    }
}

/// An immutable point cloud with an optional per-point intensity channel in [0, 1].
///
/// Coordinates are finite f64 meters; non-finite input is rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    intensity: Option<Vec<f64>>,
    pub frame_id: u64,
    pub timestamp_ns: u64,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, intensity: Option<Vec<f64>>) -> Result<Self, CoreError> {
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(CoreError::NonFinitePoint(i));
            }
        }
        if let Some(ints) = &intensity {
            if ints.len() != points.len() {
                return Err(CoreError::IntensityLengthMismatch {
                    got: ints.len(),
                    expected: points.len(),
                });
            }
            for (i, v) in ints.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                    return Err(CoreError::InvalidIntensity(i));
                }
            }
        }
        Ok(PointCloud {
            points,
            intensity,
            frame_id: 0,
            timestamp_ns: 0,
        })
    }

    pub fn with_frame(mut self, frame_id: u64, timestamp_ns: u64) -> Self {
        self.frame_id = frame_id;
        self.timestamp_ns = timestamp_ns;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn intensity(&self) -> Option<&[f64]> {
        self.intensity.as_deref()
    }

    /// Tight axis-aligned bounding box over all points.
    pub fn bounding_box(&self) -> Result<Aabb, CoreError> {
        if self.points.is_empty() {
            return Err(CoreError::EmptyCloud);
        }
        let mut min = self.points[0];
        let mut max = self.points[0];
        for p in &self.points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Ok(Aabb { min, max })
    }

    /// Size in bytes of the uncompressed binary representation
    /// (float32 x/y/z plus float32 intensity when present).
    pub fn raw_size_bytes(&self) -> u64 {
        let stride = if self.intensity.is_some() { 16 } else { 12 };
        self.points.len() as u64 * stride
    }
}

/// Spinning LiDAR calibration: one elevation and one azimuth offset per beam,
/// a fixed column count per revolution, and a radial working range.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub n_beams: usize,
    pub n_cols: usize,
    /// Per-beam elevation in degrees, strictly ascending.
    pub elevation_deg: Vec<f64>,
    /// Per-beam azimuth offset in degrees.
    pub azimuth_offset_deg: Vec<f64>,
    pub range_min_m: f64,
    pub range_max_m: f64,
    /// Sensor origin in world coordinates.
    pub origin: Point3,
}

impl SensorModel {
    pub fn new(
        n_beams: usize,
        n_cols: usize,
        elevation_deg: Vec<f64>,
        azimuth_offset_deg: Vec<f64>,
        range_min_m: f64,
        range_max_m: f64,
        origin: Point3,
    ) -> Result<Self, CoreError> {
        let s = SensorModel {
            n_beams,
            n_cols,
            elevation_deg,
            azimuth_offset_deg,
            range_min_m,
            range_max_m,
            origin,
        };
        s.validate()?;
        Ok(s)
    }

    /// Re-check the invariants `new` enforces. Useful after mutating the
    /// public fields by hand.
    pub fn validate(&self) -> Result<(), CoreError> {
        let err = |m: &str| Err(CoreError::InvalidSensor(m.to_string()));
        if self.n_beams == 0 || self.n_cols == 0 {
            return err("beam and column counts must be positive");
        }
        if self.elevation_deg.len() != self.n_beams {
            return err("elevation table length must equal n_beams");
        }
        if self.azimuth_offset_deg.len() != self.n_beams {
            return err("azimuth offset table length must equal n_beams");
        }
        if !self.elevation_deg.iter().all(|v| v.is_finite())
            || !self.azimuth_offset_deg.iter().all(|v| v.is_finite())
        {
            return err("calibration tables must be finite");
        }
        if self.elevation_deg.windows(2).any(|w| w[0] >= w[1]) {
            return err("elevations must be strictly ascending");
        }
        if !(self.range_min_m > 0.0 && self.range_min_m < self.range_max_m)
            || !self.range_max_m.is_finite()
        {
            return err("require 0 < range_min < range_max");
        }
        if !self.origin.is_finite() {
            return err("origin must be finite");
        }
        Ok(())
    }

    /// 64-beam roadside unit: elevations evenly spaced from -22.5 to -0.35 degrees
    /// (all below the horizon), 2048 columns per revolution, mounted 7 m up.
    pub fn default_roadside() -> SensorModel {
        let n_beams = 64;
        let lo = -22.5;
        let hi = -0.35;
        // lerp with exact endpoints
        let last = (n_beams - 1) as f64;
        let elevation_deg = (0..n_beams)
            .map(|i| (lo * (last - i as f64) + hi * i as f64) / last)
            .collect();
        SensorModel {
            n_beams,
            n_cols: 2048,
            elevation_deg,
            azimuth_offset_deg: vec![0.0; n_beams],
            range_min_m: 0.5,
            range_max_m: 200.0,
            origin: Point3::new(0.0, 0.0, 7.0),
        }
    }

    /// Unit direction of a beam return at `elevation_deg[row]` and azimuth `az_rad`.
    ///
    /// Shared by the simulator and the range-image codec so that a simulated
    /// cloud and the unprojection of its ground-truth images agree bit for bit.
    pub fn beam_direction(&self, row: usize, az_rad: f64) -> [f64; 3] {
        let e = self.elevation_deg[row].to_radians();
        let (sin_e, cos_e) = e.sin_cos();
        let (sin_a, cos_a) = az_rad.sin_cos();
        [cos_e * cos_a, cos_e * sin_a, sin_e]
    }

    /// Azimuth step of one column, in radians.
    pub fn col_step_rad(&self) -> f64 {
        std::f64::consts::TAU / self.n_cols as f64
    }

    /// Azimuth of a pixel: the column's nominal angle plus the beam's offset
    /// plus a residual correction. One formula shared by the simulator and
    /// the range-image codec so both sides agree bit for bit.
    pub fn pixel_azimuth_rad(&self, row: usize, col: usize, corr_rad: f64) -> f64 {
        col as f64 * self.col_step_rad() + self.azimuth_offset_deg[row].to_radians() + corr_rad
    }

    /// World point of a return at the given beam, azimuth, and range.
    pub fn point_at(&self, row: usize, az_rad: f64, range_m: f64) -> Point3 {
        let d = self.beam_direction(row, az_rad);
        Point3::new(
            self.origin.x + range_m * d[0],
            self.origin.y + range_m * d[1],
            self.origin.z + range_m * d[2],
        )
    }

    /// Deterministic text form: the same model always serializes to the same
    /// bytes (floats printed shortest-round-trip), so hashing the text
    /// identifies the calibration. Inverse of [`SensorModel::from_text`].
    pub fn canonical_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "sensor v1\nn_beams {}\nn_cols {}\nrange_min_m {}\nrange_max_m {}\norigin {} {} {}\nelevation_deg {}\nazimuth_offset_deg {}\n",
            self.n_beams,
            self.n_cols,
            self.range_min_m,
            self.range_max_m,
            self.origin.x,
            self.origin.y,
            self.origin.z,
            join(&self.elevation_deg),
            join(&self.azimuth_offset_deg),
        )
    }

    pub fn from_text(text: &str) -> Result<SensorModel, CoreError> {
        let err = |m: String| CoreError::InvalidSensor(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("sensor v1") {
            return Err(err("missing 'sensor v1' header".into()));
        }
        let mut fields: Vec<(String, Vec<String>)> = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(String::from);
            let key = it.next().ok_or_else(|| err("blank field line".into()))?;
            fields.push((key, it.collect()));
        }
        let take = |key: &str| -> Result<Vec<String>, CoreError> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| err(format!("missing field '{key}'")))
        };
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        }
        let one_int = |key: &str| -> Result<usize, CoreError> {
            let v = take(key)?;
            if v.len() != 1 {
                return Err(err(format!("field '{key}' wants one value")));
            }
            v[0].parse().map_err(|_| err(format!("bad integer in '{key}'")))
        };
        let floats = |v: &[String], key: &str| -> Result<Vec<f64>, CoreError> {
            v.iter()
                .map(|s| s.parse().map_err(|_| err(format!("bad number in '{key}'"))))
                .collect()
        };
        let one_float = |key: &str| -> Result<f64, CoreError> {
            let v = take(key)?;
            if v.len() != 1 {
                return Err(err(format!("field '{key}' wants one value")));
            }
            Ok(floats(&v, key)?[0])
        };
        let origin_v = floats(&take("origin")?, "origin")?;
        if origin_v.len() != 3 {
            return Err(err("origin wants three values".into()));
        }
        SensorModel::new(
            one_int("n_beams")?,
            one_int("n_cols")?,
            floats(&take("elevation_deg")?, "elevation_deg")?,
            floats(&take("azimuth_offset_deg")?, "azimuth_offset_deg")?,
            one_float("range_min_m")?,
            one_float("range_max_m")?,
            Point3::new(origin_v[0], origin_v[1], origin_v[2]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        let pts = pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        PointCloud::new(pts, None).unwrap()
    }

    #[test]
    fn bounding_box_of_unit_corners() {
        let c = cloud(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]);
        let b = c.bounding_box().unwrap();
        assert_eq!(b.min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(b.max, Point3::new(1.0, 1.0, 1.0));
        assert!((b.diagonal() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bounding_box_single_point_is_degenerate() {
        let c = cloud(&[[2.0, -1.0, 5.0]]);
        let b = c.bounding_box().unwrap();
        assert_eq!(b.min, b.max);
        assert_eq!(b.diagonal(), 0.0);
    }

    #[test]
    fn bounding_box_empty_cloud_errors() {
        let c = PointCloud::new(vec![], None).unwrap();
        assert_eq!(c.bounding_box().unwrap_err(), CoreError::EmptyCloud);
    }

    #[test]
    fn nan_point_rejected() {
        let pts = vec![Point3::new(0.0, f64::NAN, 0.0)];
        assert_eq!(
            PointCloud::new(pts, None).unwrap_err(),
            CoreError::NonFinitePoint(0)
        );
    }

    #[test]
    fn intensity_validation() {
        let pts = vec![Point3::new(0.0, 0.0, 0.0)];
        assert_eq!(
            PointCloud::new(pts.clone(), Some(vec![0.2, 0.4])).unwrap_err(),
            CoreError::IntensityLengthMismatch { got: 2, expected: 1 }
        );
        assert_eq!(
            PointCloud::new(pts.clone(), Some(vec![1.5])).unwrap_err(),
            CoreError::InvalidIntensity(0)
        );
        assert!(PointCloud::new(pts, Some(vec![1.0])).is_ok());
    }

    #[test]
    fn bounding_box_is_permutation_invariant() {
        let a = cloud(&[[0.0, 1.0, 2.0], [-3.0, 4.0, 0.5], [9.0, -2.0, 1.0]]);
        let b = cloud(&[[9.0, -2.0, 1.0], [0.0, 1.0, 2.0], [-3.0, 4.0, 0.5]]);
        assert_eq!(a.bounding_box().unwrap(), b.bounding_box().unwrap());
    }

    #[test]
    fn cubified_box_covers_and_shares_min() {
        let c = cloud(&[[0.0, 0.0, 0.0], [4.0, 1.0, 2.0]]);
        let b = c.bounding_box().unwrap();
        let cube = b.cubified();
        assert_eq!(cube.min, b.min);
        let e = cube.extent();
        assert_eq!(e, [4.0, 4.0, 4.0]);
        assert!(cube.contains(&b.max));
    }

    #[test]
    fn default_sensor_shape() {
        let s = SensorModel::default_roadside();
        assert_eq!(s.n_beams, 64);
        assert_eq!(s.n_cols, 2048);
        assert_eq!(s.n_beams * s.n_cols, 131_072);
        assert_eq!(s.elevation_deg[0], -22.5);
        assert_eq!(s.elevation_deg[63], -0.35);
        assert!(s.elevation_deg.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.range_max_m, 200.0);
    }

    #[test]
    fn sensor_rejects_unsorted_elevations() {
        let r = SensorModel::new(
            2,
            16,
            vec![-1.0, -2.0],
            vec![0.0, 0.0],
            0.5,
            100.0,
            Point3::new(0.0, 0.0, 2.0),
        );
        assert!(matches!(r, Err(CoreError::InvalidSensor(_))));
    }

    #[test]
    fn beam_direction_matches_closed_form() {
        let mut s = SensorModel::default_roadside();
        s.elevation_deg[0] = -30.0;
        let d = s.beam_direction(0, 0.0);
        assert!((d[0] - 30f64.to_radians().cos()).abs() < 1e-15);
        assert!((d[1] - 0.0).abs() < 1e-15);
        assert!((d[2] - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn sensor_text_round_trips_bitwise() {
        let mut s = SensorModel::default_roadside();
        s.azimuth_offset_deg[3] = 0.1234567890123456;
        s.origin = Point3::new(-1.5, 2.25, 6.875);
        let text = s.canonical_text();
        let back = SensorModel::from_text(&text).unwrap();
        assert_eq!(back, s);
        // canonical means stable: serializing again yields identical bytes
        assert_eq!(back.canonical_text(), text);
    }

    #[test]
    fn sensor_text_rejects_malformed_input() {
        let good = SensorModel::default_roadside().canonical_text();
        assert!(SensorModel::from_text("").is_err());
        assert!(SensorModel::from_text("sensor v2\n").is_err());
        assert!(SensorModel::from_text(&good.replace("n_beams 64", "n_beams x")).is_err());
        assert!(SensorModel::from_text(&good.replace("n_beams 64", "n_beams 63")).is_err());
        let truncated = good.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(SensorModel::from_text(&truncated).is_err());
        let extra = format!("{good}mystery 1\n");
        assert!(SensorModel::from_text(&extra).is_err());
    }
}
