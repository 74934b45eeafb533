//! Range/azimuth-correction/intensity image triple tied to a sensor model.

use crate::types::SensorModel;

/// Calibrated 2D representation of one LiDAR revolution.
///
/// All three planes are row-major `height x width` (`height` = beams,
/// `width` = columns). A range of exactly 0 marks "no return"; the other
/// planes hold 0 at such pixels. `azimuth_corr_rad` stores the residual
/// between a point's true azimuth and its column's nominal azimuth plus the
/// beam's azimuth offset.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImageSet {
    pub sensor: SensorModel,
    pub width: usize,
    pub height: usize,
    pub range_m: Vec<f64>,
    pub azimuth_corr_rad: Vec<f64>,
    pub intensity: Vec<f64>,
    pub frame_id: u64,
    pub timestamp_ns: u64,
}

impl RangeImageSet {
    pub fn new_empty(sensor: &SensorModel) -> Self {
        let width = sensor.n_cols;
        let height = sensor.n_beams;
        let n = width * height;
        RangeImageSet {
            sensor: sensor.clone(),
            width,
            height,
            range_m: vec![0.0; n],
            azimuth_corr_rad: vec![0.0; n],
            intensity: vec![0.0; n],
            frame_id: 0,
            timestamp_ns: 0,
        }
    }

    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.range_m[self.idx(row, col)] > 0.0
    }

    /// Number of pixels carrying a return.
    pub fn valid_count(&self) -> usize {
        self.range_m.iter().filter(|&&r| r > 0.0).count()
    }
}
