//! Range-image geometry codec: calibrated projection of a cloud onto
//! range/azimuth-residual/intensity planes, plane compression, and the
//! inverse reconstruction.
//!
//! Projection and unprojection share the sensor's pixel math
//! ([`SensorModel::pixel_azimuth_rad`] / [`SensorModel::point_at`]) with the
//! scene simulator, so a simulated frame survives the round trip bit for bit
//! up to the stored plane precision.
//!
//! Payload layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     width (u32)
//! 4       4     height (u32)
//! 8       1     mode: 0 = lossless, 1 = quantized
//! 9       1     range bits (quantized mode; 0 in lossless)
//! 10      1     azimuth bits (quantized mode; 0 in lossless)
//! 11      4     sensor hash: crc32 of the canonical sensor text
//! 15      ...   three planes, each a u32 length prefix + deflate stream,
//!               in the order range, azimuth, intensity
//! ```
//!
//! Plane contents by mode:
//! * lossless: range as u32 micrometer ticks (0 = no return), azimuth
//!   residual as i32 microradian ticks, intensity as u8 (0..=255).
//! * quantized: range as `ceil(r * 2^bits / range_max)` in `[1, 2^bits]`
//!   (0 = no return), azimuth residual uniformly binned over one column
//!   step in each direction, intensity as u8.

use std::f64::consts::TAU;

use super::plane;
use super::CodecError;
use crate::io::{CodecId, CompressedFrame};
use crate::range_image::RangeImageSet;
use crate::types::{PointCloud, SensorModel};

pub const RANGE_HEADER_LEN: usize = 15;

/// One micrometer, the stored range resolution in lossless mode.
pub const RANGE_TICK_M: f64 = 1e-6;
/// One microradian, the stored azimuth-residual resolution in lossless mode.
pub const ANGLE_TICK_RAD: f64 = 1e-6;

/// Residuals this close to a full column step are attributed to the next
/// column instead. Keeps points that sit exactly on a column boundary (every
/// simulated point does) from flipping columns on floating-point noise.
/// Sized to absorb f32-precision coordinates (azimuth wobble ~1e-7 rad after
/// a PCD round trip) while staying thousands of times below a column step.
const SNAP_RAD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMode {
    Lossless,
    Quantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeCodecConfig {
    pub mode: RangeMode,
    /// Range plane depth in quantized mode, 8..=16.
    pub range_bits: u8,
    /// Azimuth-residual depth in quantized mode, 0..=16; 0 drops residuals.
    pub azimuth_bits: u8,
}

impl Default for RangeCodecConfig {
    fn default() -> Self {
        RangeCodecConfig {
            mode: RangeMode::Lossless,
            range_bits: 16,
            azimuth_bits: 8,
        }
    }
}

/// Projection accounting: `valid + collisions + below_min` equals the input
/// point count whenever `project` succeeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProjectionStats {
    pub valid: usize,
    pub collisions: usize,
    pub below_min: usize,
}

/// Compressed size of each plane inside one frame payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneSizes {
    pub range_bytes: usize,
    pub azimuth_bytes: usize,
    pub intensity_bytes: usize,
}

/// Identity of a calibration: crc32 over its canonical text form.
pub fn sensor_hash(sensor: &SensorModel) -> u32 {
    crc32fast::hash(sensor.canonical_text().as_bytes())
}

fn corrupt(msg: &str) -> CodecError {
    CodecError::CorruptPayload(msg.to_string())
}

/// Project a cloud onto the sensor's pixel grid. Nearer points win pixel
/// collisions; points under the minimum range are skipped. Both losses are
/// counted, never silent.
pub fn project(
    cloud: &PointCloud,
    sensor: &SensorModel,
) -> Result<(RangeImageSet, ProjectionStats), CodecError> {
    sensor
        .validate()
        .map_err(|e| CodecError::InvalidSensor(e.to_string()))?;
    let mut images = RangeImageSet::new_empty(sensor);
    images.frame_id = cloud.frame_id;
    images.timestamp_ns = cloud.timestamp_ns;
    let mut stats = ProjectionStats::default();
    let delta = sensor.col_step_rad();
    let width = images.width;

    for (i, p) in cloud.points().iter().enumerate() {
        let dx = p.x - sensor.origin.x;
        let dy = p.y - sensor.origin.y;
        let dz = p.z - sensor.origin.z;
        let r = (dx * dx + dy * dy + dz * dz).sqrt();
        if r > sensor.range_max_m {
            return Err(CodecError::PointOutOfRange {
                index: i,
                range_m: r,
                max_m: sensor.range_max_m,
            });
        }
        if r < sensor.range_min_m {
            stats.below_min += 1;
            continue;
        }

        let elev_deg = (dz / r).asin().to_degrees();
        let elevs = &sensor.elevation_deg;
        let hi = elevs.partition_point(|&e| e < elev_deg);
        let row = if hi == 0 {
            0
        } else if hi == elevs.len() {
            elevs.len() - 1
        } else {
            // tie between two beams goes to the lower row index
            if elev_deg - elevs[hi - 1] <= elevs[hi] - elev_deg {
                hi - 1
            } else {
                hi
            }
        };

        let az = dy.atan2(dx);
        let offset = sensor.azimuth_offset_deg[row].to_radians();
        let mut w = (az - offset).rem_euclid(TAU);
        if w >= TAU {
            w -= TAU;
        }
        let mut col = (w / delta) as usize;
        if col >= width {
            col = width - 1;
        }
        let mut corr = w - col as f64 * delta;
        if delta - corr < SNAP_RAD {
            col += 1;
            if col == width {
                col = 0;
            }
            corr -= delta;
        }

        let intensity = cloud.intensity().map_or(0.0, |v| v[i]);
        let idx = images.idx(row, col);
        if images.range_m[idx] == 0.0 {
            stats.valid += 1;
        } else {
            stats.collisions += 1;
            if r >= images.range_m[idx] {
                continue;
            }
        }
        images.range_m[idx] = r;
        images.azimuth_corr_rad[idx] = corr;
        images.intensity[idx] = intensity;
    }
    Ok((images, stats))
}

/// Reconstruct a cloud from an image set: one point per valid pixel, emitted
/// column-major (all beams of column 0, then column 1, ...).
pub fn unproject(images: &RangeImageSet) -> Result<PointCloud, CodecError> {
    validate_images(images)?;
    let sensor = &images.sensor;
    let mut points = Vec::with_capacity(images.valid_count());
    let mut intensity = Vec::with_capacity(images.valid_count());
    for col in 0..images.width {
        for row in 0..images.height {
            let idx = images.idx(row, col);
            let r = images.range_m[idx];
            if r == 0.0 {
                continue;
            }
            let az = sensor.pixel_azimuth_rad(row, col, images.azimuth_corr_rad[idx]);
            points.push(sensor.point_at(row, az, r));
            intensity.push(images.intensity[idx]);
        }
    }
    let cloud = PointCloud::new(points, Some(intensity))
        .map_err(|e| CodecError::InvalidImages(e.to_string()))?;
    Ok(cloud.with_frame(images.frame_id, images.timestamp_ns))
}

fn validate_images(images: &RangeImageSet) -> Result<(), CodecError> {
    let err = |m: &str| Err(CodecError::InvalidImages(m.to_string()));
    let n = images.width * images.height;
    if images.width == 0 || images.height == 0 {
        return err("empty image grid");
    }
    if images.width != images.sensor.n_cols || images.height != images.sensor.n_beams {
        return err("grid does not match the sensor's beam/column counts");
    }
    if images.range_m.len() != n
        || images.azimuth_corr_rad.len() != n
        || images.intensity.len() != n
    {
        return err("plane lengths disagree with the grid");
    }
    for i in 0..n {
        let r = images.range_m[i];
        if !r.is_finite() || r < 0.0 || r > images.sensor.range_max_m {
            return err("range out of [0, range_max]");
        }
        if !images.azimuth_corr_rad[i].is_finite() {
            return err("non-finite azimuth residual");
        }
        let it = images.intensity[i];
        if !(0.0..=1.0).contains(&it) {
            return err("intensity outside [0, 1]");
        }
        if r == 0.0 && (images.azimuth_corr_rad[i] != 0.0 || it != 0.0) {
            return err("invalid pixel carries azimuth or intensity data");
        }
    }
    Ok(())
}

fn validate_cfg(cfg: &RangeCodecConfig) -> Result<(), CodecError> {
    if cfg.mode == RangeMode::Quantized {
        if !(8..=16).contains(&cfg.range_bits) {
            return Err(CodecError::InvalidConfig(format!(
                "range bits must be in 8..=16, got {}",
                cfg.range_bits
            )));
        }
        if cfg.azimuth_bits > 16 {
            return Err(CodecError::InvalidConfig(format!(
                "azimuth bits must be in 0..=16, got {}",
                cfg.azimuth_bits
            )));
        }
    }
    Ok(())
}

pub fn encode(
    images: &RangeImageSet,
    cfg: &RangeCodecConfig,
) -> Result<(CompressedFrame, PlaneSizes), CodecError> {
    validate_images(images)?;
    validate_cfg(cfg)?;
    let sensor = &images.sensor;
    let n = images.width * images.height;
    let mut range_plane = vec![0u32; n];
    let mut azimuth_plane = vec![0u32; n];
    let mut intensity_plane = vec![0u8; n];

    match cfg.mode {
        RangeMode::Lossless => {
            if sensor.range_min_m <= RANGE_TICK_M {
                return Err(CodecError::InvalidConfig(
                    "lossless mode needs range_min above one micrometer so tick 0 \
                     can mean 'no return'"
                        .into(),
                ));
            }
            if sensor.range_max_m / RANGE_TICK_M > u32::MAX as f64 {
                return Err(CodecError::InvalidConfig(
                    "range_max exceeds the 32-bit micrometer tick span".into(),
                ));
            }
            for i in 0..n {
                let r = images.range_m[i];
                if r == 0.0 {
                    continue;
                }
                range_plane[i] = (r / RANGE_TICK_M).round() as u32;
                let ticks = (images.azimuth_corr_rad[i] / ANGLE_TICK_RAD).round() as i64;
                azimuth_plane[i] = (ticks as i32) as u32;
                intensity_plane[i] = (images.intensity[i] * 255.0).round() as u8;
            }
        }
        RangeMode::Quantized => {
            let levels = (1u64 << cfg.range_bits) as f64;
            let delta = sensor.col_step_rad();
            let az_levels = (1u64 << cfg.azimuth_bits) as f64;
            for i in 0..n {
                let r = images.range_m[i];
                if r == 0.0 {
                    continue;
                }
                let v = (r * levels / sensor.range_max_m).ceil();
                range_plane[i] = (v as u64).clamp(1, 1 << cfg.range_bits) as u32;
                if cfg.azimuth_bits > 0 {
                    let c = images.azimuth_corr_rad[i].clamp(-delta, delta);
                    let v = ((c + delta) * az_levels / (2.0 * delta)).ceil();
                    azimuth_plane[i] = (v as u64).clamp(1, 1 << cfg.azimuth_bits) as u32;
                }
                intensity_plane[i] = (images.intensity[i] * 255.0).round() as u8;
            }
        }
    }

    let range_stream = plane::compress_u32_plane(&range_plane, images.width);
    let azimuth_stream = plane::compress_u32_plane(&azimuth_plane, images.width);
    let intensity_stream = plane::compress_u8_plane(&intensity_plane, images.width);
    let sizes = PlaneSizes {
        range_bytes: range_stream.len(),
        azimuth_bytes: azimuth_stream.len(),
        intensity_bytes: intensity_stream.len(),
    };

    let (mode_byte, rbits, abits) = match cfg.mode {
        RangeMode::Lossless => (0u8, 0u8, 0u8),
        RangeMode::Quantized => (1u8, cfg.range_bits, cfg.azimuth_bits),
    };
    let mut payload = Vec::with_capacity(
        RANGE_HEADER_LEN + 12 + sizes.range_bytes + sizes.azimuth_bytes + sizes.intensity_bytes,
    );
    payload.extend_from_slice(&(images.width as u32).to_le_bytes());
    payload.extend_from_slice(&(images.height as u32).to_le_bytes());
    payload.push(mode_byte);
    payload.push(rbits);
    payload.push(abits);
    payload.extend_from_slice(&sensor_hash(sensor).to_le_bytes());
    for stream in [&range_stream, &azimuth_stream, &intensity_stream] {
        payload.extend_from_slice(&(stream.len() as u32).to_le_bytes());
        payload.extend_from_slice(stream);
    }

    let frame = CompressedFrame::new(
        CodecId::Range,
        images.frame_id,
        images.timestamp_ns,
        images.valid_count() as u32,
        payload,
    )?;
    Ok((frame, sizes))
}

/// Decode a range-coded frame back into an image set. The calibration is
/// out-of-band: the payload stores only its hash, so the caller must supply
/// the matching `SensorModel`.
pub fn decode(frame: &CompressedFrame, sensor: &SensorModel) -> Result<RangeImageSet, CodecError> {
    if frame.codec_id != CodecId::Range {
        return Err(CodecError::WrongCodec {
            expected: CodecId::Range,
            got: frame.codec_id,
        });
    }
    frame.verify_crc()?;
    let payload = frame.payload();
    if payload.len() < RANGE_HEADER_LEN {
        return Err(corrupt("payload shorter than header"));
    }
    let width = u32::from_le_bytes(payload[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(payload[4..8].try_into().unwrap()) as usize;
    let mode_byte = payload[8];
    let rbits = payload[9];
    let abits = payload[10];
    let stored_hash = u32::from_le_bytes(payload[11..15].try_into().unwrap());

    let expected_hash = sensor_hash(sensor);
    if stored_hash != expected_hash {
        return Err(CodecError::SensorMismatch {
            expected: expected_hash,
            got: stored_hash,
        });
    }
    if width != sensor.n_cols || height != sensor.n_beams {
        return Err(corrupt("grid dimensions disagree with the sensor"));
    }
    let mode = match mode_byte {
        0 => RangeMode::Lossless,
        1 => RangeMode::Quantized,
        _ => return Err(corrupt("unknown mode byte")),
    };
    match mode {
        RangeMode::Lossless => {
            if rbits != 0 || abits != 0 {
                return Err(corrupt("lossless frame with nonzero bit fields"));
            }
        }
        RangeMode::Quantized => {
            if !(8..=16).contains(&rbits) || abits > 16 {
                return Err(corrupt("bit depths out of range"));
            }
        }
    }

    let mut pos = RANGE_HEADER_LEN;
    let mut next_stream = || -> Result<&[u8], CodecError> {
        if payload.len() - pos < 4 {
            return Err(corrupt("missing plane length prefix"));
        }
        let len = u32::from_le_bytes(payload[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        if payload.len() - pos < len {
            return Err(corrupt("plane length prefix exceeds payload"));
        }
        let s = &payload[pos..pos + len];
        pos += len;
        Ok(s)
    };
    let range_stream = next_stream()?;
    let azimuth_stream = next_stream()?;
    let intensity_stream = next_stream()?;
    if pos != payload.len() {
        return Err(corrupt("trailing bytes after the plane streams"));
    }

    let range_plane = plane::decompress_u32_plane(range_stream, width, height)?;
    let azimuth_plane = plane::decompress_u32_plane(azimuth_stream, width, height)?;
    let intensity_plane = plane::decompress_u8_plane(intensity_stream, width, height)?;

    let n = width * height;
    let mut images = RangeImageSet::new_empty(sensor);
    images.frame_id = frame.frame_id;
    images.timestamp_ns = frame.timestamp_ns;

    match mode {
        RangeMode::Lossless => {
            let max_tick = (sensor.range_max_m / RANGE_TICK_M).round() as u64;
            let max_angle_ticks = (TAU / ANGLE_TICK_RAD).ceil() as i64;
            for i in 0..n {
                let tick = range_plane[i] as u64;
                if tick == 0 {
                    if azimuth_plane[i] != 0 || intensity_plane[i] != 0 {
                        return Err(corrupt("invalid pixel carries plane data"));
                    }
                    continue;
                }
                if tick > max_tick {
                    return Err(corrupt("range tick beyond sensor maximum"));
                }
                let angle_ticks = azimuth_plane[i] as i32 as i64;
                if angle_ticks.abs() > max_angle_ticks {
                    return Err(corrupt("azimuth residual beyond one revolution"));
                }
                images.range_m[i] = tick as f64 * RANGE_TICK_M;
                images.azimuth_corr_rad[i] = angle_ticks as f64 * ANGLE_TICK_RAD;
                images.intensity[i] = intensity_plane[i] as f64 / 255.0;
            }
        }
        RangeMode::Quantized => {
            let levels = (1u64 << rbits) as f64;
            let delta = sensor.col_step_rad();
            let az_levels = (1u64 << abits) as f64;
            for i in 0..n {
                let v = range_plane[i] as u64;
                if v == 0 {
                    if azimuth_plane[i] != 0 || intensity_plane[i] != 0 {
                        return Err(corrupt("invalid pixel carries plane data"));
                    }
                    continue;
                }
                if v > 1 << rbits {
                    return Err(corrupt("range level beyond bit depth"));
                }
                images.range_m[i] = (v as f64 - 0.5) * sensor.range_max_m / levels;
                images.azimuth_corr_rad[i] = if abits == 0 {
                    if azimuth_plane[i] != 0 {
                        return Err(corrupt("azimuth level on a zero-bit plane"));
                    }
                    0.0
                } else {
                    let a = azimuth_plane[i] as u64;
                    if a == 0 || a > 1 << abits {
                        return Err(corrupt("azimuth level beyond bit depth"));
                    }
                    (a as f64 - 0.5) * (2.0 * delta) / az_levels - delta
                };
                images.intensity[i] = intensity_plane[i] as f64 / 255.0;
            }
        }
    }
    Ok(images)
}
