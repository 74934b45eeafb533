//! Geometry codecs: octree occupancy coding, range-image coding, and voxel
//! grids, behind a shared error type and a unified dispatch config.

pub mod octree;
pub mod plane;
pub mod range;
pub mod voxel;

pub use octree::{OctreeConfig, OctreeContextMode};
pub use range::{PlaneSizes, ProjectionStats, RangeCodecConfig, RangeMode};
pub use voxel::{VoxelAssignment, VoxelCell, VoxelGrid};

use crate::io::{CodecId, CompressedFrame, IoError};
use crate::types::{PointCloud, SensorModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("bounding box has zero extent on all axes")]
    DegenerateBox,
    #[error("voxel size must be a positive finite number, got {0}")]
    NonPositiveVoxelSize(f64),
    #[error("invalid codec configuration: {0}")]
    InvalidConfig(String),
    #[error("payload is corrupt: {0}")]
    CorruptPayload(String),
    #[error("frame was encoded with {got:?}, expected {expected:?}")]
    WrongCodec { expected: CodecId, got: CodecId },
    #[error("point {index} at range {range_m} m exceeds sensor maximum {max_m} m")]
    PointOutOfRange {
        index: usize,
        range_m: f64,
        max_m: f64,
    },
    #[error("frame was encoded for sensor {expected:#010x}, got {got:#010x}")]
    SensorMismatch { expected: u32, got: u32 },
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
    #[error("invalid range images: {0}")]
    InvalidImages(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// A fully specified codec choice: which algorithm plus its dials, with
/// whatever side data (the sensor calibration) decoding needs.
#[derive(Debug, Clone)]
pub enum CodecConfig {
    Octree(OctreeConfig),
    Range {
        cfg: RangeCodecConfig,
        sensor: SensorModel,
    },
    Voxel {
        voxel_size: f64,
        assignment: VoxelAssignment,
    },
}

impl CodecConfig {
    pub fn codec_id(&self) -> CodecId {
        match self {
            CodecConfig::Octree(_) => CodecId::Octree,
            CodecConfig::Range { .. } => CodecId::Range,
            CodecConfig::Voxel { .. } => CodecId::Voxel,
        }
    }

    /// Short human-readable tag for reports: codec name plus its dials.
    pub fn label(&self) -> String {
        match self {
            CodecConfig::Octree(c) => {
                let ctx = match c.context_mode {
                    OctreeContextMode::Order0 => "o0",
                    OctreeContextMode::ParentContext => "ctx",
                };
                format!("octree-b{}-{}", c.quantization_bits, ctx)
            }
            CodecConfig::Range { cfg, .. } => match cfg.mode {
                RangeMode::Lossless => "range-lossless".to_string(),
                RangeMode::Quantized => {
                    format!("range-q{}a{}", cfg.range_bits, cfg.azimuth_bits)
                }
            },
            CodecConfig::Voxel {
                voxel_size,
                assignment,
            } => {
                let mode = match assignment {
                    VoxelAssignment::Binary => "binary",
                    VoxelAssignment::Averaged => "averaged",
                    VoxelAssignment::Density => "density",
                };
                format!("voxel-{voxel_size}-{mode}")
            }
        }
    }

    /// Cloud to frame, including the codec's own domain transform
    /// (quantization, projection, or voxelization).
    pub fn encode_cloud(&self, cloud: &PointCloud) -> Result<CompressedFrame, CodecError> {
        match self {
            CodecConfig::Octree(c) => octree::encode(cloud, c),
            CodecConfig::Range { cfg, sensor } => {
                let (images, _) = range::project(cloud, sensor)?;
                Ok(range::encode(&images, cfg)?.0)
            }
            CodecConfig::Voxel {
                voxel_size,
                assignment,
            } => voxel::encode(&voxel::voxelize(cloud, *voxel_size, *assignment)?),
        }
    }

    /// Frame back to a cloud, the inverse of [`CodecConfig::encode_cloud`].
    pub fn decode_cloud(&self, frame: &CompressedFrame) -> Result<PointCloud, CodecError> {
        match self {
            CodecConfig::Octree(_) => octree::decode(frame),
            CodecConfig::Range { sensor, .. } => {
                range::unproject(&range::decode(frame, sensor)?)
            }
            CodecConfig::Voxel { .. } => Ok(voxel::devoxelize(&voxel::decode(frame)?)),
        }
    }
}
