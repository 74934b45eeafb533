//! Shared fixtures for the criterion benchmarks: one simulated roadside
//! frame and the codec configurations under test, so every bench measures
//! the same workload.

use pc3_core::codec::{CodecConfig, OctreeConfig, RangeCodecConfig, VoxelAssignment};
use pc3_core::scenegen::default_frames;
use pc3_core::types::{PointCloud, SensorModel};

pub const BENCH_SEED: u64 = 20_260_814;

/// One deterministic ~21k-point frame.
pub fn demo_frame() -> PointCloud {
    default_frames(BENCH_SEED, 1).remove(0).0
}

/// The three codecs at the settings the toolkit defaults to.
pub fn codec_suite() -> Vec<(&'static str, CodecConfig)> {
    vec![
        ("octree", CodecConfig::Octree(OctreeConfig::default())),
        (
            "range",
            CodecConfig::Range {
                cfg: RangeCodecConfig::default(),
                sensor: SensorModel::default_roadside(),
            },
        ),
        (
            "voxel",
            CodecConfig::Voxel {
                voxel_size: 0.2,
                assignment: VoxelAssignment::Averaged,
            },
        ),
    ]
}
