//! pc3: a compression toolkit for roadside LiDAR point clouds.
//!
//! The crate bundles three geometry codecs (octree occupancy, calibrated
//! range images, voxel grids), a quality-metric suite, a deterministic scene
//! simulator, a rate-distortion benchmark harness, and a real-time streaming
//! protocol, all sharing the container format in [`io`].

pub mod bench;
pub mod codec;
pub mod entropy;
pub mod io;
pub mod metrics;
pub mod range_image;
pub mod scenegen;
pub mod stream;
pub mod types;

pub use range_image::RangeImageSet;
pub use types::{Aabb, CoreError, Point3, PointCloud, SensorModel};
