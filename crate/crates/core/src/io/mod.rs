//! File formats: a PCD v0.7 subset for raw clouds and the PC3D container for
//! compressed frames.

mod container;
mod pcd;

pub use container::{
    pack_frame, unpack_frame, CodecId, CompressedFrame, FrameHeader, FRAME_HEADER_LEN,
};
pub use pcd::{read_pcd, write_pcd, PcdData};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IoError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported field '{0}' (this reader handles x y z [intensity])")]
    UnsupportedField(String),
    #[error("count mismatch: header declares {declared}, data holds {actual}")]
    CountMismatch { declared: usize, actual: usize },
    #[error("cannot write an empty cloud")]
    EmptyCloud,
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("bad magic (not a PC3D frame)")]
    BadMagic,
    #[error("frame truncated: need {needed} bytes, have {have}")]
    TruncatedFrame { needed: usize, have: usize },
    #[error("payload CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}
