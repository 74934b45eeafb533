//! PC3D compressed-frame container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "PC3D"
//!      4     1  version (1)
//!      5     1  codec_id (1 = octree, 2 = range, 3 = voxel)
//!      6     2  reserved (0)
//!      8     8  frame_id
//!     16     8  timestamp_ns
//!     24     4  n_points_original
//!     28     4  payload_len
//!     32     *  payload
//!      *     4  crc32 (IEEE, over the payload only)
//! ```

use super::IoError;

pub const FRAME_MAGIC: [u8; 4] = *b"PC3D";
pub const FRAME_VERSION: u8 = 1;
pub const FRAME_HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CodecId {
    Octree = 1,
    Range = 2,
    Voxel = 3,
}

impl CodecId {
    pub fn from_u8(v: u8) -> Option<CodecId> {
        match v {
            1 => Some(CodecId::Octree),
            2 => Some(CodecId::Range),
            3 => Some(CodecId::Voxel),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CodecId::Octree => "octree",
            CodecId::Range => "range",
            CodecId::Voxel => "voxel",
        }
    }
}

/// One encoded frame plus the metadata needed to decode and account for it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedFrame {
    pub codec_id: CodecId,
    pub frame_id: u64,
    pub timestamp_ns: u64,
    /// Point count of the cloud this frame was encoded from; the BPP
    /// denominator.
    pub n_points_original: u32,
    payload: Vec<u8>,
    crc32: u32,
}

impl CompressedFrame {
    pub fn new(
        codec_id: CodecId,
        frame_id: u64,
        timestamp_ns: u64,
        n_points_original: u32,
        payload: Vec<u8>,
    ) -> Result<Self, IoError> {
        if payload.is_empty() {
            return Err(IoError::InvalidFrame("payload must be non-empty".into()));
        }
        let crc32 = crc32fast::hash(&payload);
        Ok(CompressedFrame {
            codec_id,
            frame_id,
            timestamp_ns,
            n_points_original,
            payload,
            crc32,
        })
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn payload_len(&self) -> usize {
        self.payload.len()
    }

    pub fn crc32(&self) -> u32 {
        self.crc32
    }

    pub fn verify_crc(&self) -> Result<(), IoError> {
        let computed = crc32fast::hash(&self.payload);
        if computed != self.crc32 {
            return Err(IoError::CrcMismatch {
                stored: self.crc32,
                computed,
            });
        }
        Ok(())
    }
}

/// Raw header fields as they appear on the wire. `payload_len == 0` is the
/// stream terminator and never comes from `pack_frame`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub codec_id: u8,
    pub frame_id: u64,
    pub timestamp_ns: u64,
    pub n_points_original: u32,
    pub payload_len: u32,
}

impl FrameHeader {
    pub fn encode(&self) -> [u8; FRAME_HEADER_LEN] {
        let mut h = [0u8; FRAME_HEADER_LEN];
        h[0..4].copy_from_slice(&FRAME_MAGIC);
        h[4] = FRAME_VERSION;
        h[5] = self.codec_id;
        h[6..8].copy_from_slice(&0u16.to_le_bytes());
        h[8..16].copy_from_slice(&self.frame_id.to_le_bytes());
        h[16..24].copy_from_slice(&self.timestamp_ns.to_le_bytes());
        h[24..28].copy_from_slice(&self.n_points_original.to_le_bytes());
        h[28..32].copy_from_slice(&self.payload_len.to_le_bytes());
        h
    }

    pub fn decode(h: &[u8; FRAME_HEADER_LEN]) -> Result<FrameHeader, IoError> {
        if h[0..4] != FRAME_MAGIC {
            return Err(IoError::BadMagic);
        }
        if h[4] != FRAME_VERSION {
            return Err(IoError::InvalidFrame(format!(
                "unsupported container version {}",
                h[4]
            )));
        }
        Ok(FrameHeader {
            codec_id: h[5],
            frame_id: u64::from_le_bytes(h[8..16].try_into().unwrap()),
            timestamp_ns: u64::from_le_bytes(h[16..24].try_into().unwrap()),
            n_points_original: u32::from_le_bytes(h[24..28].try_into().unwrap()),
            payload_len: u32::from_le_bytes(h[28..32].try_into().unwrap()),
        })
    }
}

/// Serialize a frame to the container layout.
pub fn pack_frame(frame: &CompressedFrame) -> Vec<u8> {
    let header = FrameHeader {
        codec_id: frame.codec_id as u8,
        frame_id: frame.frame_id,
        timestamp_ns: frame.timestamp_ns,
        n_points_original: frame.n_points_original,
        payload_len: frame.payload.len() as u32,
    };
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.payload.len() + 4);
    out.extend_from_slice(&header.encode());
    out.extend_from_slice(&frame.payload);
    out.extend_from_slice(&frame.crc32.to_le_bytes());
    out
}

/// Parse exactly one frame; the buffer must contain nothing else.
pub fn unpack_frame(bytes: &[u8]) -> Result<CompressedFrame, IoError> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(IoError::TruncatedFrame {
            needed: FRAME_HEADER_LEN,
            have: bytes.len(),
        });
    }
    let header = FrameHeader::decode(bytes[..FRAME_HEADER_LEN].try_into().unwrap())?;
    let payload_len = header.payload_len as usize;
    if payload_len == 0 {
        return Err(IoError::InvalidFrame("payload must be non-empty".into()));
    }
    let total = FRAME_HEADER_LEN + payload_len + 4;
    if bytes.len() < total {
        return Err(IoError::TruncatedFrame {
            needed: total,
            have: bytes.len(),
        });
    }
    if bytes.len() > total {
        return Err(IoError::InvalidFrame(format!(
            "{} trailing bytes after frame",
            bytes.len() - total
        )));
    }
    let codec_id = CodecId::from_u8(header.codec_id)
        .ok_or_else(|| IoError::InvalidFrame(format!("unknown codec id {}", header.codec_id)))?;
    let payload = bytes[FRAME_HEADER_LEN..FRAME_HEADER_LEN + payload_len].to_vec();
    let stored = u32::from_le_bytes(bytes[total - 4..total].try_into().unwrap());
    let computed = crc32fast::hash(&payload);
    if stored != computed {
        return Err(IoError::CrcMismatch { stored, computed });
    }
    Ok(CompressedFrame {
        codec_id,
        frame_id: header.frame_id,
        timestamp_ns: header.timestamp_ns,
        n_points_original: header.n_points_original,
        payload,
        crc32: stored,
    })
}
