//! Octree geometry codec.
//!
//! Points are quantized onto a `2^bits` lattice over the cubified bounding
//! box, the occupied cells form an octree, and the breadth-first occupancy
//! bytes are range-coded. Decoding reproduces one point per occupied leaf at
//! the cell center, so reconstruction error is at most half a cell diagonal.
//!
//! Payload layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       48    cubified aabb: min.xyz, max.xyz as f64
//! 48      1     quantization bits (1..=30)
//! 49      4     n_leaves: distinct occupied cells, u32
//! 53      1     context mode: 0 = order-0, 1 = parent-context
//! 54      ...   range-coded occupancy bytes, breadth-first
//! ```
//!
//! Occupancy bit `k` of a node refers to child `(z << 2) | (y << 1) | x`,
//! i.e. x is the least significant axis. Children are visited in ascending
//! `k` on both sides, so the byte stream order is fully determined.

use std::collections::VecDeque;

use super::CodecError;
use crate::entropy::{ByteDecoder, ByteEncoder, ContextMode};
use crate::io::{CodecId, CompressedFrame};
use crate::types::{Aabb, Point3, PointCloud};

pub const OCTREE_MAX_BITS: u8 = 30;
pub const OCTREE_HEADER_LEN: usize = 54;

/// Entropy-model selection: order-0 is fastest, parent-context conditions
/// each occupancy byte on its parent's byte and codes tighter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OctreeContextMode {
    Order0,
    ParentContext,
}

impl OctreeContextMode {
    fn to_u8(self) -> u8 {
        match self {
            OctreeContextMode::Order0 => 0,
            OctreeContextMode::ParentContext => 1,
        }
    }

    fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(OctreeContextMode::Order0),
            1 => Some(OctreeContextMode::ParentContext),
            _ => None,
        }
    }

    fn entropy_mode(self) -> ContextMode {
        match self {
            OctreeContextMode::Order0 => ContextMode::Order0,
            OctreeContextMode::ParentContext => ContextMode::Keyed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OctreeConfig {
    pub quantization_bits: u8,
    pub context_mode: OctreeContextMode,
}

impl Default for OctreeConfig {
    fn default() -> Self {
        OctreeConfig {
            quantization_bits: 16,
            context_mode: OctreeContextMode::ParentContext,
        }
    }
}

fn validate_bits(bits: u8) -> Result<(), CodecError> {
    if bits == 0 || bits > OCTREE_MAX_BITS {
        return Err(CodecError::InvalidConfig(format!(
            "quantization bits must be in 1..={OCTREE_MAX_BITS}, got {bits}"
        )));
    }
    Ok(())
}

fn cell_index(delta: f64, cell: f64, side: u64) -> u64 {
    if cell <= 0.0 {
        return 0;
    }
    let t = (delta / cell).floor();
    if t <= 0.0 {
        0
    } else {
        (t as u64).min(side - 1)
    }
}

fn morton(ix: u64, iy: u64, iz: u64, bits: u8) -> u128 {
    let mut code = 0u128;
    for l in 0..bits as u32 {
        let k = ((iz >> l) & 1) << 2 | ((iy >> l) & 1) << 1 | ((ix >> l) & 1);
        code |= (k as u128) << (3 * l);
    }
    code
}

fn demorton(code: u128, bits: u8) -> (u64, u64, u64) {
    let (mut ix, mut iy, mut iz) = (0u64, 0u64, 0u64);
    for l in 0..bits as u32 {
        let k = ((code >> (3 * l)) & 7) as u64;
        ix |= (k & 1) << l;
        iy |= ((k >> 1) & 1) << l;
        iz |= ((k >> 2) & 1) << l;
    }
    (ix, iy, iz)
}

/// Sorted distinct cell codes of `cloud` on the `2^bits` lattice over the
/// cubified bounding box. Tolerates a zero-extent box (all points map to
/// cell 0); the public [`quantize`] rejects that case instead.
fn codes_internal(cloud: &PointCloud, bits: u8) -> Result<(Aabb, Vec<u128>), CodecError> {
    let bbox = cloud.bounding_box().map_err(|_| CodecError::EmptyCloud)?;
    let cube = bbox.cubified();
    let side = 1u64 << bits;
    let cell = cube.max_extent() / side as f64;
    let mut codes: Vec<u128> = cloud
        .points()
        .iter()
        .map(|p| {
            let ix = cell_index(p.x - cube.min.x, cell, side);
            let iy = cell_index(p.y - cube.min.y, cell, side);
            let iz = cell_index(p.z - cube.min.z, cell, side);
            morton(ix, iy, iz, bits)
        })
        .collect();
    codes.sort_unstable();
    codes.dedup();
    Ok((cube, codes))
}

/// Cell center for a leaf code, given the cubified box the lattice spans.
pub fn cell_center(cube: &Aabb, bits: u8, code: u128) -> Point3 {
    let side = 1u64 << bits;
    let cell = cube.max_extent() / side as f64;
    let (ix, iy, iz) = demorton(code, bits);
    Point3::new(
        cube.min.x + (ix as f64 + 0.5) * cell,
        cube.min.y + (iy as f64 + 0.5) * cell,
        cube.min.z + (iz as f64 + 0.5) * cell,
    )
}

/// Map a cloud onto the lattice: cubified box plus sorted distinct cell codes.
pub fn quantize(cloud: &PointCloud, bits: u8) -> Result<(Aabb, Vec<u128>), CodecError> {
    if cloud.is_empty() {
        return Err(CodecError::EmptyCloud);
    }
    validate_bits(bits)?;
    let bbox = cloud.bounding_box().map_err(|_| CodecError::EmptyCloud)?;
    if bbox.max_extent() == 0.0 {
        return Err(CodecError::DegenerateBox);
    }
    codes_internal(cloud, bits)
}

/// Breadth-first (occupancy byte, parent occupancy byte) pairs; the root's
/// parent context is 0. One entry per internal node.
fn build_occupancy(codes: &[u128], depth: u8) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    let mut queue: VecDeque<(usize, usize, u8, u8)> = VecDeque::new();
    queue.push_back((0, codes.len(), 0, 0));
    while let Some((start, end, level, parent)) = queue.pop_front() {
        let shift = 3 * (depth - level - 1) as u32;
        let mut byte = 0u8;
        let mut children: Vec<(usize, usize)> = Vec::new();
        let mut i = start;
        while i < end {
            let k = ((codes[i] >> shift) & 7) as u8;
            let cs = i;
            while i < end && ((codes[i] >> shift) & 7) as u8 == k {
                i += 1;
            }
            byte |= 1 << k;
            children.push((cs, i));
        }
        out.push((byte, parent));
        if level + 1 < depth {
            for (cs, ce) in children {
                queue.push_back((cs, ce, level + 1, byte));
            }
        }
    }
    out
}

/// The raw breadth-first occupancy bytes before entropy coding. Diagnostic
/// hook used to compare coded size against the stream's own entropy.
pub fn occupancy_stream(cloud: &PointCloud, bits: u8) -> Result<Vec<u8>, CodecError> {
    if cloud.is_empty() {
        return Err(CodecError::EmptyCloud);
    }
    validate_bits(bits)?;
    let (_, codes) = codes_internal(cloud, bits)?;
    Ok(build_occupancy(&codes, bits).into_iter().map(|(b, _)| b).collect())
}

pub fn encode(cloud: &PointCloud, cfg: &OctreeConfig) -> Result<CompressedFrame, CodecError> {
    if cloud.is_empty() {
        return Err(CodecError::EmptyCloud);
    }
    validate_bits(cfg.quantization_bits)?;
    if cloud.len() > u32::MAX as usize {
        return Err(CodecError::InvalidConfig(format!(
            "cloud has {} points, frame counter is 32-bit",
            cloud.len()
        )));
    }
    let bits = cfg.quantization_bits;
    let (cube, codes) = codes_internal(cloud, bits)?;
    let pairs = build_occupancy(&codes, bits);

    let mut payload = Vec::with_capacity(OCTREE_HEADER_LEN + pairs.len() / 2);
    for v in [cube.min.x, cube.min.y, cube.min.z, cube.max.x, cube.max.y, cube.max.z] {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    payload.push(bits);
    payload.extend_from_slice(&(codes.len() as u32).to_le_bytes());
    payload.push(cfg.context_mode.to_u8());

    let mut enc = ByteEncoder::new(cfg.context_mode.entropy_mode());
    for &(byte, parent) in &pairs {
        enc.encode(parent, byte);
    }
    payload.extend_from_slice(&enc.finish());

    Ok(CompressedFrame::new(
        CodecId::Octree,
        cloud.frame_id,
        cloud.timestamp_ns,
        cloud.len() as u32,
        payload,
    )?)
}

fn corrupt(msg: &str) -> CodecError {
    CodecError::CorruptPayload(msg.to_string())
}

pub fn decode(frame: &CompressedFrame) -> Result<PointCloud, CodecError> {
    if frame.codec_id != CodecId::Octree {
        return Err(CodecError::WrongCodec {
            expected: CodecId::Octree,
            got: frame.codec_id,
        });
    }
    frame.verify_crc()?;
    let payload = frame.payload();
    if payload.len() < OCTREE_HEADER_LEN {
        return Err(corrupt("payload shorter than header"));
    }
    let mut f = [0.0f64; 6];
    for (i, v) in f.iter_mut().enumerate() {
        *v = f64::from_le_bytes(payload[i * 8..i * 8 + 8].try_into().unwrap());
    }
    if f.iter().any(|v| !v.is_finite()) || f[3] < f[0] || f[4] < f[1] || f[5] < f[2] {
        return Err(corrupt("invalid bounding box"));
    }
    let cube = Aabb::new(Point3::new(f[0], f[1], f[2]), Point3::new(f[3], f[4], f[5]));
    let bits = payload[48];
    if bits == 0 || bits > OCTREE_MAX_BITS {
        return Err(corrupt("quantization bits out of range"));
    }
    let n_leaves = u32::from_le_bytes(payload[49..53].try_into().unwrap()) as usize;
    if n_leaves == 0 {
        return Err(corrupt("zero leaf count"));
    }
    if n_leaves > frame.n_points_original as usize {
        return Err(corrupt("leaf count exceeds original point count"));
    }
    let mode = OctreeContextMode::from_u8(payload[53]).ok_or_else(|| corrupt("unknown context mode"))?;

    let depth = bits;
    let mut dec = ByteDecoder::new(&payload[OCTREE_HEADER_LEN..], mode.entropy_mode());
    // header fields are untrusted; never size an allocation from them
    let mut leaves: Vec<u128> = Vec::with_capacity(n_leaves.min(1 << 20));
    let mut queue: VecDeque<(u128, u8, u8)> = VecDeque::new();
    queue.push_back((0, 0, 0));
    // A valid tree has at most n_leaves nodes per level; enforcing that
    // bounds work and memory on corrupt streams.
    let mut level_counts = vec![0usize; depth as usize + 1];
    while let Some((prefix, level, parent)) = queue.pop_front() {
        let byte = dec
            .decode(parent)
            .map_err(|_| corrupt("occupancy stream exhausted"))?;
        if byte == 0 {
            return Err(corrupt("internal node with no children"));
        }
        let shift = 3 * (depth - level - 1) as u32;
        for k in 0..8u8 {
            if byte & (1 << k) == 0 {
                continue;
            }
            let child = prefix | (k as u128) << shift;
            if level + 1 == depth {
                if leaves.len() == n_leaves {
                    return Err(corrupt("more leaves than declared"));
                }
                leaves.push(child);
            } else {
                let lc = &mut level_counts[level as usize + 1];
                *lc += 1;
                if *lc > n_leaves {
                    return Err(corrupt("node count exceeds leaf count"));
                }
                queue.push_back((child, level + 1, byte));
            }
        }
    }
    if leaves.len() != n_leaves {
        return Err(corrupt("fewer leaves than declared"));
    }

    let points: Vec<Point3> = leaves.iter().map(|&c| cell_center(&cube, bits, c)).collect();
    let cloud = PointCloud::new(points, None)
        .map_err(|e| corrupt(&format!("reconstructed points invalid: {e}")))?;
    Ok(cloud.with_frame(frame.frame_id, frame.timestamp_ns))
}
