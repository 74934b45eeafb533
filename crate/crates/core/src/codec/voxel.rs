//! Voxel-grid codec: bin points into a regular grid, then code the occupancy
//! bitmask with run lengths through the shared order-0 byte coder.
//!
//! Payload layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       24    grid origin (3 x f64), the cloud's minimum corner
//! 24      8     voxel size in meters (f64)
//! 32      12    grid dims nx, ny, nz (3 x u32)
//! 44      1     assignment: 0 = binary, 1 = averaged, 2 = density
//! 45      ...   one entropy-coded stream (order-0 byte coder)
//! ```
//!
//! The entropy stream holds the run lengths of the x-fastest linearized
//! bitmask as LEB128 varints — alternating empty/occupied spans, starting
//! with the empty span before the first cell, ending exactly when the runs
//! sum to the cell count the dims imply — followed by the per-cell payload
//! in ascending cell order: nothing (binary), three u16 centroid fractions
//! plus a u8 intensity (averaged), or a varint point count (density).

use std::collections::HashMap;

use super::CodecError;
use crate::entropy::{ByteDecoder, ByteEncoder, ContextMode};
use crate::io::{CodecId, CompressedFrame};
use crate::types::{Point3, PointCloud};

pub const VOXEL_HEADER_LEN: usize = 45;

/// Centroid fractions are stored on a 2^16 grid inside their voxel, so the
/// positional error is at most `voxel_size / 2^17` per axis.
const CENTROID_LEVELS: f64 = 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelAssignment {
    /// Occupied cells only; reconstruction uses voxel centers.
    Binary,
    /// Mean position (as in-voxel fractions) and mean intensity per cell.
    Averaged,
    /// Point count per cell; reconstruction still uses voxel centers.
    Density,
}

impl VoxelAssignment {
    fn to_u8(self) -> u8 {
        match self {
            VoxelAssignment::Binary => 0,
            VoxelAssignment::Averaged => 1,
            VoxelAssignment::Density => 2,
        }
    }

    fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(VoxelAssignment::Binary),
            1 => Some(VoxelAssignment::Averaged),
            2 => Some(VoxelAssignment::Density),
            _ => None,
        }
    }
}

/// One occupied cell. `centroid_frac` is the position inside the voxel in
/// `[0, 1]` per axis (0.5 outside averaged mode); `count` is 1 outside
/// density mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelCell {
    pub linear: u64,
    pub count: u64,
    pub centroid_frac: [f64; 3],
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: Point3,
    pub voxel_size: f64,
    pub dims: [u32; 3],
    pub assignment: VoxelAssignment,
    pub frame_id: u64,
    pub timestamp_ns: u64,
    /// Size of the cloud the grid was built from; density counts sum to it.
    pub n_points_source: u64,
    cells: Vec<VoxelCell>,
}

impl VoxelGrid {
    /// Cells in ascending linear-index order.
    pub fn cells(&self) -> &[VoxelCell] {
        &self.cells
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.len()
    }

    pub fn total_cells(&self) -> u128 {
        self.dims.iter().map(|&d| d as u128).product()
    }

    pub fn linear_index(&self, ix: u32, iy: u32, iz: u32) -> u64 {
        let [nx, ny, _] = self.dims;
        ix as u64 + nx as u64 * (iy as u64 + ny as u64 * iz as u64)
    }

    pub fn cell_xyz(&self, linear: u64) -> [u32; 3] {
        let [nx, ny, _] = self.dims;
        let ix = linear % nx as u64;
        let rest = linear / nx as u64;
        [ix as u32, (rest % ny as u64) as u32, (rest / ny as u64) as u32]
    }

    /// World position a cell reconstructs to.
    pub fn cell_position(&self, cell: &VoxelCell) -> Point3 {
        let [ix, iy, iz] = self.cell_xyz(cell.linear);
        let f = cell.centroid_frac;
        Point3::new(
            self.origin.x + (ix as f64 + f[0]) * self.voxel_size,
            self.origin.y + (iy as f64 + f[1]) * self.voxel_size,
            self.origin.z + (iz as f64 + f[2]) * self.voxel_size,
        )
    }

    fn validate(&self) -> Result<(), CodecError> {
        let bad = |m: &str| Err(CodecError::InvalidConfig(format!("voxel grid: {m}")));
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return Err(CodecError::NonPositiveVoxelSize(self.voxel_size));
        }
        if !self.origin.is_finite() {
            return bad("non-finite origin");
        }
        if self.dims.contains(&0) {
            return bad("zero-sized dimension");
        }
        let total = self.total_cells();
        if total > u64::MAX as u128 {
            return bad("grid exceeds the 64-bit index space");
        }
        let mut prev: Option<u64> = None;
        for c in &self.cells {
            if (c.linear as u128) >= total {
                return bad("cell index outside the grid");
            }
            if prev.is_some_and(|p| p >= c.linear) {
                return bad("cells not in strictly ascending order");
            }
            prev = Some(c.linear);
            if c.count == 0 {
                return bad("cell with zero count");
            }
            if c.centroid_frac.iter().any(|f| !(0.0..=1.0).contains(f)) {
                return bad("centroid fraction outside [0, 1]");
            }
            if !(0.0..=1.0).contains(&c.intensity) {
                return bad("intensity outside [0, 1]");
            }
        }
        // every occupied cell holds at least one source point
        if self.n_points_source < self.cells.len() as u64 {
            return bad("source point count below the occupied-cell count");
        }
        Ok(())
    }
}

fn corrupt(msg: &str) -> CodecError {
    CodecError::CorruptPayload(msg.to_string())
}

/// Bin a cloud into a grid of `voxel_size` cells anchored at the cloud's
/// minimum corner. The grid spans the bounding box exactly: per-axis cell
/// count is `ceil(extent / voxel_size)`, at least 1.
pub fn voxelize(
    cloud: &PointCloud,
    voxel_size: f64,
    assignment: VoxelAssignment,
) -> Result<VoxelGrid, CodecError> {
    if cloud.is_empty() {
        return Err(CodecError::EmptyCloud);
    }
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(CodecError::NonPositiveVoxelSize(voxel_size));
    }
    let bbox = cloud.bounding_box().map_err(|_| CodecError::EmptyCloud)?;
    let extent = bbox.extent();
    let mut dims = [0u32; 3];
    for a in 0..3 {
        let n = (extent[a] / voxel_size).ceil().max(1.0);
        if n > u32::MAX as f64 {
            return Err(CodecError::InvalidConfig(format!(
                "voxel size {voxel_size} is too small for an extent of {} m",
                extent[a]
            )));
        }
        dims[a] = n as u32;
    }

    struct Accum {
        count: u64,
        frac_sum: [f64; 3],
        intensity_sum: f64,
    }
    let mut map: HashMap<u64, Accum> = HashMap::new();
    let nx = dims[0] as u64;
    let ny = dims[1] as u64;
    for (i, p) in cloud.points().iter().enumerate() {
        let mut idx = [0u64; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let rel = (p.coord(a) - bbox.min.coord(a)) / voxel_size;
            // points on the max face fall into the last cell
            let cell = (rel.floor() as u64).min(dims[a] as u64 - 1);
            idx[a] = cell;
            frac[a] = rel - cell as f64;
        }
        let linear = idx[0] + nx * (idx[1] + ny * idx[2]);
        let intensity = cloud.intensity().map_or(0.0, |v| v[i]);
        let acc = map.entry(linear).or_insert(Accum {
            count: 0,
            frac_sum: [0.0; 3],
            intensity_sum: 0.0,
        });
        acc.count += 1;
        for (sum, f) in acc.frac_sum.iter_mut().zip(frac) {
            *sum += f;
        }
        acc.intensity_sum += intensity;
    }

    let mut cells: Vec<VoxelCell> = map
        .into_iter()
        .map(|(linear, acc)| {
            let n = acc.count as f64;
            match assignment {
                VoxelAssignment::Binary => VoxelCell {
                    linear,
                    count: 1,
                    centroid_frac: [0.5; 3],
                    intensity: 0.0,
                },
                VoxelAssignment::Averaged => VoxelCell {
                    linear,
                    count: 1,
                    centroid_frac: [
                        acc.frac_sum[0] / n,
                        acc.frac_sum[1] / n,
                        acc.frac_sum[2] / n,
                    ],
                    intensity: acc.intensity_sum / n,
                },
                VoxelAssignment::Density => VoxelCell {
                    linear,
                    count: acc.count,
                    centroid_frac: [0.5; 3],
                    intensity: 0.0,
                },
            }
        })
        .collect();
    cells.sort_unstable_by_key(|c| c.linear);

    Ok(VoxelGrid {
        origin: bbox.min,
        voxel_size,
        dims,
        assignment,
        frame_id: cloud.frame_id,
        timestamp_ns: cloud.timestamp_ns,
        n_points_source: cloud.len() as u64,
        cells,
    })
}

/// Reconstruct one point per occupied cell: the stored centroid in averaged
/// mode, the cell center otherwise. Intensity is attached only in averaged
/// mode. Expects a grid from `voxelize` or `decode`.
pub fn devoxelize(grid: &VoxelGrid) -> PointCloud {
    let points: Vec<Point3> = grid.cells.iter().map(|c| grid.cell_position(c)).collect();
    let intensity = match grid.assignment {
        VoxelAssignment::Averaged => Some(grid.cells.iter().map(|c| c.intensity).collect()),
        _ => None,
    };
    PointCloud::new(points, intensity)
        .expect("a validated grid reconstructs to a valid cloud")
        .with_frame(grid.frame_id, grid.timestamp_ns)
}

fn push_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7F) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            break;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint_coded(dec: &mut ByteDecoder) -> Result<u64, CodecError> {
    let mut v = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = dec
            .decode(0)
            .map_err(|_| corrupt("entropy stream ended inside a varint"))?;
        if shift == 63 && byte > 1 {
            return Err(corrupt("varint overflows 64 bits"));
        }
        v |= ((byte & 0x7F) as u64) << shift;
        if byte & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
        if shift > 63 {
            return Err(corrupt("varint overflows 64 bits"));
        }
    }
}

pub fn encode(grid: &VoxelGrid) -> Result<CompressedFrame, CodecError> {
    grid.validate()?;
    if grid.n_points_source > u32::MAX as u64 {
        return Err(CodecError::InvalidConfig(
            "source point count exceeds the frame header field".into(),
        ));
    }

    let mut payload = Vec::with_capacity(VOXEL_HEADER_LEN + 16 + 8 * grid.cells.len());
    payload.extend_from_slice(&grid.origin.x.to_le_bytes());
    payload.extend_from_slice(&grid.origin.y.to_le_bytes());
    payload.extend_from_slice(&grid.origin.z.to_le_bytes());
    payload.extend_from_slice(&grid.voxel_size.to_le_bytes());
    for d in grid.dims {
        payload.extend_from_slice(&d.to_le_bytes());
    }
    payload.push(grid.assignment.to_u8());

    // runs first, then the per-cell payload, all in one order-0 stream
    let total = grid.total_cells() as u64;
    let mut body = Vec::new();
    let mut pos = 0u64;
    let mut i = 0;
    while i < grid.cells.len() {
        let start = grid.cells[i].linear;
        let mut end = i + 1;
        while end < grid.cells.len() && grid.cells[end].linear == grid.cells[end - 1].linear + 1 {
            end += 1;
        }
        push_varint(&mut body, start - pos);
        push_varint(&mut body, (end - i) as u64);
        pos = start + (end - i) as u64;
        i = end;
    }
    if pos < total {
        // trailing empty span, so the runs always sum to the grid size
        push_varint(&mut body, total - pos);
    }
    match grid.assignment {
        VoxelAssignment::Binary => {}
        VoxelAssignment::Averaged => {
            for c in &grid.cells {
                for f in c.centroid_frac {
                    let q = ((f * CENTROID_LEVELS) as u64).min(65535) as u16;
                    body.extend_from_slice(&q.to_le_bytes());
                }
                body.push((c.intensity * 255.0).round() as u8);
            }
        }
        VoxelAssignment::Density => {
            for c in &grid.cells {
                push_varint(&mut body, c.count);
            }
        }
    }
    let mut enc = ByteEncoder::new(ContextMode::Order0);
    for &b in &body {
        enc.encode(0, b);
    }
    payload.extend_from_slice(&enc.finish());

    Ok(CompressedFrame::new(
        CodecId::Voxel,
        grid.frame_id,
        grid.timestamp_ns,
        grid.n_points_source as u32,
        payload,
    )?)
}

pub fn decode(frame: &CompressedFrame) -> Result<VoxelGrid, CodecError> {
    if frame.codec_id != CodecId::Voxel {
        return Err(CodecError::WrongCodec {
            expected: CodecId::Voxel,
            got: frame.codec_id,
        });
    }
    frame.verify_crc()?;
    let payload = frame.payload();
    if payload.len() < VOXEL_HEADER_LEN + 1 {
        return Err(corrupt("payload shorter than header"));
    }
    let f64_at = |o: usize| f64::from_le_bytes(payload[o..o + 8].try_into().unwrap());
    let origin = Point3::new(f64_at(0), f64_at(8), f64_at(16));
    let voxel_size = f64_at(24);
    let mut dims = [0u32; 3];
    for a in 0..3 {
        dims[a] = u32::from_le_bytes(payload[32 + 4 * a..36 + 4 * a].try_into().unwrap());
    }
    let assignment =
        VoxelAssignment::from_u8(payload[44]).ok_or_else(|| corrupt("unknown assignment byte"))?;
    if !origin.is_finite() {
        return Err(corrupt("non-finite origin"));
    }
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(corrupt("non-positive voxel size"));
    }
    if dims.contains(&0) {
        return Err(corrupt("zero-sized dimension"));
    }
    let total: u128 = dims.iter().map(|&d| d as u128).product();
    if total > u64::MAX as u128 {
        return Err(corrupt("grid exceeds the 64-bit index space"));
    }
    let total = total as u64;

    let mut dec = ByteDecoder::new(&payload[VOXEL_HEADER_LEN..], ContextMode::Order0);

    // header fields are untrusted; never size an allocation from them
    let cell_budget = frame.n_points_original as u64;
    let mut cells: Vec<VoxelCell> =
        Vec::with_capacity((cell_budget as usize).min(1 << 20));
    let mut pos = 0u64;
    let mut first = true;
    while pos < total {
        let zero_run = read_varint_coded(&mut dec)?;
        if !first && zero_run == 0 {
            return Err(corrupt("degenerate run length"));
        }
        first = false;
        pos = pos
            .checked_add(zero_run)
            .ok_or_else(|| corrupt("run overflows the index space"))?;
        if pos > total {
            return Err(corrupt("runs exceed the grid"));
        }
        if pos == total {
            break;
        }
        let one_run = read_varint_coded(&mut dec)?;
        if one_run == 0 {
            return Err(corrupt("degenerate run length"));
        }
        let end = pos
            .checked_add(one_run)
            .ok_or_else(|| corrupt("run overflows the index space"))?;
        if end > total {
            return Err(corrupt("runs exceed the grid"));
        }
        if cells.len() as u64 + one_run > cell_budget {
            return Err(corrupt("more occupied cells than source points"));
        }
        for linear in pos..end {
            cells.push(VoxelCell {
                linear,
                count: 1,
                centroid_frac: [0.5; 3],
                intensity: 0.0,
            });
        }
        pos = end;
    }

    match assignment {
        VoxelAssignment::Binary => {}
        VoxelAssignment::Averaged => {
            for c in &mut cells {
                let mut frac = [0.0f64; 3];
                for f in &mut frac {
                    let lo = dec.decode(0).map_err(|_| corrupt("truncated centroid"))?;
                    let hi = dec.decode(0).map_err(|_| corrupt("truncated centroid"))?;
                    let q = u16::from_le_bytes([lo, hi]);
                    *f = (q as f64 + 0.5) / CENTROID_LEVELS;
                }
                c.centroid_frac = frac;
                let it = dec.decode(0).map_err(|_| corrupt("truncated intensity"))?;
                c.intensity = it as f64 / 255.0;
            }
        }
        VoxelAssignment::Density => {
            for c in &mut cells {
                let count = read_varint_coded(&mut dec)?;
                if count == 0 {
                    return Err(corrupt("zero density count"));
                }
                c.count = count;
            }
        }
    }

    Ok(VoxelGrid {
        origin,
        voxel_size,
        dims,
        assignment,
        frame_id: frame.frame_id,
        timestamp_ns: frame.timestamp_ns,
        n_points_source: frame.n_points_original as u64,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::chamfer;
    use crate::scenegen::SplitMix64;
    use std::collections::HashSet;

    fn random_cloud(seed: u64, n: usize, span: f64) -> PointCloud {
        let mut rng = SplitMix64::new(seed);
        let pts = (0..n)
            .map(|_| {
                Point3::new(
                    rng.next_f64() * span,
                    rng.next_f64() * span,
                    rng.next_f64() * span * 0.3,
                )
            })
            .collect();
        let ints = (0..n).map(|_| rng.next_f64()).collect();
        PointCloud::new(pts, Some(ints)).unwrap()
    }

    #[test]
    fn two_points_share_or_split_cells_by_size() {
        let cloud = PointCloud::new(
            vec![Point3::new(0.1, 0.1, 0.1), Point3::new(0.9, 0.9, 0.9)],
            None,
        )
        .unwrap();
        let g = voxelize(&cloud, 1.0, VoxelAssignment::Density).unwrap();
        assert_eq!(g.occupied_count(), 1);
        assert_eq!(g.cells()[0].count, 2);
        let g = voxelize(&cloud, 0.5, VoxelAssignment::Density).unwrap();
        assert_eq!(g.occupied_count(), 2);
        assert!(g.cells().iter().all(|c| c.count == 1));
    }

    #[test]
    fn occupied_count_matches_hash_set_oracle() {
        let cloud = random_cloud(7, 10_000, 30.0);
        for v in [0.25, 0.8, 2.0] {
            let g = voxelize(&cloud, v, VoxelAssignment::Binary).unwrap();
            let bbox = cloud.bounding_box().unwrap();
            let mut seen: HashSet<(u64, u64, u64)> = HashSet::new();
            for p in cloud.points() {
                let cell = |c: f64, min: f64, dim: u32| {
                    (((c - min) / v).floor() as u64).min(dim as u64 - 1)
                };
                seen.insert((
                    cell(p.x, bbox.min.x, g.dims[0]),
                    cell(p.y, bbox.min.y, g.dims[1]),
                    cell(p.z, bbox.min.z, g.dims[2]),
                ));
            }
            assert_eq!(g.occupied_count(), seen.len());
        }
    }

    #[test]
    fn grid_covers_the_bounding_box_exactly() {
        let cloud = random_cloud(11, 500, 10.0);
        let v = 0.7;
        let g = voxelize(&cloud, v, VoxelAssignment::Binary).unwrap();
        let ext = cloud.bounding_box().unwrap().extent();
        for (dim, e) in g.dims.iter().zip(ext) {
            assert_eq!(*dim as f64, (e / v).ceil().max(1.0));
        }
        let total = g.total_cells();
        assert!(g.cells().iter().all(|c| (c.linear as u128) < total));
    }

    #[test]
    fn single_voxel_reconstructs_to_center() {
        let cloud = PointCloud::new(
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)],
            None,
        )
        .unwrap();
        let g = voxelize(&cloud, 1.0, VoxelAssignment::Binary).unwrap();
        let back = devoxelize(&g);
        assert_eq!(back.points(), &[Point3::new(0.5, 0.5, 0.5)]);
        assert!(back.intensity().is_none());
    }

    #[test]
    fn averaged_reconstruction_is_the_stored_centroid() {
        let cloud = random_cloud(3, 400, 5.0);
        let g = voxelize(&cloud, 0.5, VoxelAssignment::Averaged).unwrap();
        let back = devoxelize(&g);
        assert_eq!(back.len(), g.occupied_count());
        for (p, c) in back.points().iter().zip(g.cells()) {
            assert_eq!(*p, g.cell_position(c));
        }
        let ints = back.intensity().unwrap();
        for (it, c) in ints.iter().zip(g.cells()) {
            assert_eq!(*it, c.intensity);
        }
    }

    #[test]
    fn averaged_centroid_matches_hand_mean() {
        let pts = vec![
            Point3::new(0.2, 0.2, 0.2),
            Point3::new(0.4, 0.2, 0.2),
            Point3::new(0.6, 0.8, 0.5),
        ];
        let cloud = PointCloud::new(pts, Some(vec![0.0, 0.5, 1.0])).unwrap();
        let g = voxelize(&cloud, 2.0, VoxelAssignment::Averaged).unwrap();
        assert_eq!(g.occupied_count(), 1);
        let c = g.cells()[0];
        // fractions are relative to the origin (0.2, 0.2, 0.2) and v = 2
        assert!((c.centroid_frac[0] - (0.0 + 0.1 + 0.2) / 3.0).abs() < 1e-12);
        assert!((c.centroid_frac[1] - 0.1).abs() < 1e-12);
        assert!((c.intensity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binary_chamfer_stays_under_half_cell_diagonal() {
        for (seed, v) in [(1u64, 0.2), (2, 0.5), (3, 1.0)] {
            let cloud = random_cloud(seed, 2_000, 12.0);
            let g = voxelize(&cloud, v, VoxelAssignment::Binary).unwrap();
            let back = devoxelize(&g);
            let bound = v * 3.0f64.sqrt() / 2.0 * (1.0 + 1e-12);
            assert!(chamfer(&cloud, &back).unwrap() <= bound);
            // the same bound holds pointwise, not just on average
            for p in cloud.points() {
                let best = back
                    .points()
                    .iter()
                    .map(|q| p.distance(q))
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= bound);
            }
        }
    }

    #[test]
    fn occupancy_is_permutation_invariant() {
        let cloud = random_cloud(5, 1_000, 8.0);
        let mut rev_pts: Vec<Point3> = cloud.points().to_vec();
        rev_pts.reverse();
        let mut rev_int = cloud.intensity().unwrap().to_vec();
        rev_int.reverse();
        let shuffled = PointCloud::new(rev_pts, Some(rev_int)).unwrap();
        let a = voxelize(&cloud, 0.4, VoxelAssignment::Binary).unwrap();
        let b = voxelize(&shuffled, 0.4, VoxelAssignment::Binary).unwrap();
        assert_eq!(a, b);
        let a = voxelize(&cloud, 0.4, VoxelAssignment::Averaged).unwrap();
        let b = voxelize(&shuffled, 0.4, VoxelAssignment::Averaged).unwrap();
        for (ca, cb) in a.cells().iter().zip(b.cells()) {
            assert_eq!(ca.linear, cb.linear);
            for k in 0..3 {
                assert!((ca.centroid_frac[k] - cb.centroid_frac[k]).abs() < 1e-9);
            }
            assert!((ca.intensity - cb.intensity).abs() < 1e-9);
        }
    }

    #[test]
    fn halving_voxel_size_never_loses_cells() {
        for seed in 0..5u64 {
            let cloud = random_cloud(seed, 800, 6.0);
            let mut v = 1.6;
            let mut prev = 0usize;
            for _ in 0..4 {
                let g = voxelize(&cloud, v, VoxelAssignment::Binary).unwrap();
                assert!(g.occupied_count() >= prev);
                prev = g.occupied_count();
                v /= 2.0;
            }
        }
    }

    #[test]
    fn density_counts_sum_to_the_cloud_size() {
        let cloud = random_cloud(9, 3_000, 4.0);
        let g = voxelize(&cloud, 0.3, VoxelAssignment::Density).unwrap();
        let total: u64 = g.cells().iter().map(|c| c.count).sum();
        assert_eq!(total, cloud.len() as u64);
        assert_eq!(g.n_points_source, cloud.len() as u64);
    }

    #[test]
    fn round_trip_is_exact_for_all_modes() {
        let cloud = random_cloud(13, 2_500, 9.0).with_frame(42, 777);
        for mode in [
            VoxelAssignment::Binary,
            VoxelAssignment::Averaged,
            VoxelAssignment::Density,
        ] {
            let g = voxelize(&cloud, 0.35, mode).unwrap();
            let frame = encode(&g).unwrap();
            assert_eq!(frame.frame_id, 42);
            let back = decode(&frame).unwrap();
            match mode {
                VoxelAssignment::Averaged => {
                    // encode quantizes centroids; the quantized form is a
                    // fixed point, so a second trip is bit-identical
                    assert_eq!(back.dims, g.dims);
                    assert_eq!(back.occupied_count(), g.occupied_count());
                    for (ca, cb) in g.cells().iter().zip(back.cells()) {
                        assert_eq!(ca.linear, cb.linear);
                        for k in 0..3 {
                            assert!(
                                (ca.centroid_frac[k] - cb.centroid_frac[k]).abs()
                                    <= 0.5 / CENTROID_LEVELS
                            );
                        }
                        assert!((ca.intensity - cb.intensity).abs() <= 0.5 / 255.0);
                    }
                    let again = decode(&encode(&back).unwrap()).unwrap();
                    assert_eq!(again, back);
                }
                _ => assert_eq!(back, g),
            }
        }
    }

    #[test]
    fn full_4x4x4_grid_beats_the_raw_bitmask() {
        let mut pts = Vec::new();
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    pts.push(Point3::new(
                        x as f64 + 0.5,
                        y as f64 + 0.5,
                        z as f64 + 0.5,
                    ));
                }
            }
        }
        pts.push(Point3::new(0.0, 0.0, 0.0));
        pts.push(Point3::new(4.0, 4.0, 4.0));
        let cloud = PointCloud::new(pts, None).unwrap();
        let g = voxelize(&cloud, 1.0, VoxelAssignment::Binary).unwrap();
        assert_eq!(g.dims, [4, 4, 4]);
        assert_eq!(g.occupied_count(), 64);
        let frame = encode(&g).unwrap();
        // one (0, 64) run must beat the 64-bit raw mask
        assert!(
            frame.payload_len() < VOXEL_HEADER_LEN + 8,
            "payload {}",
            frame.payload_len()
        );
        assert_eq!(decode(&frame).unwrap(), g);
    }

    #[test]
    fn voxelize_input_errors() {
        let empty = PointCloud::new(vec![], None).unwrap();
        assert!(matches!(
            voxelize(&empty, 1.0, VoxelAssignment::Binary),
            Err(CodecError::EmptyCloud)
        ));
        let cloud = random_cloud(1, 10, 1.0);
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                voxelize(&cloud, bad, VoxelAssignment::Binary),
                Err(CodecError::NonPositiveVoxelSize(_))
            ));
        }
    }

    #[test]
    fn wrong_codec_id_is_rejected() {
        let cloud = random_cloud(2, 50, 3.0);
        let g = voxelize(&cloud, 0.5, VoxelAssignment::Binary).unwrap();
        let good = encode(&g).unwrap();
        let relabeled =
            CompressedFrame::new(CodecId::Range, 0, 0, 50, good.payload().to_vec()).unwrap();
        assert!(matches!(
            decode(&relabeled),
            Err(CodecError::WrongCodec { .. })
        ));
    }

    #[test]
    fn corrupt_payloads_error_not_panic() {
        let cloud = random_cloud(4, 300, 5.0);
        let g = voxelize(&cloud, 0.5, VoxelAssignment::Density).unwrap();
        let good = encode(&g).unwrap();
        let remade = |f: &mut dyn FnMut(&mut Vec<u8>)| {
            let mut p = good.payload().to_vec();
            f(&mut p);
            decode(&CompressedFrame::new(CodecId::Voxel, 0, 0, 300, p).unwrap())
        };
        assert!(remade(&mut |p| p[44] = 3).is_err());
        assert!(remade(&mut |p| p[24..32].copy_from_slice(&0.0f64.to_le_bytes())).is_err());
        assert!(remade(&mut |p| p[24..32].copy_from_slice(&f64::NAN.to_le_bytes())).is_err());
        assert!(remade(&mut |p| p[32..36].copy_from_slice(&0u32.to_le_bytes())).is_err());
        assert!(remade(&mut |p| p.truncate(VOXEL_HEADER_LEN + 1)).is_err());
        // a frame claiming fewer source points than occupied cells
        let starved =
            CompressedFrame::new(CodecId::Voxel, 0, 0, 1, good.payload().to_vec()).unwrap();
        assert!(matches!(
            decode(&starved),
            Err(CodecError::CorruptPayload(_))
        ));
        let mut rng = SplitMix64::new(17);
        for _ in 0..200 {
            let len = 1 + (rng.next_u64() % 200) as usize;
            let junk: Vec<u8> = (0..len).map(|_| rng.next_u64() as u8).collect();
            let frame = CompressedFrame::new(CodecId::Voxel, 0, 0, 10, junk).unwrap();
            assert!(decode(&frame).is_err());
        }
    }

    #[test]
    fn forged_giant_grids_are_rejected_cheaply() {
        // dims near u32::MAX with a huge occupancy claim must error without
        // allocating the claimed space
        let mut p = Vec::new();
        for _ in 0..3 {
            p.extend_from_slice(&0.0f64.to_le_bytes());
        }
        p.extend_from_slice(&1.0f64.to_le_bytes());
        for _ in 0..3 {
            p.extend_from_slice(&u32::MAX.to_le_bytes());
        }
        p.push(0);
        p.extend_from_slice(&[0u8; 8]);
        let frame = CompressedFrame::new(CodecId::Voxel, 0, 0, 10, p).unwrap();
        assert!(decode(&frame).is_err());
    }
}
