//! Quality and rate metrics for comparing point clouds and compressed frames.
//!
//! Distortion metrics (Chamfer distance, point-to-point PSNR, point-to-plane
//! PSNR) use exact nearest-neighbor search so results are reproducible to the
//! last bit. Rate metrics are simple ratios over the compressed payload size.

mod kdtree;
mod normals;

pub use kdtree::SpatialIndex;
pub use normals::estimate_normals;

use crate::io::CompressedFrame;
use crate::types::PointCloud;
use std::fmt;
use thiserror::Error;

/// Neighborhood size used for normal estimation unless callers override it.
pub const DEFAULT_NORMAL_K: usize = 16;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("reference cloud has zero spatial extent; PSNR peak is undefined")]
    DegenerateReference,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("frame records zero original points; BPP is undefined")]
    ZeroPoints,
    #[error("raw size is zero; compression ratio is undefined")]
    ZeroRawSize,
    #[error("frame list is empty; bitrate is undefined")]
    EmptyFrameList,
    #[error("frame rate must be positive, got {0}")]
    NonPositiveFps(f64),
}

/// PSNR outcome. Zero error in either direction collapses the pooled MSE to
/// zero, which has no finite decibel value; that case is reported as
/// `Lossless` and compares greater than every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsnrValue {
    Db(f64),
    Lossless,
}

impl PsnrValue {
    pub fn db(&self) -> Option<f64> {
        match self {
            PsnrValue::Db(v) => Some(*v),
            PsnrValue::Lossless => None,
        }
    }

    pub fn is_lossless(&self) -> bool {
        matches!(self, PsnrValue::Lossless)
    }
}

impl PartialOrd for PsnrValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        match (self, other) {
            (PsnrValue::Lossless, PsnrValue::Lossless) => Some(Equal),
            (PsnrValue::Lossless, PsnrValue::Db(_)) => Some(Greater),
            (PsnrValue::Db(_), PsnrValue::Lossless) => Some(Less),
            (PsnrValue::Db(a), PsnrValue::Db(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for PsnrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsnrValue::Db(v) => write!(f, "{v:.4}"),
            PsnrValue::Lossless => write!(f, "LOSSLESS"),
        }
    }
}

/// Symmetric Chamfer distance in meters: the mean nearest-neighbor distance
/// from `a` into `b` and from `b` into `a`, each weighted 1/2.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let tree_a = SpatialIndex::build(a.points())?;
    let tree_b = SpatialIndex::build(b.points())?;
    let mut fwd = 0.0;
    for p in a.points() {
        fwd += tree_b.nearest(p).1;
    }
    let mut bwd = 0.0;
    for q in b.points() {
        bwd += tree_a.nearest(q).1;
    }
    Ok(0.5 * fwd / a.len() as f64 + 0.5 * bwd / b.len() as f64)
}

fn peak_sq(reference: &PointCloud) -> Result<f64, MetricsError> {
    let bbox = reference
        .bounding_box()
        .map_err(|_| MetricsError::EmptyCloud)?;
    let diag = bbox.diagonal();
    if diag == 0.0 {
        return Err(MetricsError::DegenerateReference);
    }
    Ok(diag * diag)
}

fn pooled_psnr(ps_sq: f64, mse_fwd: f64, mse_bwd: f64) -> PsnrValue {
    let mse = mse_fwd.min(mse_bwd);
    if mse == 0.0 {
        PsnrValue::Lossless
    } else {
        PsnrValue::Db(10.0 * (ps_sq / mse).log10())
    }
}

/// Point-to-point PSNR with the peak taken from the reference bounding-box
/// diagonal and the worse (larger-MSE) direction reported.
pub fn psnr_d1(reference: &PointCloud, candidate: &PointCloud) -> Result<PsnrValue, MetricsError> {
    if reference.is_empty() || candidate.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let ps_sq = peak_sq(reference)?;
    let tree_r = SpatialIndex::build(reference.points())?;
    let tree_c = SpatialIndex::build(candidate.points())?;
    let mut fwd = 0.0;
    for p in reference.points() {
        let (_, d) = tree_c.nearest(p);
        fwd += d * d;
    }
    fwd /= reference.len() as f64;
    let mut bwd = 0.0;
    for q in candidate.points() {
        let (_, d) = tree_r.nearest(q);
        bwd += d * d;
    }
    bwd /= candidate.len() as f64;
    Ok(pooled_psnr(ps_sq, fwd, bwd))
}

/// Point-to-plane PSNR: residuals are projected onto reference-surface
/// normals before squaring. Normals are estimated on the reference cloud
/// only (with `k` neighbors) and both directions use them, the backward
/// direction through each candidate point's matched reference point.
pub fn psnr_d2(
    reference: &PointCloud,
    candidate: &PointCloud,
    k: usize,
) -> Result<PsnrValue, MetricsError> {
    if reference.is_empty() || candidate.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let ps_sq = peak_sq(reference)?;
    let normals = estimate_normals(reference, k)?;
    let tree_r = SpatialIndex::build(reference.points())?;
    let tree_c = SpatialIndex::build(candidate.points())?;
    let r_pts = reference.points();
    let c_pts = candidate.points();
    let mut fwd = 0.0;
    for (i, p) in r_pts.iter().enumerate() {
        let (j, _) = tree_c.nearest(p);
        let q = c_pts[j];
        let n = normals[i];
        let e = (p.x - q.x) * n[0] + (p.y - q.y) * n[1] + (p.z - q.z) * n[2];
        fwd += e * e;
    }
    fwd /= r_pts.len() as f64;
    let mut bwd = 0.0;
    for q in c_pts {
        let (i, _) = tree_r.nearest(q);
        let p = r_pts[i];
        let n = normals[i];
        let e = (q.x - p.x) * n[0] + (q.y - p.y) * n[1] + (q.z - p.z) * n[2];
        bwd += e * e;
    }
    bwd /= c_pts.len() as f64;
    Ok(pooled_psnr(ps_sq, fwd, bwd))
}

/// Bits per point: compressed payload size over the original point count.
pub fn bpp(frame: &CompressedFrame) -> Result<f64, MetricsError> {
    if frame.n_points_original == 0 {
        return Err(MetricsError::ZeroPoints);
    }
    Ok(8.0 * frame.payload_len() as f64 / frame.n_points_original as f64)
}

/// Raw size over compressed payload size (e.g. 50.0 means 50x smaller).
pub fn compression_ratio(raw_bytes: u64, frame: &CompressedFrame) -> Result<f64, MetricsError> {
    if raw_bytes == 0 {
        return Err(MetricsError::ZeroRawSize);
    }
    Ok(raw_bytes as f64 / frame.payload_len() as f64)
}

/// Mean bits per second when `frames` are delivered at `fps` frames/s.
pub fn bitrate_bits_per_s(frames: &[CompressedFrame], fps: f64) -> Result<f64, MetricsError> {
    if frames.is_empty() {
        return Err(MetricsError::EmptyFrameList);
    }
    if fps.is_nan() || fps <= 0.0 {
        return Err(MetricsError::NonPositiveFps(fps));
    }
    let total: u64 = frames.iter().map(|f| f.payload_len() as u64).sum();
    Ok(8.0 * total as f64 * fps / frames.len() as f64)
}

/// Bundle of quality and rate numbers for one encode/decode round trip.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub psnr_d1: PsnrValue,
    pub psnr_d2: PsnrValue,
    pub chamfer_m: f64,
    pub bpp: f64,
    pub compression_ratio: f64,
    pub encode_ms: f64,
    pub decode_ms: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str =
        "bpp,psnr_d1_db,psnr_d2_db,chamfer_m,compression_ratio,encode_ms,decode_ms";

    /// One `key = value` line per field, for human-facing output.
    pub fn to_kv_text(&self) -> String {
        format!(
            "psnr_d1_db = {}\npsnr_d2_db = {}\nchamfer_m = {:.9}\nbpp = {:.6}\ncompression_ratio = {:.3}\nencode_ms = {:.3}\ndecode_ms = {:.3}\n",
            self.psnr_d1,
            self.psnr_d2,
            self.chamfer_m,
            self.bpp,
            self.compression_ratio,
            self.encode_ms,
            self.decode_ms
        )
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.6},{},{},{:.9},{:.3},{:.3},{:.3}",
            self.bpp,
            self.psnr_d1,
            self.psnr_d2,
            self.chamfer_m,
            self.compression_ratio,
            self.encode_ms,
            self.decode_ms
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::CodecId;
    use crate::scenegen::SplitMix64;
    use crate::types::Point3;

    fn cloud(pts: Vec<Point3>) -> PointCloud {
        PointCloud::new(pts, None).unwrap()
    }

    fn grid(n: usize, step: f64, z: f64, dx: f64) -> PointCloud {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(Point3::new(i as f64 * step + dx, j as f64 * step, z));
            }
        }
        cloud(pts)
    }

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = SplitMix64::new(seed);
        cloud(
            (0..n)
                .map(|_| {
                    Point3::new(
                        rng.uniform(-10.0, 10.0),
                        rng.uniform(-10.0, 10.0),
                        rng.uniform(-3.0, 3.0),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn chamfer_identical_is_zero() {
        let a = random_cloud(300, 1);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn chamfer_single_pair() {
        let a = cloud(vec![Point3::new(0.0, 0.0, 0.0)]);
        let b = cloud(vec![Point3::new(3.0, 0.0, 0.0)]);
        assert_eq!(chamfer(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn chamfer_asymmetric_sizes() {
        // forward mean 1.0, backward mean 1.5, halves sum to 1.25
        let a = cloud(vec![Point3::new(0.0, 0.0, 0.0)]);
        let b = cloud(vec![Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)]);
        assert!((chamfer(&a, &b).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn chamfer_is_symmetric() {
        let a = random_cloud(200, 2);
        let b = random_cloud(150, 3);
        let ab = chamfer(&a, &b).unwrap();
        let ba = chamfer(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn chamfer_rigid_motion_invariant() {
        let a = random_cloud(150, 4);
        let b = random_cloud(120, 5);
        let (s, c) = 0.7f64.sin_cos();
        let mv = |p: &Point3| {
            Point3::new(c * p.x - s * p.y + 4.0, s * p.x + c * p.y - 2.0, p.z + 1.5)
        };
        let am = cloud(a.points().iter().map(mv).collect());
        let bm = cloud(b.points().iter().map(mv).collect());
        let before = chamfer(&a, &b).unwrap();
        let after = chamfer(&am, &bm).unwrap();
        assert!((before - after).abs() < 1e-9, "{before} vs {after}");
    }

    #[test]
    fn psnr_d1_worked_example() {
        // peak = 2, pooled mse = 0.005, ratio = 800
        let a = cloud(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 2.0)]);
        let b = cloud(vec![Point3::new(0.0, 0.0, 0.1), Point3::new(0.0, 0.0, 2.0)]);
        let got = psnr_d1(&a, &b).unwrap().db().unwrap();
        let want = 10.0 * 800.0f64.log10();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn psnr_identical_is_lossless() {
        let a = random_cloud(100, 6);
        assert!(psnr_d1(&a, &a).unwrap().is_lossless());
    }

    #[test]
    fn psnr_lossless_when_one_direction_is_exact() {
        // candidate is a subset of the reference: backward MSE is zero
        let a = cloud(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
        ]);
        let b = cloud(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)]);
        assert!(psnr_d1(&a, &b).unwrap().is_lossless());
    }

    #[test]
    fn psnr_degenerate_reference_errors() {
        let a = cloud(vec![Point3::new(1.0, 1.0, 1.0); 3]);
        let b = random_cloud(10, 7);
        assert!(matches!(
            psnr_d1(&a, &b),
            Err(MetricsError::DegenerateReference)
        ));
    }

    #[test]
    fn psnr_d2_normal_shift_matches_closed_form() {
        // plane shifted along its own normal: projected mse is exactly eps^2
        let eps = 0.01;
        let a = grid(20, 0.1, 0.0, 0.0);
        let b = grid(20, 0.1, eps, 0.0);
        let ps = a.bounding_box().unwrap().diagonal();
        let want = 10.0 * (ps * ps / (eps * eps)).log10();
        let got = psnr_d2(&a, &b, 8).unwrap().db().unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn psnr_d2_tangential_shift_is_lossless() {
        // in-plane motion is invisible to point-to-plane error
        let a = grid(20, 0.1, 0.0, 0.0);
        let b = grid(20, 0.1, 0.0, 0.05);
        assert!(psnr_d2(&a, &b, 8).unwrap().is_lossless());
    }

    #[test]
    fn psnr_d2_not_below_d1_on_plane() {
        let a = grid(20, 0.1, 0.0, 0.0);
        let mut rng = SplitMix64::new(8);
        let b = cloud(
            a.points()
                .iter()
                .map(|p| Point3::new(p.x, p.y, p.z + rng.uniform(-0.02, 0.02)))
                .collect(),
        );
        let d1 = psnr_d1(&a, &b).unwrap();
        let d2 = psnr_d2(&a, &b, 8).unwrap();
        assert!(d2 >= d1, "{d2:?} vs {d1:?}");
    }

    #[test]
    fn psnr_value_ordering() {
        assert!(PsnrValue::Lossless > PsnrValue::Db(1e9));
        assert!(PsnrValue::Db(20.0) > PsnrValue::Db(10.0));
        assert_eq!(
            PsnrValue::Lossless.partial_cmp(&PsnrValue::Lossless),
            Some(std::cmp::Ordering::Equal)
        );
        assert_eq!(format!("{}", PsnrValue::Lossless), "LOSSLESS");
    }

    fn frame_of(payload_len: usize, n_points: u32) -> CompressedFrame {
        CompressedFrame::new(CodecId::Octree, 0, 0, n_points, vec![0xAB; payload_len]).unwrap()
    }

    #[test]
    fn bpp_worked_example() {
        let f = frame_of(107_520, 131_072);
        assert!((bpp(&f).unwrap() - 6.5625).abs() < 1e-12);
    }

    #[test]
    fn bpp_zero_points_errors() {
        let f = frame_of(10, 0);
        assert!(matches!(bpp(&f), Err(MetricsError::ZeroPoints)));
    }

    #[test]
    fn compression_ratio_worked_example() {
        let f = frame_of(107_520, 131_072);
        let got = compression_ratio(2_097_152, &f).unwrap();
        assert!((got - 2_097_152.0 / 107_520.0).abs() < 1e-12);
        assert!(matches!(
            compression_ratio(0, &f),
            Err(MetricsError::ZeroRawSize)
        ));
    }

    #[test]
    fn bitrate_worked_example() {
        let f = frame_of(105 * 1024, 131_072);
        let got = bitrate_bits_per_s(&[f], 10.0).unwrap();
        assert_eq!(got, 8_601_600.0);
        assert!(matches!(
            bitrate_bits_per_s(&[], 10.0),
            Err(MetricsError::EmptyFrameList)
        ));
        let f2 = frame_of(8, 1);
        assert!(matches!(
            bitrate_bits_per_s(&[f2], 0.0),
            Err(MetricsError::NonPositiveFps(_))
        ));
    }

    #[test]
    fn report_text_forms() {
        let r = MetricReport {
            psnr_d1: PsnrValue::Db(71.25),
            psnr_d2: PsnrValue::Lossless,
            chamfer_m: 0.00125,
            bpp: 6.5625,
            compression_ratio: 19.5,
            encode_ms: 12.0,
            decode_ms: 7.5,
        };
        let kv = r.to_kv_text();
        assert!(kv.contains("psnr_d1_db = 71.2500"));
        assert!(kv.contains("psnr_d2_db = LOSSLESS"));
        assert!(kv.contains("bpp = 6.562500"));
        assert_eq!(
            r.to_csv_row(),
            "6.562500,71.2500,LOSSLESS,0.001250000,19.500,12.000,7.500"
        );
        assert_eq!(
            MetricReport::CSV_HEADER.split(',').count(),
            r.to_csv_row().split(',').count()
        );
    }
}
