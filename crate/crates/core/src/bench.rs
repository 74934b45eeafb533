//! Rate-distortion sweeps: run codecs over frames at several settings,
//! collect rate/distortion/timing per setting, integrate curves, and export
//! CSV or SVG artifacts.
//!
//! Timing methodology: monotonic clock around the codec calls only, one
//! discarded warm-up pass, then the median of five repetitions per frame,
//! and the median over frames. Repetitions run serially on one thread.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::codec::{CodecConfig, CodecError};
use crate::io::CodecId;
use crate::metrics::{self, MetricsError, PsnrValue, DEFAULT_NORMAL_K};
use crate::types::PointCloud;

pub const SVG_WIDTH: u32 = 800;
pub const SVG_HEIGHT: u32 = 600;

/// Repetitions per frame when timing; the median is kept.
const TIMING_REPS: usize = 5;

pub const CSV_HEADER: &str = "codec,setting,bpp,psnr_d1_db,psnr_d2_db,chamfer_m,encode_ms,decode_ms";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("a sweep needs at least one frame")]
    EmptyFrames,
    #[error("a sweep needs at least two settings")]
    TooFewSettings,
    #[error("settings mix codecs: {0} and {1}")]
    MixedCodecs(String, String),
    #[error("settings {0:?} and {1:?} produced the same bpp; the curve needs distinct rates")]
    DuplicateBpp(String, String),
    #[error("curve contains a non-finite value for setting {0:?}")]
    NonFiniteMetric(String),
    #[error("a curve integral needs at least two points")]
    TooFewPoints,
    #[error("curve contains a lossless point, which has no finite psnr to integrate")]
    LosslessInCurve,
    #[error("curve has no points to export")]
    EmptyCurve,
    #[error("codec failed at setting {setting:?}: {source}")]
    Codec {
        setting: String,
        #[source]
        source: CodecError,
    },
    #[error("metrics failed at setting {setting:?}: {source}")]
    Metric {
        setting: String,
        #[source]
        source: MetricsError,
    },
}

/// One rate point of a sweep: a setting's averages over all frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    pub setting: String,
    pub bpp: f64,
    pub psnr_d1: PsnrValue,
    pub psnr_d2: PsnrValue,
    pub chamfer_m: f64,
    pub encode_ms: f64,
    pub decode_ms: f64,
}

/// A rate-distortion curve for one codec, points sorted by bpp ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    pub codec: CodecId,
    points: Vec<RdPoint>,
}

/// Which distortion axis of a curve to integrate or plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsnrAxis {
    D1,
    D2,
}

impl RdCurve {
    /// Build a curve from unordered points; sorts by bpp and checks the
    /// curve invariants (finite fields, strictly increasing bpp).
    pub fn from_points(codec: CodecId, mut points: Vec<RdPoint>) -> Result<RdCurve, BenchError> {
        points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        for p in &points {
            let finite = p.bpp.is_finite()
                && p.chamfer_m.is_finite()
                && p.encode_ms.is_finite()
                && p.decode_ms.is_finite()
                && p.psnr_d1.db().is_none_or(f64::is_finite)
                && p.psnr_d2.db().is_none_or(f64::is_finite);
            if !finite {
                return Err(BenchError::NonFiniteMetric(p.setting.clone()));
            }
        }
        for w in points.windows(2) {
            if w[0].bpp >= w[1].bpp {
                return Err(BenchError::DuplicateBpp(
                    w[0].setting.clone(),
                    w[1].setting.clone(),
                ));
            }
        }
        Ok(RdCurve { codec, points })
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Order-independent mean: summed in sorted order so permuting the inputs
/// cannot change the rounding.
fn mean_sorted(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().sum::<f64>() / n
}

/// Exact frames are excluded from the dB mean; the result is `Lossless`
/// only when every frame reconstructs exactly.
fn mean_psnr(values: &[PsnrValue]) -> PsnrValue {
    let dbs: Vec<f64> = values.iter().filter_map(|p| p.db()).collect();
    if dbs.is_empty() {
        PsnrValue::Lossless
    } else {
        PsnrValue::Db(mean_sorted(dbs))
    }
}

/// Encode and decode every frame at every setting, producing one curve
/// point per setting: rate and distortion averaged over frames, timings as
/// medians. All settings must drive the same codec.
pub fn run_sweep(frames: &[PointCloud], settings: &[CodecConfig]) -> Result<RdCurve, BenchError> {
    if frames.is_empty() {
        return Err(BenchError::EmptyFrames);
    }
    if settings.len() < 2 {
        return Err(BenchError::TooFewSettings);
    }
    let codec = settings[0].codec_id();
    for s in settings {
        if s.codec_id() != codec {
            return Err(BenchError::MixedCodecs(
                settings[0].label(),
                s.label(),
            ));
        }
    }

    let mut points = Vec::with_capacity(settings.len());
    for setting in settings {
        let label = setting.label();
        let at_codec = |source| BenchError::Codec {
            setting: label.clone(),
            source,
        };
        let at_metric = |source| BenchError::Metric {
            setting: label.clone(),
            source,
        };

        let mut bpps = Vec::with_capacity(frames.len());
        let mut d1s = Vec::with_capacity(frames.len());
        let mut d2s = Vec::with_capacity(frames.len());
        let mut chamfers = Vec::with_capacity(frames.len());
        let mut enc_times = Vec::with_capacity(frames.len());
        let mut dec_times = Vec::with_capacity(frames.len());

        for cloud in frames {
            // warm-up pass, also the frame used for metrics
            let frame = setting.encode_cloud(cloud).map_err(at_codec)?;
            let decoded = setting.decode_cloud(&frame).map_err(at_codec)?;

            let mut enc_reps = Vec::with_capacity(TIMING_REPS);
            let mut dec_reps = Vec::with_capacity(TIMING_REPS);
            for _ in 0..TIMING_REPS {
                let t = Instant::now();
                let f = setting.encode_cloud(cloud).map_err(at_codec)?;
                enc_reps.push(t.elapsed().as_secs_f64() * 1e3);
                let t = Instant::now();
                let d = setting.decode_cloud(&f).map_err(at_codec)?;
                dec_reps.push(t.elapsed().as_secs_f64() * 1e3);
                std::hint::black_box(d);
            }
            enc_times.push(median(enc_reps));
            dec_times.push(median(dec_reps));

            bpps.push(metrics::bpp(&frame).map_err(at_metric)?);
            d1s.push(metrics::psnr_d1(cloud, &decoded).map_err(at_metric)?);
            d2s.push(metrics::psnr_d2(cloud, &decoded, DEFAULT_NORMAL_K).map_err(at_metric)?);
            chamfers.push(metrics::chamfer(cloud, &decoded).map_err(at_metric)?);
        }

        points.push(RdPoint {
            setting: label,
            bpp: mean_sorted(bpps),
            psnr_d1: mean_psnr(&d1s),
            psnr_d2: mean_psnr(&d2s),
            chamfer_m: mean_sorted(chamfers),
            encode_ms: median(enc_times),
            decode_ms: median(dec_times),
        });
    }
    RdCurve::from_points(codec, points)
}

/// BPP-averaged PSNR: the trapezoidal integral of PSNR over BPP divided by
/// the BPP span.
pub fn auc(curve: &RdCurve, axis: PsnrAxis) -> Result<f64, BenchError> {
    if curve.points.len() < 2 {
        return Err(BenchError::TooFewPoints);
    }
    let psnr_of = |p: &RdPoint| match axis {
        PsnrAxis::D1 => p.psnr_d1,
        PsnrAxis::D2 => p.psnr_d2,
    };
    let mut ys = Vec::with_capacity(curve.points.len());
    for p in &curve.points {
        ys.push(psnr_of(p).db().ok_or(BenchError::LosslessInCurve)?);
    }
    let mut area = 0.0;
    for (w, y) in curve.points.windows(2).zip(ys.windows(2)) {
        area += (w[1].bpp - w[0].bpp) * 0.5 * (y[0] + y[1]);
    }
    let span = curve.points.last().unwrap().bpp - curve.points[0].bpp;
    Ok(area / span)
}

/// Deterministic CSV: a `#` metadata line, the header, one row per point.
/// Timing columns are the only fields that vary between identical runs.
pub fn export_csv(curve: &RdCurve) -> Result<String, BenchError> {
    if curve.points.is_empty() {
        return Err(BenchError::EmptyCurve);
    }
    let mut out = String::new();
    out.push_str(
        "# rd sweep; auc convention: trapezoidal integral of psnr over bpp / bpp span\n",
    );
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        writeln!(
            out,
            "{},{},{:.6},{},{},{:.9},{:.3},{:.3}",
            curve.codec.name(),
            p.setting,
            p.bpp,
            p.psnr_d1,
            p.psnr_d2,
            p.chamfer_m,
            p.encode_ms,
            p.decode_ms
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Self-contained 800x600 SVG plot of the curve: BPP on x, PSNR (dB) on y,
/// one polyline per distortion axis. Lossless points cannot be placed on a
/// dB axis and make the export fail.
pub fn export_svg(curve: &RdCurve) -> Result<String, BenchError> {
    if curve.points.is_empty() {
        return Err(BenchError::EmptyCurve);
    }
    let mut ys = Vec::new();
    for p in &curve.points {
        ys.push(p.psnr_d1.db().ok_or(BenchError::LosslessInCurve)?);
        ys.push(p.psnr_d2.db().ok_or(BenchError::LosslessInCurve)?);
    }
    let xs: Vec<f64> = curve.points.iter().map(|p| p.bpp).collect();
    let (x_min, x_max) = (xs[0], xs[xs.len() - 1]);
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x_pad = ((x_max - x_min) * 0.05).max(1e-9);
    let y_pad = ((y_max - y_min) * 0.05).max(1e-9);
    let (x_lo, x_hi) = (x_min - x_pad, x_max + x_pad);
    let (y_lo, y_hi) = (y_min - y_pad, y_max + y_pad);

    // plot area inside fixed margins
    let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
    let pw = SVG_WIDTH as f64 - ml - mr;
    let ph = SVG_HEIGHT as f64 - mt - mb;
    let sx = |v: f64| ml + (v - x_lo) / (x_hi - x_lo) * pw;
    let sy = |v: f64| mt + ph - (v - y_lo) / (y_hi - y_lo) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"16\" font-family=\"sans-serif\" font-size=\"14\">{} rate-distortion</text>",
        ml,
        curve.codec.name()
    );
    // axes
    let _ = writeln!(
        out,
        "  <line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph,
        ml + pw,
        mt + ph
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph
    );
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            sx(fx),
            mt + ph + 18.0,
            fmt_tick(fx)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            ml - 6.0,
            sy(fy) + 4.0,
            fmt_tick(fy)
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{:.1}\" y1=\"{}\" x2=\"{:.1}\" y2=\"{}\" stroke=\"#cccccc\"/>",
            sx(fx),
            mt,
            sx(fx),
            mt + ph
        );
    }
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">bits per point</text>",
        ml + pw / 2.0,
        mt + ph + 40.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">psnr (db)</text>",
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (axis, color, label, dy) in [
        (PsnrAxis::D1, "#1f77b4", "d1", 0.0),
        (PsnrAxis::D2, "#2ca02c", "d2", 16.0),
    ] {
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|p| {
                let y = match axis {
                    PsnrAxis::D1 => p.psnr_d1.db().unwrap(),
                    PsnrAxis::D2 => p.psnr_d2.db().unwrap(),
                };
                format!("{:.1},{:.1}", sx(p.bpp), sy(y))
            })
            .collect();
        let _ = writeln!(
            out,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        for p in pts {
            let (px, py) = p.split_once(',').unwrap();
            let _ = writeln!(
                out,
                "  <circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"{color}\"/>"
            );
        }
        let ly = mt + 14.0 + dy;
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            ml + pw - 90.0,
            ml + pw - 66.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{label}</text>",
            ml + pw - 58.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{OctreeConfig, OctreeContextMode, VoxelAssignment};
    use crate::scenegen::default_frames;

    fn point(setting: &str, bpp: f64, d1: f64, d2: f64) -> RdPoint {
        RdPoint {
            setting: setting.to_string(),
            bpp,
            psnr_d1: PsnrValue::Db(d1),
            psnr_d2: PsnrValue::Db(d2),
            chamfer_m: 0.001,
            encode_ms: 1.0,
            decode_ms: 1.0,
        }
    }

    #[test]
    fn auc_single_trapezoid_is_exact() {
        let curve = RdCurve::from_points(
            CodecId::Octree,
            vec![point("a", 1.0, 60.0, 60.0), point("b", 2.0, 70.0, 70.0)],
        )
        .unwrap();
        assert_eq!(auc(&curve, PsnrAxis::D1).unwrap(), 65.0);
        assert_eq!(auc(&curve, PsnrAxis::D2).unwrap(), 65.0);
    }

    #[test]
    fn auc_of_constant_curve_is_the_constant() {
        let curve = RdCurve::from_points(
            CodecId::Voxel,
            vec![
                point("a", 1.0, 50.0, 50.0),
                point("b", 2.5, 50.0, 50.0),
                point("c", 7.0, 50.0, 50.0),
            ],
        )
        .unwrap();
        assert!((auc(&curve, PsnrAxis::D1).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn auc_matches_hand_computed_trapezoids() {
        let curve = RdCurve::from_points(
            CodecId::Octree,
            vec![
                point("a", 1.0, 60.0, 0.0),
                point("b", 2.0, 64.0, 0.0),
                point("c", 4.0, 70.0, 0.0),
            ],
        )
        .unwrap();
        // piecewise by hand: 1*(60+64)/2 + 2*(64+70)/2, over a span of 3
        let expected = (62.0 + 134.0) / 3.0;
        assert!((auc(&curve, PsnrAxis::D1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn auc_ignores_collinear_midpoints() {
        let two = RdCurve::from_points(
            CodecId::Octree,
            vec![point("a", 1.0, 60.0, 60.0), point("c", 3.0, 70.0, 70.0)],
        )
        .unwrap();
        let three = RdCurve::from_points(
            CodecId::Octree,
            vec![
                point("a", 1.0, 60.0, 60.0),
                point("b", 2.0, 65.0, 65.0),
                point("c", 3.0, 70.0, 70.0),
            ],
        )
        .unwrap();
        let a = auc(&two, PsnrAxis::D1).unwrap();
        let b = auc(&three, PsnrAxis::D1).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn auc_rejects_short_or_lossless_curves() {
        let one = RdCurve::from_points(CodecId::Octree, vec![point("a", 1.0, 60.0, 60.0)]).unwrap();
        assert!(matches!(
            auc(&one, PsnrAxis::D1),
            Err(BenchError::TooFewPoints)
        ));
        let mut p = point("a", 1.0, 60.0, 60.0);
        p.psnr_d1 = PsnrValue::Lossless;
        let curve =
            RdCurve::from_points(CodecId::Range, vec![p, point("b", 2.0, 70.0, 70.0)]).unwrap();
        assert!(matches!(
            auc(&curve, PsnrAxis::D1),
            Err(BenchError::LosslessInCurve)
        ));
    }

    #[test]
    fn curve_constructor_sorts_and_validates() {
        let curve = RdCurve::from_points(
            CodecId::Octree,
            vec![point("hi", 5.0, 70.0, 70.0), point("lo", 1.0, 60.0, 60.0)],
        )
        .unwrap();
        assert_eq!(curve.points()[0].setting, "lo");
        assert!(matches!(
            RdCurve::from_points(
                CodecId::Octree,
                vec![point("a", 1.0, 60.0, 60.0), point("b", 1.0, 61.0, 61.0)],
            ),
            Err(BenchError::DuplicateBpp(_, _))
        ));
        assert!(matches!(
            RdCurve::from_points(CodecId::Octree, vec![point("a", f64::NAN, 60.0, 60.0)]),
            Err(BenchError::NonFiniteMetric(_))
        ));
    }

    fn octree_settings(bits: &[u8]) -> Vec<CodecConfig> {
        bits.iter()
            .map(|&b| {
                CodecConfig::Octree(OctreeConfig {
                    quantization_bits: b,
                    context_mode: OctreeContextMode::ParentContext,
                })
            })
            .collect()
    }

    fn small_frames(seed: u64, count: u64) -> Vec<PointCloud> {
        default_frames(seed, count)
            .into_iter()
            .map(|(cloud, _)| cloud)
            .collect()
    }

    #[test]
    fn octree_sweep_has_increasing_rates() {
        let frames = small_frames(41, 2);
        let curve = run_sweep(&frames, &octree_settings(&[8, 12, 16])).unwrap();
        assert_eq!(curve.points().len(), 3);
        assert!(curve.points()[0].bpp < curve.points()[1].bpp);
        assert!(curve.points()[1].bpp < curve.points()[2].bpp);
        assert_eq!(curve.points()[0].setting, "octree-b8-ctx");
        for p in curve.points() {
            assert!(p.encode_ms >= 0.0 && p.decode_ms >= 0.0);
            assert!(p.chamfer_m > 0.0);
        }
    }

    #[test]
    fn sweep_input_validation() {
        let frames = small_frames(42, 1);
        assert!(matches!(
            run_sweep(&[], &octree_settings(&[8, 12])),
            Err(BenchError::EmptyFrames)
        ));
        assert!(matches!(
            run_sweep(&frames, &octree_settings(&[8])),
            Err(BenchError::TooFewSettings)
        ));
        let mixed = vec![
            CodecConfig::Octree(OctreeConfig::default()),
            CodecConfig::Voxel {
                voxel_size: 0.5,
                assignment: VoxelAssignment::Binary,
            },
        ];
        assert!(matches!(
            run_sweep(&frames, &mixed),
            Err(BenchError::MixedCodecs(_, _))
        ));
    }

    #[test]
    fn sweep_metrics_are_frame_order_independent() {
        let mut frames = small_frames(43, 3);
        let fwd = run_sweep(&frames, &octree_settings(&[8, 12])).unwrap();
        frames.reverse();
        let rev = run_sweep(&frames, &octree_settings(&[8, 12])).unwrap();
        for (a, b) in fwd.points().iter().zip(rev.points()) {
            assert_eq!(a.setting, b.setting);
            assert_eq!(a.bpp, b.bpp);
            assert_eq!(a.psnr_d1, b.psnr_d1);
            assert_eq!(a.psnr_d2, b.psnr_d2);
            assert_eq!(a.chamfer_m, b.chamfer_m);
        }
    }

    #[test]
    fn csv_export_is_golden() {
        let mut a = point("octree-b8-ctx", 1.25, 60.0, 62.5);
        a.chamfer_m = 0.01;
        a.encode_ms = 3.0;
        a.decode_ms = 1.5;
        let mut b = point("octree-b16-ctx", 6.5, 75.0, 80.0);
        b.psnr_d2 = PsnrValue::Lossless;
        b.chamfer_m = 0.002;
        b.encode_ms = 12.25;
        b.decode_ms = 4.125;
        let curve = RdCurve::from_points(CodecId::Octree, vec![a, b]).unwrap();
        let csv = export_csv(&curve).unwrap();
        let expected = "\
# rd sweep; auc convention: trapezoidal integral of psnr over bpp / bpp span
codec,setting,bpp,psnr_d1_db,psnr_d2_db,chamfer_m,encode_ms,decode_ms
octree,octree-b8-ctx,1.250000,60.0000,62.5000,0.010000000,3.000,1.500
octree,octree-b16-ctx,6.500000,75.0000,LOSSLESS,0.002000000,12.250,4.125
";
        assert_eq!(csv, expected);
    }

    #[test]
    fn csv_numbers_reparse_at_printed_precision() {
        let curve = RdCurve::from_points(
            CodecId::Voxel,
            vec![point("a", 1.5, 60.25, 61.5), point("b", 3.25, 70.125, 71.0)],
        )
        .unwrap();
        let csv = export_csv(&curve).unwrap();
        for (line, p) in csv.lines().skip(2).zip(curve.points()) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 8);
            assert_eq!(cols[0], "voxel");
            assert_eq!(cols[1], p.setting);
            assert_eq!(cols[2].parse::<f64>().unwrap(), p.bpp);
            assert_eq!(cols[3].parse::<f64>().unwrap(), p.psnr_d1.db().unwrap());
            assert_eq!(cols[5].parse::<f64>().unwrap(), p.chamfer_m);
        }
    }

    #[test]
    fn svg_export_is_well_formed_xml() {
        let curve = RdCurve::from_points(
            CodecId::Octree,
            vec![
                point("a", 1.0, 60.0, 61.0),
                point("b", 2.0, 65.0, 66.5),
                point("c", 4.0, 70.0, 72.0),
            ],
        )
        .unwrap();
        let svg = export_svg(&curve).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("width"), Some("800"));
        assert_eq!(root.attribute("height"), Some("600"));
        let polylines = doc
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        assert_eq!(polylines, 2);
    }

    #[test]
    fn exports_reject_empty_and_lossless_curves() {
        let empty = RdCurve::from_points(CodecId::Octree, vec![]).unwrap();
        assert!(matches!(export_csv(&empty), Err(BenchError::EmptyCurve)));
        assert!(matches!(export_svg(&empty), Err(BenchError::EmptyCurve)));
        let mut p = point("a", 1.0, 60.0, 60.0);
        p.psnr_d1 = PsnrValue::Lossless;
        let lossless =
            RdCurve::from_points(CodecId::Range, vec![p, point("b", 2.0, 70.0, 70.0)]).unwrap();
        assert!(matches!(
            export_svg(&lossless),
            Err(BenchError::LosslessInCurve)
        ));
        assert!(export_csv(&lossless).is_ok());
    }
}
