//! pc3: command line front end for the point cloud compression toolkit.
//!
//! Every subcommand is a thin shell over the library: generate simulated
//! frames, encode/decode single frames, score a reconstruction, sweep a
//! codec's rate-distortion curve, or run a live publisher/subscriber pair.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, bad config file,
//! parameters that do not apply to the chosen codec), 2 data error
//! (unreadable files, corrupt frames, codec failures).

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::anyhow;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pc3_core::bench::{auc, export_csv, export_svg, run_sweep, PsnrAxis};
use pc3_core::codec::{
    CodecConfig, OctreeConfig, OctreeContextMode, RangeCodecConfig, RangeMode, VoxelAssignment,
};
use pc3_core::io::{pack_frame, read_pcd, unpack_frame, write_pcd, CodecId, PcdData};
use pc3_core::metrics::{
    bpp, chamfer, compression_ratio, psnr_d1, psnr_d2, DEFAULT_NORMAL_K,
};
use pc3_core::scenegen::default_frames;
use pc3_core::stream::{receive_tcp, serve_tcp, StreamBudget};
use pc3_core::{PointCloud, SensorModel};

#[derive(Parser)]
#[command(
    name = "pc3",
    version,
    about = "Point cloud compression toolkit for roadside LiDAR"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated LiDAR frames (PCD) plus the sensor calibration file
    Generate(GenerateArgs),
    /// Compress one PCD frame into a .pc3 file
    Encode(EncodeArgs),
    /// Reconstruct a PCD frame from a .pc3 file
    Decode(DecodeArgs),
    /// Score a reconstruction against its original
    Eval(EvalArgs),
    /// Sweep codec settings and export a rate-distortion curve (CSV + SVG)
    Bench(BenchArgs),
    /// Publish frames to one subscriber over TCP
    Serve(ServeArgs),
    /// Subscribe to a publisher and audit the incoming stream
    Recv(RecvArgs),
}

/// Errors split by exit code: `Usage` exits 1, `Data` exits 2.
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: std::error::Error + Send + Sync + 'static> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(anyhow::Error::new(e))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data(e: anyhow::Error) -> CliError {
    CliError::Data(e)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecKind {
    Octree,
    Range,
    Voxel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ContextArg {
    /// Single shared symbol distribution
    Order0,
    /// Condition each occupancy byte on its parent's byte
    Parent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RangeModeArg {
    Lossless,
    Quantized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AssignmentArg {
    Binary,
    Averaged,
    Density,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PcdFormatArg {
    Ascii,
    Binary,
}

impl PcdFormatArg {
    fn mode(self) -> PcdData {
        match self {
            PcdFormatArg::Ascii => PcdData::Ascii,
            PcdFormatArg::Binary => PcdData::Binary,
        }
    }
}

/// Codec selection plus every per-codec dial. Flags that do not apply to
/// the selected codec are rejected before any file is touched.
#[derive(Args, Clone)]
struct CodecFlags {
    /// Which codec to run
    #[arg(long, value_enum)]
    codec: CodecKind,

    /// Octree: quantization depth in bits per axis (1-21)
    #[arg(long)]
    bits: Option<u8>,

    /// Octree: occupancy byte context model
    #[arg(long, value_enum)]
    context: Option<ContextArg>,

    /// Range: sensor calibration file (as written by `generate`)
    #[arg(long)]
    sensor: Option<PathBuf>,

    /// Range: lossless tick storage or quantized bins
    #[arg(long, value_enum)]
    range_mode: Option<RangeModeArg>,

    /// Range: bits per range sample in quantized mode (8-16)
    #[arg(long)]
    range_bits: Option<u8>,

    /// Range: bits per azimuth residual in quantized mode (0-16)
    #[arg(long)]
    azimuth_bits: Option<u8>,

    /// Voxel: cell edge length in meters
    #[arg(long)]
    voxel_size: Option<f64>,

    /// Voxel: what each occupied cell stores
    #[arg(long, value_enum)]
    assignment: Option<AssignmentArg>,
}

impl CodecFlags {
    /// Reject any flag that belongs to a different codec than `--codec`.
    fn check_exclusive(&self) -> Result<(), CliError> {
        let mut foreign: Vec<&str> = Vec::new();
        let octree = self.codec == CodecKind::Octree;
        let range = self.codec == CodecKind::Range;
        let voxel = self.codec == CodecKind::Voxel;
        if !octree {
            if self.bits.is_some() {
                foreign.push("--bits");
            }
            if self.context.is_some() {
                foreign.push("--context");
            }
        }
        if !range {
            if self.sensor.is_some() {
                foreign.push("--sensor");
            }
            if self.range_mode.is_some() {
                foreign.push("--range-mode");
            }
            if self.range_bits.is_some() {
                foreign.push("--range-bits");
            }
            if self.azimuth_bits.is_some() {
                foreign.push("--azimuth-bits");
            }
        }
        if !voxel {
            if self.voxel_size.is_some() {
                foreign.push("--voxel-size");
            }
            if self.assignment.is_some() {
                foreign.push("--assignment");
            }
        }
        if foreign.is_empty() {
            Ok(())
        } else {
            let name = match self.codec {
                CodecKind::Octree => "octree",
                CodecKind::Range => "range",
                CodecKind::Voxel => "voxel",
            };
            Err(usage(format!(
                "{} do(es) not apply to codec '{name}'",
                foreign.join(", ")
            )))
        }
    }

    fn build(&self) -> Result<CodecConfig, CliError> {
        self.check_exclusive()?;
        Ok(match self.codec {
            CodecKind::Octree => {
                let defaults = OctreeConfig::default();
                CodecConfig::Octree(OctreeConfig {
                    quantization_bits: self.bits.unwrap_or(defaults.quantization_bits),
                    context_mode: match self.context {
                        Some(ContextArg::Order0) => OctreeContextMode::Order0,
                        Some(ContextArg::Parent) => OctreeContextMode::ParentContext,
                        None => defaults.context_mode,
                    },
                })
            }
            CodecKind::Range => {
                let path = self.sensor.as_ref().ok_or_else(|| {
                    usage("codec 'range' requires --sensor FILE (see `pc3 generate`)")
                })?;
                let sensor = load_sensor(path)?;
                let defaults = RangeCodecConfig::default();
                CodecConfig::Range {
                    cfg: RangeCodecConfig {
                        mode: match self.range_mode {
                            Some(RangeModeArg::Lossless) | None => RangeMode::Lossless,
                            Some(RangeModeArg::Quantized) => RangeMode::Quantized,
                        },
                        range_bits: self.range_bits.unwrap_or(defaults.range_bits),
                        azimuth_bits: self.azimuth_bits.unwrap_or(defaults.azimuth_bits),
                    },
                    sensor,
                }
            }
            CodecKind::Voxel => CodecConfig::Voxel {
                voxel_size: self.voxel_size.unwrap_or(0.5),
                assignment: match self.assignment {
                    Some(AssignmentArg::Binary) | None => VoxelAssignment::Binary,
                    Some(AssignmentArg::Averaged) => VoxelAssignment::Averaged,
                    Some(AssignmentArg::Density) => VoxelAssignment::Density,
                },
            },
        })
    }

    /// Config-file override hook; returns false for keys it does not own.
    fn set_key(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        match key {
            "codec" => self.codec = parse_enum(key, value)?,
            "bits" => self.bits = Some(parse_value(key, value)?),
            "context" => self.context = Some(parse_enum(key, value)?),
            "sensor" => self.sensor = Some(PathBuf::from(value)),
            "range-mode" => self.range_mode = Some(parse_enum(key, value)?),
            "range-bits" => self.range_bits = Some(parse_value(key, value)?),
            "azimuth-bits" => self.azimuth_bits = Some(parse_value(key, value)?),
            "voxel-size" => self.voxel_size = Some(parse_value(key, value)?),
            "assignment" => self.assignment = Some(parse_enum(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Simulation seed; same seed, same frames
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of frames to write
    #[arg(long, default_value_t = 1)]
    frames: u64,
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// PCD storage mode
    #[arg(long, value_enum, default_value = "binary")]
    format: PcdFormatArg,
    /// key = value file overriding the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    codec: CodecFlags,
    /// Input frame (.pcd)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output compressed frame (.pc3)
    #[arg(long)]
    out: PathBuf,
    /// key = value file overriding the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Input compressed frame (.pc3)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output frame (.pcd)
    #[arg(long)]
    out: PathBuf,
    /// Sensor calibration file; required for range-coded frames
    #[arg(long)]
    sensor: Option<PathBuf>,
    /// PCD storage mode
    #[arg(long, value_enum, default_value = "binary")]
    format: PcdFormatArg,
}

#[derive(Args)]
struct EvalArgs {
    /// Reference frame (.pcd)
    #[arg(long)]
    original: PathBuf,
    /// Reconstructed frame (.pcd)
    #[arg(long)]
    reconstructed: PathBuf,
    /// Compressed frame (.pc3); adds bpp and compression_ratio to the report
    #[arg(long)]
    compressed: Option<PathBuf>,
    /// Neighborhood size for normal estimation in the point-to-plane score
    #[arg(long, default_value_t = DEFAULT_NORMAL_K)]
    normal_k: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    codec: CodecFlags,
    /// Sweep grammar: octree `bits=8,12,16`, range `range-bits=8,12,16`,
    /// voxel `voxel-size=0.2,0.5,1.0`
    #[arg(long)]
    sweep: String,
    /// Simulation seed for the benchmark frames
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of simulated frames to average over
    #[arg(long, default_value_t = 3)]
    frames: u64,
    /// Rate-distortion table output
    #[arg(long)]
    out_csv: PathBuf,
    /// Rate-distortion plot output
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// key = value file overriding the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    codec: CodecFlags,
    /// Address to bind, e.g. 127.0.0.1:7443
    #[arg(long)]
    addr: String,
    /// Target frame rate
    #[arg(long, default_value_t = 10.0)]
    fps: f64,
    /// Directory of .pcd frames to publish (sorted by name); defaults to
    /// simulated frames from --seed/--frames
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Simulation seed when no input directory is given
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of frames to publish
    #[arg(long, default_value_t = 20)]
    frames: u64,
    /// key = value file overriding the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RecvArgs {
    #[command(flatten)]
    codec: CodecFlags,
    /// Publisher address to connect to
    #[arg(long)]
    addr: String,
    /// Per-frame size budget in kilobytes
    #[arg(long, default_value_t = 105.0)]
    max_kb: f64,
    /// Minimum acceptable frame rate
    #[arg(long, default_value_t = 9.0)]
    min_fps: f64,
    /// key = value file overriding the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are not errors; everything else is usage
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { 0 } else { 1 };
        }
    };
    let result = match cli.cmd {
        Command::Generate(args) => cmd_generate(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Serve(args) => cmd_serve(args),
        Command::Recv(args) => cmd_recv(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprintln!("run `pc3 --help` or `pc3 <subcommand> --help` for the synopsis");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

// ---- config files ------------------------------------------------------

/// `key = value` per line, `#` comments. Keys are the long flag names
/// without the leading dashes. Values win over flags.
fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| data(anyhow!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| usage(format!("config key '{key}': cannot parse '{value}': {e}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true)
        .map_err(|e| usage(format!("config key '{key}': cannot parse '{value}': {e}")))
}

/// Apply `path` (if given) through the command's `set_key`; unknown keys
/// are usage errors so typos cannot silently change a benchmark.
fn apply_config(
    config: &Option<PathBuf>,
    mut set_key: impl FnMut(&str, &str) -> Result<bool, CliError>,
) -> Result<(), CliError> {
    let Some(path) = config else {
        return Ok(());
    };
    for (key, value) in read_config(path)? {
        if !set_key(&key, &value)? {
            return Err(usage(format!(
                "config key '{key}' is not a flag of this subcommand"
            )));
        }
    }
    Ok(())
}

// ---- shared plumbing ----------------------------------------------------

/// Write via a temp file in the target directory plus rename, so readers
/// never observe a half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| data(anyhow!("cannot create temp file near {}: {e}", path.display())))?;
    std::io::Write::write_all(&mut tmp, bytes)
        .map_err(|e| data(anyhow!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| data(anyhow!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

fn load_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let bytes =
        fs::read(path).map_err(|e| data(anyhow!("cannot read {}: {e}", path.display())))?;
    read_pcd(&bytes).map_err(|e| data(anyhow!("{}: {e}", path.display())))
}

fn load_sensor(path: &Path) -> Result<SensorModel, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| data(anyhow!("cannot read sensor {}: {e}", path.display())))?;
    SensorModel::from_text(&text).map_err(|e| data(anyhow!("{}: {e}", path.display())))
}

// ---- subcommands ---------------------------------------------------------

fn cmd_generate(mut args: GenerateArgs) -> Result<(), CliError> {
    let config = args.config.take();
    apply_config(&config, |key, value| {
        match key {
            "seed" => args.seed = parse_value(key, value)?,
            "frames" => args.frames = parse_value(key, value)?,
            "out" => args.out = PathBuf::from(value),
            "format" => args.format = parse_enum(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    })?;

    fs::create_dir_all(&args.out)
        .map_err(|e| data(anyhow!("cannot create {}: {e}", args.out.display())))?;
    let sensor_path = args.out.join("sensor.txt");
    write_atomic(
        &sensor_path,
        SensorModel::default_roadside().canonical_text().as_bytes(),
    )?;
    println!("wrote {}", sensor_path.display());

    for (cloud, _) in default_frames(args.seed, args.frames) {
        let path = args.out.join(format!("frame_{:04}.pcd", cloud.frame_id));
        let bytes = write_pcd(&cloud, args.format.mode())?;
        write_atomic(&path, &bytes)?;
        println!("wrote {} ({} points)", path.display(), cloud.len());
    }
    Ok(())
}

fn cmd_encode(mut args: EncodeArgs) -> Result<(), CliError> {
    let config = args.config.take();
    apply_config(&config, |key, value| args.codec.set_key(key, value))?;
    let codec = args.codec.build()?;
    let cloud = load_cloud(&args.input)?;

    let t = Instant::now();
    let frame = codec
        .encode_cloud(&cloud)
        .map_err(|e| data(anyhow!("encoding {}: {e}", args.input.display())))?;
    let encode_ms = t.elapsed().as_secs_f64() * 1e3;
    write_atomic(&args.out, &pack_frame(&frame))?;

    println!("codec = {}", codec.label());
    println!("points = {}", cloud.len());
    println!("payload_bytes = {}", frame.payload_len());
    println!("bpp = {:.6}", bpp(&frame)?);
    println!("encode_ms = {encode_ms:.3}");
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let bytes = fs::read(&args.input)
        .map_err(|e| data(anyhow!("cannot read {}: {e}", args.input.display())))?;
    let frame =
        unpack_frame(&bytes).map_err(|e| data(anyhow!("{}: {e}", args.input.display())))?;

    // only the codec family matters for decoding; range also needs the sensor
    let codec = match frame.codec_id {
        CodecId::Octree => CodecConfig::Octree(OctreeConfig::default()),
        CodecId::Voxel => CodecConfig::Voxel {
            voxel_size: 1.0,
            assignment: VoxelAssignment::Binary,
        },
        CodecId::Range => {
            let path = args.sensor.as_ref().ok_or_else(|| {
                usage("this frame is range-coded; pass --sensor FILE to decode it")
            })?;
            CodecConfig::Range {
                cfg: RangeCodecConfig::default(),
                sensor: load_sensor(path)?,
            }
        }
    };

    let t = Instant::now();
    let cloud = codec
        .decode_cloud(&frame)
        .map_err(|e| data(anyhow!("decoding {}: {e}", args.input.display())))?;
    let decode_ms = t.elapsed().as_secs_f64() * 1e3;
    write_atomic(&args.out, &write_pcd(&cloud, args.format.mode())?)?;

    println!("codec = {}", frame.codec_id.name());
    println!("points = {}", cloud.len());
    println!("decode_ms = {decode_ms:.3}");
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let original = load_cloud(&args.original)?;
    let reconstructed = load_cloud(&args.reconstructed)?;

    println!("psnr_d1_db = {}", psnr_d1(&original, &reconstructed)?);
    println!(
        "psnr_d2_db = {}",
        psnr_d2(&original, &reconstructed, args.normal_k)?
    );
    println!("chamfer_m = {:.9}", chamfer(&original, &reconstructed)?);

    if let Some(path) = &args.compressed {
        let bytes =
            fs::read(path).map_err(|e| data(anyhow!("cannot read {}: {e}", path.display())))?;
        let frame = unpack_frame(&bytes).map_err(|e| data(anyhow!("{}: {e}", path.display())))?;
        let raw_bytes = fs::metadata(&args.original)
            .map_err(|e| data(anyhow!("cannot stat {}: {e}", args.original.display())))?
            .len();
        println!("bpp = {:.6}", bpp(&frame)?);
        println!(
            "compression_ratio = {:.3}",
            compression_ratio(raw_bytes, &frame)?
        );
    }
    Ok(())
}

/// Expand the `--sweep key=v1,v2,...` grammar into one config per value.
fn sweep_settings(flags: &CodecFlags, sweep: &str) -> Result<Vec<CodecConfig>, CliError> {
    let Some((key, list)) = sweep.split_once('=') else {
        return Err(usage(format!(
            "--sweep expects `key=v1,v2,...`, got '{sweep}'"
        )));
    };
    let key = key.trim();
    let expected = match flags.codec {
        CodecKind::Octree => "bits",
        CodecKind::Range => "range-bits",
        CodecKind::Voxel => "voxel-size",
    };
    if key != expected {
        return Err(usage(format!(
            "sweep key '{key}' does not apply; codec sweeps over '{expected}'"
        )));
    }
    let mut settings = Vec::new();
    for piece in list.split(',') {
        let mut one = flags.clone();
        match flags.codec {
            CodecKind::Octree => one.bits = Some(parse_value(key, piece.trim())?),
            CodecKind::Range => {
                one.range_mode = Some(RangeModeArg::Quantized);
                one.range_bits = Some(parse_value(key, piece.trim())?);
            }
            CodecKind::Voxel => one.voxel_size = Some(parse_value(key, piece.trim())?),
        }
        settings.push(one.build()?);
    }
    Ok(settings)
}

fn cmd_bench(mut args: BenchArgs) -> Result<(), CliError> {
    let config = args.config.take();
    apply_config(&config, |key, value| {
        if args.codec.set_key(key, value)? {
            return Ok(true);
        }
        match key {
            "sweep" => args.sweep = value.to_string(),
            "seed" => args.seed = parse_value(key, value)?,
            "frames" => args.frames = parse_value(key, value)?,
            "out-csv" => args.out_csv = PathBuf::from(value),
            "out-svg" => args.out_svg = Some(PathBuf::from(value)),
            _ => return Ok(false),
        }
        Ok(true)
    })?;

    let settings = sweep_settings(&args.codec, &args.sweep)?;
    let frames: Vec<PointCloud> = default_frames(args.seed, args.frames)
        .into_iter()
        .map(|(cloud, _)| cloud)
        .collect();
    let curve = run_sweep(&frames, &settings)?;

    write_atomic(&args.out_csv, export_csv(&curve)?.as_bytes())?;
    println!("wrote {}", args.out_csv.display());
    if let Some(svg) = &args.out_svg {
        write_atomic(svg, export_svg(&curve)?.as_bytes())?;
        println!("wrote {}", svg.display());
    }
    for p in curve.points() {
        println!(
            "{}: bpp = {:.4}, psnr_d1 = {}, psnr_d2 = {}, chamfer_m = {:.6}",
            p.setting, p.bpp, p.psnr_d1, p.psnr_d2, p.chamfer_m
        );
    }
    match auc(&curve, PsnrAxis::D1) {
        Ok(v) => println!("auc_d1 = {v:.4}"),
        Err(_) => println!("auc_d1 = n/a"),
    }
    Ok(())
}

fn cmd_serve(mut args: ServeArgs) -> Result<(), CliError> {
    let config = args.config.take();
    apply_config(&config, |key, value| {
        if args.codec.set_key(key, value)? {
            return Ok(true);
        }
        match key {
            "addr" => args.addr = value.to_string(),
            "fps" => args.fps = parse_value(key, value)?,
            "in" => args.input = Some(PathBuf::from(value)),
            "seed" => args.seed = parse_value(key, value)?,
            "frames" => args.frames = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    })?;
    let codec = args.codec.build()?;

    let frames: Vec<PointCloud> = match &args.input {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| data(anyhow!("cannot read {}: {e}", dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "pcd"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(data(anyhow!("no .pcd files in {}", dir.display())));
            }
            paths
                .iter()
                .map(|p| load_cloud(p))
                .collect::<Result<_, _>>()?
        }
        None => default_frames(args.seed, args.frames)
            .into_iter()
            .map(|(cloud, _)| cloud)
            .collect(),
    };

    eprintln!("serving {} frames on {}", frames.len(), args.addr);
    let report = serve_tcp(args.addr.as_str(), frames, &codec, args.fps)?;
    println!("frames_sent = {}", report.frames_sent);
    println!("deadline_misses = {}", report.deadline_misses);
    println!("frames_dropped = {}", report.frames_dropped);
    println!("encode_errors = {}", report.encode_errors);
    Ok(())
}

fn cmd_recv(mut args: RecvArgs) -> Result<(), CliError> {
    let config = args.config.take();
    apply_config(&config, |key, value| {
        if args.codec.set_key(key, value)? {
            return Ok(true);
        }
        match key {
            "addr" => args.addr = value.to_string(),
            "max-kb" => args.max_kb = parse_value(key, value)?,
            "min-fps" => args.min_fps = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    })?;
    let codec = args.codec.build()?;
    let budget = StreamBudget {
        max_kb: args.max_kb,
        min_fps: args.min_fps,
    };

    let stats = receive_tcp(args.addr.as_str(), &codec, &budget)?;
    println!("frames_received = {}", stats.frames_received);
    println!("mean_frame_bytes = {}", stats.mean_frame_bytes);
    println!("max_frame_bytes = {}", stats.max_frame_bytes);
    println!("achieved_fps = {:.3}", stats.achieved_fps);
    println!("mean_e2e_latency_ms = {:.3}", stats.mean_e2e_latency_ms);
    println!("budget_violations = {}", stats.budget_violations);
    println!("crc_failures = {}", stats.crc_failures);
    println!("decode_errors = {}", stats.decode_errors);
    println!("frame_id_gaps = {}", stats.frame_id_gaps);
    println!("publisher_frames_sent = {}", stats.publisher_frames_sent);
    println!(
        "publisher_deadline_misses = {}",
        stats.publisher_deadline_misses
    );
    Ok(())
}
