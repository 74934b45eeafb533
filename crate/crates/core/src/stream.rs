//! Real-time streaming of compressed frames over any reliable ordered byte
//! transport: a publisher that paces encoded frames at a target rate, and a
//! subscriber that decodes, audits integrity, and accounts for a size and
//! cadence budget.
//!
//! Wire protocol, all integers little-endian:
//!
//! ```text
//! publisher -> subscriber   "PC3S" + version u8
//! subscriber -> publisher   ack u8 (the accepted version)
//! publisher -> subscriber   consecutive packed frames (header + payload +
//!                           crc32), then one terminator: a header with
//!                           payload_len 0 whose frame_id carries the number
//!                           of frames sent and whose n_points_original
//!                           carries the publisher's deadline-miss count
//! ```
//!
//! The publisher holds at most two encoded frames; when the transport
//! stalls, the oldest unsent frame is dropped and counted rather than
//! letting staleness build up. Frame ids follow the source sequence, so a
//! subscriber sees every drop as a numbered gap — nothing disappears
//! silently.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::codec::CodecConfig;
use crate::io::{pack_frame, CompressedFrame, FrameHeader, FRAME_HEADER_LEN};
use crate::types::PointCloud;

pub const STREAM_MAGIC: [u8; 4] = *b"PC3S";
pub const STREAM_VERSION: u8 = 1;
/// Slack applied to the subscriber's inter-arrival deadline check.
pub const DEADLINE_TOLERANCE: f64 = 0.25;

/// Publisher-side frame buffer depth; beyond it the oldest frame is dropped.
const QUEUE_CAP: usize = 2;
/// Upper bound on a single payload the subscriber will buffer.
const MAX_PAYLOAD: usize = 1 << 28;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("could not bind {addr}: {source}")]
    BindFailure {
        addr: String,
        source: std::io::Error,
    },
    #[error("could not connect to {addr}: {source}")]
    ConnectFailure {
        addr: String,
        source: std::io::Error,
    },
    #[error("handshake magic mismatch: got {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported stream version {0}")]
    BadVersion(u8),
    #[error("subscriber acknowledged version {0}, expected {STREAM_VERSION}")]
    BadAck(u8),
    #[error("fps must be a positive finite number, got {0}")]
    InvalidFps(f64),
    #[error("malformed stream: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Size and cadence the subscriber holds every frame to.
#[derive(Debug, Clone, Copy)]
pub struct StreamBudget {
    pub max_kb: f64,
    pub min_fps: f64,
}

/// Publisher-side session summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ServeReport {
    pub frames_sent: u64,
    /// Frames not ready by their pacing slot (still sent, late).
    pub deadline_misses: u32,
    /// Frames dropped by backpressure before transmission.
    pub frames_dropped: u64,
    pub encode_errors: u64,
}

/// Subscriber-side session summary, returned when the terminator arrives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StreamStats {
    pub frames_received: u64,
    pub mean_frame_bytes: u64,
    pub max_frame_bytes: u64,
    pub achieved_fps: f64,
    pub mean_e2e_latency_ms: f64,
    /// Frames over the size budget or later than the cadence budget allows.
    pub budget_violations: u64,
    pub crc_failures: u64,
    pub decode_errors: u64,
    /// Missing frame ids observed in the sequence.
    pub frame_id_gaps: u64,
    /// From the terminator trailer: what the publisher claims it sent.
    pub publisher_frames_sent: u64,
    pub publisher_deadline_misses: u32,
}

fn unix_ns() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_nanos() as u64
}

struct SendQueue {
    frames: VecDeque<CompressedFrame>,
    done: bool,
    dropped: u64,
    encode_errors: u64,
}

/// Publish `frames` over `transport` at `fps`. The source is consumed on a
/// live-capture clock (frame `k` is picked up at `k / fps` after the session
/// start) and encoding overlaps the transmission of the previous frame. A
/// frame misses its deadline when it cannot start leaving before the next
/// source tick; it is still sent. Encode failures are counted and skipped,
/// leaving a frame-id gap the subscriber can see.
pub fn serve_stream<S, I>(
    mut transport: S,
    frames: I,
    codec: &CodecConfig,
    fps: f64,
) -> Result<ServeReport, StreamError>
where
    S: Read + Write,
    I: IntoIterator<Item = PointCloud>,
    I::IntoIter: Send,
{
    if !(fps.is_finite() && fps > 0.0) {
        return Err(StreamError::InvalidFps(fps));
    }
    let mut hs = [0u8; 5];
    hs[0..4].copy_from_slice(&STREAM_MAGIC);
    hs[4] = STREAM_VERSION;
    transport.write_all(&hs)?;
    transport.flush()?;
    let mut ack = [0u8; 1];
    transport.read_exact(&mut ack)?;
    if ack[0] != STREAM_VERSION {
        return Err(StreamError::BadAck(ack[0]));
    }

    let source = frames.into_iter();
    let shared = Arc::new((
        Mutex::new(SendQueue {
            frames: VecDeque::new(),
            done: false,
            dropped: 0,
            encode_errors: 0,
        }),
        Condvar::new(),
    ));

    let mut sent = 0u64;
    let mut misses = 0u32;
    let mut send_err: Option<StreamError> = None;
    let t0 = Instant::now();

    std::thread::scope(|scope| {
        let producer = Arc::clone(&shared);
        scope.spawn(move || {
            let (lock, cv) = &*producer;
            for (i, cloud) in source.enumerate() {
                // live-capture clock: frame i exists only from its tick on
                let tick = t0 + Duration::from_secs_f64(i as f64 / fps);
                let now = Instant::now();
                if now < tick {
                    std::thread::sleep(tick - now);
                }
                match codec.encode_cloud(&cloud) {
                    Ok(mut frame) => {
                        frame.frame_id = i as u64;
                        let mut q = lock.lock().unwrap();
                        if q.frames.len() == QUEUE_CAP {
                            q.frames.pop_front();
                            q.dropped += 1;
                        }
                        q.frames.push_back(frame);
                        cv.notify_all();
                    }
                    Err(_) => {
                        lock.lock().unwrap().encode_errors += 1;
                    }
                }
            }
            lock.lock().unwrap().done = true;
            cv.notify_all();
        });

        let (lock, cv) = &*shared;
        loop {
            let mut q = lock.lock().unwrap();
            while q.frames.is_empty() && !q.done {
                q = cv.wait(q).unwrap();
            }
            let Some(mut frame) = q.frames.pop_front() else {
                break; // done and drained
            };
            drop(q);

            let deadline = t0 + Duration::from_secs_f64((frame.frame_id + 1) as f64 / fps);
            if Instant::now() > deadline {
                misses += 1;
            }
            frame.timestamp_ns = unix_ns();
            if let Err(e) = transport
                .write_all(&pack_frame(&frame))
                .and_then(|()| transport.flush())
            {
                send_err = Some(StreamError::Io(e));
                break;
            }
            sent += 1;
        }
    });
    if let Some(e) = send_err {
        return Err(e);
    }

    let terminator = FrameHeader {
        codec_id: codec.codec_id() as u8,
        frame_id: sent,
        timestamp_ns: unix_ns(),
        n_points_original: misses,
        payload_len: 0,
    };
    transport.write_all(&terminator.encode())?;
    transport.write_all(&crc32fast::hash(&[]).to_le_bytes())?;
    transport.flush()?;

    let q = shared.0.lock().unwrap();
    Ok(ServeReport {
        frames_sent: sent,
        deadline_misses: misses,
        frames_dropped: q.dropped,
        encode_errors: q.encode_errors,
    })
}

/// Subscribe on `transport`: decode every frame, audit integrity (CRC,
/// frame-id gaps), and hold each frame to `budget`. Corrupt or undecodable
/// frames are counted, never fatal; the stats return when the publisher's
/// terminator arrives.
pub fn receive_stream<S: Read + Write>(
    mut transport: S,
    codec: &CodecConfig,
    budget: &StreamBudget,
) -> Result<StreamStats, StreamError> {
    if !(budget.min_fps.is_finite() && budget.min_fps > 0.0) {
        return Err(StreamError::InvalidFps(budget.min_fps));
    }
    let mut hs = [0u8; 5];
    transport
        .read_exact(&mut hs)
        .map_err(|e| StreamError::Protocol(format!("handshake not received: {e}")))?;
    if hs[0..4] != STREAM_MAGIC {
        return Err(StreamError::BadMagic(hs[0..4].try_into().unwrap()));
    }
    if hs[4] != STREAM_VERSION {
        return Err(StreamError::BadVersion(hs[4]));
    }
    transport.write_all(&[STREAM_VERSION])?;
    transport.flush()?;

    let mut stats = StreamStats::default();
    let mut total_bytes = 0u64;
    let mut latency_sum_ms = 0.0f64;
    let mut first_arrival: Option<Instant> = None;
    let mut prev_arrival: Option<Instant> = None;
    let mut last_arrival: Option<Instant> = None;
    let mut last_id: Option<u64> = None;
    let max_gap_s = (1.0 / budget.min_fps) * (1.0 + DEADLINE_TOLERANCE);

    loop {
        let mut h = [0u8; FRAME_HEADER_LEN];
        transport
            .read_exact(&mut h)
            .map_err(|e| StreamError::Protocol(format!("stream ended mid-session: {e}")))?;
        let header = FrameHeader::decode(&h)
            .map_err(|e| StreamError::Protocol(format!("bad frame header: {e}")))?;
        let payload_len = header.payload_len as usize;
        if payload_len > MAX_PAYLOAD {
            return Err(StreamError::Protocol(format!(
                "frame payload of {payload_len} bytes exceeds the receive limit"
            )));
        }
        let mut payload = vec![0u8; payload_len];
        transport
            .read_exact(&mut payload)
            .map_err(|e| StreamError::Protocol(format!("stream ended mid-frame: {e}")))?;
        let mut crc = [0u8; 4];
        transport
            .read_exact(&mut crc)
            .map_err(|e| StreamError::Protocol(format!("stream ended mid-frame: {e}")))?;
        let crc = u32::from_le_bytes(crc);
        let arrival = Instant::now();

        if payload_len == 0 {
            stats.publisher_frames_sent = header.frame_id;
            stats.publisher_deadline_misses = header.n_points_original;
            break;
        }

        stats.frames_received += 1;
        total_bytes += payload_len as u64;
        stats.max_frame_bytes = stats.max_frame_bytes.max(payload_len as u64);
        first_arrival.get_or_insert(arrival);

        let mut violated = payload_len as f64 > budget.max_kb * 1024.0;
        if let Some(prev) = prev_arrival {
            violated |= (arrival - prev).as_secs_f64() > max_gap_s;
        }
        if violated {
            stats.budget_violations += 1;
        }
        prev_arrival = Some(arrival);
        last_arrival = Some(arrival);

        latency_sum_ms += unix_ns().saturating_sub(header.timestamp_ns) as f64 / 1e6;

        match last_id {
            Some(last) if header.frame_id > last + 1 => {
                stats.frame_id_gaps += header.frame_id - last - 1;
            }
            Some(last) if header.frame_id <= last => stats.frame_id_gaps += 1,
            _ => {}
        }
        last_id = Some(header.frame_id);

        if crc32fast::hash(&payload) != crc {
            stats.crc_failures += 1;
            continue;
        }
        let decodable = crate::io::CodecId::from_u8(header.codec_id)
            .and_then(|id| {
                CompressedFrame::new(
                    id,
                    header.frame_id,
                    header.timestamp_ns,
                    header.n_points_original,
                    payload,
                )
                .ok()
            })
            .and_then(|frame| codec.decode_cloud(&frame).ok());
        if decodable.is_none() {
            stats.decode_errors += 1;
        }
    }

    if stats.frames_received > 0 {
        stats.mean_frame_bytes =
            (total_bytes as f64 / stats.frames_received as f64).round() as u64;
        stats.mean_e2e_latency_ms = latency_sum_ms / stats.frames_received as f64;
    }
    if let (Some(first), Some(last)) = (first_arrival, last_arrival) {
        let span = (last - first).as_secs_f64();
        if stats.frames_received >= 2 && span > 0.0 {
            stats.achieved_fps = (stats.frames_received - 1) as f64 / span;
        }
    }
    Ok(stats)
}

/// Bind `addr`, accept one subscriber, and serve it.
pub fn serve_tcp<A, I>(
    addr: A,
    frames: I,
    codec: &CodecConfig,
    fps: f64,
) -> Result<ServeReport, StreamError>
where
    A: ToSocketAddrs + std::fmt::Debug,
    I: IntoIterator<Item = PointCloud>,
    I::IntoIter: Send,
{
    let listener = TcpListener::bind(&addr).map_err(|source| StreamError::BindFailure {
        addr: format!("{addr:?}"),
        source,
    })?;
    serve_listener(&listener, frames, codec, fps)
}

/// Accept one subscriber on an already-bound listener and serve it. Useful
/// when the caller needs the ephemeral port before the session starts.
pub fn serve_listener<I>(
    listener: &TcpListener,
    frames: I,
    codec: &CodecConfig,
    fps: f64,
) -> Result<ServeReport, StreamError>
where
    I: IntoIterator<Item = PointCloud>,
    I::IntoIter: Send,
{
    let (socket, _) = listener.accept()?;
    socket.set_nodelay(true)?;
    serve_stream(socket, frames, codec, fps)
}

/// Connect to a publisher and subscribe until its terminator.
pub fn receive_tcp<A: ToSocketAddrs + std::fmt::Debug>(
    addr: A,
    codec: &CodecConfig,
    budget: &StreamBudget,
) -> Result<StreamStats, StreamError> {
    let socket = TcpStream::connect(&addr).map_err(|source| StreamError::ConnectFailure {
        addr: format!("{addr:?}"),
        source,
    })?;
    socket.set_nodelay(true)?;
    receive_stream(socket, codec, budget)
}

struct PipeCore {
    buf: VecDeque<u8>,
    closed: bool,
}

type PipeShared = Arc<(Mutex<PipeCore>, Condvar)>;

/// One end of an in-memory duplex byte stream; blocking reads, unbounded
/// writes, EOF when the peer is dropped.
pub struct PipeEnd {
    rx: PipeShared,
    tx: PipeShared,
}

/// In-memory transport with the same blocking semantics as a loopback
/// socket; lets sessions run without touching the network stack.
pub fn pipe() -> (PipeEnd, PipeEnd) {
    let a: PipeShared = Arc::new((
        Mutex::new(PipeCore {
            buf: VecDeque::new(),
            closed: false,
        }),
        Condvar::new(),
    ));
    let b: PipeShared = Arc::new((
        Mutex::new(PipeCore {
            buf: VecDeque::new(),
            closed: false,
        }),
        Condvar::new(),
    ));
    (
        PipeEnd {
            rx: Arc::clone(&a),
            tx: Arc::clone(&b),
        },
        PipeEnd { rx: b, tx: a },
    )
}

impl Read for PipeEnd {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        if out.is_empty() {
            return Ok(0);
        }
        let (lock, cv) = &*self.rx;
        let mut core = lock.lock().unwrap();
        while core.buf.is_empty() && !core.closed {
            core = cv.wait(core).unwrap();
        }
        let n = core.buf.len().min(out.len());
        for slot in out.iter_mut().take(n) {
            *slot = core.buf.pop_front().unwrap();
        }
        Ok(n)
    }
}

impl Write for PipeEnd {
    fn write(&mut self, data: &[u8]) -> std::io::Result<usize> {
        let (lock, cv) = &*self.tx;
        let mut core = lock.lock().unwrap();
        core.buf.extend(data.iter().copied());
        cv.notify_all();
        Ok(data.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl Drop for PipeEnd {
    fn drop(&mut self) {
        let (lock, cv) = &*self.tx;
        lock.lock().unwrap().closed = true;
        cv.notify_all();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{CodecError, OctreeConfig};
    use crate::scenegen::SplitMix64;
    use crate::types::Point3;

    fn octree() -> CodecConfig {
        CodecConfig::Octree(OctreeConfig::default())
    }

    fn tiny_cloud(seed: u64, n: usize) -> PointCloud {
        let mut rng = SplitMix64::new(seed);
        let pts = (0..n)
            .map(|_| {
                Point3::new(
                    rng.next_f64() * 10.0,
                    rng.next_f64() * 10.0,
                    rng.next_f64() * 3.0,
                )
            })
            .collect();
        PointCloud::new(pts, None).unwrap()
    }

    fn tiny_frames(count: usize) -> Vec<PointCloud> {
        (0..count).map(|i| tiny_cloud(100 + i as u64, 800)).collect()
    }

    fn roomy_budget() -> StreamBudget {
        StreamBudget {
            max_kb: 10_000.0,
            min_fps: 0.001,
        }
    }

    #[test]
    fn pipe_moves_bytes_and_signals_eof() {
        let (mut a, mut b) = pipe();
        a.write_all(b"hello").unwrap();
        let mut buf = [0u8; 5];
        b.read_exact(&mut buf).unwrap();
        assert_eq!(&buf, b"hello");
        drop(a);
        assert_eq!(b.read(&mut buf).unwrap(), 0);
    }

    #[test]
    fn loopback_session_delivers_everything() {
        let frames = tiny_frames(5);
        let codec = octree();
        let (pub_end, sub_end) = pipe();
        let (report, stats) = std::thread::scope(|s| {
            let t = s.spawn(|| serve_stream(pub_end, frames, &codec, 500.0).unwrap());
            let stats = receive_stream(sub_end, &codec, &roomy_budget()).unwrap();
            (t.join().unwrap(), stats)
        });
        assert_eq!(report.frames_sent, 5);
        assert_eq!(report.frames_dropped, 0);
        assert_eq!(report.encode_errors, 0);
        assert_eq!(stats.frames_received, 5);
        assert_eq!(stats.publisher_frames_sent, 5);
        assert_eq!(stats.crc_failures, 0);
        assert_eq!(stats.decode_errors, 0);
        assert_eq!(stats.frame_id_gaps, 0);
        assert_eq!(stats.budget_violations, 0);
        assert!(stats.max_frame_bytes >= stats.mean_frame_bytes);
        assert!(stats.mean_frame_bytes > 0);
    }

    #[test]
    fn handshake_rejects_wrong_magic() {
        let (mut fake_pub, sub_end) = pipe();
        fake_pub.write_all(b"NOPE\x01").unwrap();
        let err = receive_stream(sub_end, &octree(), &roomy_budget()).unwrap_err();
        assert!(matches!(err, StreamError::BadMagic(m) if &m == b"NOPE"));
    }

    #[test]
    fn publisher_rejects_bad_ack_and_bad_fps() {
        let frames = tiny_frames(1);
        let codec = octree();
        assert!(matches!(
            serve_stream(pipe().0, frames.clone(), &codec, 0.0),
            Err(StreamError::InvalidFps(_))
        ));
        let (pub_end, mut sub_end) = pipe();
        std::thread::scope(|s| {
            s.spawn(|| {
                let mut hs = [0u8; 5];
                sub_end.read_exact(&mut hs).unwrap();
                sub_end.write_all(&[9]).unwrap();
            });
            let err = serve_stream(pub_end, frames, &codec, 100.0).unwrap_err();
            assert!(matches!(err, StreamError::BadAck(9)));
        });
    }

    #[test]
    fn tiny_size_budget_flags_every_frame() {
        let frames = tiny_frames(4);
        let codec = octree();
        let (pub_end, sub_end) = pipe();
        let budget = StreamBudget {
            max_kb: 0.001,
            min_fps: 0.001,
        };
        let stats = std::thread::scope(|s| {
            s.spawn(|| serve_stream(pub_end, frames, &codec, 500.0).unwrap());
            receive_stream(sub_end, &codec, &budget).unwrap()
        });
        assert_eq!(stats.frames_received, 4);
        assert_eq!(stats.budget_violations, 4);
    }

    #[test]
    fn encode_failures_leave_visible_gaps() {
        let frames = vec![
            tiny_cloud(1, 500),
            PointCloud::new(vec![], None).unwrap(), // octree cannot encode this
            tiny_cloud(2, 500),
        ];
        let codec = octree();
        assert!(matches!(
            codec.encode_cloud(&frames[1]),
            Err(CodecError::EmptyCloud)
        ));
        let (pub_end, sub_end) = pipe();
        let (report, stats) = std::thread::scope(|s| {
            let t = s.spawn(|| serve_stream(pub_end, frames, &codec, 500.0).unwrap());
            let stats = receive_stream(sub_end, &codec, &roomy_budget()).unwrap();
            (t.join().unwrap(), stats)
        });
        assert_eq!(report.encode_errors, 1);
        assert_eq!(report.frames_sent, 2);
        assert_eq!(stats.frames_received, 2);
        assert_eq!(stats.frame_id_gaps, 1);
        assert_eq!(stats.decode_errors, 0);
    }

    #[test]
    fn corrupt_frames_are_counted_not_fatal() {
        let codec = octree();
        let good = codec.encode_cloud(&tiny_cloud(3, 400)).unwrap();
        let (mut fake_pub, sub_end) = pipe();

        // hand-rolled session: good frame, crc-corrupt frame, frame whose
        // payload is garbage with a valid crc, then the terminator
        let mut session = Vec::new();
        session.extend_from_slice(&STREAM_MAGIC);
        session.push(STREAM_VERSION);
        let mut f0 = good.clone();
        f0.frame_id = 0;
        session.extend_from_slice(&pack_frame(&f0));
        let mut flipped = pack_frame(&{
            let mut f = good.clone();
            f.frame_id = 1;
            f
        });
        let n = flipped.len();
        flipped[n - 10] ^= 0xFF; // payload byte; trailing crc now mismatches
        session.extend_from_slice(&flipped);
        let garbage = CompressedFrame::new(
            crate::io::CodecId::Octree,
            2,
            0,
            10,
            vec![0xAB; 40],
        )
        .unwrap();
        session.extend_from_slice(&pack_frame(&garbage));
        let term = FrameHeader {
            codec_id: crate::io::CodecId::Octree as u8,
            frame_id: 3,
            timestamp_ns: 0,
            n_points_original: 0,
            payload_len: 0,
        };
        session.extend_from_slice(&term.encode());
        session.extend_from_slice(&crc32fast::hash(&[]).to_le_bytes());

        let stats = std::thread::scope(|s| {
            s.spawn(move || {
                fake_pub.write_all(&session).unwrap();
                let mut ack = [0u8; 1];
                fake_pub.read_exact(&mut ack).unwrap();
            });
            receive_stream(sub_end, &codec, &roomy_budget()).unwrap()
        });
        assert_eq!(stats.frames_received, 3);
        assert_eq!(stats.crc_failures, 1);
        assert_eq!(stats.decode_errors, 1);
        assert_eq!(stats.frame_id_gaps, 0);
        assert_eq!(stats.publisher_frames_sent, 3);
    }

    #[test]
    fn pacing_hits_the_target_rate_roughly() {
        let frames = tiny_frames(10);
        let codec = octree();
        let (pub_end, sub_end) = pipe();
        let fps = 50.0;
        let stats = std::thread::scope(|s| {
            s.spawn(|| serve_stream(pub_end, frames, &codec, fps).unwrap());
            receive_stream(sub_end, &codec, &roomy_budget()).unwrap()
        });
        assert_eq!(stats.frames_received, 10);
        // 9 inter-frame intervals at 20 ms nominal
        assert!(
            stats.achieved_fps > fps * 0.6 && stats.achieved_fps < fps * 1.4,
            "achieved {}",
            stats.achieved_fps
        );
        assert!(stats.mean_e2e_latency_ms >= 0.0);
    }

    #[test]
    fn tcp_and_pipe_transports_agree_on_content_stats() {
        let frames = tiny_frames(4);
        let codec = octree();
        let budget = roomy_budget();

        let (pub_end, sub_end) = pipe();
        let pipe_stats = std::thread::scope(|s| {
            s.spawn(|| serve_stream(pub_end, frames.clone(), &codec, 500.0).unwrap());
            receive_stream(sub_end, &codec, &budget).unwrap()
        });

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let tcp_stats = std::thread::scope(|s| {
            s.spawn(|| serve_listener(&listener, frames.clone(), &codec, 500.0).unwrap());
            receive_tcp(addr, &codec, &budget).unwrap()
        });

        assert_eq!(pipe_stats.frames_received, tcp_stats.frames_received);
        assert_eq!(pipe_stats.mean_frame_bytes, tcp_stats.mean_frame_bytes);
        assert_eq!(pipe_stats.max_frame_bytes, tcp_stats.max_frame_bytes);
        assert_eq!(pipe_stats.crc_failures, tcp_stats.crc_failures);
        assert_eq!(pipe_stats.decode_errors, tcp_stats.decode_errors);
        assert_eq!(pipe_stats.frame_id_gaps, tcp_stats.frame_id_gaps);
        assert_eq!(
            pipe_stats.publisher_frames_sent,
            tcp_stats.publisher_frames_sent
        );
    }
}
