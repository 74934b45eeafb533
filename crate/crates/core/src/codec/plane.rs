//! Image-plane compression: per-row wrapping delta filter + DEFLATE.
//!
//! Scanlines of range images vary smoothly, so differencing each row before
//! deflate turns long runs and gentle gradients into highly compressible
//! byte streams. The filter is exactly invertible (wrapping arithmetic), and
//! decompression checks the expected plane size so corrupt streams surface
//! as errors instead of short reads.

use super::CodecError;

const DEFLATE_LEVEL: u8 = 6;

fn corrupt(msg: &str) -> CodecError {
    CodecError::CorruptPayload(msg.to_string())
}

pub fn compress_u32_plane(data: &[u32], width: usize) -> Vec<u8> {
    debug_assert!(width > 0 && data.len().is_multiple_of(width));
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for row in data.chunks(width) {
        let mut prev = 0u32;
        for &v in row {
            bytes.extend_from_slice(&v.wrapping_sub(prev).to_le_bytes());
            prev = v;
        }
    }
    miniz_oxide::deflate::compress_to_vec(&bytes, DEFLATE_LEVEL)
}

pub fn decompress_u32_plane(
    stream: &[u8],
    width: usize,
    height: usize,
) -> Result<Vec<u32>, CodecError> {
    let expect = width * height * 4;
    let bytes = miniz_oxide::inflate::decompress_to_vec_with_limit(stream, expect)
        .map_err(|_| corrupt("plane inflate failed"))?;
    if bytes.len() != expect {
        return Err(corrupt("plane size mismatch"));
    }
    let mut out = Vec::with_capacity(width * height);
    for row_bytes in bytes.chunks(width * 4) {
        let mut prev = 0u32;
        for d in row_bytes.chunks(4) {
            prev = prev.wrapping_add(u32::from_le_bytes(d.try_into().unwrap()));
            out.push(prev);
        }
    }
    Ok(out)
}

pub fn compress_u8_plane(data: &[u8], width: usize) -> Vec<u8> {
    debug_assert!(width > 0 && data.len().is_multiple_of(width));
    let mut bytes = Vec::with_capacity(data.len());
    for row in data.chunks(width) {
        let mut prev = 0u8;
        for &v in row {
            bytes.push(v.wrapping_sub(prev));
            prev = v;
        }
    }
    miniz_oxide::deflate::compress_to_vec(&bytes, DEFLATE_LEVEL)
}

pub fn decompress_u8_plane(
    stream: &[u8],
    width: usize,
    height: usize,
) -> Result<Vec<u8>, CodecError> {
    let expect = width * height;
    let bytes = miniz_oxide::inflate::decompress_to_vec_with_limit(stream, expect)
        .map_err(|_| corrupt("plane inflate failed"))?;
    if bytes.len() != expect {
        return Err(corrupt("plane size mismatch"));
    }
    let mut out = Vec::with_capacity(expect);
    for row_bytes in bytes.chunks(width) {
        let mut prev = 0u8;
        for &d in row_bytes {
            prev = prev.wrapping_add(d);
            out.push(prev);
        }
    }
    Ok(out)
}
