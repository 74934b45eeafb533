//! Minimal PCD v0.7 reader/writer: FIELDS x y z [intensity], TYPE F, SIZE 4.

use super::IoError;
use crate::types::{Point3, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcdData {
    Ascii,
    Binary,
}

struct Header {
    has_intensity: bool,
    points: usize,
    data: PcdData,
}

fn parse_header(text_region: &[u8]) -> Result<(Header, usize), IoError> {
    let malformed = |m: &str| IoError::MalformedHeader(m.to_string());
    let mut fields: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut height: Option<usize> = None;
    let mut points: Option<usize> = None;
    let mut version_seen = false;
    let mut data: Option<PcdData> = None;
    let mut offset = 0usize;

    let mut rest = text_region;
    while let Some(nl) = rest.iter().position(|&b| b == b'\n') {
        let line_bytes = &rest[..nl];
        offset += nl + 1;
        rest = &rest[nl + 1..];
        let line = std::str::from_utf8(line_bytes)
            .map_err(|_| malformed("header is not valid UTF-8"))?
            .trim_end_matches('\r')
            .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let key = tok.next().unwrap();
        let vals: Vec<&str> = tok.collect();
        match key {
            "VERSION" => {
                if vals != ["0.7"] && vals != [".7"] {
                    return Err(malformed("unsupported PCD version"));
                }
                version_seen = true;
            }
            "FIELDS" => fields = Some(vals.iter().map(|s| s.to_string()).collect()),
            "SIZE" => {
                if !vals.iter().all(|v| *v == "4") {
                    return Err(malformed("all field sizes must be 4"));
                }
            }
            "TYPE" => {
                if !vals.iter().all(|v| *v == "F") {
                    return Err(malformed("all field types must be F"));
                }
            }
            "COUNT" => {
                if !vals.iter().all(|v| *v == "1") {
                    return Err(malformed("all field counts must be 1"));
                }
            }
            "WIDTH" => width = Some(parse_usize(vals.first(), "WIDTH")?),
            "HEIGHT" => height = Some(parse_usize(vals.first(), "HEIGHT")?),
            "VIEWPOINT" => {}
            "POINTS" => points = Some(parse_usize(vals.first(), "POINTS")?),
            "DATA" => {
                data = Some(match vals.first() {
                    Some(&"ascii") => PcdData::Ascii,
                    Some(&"binary") => PcdData::Binary,
                    _ => return Err(malformed("DATA must be ascii or binary")),
                });
                break;
            }
            other => return Err(malformed(&format!("unknown header key '{other}'"))),
        }
    }

    if !version_seen {
        return Err(malformed("missing VERSION"));
    }
    let fields = fields.ok_or_else(|| malformed("missing FIELDS"))?;
    let has_intensity = match fields.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["x", "y", "z"] => false,
        ["x", "y", "z", "intensity"] => true,
        _ => {
            let bad = fields
                .iter()
                .find(|f| !matches!(f.as_str(), "x" | "y" | "z" | "intensity"))
                .cloned()
                .unwrap_or_else(|| fields.join(" "));
            return Err(IoError::UnsupportedField(bad));
        }
    };
    let points = points.ok_or_else(|| malformed("missing POINTS"))?;
    let data = data.ok_or_else(|| malformed("missing DATA"))?;
    if let (Some(w), Some(h)) = (width, height) {
        if w * h != points {
            return Err(malformed("WIDTH * HEIGHT must equal POINTS"));
        }
    } else {
        return Err(malformed("missing WIDTH or HEIGHT"));
    }
    Ok((
        Header {
            has_intensity,
            points,
            data,
        },
        offset,
    ))
}

fn parse_usize(v: Option<&&str>, key: &str) -> Result<usize, IoError> {
    v.and_then(|s| s.parse().ok())
        .ok_or_else(|| IoError::MalformedHeader(format!("bad {key}")))
}

pub fn read_pcd(bytes: &[u8]) -> Result<PointCloud, IoError> {
    let (header, data_start) = parse_header(bytes)?;
    let n_fields = if header.has_intensity { 4 } else { 3 };
    let mut values: Vec<f32> = Vec::with_capacity(header.points * n_fields);
    match header.data {
        PcdData::Ascii => {
            let text = std::str::from_utf8(&bytes[data_start..])
                .map_err(|_| IoError::InvalidData("ascii data is not UTF-8".into()))?;
            let mut rows = 0usize;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                if rows == header.points {
                    return Err(IoError::CountMismatch {
                        declared: header.points,
                        actual: rows + 1,
                    });
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != n_fields {
                    return Err(IoError::InvalidData(format!(
                        "row {rows} has {} fields, expected {n_fields}",
                        toks.len()
                    )));
                }
                for t in toks {
                    let v: f32 = t
                        .parse()
                        .map_err(|_| IoError::InvalidData(format!("bad float '{t}'")))?;
                    values.push(v);
                }
                rows += 1;
            }
            if rows != header.points {
                return Err(IoError::CountMismatch {
                    declared: header.points,
                    actual: rows,
                });
            }
        }
        PcdData::Binary => {
            let raw = &bytes[data_start..];
            let need = header.points * n_fields * 4;
            if raw.len() < need {
                return Err(IoError::CountMismatch {
                    declared: header.points,
                    actual: raw.len() / (n_fields * 4),
                });
            }
            for chunk in raw[..need].chunks_exact(4) {
                values.push(f32::from_le_bytes(chunk.try_into().unwrap()));
            }
        }
    }

    let mut pts = Vec::with_capacity(header.points);
    let mut intensity = if header.has_intensity {
        Some(Vec::with_capacity(header.points))
    } else {
        None
    };
    for row in values.chunks_exact(n_fields) {
        pts.push(Point3::new(row[0] as f64, row[1] as f64, row[2] as f64));
        if let Some(ints) = intensity.as_mut() {
            ints.push(row[3] as f64);
        }
    }
    PointCloud::new(pts, intensity).map_err(|e| IoError::InvalidData(e.to_string()))
}

pub fn write_pcd(cloud: &PointCloud, mode: PcdData) -> Result<Vec<u8>, IoError> {
    if cloud.is_empty() {
        return Err(IoError::EmptyCloud);
    }
    let has_intensity = cloud.intensity().is_some();
    let n = cloud.len();
    let (fields, size, typ, count) = if has_intensity {
        ("x y z intensity", "4 4 4 4", "F F F F", "1 1 1 1")
    } else {
        ("x y z", "4 4 4", "F F F", "1 1 1")
    };
    let data_kw = match mode {
        PcdData::Ascii => "ascii",
        PcdData::Binary => "binary",
    };
    let mut out = format!(
        "# .PCD v0.7 - Point Cloud Data file format\n\
         VERSION 0.7\n\
         FIELDS {fields}\n\
         SIZE {size}\n\
         TYPE {typ}\n\
         COUNT {count}\n\
         WIDTH {n}\n\
         HEIGHT 1\n\
         VIEWPOINT 0 0 0 1 0 0 0\n\
         POINTS {n}\n\
         DATA {data_kw}\n"
    )
    .into_bytes();
    let ints = cloud.intensity();
    match mode {
        PcdData::Ascii => {
            let mut text = String::new();
            for (i, p) in cloud.points().iter().enumerate() {
                text.push_str(&format!("{} {} {}", p.x as f32, p.y as f32, p.z as f32));
                if let Some(ints) = ints {
                    text.push_str(&format!(" {}", ints[i] as f32));
                }
                text.push('\n');
            }
            out.extend_from_slice(text.as_bytes());
        }
        PcdData::Binary => {
            out.reserve(n * if has_intensity { 16 } else { 12 });
            for (i, p) in cloud.points().iter().enumerate() {
                out.extend_from_slice(&(p.x as f32).to_le_bytes());
                out.extend_from_slice(&(p.y as f32).to_le_bytes());
                out.extend_from_slice(&(p.z as f32).to_le_bytes());
                if let Some(ints) = ints {
                    out.extend_from_slice(&(ints[i] as f32).to_le_bytes());
                }
            }
        }
    }
    Ok(out)
}
