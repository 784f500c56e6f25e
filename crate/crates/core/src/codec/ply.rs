//! Minimal PLY reader for vertex clouds (ASCII and binary little-endian).
//!
//! Only the `vertex` element is materialized. Elements declared before it are
//! skipped and must consist of scalar properties; elements after it are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::codec::cloud::{RawPoint, RawPointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
struct Property {
    name: String,
    kind: Scalar,
    is_list: bool,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
    body_first_line: usize,
}

fn parse_header(data: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| parse_err(line_no + 1, "header ended without end_header"))?;
        line_no += 1;
        let raw = std::str::from_utf8(&data[pos..end])
            .map_err(|_| parse_err(line_no, "header line is not UTF-8"))?
            .trim_end_matches('\r');
        pos = end + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if line_no == 1 {
            if raw.trim() != "ply" {
                return Err(parse_err(1, format!("expected `ply`, found `{raw}`")));
            }
            continue;
        }
        match tokens.first().copied() {
            Some("format") => {
                format = Some(match tokens.get(1).copied() {
                    Some("ascii") => Format::Ascii,
                    Some("binary_little_endian") => Format::BinaryLe,
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("unsupported format {:?}", other.unwrap_or("")),
                        ))
                    }
                });
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let (Some(name), Some(count)) = (tokens.get(1), tokens.get(2)) else {
                    return Err(parse_err(line_no, format!("malformed element line `{raw}`")));
                };
                let count = count
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(line_no, "property before any element"))?;
                let prop = if tokens.get(1) == Some(&"list") {
                    if tokens.len() != 5 {
                        return Err(parse_err(line_no, format!("malformed list property `{raw}`")));
                    }
                    Property {
                        name: tokens[4].to_string(),
                        kind: Scalar::parse(tokens[3]).ok_or_else(|| parse_err(line_no, "unknown list item type"))?,
                        is_list: true,
                    }
                } else {
                    if tokens.len() != 3 {
                        return Err(parse_err(line_no, format!("malformed property `{raw}`")));
                    }
                    Property {
                        name: tokens[2].to_string(),
                        kind: Scalar::parse(tokens[1])
                            .ok_or_else(|| parse_err(line_no, format!("unknown property type `{}`", tokens[1])))?,
                        is_list: false,
                    }
                };
                elem.props.push(prop);
            }
            Some("end_header") => break,
            _ => return Err(parse_err(line_no, format!("unexpected header line `{raw}`"))),
        }
    }
    let format = format.ok_or_else(|| parse_err(line_no, "header has no format line"))?;
    Ok(Header {
        format,
        elements,
        body_offset: pos,
        body_first_line: line_no + 1,
    })
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<RawPointCloud> {
    let data = fs::read(path)?;
    parse_ply(&data)
}

pub fn parse_ply(data: &[u8]) -> Result<RawPointCloud> {
    let header = parse_header(data)?;
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::Schema("no vertex element".into()))?;
    let vertex = &header.elements[vi];
    let find = |n: &str| vertex.props.iter().position(|p| p.name == n && !p.is_list);
    let (Some(ix), Some(iy), Some(iz)) = (find("x"), find("y"), find("z")) else {
        return Err(Error::Schema("vertex element lacks x/y/z properties".into()));
    };
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    if vertex.props.iter().any(|p| p.is_list) {
        return Err(Error::Schema("list properties on vertex are not supported".into()));
    }
    let make = |vals: &[f64]| {
        let mut p = RawPoint::new(vals[ix], vals[iy], vals[iz]);
        if let Some([r, g, b]) = rgb {
            p.color = Some([vals[r] as u8, vals[g] as u8, vals[b] as u8]);
        }
        p
    };

    let mut points = Vec::with_capacity(vertex.count);
    match header.format {
        Format::Ascii => {
            let body = std::str::from_utf8(&data[header.body_offset..])
                .map_err(|_| parse_err(header.body_first_line, "ASCII body is not UTF-8"))?;
            let mut lines = body
                .lines()
                .enumerate()
                .map(|(i, l)| (header.body_first_line + i, l))
                .filter(|(_, l)| !l.trim().is_empty());
            for elem in &header.elements[..vi] {
                for _ in 0..elem.count {
                    lines.next().ok_or_else(|| {
                        parse_err(header.body_first_line, format!("truncated `{}` element", elem.name))
                    })?;
                }
            }
            let mut vals = vec![0.0; vertex.props.len()];
            let mut last_line = header.body_first_line;
            for k in 0..vertex.count {
                let (line_no, line) = lines.next().ok_or_else(|| {
                    parse_err(
                        last_line,
                        format!("header declares {} vertices, body has {k}", vertex.count),
                    )
                })?;
                last_line = line_no;
                let mut toks = line.split_whitespace();
                for v in vals.iter_mut() {
                    let t = toks
                        .next()
                        .ok_or_else(|| parse_err(line_no, "too few values in vertex row"))?;
                    *v = t.parse().map_err(|_| parse_err(line_no, format!("bad number `{t}`")))?;
                }
                points.push(make(&vals));
            }
        }
        Format::BinaryLe => {
            let mut pos = header.body_offset;
            for elem in &header.elements[..vi] {
                if elem.props.iter().any(|p| p.is_list) {
                    return Err(Error::Schema(format!(
                        "cannot skip list-valued element `{}` before vertex",
                        elem.name
                    )));
                }
                let stride: usize = elem.props.iter().map(|p| p.kind.size()).sum();
                pos += stride * elem.count;
            }
            let stride: usize = vertex.props.iter().map(|p| p.kind.size()).sum();
            let needed = pos + stride * vertex.count;
            if data.len() < needed {
                return Err(parse_err(
                    header.body_first_line,
                    format!(
                        "header declares {} vertices, body holds {}",
                        vertex.count,
                        data.len().saturating_sub(pos) / stride.max(1)
                    ),
                ));
            }
            let mut vals = vec![0.0; vertex.props.len()];
            for _ in 0..vertex.count {
                for (v, p) in vals.iter_mut().zip(&vertex.props) {
                    *v = p.kind.read_le(&data[pos..]);
                    pos += p.kind.size();
                }
                points.push(make(&vals));
            }
        }
    }
    Ok(RawPointCloud::new(points))
}

/// Writes an ASCII PLY with float coordinates and optional uchar colors.
pub fn write_ply_ascii(path: impl AsRef<Path>, cloud: &RawPointCloud) -> Result<()> {
    let colored = cloud.has_colors();
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", cloud.len());
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    if colored {
        s.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    s.push_str("end_header\n");
    for p in &cloud.points {
        let _ = write!(s, "{} {} {}", p.x, p.y, p.z);
        if let (true, Some(c)) = (colored, p.color) {
            let _ = write!(s, " {} {} {}", c[0], c[1], c[2]);
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}
