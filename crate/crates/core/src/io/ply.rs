//! PLY point-cloud reading and writing (ascii and binary little-endian).
//!
//! Only the `vertex` element is interpreted. `x`, `y`, `z` may be `float` or
//! `double`; `red`, `green`, `blue` must be `uchar`. Other vertex properties
//! and other scalar-only elements are skipped.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frame::{PointCloud, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
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
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
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
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
    line: usize,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
    // number of text lines consumed by the header
    lines: usize,
}

fn header_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Ply { location: format!("header line {line}"), reason: reason.into() }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let next_line = |pos: &mut usize| -> Option<String> {
        if *pos >= bytes.len() {
            return None;
        }
        let end = bytes[*pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| *pos + i);
        let line = String::from_utf8_lossy(&bytes[*pos..end]).trim_end_matches('\r').to_string();
        *pos = (end + 1).min(bytes.len());
        Some(line)
    };

    line_no += 1;
    match next_line(&mut pos) {
        Some(l) if l.trim() == "ply" => {}
        _ => return Err(header_err(1, "missing 'ply' magic")),
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        line_no += 1;
        let Some(line) = next_line(&mut pos) else {
            return Err(header_err(line_no, "header not terminated by end_header"));
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", kind, version] => {
                if *version != "1.0" {
                    return Err(header_err(line_no, format!("unsupported version '{version}'")));
                }
                format = Some(match *kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(header_err(line_no, format!("unsupported format '{other}'")))
                    }
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| header_err(line_no, format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    line: line_no,
                });
            }
            ["property", "list", _, _, _] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                el.properties.push(Property::List);
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| header_err(line_no, format!("unknown type '{ty}'")))?;
                el.properties.push(Property::Scalar(name.to_string(), ty));
            }
            ["end_header"] => break,
            _ => return Err(header_err(line_no, format!("unrecognized header line '{line}'"))),
        }
    }
    let format = format.ok_or_else(|| header_err(line_no, "no format line"))?;
    Ok(Header { format, elements, body_offset: pos, lines: line_no })
}

// Column positions of the properties we care about within a vertex record.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(el: &Element) -> Result<VertexLayout> {
    let find = |want: &str| {
        el.properties.iter().position(|p| matches!(p, Property::Scalar(n, _) if n == want))
    };
    let ty = |i: usize| match &el.properties[i] {
        Property::Scalar(_, t) => *t,
        Property::List => unreachable!(),
    };
    if el.properties.iter().any(|p| matches!(p, Property::List)) {
        return Err(header_err(el.line, "list properties on vertex are not supported"));
    }
    let mut xyz = [0; 3];
    for (a, name) in ["x", "y", "z"].iter().enumerate() {
        let i = find(name).ok_or_else(|| header_err(el.line, format!("vertex lacks '{name}'")))?;
        if !matches!(ty(i), Scalar::F32 | Scalar::F64) {
            return Err(header_err(el.line, format!("'{name}' must be float or double")));
        }
        xyz[a] = i;
    }
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            if [r, g, b].iter().any(|&i| ty(i) != Scalar::U8) {
                return Err(header_err(el.line, "colors must be uchar"));
            }
            Some([r, g, b])
        }
        (None, None, None) => None,
        _ => return Err(header_err(el.line, "partial red/green/blue properties")),
    };
    Ok(VertexLayout { xyz, rgb })
}

/// Parses a PLY file into a point cloud with a cubified tight bounding box.
pub fn read_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    let vertex_idx = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| header_err(header.lines, "no vertex element"))?;
    let layout = vertex_layout(&header.elements[vertex_idx])?;
    let (points, colors) = match header.format {
        PlyFormat::Ascii => read_ascii(bytes, &header, vertex_idx, &layout)?,
        PlyFormat::BinaryLittleEndian => read_binary(bytes, &header, vertex_idx, &layout)?,
    };
    if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Ply {
            location: format!("vertex {i}"),
            reason: "non-finite coordinate".into(),
        });
    }
    PointCloud::new(points, colors)
}

type Body = (Vec<[f64; 3]>, Option<Vec<Rgb>>);

fn read_ascii(bytes: &[u8], header: &Header, vertex_idx: usize, layout: &VertexLayout) -> Result<Body> {
    let text = std::str::from_utf8(&bytes[header.body_offset..]).map_err(|e| Error::Ply {
        location: format!("byte {}", header.body_offset + e.valid_up_to()),
        reason: "ascii body is not UTF-8".into(),
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (header.lines + 1 + i, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());
    for (ei, el) in header.elements.iter().enumerate() {
        for k in 0..el.count {
            let Some((line_no, line)) = lines.next() else {
                return Err(Error::Ply {
                    location: format!("line {}", header.lines + text.lines().count() + 1),
                    reason: format!("element '{}' declares {} entries, found {k}", el.name, el.count),
                });
            };
            if ei != vertex_idx {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != el.properties.len() {
                return Err(Error::Ply {
                    location: format!("line {line_no}"),
                    reason: format!("expected {} values, found {}", el.properties.len(), tokens.len()),
                });
            }
            let field = |i: usize| -> Result<f64> {
                let parsed = match &el.properties[i] {
                    Property::Scalar(_, Scalar::F32) => f32::from_str(tokens[i]).map(f64::from),
                    _ => f64::from_str(tokens[i]),
                };
                parsed.map_err(|_| Error::Ply {
                    location: format!("line {line_no}"),
                    reason: format!("bad number '{}'", tokens[i]),
                })
            };
            points.push([field(layout.xyz[0])?, field(layout.xyz[1])?, field(layout.xyz[2])?]);
            if let (Some(out), Some(idx)) = (colors.as_mut(), layout.rgb) {
                let mut rgb = [0u8; 3];
                for (c, &i) in rgb.iter_mut().zip(&idx) {
                    *c = tokens[i].parse().map_err(|_| Error::Ply {
                        location: format!("line {line_no}"),
                        reason: format!("bad color value '{}'", tokens[i]),
                    })?;
                }
                out.push(rgb);
            }
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Ply {
            location: format!("line {line_no}"),
            reason: "data beyond the declared element counts".into(),
        });
    }
    Ok((points, colors))
}

fn read_binary(bytes: &[u8], header: &Header, vertex_idx: usize, layout: &VertexLayout) -> Result<Body> {
    let mut pos = header.body_offset;
    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());
    for (ei, el) in header.elements.iter().enumerate() {
        let mut offsets = Vec::with_capacity(el.properties.len());
        let mut record = 0usize;
        for p in &el.properties {
            match p {
                Property::Scalar(_, t) => {
                    offsets.push((record, *t));
                    record += t.size();
                }
                Property::List => {
                    return Err(header_err(
                        el.line,
                        format!("binary list properties in '{}' are not supported", el.name),
                    ))
                }
            }
        }
        let needed = record.checked_mul(el.count).ok_or_else(|| header_err(el.line, "element too large"))?;
        if bytes.len() - pos < needed {
            let have = (bytes.len() - pos) / record.max(1);
            return Err(Error::Ply {
                location: format!("byte {}", bytes.len()),
                reason: format!("element '{}' declares {} entries, found {have}", el.name, el.count),
            });
        }
        if ei == vertex_idx {
            points.reserve(el.count);
            for k in 0..el.count {
                let rec = &bytes[pos + k * record..pos + (k + 1) * record];
                let float = |i: usize| {
                    let (off, t) = offsets[i];
                    match t {
                        Scalar::F32 => f64::from(f32::from_le_bytes(rec[off..off + 4].try_into().unwrap())),
                        _ => f64::from_le_bytes(rec[off..off + 8].try_into().unwrap()),
                    }
                };
                points.push([float(layout.xyz[0]), float(layout.xyz[1]), float(layout.xyz[2])]);
                if let (Some(out), Some(idx)) = (colors.as_mut(), layout.rgb) {
                    out.push(idx.map(|i| rec[offsets[i].0]));
                }
            }
        }
        pos += needed;
    }
    if pos != bytes.len() {
        return Err(Error::Ply {
            location: format!("byte {pos}"),
            reason: format!("{} bytes beyond the declared element counts", bytes.len() - pos),
        });
    }
    Ok((points, colors))
}

/// Serializes a cloud with `float` coordinates and optional `uchar` colors.
pub fn write_ply(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
    let mut out = String::from("ply\n");
    out.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.colors().is_some() {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.push_str("end_header\n");
    let mut bytes = out.into_bytes();
    for (i, p) in cloud.points().iter().enumerate() {
        let xyz = p.map(|v| v as f32);
        let rgb = cloud.colors().map(|c| c[i]);
        match format {
            PlyFormat::Ascii => {
                let mut line = format!("{} {} {}", xyz[0], xyz[1], xyz[2]);
                if let Some(c) = rgb {
                    line.push_str(&format!(" {} {} {}", c[0], c[1], c[2]));
                }
                line.push('\n');
                bytes.extend_from_slice(line.as_bytes());
            }
            PlyFormat::BinaryLittleEndian => {
                for v in xyz {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(c) = rgb {
                    bytes.extend_from_slice(&c);
                }
            }
        }
    }
    bytes
}
