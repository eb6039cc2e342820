//! PLY (ASCII and binary little-endian) and XYZ text readers and writers.
//!
//! Only the `vertex` element is interpreted. Its `x`, `y`, `z` properties are
//! required; a float property named `std` is returned as a scalar channel.
//! Other elements and properties are skipped.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{Point3, PointCloud};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    PlyAscii,
    PlyBinaryLe,
    XyzText,
}

impl CloudFormat {
    /// Guess from the file extension: `.xyz`/`.txt` are XYZ text, anything
    /// else is PLY (ASCII vs binary is read from the header on load).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("xyz") | Some("txt") => CloudFormat::XyzText,
            _ => CloudFormat::PlyBinaryLe,
        }
    }
}

/// Width of the float properties written to PLY.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// Linear blue-to-red heat map over the scalar channel's `[min, max]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColorMap {
    #[default]
    BlueRed,
}

impl ColorMap {
    /// RGB for `value` given the channel range. A zero-width range maps to
    /// the low (blue) end.
    pub fn rgb(&self, value: f64, min: f64, max: f64) -> [u8; 3] {
        let t = if max > min {
            ((value - min) / (max - min)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        [(255.0 * t).round() as u8, 0, (255.0 * (1.0 - t)).round() as u8]
    }
}

#[derive(Clone, Debug, Default)]
pub struct SaveOptions<'a> {
    pub precision: Precision,
    /// Named per-point scalar written as an extra vertex property.
    pub scalar: Option<(&'a str, &'a [f64])>,
    /// When set together with `scalar`, vertices also get `red,green,blue`.
    pub color_map: Option<ColorMap>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedCloud {
    pub cloud: PointCloud,
    /// The `std` vertex property, when present.
    pub std: Option<Vec<f64>>,
    /// `red,green,blue` vertex properties, when present.
    pub colors: Option<Vec<[u8; 3]>>,
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<LoadedCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        CloudFormat::XyzText => parse_xyz(&bytes),
        CloudFormat::PlyAscii | CloudFormat::PlyBinaryLe => parse_ply(&bytes),
    }
}

pub fn save_cloud(
    cloud: &PointCloud,
    path: impl AsRef<Path>,
    format: CloudFormat,
    options: &SaveOptions<'_>,
) -> Result<()> {
    let path = path.as_ref();
    if let Some((_, values)) = options.scalar {
        if values.len() != cloud.len() {
            return Err(Error::LengthMismatch {
                expected: cloud.len(),
                actual: values.len(),
            });
        }
    }
    let bytes = match format {
        CloudFormat::XyzText => write_xyz(cloud),
        CloudFormat::PlyAscii => write_ply(cloud, options, false),
        CloudFormat::PlyBinaryLe => write_ply(cloud, options, true),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_xyz(bytes: &[u8]) -> Result<LoadedCloud> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("byte 0", e.to_string()))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::parse(
                format!("line {}", lineno + 1),
                format!("expected 3 coordinates, found {}", fields.len()),
            ));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| {
                Error::parse(format!("line {}", lineno + 1), format!("bad number {field:?}"))
            })?;
        }
        points.push(Point3::from(xyz));
    }
    Ok(LoadedCloud {
        cloud: PointCloud::new(points)?,
        std: None,
        colors: None,
    })
}

fn write_xyz(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::new();
    for p in cloud {
        // `{}` on f64 prints the shortest round-tripping form.
        writeln!(out, "{} {} {}", p.x, p.y, p.z).expect("write to Vec");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    body_offset: usize,
    body_line: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut lineno = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(format!("byte {offset}"), "unterminated PLY header"))?;
        let line = std::str::from_utf8(&bytes[offset..offset + end])
            .map_err(|_| Error::parse(format!("line {}", lineno + 1), "header is not UTF-8"))?
            .trim_end_matches('\r')
            .trim();
        offset += end + 1;
        lineno += 1;
        let at = || format!("line {lineno}");
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        if lineno == 1 {
            if keyword != "ply" {
                return Err(Error::parse(at(), "missing 'ply' magic"));
            }
            continue;
        }
        match keyword {
            "" | "comment" | "obj_info" => {}
            "format" => {
                encoding = Some(match words.next() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLe,
                    Some(other) => {
                        return Err(Error::parse(at(), format!("unsupported format {other:?}")))
                    }
                    None => return Err(Error::parse(at(), "missing format name")),
                });
            }
            "element" => {
                let name = words.next().ok_or_else(|| Error::parse(at(), "missing element name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::parse(at(), "bad element count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(at(), "property before any element"))?;
                let ty = words.next().ok_or_else(|| Error::parse(at(), "missing property type"))?;
                let prop = if ty == "list" {
                    let count = words.next().and_then(ScalarType::parse);
                    let item = words.next().and_then(ScalarType::parse);
                    match (count, item) {
                        (Some(count), Some(item)) => Property::List { count, item },
                        _ => return Err(Error::parse(at(), "bad list property")),
                    }
                } else {
                    let ty = ScalarType::parse(ty)
                        .ok_or_else(|| Error::parse(at(), format!("unknown type {ty:?}")))?;
                    let name = words.next().ok_or_else(|| Error::parse(at(), "missing property name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                element.properties.push(prop);
            }
            "end_header" => break,
            other => return Err(Error::parse(at(), format!("unexpected header keyword {other:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse("header", "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body_offset: offset,
        body_line: lineno,
    })
}

/// Column positions of the vertex properties we care about.
struct VertexLayout {
    xyz: [usize; 3],
    std: Option<usize>,
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(element: &Element) -> Result<VertexLayout> {
    let find = |wanted: &str| {
        element.properties.iter().position(
            |p| matches!(p, Property::Scalar { name, .. } if name == wanted),
        )
    };
    let axis = |name: &str| {
        find(name).ok_or_else(|| Error::Format(format!("vertex element has no '{name}' property")))
    };
    let xyz = [axis("x")?, axis("y")?, axis("z")?];
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(VertexLayout {
        xyz,
        std: find("std"),
        rgb,
    })
}

fn parse_ply(bytes: &[u8]) -> Result<LoadedCloud> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_offset..];
    let mut points = Vec::new();
    let mut stds = Vec::new();
    let mut colors = Vec::new();
    let mut layout = None;

    let mut ascii_lines = match header.encoding {
        Encoding::Ascii => Some(
            std::str::from_utf8(body)
                .map_err(|_| Error::parse(format!("line {}", header.body_line + 1), "body is not UTF-8"))?
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty()),
        ),
        Encoding::BinaryLe => None,
    };
    let mut cursor = 0usize;
    let mut row = vec![0.0f64; 0];

    for element in &header.elements {
        let is_vertex = element.name == "vertex";
        if is_vertex {
            layout = Some(vertex_layout(element)?);
            points.reserve(element.count);
        }
        for record in 0..element.count {
            row.clear();
            match ascii_lines.as_mut() {
                Some(lines) => {
                    let (i, line) = lines.next().ok_or_else(|| {
                        Error::parse("end of file", format!("missing {} record {record}", element.name))
                    })?;
                    let at = format!("line {}", header.body_line + i + 1);
                    let mut fields = line.split_whitespace();
                    let mut next = |ty: ScalarType| -> Result<f64> {
                        let f = fields.next().ok_or_else(|| Error::parse(&at, "too few values"))?;
                        let v: f64 = f.parse().map_err(|_| Error::parse(&at, format!("bad number {f:?}")))?;
                        if matches!(ty, ScalarType::F32 | ScalarType::F64) {
                            Ok(v)
                        } else {
                            Ok(v.trunc())
                        }
                    };
                    for prop in &element.properties {
                        match prop {
                            Property::Scalar { ty, .. } => row.push(next(*ty)?),
                            Property::List { count, item } => {
                                let n = next(*count)? as usize;
                                for _ in 0..n {
                                    next(*item)?;
                                }
                                row.push(f64::NAN);
                            }
                        }
                    }
                }
                None => {
                    for prop in &element.properties {
                        let mut take = |ty: ScalarType| -> Result<f64> {
                            let end = cursor + ty.size();
                            if end > body.len() {
                                return Err(Error::parse(
                                    format!("byte {}", header.body_offset + cursor),
                                    format!("truncated {} record {record}", element.name),
                                ));
                            }
                            let v = ty.read_le(&body[cursor..end]);
                            cursor = end;
                            Ok(v)
                        };
                        match prop {
                            Property::Scalar { ty, .. } => row.push(take(*ty)?),
                            Property::List { count, item } => {
                                let n = take(*count)? as usize;
                                for _ in 0..n {
                                    take(*item)?;
                                }
                                row.push(f64::NAN);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                let l = layout.as_ref().expect("layout set for vertex element");
                points.push(Point3::new(row[l.xyz[0]], row[l.xyz[1]], row[l.xyz[2]]));
                if let Some(s) = l.std {
                    stds.push(row[s]);
                }
                if let Some([r, g, b]) = l.rgb {
                    colors.push([row[r] as u8, row[g] as u8, row[b] as u8]);
                }
            }
        }
    }
    let layout = layout.ok_or_else(|| Error::Format("no vertex element".into()))?;
    Ok(LoadedCloud {
        cloud: PointCloud::new(points)?,
        std: layout.std.map(|_| stds),
        colors: layout.rgb.map(|_| colors),
    })
}

fn write_ply(cloud: &PointCloud, options: &SaveOptions<'_>, binary: bool) -> Vec<u8> {
    let float = match options.precision {
        Precision::F32 => "float",
        Precision::F64 => "double",
    };
    let colors: Option<Vec<[u8; 3]>> = match (options.scalar, options.color_map) {
        (Some((_, values)), Some(map)) => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(values.iter().map(|&v| map.rgb(v, min, max)).collect())
        }
        _ => None,
    };

    let mut out = Vec::new();
    let format = if binary { "binary_little_endian" } else { "ascii" };
    writeln!(out, "ply\nformat {format} 1.0\nelement vertex {}", cloud.len()).unwrap();
    for axis in ["x", "y", "z"] {
        writeln!(out, "property {float} {axis}").unwrap();
    }
    if let Some((name, _)) = options.scalar {
        writeln!(out, "property {float} {name}").unwrap();
    }
    if colors.is_some() {
        out.extend_from_slice(b"property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.extend_from_slice(b"end_header\n");

    for (i, p) in cloud.iter().enumerate() {
        let mut values = vec![p.x, p.y, p.z];
        if let Some((_, channel)) = options.scalar {
            values.push(channel[i]);
        }
        if binary {
            for v in values {
                match options.precision {
                    Precision::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                    Precision::F64 => out.extend_from_slice(&v.to_le_bytes()),
                }
            }
            if let Some(c) = &colors {
                out.extend_from_slice(&c[i]);
            }
        } else {
            let text: Vec<String> = values
                .into_iter()
                .map(|v| match options.precision {
                    Precision::F32 => (v as f32).to_string(),
                    Precision::F64 => v.to_string(),
                })
                .collect();
            out.extend_from_slice(text.join(" ").as_bytes());
            if let Some(c) = &colors {
                write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]).unwrap();
            }
            out.push(b'\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn ascii_triangle_in_order() {
        let dir = tmp();
        let path = dir.path().join("t.ply");
        fs::write(
            &path,
            "ply\nformat ascii 1.0\ncomment hi\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n",
        )
        .unwrap();
        let loaded = load_cloud(&path, CloudFormat::PlyAscii).unwrap();
        assert_eq!(
            loaded.cloud.points(),
            &[Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)]
        );
        assert!(loaded.std.is_none());
    }

    #[test]
    fn empty_vertex_element() {
        let dir = tmp();
        let path = dir.path().join("e.ply");
        fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n").unwrap();
        assert_eq!(load_cloud(&path, CloudFormat::PlyAscii).unwrap().cloud.len(), 0);
    }

    #[test]
    fn missing_axis_is_format_error() {
        let dir = tmp();
        let path = dir.path().join("m.ply");
        fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n").unwrap();
        assert_eq!(load_cloud(&path, CloudFormat::PlyAscii).unwrap_err().kind(), "format-error");
    }

    #[test]
    fn malformed_record_reports_line() {
        let dir = tmp();
        let path = dir.path().join("bad.ply");
        fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n1 oops 3\n").unwrap();
        let err = load_cloud(&path, CloudFormat::PlyAscii).unwrap_err();
        assert_eq!(err.kind(), "parse-error");
        assert!(err.to_string().contains("line 9"), "{err}");
    }

    #[test]
    fn truncated_binary_is_parse_error() {
        let dir = tmp();
        let path = dir.path().join("trunc.ply");
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n".to_vec();
        bytes.extend_from_slice(&[0u8; 14]);
        fs::write(&path, bytes).unwrap();
        assert_eq!(load_cloud(&path, CloudFormat::PlyBinaryLe).unwrap_err().kind(), "parse-error");
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_cloud("/definitely/not/here.ply", CloudFormat::PlyAscii).unwrap_err();
        assert_eq!(err.kind(), "io-error");
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![
            Point3::new(0.1, -0.2, 0.30000000000000004),
            Point3::new(1e-300, 7.0, -3.5),
        ])
        .unwrap();
        let path = dir.path().join("rt.ply");
        let std = [0.0, 0.0042];
        let opts = SaveOptions {
            precision: Precision::F64,
            scalar: Some(("std", &std)),
            color_map: None,
        };
        save_cloud(&cloud, &path, CloudFormat::PlyBinaryLe, &opts).unwrap();
        let back = load_cloud(&path, CloudFormat::PlyBinaryLe).unwrap();
        assert_eq!(back.cloud, cloud);
        assert_eq!(back.std.unwrap(), std);
    }

    #[test]
    fn f32_round_trip_matches_f32_rounding() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![Point3::new(0.1, 0.2, 0.3)]).unwrap();
        let path = dir.path().join("f32.ply");
        save_cloud(&cloud, &path, CloudFormat::PlyBinaryLe, &SaveOptions::default()).unwrap();
        let back = load_cloud(&path, CloudFormat::PlyBinaryLe).unwrap().cloud;
        assert_eq!(back[0], Point3::new(0.1f32 as f64, 0.2f32 as f64, 0.3f32 as f64));
    }

    #[test]
    fn ascii_round_trip_within_relative_tolerance() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![Point3::new(0.123456789, -12.5, 3e-4)]).unwrap();
        let path = dir.path().join("a.ply");
        save_cloud(&cloud, &path, CloudFormat::PlyAscii, &SaveOptions::default()).unwrap();
        let back = load_cloud(&path, CloudFormat::PlyAscii).unwrap().cloud;
        for (a, b) in back[0].iter().zip(cloud[0].iter()) {
            assert!((a - b).abs() <= 1e-6 * b.abs());
        }
    }

    #[test]
    fn color_map_endpoints_and_degenerate_range() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)]).unwrap();
        let path = dir.path().join("c.ply");
        let std = [0.002, 0.006];
        let opts = SaveOptions {
            precision: Precision::F32,
            scalar: Some(("std", &std)),
            color_map: Some(ColorMap::BlueRed),
        };
        save_cloud(&cloud, &path, CloudFormat::PlyAscii, &opts).unwrap();
        let colors = load_cloud(&path, CloudFormat::PlyAscii).unwrap().colors.unwrap();
        assert_eq!(colors, vec![[0, 0, 255], [255, 0, 0]]);

        let flat = [0.004, 0.004];
        let opts = SaveOptions { scalar: Some(("std", &flat)), ..opts };
        save_cloud(&cloud, &path, CloudFormat::PlyBinaryLe, &opts).unwrap();
        let colors = load_cloud(&path, CloudFormat::PlyBinaryLe).unwrap().colors.unwrap();
        assert_eq!(colors, vec![[0, 0, 255], [0, 0, 255]]);
    }

    #[test]
    fn scalar_length_mismatch() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![Point3::origin()]).unwrap();
        let std = [0.1, 0.2];
        let opts = SaveOptions { scalar: Some(("std", &std)), ..Default::default() };
        let err = save_cloud(&cloud, dir.path().join("x.ply"), CloudFormat::PlyAscii, &opts).unwrap_err();
        assert_eq!(err.kind(), "length-mismatch-error");
    }

    #[test]
    fn xyz_round_trip() {
        let dir = tmp();
        let cloud = PointCloud::new(vec![Point3::new(0.1, 0.2, 0.3), Point3::new(-4.0, 5.5, 1e-9)]).unwrap();
        let path = dir.path().join("c.xyz");
        save_cloud(&cloud, &path, CloudFormat::XyzText, &SaveOptions::default()).unwrap();
        assert_eq!(load_cloud(&path, CloudFormat::XyzText).unwrap().cloud, cloud);
    }
}
