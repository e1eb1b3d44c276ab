//! Mesh file formats: OBJ, OFF, PLY (ascii read/write, binary read) and STL
//! (ascii write, ascii/binary read).
//!
//! Polygons with more than three corners are fan-triangulated on load.
//! Coordinates are written with 9 significant digits in their shortest
//! round-tripping decimal form.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{GeoError, Result};
use crate::Vec3;

use super::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
    Ply,
    Stl,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            "ply" => Ok(MeshFormat::Ply),
            "stl" => Ok(MeshFormat::Stl),
            _ => Err(GeoError::UnsupportedFormat(format!(
                "cannot infer mesh format from '{}'",
                path.display()
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Off => "off",
            MeshFormat::Ply => "ply",
            MeshFormat::Stl => "stl",
        }
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            "ply" => Ok(MeshFormat::Ply),
            "stl" => Ok(MeshFormat::Stl),
            other => Err(GeoError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn load_mesh_file(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let file = std::fs::File::open(path)?;
    load_mesh(BufReader::new(file), format)
}

pub fn save_mesh_file(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    save_mesh(mesh, &mut out, format)?;
    out.flush()?;
    Ok(())
}

pub fn load_mesh<R: Read>(mut source: R, format: MeshFormat) -> Result<Mesh> {
    match format {
        MeshFormat::Obj => load_obj(BufReader::new(source)),
        MeshFormat::Off => load_off(BufReader::new(source)),
        MeshFormat::Ply => {
            let mut bytes = Vec::new();
            source.read_to_end(&mut bytes)?;
            load_ply(&bytes)
        }
        MeshFormat::Stl => {
            let mut bytes = Vec::new();
            source.read_to_end(&mut bytes)?;
            load_stl(&bytes)
        }
    }
}

pub fn save_mesh<W: Write>(mesh: &Mesh, out: &mut W, format: MeshFormat) -> Result<()> {
    match format {
        MeshFormat::Obj => {
            for v in mesh.vertices() {
                writeln!(out, "v {} {} {}", fmt9(v.x), fmt9(v.y), fmt9(v.z))?;
            }
            for f in mesh.faces() {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        MeshFormat::Off => {
            writeln!(out, "OFF")?;
            writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.face_count())?;
            for v in mesh.vertices() {
                writeln!(out, "{} {} {}", fmt9(v.x), fmt9(v.y), fmt9(v.z))?;
            }
            for f in mesh.faces() {
                writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Ply => {
            writeln!(out, "ply")?;
            writeln!(out, "format ascii 1.0")?;
            writeln!(out, "element vertex {}", mesh.vertex_count())?;
            writeln!(out, "property double x")?;
            writeln!(out, "property double y")?;
            writeln!(out, "property double z")?;
            writeln!(out, "element face {}", mesh.face_count())?;
            writeln!(out, "property list uchar int vertex_indices")?;
            writeln!(out, "end_header")?;
            for v in mesh.vertices() {
                writeln!(out, "{} {} {}", fmt9(v.x), fmt9(v.y), fmt9(v.z))?;
            }
            for f in mesh.faces() {
                writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Stl => {
            let normals = mesh.normals();
            writeln!(out, "solid mesh")?;
            for (fi, n) in normals.face.iter().enumerate() {
                writeln!(out, "facet normal {} {} {}", fmt9(n.x), fmt9(n.y), fmt9(n.z))?;
                writeln!(out, "outer loop")?;
                for v in mesh.triangle(fi) {
                    writeln!(out, "vertex {} {} {}", fmt9(v.x), fmt9(v.y), fmt9(v.z))?;
                }
                writeln!(out, "endloop")?;
                writeln!(out, "endfacet")?;
            }
            writeln!(out, "endsolid mesh")?;
        }
    }
    Ok(())
}

/// Shortest decimal that round-trips the value rounded to 9 significant digits.
pub fn fmt9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

fn parse_err(format: MeshFormat, line: usize, message: impl Into<String>) -> GeoError {
    GeoError::Parse {
        format: format.name(),
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: Option<&str>, format: MeshFormat, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(format, line, "missing coordinate"))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(format, line, format!("bad number '{tok}'")))
}

fn fan(poly: &[u32], faces: &mut Vec<[u32; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

/// Checks indices against the vertex count before `Mesh::new` so corrupt
/// face lists report the offending face.
fn finish(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Mesh> {
    Mesh::new(vertices, faces)
}

fn load_obj<R: BufRead>(reader: R) -> Result<Mesh> {
    let fmt = MeshFormat::Obj;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = ln + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), fmt, lineno)?;
                let y = parse_f64(toks.next(), fmt, lineno)?;
                let z = parse_f64(toks.next(), fmt, lineno)?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                poly.clear();
                for tok in toks {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(fmt, lineno, format!("bad face index '{tok}'")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(fmt, lineno, "face index 0 is invalid"));
                    };
                    if resolved < 0 || resolved > u32::MAX as i64 {
                        return Err(GeoError::IndexOutOfRange {
                            face: faces.len(),
                            index: resolved.max(0) as usize,
                            vertex_count: vertices.len(),
                        });
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(parse_err(fmt, lineno, "face with fewer than 3 vertices"));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    finish(vertices, faces)
}

/// Iterator over whitespace tokens with comment stripping and line tracking.
struct Tokens<R: BufRead> {
    reader: R,
    buf: Vec<String>,
    pos: usize,
    line: usize,
}

impl<R: BufRead> Tokens<R> {
    fn new(reader: R) -> Self {
        Tokens {
            reader,
            buf: Vec::new(),
            pos: 0,
            line: 0,
        }
    }

    /// Next non-empty line as tokens.
    fn next_line(&mut self) -> Result<Option<Vec<String>>> {
        loop {
            let mut s = String::new();
            if self.reader.read_line(&mut s)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let content = s.split('#').next().unwrap_or("");
            let toks: Vec<String> = content.split_whitespace().map(str::to_string).collect();
            if !toks.is_empty() {
                return Ok(Some(toks));
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<String>> {
        while self.pos >= self.buf.len() {
            match self.next_line()? {
                Some(t) => {
                    self.buf = t;
                    self.pos = 0;
                }
                None => return Ok(None),
            }
        }
        self.pos += 1;
        Ok(Some(self.buf[self.pos - 1].clone()))
    }
}

fn load_off<R: BufRead>(reader: R) -> Result<Mesh> {
    let fmt = MeshFormat::Off;
    let mut toks = Tokens::new(reader);
    let header = toks
        .next_token()?
        .ok_or_else(|| parse_err(fmt, 0, "empty file"))?;
    if header != "OFF" {
        return Err(parse_err(fmt, toks.line, format!("expected 'OFF', found '{header}'")));
    }
    let mut count = |what: &str| -> Result<usize> {
        let t = toks
            .next_token()?
            .ok_or_else(|| parse_err(fmt, toks.line, format!("missing {what} count")))?;
        t.parse()
            .map_err(|_| parse_err(fmt, toks.line, format!("bad {what} count '{t}'")))
    };
    let nv = count("vertex")?;
    let nf = count("face")?;
    let _ne = count("edge")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = toks
            .next_line()?
            .ok_or_else(|| parse_err(fmt, toks.line, "unexpected end of vertex list"))?;
        let mut it = line.iter().map(String::as_str);
        let x = parse_f64(it.next(), fmt, toks.line)?;
        let y = parse_f64(it.next(), fmt, toks.line)?;
        let z = parse_f64(it.next(), fmt, toks.line)?;
        vertices.push(Vec3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    let mut poly = Vec::new();
    for fi in 0..nf {
        let line = toks
            .next_line()?
            .ok_or_else(|| parse_err(fmt, toks.line, "unexpected end of face list"))?;
        let k: usize = line[0]
            .parse()
            .map_err(|_| parse_err(fmt, toks.line, "bad polygon size"))?;
        if k < 3 || line.len() < k + 1 {
            return Err(parse_err(fmt, toks.line, "malformed polygon"));
        }
        poly.clear();
        for t in &line[1..=k] {
            let idx: usize = t
                .parse()
                .map_err(|_| parse_err(fmt, toks.line, format!("bad index '{t}'")))?;
            if idx >= nv {
                return Err(GeoError::IndexOutOfRange {
                    face: fi,
                    index: idx,
                    vertex_count: nv,
                });
            }
            poly.push(idx as u32);
        }
        fan(&poly, &mut faces);
    }
    finish(vertices, faces)
}

#[derive(Debug, Clone, Copy, PartialEq)]
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
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
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

    fn read(self, bytes: &[u8], big_endian: bool) -> f64 {
        macro_rules! rd {
            ($t:ty, $n:expr) => {{
                let mut a = [0u8; $n];
                a.copy_from_slice(&bytes[..$n]);
                if big_endian {
                    <$t>::from_be_bytes(a) as f64
                } else {
                    <$t>::from_le_bytes(a) as f64
                }
            }};
        }
        match self {
            Scalar::I8 => bytes[0] as i8 as f64,
            Scalar::U8 => bytes[0] as f64,
            Scalar::I16 => rd!(i16, 2),
            Scalar::U16 => rd!(u16, 2),
            Scalar::I32 => rd!(i32, 4),
            Scalar::U32 => rd!(u32, 4),
            Scalar::F32 => rd!(f32, 4),
            Scalar::F64 => rd!(f64, 8),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, PartialEq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

fn load_ply(bytes: &[u8]) -> Result<Mesh> {
    let fmt = MeshFormat::Ply;
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut next_header_line = |pos: &mut usize| -> Result<String> {
        let rest = &bytes[*pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_err(fmt, line_no, "unterminated header"))?;
        *pos += end + 1;
        line_no += 1;
        Ok(String::from_utf8_lossy(&rest[..end]).trim().to_string())
    };

    if next_header_line(&mut pos)? != "ply" {
        return Err(parse_err(fmt, 1, "missing 'ply' magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_header_line(&mut pos)?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", enc, _ver] => {
                encoding = Some(match *enc {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLe,
                    "binary_big_endian" => PlyEncoding::BinaryBe,
                    other => return Err(parse_err(fmt, 0, format!("unknown encoding '{other}'"))),
                })
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| parse_err(fmt, 0, format!("bad element count '{count}'")))?,
                props: Vec::new(),
            }),
            ["property", "list", cty, ity, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(fmt, 0, "property before element"))?;
                el.props.push(Property::List {
                    name: name.to_string(),
                    count: Scalar::parse(cty)
                        .ok_or_else(|| parse_err(fmt, 0, format!("bad type '{cty}'")))?,
                    item: Scalar::parse(ity)
                        .ok_or_else(|| parse_err(fmt, 0, format!("bad type '{ity}'")))?,
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(fmt, 0, "property before element"))?;
                el.props.push(Property::Scalar {
                    name: name.to_string(),
                    ty: Scalar::parse(ty)
                        .ok_or_else(|| parse_err(fmt, 0, format!("bad type '{ty}'")))?,
                });
            }
            ["end_header"] => break,
            [] => {}
            _ => return Err(parse_err(fmt, 0, format!("unrecognized header line '{line}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| parse_err(fmt, 0, "missing format line"))?;

    // Each element record is decoded into (scalar values by name, list values).
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut body = PlyBody {
        bytes,
        pos,
        encoding,
        ascii_tokens: None,
    };
    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [0.0f64; 3];
            let mut poly: Option<Vec<f64>> = None;
            for p in &el.props {
                match p {
                    Property::Scalar { name, ty } => {
                        let v = body.scalar(*ty)?;
                        match name.as_str() {
                            "x" => xyz[0] = v,
                            "y" => xyz[1] = v,
                            "z" => xyz[2] = v,
                            _ => {}
                        }
                    }
                    Property::List { name, count, item } => {
                        let n = body.scalar(*count)? as usize;
                        let mut vals = Vec::with_capacity(n);
                        for _ in 0..n {
                            vals.push(body.scalar(*item)?);
                        }
                        if name == "vertex_indices" || name == "vertex_index" {
                            poly = Some(vals);
                        }
                    }
                }
            }
            match el.name.as_str() {
                "vertex" => vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2])),
                "face" => {
                    let vals = poly.ok_or_else(|| parse_err(fmt, 0, "face without vertex_indices"))?;
                    if vals.len() < 3 {
                        return Err(parse_err(fmt, 0, "face with fewer than 3 vertices"));
                    }
                    let mut idx = Vec::with_capacity(vals.len());
                    for v in vals {
                        if v < 0.0 || v >= u32::MAX as f64 {
                            return Err(GeoError::IndexOutOfRange {
                                face: faces.len(),
                                index: v.max(0.0) as usize,
                                vertex_count: vertices.len(),
                            });
                        }
                        idx.push(v as u32);
                    }
                    fan(&idx, &mut faces);
                }
                _ => {}
            }
        }
    }
    finish(vertices, faces)
}

struct PlyBody<'a> {
    bytes: &'a [u8],
    pos: usize,
    encoding: PlyEncoding,
    ascii_tokens: Option<std::vec::IntoIter<&'a str>>,
}

impl<'a> PlyBody<'a> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let fmt = MeshFormat::Ply;
        match self.encoding {
            PlyEncoding::Ascii => {
                if self.ascii_tokens.is_none() {
                    let text = std::str::from_utf8(&self.bytes[self.pos..])
                        .map_err(|_| parse_err(fmt, 0, "ascii body is not utf-8"))?;
                    let toks: Vec<&'a str> = text.split_whitespace().collect();
                    self.ascii_tokens = Some(toks.into_iter());
                }
                let tok = self
                    .ascii_tokens
                    .as_mut()
                    .unwrap()
                    .next()
                    .ok_or_else(|| parse_err(fmt, 0, "unexpected end of data"))?;
                tok.parse::<f64>()
                    .map_err(|_| parse_err(fmt, 0, format!("bad number '{tok}'")))
            }
            PlyEncoding::BinaryLe | PlyEncoding::BinaryBe => {
                let n = ty.size();
                if self.pos + n > self.bytes.len() {
                    return Err(parse_err(fmt, 0, "unexpected end of binary data"));
                }
                let v = ty.read(&self.bytes[self.pos..], self.encoding == PlyEncoding::BinaryBe);
                self.pos += n;
                Ok(v)
            }
        }
    }
}

fn load_stl(bytes: &[u8]) -> Result<Mesh> {
    let fmt = MeshFormat::Stl;
    let is_binary = bytes.len() >= 84 && {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        84 + 50 * n == bytes.len()
    };
    let mut corners: Vec<Vec3> = Vec::new();
    if is_binary {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        for t in 0..n {
            let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
            for k in 0..3 {
                let off = 12 + 12 * k;
                let c: Vec<f64> = (0..3)
                    .map(|d| Scalar::F32.read(&rec[off + 4 * d..], false))
                    .collect();
                corners.push(Vec3::new(c[0], c[1], c[2]));
            }
        }
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| parse_err(fmt, 0, "not ascii STL"))?;
        if !text.trim_start().starts_with("solid") {
            return Err(parse_err(fmt, 1, "missing 'solid' header"));
        }
        for (ln, line) in text.lines().enumerate() {
            let mut toks = line.split_whitespace();
            if toks.next() == Some("vertex") {
                let x = parse_f64(toks.next(), fmt, ln + 1)?;
                let y = parse_f64(toks.next(), fmt, ln + 1)?;
                let z = parse_f64(toks.next(), fmt, ln + 1)?;
                corners.push(Vec3::new(x, y, z));
            }
        }
        if !corners.len().is_multiple_of(3) {
            return Err(parse_err(fmt, 0, "vertex count is not a multiple of 3"));
        }
    }
    // Weld corners with bit-identical coordinates, in first-seen order.
    let mut ids: HashMap<[u64; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(corners.len() / 3);
    for tri in corners.chunks(3) {
        let mut f = [0u32; 3];
        for (k, c) in tri.iter().enumerate() {
            // +0.0 folds -0.0 onto 0.0
            let key = [(c.x + 0.0).to_bits(), (c.y + 0.0).to_bits(), (c.z + 0.0).to_bits()];
            f[k] = *ids.entry(key).or_insert_with(|| {
                vertices.push(*c);
                (vertices.len() - 1) as u32
            });
        }
        faces.push(f);
    }
    finish(vertices, faces)
}
