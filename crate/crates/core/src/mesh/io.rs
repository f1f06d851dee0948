//! ASCII readers and writers for OFF, Wavefront OBJ (`v`/`f` records) and
//! Gmsh MSH 2.2.
//!
//! Every reader produces a [`PolygonSoup`] with 0-based vertex indices;
//! validation happens in [`super::LoadedMesh::from_soup`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, Vec3};

/// Raw vertex positions and facets as read from a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolygonSoup {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Msh,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            "msh" => Some(MeshFormat::Msh),
            _ => None,
        }
    }

    pub fn parse(self, text: &str) -> Result<PolygonSoup, MeshError> {
        match self {
            MeshFormat::Off => parse_off(text),
            MeshFormat::Obj => parse_obj(text),
            MeshFormat::Msh => parse_msh(text),
        }
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            "msh" => Ok(MeshFormat::Msh),
            other => Err(format!("unknown mesh format '{other}'")),
        }
    }
}

impl PolygonSoup {
    pub fn from_mesh<M: super::FacetMesh>(mesh: &M) -> Self {
        PolygonSoup {
            vertices: mesh.vertices().to_vec(),
            faces: (0..mesh.facet_count()).map(|f| mesh.facet(f).to_vec()).collect(),
        }
    }

    pub fn to_format(&self, format: MeshFormat) -> String {
        match format {
            MeshFormat::Off => write_off(self),
            MeshFormat::Obj => write_obj(self),
            MeshFormat::Msh => write_msh(self),
        }
    }
}

pub fn write_off(soup: &PolygonSoup) -> String {
    let mut out = format!("OFF\n{} {} 0\n", soup.vertices.len(), soup.faces.len());
    for p in &soup.vertices {
        let _ = writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in &soup.faces {
        let _ = write!(out, "{}", f.len());
        for v in f {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_obj(soup: &PolygonSoup) -> String {
    let mut out = String::new();
    for p in &soup.vertices {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in &soup.faces {
        out.push('f');
        for v in f {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out
}

/// MSH 2.2 ASCII with 1-based node ids and one physical/elementary tag pair.
pub fn write_msh(soup: &PolygonSoup) -> String {
    let mut out = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(out, "{}", soup.vertices.len());
    for (i, p) in soup.vertices.iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, p.x, p.y, p.z);
    }
    let _ = writeln!(out, "$EndNodes\n$Elements\n{}", soup.faces.len());
    for (i, f) in soup.faces.iter().enumerate() {
        let kind = if f.len() == 4 { MSH_QUAD } else { MSH_TRIANGLE };
        let _ = write!(out, "{} {kind} 2 1 1", i + 1);
        for v in f {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out.push_str("$EndElements\n");
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeshError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate '{tok}'")));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid integer '{tok}'")))
}

/// Non-empty lines with `#` comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// Caps preallocation driven by header counts so hostile headers cannot
/// request huge buffers.
fn capacity_hint(count: usize, text: &str) -> usize {
    count.min(text.len())
}

pub fn parse_off(text: &str) -> Result<PolygonSoup, MeshError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first().map(|t| t.to_ascii_uppercase()) != Some("OFF".to_string()) {
        return Err(parse_err(line, "missing OFF header"));
    }
    tokens.remove(0);
    let (count_line, counts) = if tokens.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| parse_err(line, "missing counts line"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, tokens)
    };
    if counts.len() < 2 {
        return Err(parse_err(count_line, "expected vertex and face counts"));
    }
    let nv = parse_usize(counts[0], count_line)?;
    let nf = parse_usize(counts[1], count_line)?;

    let mut vertices = Vec::with_capacity(capacity_hint(nv, text));
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| parse_err(count_line, "file ends inside vertex block"))?;
        let t: Vec<&str> = s.split_whitespace().collect();
        if t.len() < 3 {
            return Err(parse_err(l, "vertex needs three coordinates"));
        }
        vertices.push(Vec3::new(parse_f64(t[0], l)?, parse_f64(t[1], l)?, parse_f64(t[2], l)?));
    }
    let mut faces = Vec::with_capacity(capacity_hint(nf, text));
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| parse_err(count_line, "file ends inside face block"))?;
        let mut t = s.split_whitespace();
        let k = parse_usize(t.next().unwrap_or(""), l)?;
        let face = t
            .by_ref()
            .take(k)
            .map(|tok| parse_usize(tok, l))
            .collect::<Result<Vec<_>, _>>()?;
        if face.len() != k {
            return Err(parse_err(l, format!("face declares {k} vertices but lists {}", face.len())));
        }
        // Remaining tokens are optional colour values.
        faces.push(face);
    }
    Ok(PolygonSoup { vertices, faces })
}

pub fn parse_obj(text: &str) -> Result<PolygonSoup, MeshError> {
    let mut soup = PolygonSoup::default();
    for (l, s) in content_lines(text) {
        let mut t = s.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(parse_err(l, "vertex needs three coordinates"));
                }
                soup.vertices
                    .push(Vec3::new(parse_f64(c[0], l)?, parse_f64(c[1], l)?, parse_f64(c[2], l)?));
            }
            Some("f") => {
                let count = soup.vertices.len() as i64;
                let face = t
                    .map(|tok| {
                        let idx = tok.split('/').next().unwrap_or("");
                        let i: i64 = idx
                            .parse()
                            .map_err(|_| parse_err(l, format!("invalid face index '{tok}'")))?;
                        // 1-based, negative values count back from the last vertex.
                        let resolved = if i > 0 { i - 1 } else { count + i };
                        if i == 0 || resolved < 0 || resolved >= count {
                            return Err(parse_err(l, format!("face index {i} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if face.len() < 3 {
                    return Err(parse_err(l, "face needs at least three vertices"));
                }
                soup.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(soup)
}

const MSH_LINE: u32 = 1;
const MSH_TRIANGLE: u32 = 2;
const MSH_QUAD: u32 = 3;
const MSH_POINT: u32 = 15;

pub fn parse_msh(text: &str) -> Result<PolygonSoup, MeshError> {
    let mut lines = content_lines(text).peekable();
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut soup = PolygonSoup::default();
    let mut saw_format = false;
    let mut saw_nodes = false;
    let mut pending: Vec<(usize, Vec<usize>)> = Vec::new();

    while let Some((l, s)) = lines.next() {
        match s {
            "$MeshFormat" => {
                let (fl, f) = lines.next().ok_or_else(|| parse_err(l, "missing format line"))?;
                let t: Vec<&str> = f.split_whitespace().collect();
                if t.len() < 3 {
                    return Err(parse_err(fl, "malformed format line"));
                }
                if !t[0].starts_with("2.") {
                    return Err(parse_err(fl, format!("unsupported MSH version {}", t[0])));
                }
                if t[1] != "0" {
                    return Err(parse_err(fl, "binary MSH files are not supported"));
                }
                expect_end(&mut lines, "$EndMeshFormat", fl)?;
                saw_format = true;
            }
            "$Nodes" => {
                let (cl, c) = lines.next().ok_or_else(|| parse_err(l, "missing node count"))?;
                let n = parse_usize(c, cl)?;
                soup.vertices.reserve(capacity_hint(n, text));
                for _ in 0..n {
                    let (nl, node) = lines.next().ok_or_else(|| parse_err(cl, "file ends inside $Nodes"))?;
                    let t: Vec<&str> = node.split_whitespace().collect();
                    if t.len() < 4 {
                        return Err(parse_err(nl, "node needs an id and three coordinates"));
                    }
                    let id = parse_usize(t[0], nl)?;
                    if ids.insert(id, soup.vertices.len()).is_some() {
                        return Err(parse_err(nl, format!("duplicate node id {id}")));
                    }
                    soup.vertices
                        .push(Vec3::new(parse_f64(t[1], nl)?, parse_f64(t[2], nl)?, parse_f64(t[3], nl)?));
                }
                expect_end(&mut lines, "$EndNodes", cl)?;
                saw_nodes = true;
            }
            "$Elements" => {
                let (cl, c) = lines.next().ok_or_else(|| parse_err(l, "missing element count"))?;
                let n = parse_usize(c, cl)?;
                for _ in 0..n {
                    let (el, elem) = lines.next().ok_or_else(|| parse_err(cl, "file ends inside $Elements"))?;
                    let t: Vec<&str> = elem.split_whitespace().collect();
                    if t.len() < 3 {
                        return Err(parse_err(el, "malformed element"));
                    }
                    let kind: u32 = t[1]
                        .parse()
                        .map_err(|_| parse_err(el, format!("invalid element type '{}'", t[1])))?;
                    let ntags = parse_usize(t[2], el)?;
                    let nodes_at = 3usize
                        .checked_add(ntags)
                        .filter(|&i| i <= t.len())
                        .ok_or_else(|| parse_err(el, "element tag count exceeds record"))?;
                    let wanted = match kind {
                        MSH_LINE => 2,
                        MSH_TRIANGLE => 3,
                        MSH_QUAD => 4,
                        MSH_POINT => 1,
                        other => return Err(parse_err(el, format!("unsupported element type {other}"))),
                    };
                    let nodes = &t[nodes_at..];
                    if nodes.len() != wanted {
                        return Err(parse_err(el, format!("element type {kind} needs {wanted} nodes")));
                    }
                    if kind == MSH_TRIANGLE || kind == MSH_QUAD {
                        let tags = nodes
                            .iter()
                            .map(|tok| parse_usize(tok, el))
                            .collect::<Result<Vec<_>, _>>()?;
                        pending.push((el, tags));
                    }
                }
                expect_end(&mut lines, "$EndElements", cl)?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // Unknown section: skip to its end marker.
                let end = format!("$End{}", &other[1..]);
                loop {
                    match lines.next() {
                        Some((_, s)) if s == end => break,
                        Some(_) => {}
                        None => return Err(parse_err(l, format!("section {other} is not closed"))),
                    }
                }
            }
            _ => return Err(parse_err(l, format!("unexpected line '{s}'"))),
        }
    }
    if !saw_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }
    if !saw_nodes {
        return Err(parse_err(1, "missing $Nodes section"));
    }
    for (el, tags) in pending {
        let face = tags
            .iter()
            .map(|tag| {
                ids.get(tag)
                    .copied()
                    .ok_or_else(|| parse_err(el, format!("element references unknown node {tag}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        soup.faces.push(face);
    }
    Ok(soup)
}

fn expect_end<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    marker: &str,
    after: usize,
) -> Result<(), MeshError> {
    match lines.next() {
        Some((_, s)) if s == marker => Ok(()),
        Some((l, s)) => Err(parse_err(l, format!("expected {marker}, found '{s}'"))),
        None => Err(parse_err(after, format!("missing {marker}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OCTA_OFF: &str = "OFF\n# octahedron\n6 8 12\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
        3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

    #[test]
    fn off_octahedron() {
        let soup = parse_off(OCTA_OFF).unwrap();
        assert_eq!(soup.vertices.len(), 6);
        assert_eq!(soup.faces.len(), 8);
        assert_eq!(soup.faces[7], vec![0, 3, 5]);
    }

    #[test]
    fn off_counts_on_header_line_and_face_colours() {
        let soup = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2 255 0 0\n").unwrap();
        assert_eq!(soup.faces, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn off_truncated() {
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0 0\n"), Err(MeshError::Parse { .. })));
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2\n").is_err());
        assert!(parse_off("PLY\n").is_err());
    }

    #[test]
    fn obj_with_slashes_and_negative_indices() {
        let text = "o tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2//1 -1\n";
        let soup = parse_obj(text).unwrap();
        assert_eq!(soup.faces, vec![vec![0, 1, 2]]);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("v 0 0 nan\n").is_err());
    }

    #[test]
    fn msh_22_ignores_lines_and_maps_tags() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n10 0 0 0\n20 1 0 0\n30 0 1 0\n$EndNodes\n\
            $Elements\n2\n1 1 2 0 1 10 20\n2 2 2 0 1 10 20 30\n$EndElements\n";
        let soup = parse_msh(text).unwrap();
        assert_eq!(soup.vertices.len(), 3);
        assert_eq!(soup.faces, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn msh_rejects_other_versions_and_unknown_nodes() {
        assert!(parse_msh("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n").is_err());
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0 0\n$EndNodes\n\
            $Elements\n1\n1 2 0 1 2 3\n$EndElements\n";
        assert!(parse_msh(text).is_err());
    }
}
