//! Line-oriented mesh text format.
//!
//! ```text
//! meshfmt 1
//! side master                  # optional
//! nodes <count> <dim>
//! <x> <y> [<z>]                # one row per node
//! elements <count> <kind>
//! <i> <j> ...                  # 0-based node indices
//! tags <count>                 # optional
//! edge <a> <b> <tag>
//! element <id> <tag>
//! ```
//!
//! Coordinates are written with the shortest representation that round-trips,
//! so `load(save(m)) == m` bit for bit. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{edge_key, BoundaryTag, ElementKind, InterfaceMesh, Mesh, Side, VolumeMesh};

/// Everything a mesh file can carry.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshData {
    pub mesh: Mesh,
    pub side: Option<Side>,
    pub edge_tags: BTreeMap<(usize, usize), String>,
    pub element_tags: BTreeMap<usize, String>,
}

impl MeshData {
    pub fn new(mesh: Mesh) -> Self {
        Self {
            mesh,
            side: None,
            edge_tags: BTreeMap::new(),
            element_tags: BTreeMap::new(),
        }
    }

    pub fn into_interface(self) -> Result<InterfaceMesh> {
        let side = self.side.unwrap_or(Side::Master);
        InterfaceMesh::new(self.mesh, side)
    }

    pub fn into_volume(self) -> Result<VolumeMesh> {
        let tags = self
            .edge_tags
            .into_iter()
            .map(|(k, v)| Ok((k, v.parse::<BoundaryTag>()?)))
            .collect::<Result<_>>()?;
        VolumeMesh::new(self.mesh, tags)
    }
}

impl From<&InterfaceMesh> for MeshData {
    fn from(m: &InterfaceMesh) -> Self {
        let mut d = MeshData::new(m.mesh.clone());
        d.side = Some(m.side);
        d
    }
}

impl From<&VolumeMesh> for MeshData {
    fn from(m: &VolumeMesh) -> Self {
        let mut d = MeshData::new(m.mesh.clone());
        d.edge_tags = m.boundary_tags.iter().map(|(k, v)| (*k, v.to_string())).collect();
        d
    }
}

pub fn write_mesh(data: &MeshData) -> String {
    let m = &data.mesh;
    let mut s = String::from("meshfmt 1\n");
    if let Some(side) = data.side {
        let _ = writeln!(s, "side {side}");
    }
    let _ = writeln!(s, "nodes {} {}", m.n_nodes(), m.dim);
    for p in &m.nodes {
        let row: Vec<String> = p[..m.dim].iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    let _ = writeln!(s, "elements {} {}", m.n_elements(), m.kind);
    for e in 0..m.n_elements() {
        let row: Vec<String> = m.element_nodes(e).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    let n_tags = data.edge_tags.len() + data.element_tags.len();
    if n_tags > 0 {
        let _ = writeln!(s, "tags {n_tags}");
        for ((a, b), t) in &data.edge_tags {
            let _ = writeln!(s, "edge {a} {b} {t}");
        }
        for (e, t) in &data.element_tags {
            let _ = writeln!(s, "element {e} {t}");
        }
    }
    s
}

type TokenLines<'a> = Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>;

struct Lines<'a> {
    inner: std::iter::Peekable<TokenLines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: TokenLines<'a> = Box::new(text.lines().enumerate().filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
        }));
        Self {
            inner: it.peekable(),
            last_line: 0,
        }
    }

    fn next(&mut self, expecting: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, toks)) => {
                self.last_line = n;
                Ok((n, toks))
            }
            None => Err(Error::format(
                self.last_line + 1,
                format!("unexpected end of file: missing {expecting}"),
            )),
        }
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, t)| t[0])
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::format(line, format!("cannot parse {what} from `{tok}`")))
}

pub fn parse_mesh(text: &str) -> Result<MeshData> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.next("`meshfmt 1` header")?;
    if header != ["meshfmt", "1"] {
        return Err(Error::format(n, "expected header `meshfmt 1`"));
    }

    let mut side = None;
    if lines.peek_keyword() == Some("side") {
        let (n, t) = lines.next("side")?;
        if t.len() != 2 {
            return Err(Error::format(n, "expected `side <master|slave>`"));
        }
        side = Some(t[1].parse::<Side>().map_err(|e| Error::format(n, e.to_string()))?);
    }

    let (n, t) = lines.next("`nodes` section")?;
    if t.len() != 3 || t[0] != "nodes" {
        return Err(Error::format(n, "expected `nodes <count> <dim>`"));
    }
    let count: usize = parse_num(t[1], n, "node count")?;
    let dim: usize = parse_num(t[2], n, "dimension")?;
    if !(1..=3).contains(&dim) {
        return Err(Error::format(n, format!("dimension {dim} not in 1..=3")));
    }
    let mut nodes = Vec::with_capacity(count);
    for k in 0..count {
        let (n, t) = lines.next(&format!("node row {k} of `nodes` section"))?;
        if t.len() != dim {
            return Err(Error::format(n, format!("node row has {} values, expected {dim}", t.len())));
        }
        let mut p = [0.0; 3];
        for (d, tok) in t.iter().enumerate() {
            p[d] = parse_num(tok, n, "coordinate")?;
        }
        nodes.push(p);
    }

    let (n, t) = lines.next("`elements` section")?;
    if t.len() != 3 || t[0] != "elements" {
        return Err(Error::format(n, "expected `elements <count> <kind>`"));
    }
    let n_elems: usize = parse_num(t[1], n, "element count")?;
    let kind: ElementKind = t[2].parse().map_err(|e: Error| Error::format(n, e.to_string()))?;
    let nn = kind.node_count();
    let mut connectivity = Vec::with_capacity(n_elems * nn);
    for k in 0..n_elems {
        let (n, t) = lines.next(&format!("element row {k} of `elements` section"))?;
        if t.len() != nn {
            return Err(Error::format(n, format!("{kind} row has {} indices, expected {nn}", t.len())));
        }
        for tok in t {
            let i: usize = parse_num(tok, n, "node index")?;
            if i >= count {
                return Err(Error::format(n, format!("node index {i} out of range ({count} nodes)")));
            }
            connectivity.push(i);
        }
    }

    let mut edge_tags = BTreeMap::new();
    let mut element_tags = BTreeMap::new();
    if lines.peek_keyword().is_some() {
        let (n, t) = lines.next("`tags` section")?;
        if t.len() != 2 || t[0] != "tags" {
            return Err(Error::format(n, "expected `tags <count>` or end of file"));
        }
        let n_tags: usize = parse_num(t[1], n, "tag count")?;
        for k in 0..n_tags {
            let (n, t) = lines.next(&format!("tag row {k} of `tags` section"))?;
            match t.as_slice() {
                ["edge", a, b, tag] => {
                    let a: usize = parse_num(a, n, "edge node")?;
                    let b: usize = parse_num(b, n, "edge node")?;
                    edge_tags.insert(edge_key(a, b), tag.to_string());
                }
                ["element", e, tag] => {
                    let e: usize = parse_num(e, n, "element id")?;
                    element_tags.insert(e, tag.to_string());
                }
                _ => return Err(Error::format(n, "expected `edge <a> <b> <tag>` or `element <id> <tag>`")),
            }
        }
        if let Some((n, _)) = lines.inner.next() {
            return Err(Error::format(n, "trailing content after `tags` section"));
        }
    }

    let mesh = Mesh::new(dim, nodes, kind, connectivity).map_err(|e| Error::format(lines.last_line, e.to_string()))?;
    Ok(MeshData {
        mesh,
        side,
        edge_tags,
        element_tags,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<MeshData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_mesh(&text).map_err(|e| match e {
        Error::Format { line, msg, .. } => Error::Format {
            path: Some(path.to_path_buf()),
            line,
            msg,
        },
        other => other,
    })
}

pub fn save_mesh(data: &MeshData, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_mesh(data))?;
    Ok(())
}
