//! Reference elements, quadrature, isoparametric geometry and mesh containers.

pub mod element;
pub mod generate;
pub mod io;
pub mod quadrature;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

pub use element::{shape_gradients, shape_values, ElementKind, ReferenceElement};
pub use quadrature::{gauss_rule, QuadratureRule};

use crate::error::{Error, Result};

/// Physical coordinates, zero-padded to three components.
pub type Point = [f64; 3];

pub(crate) const MAX_NODES: usize = 8;

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Coordinates of one element, copied out of its mesh.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub kind: ElementKind,
    coords: [Point; MAX_NODES],
}

impl ElementGeometry {
    pub fn new(kind: ElementKind, coords: &[Point]) -> Self {
        let mut c = [[0.0; 3]; MAX_NODES];
        c[..coords.len()].copy_from_slice(coords);
        Self { kind, coords: c }
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords[..self.kind.node_count()]
    }

    /// `x(xi) = sum_i N_i(xi) x_i`
    pub fn map(&self, xi: [f64; 2]) -> Point {
        let mut n = [0.0; MAX_NODES];
        element::eval_shape(self.kind, xi, &mut n);
        let mut x = [0.0; 3];
        for (ni, c) in n.iter().zip(self.coords()) {
            for d in 0..3 {
                x[d] += ni * c[d];
            }
        }
        x
    }

    /// Tangent vectors `dx/dxi_k`; the second is zero for segments.
    pub fn tangents(&self, xi: [f64; 2]) -> [Point; 2] {
        let mut g = [[0.0; 2]; MAX_NODES];
        element::eval_grad(self.kind, xi, &mut g);
        let mut t = [[0.0; 3]; 2];
        for (gi, c) in g.iter().zip(self.coords()) {
            for k in 0..2 {
                for d in 0..3 {
                    t[k][d] += gi[k] * c[d];
                }
            }
        }
        t
    }

    /// Area/length metric `sqrt(det(J^T J))` of the map at `xi`.
    pub fn metric(&self, xi: [f64; 2]) -> f64 {
        let t = self.tangents(xi);
        if self.kind.is_segment() {
            norm(t[0])
        } else {
            norm(cross(t[0], t[1]))
        }
    }

    /// Signed determinant for elements whose reference and physical dimensions agree
    /// (segments on a line, planar elements in the xy-plane).
    pub fn signed_det(&self, xi: [f64; 2]) -> f64 {
        let t = self.tangents(xi);
        if self.kind.is_segment() {
            t[0][0]
        } else {
            t[0][0] * t[1][1] - t[0][1] * t[1][0]
        }
    }

    /// Unit normal of a surface element, or in-plane normal of a segment in the xy-plane.
    pub fn normal(&self, xi: [f64; 2]) -> Point {
        let t = self.tangents(xi);
        let n = if self.kind.is_segment() {
            [t[0][1], -t[0][0], 0.0]
        } else {
            cross(t[0], t[1])
        };
        let l = norm(n);
        [n[0] / l, n[1] / l, n[2] / l]
    }

    /// Maximum chord between element nodes.
    pub fn circumdiameter(&self) -> f64 {
        let c = self.coords();
        let mut best = 0.0f64;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                best = best.max(distance(c[i], c[j]));
            }
        }
        best
    }

    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in self.coords() {
            for d in 0..3 {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
        (lo, hi)
    }
}

/// Nodes plus single-kind connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Embedding dimension (1, 2 or 3).
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub kind: ElementKind,
    /// Flattened element-to-node indices, `kind.node_count()` per element.
    pub connectivity: Vec<usize>,
}

impl Mesh {
    pub fn new(dim: usize, nodes: Vec<Point>, kind: ElementKind, connectivity: Vec<usize>) -> Result<Self> {
        let mesh = Self {
            dim,
            nodes,
            kind,
            connectivity,
        };
        mesh.check_indices()?;
        Ok(mesh)
    }

    fn check_indices(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidArgument(format!("embedding dimension {} not in 1..=3", self.dim)));
        }
        if self.dim < self.kind.ref_dim() {
            return Err(Error::InvalidArgument(format!(
                "{} elements cannot live in {}D",
                self.kind, self.dim
            )));
        }
        let nn = self.kind.node_count();
        if !self.connectivity.len().is_multiple_of(nn) {
            return Err(Error::InvalidArgument(format!(
                "connectivity length {} not a multiple of {nn}",
                self.connectivity.len()
            )));
        }
        if let Some(bad) = self.connectivity.iter().find(|&&i| i >= self.nodes.len()) {
            return Err(Error::InvalidArgument(format!(
                "node index {bad} out of range ({} nodes)",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    /// Checks indices and that the Jacobian measure is positive at quadrature points.
    pub fn validate(&self) -> Result<()> {
        self.check_indices()?;
        let rule = quadrature::rule_for_degree(self.kind, 3)?;
        for e in 0..self.n_elements() {
            for (xi, _) in rule.iter() {
                self.jacobian_at(e, xi)?;
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.connectivity.len() / self.kind.node_count()
    }

    pub fn element_nodes(&self, elem: usize) -> &[usize] {
        let nn = self.kind.node_count();
        &self.connectivity[elem * nn..(elem + 1) * nn]
    }

    pub fn geometry(&self, elem: usize) -> ElementGeometry {
        let mut c = [[0.0; 3]; MAX_NODES];
        for (k, &n) in self.element_nodes(elem).iter().enumerate() {
            c[k] = self.nodes[n];
        }
        ElementGeometry {
            kind: self.kind,
            coords: c,
        }
    }

    fn check_elem(&self, elem: usize) -> Result<()> {
        if elem >= self.n_elements() {
            return Err(Error::InvalidArgument(format!(
                "element {elem} out of range ({} elements)",
                self.n_elements()
            )));
        }
        Ok(())
    }

    fn ref_point(&self, xi: &[f64]) -> Result<[f64; 2]> {
        if xi.len() != self.kind.ref_dim() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} reference coordinates",
                self.kind,
                self.kind.ref_dim()
            )));
        }
        Ok([xi[0], xi.get(1).copied().unwrap_or(0.0)])
    }

    pub fn map_to_physical(&self, elem: usize, xi: &[f64]) -> Result<Point> {
        self.check_elem(elem)?;
        let p = self.ref_point(xi)?;
        Ok(self.geometry(elem).map(p))
    }

    /// Jacobian measure `j(xi)` of the isoparametric map.
    ///
    /// Volume elements (reference dimension equal to embedding dimension) report
    /// the signed determinant and must be positive; embedded elements report the
    /// length/area metric and must be non-zero.
    pub fn jacobian_measure(&self, elem: usize, xi: &[f64]) -> Result<f64> {
        self.check_elem(elem)?;
        let p = self.ref_point(xi)?;
        self.jacobian_at(elem, p)
    }

    pub(crate) fn jacobian_at(&self, elem: usize, xi: [f64; 2]) -> Result<f64> {
        let g = self.geometry(elem);
        if self.dim == self.kind.ref_dim() {
            let j = g.signed_det(xi);
            if !(j > 0.0) {
                return Err(Error::DegenerateElement {
                    elem,
                    detail: format!("non-positive Jacobian {j:.3e} at {xi:?}"),
                });
            }
            Ok(j)
        } else {
            let j = g.metric(xi);
            if !(j > 0.0) {
                return Err(Error::DegenerateElement {
                    elem,
                    detail: format!("vanishing metric at {xi:?}"),
                });
            }
            Ok(j)
        }
    }

    pub fn element_circumdiameter(&self, elem: usize) -> Result<f64> {
        self.check_elem(elem)?;
        Ok(self.geometry(elem).circumdiameter())
    }

    pub fn max_circumdiameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.geometry(e).circumdiameter())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Master,
    Slave,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Master => "master",
            Side::Slave => "slave",
        })
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "master" => Ok(Side::Master),
            "slave" => Ok(Side::Slave),
            other => Err(Error::InvalidArgument(format!("unknown side `{other}`"))),
        }
    }
}

/// Lower-dimensional mesh of one side of an interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMesh {
    pub mesh: Mesh,
    pub side: Side,
}

impl InterfaceMesh {
    pub fn new(mesh: Mesh, side: Side) -> Result<Self> {
        if mesh.kind == ElementKind::Tri3 && mesh.dim == 2 {
            return Err(Error::InvalidArgument(
                "interface meshes need segments in 2D or surface elements in 3D".into(),
            ));
        }
        mesh.validate()?;
        Ok(Self { mesh, side })
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }
}

impl Deref for InterfaceMesh {
    type Target = Mesh;
    fn deref(&self) -> &Mesh {
        &self.mesh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Dirichlet,
    Interface,
    Neumann,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Interface => "interface",
            BoundaryTag::Neumann => "neumann",
        })
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryTag::Dirichlet),
            "interface" => Ok(BoundaryTag::Interface),
            "neumann" => Ok(BoundaryTag::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown boundary tag `{other}`"))),
        }
    }
}

/// Normalised undirected edge key.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Planar Tri3 mesh with tagged boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeMesh {
    pub mesh: Mesh,
    pub boundary_tags: BTreeMap<(usize, usize), BoundaryTag>,
}

impl Deref for VolumeMesh {
    type Target = Mesh;
    fn deref(&self) -> &Mesh {
        &self.mesh
    }
}

impl VolumeMesh {
    pub fn new(mesh: Mesh, boundary_tags: BTreeMap<(usize, usize), BoundaryTag>) -> Result<Self> {
        if mesh.kind != ElementKind::Tri3 || mesh.dim != 2 {
            return Err(Error::InvalidArgument("volume meshes are planar Tri3 meshes".into()));
        }
        mesh.validate()?;
        for &(a, b) in boundary_tags.keys() {
            if a >= mesh.n_nodes() || b >= mesh.n_nodes() {
                return Err(Error::InvalidArgument(format!("tagged edge ({a}, {b}) out of range")));
            }
        }
        Ok(Self { mesh, boundary_tags })
    }

    /// Nodes touching an edge with the given tag, ascending.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_tags
            .iter()
            .filter(|(_, t)| **t == tag)
            .flat_map(|(&(a, b), _)| [a, b])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Extracts the interface edges as a Seg2 chain.
    ///
    /// Returns the interface mesh and, for each of its nodes, the volume node id.
    pub fn interface_mesh(&self, side: Side) -> Result<(InterfaceMesh, Vec<usize>)> {
        let edges: Vec<(usize, usize)> = self
            .boundary_tags
            .iter()
            .filter(|(_, t)| **t == BoundaryTag::Interface)
            .map(|(e, _)| *e)
            .collect();
        if edges.is_empty() {
            return Err(Error::IndexMap("no interface edges tagged".into()));
        }
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        if adj.values().any(|v| v.len() > 2) {
            return Err(Error::IndexMap("interface edges branch".into()));
        }
        let ends: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
        if ends.len() != 2 {
            return Err(Error::IndexMap("interface edges do not form an open chain".into()));
        }
        // Walk from the endpoint with the smaller (x, y).
        let key = |n: usize| (self.nodes[n][0], self.nodes[n][1]);
        let start = if key(ends[0]) <= key(ends[1]) { ends[0] } else { ends[1] };
        let mut order = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while order.len() < adj.len() {
            let next = adj[&cur]
                .iter()
                .copied()
                .find(|&n| n != prev)
                .ok_or_else(|| Error::IndexMap("interface chain broken".into()))?;
            prev = cur;
            cur = next;
            order.push(cur);
        }
        if order.len() != edges.len() + 1 {
            return Err(Error::IndexMap("interface edges are not contiguous".into()));
        }
        let nodes = order.iter().map(|&n| self.nodes[n]).collect();
        let connectivity = (0..edges.len()).flat_map(|e| [e, e + 1]).collect();
        let mesh = Mesh::new(2, nodes, ElementKind::Seg2, connectivity)?;
        Ok((InterfaceMesh::new(mesh, side)?, order))
    }
}
