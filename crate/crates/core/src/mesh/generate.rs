//! Structured interface and volume meshes, with optional smooth distortion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{edge_key, BoundaryTag, ElementKind, InterfaceMesh, Mesh, Point, Side, VolumeMesh};

/// Mesh-size ratio `h_master / h_slave` as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: usize,
    pub den: usize,
}

impl Ratio {
    pub fn new(num: usize, den: usize) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!("ratio {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Element counts per direction `(master, slave)` for refinement multiplier `base`.
    ///
    /// `h_master / h_slave = num / den` gives `n_master = den * base`, `n_slave = num * base`.
    pub fn element_counts(self, base: usize) -> (usize, usize) {
        (self.den * base, self.num * base)
    }

    pub fn inverse(self) -> Self {
        Self {
            num: self.den,
            den: self.num,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Default for Ratio {
    fn default() -> Self {
        Self { num: 2, den: 3 }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("ratio `{s}` is not of the form p/q"));
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Ratio::new(a, b)
    }
}

/// Out-of-plane distortion of the square `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Warp {
    #[default]
    Flat,
    /// `z = a sin(pi (x+1)/2) sin(pi (y+1)/2)`: zero on the boundary, `a` at the center.
    SineBump { amplitude: f64 },
}

impl Warp {
    pub fn height(self, x: f64, y: f64) -> f64 {
        match self {
            Warp::Flat => 0.0,
            Warp::SineBump { amplitude } => amplitude * (0.5 * PI * (x + 1.0)).sin() * (0.5 * PI * (y + 1.0)).sin(),
        }
    }
}

/// Straight interval `[a, b]` on the x-axis of the plane.
pub fn interval_mesh(a: f64, b: f64, n: usize, kind: ElementKind, side: Side) -> Result<InterfaceMesh> {
    if !kind.is_segment() || n == 0 || !(b > a) {
        return Err(Error::InvalidArgument(format!(
            "interval mesh needs a segment kind, n >= 1 and a < b (got {kind}, {n}, [{a}, {b}])"
        )));
    }
    let p = kind.degree();
    let np = n * p + 1;
    let h = (b - a) / (np - 1) as f64;
    let nodes: Vec<Point> = (0..np)
        .map(|i| {
            let x = if i == np - 1 { b } else { a + i as f64 * h };
            [x, 0.0, 0.0]
        })
        .collect();
    let connectivity = (0..n).flat_map(|e| (0..=p).map(move |k| e * p + k)).collect();
    InterfaceMesh::new(Mesh::new(2, nodes, kind, connectivity)?, side)
}

/// Master/slave interval pair with conforming endpoints.
pub fn interval_pair(a: f64, b: f64, n_master: usize, n_slave: usize, kind: ElementKind) -> Result<(InterfaceMesh, InterfaceMesh)> {
    Ok((
        interval_mesh(a, b, n_master, kind, Side::Master)?,
        interval_mesh(a, b, n_slave, kind, Side::Slave)?,
    ))
}

/// `n x n` surface mesh of `[-1, 1]^2` lifted by `warp`.
pub fn square_surface(n: usize, kind: ElementKind, side: Side, warp: Warp) -> Result<InterfaceMesh> {
    if !kind.is_quad() || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "square surface needs Quad4/Quad8 and n >= 1 (got {kind}, {n})"
        )));
    }
    let p = kind.degree();
    let g = n * p + 1;
    let coord = |i: usize| if i == g - 1 { 1.0 } else { -1.0 + 2.0 * i as f64 / (g - 1) as f64 };
    let mut index = vec![usize::MAX; g * g];
    let mut nodes = Vec::new();
    for j in 0..g {
        for i in 0..g {
            if p == 2 && i % 2 == 1 && j % 2 == 1 {
                continue;
            }
            let (x, y) = (coord(i), coord(j));
            index[j * g + i] = nodes.len();
            nodes.push([x, y, warp.height(x, y)]);
        }
    }
    let at = |i: usize, j: usize| index[j * g + i];
    let mut connectivity = Vec::with_capacity(n * n * kind.node_count());
    for cj in 0..n {
        for ci in 0..n {
            let (i0, j0) = (ci * p, cj * p);
            connectivity.extend([at(i0, j0), at(i0 + p, j0), at(i0 + p, j0 + p), at(i0, j0 + p)]);
            if p == 2 {
                connectivity.extend([at(i0 + 1, j0), at(i0 + 2, j0 + 1), at(i0 + 1, j0 + 2), at(i0, j0 + 1)]);
            }
        }
    }
    InterfaceMesh::new(Mesh::new(3, nodes, kind, connectivity)?, side)
}

pub fn square_surface_pair(n_master: usize, n_slave: usize, kind: ElementKind, warp: Warp) -> Result<(InterfaceMesh, InterfaceMesh)> {
    Ok((
        square_surface(n_master, kind, Side::Master, warp)?,
        square_surface(n_slave, kind, Side::Slave, warp)?,
    ))
}

/// Applies `f` to every node and re-validates the element Jacobians.
pub fn distort(mesh: &Mesh, f: impl Fn(Point) -> Point) -> Result<Mesh> {
    let nodes = mesh.nodes.iter().map(|&p| f(p)).collect();
    let out = Mesh::new(mesh.dim, nodes, mesh.kind, mesh.connectivity.clone())?;
    out.validate()?;
    Ok(out)
}

/// Which side of a rectangle carries interface tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectSide {
    Bottom,
    Top,
}

/// Tri3 mesh over the tensor grid `xs x ys`, each cell split along its rising diagonal.
///
/// Boundary edges are tagged Dirichlet except those on `interface`.
pub fn tri_grid(xs: &[f64], ys: &[f64], interface: Option<RectSide>) -> Result<VolumeMesh> {
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 coordinates per axis".into()));
    }
    let id = |i: usize, j: usize| j * nx + i;
    let nodes = (0..ny).flat_map(|j| xs.iter().map(move |&x| [x, ys[j], 0.0])).collect();
    let mut connectivity = Vec::with_capacity(6 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            connectivity.extend([a, b, c, a, c, d]);
        }
    }
    let mut tags = BTreeMap::new();
    let bottom = if interface == Some(RectSide::Bottom) {
        BoundaryTag::Interface
    } else {
        BoundaryTag::Dirichlet
    };
    let top = if interface == Some(RectSide::Top) {
        BoundaryTag::Interface
    } else {
        BoundaryTag::Dirichlet
    };
    for i in 0..nx - 1 {
        tags.insert(edge_key(id(i, 0), id(i + 1, 0)), bottom);
        tags.insert(edge_key(id(i, ny - 1), id(i + 1, ny - 1)), top);
    }
    for j in 0..ny - 1 {
        tags.insert(edge_key(id(0, j), id(0, j + 1)), BoundaryTag::Dirichlet);
        tags.insert(edge_key(id(nx - 1, j), id(nx - 1, j + 1)), BoundaryTag::Dirichlet);
    }
    VolumeMesh::new(Mesh::new(2, nodes, ElementKind::Tri3, connectivity)?, tags)
}

pub fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect()
}

/// Unit square split at `y = 0.5`: master `[0,1] x [0.5,1]` and slave `[0,1] x [0,0.5]`.
///
/// `nx_*` are the cell counts along x; each half uses `nx/2` rows (at least one).
/// A non-zero `curve_amplitude` bends the interface into `y = 0.5 + a sin(pi x)`,
/// moving interior nodes proportionally so boundary nodes stay put.
pub fn split_unit_square(nx_master: usize, nx_slave: usize, curve_amplitude: f64) -> Result<(VolumeMesh, VolumeMesh)> {
    let ny_m = (nx_master / 2).max(1);
    let ny_s = (nx_slave / 2).max(1);
    let mut master = tri_grid(&uniform(0.0, 1.0, nx_master), &uniform(0.5, 1.0, ny_m), Some(RectSide::Bottom))?;
    let mut slave = tri_grid(&uniform(0.0, 1.0, nx_slave), &uniform(0.0, 0.5, ny_s), Some(RectSide::Top))?;
    if curve_amplitude != 0.0 {
        let a = curve_amplitude;
        if a.abs() >= 0.5 {
            return Err(Error::InvalidArgument(format!("curve amplitude {a} must stay below 0.5")));
        }
        let c = move |x: f64| 0.5 + a * (PI * x).sin();
        master.mesh = distort(&master.mesh, |[x, y, z]| {
            let t = (y - 0.5) / 0.5;
            [x, c(x) + t * (1.0 - c(x)), z]
        })?;
        slave.mesh = distort(&slave.mesh, |[x, y, z]| [x, y / 0.5 * c(x), z])?;
    }
    Ok((master, slave))
}

/// Single-domain mesh whose triangles coincide with a conforming split of the unit square.
pub fn merged_unit_square(nx: usize, ny_master: usize, ny_slave: usize) -> Result<VolumeMesh> {
    let mut ys = uniform(0.0, 0.5, ny_slave);
    ys.extend(uniform(0.5, 1.0, ny_master).into_iter().skip(1));
    tri_grid(&uniform(0.0, 1.0, nx), &ys, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_pair_conforming_endpoints() {
        let (m, s) = interval_pair(-1.0, 1.0, 4, 6, ElementKind::Seg2).unwrap();
        assert_eq!(m.n_elements(), 4);
        assert_eq!(s.n_elements(), 6);
        assert_eq!(m.nodes[0], s.nodes[0]);
        assert_eq!(m.nodes[4], s.nodes[6]);
        let hm = m.element_circumdiameter(0).unwrap();
        let hs = s.element_circumdiameter(0).unwrap();
        assert!((hm / hs - 1.5).abs() < 1e-14);
    }

    #[test]
    fn seg3_interval_places_midnodes() {
        let m = interval_mesh(0.0, 1.0, 2, ElementKind::Seg3, Side::Master).unwrap();
        assert_eq!(m.element_nodes(1), &[2, 3, 4]);
        assert_eq!(m.nodes[3][0], 0.75);
    }

    #[test]
    fn flat_surface_lies_on_plane() {
        for kind in [ElementKind::Quad4, ElementKind::Quad8] {
            let s = square_surface(3, kind, Side::Master, Warp::Flat).unwrap();
            assert!(s.nodes.iter().all(|p| p[2] == 0.0));
            let area: f64 = (0..s.n_elements())
                .map(|e| {
                    let rule = crate::mesh::gauss_rule(kind, 9).unwrap();
                    rule.iter().map(|(xi, w)| w * s.jacobian_at(e, xi).unwrap()).sum::<f64>()
                })
                .sum();
            assert!((area - 4.0).abs() < 1e-13);
        }
        let q8 = square_surface(2, ElementKind::Quad8, Side::Slave, Warp::Flat).unwrap();
        assert_eq!(q8.n_nodes(), 25 - 4);
    }

    #[test]
    fn sine_bump_peaks_at_center() {
        let w = Warp::SineBump { amplitude: 0.1 };
        assert!((w.height(0.0, 0.0) - 0.1).abs() < 1e-15);
        assert!(w.height(1.0, 0.3).abs() < 1e-15);
        let s = square_surface(4, ElementKind::Quad4, Side::Master, w).unwrap();
        let max = s.nodes.iter().map(|p| p[2].abs()).fold(0.0, f64::max);
        assert!((max - 0.1).abs() < 1e-15);
    }

    #[test]
    fn split_square_interfaces_match() {
        let (m, s) = split_unit_square(4, 6, 0.0).unwrap();
        let (mi, _) = m.interface_mesh(Side::Master).unwrap();
        let (si, map) = s.interface_mesh(Side::Slave).unwrap();
        assert_eq!(mi.n_elements(), 4);
        assert_eq!(si.n_elements(), 6);
        assert!(map.iter().all(|&n| (s.nodes[n][1] - 0.5).abs() < 1e-15));
        assert_eq!(si.nodes[0][0], 0.0);
    }

    #[test]
    fn curved_split_keeps_boundary() {
        let (m, s) = split_unit_square(6, 9, 0.1).unwrap();
        let (si, _) = s.interface_mesh(Side::Slave).unwrap();
        let (mi, _) = m.interface_mesh(Side::Master).unwrap();
        assert_eq!(si.nodes[0], [0.0, 0.5, 0.0]);
        assert_eq!(mi.nodes.last().unwrap(), &[1.0, 0.5, 0.0]);
        let peak = si.nodes.iter().map(|p| p[1]).fold(0.0, f64::max);
        assert!(peak > 0.55);
    }

    #[test]
    fn tangling_distortion_is_rejected() {
        let (_, s) = split_unit_square(2, 2, 0.0).unwrap();
        let res = distort(&s.mesh, |[x, y, z]| [x, if y > 0.0 { -y } else { y }, z]);
        assert!(matches!(res, Err(Error::DegenerateElement { .. })));
    }

    #[test]
    fn ratio_parsing() {
        let r: Ratio = "4/6".parse().unwrap();
        assert_eq!(r, Ratio { num: 2, den: 3 });
        assert_eq!(r.element_counts(2), (6, 4));
        assert!("3".parse::<Ratio>().is_err());
        assert!("0/3".parse::<Ratio>().is_err());
    }
}
