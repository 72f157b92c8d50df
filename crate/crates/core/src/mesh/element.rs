//! Reference elements and their nodal shape functions.
//!
//! Reference domains: segments live on `[-1, 1]`, quadrilaterals on `[-1, 1]^2`
//! and triangles on the unit simplex `{(0,0), (1,0), (0,1)}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest reference-coordinate magnitude accepted by shape evaluation.
pub const EXTRAPOLATION_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Seg2,
    Seg3,
    Tri3,
    Quad4,
    Quad8,
}

impl ElementKind {
    pub const ALL: [ElementKind; 5] = [
        ElementKind::Seg2,
        ElementKind::Seg3,
        ElementKind::Tri3,
        ElementKind::Quad4,
        ElementKind::Quad8,
    ];

    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Seg2 => 2,
            ElementKind::Seg3 => 3,
            ElementKind::Tri3 => 3,
            ElementKind::Quad4 => 4,
            ElementKind::Quad8 => 8,
        }
    }

    /// Dimension of the reference domain.
    pub fn ref_dim(self) -> usize {
        match self {
            ElementKind::Seg2 | ElementKind::Seg3 => 1,
            _ => 2,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            ElementKind::Seg3 | ElementKind::Quad8 => 2,
            _ => 1,
        }
    }

    pub fn is_segment(self) -> bool {
        self.ref_dim() == 1
    }

    pub fn is_quad(self) -> bool {
        matches!(self, ElementKind::Quad4 | ElementKind::Quad8)
    }

    /// Measure of the reference domain.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementKind::Seg2 | ElementKind::Seg3 => 2.0,
            ElementKind::Tri3 => 0.5,
            ElementKind::Quad4 | ElementKind::Quad8 => 4.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ElementKind::Seg2 => "seg2",
            ElementKind::Seg3 => "seg3",
            ElementKind::Tri3 => "tri3",
            ElementKind::Quad4 => "quad4",
            ElementKind::Quad8 => "quad8",
        }
    }

    /// Reference coordinates of the element nodes, padded to two components.
    ///
    /// Seg3 orders its nodes `-1, 0, +1`; Quad8 lists the four corners
    /// counter-clockwise followed by the midsides of edges 0-1, 1-2, 2-3, 3-0.
    pub fn node_ref_coords(self) -> &'static [[f64; 2]] {
        match self {
            ElementKind::Seg2 => &[[-1.0, 0.0], [1.0, 0.0]],
            ElementKind::Seg3 => &[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            ElementKind::Tri3 => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            ElementKind::Quad4 => &[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
            ElementKind::Quad8 => &[
                [-1.0, -1.0],
                [1.0, -1.0],
                [1.0, 1.0],
                [-1.0, 1.0],
                [0.0, -1.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [-1.0, 0.0],
            ],
        }
    }

    /// Reference center used as the Newton initial guess.
    pub fn ref_center(self) -> [f64; 2] {
        match self {
            ElementKind::Tri3 => [1.0 / 3.0, 1.0 / 3.0],
            _ => [0.0, 0.0],
        }
    }

    /// Whether `xi` lies in the reference domain inflated by `tol`.
    pub fn contains(self, xi: [f64; 2], tol: f64) -> bool {
        match self {
            ElementKind::Seg2 | ElementKind::Seg3 => xi[0].abs() <= 1.0 + tol,
            ElementKind::Quad4 | ElementKind::Quad8 => xi[0].abs() <= 1.0 + tol && xi[1].abs() <= 1.0 + tol,
            ElementKind::Tri3 => xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seg2" => Ok(ElementKind::Seg2),
            "seg3" => Ok(ElementKind::Seg3),
            "tri3" => Ok(ElementKind::Tri3),
            "quad4" => Ok(ElementKind::Quad4),
            "quad8" => Ok(ElementKind::Quad8),
            other => Err(Error::InvalidArgument(format!("unknown element kind `{other}`"))),
        }
    }
}

/// An element family together with its nodal layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    pub kind: ElementKind,
    pub node_ref_coords: Vec<[f64; 2]>,
    pub polynomial_degree: usize,
}

impl ReferenceElement {
    pub fn new(kind: ElementKind) -> Self {
        Self {
            kind,
            node_ref_coords: kind.node_ref_coords().to_vec(),
            polynomial_degree: kind.degree(),
        }
    }

    pub fn shape_values(&self, xi: &[f64]) -> Result<Vec<f64>> {
        shape_values(self.kind, xi)
    }

    pub fn shape_gradients(&self, xi: &[f64]) -> Result<Vec<[f64; 2]>> {
        shape_gradients(self.kind, xi)
    }
}

fn check_point(kind: ElementKind, xi: &[f64]) -> Result<[f64; 2]> {
    if xi.len() != kind.ref_dim() {
        return Err(Error::InvalidArgument(format!(
            "{kind} expects {} reference coordinates, got {}",
            kind.ref_dim(),
            xi.len()
        )));
    }
    if xi.iter().any(|c| !c.is_finite() || c.abs() > EXTRAPOLATION_LIMIT) {
        return Err(Error::InvalidArgument(format!(
            "reference point {xi:?} beyond extrapolation limit {EXTRAPOLATION_LIMIT}"
        )));
    }
    Ok([xi[0], xi.get(1).copied().unwrap_or(0.0)])
}

/// Nodal shape function values `N_i(xi)`.
pub fn shape_values(kind: ElementKind, xi: &[f64]) -> Result<Vec<f64>> {
    let p = check_point(kind, xi)?;
    let mut out = vec![0.0; kind.node_count()];
    eval_shape(kind, p, &mut out);
    Ok(out)
}

/// Shape function gradients `dN_i/dxi`, one row per node.
///
/// Segment elements leave the second component at zero.
pub fn shape_gradients(kind: ElementKind, xi: &[f64]) -> Result<Vec<[f64; 2]>> {
    let p = check_point(kind, xi)?;
    let mut out = vec![[0.0; 2]; kind.node_count()];
    eval_grad(kind, p, &mut out);
    Ok(out)
}

/// Unchecked evaluation into a caller-provided buffer.
pub(crate) fn eval_shape(kind: ElementKind, xi: [f64; 2], out: &mut [f64]) {
    let [x, y] = xi;
    match kind {
        ElementKind::Seg2 => {
            out[0] = 0.5 * (1.0 - x);
            out[1] = 0.5 * (1.0 + x);
        }
        ElementKind::Seg3 => {
            out[0] = 0.5 * x * (x - 1.0);
            out[1] = 1.0 - x * x;
            out[2] = 0.5 * x * (x + 1.0);
        }
        ElementKind::Tri3 => {
            out[0] = 1.0 - x - y;
            out[1] = x;
            out[2] = y;
        }
        ElementKind::Quad4 => {
            for (n, [xn, yn]) in kind.node_ref_coords().iter().enumerate() {
                out[n] = 0.25 * (1.0 + x * xn) * (1.0 + y * yn);
            }
        }
        ElementKind::Quad8 => {
            for (n, [xn, yn]) in kind.node_ref_coords().iter().enumerate() {
                out[n] = if n < 4 {
                    0.25 * (1.0 + x * xn) * (1.0 + y * yn) * (x * xn + y * yn - 1.0)
                } else if *xn == 0.0 {
                    0.5 * (1.0 - x * x) * (1.0 + y * yn)
                } else {
                    0.5 * (1.0 + x * xn) * (1.0 - y * y)
                };
            }
        }
    }
}

pub(crate) fn eval_grad(kind: ElementKind, xi: [f64; 2], out: &mut [[f64; 2]]) {
    let [x, y] = xi;
    match kind {
        ElementKind::Seg2 => {
            out[0] = [-0.5, 0.0];
            out[1] = [0.5, 0.0];
        }
        ElementKind::Seg3 => {
            out[0] = [x - 0.5, 0.0];
            out[1] = [-2.0 * x, 0.0];
            out[2] = [x + 0.5, 0.0];
        }
        ElementKind::Tri3 => {
            out[0] = [-1.0, -1.0];
            out[1] = [1.0, 0.0];
            out[2] = [0.0, 1.0];
        }
        ElementKind::Quad4 => {
            for (n, [xn, yn]) in kind.node_ref_coords().iter().enumerate() {
                out[n] = [0.25 * xn * (1.0 + y * yn), 0.25 * yn * (1.0 + x * xn)];
            }
        }
        ElementKind::Quad8 => {
            for (n, [xn, yn]) in kind.node_ref_coords().iter().enumerate() {
                out[n] = if n < 4 {
                    [
                        0.25 * xn * (1.0 + y * yn) * (2.0 * x * xn + y * yn),
                        0.25 * yn * (1.0 + x * xn) * (x * xn + 2.0 * y * yn),
                    ]
                } else if *xn == 0.0 {
                    [-x * (1.0 + y * yn), 0.5 * yn * (1.0 - x * x)]
                } else {
                    [0.5 * xn * (1.0 - y * y), -y * (1.0 + x * xn)]
                };
            }
        }
    }
}

/// Number of auxiliary support probes for `kind`.
pub fn probe_count(kind: ElementKind) -> usize {
    match kind {
        ElementKind::Seg2 | ElementKind::Seg3 => 2,
        ElementKind::Tri3 => 3,
        ElementKind::Quad4 | ElementKind::Quad8 => 4,
    }
}

/// Auxiliary functions used only for support detection.
///
/// They are linear, lie in `[0, 1]` exactly on the reference element and leave
/// that range outside it. Segments and quadrilaterals use `(1 -+ xi)/2` per
/// reference direction: each is one on a pair of corner nodes and zero on the
/// opposite pair. Triangles use the barycentric coordinates.
pub fn support_probes(kind: ElementKind, xi: [f64; 2], out: &mut [f64]) {
    let [x, y] = xi;
    match kind {
        ElementKind::Seg2 | ElementKind::Seg3 => {
            out[0] = 0.5 * (1.0 - x);
            out[1] = 0.5 * (1.0 + x);
        }
        ElementKind::Tri3 => {
            out[0] = 1.0 - x - y;
            out[1] = x;
            out[2] = y;
        }
        ElementKind::Quad4 | ElementKind::Quad8 => {
            out[0] = 0.5 * (1.0 - x);
            out[1] = 0.5 * (1.0 + x);
            out[2] = 0.5 * (1.0 - y);
            out[3] = 0.5 * (1.0 + y);
        }
    }
}
