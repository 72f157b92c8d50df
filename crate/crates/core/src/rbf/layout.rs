use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::ElementKind;

pub const MAX_POINTS_PER_EDGE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LayoutVariant {
    /// Regular grid with `n_M` points per edge, element nodes included.
    #[default]
    UniformGrid,
    /// Uniform grid pushed towards the element boundary by `xi -> sin(pi/2 xi)`.
    SineModified,
}

impl fmt::Display for LayoutVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayoutVariant::UniformGrid => "uniform",
            LayoutVariant::SineModified => "sine",
        })
    }
}

impl FromStr for LayoutVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uni" => Ok(LayoutVariant::UniformGrid),
            "sine" | "mod" => Ok(LayoutVariant::SineModified),
            other => Err(Error::InvalidArgument(format!("unknown layout `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointLayout {
    pub variant: LayoutVariant,
    pub n_m: usize,
}

impl PointLayout {
    pub fn new(variant: LayoutVariant, n_m: usize) -> Result<Self> {
        if !(2..=MAX_POINTS_PER_EDGE).contains(&n_m) {
            return Err(Error::ParameterOutOfRange {
                name: "n_M",
                value: n_m.to_string(),
                allowed: "2..=10",
            });
        }
        Ok(Self { variant, n_m })
    }

    pub fn uniform(n_m: usize) -> Result<Self> {
        Self::new(LayoutVariant::UniformGrid, n_m)
    }

    /// Number of interpolation points on an element of `kind`.
    pub fn point_count(&self, kind: ElementKind) -> usize {
        let n = self.n_m;
        match kind {
            ElementKind::Seg2 | ElementKind::Seg3 => n,
            ElementKind::Tri3 => n * (n + 1) / 2,
            ElementKind::Quad4 | ElementKind::Quad8 => n * n,
        }
    }
}

/// Interpolation points in reference coordinates (second component zero for segments).
pub fn interpolation_points(kind: ElementKind, layout: PointLayout) -> Result<Vec<[f64; 2]>> {
    let layout = PointLayout::new(layout.variant, layout.n_m)?;
    let n = layout.n_m;
    // uniform abscissae on [-1, 1]
    let t: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 1.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 })
        .collect();
    let warp = |x: f64| match layout.variant {
        LayoutVariant::UniformGrid => x,
        LayoutVariant::SineModified => (FRAC_PI_2 * x).sin(),
    };
    let pts = match kind {
        ElementKind::Seg2 | ElementKind::Seg3 => t.iter().map(|&x| [warp(x), 0.0]).collect(),
        ElementKind::Quad4 | ElementKind::Quad8 => t
            .iter()
            .flat_map(|&y| t.iter().map(move |&x| (x, y)))
            .map(|(x, y)| [warp(x), warp(y)])
            .collect(),
        ElementKind::Tri3 => {
            // unit-simplex grid; [0,1] -> [-1,1] -> warp -> [0,1] keeps points inside
            let to_unit = |x: f64| 0.5 * (1.0 + warp(2.0 * x - 1.0));
            let mut v = Vec::with_capacity(n * (n + 1) / 2);
            for j in 0..n {
                for i in 0..n - j {
                    let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                    v.push([to_unit(x), to_unit(y)]);
                }
            }
            v
        }
    };
    Ok(pts)
}
