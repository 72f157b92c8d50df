//! Mortar coupling operators: contact search, RB/EB/SB quadrature of `D` and `M`,
//! the transfer operator `E = D^{-1} M` and its diagnostics.

pub mod assembly;
pub mod operator;
pub mod projection;
pub mod search;

use std::fmt;
use std::str::FromStr;

pub use assembly::{assemble, assemble_eb, assemble_rb, assemble_sb_1d, support_detect, AssemblyStats, MortarMatrices};
pub use operator::{compute_e, consistency_report, interface_transfer, ConsistencyReport, MortarOperator, TransferStorage};
pub use projection::{project_point_newton, Projection};
pub use search::{contact_search, ContactCandidates};

use crate::error::{Error, Result};
use crate::mesh::{ElementKind, InterfaceMesh, Side};
use crate::rbf::{default_condition_limit, EpsilonPolicy, KernelFamily, LayoutVariant, PointLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Rescaled radial-basis interpolation of master basis functions.
    Rb,
    /// Element-based with Newton projection onto the master side.
    Eb,
    /// Exact segment-based integration, straight 1D interfaces only.
    Sb1d,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Rb, Scheme::Eb, Scheme::Sb1d];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Rb => "rb",
            Scheme::Eb => "eb",
            Scheme::Sb1d => "sb",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rb" => Ok(Scheme::Rb),
            "eb" => Ok(Scheme::Eb),
            "sb" | "sb1d" => Ok(Scheme::Sb1d),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfSettings {
    pub family: KernelFamily,
    pub layout: PointLayout,
    pub epsilon: EpsilonPolicy,
    /// Ceiling on the kernel-matrix condition estimate; `None` disables the check.
    pub max_condition: Option<f64>,
}

impl Default for RbfSettings {
    fn default() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            layout: PointLayout {
                variant: LayoutVariant::UniformGrid,
                n_m: 6,
            },
            epsilon: EpsilonPolicy::Circumdiameter,
            max_condition: Some(default_condition_limit()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20 }
    }
}

pub const DEFAULT_SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortarConfig {
    pub scheme: Scheme,
    /// Gauss points per slave element (total, so a square number on quadrilaterals).
    pub n_gauss: usize,
    pub rbf: RbfSettings,
    pub support_tol: f64,
    pub newton: NewtonSettings,
}

impl MortarConfig {
    pub fn new(scheme: Scheme, n_gauss: usize) -> Self {
        Self {
            scheme,
            n_gauss,
            rbf: RbfSettings::default(),
            support_tol: DEFAULT_SUPPORT_TOL,
            newton: NewtonSettings::default(),
        }
    }

    pub fn with_kernel(mut self, family: KernelFamily, n_m: usize) -> Result<Self> {
        self.rbf.family = family;
        self.rbf.layout = PointLayout::new(self.rbf.layout.variant, n_m)?;
        Ok(self)
    }

    /// Checks the configuration against the slave element kind.
    pub fn validate(&self, slave_kind: ElementKind) -> Result<()> {
        let min = min_gauss_points(slave_kind);
        if self.n_gauss < min {
            return Err(Error::ParameterOutOfRange {
                name: "n_gauss",
                value: self.n_gauss.to_string(),
                allowed: match slave_kind {
                    ElementKind::Seg2 => ">= 2 for Seg2",
                    ElementKind::Seg3 => ">= 3 for Seg3",
                    ElementKind::Tri3 => ">= 3 for Tri3",
                    ElementKind::Quad4 => ">= 4 for Quad4",
                    ElementKind::Quad8 => ">= 9 for Quad8",
                },
            });
        }
        if !(0.0..=0.1).contains(&self.support_tol) {
            return Err(Error::ParameterOutOfRange {
                name: "support_tol",
                value: self.support_tol.to_string(),
                allowed: "[0, 0.1]",
            });
        }
        if !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "newton",
                value: format!("tol={} max_iter={}", self.newton.tol, self.newton.max_iter),
                allowed: "tol > 0, max_iter >= 1",
            });
        }
        PointLayout::new(self.rbf.layout.variant, self.rbf.layout.n_m)?;
        Ok(())
    }
}

/// Fewest Gauss points that integrate the multiplier mass matrix on `kind`.
pub fn min_gauss_points(kind: ElementKind) -> usize {
    match kind {
        ElementKind::Seg2 => 2,
        ElementKind::Seg3 | ElementKind::Tri3 => 3,
        ElementKind::Quad4 => 4,
        ElementKind::Quad8 => 9,
    }
}

/// Master side `Gamma_1` and slave side `Gamma_2` of an interface.
#[derive(Debug, Clone)]
pub struct InterfacePair {
    pub master: InterfaceMesh,
    pub slave: InterfaceMesh,
    pub gap_tolerance: f64,
}

impl InterfacePair {
    /// Pairs two interface meshes with the default gap tolerance, half the largest
    /// element circumdiameter on either side.
    pub fn new(master: InterfaceMesh, slave: InterfaceMesh) -> Result<Self> {
        let gap = 0.5 * master.max_circumdiameter().max(slave.max_circumdiameter());
        Self::with_gap_tolerance(master, slave, gap)
    }

    pub fn with_gap_tolerance(master: InterfaceMesh, slave: InterfaceMesh, gap_tolerance: f64) -> Result<Self> {
        if master.dim != slave.dim {
            return Err(Error::DimensionMismatch {
                expected: master.dim,
                found: slave.dim,
            });
        }
        if master.kind.is_segment() != slave.kind.is_segment() {
            return Err(Error::InvalidArgument(format!(
                "incompatible interface elements: master {} and slave {}",
                master.kind, slave.kind
            )));
        }
        if !(gap_tolerance >= 0.0 && gap_tolerance.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "gap_tolerance",
                value: gap_tolerance.to_string(),
                allowed: "finite and >= 0",
            });
        }
        Ok(Self {
            master: master.with_side(Side::Master),
            slave: slave.with_side(Side::Slave),
            gap_tolerance,
        })
    }

    /// Exchanges the roles of the two sides.
    pub fn swapped(&self) -> Result<Self> {
        Self::with_gap_tolerance(self.slave.clone(), self.master.clone(), self.gap_tolerance)
    }
}
