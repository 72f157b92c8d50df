//! Mortar-coupled P1 Poisson solver on two subdomains.

pub mod coupled;
pub mod linalg;
pub mod norms;
pub mod p1;

use std::f64::consts::PI;
use std::sync::Arc;

pub use coupled::{assemble_saddle, condense, solve, solve_with, CondensedSystem, CoupledSystem, SolutionFields, SolvePath};
pub use linalg::SolverKind;
pub use norms::{broken_norms, observed_order, write_solution_csv, ErrorReport};
pub use p1::{assemble_subdomain, solve_single_domain, SubdomainBlocks, SubdomainSystem};

use crate::error::{Error, Result};
use crate::mesh::generate::split_unit_square;
use crate::mesh::{BoundaryTag, InterfaceMesh, Side, VolumeMesh};
use crate::mortar::InterfacePair;

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad: GradientFn,
}

impl ExactSolution {
    /// `u = 16 x y (1 - x)(1 - y)`, one at the center of the unit square.
    pub fn bubble() -> Self {
        Self {
            u: Arc::new(|x, y| 16.0 * x * y * (1.0 - x) * (1.0 - y)),
            grad: Arc::new(|x, y| [16.0 * y * (1.0 - y) * (1.0 - 2.0 * x), 16.0 * x * (1.0 - x) * (1.0 - 2.0 * y)]),
        }
    }

    /// `u = a + b x + c y`
    pub fn linear(a: f64, b: f64, c: f64) -> Self {
        Self {
            u: Arc::new(move |x, y| a + b * x + c * y),
            grad: Arc::new(move |_, _| [b, c]),
        }
    }

    /// `u = sin(pi x) sin(pi y)`
    pub fn sine() -> Self {
        Self {
            u: Arc::new(|x, y| (PI * x).sin() * (PI * y).sin()),
            grad: Arc::new(|x, y| [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()]),
        }
    }
}

/// Transmission problem `-Laplace u = f` on master `Omega_1` and slave `Omega_2`.
#[derive(Clone)]
pub struct PoissonProblem {
    pub master: VolumeMesh,
    pub slave: VolumeMesh,
    pub interface: InterfacePair,
    /// Volume node id of each master interface node.
    pub master_iface_nodes: Vec<usize>,
    /// Volume node id of each slave interface node.
    pub slave_iface_nodes: Vec<usize>,
    pub forcing: ScalarFn,
    pub dirichlet: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl PoissonProblem {
    pub fn new(master: VolumeMesh, slave: VolumeMesh, forcing: ScalarFn, dirichlet: ScalarFn) -> Result<Self> {
        if master.tagged_nodes(BoundaryTag::Dirichlet).is_empty() && slave.tagged_nodes(BoundaryTag::Dirichlet).is_empty() {
            return Err(Error::InvalidArgument("no Dirichlet boundary: problem is not well posed".into()));
        }
        let (mi, master_iface_nodes) = master.interface_mesh(Side::Master)?;
        let (si, slave_iface_nodes) = slave.interface_mesh(Side::Slave)?;
        let interface = InterfacePair::new(mi, si)?;
        Ok(Self {
            master,
            slave,
            interface,
            master_iface_nodes,
            slave_iface_nodes,
            forcing,
            dirichlet,
            exact: None,
        })
    }

    /// Problem whose data come from `exact`: `f = -Laplace u` given, `g = u`.
    pub fn with_exact(master: VolumeMesh, slave: VolumeMesh, exact: ExactSolution, forcing: ScalarFn) -> Result<Self> {
        let g = exact.u.clone();
        let mut p = Self::new(master, slave, forcing, g)?;
        p.exact = Some(exact);
        Ok(p)
    }

    /// Manufactured bubble on the unit square split at `y = 0.5 + a sin(pi x)`.
    pub fn bubble_split(nx_master: usize, nx_slave: usize, curve_amplitude: f64) -> Result<Self> {
        let (m, s) = split_unit_square(nx_master, nx_slave, curve_amplitude)?;
        let f: ScalarFn = Arc::new(|x, y| 32.0 * (x * (1.0 - x) + y * (1.0 - y)));
        Self::with_exact(m, s, ExactSolution::bubble(), f)
    }

    pub fn master_interface(&self) -> &InterfaceMesh {
        &self.interface.master
    }

    pub fn slave_interface(&self) -> &InterfaceMesh {
        &self.interface.slave
    }

    /// Fixed master values: every master Dirichlet node.
    pub(crate) fn master_fixed(&self) -> Vec<(usize, f64)> {
        let g = &self.dirichlet;
        self.master
            .tagged_nodes(BoundaryTag::Dirichlet)
            .into_iter()
            .map(|i| (i, g(self.master.nodes[i][0], self.master.nodes[i][1])))
            .collect()
    }

    /// Fixed slave values: every slave Dirichlet node, including interface
    /// nodes on the Dirichlet boundary.
    pub(crate) fn slave_fixed(&self) -> Vec<(usize, f64)> {
        let g = &self.dirichlet;
        self.slave
            .tagged_nodes(BoundaryTag::Dirichlet)
            .into_iter()
            .map(|i| (i, g(self.slave.nodes[i][0], self.slave.nodes[i][1])))
            .collect()
    }
}
