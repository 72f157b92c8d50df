use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::mesh::InterfaceMesh;
use crate::mortar::operator::csr_to_dense;
use crate::mortar::{assemble, MortarConfig, MortarMatrices};
use crate::solver::linalg::{eliminate, relative_residual, solve_dense_lu, solve_spd, spmv, SolverKind};
use crate::solver::p1::{assemble_subdomain, submatrix, SubdomainBlocks, SubdomainSystem};
use crate::solver::PoissonProblem;

/// Residual ceiling for the direct saddle-point solve.
const SADDLE_RESIDUAL: f64 = 1e-10;

/// Subdomain systems plus mortar matrices, before boundary conditions.
///
/// Slave interface nodes on the Dirichlet boundary carry Dirichlet values; the
/// multiplier of each such node is merged into a neighboring free one, so the
/// imposed constraint is `P D u_G2 = P M u_G1` with `P` the merging matrix.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub master: SubdomainSystem,
    pub slave: SubdomainSystem,
    pub mortar: MortarMatrices,
    /// `P D`, one row per multiplier.
    pub constraint_slave: CsrMatrix<f64>,
    /// `P M`
    pub constraint_master: CsrMatrix<f64>,
    /// Slave interface positions that are not Dirichlet, in multiplier order.
    pub free_slave_iface: Vec<usize>,
    master_fixed: Vec<(usize, f64)>,
    slave_fixed: Vec<(usize, f64)>,
}

impl CoupledSystem {
    pub fn master_blocks(&self) -> SubdomainBlocks {
        self.master.blocks()
    }

    pub fn slave_blocks(&self) -> SubdomainBlocks {
        self.slave.blocks()
    }

    pub fn n_multipliers(&self) -> usize {
        self.free_slave_iface.len()
    }

    fn sizes(&self) -> (usize, usize, usize) {
        (self.master.load.len(), self.slave.load.len(), self.n_multipliers())
    }

    /// Full symmetric saddle matrix in `(u_1, u_2, lambda)` with multiplier rows
    /// `[-P M, P D]`, and its right-hand side, before Dirichlet elimination.
    pub fn saddle_matrix(&self) -> (CsrMatrix<f64>, Vec<f64>) {
        let (n1, n2, nl) = self.sizes();
        let n = n1 + n2 + nl;
        let mut coo = CooMatrix::new(n, n);
        for (i, j, v) in self.master.stiffness.triplet_iter() {
            coo.push(i, j, *v);
        }
        for (i, j, v) in self.slave.stiffness.triplet_iter() {
            coo.push(n1 + i, n1 + j, *v);
        }
        let lam = n1 + n2;
        for (i, k, v) in self.constraint_master.triplet_iter() {
            let col = self.master.interface[k];
            coo.push(lam + i, col, -v);
            coo.push(col, lam + i, -v);
        }
        for (i, j, v) in self.constraint_slave.triplet_iter() {
            let col = n1 + self.slave.interface[j];
            coo.push(lam + i, col, *v);
            coo.push(col, lam + i, *v);
        }
        let mut rhs = self.master.load.clone();
        rhs.extend(&self.slave.load);
        rhs.resize(n, 0.0);
        (CsrMatrix::from(&coo), rhs)
    }

    fn fixed_global(&self) -> Vec<(usize, f64)> {
        let n1 = self.master.load.len();
        self.master_fixed
            .iter()
            .copied()
            .chain(self.slave_fixed.iter().map(|&(i, v)| (n1 + i, v)))
            .collect()
    }

    /// Columns `cols` of the dense `P D`.
    fn constraint_slave_cols(&self, cols: &[usize]) -> DMatrix<f64> {
        let c = csr_to_dense(&self.constraint_slave);
        DMatrix::from_fn(c.nrows(), cols.len(), |i, j| c[(i, cols[j])])
    }
}

/// Merging matrix: rows are free slave interface positions; each fixed position is
/// added to the row of the nearest free position sharing an element with it, or
/// the nearest free position overall.
fn merge_matrix(iface: &InterfaceMesh, fixed: &[bool]) -> (CsrMatrix<f64>, Vec<usize>) {
    let n = fixed.len();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut row = vec![usize::MAX; n];
    for (r, &i) in free.iter().enumerate() {
        row[i] = r;
    }
    let mut coo = CooMatrix::new(free.len(), n);
    for &i in &free {
        coo.push(row[i], i, 1.0);
    }
    let dist = |a: usize, b: usize| crate::mesh::distance(iface.nodes[a], iface.nodes[b]);
    for b in (0..n).filter(|&i| fixed[i]) {
        let neighbors: Vec<usize> = (0..iface.n_elements())
            .filter(|&e| iface.element_nodes(e).contains(&b))
            .flat_map(|e| iface.element_nodes(e).to_vec())
            .filter(|&j| !fixed[j])
            .collect();
        let pool = if neighbors.is_empty() { &free } else { &neighbors };
        let target = pool.iter().copied().min_by(|&p, &q| dist(b, p).total_cmp(&dist(b, q)));
        if let Some(t) = target {
            coo.push(row[t], b, 1.0);
        }
    }
    (CsrMatrix::from(&coo), free)
}

/// Assembles both subdomains and attaches the mortar matrices; interface node
/// orders must match the mortar numbering.
pub fn assemble_saddle(problem: &PoissonProblem, matrices: MortarMatrices) -> Result<CoupledSystem> {
    let master = assemble_subdomain(&problem.master, &*problem.forcing)?;
    let slave = assemble_subdomain(&problem.slave, &*problem.forcing)?;
    if master.interface != problem.master_iface_nodes || slave.interface != problem.slave_iface_nodes {
        return Err(Error::IndexMap(
            "subdomain interface order differs from the interface meshes".into(),
        ));
    }
    if matrices.d.nrows() != slave.interface.len() || matrices.d.ncols() != slave.interface.len() {
        return Err(Error::IndexMap(format!(
            "D is {}x{} but the slave interface has {} nodes",
            matrices.d.nrows(),
            matrices.d.ncols(),
            slave.interface.len()
        )));
    }
    if matrices.m.ncols() != master.interface.len() {
        return Err(Error::IndexMap(format!(
            "M has {} columns but the master interface has {} nodes",
            matrices.m.ncols(),
            master.interface.len()
        )));
    }
    let slave_fixed = problem.slave_fixed();
    let mut is_fixed = vec![false; problem.slave.n_nodes()];
    for &(i, _) in &slave_fixed {
        is_fixed[i] = true;
    }
    let iface_fixed: Vec<bool> = slave.interface.iter().map(|&i| is_fixed[i]).collect();
    let (p, free_slave_iface) = merge_matrix(problem.slave_interface(), &iface_fixed);
    Ok(CoupledSystem {
        constraint_slave: &p * &matrices.d,
        constraint_master: &p * &matrices.m,
        free_slave_iface,
        master,
        slave,
        mortar: matrices,
        master_fixed: problem.master_fixed(),
        slave_fixed,
    })
}

/// System in `z = (u_1, u_2 off the interface)` after substituting the slave
/// interface values `u_G2,free = E u_G1 + h`.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    /// `T^T K T` with `u = T z + u_0`; before Dirichlet elimination.
    pub matrix: CsrMatrix<f64>,
    /// `T^T (f - K u_0)`
    pub rhs: Vec<f64>,
    /// Maps `z` to all nodal values `(u_1, u_2)`.
    pub t: CsrMatrix<f64>,
    /// Affine part of the map, nonzero only on slave interface nodes.
    pub offset: Vec<f64>,
    /// Transfer from master interface values to the free slave interface values.
    pub transfer: DMatrix<f64>,
    fixed: Vec<(usize, f64)>,
}

/// Free slave interface transfer `E = (P D)_ff^-1 P M` and offset `h = -(P D)_ff^-1 (P D)_fb g_b`.
fn free_transfer(system: &CoupledSystem) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n_iface = system.slave.interface.len();
    let free = &system.free_slave_iface;
    let mut fixed_val = vec![None; system.slave.load.len()];
    for &(i, v) in &system.slave_fixed {
        fixed_val[i] = Some(v);
    }
    let bounded: Vec<usize> = (0..n_iface).filter(|p| !free.contains(p)).collect();
    let c_ff = system.constraint_slave_cols(free);
    let c_fb = system.constraint_slave_cols(&bounded);
    let g: Vec<f64> = bounded
        .iter()
        .map(|&p| fixed_val[system.slave.interface[p]].unwrap_or(0.0))
        .collect();
    let cm = csr_to_dense(&system.constraint_master);
    let mut rhs = DMatrix::zeros(free.len(), cm.ncols() + 1);
    rhs.columns_mut(0, cm.ncols()).copy_from(&cm);
    let cg = -(&c_fb * nalgebra::DVector::from_vec(g));
    rhs.column_mut(cm.ncols()).copy_from(&cg);
    let singular = || Error::SingularD {
        nodes: free.iter().map(|&p| system.slave.interface[p]).collect(),
    };
    let sol = match c_ff.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => c_ff.lu().solve(&rhs).ok_or_else(singular)?,
    };
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(singular());
    }
    let e = sol.columns(0, cm.ncols()).into_owned();
    let h = sol.column(cm.ncols()).iter().copied().collect();
    Ok((e, h))
}

/// Static condensation of the slave interface values and `lambda`.
///
/// The master interface block becomes `A_G1G1 + E^T A_ff E`, the load `f_G1 + E^T f_f`
/// corrected by the affine offset.
pub fn condense(system: &CoupledSystem) -> Result<CondensedSystem> {
    let (n1, n2, _) = system.sizes();
    let (e, h) = free_transfer(system)?;
    let slave_iface = &system.slave.interface;
    let interior = &system.slave.interior;
    let mut zpos = vec![usize::MAX; n2];
    for (p, &i) in interior.iter().enumerate() {
        zpos[i] = n1 + p;
    }
    let nz = n1 + interior.len();
    let mut t = CooMatrix::new(n1 + n2, nz);
    for i in 0..n1 {
        t.push(i, i, 1.0);
    }
    for &i in interior {
        t.push(n1 + i, zpos[i], 1.0);
    }
    let mut offset = vec![0.0; n1 + n2];
    for &(i, v) in &system.slave_fixed {
        if zpos[i] == usize::MAX {
            offset[n1 + i] = v;
        }
    }
    for (r, &p) in system.free_slave_iface.iter().enumerate() {
        let i = slave_iface[p];
        offset[n1 + i] = h[r];
        for (k, &mnode) in system.master.interface.iter().enumerate() {
            let v = e[(r, k)];
            if v != 0.0 {
                t.push(n1 + i, mnode, v);
            }
        }
    }
    let t = CsrMatrix::from(&t);
    let mut k = CooMatrix::new(n1 + n2, n1 + n2);
    for (i, j, v) in system.master.stiffness.triplet_iter() {
        k.push(i, j, *v);
    }
    for (i, j, v) in system.slave.stiffness.triplet_iter() {
        k.push(n1 + i, n1 + j, *v);
    }
    let k = CsrMatrix::from(&k);
    let tt = t.transpose();
    let matrix = &tt * &(&k * &t);
    let ku0 = spmv(&k, &offset);
    let f: Vec<f64> = system
        .master
        .load
        .iter()
        .chain(&system.slave.load)
        .zip(&ku0)
        .map(|(a, b)| a - b)
        .collect();
    let rhs = spmv(&tt, &f);
    let fixed = system
        .master_fixed
        .iter()
        .copied()
        .chain(
            system
                .slave_fixed
                .iter()
                .filter(|f| zpos[f.0] != usize::MAX)
                .map(|&(i, v)| (zpos[i], v)),
        )
        .collect();
    Ok(CondensedSystem {
        matrix,
        rhs,
        t,
        offset,
        transfer: e,
        fixed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    Condensed,
    Saddle,
}

/// Nodal solution of the coupled problem.
#[derive(Debug, Clone)]
pub struct SolutionFields {
    /// All master volume nodes.
    pub u1: Vec<f64>,
    /// All slave volume nodes.
    pub u2: Vec<f64>,
    /// Master interface values, interface-mesh order.
    pub u_gamma1: Vec<f64>,
    /// Slave interface values, interface-mesh order.
    pub u_gamma2: Vec<f64>,
    /// One multiplier per free slave interface node.
    pub lambda: Vec<f64>,
    /// `||P (D u_G2 - M u_G1)||_max / ||P M u_G1||_max` (absolute when the denominator vanishes).
    pub constraint_residual: f64,
    pub solver: SolverKind,
    pub path: SolvePath,
}

/// Assembles the mortar matrices with `config` and solves by static condensation.
pub fn solve(problem: &PoissonProblem, config: &MortarConfig) -> Result<SolutionFields> {
    solve_with(problem, config, SolvePath::Condensed).map(|(f, _)| f)
}

/// Solves along `path`, also returning the mortar matrices used.
pub fn solve_with(problem: &PoissonProblem, config: &MortarConfig, path: SolvePath) -> Result<(SolutionFields, MortarMatrices)> {
    let mats = assemble(&problem.interface, config)?;
    let system = assemble_saddle(problem, mats)?;
    let fields = match path {
        SolvePath::Condensed => solve_condensed(&system)?,
        SolvePath::Saddle => solve_saddle(&system)?,
    };
    Ok((fields, system.mortar))
}

pub fn solve_condensed(system: &CoupledSystem) -> Result<SolutionFields> {
    let cs = condense(system)?;
    let red = eliminate(&cs.matrix, &cs.rhs, &cs.fixed);
    let (x, solver) = solve_spd(&red.matrix, &red.rhs)?;
    let z = red.scatter(&x);
    let u: Vec<f64> = spmv(&cs.t, &z).iter().zip(&cs.offset).map(|(a, b)| a + b).collect();
    let n1 = system.master.load.len();
    let (u1, u2) = (u[..n1].to_vec(), u[n1..].to_vec());
    let lambda = recover_lambda(system, &u2)?;
    Ok(finish(system, u1, u2, lambda, solver, SolvePath::Condensed))
}

/// `(P D)_ff^T lambda = (f_2 - K_2 u_2)_f`, from the free slave interface rows of the saddle system.
fn recover_lambda(system: &CoupledSystem, u2: &[f64]) -> Result<Vec<f64>> {
    let k2u = spmv(&system.slave.stiffness, u2);
    let r: Vec<f64> = system
        .free_slave_iface
        .iter()
        .map(|&p| {
            let i = system.slave.interface[p];
            system.slave.load[i] - k2u[i]
        })
        .collect();
    let c = system.constraint_slave_cols(&system.free_slave_iface).transpose();
    let rhs = DMatrix::from_column_slice(r.len(), 1, &r);
    let sol = c.lu().solve(&rhs).ok_or_else(|| Error::SingularD { nodes: Vec::new() })?;
    Ok(sol.column(0).iter().copied().collect())
}

/// Direct solve of the saddle-point system.
pub fn solve_saddle(system: &CoupledSystem) -> Result<SolutionFields> {
    let (a, b) = system.saddle_matrix();
    let red = eliminate(&a, &b, &system.fixed_global());
    let x = solve_dense_lu(&red.matrix, &red.rhs)?;
    let res = relative_residual(&red.matrix, &x, &red.rhs);
    if !(res <= SADDLE_RESIDUAL) {
        return Err(Error::SolverFailure(format!("saddle-point residual {res:.3e}")));
    }
    let full = red.scatter(&x);
    let (n1, n2, _) = system.sizes();
    Ok(finish(
        system,
        full[..n1].to_vec(),
        full[n1..n1 + n2].to_vec(),
        full[n1 + n2..].to_vec(),
        SolverKind::DenseLu,
        SolvePath::Saddle,
    ))
}

fn finish(system: &CoupledSystem, u1: Vec<f64>, u2: Vec<f64>, lambda: Vec<f64>, solver: SolverKind, path: SolvePath) -> SolutionFields {
    let u_gamma1: Vec<f64> = system.master.interface.iter().map(|&i| u1[i]).collect();
    let u_gamma2: Vec<f64> = system.slave.interface.iter().map(|&i| u2[i]).collect();
    let du = spmv(&system.constraint_slave, &u_gamma2);
    let mu = spmv(&system.constraint_master, &u_gamma1);
    let num = du.iter().zip(&mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = mu.iter().map(|v| v.abs()).fold(0.0, f64::max);
    SolutionFields {
        u1,
        u2,
        u_gamma1,
        u_gamma2,
        lambda,
        constraint_residual: if den > 0.0 { num / den } else { num },
        solver,
        path,
    }
}

/// `A_G1G1 + E^T A_ff E` assembled directly, for checking [`condense`].
pub fn condensed_interface_block(system: &CoupledSystem) -> Result<DMatrix<f64>> {
    let a1 = csr_to_dense(&submatrix(
        &system.master.stiffness,
        &system.master.interface,
        &system.master.interface,
    ));
    let free: Vec<usize> = system.free_slave_iface.iter().map(|&p| system.slave.interface[p]).collect();
    let a2 = csr_to_dense(&submatrix(&system.slave.stiffness, &free, &free));
    let (e, _) = free_transfer(system)?;
    Ok(a1 + e.transpose() * a2 * e)
}
