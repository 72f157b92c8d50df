use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::quadrature::rule_for_degree;
use crate::mesh::{BoundaryTag, ElementKind, Mesh, Side, VolumeMesh};
use crate::solver::linalg::{eliminate, solve_spd};

/// Degree of the load-vector quadrature.
const LOAD_DEGREE: usize = 4;

/// Stiffness and load of one subdomain, with its interior/interface node split.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    /// `int grad N_i . grad N_j` over all nodes.
    pub stiffness: CsrMatrix<f64>,
    /// `int f N_i`
    pub load: Vec<f64>,
    /// Nodes not on the interface, ascending.
    pub interior: Vec<usize>,
    /// Interface nodes in interface-mesh order (empty without interface tags).
    pub interface: Vec<usize>,
}

/// The four blocks of a subdomain system split by `interior` / `interface`.
#[derive(Debug, Clone)]
pub struct SubdomainBlocks {
    pub a_ii: CsrMatrix<f64>,
    pub a_ig: CsrMatrix<f64>,
    pub a_gg: CsrMatrix<f64>,
    pub f_i: Vec<f64>,
    pub f_g: Vec<f64>,
}

impl SubdomainSystem {
    pub fn blocks(&self) -> SubdomainBlocks {
        SubdomainBlocks {
            a_ii: submatrix(&self.stiffness, &self.interior, &self.interior),
            a_ig: submatrix(&self.stiffness, &self.interior, &self.interface),
            a_gg: submatrix(&self.stiffness, &self.interface, &self.interface),
            f_i: self.interior.iter().map(|&i| self.load[i]).collect(),
            f_g: self.interface.iter().map(|&i| self.load[i]).collect(),
        }
    }
}

/// Rows `rows` and columns `cols` of `a`, in the given orders.
pub fn submatrix(a: &CsrMatrix<f64>, rows: &[usize], cols: &[usize]) -> CsrMatrix<f64> {
    let mut col_pos = vec![usize::MAX; a.ncols()];
    for (p, &c) in cols.iter().enumerate() {
        col_pos[c] = p;
    }
    let mut coo = CooMatrix::new(rows.len(), cols.len());
    for (p, &r) in rows.iter().enumerate() {
        let row = a.row(r);
        for (&c, &v) in row.col_indices().iter().zip(row.values()) {
            if col_pos[c] != usize::MAX {
                coo.push(p, col_pos[c], v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// Area and constant shape-function gradients of a P1 triangle.
pub(crate) fn p1_gradients(mesh: &Mesh, elem: usize) -> Result<(f64, [[f64; 2]; 3])> {
    let n = mesh.element_nodes(elem);
    let [x0, y0, _] = mesh.nodes[n[0]];
    let [x1, y1, _] = mesh.nodes[n[1]];
    let [x2, y2, _] = mesh.nodes[n[2]];
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    if !(det > 0.0) {
        return Err(Error::DegenerateElement {
            elem,
            detail: format!("P1 determinant {det:.3e}"),
        });
    }
    let g = [
        [(y1 - y2) / det, (x2 - x1) / det],
        [(y2 - y0) / det, (x0 - x2) / det],
        [(y0 - y1) / det, (x1 - x0) / det],
    ];
    Ok((0.5 * det, g))
}

/// Standard P1 assembly of `-Laplace u = f` on `mesh`.
pub fn assemble_subdomain(mesh: &VolumeMesh, f: &(dyn Fn(f64, f64) -> f64 + Sync)) -> Result<SubdomainSystem> {
    if mesh.kind != ElementKind::Tri3 {
        return Err(Error::InvalidArgument("P1 assembly needs Tri3 elements".into()));
    }
    let rule = rule_for_degree(ElementKind::Tri3, LOAD_DEGREE)?;
    let locals: Vec<Result<([f64; 9], [f64; 3])>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let (area, g) = p1_gradients(mesh, e)?;
            let mut k = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    k[3 * i + j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
            let mut load = [0.0; 3];
            for (xi, w) in rule.iter() {
                let x = mesh.geometry(e).map(xi);
                let n = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                let fv = f(x[0], x[1]) * w * 2.0 * area;
                for i in 0..3 {
                    load[i] += fv * n[i];
                }
            }
            Ok((k, load))
        })
        .collect();
    let n = mesh.n_nodes();
    let mut coo = CooMatrix::new(n, n);
    let mut load = vec![0.0; n];
    for (e, local) in locals.into_iter().enumerate() {
        let (k, l) = local?;
        let nodes = mesh.element_nodes(e);
        for i in 0..3 {
            load[nodes[i]] += l[i];
            for j in 0..3 {
                coo.push(nodes[i], nodes[j], k[3 * i + j]);
            }
        }
    }
    let interface = if mesh.tagged_nodes(BoundaryTag::Interface).is_empty() {
        Vec::new()
    } else {
        mesh.interface_mesh(Side::Master)?.1
    };
    let mut is_iface = vec![false; n];
    for &i in &interface {
        is_iface[i] = true;
    }
    Ok(SubdomainSystem {
        stiffness: CsrMatrix::from(&coo),
        load,
        interior: (0..n).filter(|&i| !is_iface[i]).collect(),
        interface,
    })
}

/// Conforming single-domain solve with Dirichlet data `g` on every Dirichlet-tagged node.
pub fn solve_single_domain(
    mesh: &VolumeMesh,
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    g: &(dyn Fn(f64, f64) -> f64 + Sync),
) -> Result<Vec<f64>> {
    let sys = assemble_subdomain(mesh, f)?;
    let fixed: Vec<(usize, f64)> = mesh
        .tagged_nodes(BoundaryTag::Dirichlet)
        .into_iter()
        .map(|i| (i, g(mesh.nodes[i][0], mesh.nodes[i][1])))
        .collect();
    if fixed.is_empty() {
        return Err(Error::InvalidArgument("no Dirichlet nodes".into()));
    }
    let red = eliminate(&sys.stiffness, &sys.load, &fixed);
    let (x, _) = solve_spd(&red.matrix, &red.rhs)?;
    Ok(red.scatter(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{tri_grid, uniform};
    use std::collections::BTreeMap;

    fn single() -> VolumeMesh {
        let m = Mesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            ElementKind::Tri3,
            vec![0, 1, 2],
        )
        .unwrap();
        VolumeMesh::new(m, BTreeMap::new()).unwrap()
    }

    fn dense(a: &CsrMatrix<f64>) -> nalgebra::DMatrix<f64> {
        crate::mortar::operator::csr_to_dense(a)
    }

    #[test]
    fn reference_triangle_stiffness_and_load() {
        let s0 = assemble_subdomain(&single(), &|_, _| 0.0).unwrap();
        let want = nalgebra::DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0]) * 0.5;
        assert!((dense(&s0.stiffness) - want).abs().max() < 1e-15);
        let s1 = assemble_subdomain(&single(), &|_, _| 1.0).unwrap();
        assert!(s1.load.iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn translation_invariant_stiffness() {
        let a = tri_grid(&uniform(0.0, 1.0, 3), &uniform(0.0, 1.0, 2), None).unwrap();
        let b = tri_grid(&uniform(5.0, 6.0, 3), &uniform(-2.0, -1.0, 2), None).unwrap();
        let ka = dense(&assemble_subdomain(&a, &|_, _| 0.0).unwrap().stiffness);
        let kb = dense(&assemble_subdomain(&b, &|_, _| 0.0).unwrap().stiffness);
        assert!((ka - kb).abs().max() < 1e-13);
    }

    #[test]
    fn single_domain_reproduces_linear() {
        let m = tri_grid(&uniform(0.0, 1.0, 5), &uniform(0.0, 1.0, 4), None).unwrap();
        let g = |x: f64, y: f64| 1.0 + 2.0 * x - 3.0 * y;
        let u = solve_single_domain(&m, &|_, _| 0.0, &g).unwrap();
        for (i, p) in m.nodes.iter().enumerate() {
            assert!((u[i] - g(p[0], p[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn blocks_partition() {
        let m = tri_grid(
            &uniform(0.0, 1.0, 2),
            &uniform(0.0, 1.0, 2),
            Some(crate::mesh::generate::RectSide::Top),
        )
        .unwrap();
        let s = assemble_subdomain(&m, &|_, _| 1.0).unwrap();
        assert_eq!(s.interface, vec![6, 7, 8]);
        let b = s.blocks();
        assert_eq!((b.a_ii.nrows(), b.a_ig.ncols(), b.a_gg.nrows()), (6, 3, 3));
        let total: f64 = b.f_i.iter().chain(&b.f_g).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
