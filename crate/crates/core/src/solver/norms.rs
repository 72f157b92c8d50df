use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mesh::quadrature::rule_for_degree;
use crate::mesh::{ElementKind, VolumeMesh};
use crate::solver::p1::p1_gradients;
use crate::solver::{ExactSolution, PoissonProblem, SolutionFields};

/// Quadrature degree of the error integrals.
const ERROR_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_broken: f64,
    /// Full broken `H^1` norm, `sqrt(L2^2 + |.|_1^2)` summed over subdomains.
    pub h1_broken: f64,
    pub h1_semi_broken: f64,
    /// Per-subdomain `L^2` errors, master then slave.
    pub l2: [f64; 2],
    pub h1: [f64; 2],
    pub observed_order: Option<(f64, f64)>,
}

/// Squared `L^2` and `H^1`-seminorm errors of P1 values `u` on `mesh`.
fn subdomain_errors(mesh: &VolumeMesh, u: &[f64], exact: &ExactSolution) -> Result<(f64, f64)> {
    let rule = rule_for_degree(ElementKind::Tri3, ERROR_DEGREE)?;
    let (mut l2, mut semi) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let (area, g) = p1_gradients(mesh, e)?;
        let nodes = mesh.element_nodes(e);
        let uh = [u[nodes[0]], u[nodes[1]], u[nodes[2]]];
        let grad_h = [
            g[0][0] * uh[0] + g[1][0] * uh[1] + g[2][0] * uh[2],
            g[0][1] * uh[0] + g[1][1] * uh[1] + g[2][1] * uh[2],
        ];
        let geom = mesh.geometry(e);
        for (xi, w) in rule.iter() {
            let x = geom.map(xi);
            let n = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let v = n[0] * uh[0] + n[1] * uh[1] + n[2] * uh[2] - (exact.u)(x[0], x[1]);
            let ge = (exact.grad)(x[0], x[1]);
            let (dx, dy) = (grad_h[0] - ge[0], grad_h[1] - ge[1]);
            let jw = w * 2.0 * area;
            l2 += jw * v * v;
            semi += jw * (dx * dx + dy * dy);
        }
    }
    Ok((l2, semi))
}

/// Broken `L^2` / `H^1` errors against the problem's exact solution.
pub fn broken_norms(fields: &SolutionFields, problem: &PoissonProblem) -> Result<ErrorReport> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("broken norms need an exact solution".into()))?;
    let (l1, s1) = subdomain_errors(&problem.master, &fields.u1, exact)?;
    let (l2, s2) = subdomain_errors(&problem.slave, &fields.u2, exact)?;
    Ok(ErrorReport {
        l2_broken: (l1 + l2).sqrt(),
        h1_broken: (l1 + l2 + s1 + s2).sqrt(),
        h1_semi_broken: (s1 + s2).sqrt(),
        l2: [l1.sqrt(), l2.sqrt()],
        h1: [(l1 + s1).sqrt(), (l2 + s2).sqrt()],
        observed_order: None,
    })
}

/// Least-squares slope of `log e` against `log h` over the finest three levels.
pub fn observed_order(h: &[f64], e: &[f64]) -> Option<f64> {
    let n = h.len().min(e.len());
    if n < 2 {
        return None;
    }
    let start = n.saturating_sub(3);
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&i| h[i] > 0.0 && e[i] > 0.0)
        .map(|i| (h[i].ln(), e[i].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `node,x,y,u` rows; slave nodes are numbered after the master nodes.
pub fn write_solution_csv<W: Write>(mut out: W, problem: &PoissonProblem, fields: &SolutionFields) -> io::Result<()> {
    writeln!(out, "node,x,y,u")?;
    let n1 = problem.master.n_nodes();
    for (i, p) in problem.master.nodes.iter().enumerate() {
        writeln!(out, "{i},{},{},{}", p[0], p[1], fields.u1[i])?;
    }
    for (i, p) in problem.slave.nodes.iter().enumerate() {
        writeln!(out, "{},{},{},{}", n1 + i, p[0], p[1], fields.u2[i])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mortar::{MortarConfig, Scheme};
    use crate::solver::{solve, ExactSolution, PoissonProblem};
    use std::sync::Arc;

    fn fields_from(p: &PoissonProblem, f: impl Fn(f64, f64) -> f64) -> SolutionFields {
        let u1: Vec<f64> = p.master.nodes.iter().map(|q| f(q[0], q[1])).collect();
        let u2: Vec<f64> = p.slave.nodes.iter().map(|q| f(q[0], q[1])).collect();
        SolutionFields {
            u_gamma1: p.master_iface_nodes.iter().map(|&i| u1[i]).collect(),
            u_gamma2: p.slave_iface_nodes.iter().map(|&i| u2[i]).collect(),
            u1,
            u2,
            lambda: Vec::new(),
            constraint_residual: 0.0,
            solver: crate::solver::SolverKind::Cholesky,
            path: crate::solver::SolvePath::Condensed,
        }
    }

    #[test]
    fn interpolated_linear_has_zero_error() {
        let (m, s) = crate::mesh::generate::split_unit_square(4, 6, 0.0).unwrap();
        let ex = ExactSolution::linear(1.0, -2.0, 0.5);
        let p = PoissonProblem::with_exact(m, s, ex, Arc::new(|_, _| 0.0)).unwrap();
        let r = broken_norms(&fields_from(&p, |x, y| 1.0 - 2.0 * x + 0.5 * y), &p).unwrap();
        assert!(r.l2_broken <= 1e-12 && r.h1_broken <= 1e-12);
    }

    #[test]
    fn unit_constant_has_unit_norm() {
        let (m, s) = crate::mesh::generate::split_unit_square(4, 6, 0.0).unwrap();
        let p = PoissonProblem::with_exact(m, s, ExactSolution::linear(1.0, 0.0, 0.0), Arc::new(|_, _| 0.0)).unwrap();
        let r = broken_norms(&fields_from(&p, |_, _| 0.0), &p).unwrap();
        assert!((r.l2_broken - 1.0).abs() < 1e-13);
        let sq = r.l2[0] * r.l2[0] + r.l2[1] * r.l2[1];
        assert!((sq.sqrt() - r.l2_broken).abs() < 1e-15);
    }

    #[test]
    fn missing_exact_is_error() {
        let mut p = PoissonProblem::bubble_split(4, 6, 0.0).unwrap();
        let f = solve(&p, &MortarConfig::new(Scheme::Eb, 2)).unwrap();
        p.exact = None;
        assert!(matches!(broken_norms(&f, &p), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn order_of_exact_power_law() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((observed_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(observed_order(&h[..1], &e[..1]).is_none());
    }

    #[test]
    fn center_value_near_one() {
        let p = PoissonProblem::bubble_split(8, 12, 0.0).unwrap();
        let f = solve(&p, &MortarConfig::new(Scheme::Rb, 2)).unwrap();
        let c = p
            .master
            .nodes
            .iter()
            .position(|q| (q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12)
            .unwrap();
        assert!((f.u1[c] - 1.0).abs() < 0.02, "{}", f.u1[c]);
        let mut buf = Vec::new();
        write_solution_csv(&mut buf, &p, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,x,y,u\n"));
        assert_eq!(text.lines().count(), 1 + p.master.n_nodes() + p.slave.n_nodes());
    }
}
