use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};

/// Relative residual target of the iterative fallback.
pub const CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Cholesky,
    ConjugateGradient,
    DenseLu,
}

/// A system with fixed unknowns removed.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub matrix: CsrMatrix<f64>,
    pub rhs: Vec<f64>,
    /// Original index of each remaining unknown.
    pub free: Vec<usize>,
    n: usize,
    fixed: Vec<(usize, f64)>,
}

impl Reduced {
    /// Full-length vector from reduced unknowns plus the fixed values.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, v) in self.free.iter().zip(x) {
            out[i] = *v;
        }
        for &(i, v) in &self.fixed {
            out[i] = v;
        }
        out
    }
}

/// Symmetric elimination of `fixed` unknowns: their rows and columns are removed
/// and the columns times the prescribed values moved to the right-hand side.
pub fn eliminate(a: &CsrMatrix<f64>, b: &[f64], fixed: &[(usize, f64)]) -> Reduced {
    let n = a.nrows();
    let mut value = vec![None; n];
    for &(i, v) in fixed {
        value[i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| value[i].is_none()).collect();
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in free.iter().enumerate() {
        pos[i] = p;
    }
    let mut coo = CooMatrix::new(free.len(), free.len());
    let mut rhs: Vec<f64> = free.iter().map(|&i| b[i]).collect();
    for (p, &i) in free.iter().enumerate() {
        let row = a.row(i);
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            match value[j] {
                Some(g) => rhs[p] -= v * g,
                None => coo.push(p, pos[j], v),
            }
        }
    }
    let mut fixed = fixed.to_vec();
    fixed.sort_by_key(|f| f.0);
    fixed.dedup_by_key(|f| f.0);
    Reduced {
        matrix: CsrMatrix::from(&coo),
        rhs,
        free,
        n,
        fixed,
    }
}

/// Sparse Cholesky, falling back to Jacobi-preconditioned CG when factorization fails.
pub fn solve_spd(a: &CsrMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, SolverKind)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), SolverKind::Cholesky));
    }
    let csc = CscMatrix::from(a);
    if let Ok(ch) = CscCholesky::factor(&csc) {
        let rhs = DMatrix::from_column_slice(b.len(), 1, b);
        let x = ch.solve(&rhs);
        let x: Vec<f64> = x.column(0).iter().copied().collect();
        if x.iter().all(|v| v.is_finite()) {
            return Ok((x, SolverKind::Cholesky));
        }
    }
    conjugate_gradient(a, b, CG_TOL, 10 * a.nrows() + 100).map(|x| (x, SolverKind::ConjugateGradient))
}

pub fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.row_iter()
        .map(|r| r.col_indices().iter().zip(r.values()).map(|(&j, v)| v * x[j]).sum())
        .collect()
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
pub fn conjugate_gradient(a: &CsrMatrix<f64>, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut diag = vec![0.0; n];
    for (i, j, v) in a.triplet_iter() {
        if i == j {
            diag[i] += *v;
        }
    }
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::SolverFailure("non-positive diagonal: matrix is not SPD".into()));
    }
    let bnorm = dotv(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dotv(&r, &z);
    for _ in 0..max_iter {
        let ap = spmv(a, &p);
        let pap = dotv(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure(format!("CG breakdown: p^T A p = {pap:.3e}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dotv(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dotv(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dotv(&r, &r).sqrt() / bnorm;
    Err(Error::SolverFailure(format!("CG did not converge: relative residual {res:.3e}")))
}

/// Dense LU for indefinite systems.
pub fn solve_dense_lu(a: &CsrMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let dense = crate::mortar::operator::csr_to_dense(a);
    let rhs = DMatrix::from_column_slice(b.len(), 1, b);
    let x = dense
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolverFailure("singular saddle-point matrix".into()))?;
    Ok(x.column(0).iter().copied().collect())
}

/// `||A x - b|| / ||b||` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = spmv(a, x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let bn = dotv(b, b).sqrt();
    if bn > 0.0 {
        r / bn
    } else {
        r
    }
}
