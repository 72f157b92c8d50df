use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::mortar::MortarMatrices;

/// Largest `|N_Gamma1| * |N_Gamma2|` for which `E` is kept dense.
pub const DENSE_E_LIMIT: usize = 1_000_000;

/// Relative magnitude below which entries of a sparse `E` are dropped.
const SPARSE_DROP: f64 = 1e-16;

#[derive(Debug, Clone)]
pub enum TransferStorage {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix<f64>),
}

/// `E = D^{-1} M`, mapping master interface values to slave interface values.
#[derive(Debug, Clone)]
pub struct MortarOperator {
    pub e: TransferStorage,
}

impl MortarOperator {
    pub fn nrows(&self) -> usize {
        match &self.e {
            TransferStorage::Dense(m) => m.nrows(),
            TransferStorage::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match &self.e {
            TransferStorage::Dense(m) => m.ncols(),
            TransferStorage::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.e, TransferStorage::Dense(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.e {
            TransferStorage::Dense(m) => m.clone(),
            TransferStorage::Sparse(m) => csr_to_dense(m),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match &self.e {
            TransferStorage::Dense(m) => m.row_iter().map(|r| r.sum()).collect(),
            TransferStorage::Sparse(m) => m.row_iter().map(|r| r.values().iter().sum()).collect(),
        }
    }

    /// `max_i |sum_k E[i, k] - 1|`
    pub fn row_sum_defect(&self) -> f64 {
        self.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `E u`
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                found: u.len(),
            });
        }
        Ok(match &self.e {
            TransferStorage::Dense(m) => m.row_iter().map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum()).collect(),
            TransferStorage::Sparse(m) => m
                .row_iter()
                .map(|r| r.col_indices().iter().zip(r.values()).map(|(&k, v)| v * u[k]).sum())
                .collect(),
        })
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.e {
            TransferStorage::Dense(m) => (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |k| (i, k)))
                .filter(|&(i, k)| m[(i, k)] != 0.0)
                .map(|(i, k)| (i, k, m[(i, k)]))
                .collect(),
            TransferStorage::Sparse(m) => m.triplet_iter().map(|(i, k, v)| (i, k, *v)).collect(),
        }
    }

    pub fn write_coo<W: Write>(&self, out: W) -> io::Result<()> {
        write_triplets(out, self.nrows(), self.ncols(), &self.triplets())
    }
}

pub(crate) fn csr_to_dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        out[(i, j)] += *v;
    }
    out
}

/// Rows of `D` without a single nonzero entry.
fn empty_rows(d: &CsrMatrix<f64>) -> Vec<usize> {
    d.row_iter()
        .enumerate()
        .filter(|(_, r)| r.values().iter().all(|v| *v == 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Solves `D E = M` by factorization; no inverse is formed.
///
/// `E` is dense up to [`DENSE_E_LIMIT`] entries and sparse beyond.
pub fn compute_e(mats: &MortarMatrices) -> Result<MortarOperator> {
    let empty = empty_rows(&mats.d);
    if !empty.is_empty() {
        return Err(Error::SingularD { nodes: empty });
    }
    solve_transfer(&mats.d, &mats.m)
}

fn solve_transfer(d: &CsrMatrix<f64>, m: &CsrMatrix<f64>) -> Result<MortarOperator> {
    let (n2, n1) = (m.nrows(), m.ncols());
    let rhs = csr_to_dense(m);
    if n1 * n2 <= DENSE_E_LIMIT {
        let dd = csr_to_dense(d);
        let e = match dd.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => dd.lu().solve(&rhs).ok_or_else(|| Error::SingularD { nodes: Vec::new() })?,
        };
        return Ok(MortarOperator {
            e: TransferStorage::Dense(e),
        });
    }
    let csc = CscMatrix::from(d);
    let ch = CscCholesky::factor(&csc).map_err(|e| Error::SolverFailure(format!("factorization of D failed: {e}")))?;
    let e = ch.solve(&rhs);
    let mut coo = CooMatrix::new(n2, n1);
    for i in 0..n2 {
        let row = e.row(i);
        let cut = SPARSE_DROP * row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (k, v) in row.iter().enumerate() {
            if v.abs() > cut {
                coo.push(i, k, *v);
            }
        }
    }
    Ok(MortarOperator {
        e: TransferStorage::Sparse(CsrMatrix::from(&coo)),
    })
}

/// `u_Gamma2 = E u_Gamma1`
pub fn interface_transfer(op: &MortarOperator, u_master: &[f64]) -> Result<Vec<f64>> {
    op.apply(u_master)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// `max |sum_k E[i, k] - 1|` over slave nodes with a nonempty row of `D`.
    pub row_sum_defect: f64,
    pub dropped_fraction: f64,
    /// Slave elements that kept no Gauss point.
    pub uncovered_slaves: Vec<usize>,
    /// Slave nodes whose row of `D` is empty.
    pub empty_rows: Vec<usize>,
}

/// Consistency diagnostics; slave nodes with empty rows are excluded from `E` here
/// instead of failing.
pub fn consistency_report(mats: &MortarMatrices) -> Result<ConsistencyReport> {
    let empty = empty_rows(&mats.d);
    let keep: Vec<usize> = (0..mats.n_slave()).filter(|i| empty.binary_search(i).is_err()).collect();
    let row_sum_defect = if keep.is_empty() {
        0.0
    } else {
        let mut pos = vec![usize::MAX; mats.n_slave()];
        for (p, &i) in keep.iter().enumerate() {
            pos[i] = p;
        }
        let mut d = CooMatrix::new(keep.len(), keep.len());
        for (i, j, v) in mats.d.triplet_iter() {
            if pos[i] != usize::MAX && pos[j] != usize::MAX {
                d.push(pos[i], pos[j], *v);
            }
        }
        let mut m = CooMatrix::new(keep.len(), mats.n_master());
        for (i, k, v) in mats.m.triplet_iter() {
            if pos[i] != usize::MAX {
                m.push(pos[i], k, *v);
            }
        }
        solve_transfer(&CsrMatrix::from(&d), &CsrMatrix::from(&m))?.row_sum_defect()
    };
    Ok(ConsistencyReport {
        row_sum_defect,
        dropped_fraction: mats.stats.dropped_fraction(),
        uncovered_slaves: mats.stats.uncovered_slaves.clone(),
        empty_rows: empty,
    })
}

/// Coordinate text: a `rows cols nnz` header line, then `row col value` per entry.
pub fn write_coo<W: Write>(out: W, m: &CsrMatrix<f64>) -> io::Result<()> {
    let t: Vec<(usize, usize, f64)> = m.triplet_iter().map(|(i, j, v)| (i, j, *v)).collect();
    write_triplets(out, m.nrows(), m.ncols(), &t)
}

fn write_triplets<W: Write>(mut out: W, rows: usize, cols: usize, t: &[(usize, usize, f64)]) -> io::Result<()> {
    writeln!(out, "{rows} {cols} {}", t.len())?;
    for (i, j, v) in t {
        writeln!(out, "{i} {j} {v:?}")?;
    }
    Ok(())
}

/// Reads the format written by [`write_coo`].
pub fn read_coo<R: BufRead>(input: R) -> Result<CsrMatrix<f64>> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::format(1, "missing header"))?;
    let header = header?;
    let h: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::format(1, format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    if h.len() != 3 {
        return Err(Error::format(1, "header needs `rows cols nnz`"));
    }
    let mut coo = CooMatrix::new(h[0], h[1]);
    let mut count = 0;
    for (ln, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::format(ln + 1, format!("bad entry `{line}`"));
        let mut it = line.split_whitespace();
        let i: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let j: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let v: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if i >= h[0] || j >= h[1] {
            return Err(bad());
        }
        coo.push(i, j, v);
        count += 1;
    }
    if count != h[2] {
        return Err(Error::format(0, format!("expected {} entries, found {count}", h[2])));
    }
    Ok(CsrMatrix::from(&coo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::interval_mesh;
    use crate::mesh::{ElementKind, Side};
    use crate::mortar::{assemble, InterfacePair, MortarConfig, Scheme};

    fn pair(a: f64, b: f64, nm: usize, ns: usize) -> InterfacePair {
        let m = interval_mesh(0.0, 1.0, nm, ElementKind::Seg2, Side::Master).unwrap();
        let s = interval_mesh(a, b, ns, ElementKind::Seg2, Side::Slave).unwrap();
        InterfacePair::with_gap_tolerance(m, s, 0.05).unwrap()
    }

    #[test]
    fn sb_conforming_identity() {
        let p = pair(0.0, 1.0, 5, 5);
        let mm = assemble(&p, &MortarConfig::new(Scheme::Sb1d, 2)).unwrap();
        let e = compute_e(&mm).unwrap();
        assert!((e.to_dense() - DMatrix::identity(6, 6)).abs().max() <= 1e-14);
    }

    #[test]
    fn transfer_constants_and_zero() {
        let p = pair(0.0, 1.0, 3, 5);
        for scheme in Scheme::ALL {
            let e = compute_e(&assemble(&p, &MortarConfig::new(scheme, 2)).unwrap()).unwrap();
            let ones = interface_transfer(&e, &[1.0; 4]).unwrap();
            assert!(ones.iter().all(|v| (v - 1.0).abs() <= 1e-10), "{scheme}");
            assert!(interface_transfer(&e, &[0.0; 4]).unwrap().iter().all(|v| *v == 0.0));
            assert!(matches!(
                interface_transfer(&e, &[1.0; 3]),
                Err(Error::DimensionMismatch { expected: 4, found: 3 })
            ));
        }
    }

    #[test]
    fn trimmed_pair_reports_uncovered() {
        let p = pair(0.0, 1.5, 2, 3);
        let mm = assemble(&p, &MortarConfig::new(Scheme::Eb, 2)).unwrap();
        assert!(matches!(compute_e(&mm), Err(Error::SingularD { ref nodes }) if nodes == &vec![3]));
        let r = consistency_report(&mm).unwrap();
        assert_eq!(r.uncovered_slaves, vec![2]);
        assert_eq!(r.empty_rows, vec![3]);
        assert!(r.dropped_fraction > 0.0);
        assert!(r.row_sum_defect.is_finite());
    }

    #[test]
    fn coo_round_trip() {
        let p = pair(0.0, 1.0, 2, 3);
        let mm = assemble(&p, &MortarConfig::new(Scheme::Sb1d, 2)).unwrap();
        let mut buf = Vec::new();
        write_coo(&mut buf, &mm.m).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("4 3 "));
        let back = read_coo(io::Cursor::new(buf)).unwrap();
        assert_eq!(csr_to_dense(&back), csr_to_dense(&mm.m));
    }

    #[test]
    fn sparse_storage_matches_dense() {
        let p = pair(0.0, 1.0, 700, 1500);
        let mm = assemble(&p, &MortarConfig::new(Scheme::Sb1d, 2)).unwrap();
        let e = compute_e(&mm).unwrap();
        assert!(!e.is_dense());
        assert!(e.row_sum_defect() <= 1e-12);
        let u: Vec<f64> = (0..701).map(|i| (i as f64 * 0.01).sin()).collect();
        let v = e.apply(&u).unwrap();
        assert_eq!(v.len(), 1501);
    }
}
