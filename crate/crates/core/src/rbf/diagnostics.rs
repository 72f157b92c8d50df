use nalgebra::DMatrix;

use crate::error::Result;
use crate::mesh::{ElementKind, Point};
use crate::rbf::interpolant::{dist_sq, RbfInterpolant};

/// 1-norm condition estimate `||A||_1 * est(||A^{-1}||_1)`.
///
/// Hager's iteration with Higham's alternating-sign safeguard. `solve` applies
/// `A^{-1}`; `A` is assumed symmetric so the transpose solve is the same call.
pub fn condition_estimate_1norm<F>(a: &DMatrix<f64>, solve: F) -> f64
where
    F: Fn(&DMatrix<f64>) -> Option<DMatrix<f64>>,
{
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let a_norm = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let l1 = |m: &DMatrix<f64>| m.iter().map(|v| v.abs()).sum::<f64>();

    let mut x = DMatrix::from_element(n, 1, 1.0 / n as f64);
    let mut est = 0.0f64;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let Some(y) = solve(&x) else {
            return f64::INFINITY;
        };
        est = est.max(l1(&y));
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = solve(&xi) else {
            return f64::INFINITY;
        };
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x.fill(0.0);
        x[(j, 0)] = 1.0;
    }
    let alt = DMatrix::from_fn(n, 1, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 })
    });
    if let Some(y) = solve(&alt) {
        est = est.max(2.0 * l1(&y) / (3.0 * n as f64));
    }
    a_norm * est
}

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `n` quasi-random points in the reference domain of `kind` (Halton, bases 2 and 3).
pub fn halton_reference_points(kind: ElementKind, n: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1;
    while out.len() < n {
        let (u, v) = (halton(i, 2), halton(i, 3));
        i += 1;
        match kind {
            ElementKind::Seg2 | ElementKind::Seg3 => out.push([2.0 * u - 1.0, 0.0]),
            ElementKind::Quad4 | ElementKind::Quad8 => out.push([2.0 * u - 1.0, 2.0 * v - 1.0]),
            ElementKind::Tri3 => {
                if u + v <= 1.0 {
                    out.push([u, v]);
                }
            }
        }
    }
    out
}

/// Regular sampling of the reference domain with `n` points per direction.
pub fn dense_reference_samples(kind: ElementKind, n: usize) -> Vec<[f64; 2]> {
    let t = |i: usize| i as f64 / (n - 1).max(1) as f64;
    match kind {
        ElementKind::Seg2 | ElementKind::Seg3 => (0..n).map(|i| [2.0 * t(i) - 1.0, 0.0]).collect(),
        ElementKind::Quad4 | ElementKind::Quad8 => (0..n)
            .flat_map(|j| (0..n).map(move |i| [2.0 * t(i) - 1.0, 2.0 * t(j) - 1.0]))
            .collect(),
        ElementKind::Tri3 => (0..n).flat_map(|j| (0..n - j).map(move |i| [t(i), t(j)])).collect(),
    }
}

/// `max_{y in probes} min_{x in points} |x - y|`
pub fn fill_distance(points: &[Point], probes: &[Point]) -> f64 {
    probes
        .iter()
        .map(|&y| points.iter().map(|&x| dist_sq(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Root-mean-square error of the rescaled interpolant against `exact`, pooled over
/// every fitted column and probe point.
pub fn rescaled_rmse(interp: &RbfInterpolant, probes: &[Point], exact: &DMatrix<f64>) -> Result<f64> {
    let approx = interp.evaluate_rescaled(probes)?;
    let diff = approx - exact;
    Ok((diff.norm_squared() / diff.len().max(1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationDiagnostics {
    pub rmse: f64,
    pub condition_estimate: f64,
    /// Condition estimate beyond the stability ceiling.
    pub unstable: bool,
}

impl InterpolationDiagnostics {
    pub fn compute(interp: &RbfInterpolant, probes: &[Point], exact: &DMatrix<f64>) -> Result<Self> {
        let rmse = rescaled_rmse(interp, probes, exact)?;
        let condition_estimate = interp.condition_estimate;
        Ok(Self {
            rmse,
            condition_estimate,
            unstable: !(condition_estimate <= crate::rbf::interpolant::default_condition_limit()),
        })
    }
}
