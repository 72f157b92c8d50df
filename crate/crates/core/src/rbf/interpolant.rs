use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::element::{eval_shape, probe_count, support_probes};
use crate::mesh::{Mesh, Point, MAX_NODES};
use crate::rbf::diagnostics::condition_estimate_1norm;
use crate::rbf::kernel::{KernelFamily, RbfKernel};
use crate::rbf::layout::{interpolation_points, PointLayout};

/// Denominator threshold below which a rescaled value is meaningless.
pub const RESCALE_BREAKDOWN: f64 = 1e-12;

/// Default ceiling on the kernel-matrix condition estimate: `1 / (100 ulp)`.
pub fn default_condition_limit() -> f64 {
    1.0 / (100.0 * f64::EPSILON)
}

/// How the shape parameter is chosen for a master element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EpsilonPolicy {
    /// `eps = h_M`, the element circumdiameter.
    #[default]
    Circumdiameter,
    /// Experimental: `eps = c * h_Xi` with `h_Xi` the fill distance of the mapped points.
    FillDistance(f64),
    /// Fixed value, mainly for studies and tests.
    Fixed(f64),
}

/// Rescaled RBF interpolant of several data columns on one point set.
#[derive(Debug, Clone)]
pub struct RbfInterpolant {
    pub kernel: RbfKernel,
    /// Physical interpolation points.
    pub points: Vec<Point>,
    /// `Phi_MM^{-1} data`, one column per fitted function.
    pub weights: DMatrix<f64>,
    /// Weights of the auxiliary support probes (zero columns when not fitted).
    pub probe_weights: DMatrix<f64>,
    /// `Phi_MM^{-1} 1`
    pub rescale_weights: DVector<f64>,
    /// 1-norm condition estimate of `Phi_MM`.
    pub condition_estimate: f64,
    /// Bounding-box center of `points`; Gaussian rows are evaluated relative to it.
    center: Point,
    local_sq: Vec<f64>,
    /// Fitted columns form a partition of unity, so `Pi_1 = sum_j Pi N_j`.
    unity_columns: bool,
}

impl RbfInterpolant {
    /// Fits `data` (`M x n` values at `points`), rejecting ill-conditioned kernel matrices.
    pub fn fit(kernel: RbfKernel, points: Vec<Point>, data: DMatrix<f64>) -> Result<Self> {
        Self::fit_impl(kernel, points, data, None, Some(default_condition_limit()))
    }

    /// As [`RbfInterpolant::fit`] but without the condition ceiling; only an exactly
    /// singular matrix fails. Used by interpolation studies that probe unstable regimes.
    pub fn fit_unchecked(kernel: RbfKernel, points: Vec<Point>, data: DMatrix<f64>) -> Result<Self> {
        Self::fit_impl(kernel, points, data, None, None)
    }

    pub(crate) fn fit_impl(
        kernel: RbfKernel,
        points: Vec<Point>,
        data: DMatrix<f64>,
        probes: Option<DMatrix<f64>>,
        condition_limit: Option<f64>,
    ) -> Result<Self> {
        let m = points.len();
        if m == 0 || data.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: data.nrows(),
            });
        }
        let phi = DMatrix::from_fn(m, m, |i, j| kernel.eval_sq(dist_sq(points[i], points[j])));
        let lu = phi.clone().lu();
        let singular = || Error::IllConditionedKernelMatrix {
            master_elem: None,
            condition: f64::INFINITY,
        };
        if !lu.is_invertible() {
            return Err(singular());
        }
        let condition_estimate = condition_estimate_1norm(&phi, |b| lu.solve(b));
        if let Some(limit) = condition_limit {
            if !(condition_estimate <= limit) {
                return Err(Error::IllConditionedKernelMatrix {
                    master_elem: None,
                    condition: condition_estimate,
                });
            }
        }
        let weights = lu.solve(&data).ok_or_else(singular)?;
        let probe_weights = match probes {
            Some(p) => lu.solve(&p).ok_or_else(singular)?,
            None => DMatrix::zeros(m, 0),
        };
        // when the data rows already sum to one, Phi^{-1} 1 is the column sum of the
        // weights; forming it that way keeps the rescaled rows summing to one exactly
        let partition_of_unity = data.ncols() > 0
            && data
                .row_iter()
                .all(|r| (r.sum() - 1.0).abs() <= 8.0 * f64::EPSILON * data.ncols() as f64);
        let unity_columns = partition_of_unity;
        let rescale_weights = if partition_of_unity {
            DVector::from_fn(m, |i, _| weights.row(i).sum())
        } else {
            let ones = DMatrix::from_element(m, 1, 1.0);
            lu.solve(&ones).ok_or_else(singular)?.column(0).into_owned()
        };
        let center = bbox_center(&points);
        let local_sq = points.iter().map(|p| dist_sq(*p, center)).collect();
        Ok(Self {
            kernel,
            points,
            weights,
            probe_weights,
            rescale_weights,
            condition_estimate,
            center,
            local_sq,
            unity_columns,
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_functions(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_probes(&self) -> usize {
        self.probe_weights.ncols()
    }

    /// Kernel row `phi(|x - xi_m|)` scaled by its largest entry.
    ///
    /// The common factor cancels in the rescaled ratio; scaling keeps Gaussian rows
    /// representable for queries far from the points. Returns `false` when every
    /// entry vanishes (outside a compact support).
    pub(crate) fn kernel_row(&self, x: Point, row: &mut [f64]) -> bool {
        let e2 = self.kernel.epsilon * self.kernel.epsilon;
        match self.kernel.family {
            KernelFamily::Gaussian => {
                // |x - p|^2 - |x - c|^2 = |p - c|^2 - 2 (x - c).(p - c): offsets of x
                // orthogonal to a planar point set drop out exactly
                let xc = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
                let mut rmin = f64::INFINITY;
                for ((r, p), psq) in row.iter_mut().zip(&self.points).zip(&self.local_sq) {
                    let pc = [p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]];
                    *r = psq - 2.0 * (xc[0] * pc[0] + xc[1] * pc[1] + xc[2] * pc[2]);
                    rmin = rmin.min(*r);
                }
                for r in row.iter_mut() {
                    *r = (-(*r - rmin) / e2).exp();
                }
                true
            }
            _ => {
                let mut max = 0.0f64;
                for (r, p) in row.iter_mut().zip(&self.points) {
                    *r = self.kernel.eval_sq(dist_sq(x, *p));
                    max = max.max(*r);
                }
                if max == 0.0 {
                    return false;
                }
                for r in row.iter_mut() {
                    *r /= max;
                }
                true
            }
        }
    }

    /// Rescaled values at `x`: fitted functions into `values`, probes into `probes`.
    ///
    /// Returns the normalised denominator on success, `None` on rescale breakdown.
    pub(crate) fn eval_point(&self, x: Point, row: &mut [f64], values: &mut [f64], probes: &mut [f64]) -> Option<f64> {
        if !self.kernel_row(x, row) {
            return None;
        }
        let phi = &row[..self.n_points()];
        let nf = self.n_functions();
        let den = if self.unity_columns && values.len() >= nf {
            let mut sum = 0.0;
            for (j, v) in values.iter_mut().enumerate().take(nf) {
                *v = column_dot(&self.weights, j, phi);
                sum += *v;
            }
            sum
        } else {
            for (j, v) in values.iter_mut().enumerate().take(nf) {
                *v = column_dot(&self.weights, j, phi);
            }
            phi.iter().zip(self.rescale_weights.iter()).map(|(a, b)| a * b).sum()
        };
        if !(den.abs() >= RESCALE_BREAKDOWN) {
            return None;
        }
        for v in values.iter_mut().take(nf) {
            *v /= den;
        }
        for (j, v) in probes.iter_mut().enumerate().take(self.n_probes()) {
            *v = column_dot(&self.probe_weights, j, phi) / den;
        }
        Some(den)
    }

    /// `N^Pi[i, j] = Pi N_j(query_i)`, the rescaled interpolant at each query point.
    pub fn evaluate_rescaled(&self, query: &[Point]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(query.len(), self.n_functions());
        let mut row = vec![0.0; self.n_points()];
        let mut vals = vec![0.0; self.n_functions()];
        for (i, &x) in query.iter().enumerate() {
            if self.eval_point(x, &mut row, &mut vals, &mut []).is_none() {
                let denominator = self.raw_denominator(x);
                return Err(Error::RescaleBreakdown { query: i, denominator });
            }
            for (j, v) in vals.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        Ok(out)
    }

    /// Rescaled probe values at each query point.
    pub fn evaluate_probes(&self, query: &[Point]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(query.len(), self.n_probes());
        let mut row = vec![0.0; self.n_points()];
        let mut probes = vec![0.0; self.n_probes()];
        for (i, &x) in query.iter().enumerate() {
            if self.eval_point(x, &mut row, &mut [], &mut probes).is_none() {
                return Err(Error::RescaleBreakdown {
                    query: i,
                    denominator: self.raw_denominator(x),
                });
            }
            for (j, v) in probes.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        Ok(out)
    }

    /// Plain (unrescaled) interpolant values at each query point.
    pub fn evaluate_plain(&self, query: &[Point]) -> DMatrix<f64> {
        let phi = DMatrix::from_fn(query.len(), self.n_points(), |i, m| {
            self.kernel.eval_sq(dist_sq(query[i], self.points[m]))
        });
        phi * &self.weights
    }

    /// Unscaled `Pi_1(x)`.
    pub fn raw_denominator(&self, x: Point) -> f64 {
        self.points
            .iter()
            .zip(self.rescale_weights.iter())
            .map(|(p, w)| w * self.kernel.eval_sq(dist_sq(x, *p)))
            .sum()
    }
}

fn bbox_center(points: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        *ck = 0.5 * (lo + hi);
    }
    c
}

fn column_dot(m: &DMatrix<f64>, j: usize, v: &[f64]) -> f64 {
    m.column(j).iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn dist_sq(a: Point, b: Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Options for fitting the interpolant of one master element's basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterFitOptions {
    pub layout: PointLayout,
    pub family: KernelFamily,
    pub epsilon: EpsilonPolicy,
    /// Fit the auxiliary support probes alongside the basis.
    pub with_probes: bool,
    pub condition_limit: Option<f64>,
}

impl MasterFitOptions {
    pub fn new(layout: PointLayout, family: KernelFamily) -> Self {
        Self {
            layout,
            family,
            epsilon: EpsilonPolicy::Circumdiameter,
            with_probes: true,
            condition_limit: Some(default_condition_limit()),
        }
    }
}

/// Fits the rescaled interpolant of every nodal basis function of master element `elem`.
///
/// Points of `layout` are mapped to physical space; `eps` is the element
/// circumdiameter; `W` solves `Phi_MM W = N` with `N[i, j] = N_j(xi_i)`.
pub fn fit_master_interpolant(mesh: &Mesh, elem: usize, layout: PointLayout, family: KernelFamily) -> Result<RbfInterpolant> {
    fit_master_with(mesh, elem, &MasterFitOptions::new(layout, family))
}

pub fn fit_master_with(mesh: &Mesh, elem: usize, opts: &MasterFitOptions) -> Result<RbfInterpolant> {
    if elem >= mesh.n_elements() {
        return Err(Error::InvalidArgument(format!("element {elem} out of range")));
    }
    let kind = mesh.kind;
    let geom = mesh.geometry(elem);
    let ref_pts = interpolation_points(kind, opts.layout)?;
    let points: Vec<Point> = ref_pts.iter().map(|&xi| geom.map(xi)).collect();
    let epsilon = match opts.epsilon {
        EpsilonPolicy::Circumdiameter => geom.circumdiameter(),
        EpsilonPolicy::FillDistance(c) => {
            let probes = crate::rbf::diagnostics::dense_reference_samples(kind, 60)
                .into_iter()
                .map(|xi| geom.map(xi))
                .collect::<Vec<_>>();
            c * crate::rbf::diagnostics::fill_distance(&points, &probes)
        }
        EpsilonPolicy::Fixed(e) => e,
    };
    let kernel = RbfKernel::new(opts.family, epsilon)?;
    let nn = kind.node_count();
    let mut buf = [0.0; MAX_NODES];
    let data = DMatrix::from_fn(ref_pts.len(), nn, |i, j| {
        eval_shape(kind, ref_pts[i], &mut buf);
        buf[j]
    });
    let probes = opts.with_probes.then(|| {
        let np = probe_count(kind);
        DMatrix::from_fn(ref_pts.len(), np, |i, j| {
            support_probes(kind, ref_pts[i], &mut buf);
            buf[j]
        })
    });
    RbfInterpolant::fit_impl(kernel, points, data, probes, opts.condition_limit).map_err(|e| match e {
        Error::IllConditionedKernelMatrix { condition, .. } => Error::IllConditionedKernelMatrix {
            master_elem: Some(elem),
            condition,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{interval_mesh, square_surface, Warp};
    use crate::mesh::{ElementKind, Side};

    #[test]
    fn single_point_fit_is_identity() {
        let k = RbfKernel::new(KernelFamily::Gaussian, 1.0).unwrap();
        let data = DMatrix::from_row_slice(1, 1, &[0.7]);
        let f = RbfInterpolant::fit(k, vec![[0.2, 0.1, 0.0]], data).unwrap();
        assert_eq!(f.weights[(0, 0)], 0.7);
        assert_eq!(f.rescale_weights[0], 1.0);
        assert_eq!(f.condition_estimate, 1.0);
    }

    #[test]
    fn interpolation_condition_seg3() {
        let mesh = interval_mesh(0.0, 0.3, 1, ElementKind::Seg3, Side::Master).unwrap();
        let layout = PointLayout::uniform(6).unwrap();
        let f = fit_master_interpolant(&mesh, 0, layout, KernelFamily::Gaussian).unwrap();
        assert!(f.condition_estimate < 1e10);
        let vals = f.evaluate_rescaled(&f.points).unwrap();
        let ref_pts = interpolation_points(ElementKind::Seg3, layout).unwrap();
        for (i, xi) in ref_pts.iter().enumerate() {
            let n = crate::mesh::shape_values(ElementKind::Seg3, &[xi[0]]).unwrap();
            for j in 0..3 {
                assert!((vals[(i, j)] - n[j]).abs() <= 1e-10, "{i},{j}");
            }
        }
    }

    #[test]
    fn constants_reproduced_at_any_query() {
        for family in KernelFamily::ALL {
            let mesh = square_surface(1, ElementKind::Quad8, Side::Master, Warp::Flat).unwrap();
            let k = RbfKernel::new(family, mesh.geometry(0).circumdiameter()).unwrap();
            let layout = PointLayout::uniform(5).unwrap();
            let pts: Vec<Point> = interpolation_points(ElementKind::Quad8, layout)
                .unwrap()
                .iter()
                .map(|&xi| mesh.geometry(0).map(xi))
                .collect();
            let ones = DMatrix::from_element(pts.len(), 1, 1.0);
            let f = RbfInterpolant::fit(k, pts, ones).unwrap();
            let q = [[0.3, -0.7, 0.0], [0.99, 0.99, 0.05], [-0.1, 0.2, -0.3]];
            let v = f.evaluate_rescaled(&q).unwrap();
            for i in 0..3 {
                assert!((v[(i, 0)] - 1.0).abs() <= 1e-12, "{family}: {}", v[(i, 0)]);
            }
        }
    }

    #[test]
    fn wendland_far_query_breaks_down() {
        let mesh = interval_mesh(0.0, 1.0, 1, ElementKind::Seg2, Side::Master).unwrap();
        let f = fit_master_interpolant(&mesh, 0, PointLayout::uniform(4).unwrap(), KernelFamily::WendlandC2).unwrap();
        let err = f.evaluate_rescaled(&[[5.0, 0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::RescaleBreakdown { query: 0, .. }));
    }

    #[test]
    fn ill_conditioned_reports_element() {
        let mesh = interval_mesh(0.0, 1.0, 2, ElementKind::Seg2, Side::Master).unwrap();
        let mut opts = MasterFitOptions::new(PointLayout::uniform(10).unwrap(), KernelFamily::Gaussian);
        opts.epsilon = EpsilonPolicy::Fixed(5.0);
        let err = fit_master_with(&mesh, 1, &opts).unwrap_err();
        assert!(
            matches!(err, Error::IllConditionedKernelMatrix { master_elem: Some(1), condition } if condition > 1e13),
            "{err}"
        );
    }

    #[test]
    fn permutation_invariance() {
        let mesh = square_surface(1, ElementKind::Quad4, Side::Master, Warp::SineBump { amplitude: 0.2 }).unwrap();
        let geom = mesh.geometry(0);
        let layout = PointLayout::uniform(4).unwrap();
        let ref_pts = interpolation_points(ElementKind::Quad4, layout).unwrap();
        let k = RbfKernel::new(KernelFamily::Gaussian, geom.circumdiameter()).unwrap();
        let data_of = |pts: &[[f64; 2]]| {
            DMatrix::from_fn(pts.len(), 4, |i, j| {
                crate::mesh::shape_values(ElementKind::Quad4, &pts[i]).unwrap()[j]
            })
        };
        let phys = |pts: &[[f64; 2]]| pts.iter().map(|&xi| geom.map(xi)).collect::<Vec<_>>();
        let a = RbfInterpolant::fit(k, phys(&ref_pts), data_of(&ref_pts)).unwrap();
        let mut shuffled = ref_pts.clone();
        shuffled.reverse();
        shuffled.swap(0, 7);
        let b = RbfInterpolant::fit(k, phys(&shuffled), data_of(&shuffled)).unwrap();
        let q = [[0.1, 0.2, 0.0], [-0.5, 0.9, 0.1], [0.77, -0.3, 0.0]];
        let va = a.evaluate_rescaled(&q).unwrap();
        let vb = b.evaluate_rescaled(&q).unwrap();
        assert!((va - vb).abs().max() <= 1e-12);
    }
    #[test]
    fn gaussian_normal_translation_invariance() {
        let mesh = square_surface(1, ElementKind::Quad8, Side::Master, Warp::Flat).unwrap();
        let layout = PointLayout::uniform(5).unwrap();
        let f = fit_master_interpolant(&mesh, 0, layout, KernelFamily::Gaussian).unwrap();
        let eps = f.kernel.epsilon;
        let base = [[0.31, -0.52, 0.0], [-0.9, 0.05, 0.0], [0.0, 0.0, 0.0]];
        let v0 = f.evaluate_rescaled(&base).unwrap();
        for s in [0.01, 0.1, 1.0, 10.0] {
            let shifted: Vec<Point> = base.iter().map(|p| [p[0], p[1], s * eps]).collect();
            let v = f.evaluate_rescaled(&shifted).unwrap();
            let scale = v0.abs().max();
            assert!((&v - &v0).abs().max() <= 1e-12 * scale, "s={s}: {}", (&v - &v0).abs().max());
        }
    }

    #[test]
    fn rescaled_rows_sum_to_one() {
        let mesh = square_surface(2, ElementKind::Quad4, Side::Master, Warp::SineBump { amplitude: 0.3 }).unwrap();
        for family in KernelFamily::ALL {
            for n in [3, 5] {
                let f = fit_master_interpolant(&mesh, 1, PointLayout::uniform(n).unwrap(), family).unwrap();
                let q: Vec<Point> = crate::rbf::diagnostics::halton_reference_points(ElementKind::Quad4, 40)
                    .into_iter()
                    .map(|xi| mesh.geometry(1).map(xi))
                    .collect();
                let v = f.evaluate_rescaled(&q).unwrap();
                for i in 0..q.len() {
                    let s: f64 = v.row(i).iter().sum();
                    assert!((s - 1.0).abs() <= 1e-12, "{family} n={n}: {s}");
                }
            }
        }
    }

    #[test]
    fn gaussian_condition_grows_with_points() {
        let mesh = interval_mesh(0.0, 0.25, 1, ElementKind::Seg3, Side::Master).unwrap();
        let mut prev = 0.0;
        for n in 3..=8 {
            let mut opts = MasterFitOptions::new(PointLayout::uniform(n).unwrap(), KernelFamily::Gaussian);
            opts.condition_limit = None;
            let c = fit_master_with(&mesh, 0, &opts).unwrap().condition_estimate;
            assert!(c > prev, "n_M={n}: {c} <= {prev}");
            prev = c;
        }
    }
}
