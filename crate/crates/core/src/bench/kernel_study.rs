use nalgebra::DMatrix;

use crate::bench::{ExperimentConfig, ExperimentOutput, SweepRow};
use crate::error::{Error, Result};
use crate::mesh::element::shape_values;
use crate::mesh::{ElementKind, Mesh, Point};
use crate::rbf::diagnostics::{fill_distance, halton_reference_points, rescaled_rmse};
use crate::rbf::{fit_master_with, EpsilonPolicy, KernelFamily, LayoutVariant, MasterFitOptions, PointLayout, RbfInterpolant};

/// Halton probes used for the RMSE.
pub const STUDY_PROBES: usize = 40;

/// Multiples `c` of the fill distance tried as `eps = c h_Xi`.
pub const FILL_MULTIPLES: [f64; 3] = [2.0, 4.0, 8.0];

/// One element occupying its own reference domain.
pub fn reference_element(kind: ElementKind) -> Result<Mesh> {
    let nodes: Vec<Point> = kind.node_ref_coords().iter().map(|x| [x[0], x[1], 0.0]).collect();
    let dim = if kind.is_quad() { 3 } else { 2 };
    Mesh::new(dim, nodes, kind, (0..kind.node_count()).collect())
}

/// Result of fitting the basis of a reference element once.
#[derive(Debug, Clone)]
pub struct StudyPoint {
    pub interp: RbfInterpolant,
    pub rmse: Option<f64>,
    pub fill_distance: f64,
    /// Largest `|sum_j Pi N_j - 1|` over the probes.
    pub constant_defect: Option<f64>,
}

/// Fits the rescaled interpolant of the basis of `kind` and measures it on Halton probes.
pub fn study_point(kind: ElementKind, family: KernelFamily, layout: PointLayout, epsilon: EpsilonPolicy) -> Result<StudyPoint> {
    let mesh = reference_element(kind)?;
    let opts = MasterFitOptions {
        layout,
        family,
        epsilon,
        with_probes: false,
        condition_limit: None,
    };
    let interp = fit_master_with(&mesh, 0, &opts)?;
    let dim = kind.ref_dim();
    let refs = halton_reference_points(kind, STUDY_PROBES);
    let probes: Vec<Point> = refs.iter().map(|x| [x[0], x[1], 0.0]).collect();
    let mut exact = DMatrix::zeros(refs.len(), kind.node_count());
    for (i, x) in refs.iter().enumerate() {
        for (j, v) in shape_values(kind, &x[..dim])?.into_iter().enumerate() {
            exact[(i, j)] = v;
        }
    }
    let (rmse, constant_defect) = match interp.evaluate_rescaled(&probes) {
        Ok(vals) => {
            let defect = vals.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
            (Some(rescaled_rmse(&interp, &probes, &exact)?), Some(defect))
        }
        Err(Error::RescaleBreakdown { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    let dense: Vec<Point> = crate::rbf::diagnostics::dense_reference_samples(kind, 41)
        .into_iter()
        .map(|x| [x[0], x[1], 0.0])
        .collect();
    Ok(StudyPoint {
        fill_distance: fill_distance(&interp.points, &dense),
        interp,
        rmse,
        constant_defect,
    })
}

fn epsilon_label(e: EpsilonPolicy) -> String {
    match e {
        EpsilonPolicy::Circumdiameter => "eps=hM".into(),
        EpsilonPolicy::FillDistance(c) => format!("eps={c}hXi"),
        EpsilonPolicy::Fixed(v) => format!("eps={v}"),
    }
}

/// Reference-element interpolation of the Seg3 and Quad8 bases over kernels,
/// layouts, `n_M = 3..=10` and shape-parameter policies.
pub fn run_kernel_study(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let families: Vec<KernelFamily> = match config.kernel {
        Some(k) => vec![k],
        None => KernelFamily::ALL.to_vec(),
    };
    let mut policies = vec![EpsilonPolicy::Circumdiameter];
    policies.extend(FILL_MULTIPLES.iter().map(|&c| EpsilonPolicy::FillDistance(c)));
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut breakdowns = 0;
    let mut worst_constant: f64 = 0.0;
    for kind in [ElementKind::Seg3, ElementKind::Quad8] {
        let h_m = reference_element(kind)?.max_circumdiameter();
        for &family in &families {
            for variant in [LayoutVariant::UniformGrid, LayoutVariant::SineModified] {
                for &eps in &policies {
                    let case = format!("{}-{}-{}", kind.tag().to_ascii_lowercase(), variant, epsilon_label(eps));
                    for n_m in 3..=10 {
                        let sp = study_point(kind, family, PointLayout::new(variant, n_m)?, eps)?;
                        let mut row = SweepRow::new(case.clone(), n_m - 3, h_m, sp.fill_distance);
                        row.kernel = Some(family);
                        row.n_m = Some(n_m);
                        row.rmse = sp.rmse;
                        row.cond_estimate = Some(sp.interp.condition_estimate);
                        if sp.rmse.is_none() {
                            breakdowns += 1;
                        }
                        if let Some(d) = sp.constant_defect {
                            worst_constant = worst_constant.max(d);
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    notes.push(format!("largest constant-reproduction defect over all fits: {worst_constant:.3e}"));
    if breakdowns > 0 {
        notes.push(format!("{breakdowns} fits hit a rescale breakdown at some probe; rmse left empty"));
    }
    for kind in ["seg3", "quad8"] {
        let series = |fam: KernelFamily, layout: &str| -> Vec<(usize, Option<f64>, f64)> {
            rows.iter()
                .filter(|r| r.kernel == Some(fam) && r.case == format!("{kind}-{layout}-eps=hM"))
                .map(|r| (r.n_m.unwrap_or(0), r.rmse, r.cond_estimate.unwrap_or(f64::NAN)))
                .collect()
        };
        let uni = series(KernelFamily::WendlandC2, "uniform");
        let modi = series(KernelFamily::WendlandC2, "sine");
        let better = uni
            .iter()
            .zip(&modi)
            .filter(|(u, _)| u.0 >= 6)
            .all(|(u, m)| matches!((u.1, m.1), (Some(a), Some(b)) if b <= a));
        if !uni.is_empty() {
            notes.push(format!("{kind}: Wendland sine layout RMSE <= uniform for n_M >= 6: {better}"));
        }
        let ga = series(KernelFamily::Gaussian, "uniform");
        if !ga.is_empty() {
            let resolved: Vec<_> = ga.iter().take_while(|p| p.2 < 1.0 / f64::EPSILON).collect();
            let increasing = resolved.windows(2).all(|w| w[1].2 > w[0].2);
            let top = resolved.last().map(|p| p.0).unwrap_or(0);
            notes.push(format!(
                "{kind}: GA condition estimate increasing in n_M at eps = h_M up to n_M = {top} (beyond, the estimate exceeds 1/ulp): {increasing}"
            ));
        }
    }
    Ok(ExperimentOutput { rows, notes, field: None })
}
