use crate::bench::{
    interface_l2_error, max_condition_estimate, mesh_size, timed_assemble, ErrorField, ExperimentConfig, ExperimentOutput, FunctionId,
    SweepRow,
};
use crate::error::Result;
use crate::mesh::generate::{interval_pair, square_surface_pair, Warp};
use crate::mesh::{ElementKind, InterfaceMesh, Point};
use crate::mortar::{compute_e, InterfacePair, MortarConfig, Scheme};
use crate::rbf::KernelFamily;

/// Mortar configurations of a sweep: RB for each kernel and `n_M`, then EB and SB.
pub(crate) fn scheme_configs(
    config: &ExperimentConfig,
    n_gauss: usize,
    default_kernels: &[KernelFamily],
    n_ms: &[usize],
    with_sb: bool,
    max_condition: Option<f64>,
) -> Result<Vec<MortarConfig>> {
    let wants = |s: Scheme| config.scheme.is_none() || config.scheme == Some(s);
    let mut out = Vec::new();
    if wants(Scheme::Rb) {
        let kernels: Vec<KernelFamily> = match config.kernel {
            Some(k) => vec![k],
            None => default_kernels.to_vec(),
        };
        for k in kernels {
            for &n_m in n_ms {
                let mut c = MortarConfig::new(Scheme::Rb, n_gauss).with_kernel(k, n_m)?;
                c.rbf.max_condition = max_condition;
                out.push(c);
            }
        }
    }
    if wants(Scheme::Eb) {
        out.push(MortarConfig::new(Scheme::Eb, n_gauss));
    }
    if with_sb && wants(Scheme::Sb1d) {
        out.push(MortarConfig::new(Scheme::Sb1d, n_gauss));
    }
    Ok(out)
}

/// Transfers `f` sampled on the master nodes to the slave side and measures the
/// slave `L^2` error. Returns the row and the transferred slave values.
fn transfer_row(
    pair: &InterfacePair,
    cfg: &MortarConfig,
    f: &(dyn Fn(Point) -> f64 + Sync),
    case: &str,
    level: usize,
) -> Result<(SweepRow, Vec<f64>)> {
    let (mats, secs) = timed_assemble(pair, cfg)?;
    let op = compute_e(&mats)?;
    let um: Vec<f64> = pair.master.nodes.iter().map(|&p| f(p)).collect();
    let us = op.apply(&um)?;
    let mut row = SweepRow::new(case, level, mesh_size(&pair.master), mesh_size(&pair.slave)).with_config(cfg);
    row.l2_error = Some(interface_l2_error(&pair.slave, &us, f)?);
    row.assembly_seconds = secs;
    row.dropped_fraction = mats.stats.dropped_fraction();
    if cfg.scheme == Scheme::Rb {
        row.cond_estimate = Some(max_condition_estimate(&pair.master, cfg)?);
    }
    Ok((row, us))
}

/// Largest level-wise ratio `err(a) / err(b)` between two series of the same case.
pub(crate) fn max_ratio(rows: &[SweepRow], case: &str, a: impl Fn(&SweepRow) -> bool, b: impl Fn(&SweepRow) -> bool) -> Option<f64> {
    let pick = |sel: &dyn Fn(&SweepRow) -> bool| -> Vec<(usize, f64)> {
        rows.iter()
            .filter(|r| r.case == case && sel(r))
            .filter_map(|r| r.l2_error.map(|e| (r.level, e)))
            .collect()
    };
    let (ra, rb) = (pick(&a), pick(&b));
    ra.iter()
        .filter_map(|(l, ea)| rb.iter().find(|(m, _)| m == l).map(|(_, eb)| ea / eb))
        .reduce(f64::max)
}

pub(crate) fn is_rb(kernel: KernelFamily) -> impl Fn(&SweepRow) -> bool {
    move |r| r.scheme == Some(Scheme::Rb) && r.kernel == Some(kernel)
}

pub(crate) fn is_scheme(s: Scheme) -> impl Fn(&SweepRow) -> bool {
    move |r| r.scheme == Some(s)
}

/// 1D pairs on `[-1, 1]` with `h_master / h_slave` from the config; Seg2 and Seg3.
pub fn run_interp_1d(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let fid = config.function.or(FunctionId::Sin4xPlusX2);
    let f = move |p: Point| fid.eval(p[0], p[1]);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let kernels = [KernelFamily::Gaussian, KernelFamily::WendlandC2];
    let max_condition = config.max_condition.or(crate::mortar::RbfSettings::default().max_condition);
    for kind in [ElementKind::Seg2, ElementKind::Seg3] {
        let case = kind.tag().to_ascii_lowercase();
        let n_gauss = config.n_gauss.unwrap_or(crate::mortar::min_gauss_points(kind));
        let schemes = scheme_configs(config, n_gauss, &kernels, &[config.n_m], true, max_condition)?;
        for level in 0..config.levels() {
            let (nm, ns) = config.ratio.element_counts(2 << level);
            let (m, s) = interval_pair(-1.0, 1.0, nm, ns, kind)?;
            let pair = InterfacePair::new(m, s)?;
            for cfg in &schemes {
                rows.push(transfer_row(&pair, cfg, &f, &case, level)?.0);
            }
        }
        if let Some(r) = max_ratio(&rows, &case, is_rb(KernelFamily::Gaussian), is_scheme(Scheme::Eb)) {
            notes.push(format!("{case}: largest level-wise L2 ratio RB-GA / EB = {r:.4}"));
        }
        let finest = |sel: &dyn Fn(&SweepRow) -> bool| {
            rows.iter()
                .filter(|r| r.case == case && sel(r))
                .max_by_key(|r| r.level)
                .and_then(|r| r.l2_error)
        };
        if let (Some(w), Some(g)) = (finest(&is_rb(KernelFamily::WendlandC2)), finest(&is_rb(KernelFamily::Gaussian))) {
            notes.push(format!("{case}: finest-level L2 error Wendland {w:.3e} vs GA {g:.3e}"));
        }
    }
    Ok(ExperimentOutput { rows, notes, field: None })
}

fn surface_gauss(config: &ExperimentConfig, kind: ElementKind) -> usize {
    match config.n_gauss {
        Some(g) => g * g,
        None => crate::mortar::min_gauss_points(kind),
    }
}

/// Flat Quad4/Quad8 sweeps on `[-1, 1]^2` plus warped single-shot runs with both
/// role assignments. The kernel-matrix ceiling is lifted unless `max_condition` is set.
pub fn run_interp_surface(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut field = None;
    let kernels = [KernelFamily::Gaussian];
    let mut n_ms = vec![4, config.n_m];
    n_ms.sort_unstable();
    n_ms.dedup();
    if config.max_condition.is_none() {
        notes.push("kernel-matrix condition ceiling lifted; estimates are reported in cond_estimate".into());
    }
    let flat_f = config.function.or(FunctionId::Sin4xCos4y);
    let warped_f = config.function.or(FunctionId::SinXPlusCosY);
    for kind in [ElementKind::Quad4, ElementKind::Quad8] {
        let tag = kind.tag().to_ascii_lowercase();
        let n_gauss = surface_gauss(config, kind);
        let schemes = scheme_configs(config, n_gauss, &kernels, &n_ms, false, config.max_condition)?;
        let case = format!("{tag}-flat");
        let f = move |p: Point| flat_f.eval(p[0], p[1]);
        for level in 0..config.levels() {
            let (nm, ns) = config.ratio.element_counts(1 << level);
            let (m, s) = square_surface_pair(nm, ns, kind, Warp::Flat)?;
            let pair = InterfacePair::new(m, s)?;
            for cfg in &schemes {
                rows.push(transfer_row(&pair, cfg, &f, &case, level)?.0);
            }
        }
        let warp = Warp::SineBump { amplitude: config.warp };
        let f = move |p: Point| warped_f.eval(p[0], p[1]);
        let (n_fine, n_coarse) = config.ratio.element_counts(4);
        for (role, nm, ns) in [("fine-master", n_fine, n_coarse), ("coarse-master", n_coarse, n_fine)] {
            let case = format!("{tag}-warped-{role}");
            let (m, s) = square_surface_pair(nm, ns, kind, warp)?;
            let pair = InterfacePair::new(m, s)?;
            for cfg in schemes.iter().filter(|c| c.scheme != Scheme::Rb || c.rbf.layout.n_m == config.n_m) {
                let (row, us) = transfer_row(&pair, cfg, &f, &case, 0)?;
                if field.is_none() && cfg.scheme == Scheme::Rb {
                    field = Some(slave_field(&pair.slave, &us, &f));
                }
                rows.push(row);
            }
            if let Some(r) = max_ratio(&rows, &case, is_rb(KernelFamily::Gaussian), is_scheme(Scheme::Eb)) {
                notes.push(format!("{case}: L2 ratio RB-GA / EB = {r:.4}"));
            }
        }
    }
    Ok(ExperimentOutput { rows, notes, field })
}

fn slave_field(slave: &InterfaceMesh, us: &[f64], f: &(dyn Fn(Point) -> f64 + Sync)) -> ErrorField {
    ErrorField {
        dim: 3,
        points: slave.nodes.iter().zip(us).map(|(&p, &u)| (p, (u - f(p)).abs())).collect(),
    }
}
