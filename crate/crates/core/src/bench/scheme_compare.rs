use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bench::interp::scheme_configs;
use crate::bench::{max_condition_estimate, median_assemble, mesh_size, ExperimentConfig, ExperimentOutput, SweepRow};
use crate::error::Result;
use crate::mesh::generate::{interval_mesh, square_surface_pair, Warp};
use crate::mesh::{ElementKind, InterfaceMesh, Side};
use crate::mortar::operator::csr_to_dense;
use crate::mortar::{assemble, InterfacePair, MortarConfig, MortarMatrices, Scheme};
use crate::rbf::KernelFamily;

/// Gauss points per direction swept by the comparison.
pub const GAUSS_SWEEP: [usize; 4] = [2, 4, 8, 16];

/// Largest entry-wise deviation of `D` and `M` between two assemblies.
pub fn matrix_deviation(a: &MortarMatrices, b: &MortarMatrices) -> f64 {
    let d = (csr_to_dense(&a.d) - csr_to_dense(&b.d)).abs().max();
    let m = (csr_to_dense(&a.m) - csr_to_dense(&b.m)).abs().max();
    d.max(m)
}

/// Interval `[-1, 1]` with interior nodes moved by up to 30% of the spacing.
pub fn jittered_interval(n: usize, kind: ElementKind, side: Side, rng: &mut StdRng) -> Result<InterfaceMesh> {
    let base = interval_mesh(-1.0, 1.0, n, kind, side)?;
    let p = kind.degree();
    let h = 2.0 / n as f64;
    let mut mesh = base.mesh.clone();
    for e in 1..n {
        let shift = rng.random_range(-0.3..0.3) * h;
        mesh.nodes[e * p][0] += shift;
    }
    if p == 2 {
        for e in 0..n {
            mesh.nodes[e * p + 1][0] = 0.5 * (mesh.nodes[e * p][0] + mesh.nodes[e * p + 2][0]);
        }
    }
    InterfaceMesh::new(mesh, side)
}

fn compare_pair(
    config: &ExperimentConfig,
    pair: &InterfacePair,
    case: &str,
    total_points: impl Fn(usize) -> usize,
    reference: &MortarMatrices,
    max_condition: Option<f64>,
    rows: &mut Vec<SweepRow>,
) -> Result<()> {
    for (level, &g) in GAUSS_SWEEP.iter().enumerate() {
        let schemes: Vec<MortarConfig> = scheme_configs(
            config,
            total_points(g),
            &[KernelFamily::Gaussian],
            &[config.n_m],
            false,
            max_condition,
        )?;
        for cfg in &schemes {
            let (mats, secs) = median_assemble(pair, cfg)?;
            let mut row = SweepRow::new(case, level, mesh_size(&pair.master), mesh_size(&pair.slave)).with_config(cfg);
            row.l2_error = Some(matrix_deviation(&mats, reference));
            row.assembly_seconds = secs;
            row.dropped_fraction = mats.stats.dropped_fraction();
            if cfg.scheme == Scheme::Rb {
                row.cond_estimate = Some(max_condition_estimate(&pair.master, cfg)?);
            }
            rows.push(row);
        }
    }
    Ok(())
}

fn timing_growth(rows: &[SweepRow], case: &str, scheme: Scheme) -> Option<f64> {
    let t: Vec<f64> = rows
        .iter()
        .filter(|r| r.case == case && r.scheme == Some(scheme))
        .map(|r| r.assembly_seconds)
        .collect();
    (t.len() >= 2 && t[0] > 0.0).then(|| t[t.len() - 1] / t[0])
}

/// Accuracy and assembly cost against `n_gauss`: a jittered 1D pair measured
/// against SB, and a warped Quad4 pair measured against EB with 16x16 points.
/// `l2_error` holds the largest entry-wise deviation of `D` and `M` from the reference.
pub fn run_scheme_compare(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let (nm, ns) = config.ratio.element_counts(2);
    let pair = InterfacePair::new(
        jittered_interval(nm, ElementKind::Seg2, Side::Master, &mut rng)?,
        jittered_interval(ns, ElementKind::Seg2, Side::Slave, &mut rng)?,
    )?;
    let sb = assemble(&pair, &MortarConfig::new(Scheme::Sb1d, 2))?;
    let strict = config.max_condition.or(crate::mortar::RbfSettings::default().max_condition);
    compare_pair(config, &pair, "seg2-1d", |g| g, &sb, strict, &mut rows)?;

    let (m, s) = square_surface_pair(nm, ns, ElementKind::Quad4, Warp::SineBump { amplitude: config.warp })?;
    let surface = InterfacePair::new(m, s)?;
    let finest = GAUSS_SWEEP[GAUSS_SWEEP.len() - 1];
    let eb = assemble(&surface, &MortarConfig::new(Scheme::Eb, finest * finest))?;
    compare_pair(config, &surface, "quad4-warped", |g| g * g, &eb, config.max_condition, &mut rows)?;

    for case in ["seg2-1d", "quad4-warped"] {
        for scheme in [Scheme::Rb, Scheme::Eb] {
            if let Some(g) = timing_growth(&rows, case, scheme) {
                notes.push(format!(
                    "{case}: {scheme} assembly time grows x{g:.2} from {} to {finest} points per direction",
                    GAUSS_SWEEP[0]
                ));
            }
            let drops: Vec<String> = rows
                .iter()
                .filter(|r| r.case == case && r.scheme == Some(scheme))
                .map(|r| format!("{:.4}", r.dropped_fraction))
                .collect();
            if !drops.is_empty() {
                notes.push(format!("{case}: {scheme} dropped fractions {}", drops.join(" ")));
            }
        }
    }
    Ok(ExperimentOutput { rows, notes, field: None })
}
