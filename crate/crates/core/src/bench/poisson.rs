use crate::bench::interp::{is_rb, is_scheme, max_ratio, scheme_configs};
use crate::bench::{max_condition_estimate, timed_assemble, ErrorField, ExperimentConfig, ExperimentOutput, FunctionId, SweepRow};
use crate::error::{Error, Result};
use crate::mortar::{MortarConfig, Scheme};
use crate::rbf::KernelFamily;
use crate::solver::coupled::{solve_condensed, solve_saddle};
use crate::solver::{assemble_saddle, broken_norms, PoissonProblem, SolutionFields};

/// Saddle-point cross-checks are skipped above this many unknowns (dense LU).
const SADDLE_CHECK_LIMIT: usize = 4000;

struct Solved {
    row: SweepRow,
    fields: SolutionFields,
    saddle_gap: Option<f64>,
}

fn solve_case(problem: &PoissonProblem, cfg: &MortarConfig, case: &str, level: usize, h: (f64, f64)) -> Result<Solved> {
    let (mats, secs) = timed_assemble(&problem.interface, cfg)?;
    let dropped = mats.stats.dropped_fraction();
    let system = assemble_saddle(problem, mats)?;
    let fields = solve_condensed(&system)?;
    let n = problem.master.n_nodes() + problem.slave.n_nodes();
    let saddle_gap = if n <= SADDLE_CHECK_LIMIT {
        let s = solve_saddle(&system)?;
        Some(
            fields
                .u1
                .iter()
                .zip(&s.u1)
                .chain(fields.u2.iter().zip(&s.u2))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    let err = broken_norms(&fields, problem)?;
    let mut row = SweepRow::new(case, level, h.0, h.1).with_config(cfg);
    row.l2_error = Some(err.l2_broken);
    row.h1_error = Some(err.h1_broken);
    row.assembly_seconds = secs;
    row.dropped_fraction = dropped;
    if cfg.scheme == Scheme::Rb {
        row.cond_estimate = Some(max_condition_estimate(&problem.interface.master, cfg)?);
    }
    Ok(Solved { row, fields, saddle_gap })
}

/// Flat-interface convergence sweep of the bubble problem plus one curved-interface run
/// whose point-wise errors become the error field.
pub fn run_poisson_2d(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    if config.function != FunctionId::Auto {
        return Err(Error::Config("poisson2d always uses the manufactured bubble solution".into()));
    }
    let n_gauss = config.n_gauss.unwrap_or(2);
    let max_condition = config.max_condition.or(crate::mortar::RbfSettings::default().max_condition);
    let schemes = scheme_configs(config, n_gauss, &[KernelFamily::Gaussian], &[config.n_m], true, max_condition)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let mut worst_gap: Option<f64> = None;
    for level in 0..config.levels() {
        let (nm, ns) = config.ratio.element_counts(2 << level);
        let problem = PoissonProblem::bubble_split(nm, ns, 0.0)?;
        for cfg in &schemes {
            let s = solve_case(&problem, cfg, "flat", level, (1.0 / nm as f64, 1.0 / ns as f64))?;
            worst_residual = worst_residual.max(s.fields.constraint_residual);
            if let Some(g) = s.saddle_gap {
                worst_gap = Some(worst_gap.map_or(g, |w: f64| w.max(g)));
            }
            rows.push(s.row);
        }
    }
    notes.push(format!("flat: largest mortar constraint residual {worst_residual:.3e}"));
    if let Some(g) = worst_gap {
        notes.push(format!("largest saddle / condensed nodal difference {g:.3e}"));
    }
    if let Some(r) = max_ratio(&rows, "flat", is_rb(KernelFamily::Gaussian), is_scheme(Scheme::Eb)) {
        notes.push(format!("flat: largest level-wise L2 ratio RB-GA / EB = {r:.4}"));
    }

    let level = config.levels().min(3) - 1;
    let (nm, ns) = config.ratio.element_counts(2 << level);
    let problem = PoissonProblem::bubble_split(nm, ns, config.warp)?;
    let exact = problem
        .exact
        .clone()
        .ok_or_else(|| Error::InvalidArgument("bubble problem lacks its exact solution".into()))?;
    let mut field = None;
    for cfg in schemes.iter().filter(|c| c.scheme != Scheme::Sb1d) {
        let s = solve_case(&problem, cfg, "curved", level, (1.0 / nm as f64, 1.0 / ns as f64))?;
        notes.push(format!(
            "curved ({}): constraint residual {:.3e}, L2 {:.4e}",
            s.row.scheme.map(|x| x.tag()).unwrap_or("-"),
            s.fields.constraint_residual,
            s.row.l2_error.unwrap_or(f64::NAN)
        ));
        if field.is_none() {
            let pts = problem
                .master
                .nodes
                .iter()
                .zip(&s.fields.u1)
                .chain(problem.slave.nodes.iter().zip(&s.fields.u2))
                .map(|(&p, &u)| (p, (u - (exact.u)(p[0], p[1])).abs()))
                .collect();
            field = Some(ErrorField { dim: 2, points: pts });
        }
        rows.push(s.row);
    }
    Ok(ExperimentOutput { rows, notes, field })
}
