//! Benchmark experiments: interpolation sweeps, kernel studies, Poisson
//! convergence and quadrature cost comparisons. Each produces sweep rows, a text
//! report and optionally a point-wise error field.

pub mod config;
mod interp;
mod kernel_study;
mod poisson;
mod scheme_compare;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{Experiment, ExperimentConfig, FunctionId};
pub use interp::{run_interp_1d, run_interp_surface};
pub use kernel_study::{reference_element, run_kernel_study, study_point, StudyPoint};
pub use poisson::run_poisson_2d;
pub use scheme_compare::{jittered_interval, matrix_deviation, run_scheme_compare};

use crate::error::Result;
use crate::mesh::element::shape_values;
use crate::mesh::quadrature::gauss_rule;
use crate::mesh::{Mesh, Point};
use crate::mortar::{assemble, InterfacePair, MortarConfig, MortarMatrices, Scheme};
use crate::rbf::{fit_master_with, KernelFamily, MasterFitOptions};
use crate::solver::observed_order;

/// One result line of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: usize,
    pub h_master: f64,
    pub h_slave: f64,
    pub scheme: Option<Scheme>,
    pub kernel: Option<KernelFamily>,
    pub n_m: Option<usize>,
    pub n_gauss: Option<usize>,
    pub l2_error: Option<f64>,
    pub h1_error: Option<f64>,
    pub rmse: Option<f64>,
    pub cond_estimate: Option<f64>,
    pub assembly_seconds: f64,
    pub dropped_fraction: f64,
    /// Sub-case label, e.g. element kind or role assignment.
    pub case: String,
}

impl SweepRow {
    pub const HEADER: &'static str =
        "level,h_master,h_slave,scheme,kernel,n_M,n_gauss,l2_error,h1_error,rmse,cond_estimate,assembly_seconds,dropped_fraction,case";

    pub fn new(case: impl Into<String>, level: usize, h_master: f64, h_slave: f64) -> Self {
        Self {
            level,
            h_master,
            h_slave,
            scheme: None,
            kernel: None,
            n_m: None,
            n_gauss: None,
            l2_error: None,
            h1_error: None,
            rmse: None,
            cond_estimate: None,
            assembly_seconds: 0.0,
            dropped_fraction: 0.0,
            case: case.into(),
        }
    }

    /// Fills scheme, kernel, `n_M` and `n_gauss` from a mortar configuration.
    pub fn with_config(mut self, cfg: &MortarConfig) -> Self {
        self.scheme = Some(cfg.scheme);
        self.n_gauss = Some(cfg.n_gauss);
        if cfg.scheme == Scheme::Rb {
            self.kernel = Some(cfg.rbf.family);
            self.n_m = Some(cfg.rbf.layout.n_m);
        }
        self
    }

    pub fn csv_line(&self) -> String {
        fn o<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.level,
            self.h_master,
            self.h_slave,
            o(self.scheme),
            o(self.kernel),
            o(self.n_m),
            o(self.n_gauss),
            o(self.l2_error),
            o(self.h1_error),
            o(self.rmse),
            o(self.cond_estimate),
            self.assembly_seconds,
            self.dropped_fraction,
            self.case
        )
    }

    /// Everything except the timing column, for reproducibility checks.
    pub fn payload(&self) -> String {
        let mut r = self.clone();
        r.assembly_seconds = 0.0;
        r.csv_line()
    }

    /// Grouping key for order fits: all identifying columns but the level.
    fn series_key(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.case,
            self.scheme.map(|s| s.tag()).unwrap_or("-"),
            self.kernel.map(|k| k.tag()).unwrap_or("-"),
            self.n_m.map(|v| format!("nM={v}")).unwrap_or_else(|| "-".into()),
            self.n_gauss.map(|v| format!("gp={v}")).unwrap_or_else(|| "-".into()),
        )
    }
}

/// Point-wise absolute errors, `x,y[,z],abs_error`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    pub dim: usize,
    pub points: Vec<(Point, f64)>,
}

impl ErrorField {
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.dim == 3 {
            writeln!(out, "x,y,z,abs_error")?;
        } else {
            writeln!(out, "x,y,abs_error")?;
        }
        for (p, e) in &self.points {
            if self.dim == 3 {
                writeln!(out, "{},{},{},{}", p[0], p[1], p[2], e)?;
            } else {
                writeln!(out, "{},{},{}", p[0], p[1], e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<SweepRow>,
    /// Free-form findings appended to the report.
    pub notes: Vec<String>,
    pub field: Option<ErrorField>,
}

impl ExperimentOutput {
    pub fn sweep_csv(&self) -> String {
        let mut s = String::from(SweepRow::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    /// Observed `(L2, H1)` orders per series, least squares over the finest three levels.
    pub fn observed_orders(&self) -> BTreeMap<String, (Option<f64>, Option<f64>)> {
        let mut series: BTreeMap<String, Vec<&SweepRow>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.l2_error.is_some()) {
            series.entry(r.series_key()).or_default().push(r);
        }
        series
            .into_iter()
            .filter(|(_, rows)| rows.len() >= 2)
            .map(|(k, mut rows)| {
                rows.sort_by_key(|r| r.level);
                let h: Vec<f64> = rows.iter().map(|r| r.h_slave).collect();
                let l2: Vec<f64> = rows.iter().map(|r| r.l2_error.unwrap_or(0.0)).collect();
                let h1: Vec<f64> = rows.iter().filter_map(|r| r.h1_error).collect();
                let h1_order = if h1.len() == h.len() { observed_order(&h, &h1) } else { None };
                (k, (observed_order(&h, &l2), h1_order))
            })
            .collect()
    }

    pub fn report(&self, config: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mortar-rbf {}", config.experiment);
        let _ = writeln!(s, "\nconfiguration:");
        for line in config.serialize().lines() {
            let _ = writeln!(s, "  {line}");
        }
        let orders = self.observed_orders();
        if !orders.is_empty() {
            let _ = writeln!(
                s,
                "\nobserved orders (least squares over the finest three levels, against h_slave):"
            );
            let _ = writeln!(s, "  {:<44} {:>9} {:>9}", "series", "L2", "H1");
            for (k, (l2, h1)) in &orders {
                let f = |v: &Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(s, "  {:<44} {:>9} {:>9}", k, f(l2), f(h1));
            }
        }
        let _ = writeln!(s, "\nrows: {}", self.rows.len());
        let worst_drop = self.rows.iter().map(|r| r.dropped_fraction).fold(0.0, f64::max);
        let _ = writeln!(s, "largest dropped Gauss-point fraction: {worst_drop:.4}");
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\nnotes:");
            for n in &self.notes {
                let _ = writeln!(s, "  {n}");
            }
        }
        s
    }

    /// Writes `sweep.csv`, `report.txt` and, when present, `field.csv` into `dir`.
    pub fn write_to(&self, dir: &Path, config: &ExperimentConfig) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), self.sweep_csv())?;
        fs::write(dir.join("report.txt"), self.report(config))?;
        if let Some(field) = &self.field {
            field.write(io::BufWriter::new(fs::File::create(dir.join("field.csv"))?))?;
        }
        Ok(())
    }
}

/// Validates `config` and runs its experiment.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    match config.experiment {
        Experiment::Interp1d => run_interp_1d(config),
        Experiment::InterpSurface => run_interp_surface(config),
        Experiment::KernelStudy => run_kernel_study(config),
        Experiment::Poisson2d => run_poisson_2d(config),
        Experiment::SchemeCompare => run_scheme_compare(config),
    }
}

/// Assembles and returns the wall time in seconds.
pub(crate) fn timed_assemble(pair: &InterfacePair, cfg: &MortarConfig) -> Result<(MortarMatrices, f64)> {
    let t = Instant::now();
    let m = assemble(pair, cfg)?;
    Ok((m, t.elapsed().as_secs_f64()))
}

/// Median of three assembly timings; the matrices come from the first run.
pub(crate) fn median_assemble(pair: &InterfacePair, cfg: &MortarConfig) -> Result<(MortarMatrices, f64)> {
    let (m, t0) = timed_assemble(pair, cfg)?;
    let (_, t1) = timed_assemble(pair, cfg)?;
    let (_, t2) = timed_assemble(pair, cfg)?;
    let mut t = [t0, t1, t2];
    t.sort_by(f64::total_cmp);
    Ok((m, t[1]))
}

/// `L^2` distance between the field with nodal values `u` on `mesh` and `f`.
pub fn interface_l2_error(mesh: &Mesh, u: &[f64], f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<f64> {
    let kind = mesh.kind;
    let rule = gauss_rule(kind, if kind.is_quad() { 64 } else { 10 })?;
    let dim = kind.ref_dim();
    let parts: Vec<Result<f64>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let geom = mesh.geometry(e);
            let nodes = mesh.element_nodes(e);
            let mut acc = 0.0;
            for (xi, w) in rule.iter() {
                let n = shape_values(kind, &xi[..dim])?;
                let uh: f64 = n.iter().zip(nodes).map(|(v, &i)| v * u[i]).sum();
                let d = uh - f(geom.map(xi));
                acc += w * geom.metric(xi) * d * d;
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total.sqrt())
}

/// Largest kernel-matrix condition estimate over the master elements, fitted
/// without a ceiling.
pub(crate) fn max_condition_estimate(master: &Mesh, cfg: &MortarConfig) -> Result<f64> {
    let opts = MasterFitOptions {
        layout: cfg.rbf.layout,
        family: cfg.rbf.family,
        epsilon: cfg.rbf.epsilon,
        with_probes: false,
        condition_limit: None,
    };
    let conds: Vec<Result<f64>> = (0..master.n_elements())
        .into_par_iter()
        .map(|e| fit_master_with(master, e, &opts).map(|i| i.condition_estimate))
        .collect();
    let mut worst = 0.0f64;
    for c in conds {
        worst = worst.max(c?);
    }
    Ok(worst)
}

/// Largest element circumdiameter.
pub(crate) fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.max_circumdiameter()
}
