use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::element::{eval_shape, support_probes};
use crate::mesh::quadrature::gauss_legendre;
use crate::mesh::{dot, gauss_rule, norm, sub, ElementGeometry, Mesh, Point, MAX_NODES};
use crate::mortar::projection::project_on;
use crate::mortar::search::{contact_search, ContactCandidates};
use crate::mortar::{InterfacePair, MortarConfig, Scheme};
use crate::rbf::{fit_master_with, MasterFitOptions, RbfInterpolant};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    /// `(slave, master)` candidate pairs examined.
    pub pairs_visited: usize,
    pub gauss_points_total: usize,
    /// Points outside every candidate master support.
    pub gauss_points_dropped: usize,
    /// Slave elements without contact-search candidates.
    pub slaves_without_candidates: Vec<usize>,
    /// Slave elements whose every Gauss point was dropped.
    pub uncovered_slaves: Vec<usize>,
}

impl AssemblyStats {
    pub fn dropped_fraction(&self) -> f64 {
        if self.gauss_points_total == 0 {
            0.0
        } else {
            self.gauss_points_dropped as f64 / self.gauss_points_total as f64
        }
    }
}

/// `D` (slave x slave) and `M` (slave x master), both integrated over the same points.
#[derive(Debug, Clone)]
pub struct MortarMatrices {
    pub d: CsrMatrix<f64>,
    pub m: CsrMatrix<f64>,
    pub stats: AssemblyStats,
    pub scheme: Scheme,
}

impl MortarMatrices {
    pub fn n_slave(&self) -> usize {
        self.d.nrows()
    }

    pub fn n_master(&self) -> usize {
        self.m.ncols()
    }
}

/// Every probe value lies in `[-tol, 1 + tol]`.
pub fn support_detect(values: &[f64], tol: f64) -> bool {
    values.iter().all(|&v| v >= -tol && v <= 1.0 + tol)
}

/// Assembles with the scheme selected in `config`.
pub fn assemble(pair: &InterfacePair, config: &MortarConfig) -> Result<MortarMatrices> {
    match config.scheme {
        Scheme::Rb => assemble_rb(pair, config),
        Scheme::Eb => assemble_eb(pair, config),
        Scheme::Sb1d => assemble_sb_1d(pair, config),
    }
}

/// Evaluates master basis functions at a slave Gauss point.
trait MasterEval: Sync {
    /// Writes master shape values into `out` and returns the support depth, or `None`
    /// when `x` is outside the support of master element `elem`.
    fn eval(&self, elem: usize, x: Point, scratch: &mut Vec<f64>, out: &mut [f64]) -> Option<f64>;
}

struct RbEval<'a> {
    fits: &'a [RbfInterpolant],
    tol: f64,
}

impl MasterEval for RbEval<'_> {
    fn eval(&self, elem: usize, x: Point, scratch: &mut Vec<f64>, out: &mut [f64]) -> Option<f64> {
        let f = &self.fits[elem];
        scratch.resize(f.n_points(), 0.0);
        let mut probes = [0.0; 4];
        let probes = &mut probes[..f.n_probes()];
        f.eval_point(x, scratch, out, probes)?;
        support_detect(probes, self.tol).then(|| probes.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

struct EbEval<'a> {
    master: &'a Mesh,
    config: &'a MortarConfig,
}

impl MasterEval for EbEval<'_> {
    fn eval(&self, elem: usize, x: Point, _: &mut Vec<f64>, out: &mut [f64]) -> Option<f64> {
        let geom = self.master.geometry(elem);
        let p = project_on(&geom, x, &self.config.newton);
        let kind = self.master.kind;
        if !p.converged || !kind.contains(p.xi, self.config.support_tol) {
            return None;
        }
        eval_shape(kind, p.xi, out);
        let mut probes = [0.0; 4];
        support_probes(kind, p.xi, &mut probes);
        Some(
            probes[..crate::mesh::element::probe_count(kind)]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        )
    }
}

/// Contributions of one slave element.
#[derive(Default)]
struct Local {
    d: Vec<(usize, usize, f64)>,
    m: Vec<(usize, usize, f64)>,
    dropped: usize,
    total: usize,
}

/// Accumulates the weighted products `phi_a phi_b` into D and `phi_a N_k` into M.
fn accumulate(local: &mut Local, slave_nodes: &[usize], master_nodes: &[usize], phi: &[f64], n: &[f64], jw: f64) {
    for (a, &ia) in slave_nodes.iter().enumerate() {
        let wa = jw * phi[a];
        for (b, &ib) in slave_nodes.iter().enumerate() {
            local.d.push((ia, ib, wa * phi[b]));
        }
        for (k, &ik) in master_nodes.iter().enumerate() {
            local.m.push((ia, ik, wa * n[k]));
        }
    }
}

/// Slave-side integration shared by RB and EB.
fn slave_loop(pair: &InterfacePair, config: &MortarConfig, cands: &ContactCandidates, eval: &dyn MasterEval) -> Result<MortarMatrices> {
    let slave = &pair.slave;
    let master = &pair.master;
    let rule = gauss_rule(slave.kind, config.n_gauss)?;
    let ns = slave.kind.node_count();
    let nm = master.kind.node_count();
    let phi_at: Vec<[f64; MAX_NODES]> = rule
        .points
        .iter()
        .map(|&xi| {
            let mut v = [0.0; MAX_NODES];
            eval_shape(slave.kind, xi, &mut v);
            v
        })
        .collect();

    let locals: Vec<Local> = (0..slave.n_elements())
        .into_par_iter()
        .map(|s| {
            let geom = slave.geometry(s);
            let snodes = slave.element_nodes(s);
            let mut local = Local::default();
            let mut scratch = Vec::new();
            let mut vals = [0.0; MAX_NODES];
            let mut best_vals = [0.0; MAX_NODES];
            for (g, (xi, w)) in rule.iter().enumerate() {
                local.total += 1;
                let x = geom.map(xi);
                let mut best: Option<(f64, usize)> = None;
                for &m in &cands.candidates[s] {
                    if let Some(depth) = eval.eval(m, x, &mut scratch, &mut vals[..nm]) {
                        if best.is_none_or(|(d, _)| depth > d) {
                            best = Some((depth, m));
                            best_vals[..nm].copy_from_slice(&vals[..nm]);
                        }
                    }
                }
                let Some((_, m)) = best else {
                    local.dropped += 1;
                    continue;
                };
                let jw = w * geom.metric(xi);
                accumulate(&mut local, snodes, master.element_nodes(m), &phi_at[g][..ns], &best_vals[..nm], jw);
            }
            local
        })
        .collect();

    let mut stats = AssemblyStats {
        pairs_visited: cands.n_pairs(),
        slaves_without_candidates: cands.uncovered.clone(),
        ..Default::default()
    };
    for (s, l) in locals.iter().enumerate() {
        stats.gauss_points_total += l.total;
        stats.gauss_points_dropped += l.dropped;
        if l.total > 0 && l.dropped == l.total {
            stats.uncovered_slaves.push(s);
        }
    }
    let (d, m) = build(slave.n_nodes(), master.n_nodes(), &locals);
    Ok(MortarMatrices {
        d,
        m,
        stats,
        scheme: config.scheme,
    })
}

fn build(n_slave: usize, n_master: usize, locals: &[Local]) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
    let mut d = CooMatrix::new(n_slave, n_slave);
    let mut m = CooMatrix::new(n_slave, n_master);
    for l in locals {
        for &(i, j, v) in &l.d {
            d.push(i, j, v);
        }
        for &(i, j, v) in &l.m {
            m.push(i, j, v);
        }
    }
    (CsrMatrix::from(&d), CsrMatrix::from(&m))
}

/// RB scheme: one rescaled interpolant per master element, evaluated at every slave
/// Gauss point of the candidate pairs; points are sorted out by the interpolated
/// support probes.
pub fn assemble_rb(pair: &InterfacePair, config: &MortarConfig) -> Result<MortarMatrices> {
    config.validate(pair.slave.kind)?;
    let master = &pair.master;
    let opts = MasterFitOptions {
        layout: config.rbf.layout,
        family: config.rbf.family,
        epsilon: config.rbf.epsilon,
        with_probes: true,
        condition_limit: config.rbf.max_condition,
    };
    let fits: Vec<Result<RbfInterpolant>> = (0..master.n_elements())
        .into_par_iter()
        .map(|e| fit_master_with(master, e, &opts))
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let cands = contact_search(pair);
    let eval = RbEval {
        fits: &fits,
        tol: config.support_tol,
    };
    let mut out = slave_loop(pair, config, &cands, &eval)?;
    out.scheme = Scheme::Rb;
    Ok(out)
}

/// EB scheme: slave Gauss points projected onto candidate master elements by Newton.
pub fn assemble_eb(pair: &InterfacePair, config: &MortarConfig) -> Result<MortarMatrices> {
    config.validate(pair.slave.kind)?;
    let cands = contact_search(pair);
    let eval = EbEval {
        master: &pair.master,
        config,
    };
    let mut out = slave_loop(pair, config, &cands, &eval)?;
    out.scheme = Scheme::Eb;
    Ok(out)
}

/// Exact segment-based integration on a straight 1D interface.
///
/// Each slave element is intersected with the master elements along the common
/// line; every intersection segment gets its own Gauss rule, exact for the
/// polynomial integrands of straight elements.
pub fn assemble_sb_1d(pair: &InterfacePair, config: &MortarConfig) -> Result<MortarMatrices> {
    let (slave, master) = (&pair.slave, &pair.master);
    if !slave.kind.is_segment() || !master.kind.is_segment() {
        return Err(Error::InvalidGeometry("segment-based integration needs 1D interfaces".into()));
    }
    config.validate(slave.kind)?;
    let (origin, dir, extent) = common_line(slave, master)?;
    let param = |p: Point| dot(sub(p, origin), dir);
    let interval = |mesh: &Mesh, e: usize| {
        let t: Vec<f64> = mesh.element_nodes(e).iter().map(|&n| param(mesh.nodes[n])).collect();
        (
            t.iter().copied().fold(f64::INFINITY, f64::min),
            t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let minimal = (slave.kind.degree() + master.kind.degree()).div_ceil(2) + 1;
    let (gx, gw) = gauss_legendre(config.n_gauss.max(minimal))?;
    let master_iv: Vec<(f64, f64)> = (0..master.n_elements()).map(|e| interval(master, e)).collect();
    let ns = slave.kind.node_count();
    let nm = master.kind.node_count();

    let locals: Vec<(Local, usize)> = (0..slave.n_elements())
        .into_par_iter()
        .map(|s| {
            let (a, b) = interval(slave, s);
            let sgeom = slave.geometry(s);
            let snodes = slave.element_nodes(s);
            let mut local = Local::default();
            let mut segments = 0;
            let mut phi = [0.0; MAX_NODES];
            let mut n = [0.0; MAX_NODES];
            for (m, &(c, d)) in master_iv.iter().enumerate() {
                let (lo, hi) = (a.max(c), b.min(d));
                if hi - lo <= 1e-14 * extent {
                    continue;
                }
                segments += 1;
                let mgeom = master.geometry(m);
                let half = 0.5 * (hi - lo);
                for (&t, &w) in gx.iter().zip(&gw) {
                    let tp = lo + half * (1.0 + t);
                    let x = [origin[0] + tp * dir[0], origin[1] + tp * dir[1], origin[2] + tp * dir[2]];
                    let xs = line_inverse(&sgeom, x);
                    let xm = line_inverse(&mgeom, x);
                    eval_shape(slave.kind, xs, &mut phi);
                    eval_shape(master.kind, xm, &mut n);
                    local.total += 1;
                    accumulate(&mut local, snodes, master.element_nodes(m), &phi[..ns], &n[..nm], w * half);
                }
            }
            (local, segments)
        })
        .collect();

    let mut stats = AssemblyStats::default();
    for (s, (l, segments)) in locals.iter().enumerate() {
        stats.pairs_visited += segments;
        stats.gauss_points_total += l.total;
        if *segments == 0 {
            stats.slaves_without_candidates.push(s);
            stats.uncovered_slaves.push(s);
        }
    }
    let locals: Vec<Local> = locals.into_iter().map(|(l, _)| l).collect();
    let (d, m) = build(slave.n_nodes(), master.n_nodes(), &locals);
    Ok(MortarMatrices {
        d,
        m,
        stats,
        scheme: Scheme::Sb1d,
    })
}

/// Line through all nodes of both meshes: origin, unit direction, extent.
fn common_line(a: &Mesh, b: &Mesh) -> Result<(Point, Point, f64)> {
    let origin = a.nodes[a.element_nodes(0)[0]];
    let all = || a.nodes.iter().chain(b.nodes.iter());
    let far = all()
        .copied()
        .max_by(|p, q| norm(sub(*p, origin)).total_cmp(&norm(sub(*q, origin))))
        .unwrap_or(origin);
    let extent = norm(sub(far, origin));
    if !(extent > 0.0) {
        return Err(Error::InvalidGeometry("interface has zero extent".into()));
    }
    let v = sub(far, origin);
    let dir = [v[0] / extent, v[1] / extent, v[2] / extent];
    for p in all() {
        let r = sub(*p, origin);
        let t = dot(r, dir);
        let off = norm([r[0] - t * dir[0], r[1] - t * dir[1], r[2] - t * dir[2]]);
        if off > 1e-10 * extent {
            return Err(Error::InvalidGeometry(format!(
                "interface nodes are not collinear (offset {off:.3e})"
            )));
        }
    }
    Ok((origin, dir, extent))
}

/// Reference coordinate of a point on a straight segment element.
fn line_inverse(geom: &ElementGeometry, x: Point) -> [f64; 2] {
    let nw = crate::mortar::NewtonSettings { tol: 1e-15, max_iter: 20 };
    project_on(geom, x, &nw).xi
}
