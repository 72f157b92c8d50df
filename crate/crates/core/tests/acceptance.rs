//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mortar_rbf::bench::{
    jittered_interval, matrix_deviation, run_interp_1d, run_interp_surface, study_point, Experiment, ExperimentConfig, SweepRow,
};
use mortar_rbf::mesh::generate::{distort, interval_pair, merged_unit_square, square_surface, square_surface_pair, Ratio, Warp};
use mortar_rbf::mesh::{ElementKind, InterfaceMesh, Side};
use mortar_rbf::mortar::{
    assemble, compute_e, consistency_report, interface_transfer, min_gauss_points, InterfacePair, MortarConfig, Scheme,
};
use mortar_rbf::rbf::{EpsilonPolicy, KernelFamily, LayoutVariant, PointLayout};
use mortar_rbf::solver::coupled::{solve_condensed, solve_saddle};
use mortar_rbf::solver::{assemble_saddle, broken_norms, observed_order, solve, solve_single_domain, PoissonProblem, SolutionFields};
use mortar_rbf::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplet_iter() {
        d[(i, j)] += v;
    }
    d
}

fn rb(n_gauss: usize, family: KernelFamily, n_m: usize) -> MortarConfig {
    let mut c = MortarConfig::new(Scheme::Rb, n_gauss).with_kernel(family, n_m).unwrap();
    c.rbf.max_condition = None;
    c
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Interval `[a, b]` with interior nodes jittered, obtained by mapping a jittered `[-1, 1]`.
fn random_interval(rng: &mut StdRng, a: f64, b: f64, n: usize, kind: ElementKind, side: Side) -> Result<InterfaceMesh> {
    let base = jittered_interval(n, kind, side, rng)?;
    let mesh = distort(&base.mesh, |[x, y, z]| [a + 0.5 * (x + 1.0) * (b - a), y, z])?;
    InterfaceMesh::new(mesh, side)
}

/// Flat `[-1, 1]^2` surface bent in-plane by a random smooth map that fixes the boundary.
fn random_surface(rng: &mut StdRng, n: usize, kind: ElementKind, side: Side) -> Result<InterfaceMesh> {
    let base = square_surface(n, kind, side, Warp::Flat)?;
    let (ax, ay) = (rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
    let mesh = distort(&base.mesh, |[x, y, z]| [x + ax * (1.0 - x * x), y + ay * (1.0 - y * y), z])?;
    InterfaceMesh::new(mesh, side)
}

fn criterion_1() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(20);
    let (mut worst_approx, mut worst_sb) = (0.0_f64, 0.0_f64);
    for trial in 0..20 {
        let pair = if trial % 2 == 0 {
            let kind = if trial % 4 == 0 { ElementKind::Seg2 } else { ElementKind::Seg3 };
            let a = rng.random_range(-2.0..0.0);
            let b = a + rng.random_range(0.5..3.0);
            let (nm, ns) = (rng.random_range(1..9), rng.random_range(1..9));
            let m = random_interval(&mut rng, a, b, nm, kind, Side::Master)?;
            let s = random_interval(&mut rng, a, b, ns, kind, Side::Slave)?;
            InterfacePair::new(m, s)?
        } else {
            let kind = if trial % 4 == 1 { ElementKind::Quad4 } else { ElementKind::Quad8 };
            let (nm, ns) = (rng.random_range(1..5), rng.random_range(1..5));
            let m = random_surface(&mut rng, nm, kind, Side::Master)?;
            let s = random_surface(&mut rng, ns, kind, Side::Slave)?;
            InterfacePair::new(m, s)?
        };
        let g = min_gauss_points(pair.slave.kind);
        for cfg in [rb(g, KernelFamily::Gaussian, 6), MortarConfig::new(Scheme::Eb, g)] {
            let rep = consistency_report(&assemble(&pair, &cfg)?)?;
            worst_approx = worst_approx.max(rep.row_sum_defect);
        }
        if pair.slave.kind.is_segment() {
            let rep = consistency_report(&assemble(&pair, &MortarConfig::new(Scheme::Sb1d, g))?)?;
            worst_sb = worst_sb.max(rep.row_sum_defect);
        }
    }
    Ok(Outcome {
        pass: worst_approx <= 1e-10 && worst_sb <= 1e-14,
        detail: format!("20 pairs: RB/EB defect {worst_approx:.2e} (<= 1e-10), SB defect {worst_sb:.2e} (<= 1e-14)"),
    })
}

fn criterion_2() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut count = 0;
    let pairs = [
        interval_pair(-1.0, 1.0, 6, 4, ElementKind::Seg2)?,
        interval_pair(-1.0, 1.0, 6, 4, ElementKind::Seg3)?,
        square_surface_pair(3, 2, ElementKind::Quad4, Warp::Flat)?,
        square_surface_pair(3, 2, ElementKind::Quad8, Warp::Flat)?,
    ];
    for (m, s) in pairs {
        let pair = InterfacePair::new(m, s)?;
        let g = min_gauss_points(pair.slave.kind);
        let mut configs: Vec<MortarConfig> = KernelFamily::ALL.iter().map(|&k| rb(g, k, 6)).collect();
        configs.push(MortarConfig::new(Scheme::Eb, g));
        if pair.slave.kind.is_segment() {
            configs.push(MortarConfig::new(Scheme::Sb1d, g));
        }
        for cfg in configs {
            let op = compute_e(&assemble(&pair, &cfg)?)?;
            let ones = vec![1.0; pair.master.n_nodes()];
            let out = interface_transfer(&op, &ones)?;
            worst = worst.max(out.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
            count += 1;
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("{count} scheme/kernel/mesh combinations: max |E 1 - 1| = {worst:.2e} (<= 1e-10)"),
    })
}

fn criterion_3() -> Result<Outcome> {
    let master = square_surface(2, ElementKind::Quad4, Side::Master, Warp::Flat)?;
    let slave = square_surface(3, ElementKind::Quad4, Side::Slave, Warp::Flat)?;
    let eps = master.max_circumdiameter();
    let normal = master.geometry(0).normal([0.0, 0.0]);
    let cfg = rb(4, KernelFamily::Gaussian, 6);
    let gap = 11.0 * eps;
    let base = dense(&assemble(&InterfacePair::with_gap_tolerance(master.clone(), slave.clone(), gap)?, &cfg)?.m);
    let scale = base.abs().max();
    let mut worst = 0.0_f64;
    for s in [0.1, 1.0, 10.0] {
        let shift = s * eps;
        let moved = distort(&slave.mesh, |[x, y, z]| {
            [x + shift * normal[0], y + shift * normal[1], z + shift * normal[2]]
        })?;
        let pair = InterfacePair::with_gap_tolerance(master.clone(), InterfaceMesh::new(moved, Side::Slave)?, gap)?;
        let m = dense(&assemble(&pair, &cfg)?.m);
        worst = worst.max((m - &base).abs().max() / scale);
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("offsets {{0.1, 1, 10}} eps: relative max |M(s) - M(0)| = {worst:.2e} (<= 1e-10)"),
    })
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(1);
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [ElementKind::Seg2, ElementKind::Seg3] {
        let m = jittered_interval(6, kind, Side::Master, &mut rng)?;
        let s = jittered_interval(4, kind, Side::Slave, &mut rng)?;
        let pair = InterfacePair::new(m, s)?;
        let sb = assemble(&pair, &MortarConfig::new(Scheme::Sb1d, min_gauss_points(kind)))?;
        let eb: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&g| assemble(&pair, &MortarConfig::new(Scheme::Eb, g.max(min_gauss_points(kind)))).map(|mm| matrix_deviation(&mm, &sb)))
            .collect::<Result<_>>()?;
        let monotone = eb.windows(2).all(|w| w[1] <= w[0] + 1e-13);
        let last = eb[eb.len() - 1];
        let rb8 = matrix_deviation(&assemble(&pair, &rb(8, KernelFamily::Gaussian, 6))?, &sb);
        pass &= monotone && last <= 1e-12 && rb8 <= 5e-6;
        let series: Vec<String> = eb.iter().map(|e| format!("{e:.1e}")).collect();
        parts.push(format!(
            "{kind}: EB-SB [{}] monotone {monotone}, final <= 1e-12 {}; RB-SB at 8 = {rb8:.1e} (<= 5e-6)",
            series.join(", "),
            last <= 1e-12
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn finest_three_order(rows: &[&SweepRow], err: impl Fn(&SweepRow) -> Option<f64>) -> Option<f64> {
    let h: Vec<f64> = rows.iter().map(|r| r.h_slave).collect();
    let e: Vec<f64> = rows.iter().map(|r| err(r).unwrap_or(f64::NAN)).collect();
    observed_order(&h, &e)
}

fn criterion_5() -> Result<Outcome> {
    let out = run_interp_1d(&ExperimentConfig::new(Experiment::Interp1d))?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (case, target, tol) in [("seg2", 2.0, 0.25), ("seg3", 3.0, 0.3)] {
        let series = |scheme: Scheme, kernel: Option<KernelFamily>| -> Vec<&SweepRow> {
            let mut v: Vec<&SweepRow> = out
                .rows
                .iter()
                .filter(|r| r.case == case && r.scheme == Some(scheme) && r.kernel == kernel)
                .collect();
            v.sort_by_key(|r| r.level);
            v
        };
        let ga = series(Scheme::Rb, Some(KernelFamily::Gaussian));
        let eb = series(Scheme::Eb, None);
        let sb = series(Scheme::Sb1d, None);
        let wendland = series(Scheme::Rb, Some(KernelFamily::WendlandC2));
        if ga.len() != 5 || eb.len() != 5 || sb.len() != 5 || wendland.len() != 5 {
            return Ok(Outcome {
                pass: false,
                detail: format!("{case}: expected 5 levels per series"),
            });
        }
        let mut orders = Vec::new();
        for (name, s) in [("SB", &sb), ("EB", &eb), ("RB-GA", &ga)] {
            let p = finest_three_order(s, |r| r.l2_error).unwrap_or(f64::NAN);
            pass &= (p - target).abs() <= tol;
            orders.push(format!("{name} {p:.3}"));
        }
        let ratio = ga
            .iter()
            .zip(&eb)
            .map(|(a, b)| a.l2_error.unwrap() / b.l2_error.unwrap())
            .fold(0.0, f64::max);
        let (w, g) = (wendland[4].l2_error.unwrap(), ga[4].l2_error.unwrap());
        pass &= ratio <= 1.1 && w > g;
        parts.push(format!(
            "{case}: orders {} (target {target} +- {tol}), max RB/EB {ratio:.4} (<= 1.1), finest Wendland {w:.2e} > GA {g:.2e}",
            orders.join(", ")
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn criterion_6() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::new(Experiment::InterpSurface);
    cfg.levels = Some(1);
    let out = run_interp_surface(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in ["quad4", "quad8"] {
        for role in ["fine-master", "coarse-master"] {
            let case = format!("{kind}-warped-{role}");
            let pick = |s: Scheme| {
                out.rows
                    .iter()
                    .find(|r| r.case == case && r.scheme == Some(s))
                    .and_then(|r| r.l2_error)
            };
            match (pick(Scheme::Rb), pick(Scheme::Eb)) {
                (Some(r), Some(e)) if e > 0.0 => {
                    let rel = (r - e).abs() / e;
                    pass &= rel <= 0.15;
                    parts.push(format!("{case}: RB {r:.3e} EB {e:.3e} rel {rel:.3}"));
                }
                _ => {
                    pass = false;
                    parts.push(format!("{case}: missing"));
                }
            }
        }
    }
    Ok(Outcome {
        pass,
        detail: format!("{} (<= 0.15)", parts.join("; ")),
    })
}

struct PoissonRun {
    scheme: Scheme,
    level: Option<usize>,
    h: f64,
    l2: f64,
    h1: f64,
    residual: f64,
    gap: f64,
}

fn poisson_runs() -> Result<Vec<PoissonRun>> {
    let ratio = Ratio::new(2, 3)?;
    let configs = [rb_default(), MortarConfig::new(Scheme::Eb, 2), MortarConfig::new(Scheme::Sb1d, 2)];
    let mut runs = Vec::new();
    let mut cases: Vec<(Option<usize>, usize, usize, f64)> = (0..4)
        .map(|l| {
            let (nm, ns) = ratio.element_counts(2 << l);
            (Some(l), nm, ns, 0.0)
        })
        .collect();
    let (nm, ns) = ratio.element_counts(8);
    cases.push((None, nm, ns, 0.25));
    for (level, nm, ns, amplitude) in cases {
        let problem = PoissonProblem::bubble_split(nm, ns, amplitude)?;
        for cfg in configs.iter().filter(|c| c.scheme != Scheme::Sb1d || amplitude == 0.0) {
            let system = assemble_saddle(&problem, assemble(&problem.interface, cfg)?)?;
            let condensed = solve_condensed(&system)?;
            let saddle = solve_saddle(&system)?;
            let err = broken_norms(&condensed, &problem)?;
            runs.push(PoissonRun {
                scheme: cfg.scheme,
                level,
                h: 1.0 / ns as f64,
                l2: err.l2_broken,
                h1: err.h1_broken,
                residual: condensed.constraint_residual.max(saddle.constraint_residual),
                gap: nodal_gap(&condensed, &saddle),
            });
        }
    }
    Ok(runs)
}

fn rb_default() -> MortarConfig {
    MortarConfig::new(Scheme::Rb, 2)
}

fn nodal_gap(a: &SolutionFields, b: &SolutionFields) -> f64 {
    max_abs_diff(&a.u1, &b.u1).max(max_abs_diff(&a.u2, &b.u2))
}

fn criterion_7(runs: &[PoissonRun]) -> Outcome {
    let flat = |s: Scheme| -> Vec<&PoissonRun> { runs.iter().filter(|r| r.scheme == s && r.level.is_some()).collect() };
    let (rbs, ebs) = (flat(Scheme::Rb), flat(Scheme::Eb));
    let h: Vec<f64> = rbs.iter().map(|r| r.h).collect();
    let p_l2 = observed_order(&h, &rbs.iter().map(|r| r.l2).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let p_h1 = observed_order(&h, &rbs.iter().map(|r| r.h1).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let ratio = rbs.iter().zip(&ebs).map(|(a, b)| a.l2 / b.l2).fold(0.0, f64::max);
    let residual = runs.iter().filter(|r| r.level.is_some()).map(|r| r.residual).fold(0.0, f64::max);
    Outcome {
        pass: rbs.len() == 4 && (p_l2 - 2.0).abs() <= 0.2 && (p_h1 - 1.0).abs() <= 0.2 && ratio <= 1.1 && residual <= 1e-9,
        detail: format!(
            "RB-GA orders L2 {p_l2:.3} (2 +- 0.2), H1 {p_h1:.3} (1 +- 0.2); max RB/EB L2 {ratio:.4} (<= 1.1); max residual {residual:.2e} (<= 1e-9)"
        ),
    }
}

/// `max |E - I|` on a conforming pair, pairing nodes by position.
fn identity_gap(pair: &InterfacePair, cfg: &MortarConfig) -> Result<f64> {
    let e = compute_e(&assemble(pair, cfg)?)?.to_dense();
    let mut gap = 0.0_f64;
    for (i, p) in pair.slave.nodes.iter().enumerate() {
        for (k, q) in pair.master.nodes.iter().enumerate() {
            let same = (0..3).all(|c| (p[c] - q[c]).abs() < 1e-12);
            gap = gap.max((e[(i, k)] - if same { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(gap)
}

fn criterion_8() -> Result<Outcome> {
    let problem = PoissonProblem::bubble_split(8, 8, 0.0)?;
    let fields = solve(&problem, &MortarConfig::new(Scheme::Sb1d, 2))?;
    let merged = merged_unit_square(8, 4, 4)?;
    let um = solve_single_domain(&merged, &*problem.forcing, &*problem.dirichlet)?;
    let lookup = |x: [f64; 3]| {
        merged
            .nodes
            .iter()
            .position(|q| (q[0] - x[0]).abs() < 1e-12 && (q[1] - x[1]).abs() < 1e-12)
    };
    let mut split_gap = 0.0_f64;
    for (nodes, u) in [(&problem.master.nodes, &fields.u1), (&problem.slave.nodes, &fields.u2)] {
        for (q, v) in nodes.iter().zip(u.iter()) {
            split_gap = match lookup(*q) {
                Some(i) => split_gap.max((v - um[i]).abs()),
                None => f64::INFINITY,
            };
        }
    }
    let cfg = rb(2, KernelFamily::Gaussian, 6);
    let (m, s) = interval_pair(0.0, 1.0, 4, 4, ElementKind::Seg2)?;
    let mut e_gap = identity_gap(&InterfacePair::new(m, s)?, &cfg)?;
    e_gap = e_gap.max(identity_gap(&problem.interface, &cfg)?);
    Ok(Outcome {
        pass: split_gap <= 1e-9 && e_gap <= 1e-6,
        detail: format!("SB split vs merged {split_gap:.2e} (<= 1e-9); RB-GA conforming Seg2 ||E - I||_max {e_gap:.2e} (<= 1e-6)"),
    })
}

fn criterion_9() -> Result<Outcome> {
    let at = EpsilonPolicy::Circumdiameter;
    let mut better = true;
    for kind in [ElementKind::Seg3, ElementKind::Quad8] {
        for n_m in 6..=10 {
            let uni = study_point(
                kind,
                KernelFamily::WendlandC2,
                PointLayout::new(LayoutVariant::UniformGrid, n_m)?,
                at,
            )?
            .rmse;
            let sine = study_point(
                kind,
                KernelFamily::WendlandC2,
                PointLayout::new(LayoutVariant::SineModified, n_m)?,
                at,
            )?
            .rmse;
            better &= matches!((uni, sine), (Some(u), Some(s)) if s <= u);
        }
    }
    let conds: Vec<f64> = (3..=10)
        .map(|n_m| {
            study_point(ElementKind::Seg3, KernelFamily::Gaussian, PointLayout::uniform(n_m)?, at).map(|p| p.interp.condition_estimate)
        })
        .collect::<Result<_>>()?;
    let increasing = conds.windows(2).all(|w| w[1] > w[0]);
    let mut defect = 0.0_f64;
    let mut fits = 0;
    for kind in [ElementKind::Seg3, ElementKind::Quad8] {
        for family in KernelFamily::ALL {
            for variant in [LayoutVariant::UniformGrid, LayoutVariant::SineModified] {
                for n_m in 3..=10 {
                    if let Some(d) = study_point(kind, family, PointLayout::new(variant, n_m)?, at)?.constant_defect {
                        defect = defect.max(d);
                        fits += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome {
        pass: better && increasing && defect <= 1e-12,
        detail: format!(
            "Wendland sine <= uniform for n_M >= 6: {better}; Seg3 GA condition increasing n_M 3..10 ({:.1e} .. {:.1e}): {increasing}; constant defect over {fits} fits {defect:.2e} (<= 1e-12)",
            conds[0],
            conds[conds.len() - 1]
        ),
    })
}

fn criterion_10(runs: &[PoissonRun]) -> Outcome {
    let gap = runs.iter().map(|r| r.gap).fold(0.0, f64::max);
    Outcome {
        pass: gap <= 1e-8,
        detail: format!(
            "{} Poisson solves (flat sweep and curved, RB/EB/SB): max nodal gap {gap:.2e} (<= 1e-8)",
            runs.len()
        ),
    }
}

fn report(index: usize, name: &str, limit: Duration, elapsed: Duration, outcome: Result<Outcome>) -> bool {
    let (pass, detail) = match outcome {
        Ok(o) => (o.pass && elapsed <= limit, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "{} criterion {index:>2} {name}: {detail}; {:.2} s (limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    let (o, t) = timed(criterion_1);
    all &= report(1, "row sums", secs(5), t, o);
    let (o, t) = timed(criterion_2);
    all &= report(2, "constant transfer", secs(1), t, o);
    let (o, t) = timed(criterion_3);
    all &= report(3, "normal-offset invariance", secs(1), t, o);
    let (o, t) = timed(criterion_4);
    all &= report(4, "SB oracle equivalence", secs(5), t, o);
    let (o, t) = timed(criterion_5);
    all &= report(5, "1D interpolation convergence", secs(30), t, o);
    let (o, t) = timed(criterion_6);
    all &= report(6, "warped surface RB vs EB", secs(60), t, o);
    let (runs, t_poisson) = timed(poisson_runs);
    let (c7, c10) = match runs {
        Ok(r) => (Ok(criterion_7(&r)), Ok(criterion_10(&r))),
        Err(e) => (Err(mortar_rbf::Error::SolverFailure(e.to_string())), Err(e)),
    };
    all &= report(7, "Poisson convergence", secs(120), t_poisson, c7);
    let (o, t) = timed(criterion_8);
    all &= report(8, "conforming limit", secs(10), t, o);
    let (o, t) = timed(criterion_9);
    all &= report(9, "kernel-study directionals", secs(10), t, o);
    all &= report(10, "saddle/condensed equivalence", secs(120), t_poisson, c10);
    if !all {
        std::process::exit(1);
    }
}
