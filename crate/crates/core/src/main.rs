use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mortar_rbf::bench::{self, Experiment, ExperimentConfig};
use mortar_rbf::Error;

/// Mortar RBF quadrature benchmarks.
#[derive(Debug, Parser)]
#[command(name = "mortar-rbf", version, about)]
struct Cli {
    /// interp1d | interp-surface | kernel-study | poisson2d | scheme-compare
    experiment: String,
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: PathBuf,
    /// rb | eb | sb
    #[arg(long)]
    scheme: Option<String>,
    /// ga | imq | wendland
    #[arg(long)]
    kernel: Option<String>,
    /// Interpolation points per edge.
    #[arg(long)]
    nm: Option<usize>,
    /// Gauss points per slave element (per direction on quadrilaterals).
    #[arg(long)]
    gauss: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    /// Warp or curve amplitude.
    #[arg(long)]
    warp: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut cfg = ExperimentConfig::from_file(&cli.config, Some(experiment))?;
    let overrides = [
        ("scheme", cli.scheme.clone()),
        ("kernel", cli.kernel.clone()),
        ("n_m", cli.nm.map(|v| v.to_string())),
        ("n_gauss", cli.gauss.map(|v| v.to_string())),
        ("levels", cli.levels.map(|v| v.to_string())),
        ("warp", cli.warp.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mortar-rbf: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match bench::run(&cfg) {
        Ok(o) => o,
        Err(e @ Error::Config(_)) => {
            eprintln!("mortar-rbf: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("mortar-rbf: {e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = out.write_to(&cfg.out, &cfg) {
        eprintln!("mortar-rbf: cannot write {}: {e}", cfg.out.display());
        return ExitCode::from(3);
    }
    print!("{}", out.report(&cfg));
    ExitCode::SUCCESS
}
