use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::generate::Ratio;
use crate::mesh::ElementKind;
use crate::mortar::{min_gauss_points, Scheme};
use crate::rbf::layout::MAX_POINTS_PER_EDGE;
use crate::rbf::KernelFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Interp1d,
    InterpSurface,
    KernelStudy,
    Poisson2d,
    SchemeCompare,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Interp1d,
        Experiment::InterpSurface,
        Experiment::KernelStudy,
        Experiment::Poisson2d,
        Experiment::SchemeCompare,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Interp1d => "interp1d",
            Experiment::InterpSurface => "interp-surface",
            Experiment::KernelStudy => "kernel-study",
            Experiment::Poisson2d => "poisson2d",
            Experiment::SchemeCompare => "scheme-compare",
        }
    }

    /// Refinement levels used when the config leaves `levels` unset.
    pub fn default_levels(self) -> usize {
        match self {
            Experiment::Interp1d => 5,
            Experiment::InterpSurface => 3,
            Experiment::KernelStudy => 1,
            Experiment::Poisson2d => 4,
            Experiment::SchemeCompare => 1,
        }
    }

    /// Slave element kinds the experiment builds, for `n_gauss` validation.
    fn slave_kinds(self) -> &'static [ElementKind] {
        match self {
            Experiment::Interp1d => &[ElementKind::Seg2, ElementKind::Seg3],
            Experiment::InterpSurface => &[ElementKind::Quad4, ElementKind::Quad8],
            Experiment::KernelStudy => &[],
            Experiment::Poisson2d => &[ElementKind::Seg2],
            Experiment::SchemeCompare => &[ElementKind::Seg2],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag().replace('-', "") == key.replace('-', ""))
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Analytic field sampled on the master side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FunctionId {
    /// Each experiment's own choice.
    #[default]
    Auto,
    /// `sin(4x) + x^2`
    Sin4xPlusX2,
    /// `sin(4x) cos(4y)`
    Sin4xCos4y,
    /// `sin(x) + cos(y)`
    SinXPlusCosY,
}

impl FunctionId {
    pub fn tag(self) -> &'static str {
        match self {
            FunctionId::Auto => "auto",
            FunctionId::Sin4xPlusX2 => "sin4x+x2",
            FunctionId::Sin4xCos4y => "sin4x*cos4y",
            FunctionId::SinXPlusCosY => "sinx+cosy",
        }
    }

    /// `self` unless it is `Auto`, then `fallback`.
    pub fn or(self, fallback: FunctionId) -> FunctionId {
        if self == FunctionId::Auto {
            fallback
        } else {
            self
        }
    }

    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            FunctionId::Auto | FunctionId::Sin4xPlusX2 => (4.0 * x).sin() + x * x,
            FunctionId::Sin4xCos4y => (4.0 * x).sin() * (4.0 * y).cos(),
            FunctionId::SinXPlusCosY => x.sin() + y.cos(),
        }
    }
}

impl FromStr for FunctionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        [
            FunctionId::Auto,
            FunctionId::Sin4xPlusX2,
            FunctionId::Sin4xCos4y,
            FunctionId::SinXPlusCosY,
        ]
        .into_iter()
        .find(|f| f.tag() == key)
        .ok_or_else(|| Error::Config(format!("unknown function `{s}`")))
    }
}

/// One benchmark run. `None` fields mean "experiment default" and serialize as `auto`/`all`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub levels: Option<usize>,
    /// `h_master / h_slave`
    pub ratio: Ratio,
    pub scheme: Option<Scheme>,
    pub kernel: Option<KernelFamily>,
    pub n_m: usize,
    /// Gauss points per slave element on segments, per direction on quadrilaterals.
    pub n_gauss: Option<usize>,
    pub function: FunctionId,
    /// Warp / curve amplitude of the non-flat cases.
    pub warp: f64,
    pub max_condition: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            levels: None,
            ratio: Ratio::default(),
            scheme: None,
            kernel: None,
            n_m: 6,
            n_gauss: None,
            function: FunctionId::Auto,
            warp: 0.25,
            max_condition: None,
            seed: 1,
            out: PathBuf::from("out"),
        }
    }

    pub fn levels(&self) -> usize {
        self.levels.unwrap_or_else(|| self.experiment.default_levels())
    }

    /// Parses `key = value` lines; `#` starts a comment. The experiment may be
    /// given by the file or by `experiment` (the argument wins).
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut file_experiment = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
            if k == "experiment" {
                file_experiment = Some(v.parse::<Experiment>()?);
            } else {
                pairs.push((n + 1, k, v));
            }
        }
        let experiment = experiment
            .or(file_experiment)
            .ok_or_else(|| Error::Config("no experiment given".into()))?;
        let mut cfg = Self::new(experiment);
        for (line, k, v) in pairs {
            cfg.set(&k, &v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, experiment)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<usize> { v.parse().map_err(|_| Error::Config(format!("`{key}` needs an integer, got `{v}`"))) };
        let real = |v: &str| -> Result<f64> { v.parse().map_err(|_| Error::Config(format!("`{key}` needs a number, got `{v}`"))) };
        let auto = |v: &str| v.eq_ignore_ascii_case("auto") || v.eq_ignore_ascii_case("all") || v.eq_ignore_ascii_case("default");
        let cfg_err = |e: Error| Error::Config(e.to_string());
        match key {
            "experiment" => self.experiment = value.parse()?,
            "levels" => self.levels = if auto(value) { None } else { Some(num(value)?) },
            "ratio" => self.ratio = value.parse().map_err(cfg_err)?,
            "scheme" => self.scheme = if auto(value) { None } else { Some(value.parse().map_err(cfg_err)?) },
            "kernel" => self.kernel = if auto(value) { None } else { Some(value.parse().map_err(cfg_err)?) },
            "n_m" | "nm" => self.n_m = num(value)?,
            "n_gauss" | "gauss" => self.n_gauss = if auto(value) { None } else { Some(num(value)?) },
            "function" => self.function = value.parse()?,
            "warp" => self.warp = real(value)?,
            "max_condition" => self.max_condition = if auto(value) { None } else { Some(real(value)?) },
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`seed` needs an integer, got `{value}`")))?
            }
            "out" => self.out = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let levels = self.levels();
        if !(1..=8).contains(&levels) {
            return Err(Error::Config(format!("levels = {levels} outside [1, 8]")));
        }
        if !(2..=MAX_POINTS_PER_EDGE).contains(&self.n_m) {
            return Err(Error::Config(format!("n_m = {} outside [2, {MAX_POINTS_PER_EDGE}]", self.n_m)));
        }
        if let Some(g) = self.n_gauss {
            for &kind in self.experiment.slave_kinds() {
                let min = min_gauss_points(kind);
                let per_dir = if kind.is_quad() { g * g } else { g };
                if per_dir < min {
                    return Err(Error::Config(format!("n_gauss = {g} too small for {kind} (needs {min} points)")));
                }
            }
            if g > crate::mesh::quadrature::MAX_GAUSS_1D {
                return Err(Error::Config(format!(
                    "n_gauss = {g} above {}",
                    crate::mesh::quadrature::MAX_GAUSS_1D
                )));
            }
        }
        if !(self.warp.is_finite() && self.warp >= 0.0) {
            return Err(Error::Config(format!("warp = {} must be finite and non-negative", self.warp)));
        }
        if self.experiment == Experiment::Poisson2d && self.warp >= 0.5 {
            return Err(Error::Config(format!(
                "warp = {} must stay below 0.5 for the curved split",
                self.warp
            )));
        }
        if let Some(c) = self.max_condition {
            if !(c > 1.0) {
                return Err(Error::Config(format!("max_condition = {c} must exceed 1")));
            }
        }
        if self.scheme == Some(Scheme::Sb1d) && self.experiment == Experiment::InterpSurface {
            return Err(Error::Config("the segment-based scheme only handles 1D interfaces".into()));
        }
        Ok(())
    }

    /// Text form accepted by [`ExperimentConfig::parse`].
    pub fn serialize(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        format!(
            "experiment = {}\nlevels = {}\nratio = {}\nscheme = {}\nkernel = {}\nn_m = {}\nn_gauss = {}\nfunction = {}\nwarp = {}\nmax_condition = {}\nseed = {}\nout = {}\n",
            self.experiment,
            opt(self.levels.map(|v| v.to_string())),
            self.ratio,
            self.scheme.map(|s| s.to_string()).unwrap_or_else(|| "all".into()),
            self.kernel.map(|k| k.to_string()).unwrap_or_else(|| "all".into()),
            self.n_m,
            opt(self.n_gauss.map(|v| v.to_string())),
            self.function.tag(),
            self.warp,
            opt(self.max_condition.map(|v| v.to_string())),
            self.seed,
            self.out.display(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new(Experiment::Poisson2d);
        c.levels = Some(3);
        c.kernel = Some(KernelFamily::WendlandC2);
        c.max_condition = Some(1e18);
        c.warp = 0.125;
        c.function = FunctionId::SinXPlusCosY;
        c.out = PathBuf::from("/tmp/x y");
        let back = ExperimentConfig::parse(&c.serialize(), None).unwrap();
        assert_eq!(back, c);
        let d = ExperimentConfig::new(Experiment::KernelStudy);
        assert_eq!(ExperimentConfig::parse(&d.serialize(), None).unwrap(), d);
    }

    #[test]
    fn comments_and_overrides() {
        let text = "# sweep\nexperiment = interp1d\n\nlevels = 4 # short\nscheme = eb\n";
        let c = ExperimentConfig::parse(text, Some(Experiment::SchemeCompare)).unwrap();
        assert_eq!(c.experiment, Experiment::SchemeCompare);
        assert_eq!((c.levels, c.scheme), (Some(4), Some(Scheme::Eb)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ExperimentConfig::parse("levels 3", Some(Experiment::Interp1d)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("colour = red", Some(Experiment::Interp1d)),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::parse("", None).is_err());
        let mut c = ExperimentConfig::new(Experiment::Interp1d);
        c.levels = Some(9);
        assert!(c.validate().is_err());
        c.levels = Some(2);
        c.n_gauss = Some(2);
        assert!(c.validate().is_err(), "Seg3 needs three points");
        c.n_gauss = Some(3);
        c.validate().unwrap();
        c.experiment = Experiment::InterpSurface;
        c.scheme = Some(Scheme::Sb1d);
        assert!(c.validate().is_err());
    }

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.tag().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!("poisson_2d".parse::<Experiment>().unwrap(), Experiment::Poisson2d);
    }
}
