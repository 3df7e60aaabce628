use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{BabOptions, BoundEstimator, SolverLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    TopK,
    Greedy,
    Bab,
    ProBab,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::TopK, Algorithm::Greedy, Algorithm::Bab, Algorithm::ProBab];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TopK => "topk",
            Algorithm::Greedy => "greedy",
            Algorithm::Bab => "bab",
            Algorithm::ProBab => "probab",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm '{s}' (expected topk, greedy, bab or probab)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format '{s}' (expected csv or json)"
            ))),
        }
    }
}

/// The parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    K,
    RumorSize,
    WalkLength,
    Alpha,
    Beta,
    Samples,
    Rho,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::RumorSize => "rumor_size",
            SweepAxis::WalkLength => "T",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Beta => "beta",
            SweepAxis::Samples => "samples",
            SweepAxis::Rho => "rho",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k" => SweepAxis::K,
            "rumor_size" | "rumor-size" | "R" => SweepAxis::RumorSize,
            "T" | "walk_length" | "walk-length" => SweepAxis::WalkLength,
            "alpha" => SweepAxis::Alpha,
            "beta" => SweepAxis::Beta,
            "samples" | "X" => SweepAxis::Samples,
            "rho" => SweepAxis::Rho,
            _ => return Err(Error::InvalidParameter(format!("unknown sweep axis '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    /// `AXIS=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (axis, list) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("sweep '{s}' is not of the form AXIS=v1,v2,...")))?;
        let axis = axis.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad sweep value '{v}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one value".into()));
        }
        Ok(Sweep { axis, values })
    }
}

/// Any subset of the experiment settings, as read from a config file or
/// from command-line flags. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub graph: Option<PathBuf>,
    pub directed: Option<bool>,
    pub algorithms: Option<Vec<String>>,
    pub k: Option<usize>,
    pub rumor_size: Option<usize>,
    pub rumor_seed: Option<u64>,
    #[serde(rename = "T")]
    pub walk_length: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub samples: Option<usize>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub certified_bounds: Option<bool>,
    pub node_cap: Option<usize>,
    pub time_cap: Option<f64>,
    pub sweep: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigLayer {
    /// Parses a `key = value` file (TOML syntax).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {}", path.display(), e.message())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigLayer { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            graph,
            directed,
            algorithms,
            k,
            rumor_size,
            rumor_seed,
            walk_length,
            alpha,
            beta,
            samples,
            rho,
            epsilon,
            delta,
            seed,
            repeats,
            certified_bounds,
            node_cap,
            time_cap,
            sweep,
            out,
            format
        )
    }
}

pub const DEFAULT_NODE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub directed: bool,
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    pub rumor_size: usize,
    pub rumor_seed: u64,
    pub walk_length: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Walks per node. Replaced by the Hoeffding size when `epsilon` and
    /// `delta` are both set.
    pub samples: usize,
    pub rho: f64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// Sampling seed of the first repeat; repeat `i` uses `seed + i`.
    pub seed: u64,
    pub repeats: usize,
    pub certified_bounds: bool,
    /// Branch-and-bound expansion cap; `None` is unlimited.
    pub node_cap: Option<usize>,
    pub time_cap: Option<Duration>,
    pub sweep: Option<Sweep>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(graph: impl Into<PathBuf>) -> Self {
        Self {
            graph: graph.into(),
            directed: false,
            algorithms: Algorithm::ALL.to_vec(),
            k: 150,
            rumor_size: 150,
            rumor_seed: 0,
            walk_length: 9,
            alpha: 7.0,
            beta: 3.0,
            samples: 1000,
            rho: 0.1,
            epsilon: None,
            delta: None,
            seed: 0,
            repeats: 1,
            certified_bounds: false,
            node_cap: Some(DEFAULT_NODE_CAP),
            time_cap: None,
            sweep: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }

    /// Defaults overlaid with `layer`. A node cap of 0 means unlimited.
    pub fn from_layer(layer: ConfigLayer) -> Result<Self> {
        let graph = layer
            .graph
            .ok_or_else(|| Error::InvalidParameter("no graph given".into()))?;
        let mut c = Self::new(graph);
        if let Some(v) = layer.directed {
            c.directed = v;
        }
        if let Some(names) = layer.algorithms {
            c.algorithms = names
                .iter()
                .flat_map(|n| n.split(','))
                .map(|n| n.trim().parse())
                .collect::<Result<_>>()?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = layer.$f { c.$f = v; })* };
        }
        set!(
            k,
            rumor_size,
            rumor_seed,
            walk_length,
            alpha,
            beta,
            samples,
            rho,
            seed,
            repeats,
            certified_bounds
        );
        c.epsilon = layer.epsilon;
        c.delta = layer.delta;
        if let Some(cap) = layer.node_cap {
            c.node_cap = (cap > 0).then_some(cap);
        }
        if let Some(secs) = layer.time_cap {
            if !(secs > 0.0 && secs.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "time cap must be positive, got {secs}"
                )));
            }
            c.time_cap = Some(Duration::from_secs_f64(secs));
        }
        c.sweep = layer.sweep.as_deref().map(str::parse).transpose()?;
        c.out = layer.out;
        if let Some(f) = layer.format {
            c.format = f.parse()?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.algorithms.is_empty() {
            return bad("no algorithm selected".into());
        }
        if self.k == 0 || self.rumor_size == 0 || self.walk_length == 0 || self.samples == 0 || self.repeats == 0 {
            return bad("k, rumor_size, T, samples and repeats must be positive".into());
        }
        if self.epsilon.is_some() != self.delta.is_some() {
            return bad("epsilon and delta must be given together".into());
        }
        crate::block::LogisticParams::new(self.alpha, self.beta)?;
        crate::solvers::check_rho(self.rho)?;
        if let Some(s) = &self.sweep {
            for &v in &s.values {
                self.at(s.axis, v)?;
            }
        }
        Ok(())
    }

    /// Copy with `axis` set to `value`.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value < 1e12 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidParameter(format!(
                    "sweep value {value} for {} must be a positive integer",
                    axis.name()
                )))
            }
        };
        let mut c = self.clone();
        match axis {
            SweepAxis::K => c.k = count()?,
            SweepAxis::RumorSize => c.rumor_size = count()?,
            SweepAxis::WalkLength => c.walk_length = count()?,
            SweepAxis::Samples => {
                c.samples = count()?;
                c.epsilon = None;
                c.delta = None;
            }
            SweepAxis::Alpha => c.alpha = value,
            SweepAxis::Beta => c.beta = value,
            SweepAxis::Rho => c.rho = value,
        }
        crate::block::LogisticParams::new(c.alpha, c.beta)?;
        crate::solvers::check_rho(c.rho)?;
        Ok(c)
    }

    /// Sweep points as `(axis, value)`; a single unlabelled point without a sweep.
    pub fn points(&self) -> Vec<Option<(SweepAxis, f64)>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some((s.axis, v))).collect(),
            None => vec![None],
        }
    }

    pub fn bab_options(&self, algorithm: Algorithm) -> Option<BabOptions> {
        let estimator = match algorithm {
            Algorithm::Bab => BoundEstimator::Greedy,
            Algorithm::ProBab => BoundEstimator::Progressive { rho: self.rho },
            _ => return None,
        };
        Some(BabOptions {
            estimator,
            limits: SolverLimits {
                budget: self.k,
                node_expansion_cap: self.node_cap,
                wall_time_cap: self.time_cap,
            },
            certified_epsilon: self.certified_bounds.then_some(0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_standard_setting() {
        let c = ExperimentConfig::new("g.txt");
        assert_eq!((c.k, c.rumor_size, c.walk_length, c.samples), (150, 150, 9, 1000));
        assert_eq!((c.alpha, c.beta, c.rho), (7.0, 3.0, 0.1));
    }

    #[test]
    fn flags_override_file() {
        let file: ConfigLayer = toml::from_str("graph = \"a.txt\"\nk = 10\nT = 4\nsweep = \"rho=0.1,1\"").unwrap();
        let flags = ConfigLayer {
            k: Some(20),
            algorithms: Some(vec!["greedy,topk".into()]),
            ..Default::default()
        };
        let c = ExperimentConfig::from_layer(file.merge(flags)).unwrap();
        assert_eq!(c.k, 20);
        assert_eq!(c.walk_length, 4);
        assert_eq!(c.algorithms, vec![Algorithm::Greedy, Algorithm::TopK]);
        assert_eq!(
            c.sweep,
            Some(Sweep {
                axis: SweepAxis::Rho,
                values: vec![0.1, 1.0]
            })
        );
    }

    #[test]
    fn rejects_bad_settings() {
        let base = || ConfigLayer {
            graph: Some("g".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::from_layer(ConfigLayer { graph: None, ..base() }).is_err());
        assert!(ExperimentConfig::from_layer(ConfigLayer {
            sweep: Some("k=1.5".into()),
            ..base()
        })
        .is_err());
        assert!(ExperimentConfig::from_layer(ConfigLayer {
            sweep: Some("q=1".into()),
            ..base()
        })
        .is_err());
        assert!(ExperimentConfig::from_layer(ConfigLayer {
            epsilon: Some(0.1),
            ..base()
        })
        .is_err());
        assert!(ExperimentConfig::from_layer(ConfigLayer {
            alpha: Some(-1.0),
            ..base()
        })
        .is_err());
        assert!(toml::from_str::<ConfigLayer>("colour = 1").is_err());
    }
}
