//! Benchmark configuration.
//!
//! The file format is flat `key = value` text; `#` starts a comment. Lists
//! are comma-separated, except `datasets`, which is whitespace-separated
//! because dataset specs may contain commas. Command-line overrides use the
//! same keys through [`RunConfig::apply`].
//!
//! ```text
//! datasets      = karate karate-d:3 two-community:1000:0.02:0.002:7
//! algorithms    = enumerate, s-greedy, i-greedy, sdp-relax, glover
//! k             = 0.1n, 0.2n, 5
//! seeds         = 1-10
//! iterations    = 100
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use divmax_core::exact::DEFAULT_ENUMERATION_LIMIT;
use divmax_core::report::Algorithm;
use divmax_core::{BoundKind, SdpConfig};

use crate::error::{read_file, HarnessError, Result};

/// Budget as an absolute value or as a fraction of the node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSpec {
    Absolute(f64),
    Fraction(f64),
}

impl KSpec {
    /// `floor(fraction · n)` for fractions.
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            KSpec::Absolute(k) => k,
            KSpec::Fraction(f) => (f * n as f64).floor(),
        }
    }
}

impl FromStr for KSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || HarnessError::Config(format!("invalid k '{s}' (use e.g. 3 or 0.1n)"));
        let spec = match t.strip_suffix('n') {
            Some("") => KSpec::Fraction(1.0),
            Some(f) => KSpec::Fraction(f.trim_end_matches('*').parse().map_err(|_| bad())?),
            None => KSpec::Absolute(t.parse().map_err(|_| bad())?),
        };
        match spec {
            KSpec::Absolute(v) | KSpec::Fraction(v) if !(v.is_finite() && v >= 0.0) => Err(bad()),
            _ => Ok(spec),
        }
    }
}

impl fmt::Display for KSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSpec::Absolute(k) => write!(f, "{k}"),
            KSpec::Fraction(x) => write!(f, "{x}n"),
        }
    }
}

/// Where a benchmark instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Karate,
    /// Karate graph with exposures drawn from the seed.
    KarateRandom(u64),
    TwoCommunity { n: usize, p_in: f64, p_out: f64, seed: u64 },
    SubsetSum { items: Vec<u64>, target: u64 },
    Files { edges: PathBuf, exposure: PathBuf, costs: Option<PathBuf> },
}

impl DatasetSpec {
    /// Label used in report rows.
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Files { edges, .. } => {
                edges.file_stem().map_or_else(|| edges.display().to_string(), |s| s.to_string_lossy().into_owned())
            }
            other => other.to_string(),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Karate => f.write_str("karate"),
            DatasetSpec::KarateRandom(seed) => write!(f, "karate-d:{seed}"),
            DatasetSpec::TwoCommunity { n, p_in, p_out, seed } => write!(f, "two-community:{n}:{p_in}:{p_out}:{seed}"),
            DatasetSpec::SubsetSum { items, target } => {
                let items: Vec<String> = items.iter().map(u64::to_string).collect();
                write!(f, "subsetsum:{}:{target}", items.join(","))
            }
            DatasetSpec::Files { edges, exposure, costs } => {
                write!(f, "files:{}:{}", edges.display(), exposure.display())?;
                if let Some(c) = costs {
                    write!(f, ":{}", c.display())?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| HarnessError::Config(format!("dataset '{s}': {why}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number")));
        let int = |t: &str| t.parse::<u64>().map_err(|_| bad(&format!("'{t}' is not an integer")));
        match parts.as_slice() {
            ["karate"] => Ok(DatasetSpec::Karate),
            ["karate-d", seed] => Ok(DatasetSpec::KarateRandom(int(seed)?)),
            ["two-community", n, p_in, p_out, seed] => Ok(DatasetSpec::TwoCommunity {
                n: int(n)? as usize,
                p_in: num(p_in)?,
                p_out: num(p_out)?,
                seed: int(seed)?,
            }),
            ["subsetsum", items, target] => Ok(DatasetSpec::SubsetSum {
                items: items.split(',').map(|t| int(t.trim())).collect::<Result<_>>()?,
                target: int(target)?,
            }),
            ["files", edges, exposure] => {
                Ok(DatasetSpec::Files { edges: edges.into(), exposure: exposure.into(), costs: None })
            }
            ["files", edges, exposure, costs] => Ok(DatasetSpec::Files {
                edges: edges.into(),
                exposure: exposure.into(),
                costs: Some(costs.into()),
            }),
            _ => Err(bad(
                "expected karate, karate-d:SEED, two-community:N:P_IN:P_OUT:SEED, subsetsum:M1,M2,..:TARGET \
                 or files:EDGES:EXPOSURE[:COSTS]",
            )),
        }
    }
}

/// Cost source for datasets that do not bring their own.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CostMode {
    #[default]
    Unit,
    /// `id cost` file applied to every dataset.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            _ => Err(HarnessError::Config(format!("unknown format '{s}' (csv, json, markdown)"))),
        }
    }
}

/// Solver settings shared by `solve` and `bench`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Local-search rounds for i-greedy and for rounding polish.
    pub iterations: usize,
    pub polish: bool,
    /// Rounding samples for the relaxation pipelines.
    pub samples: usize,
    /// Pruning bound for branch and bound; `None` disables pruning.
    pub bnb_bound: Option<BoundKind>,
    pub time_limit: Option<Duration>,
    pub enumeration_limit: u64,
    pub sdp: SdpConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            iterations: 100,
            polish: true,
            samples: 100,
            bnb_bound: Some(BoundKind::Rowsum),
            time_limit: None,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            sdp: SdpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<Algorithm>,
    pub ks: Vec<KSpec>,
    pub costs: CostMode,
    pub seeds: Vec<u64>,
    pub format: OutputFormat,
    /// Fill the runtime column; off gives byte-identical reruns.
    pub record_timing: bool,
    pub options: SolveOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: vec![DatasetSpec::Karate],
            algorithms: Algorithm::ALL.to_vec(),
            ks: vec![KSpec::Fraction(0.1)],
            costs: CostMode::Unit,
            seeds: vec![1],
            format: OutputFormat::Csv,
            record_timing: true,
            options: SolveOptions::default(),
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected true or false, found '{value}'"))),
    }
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let bad = |t: &str| HarnessError::Config(format!("seeds: invalid entry '{t}'"));
    let mut seeds = Vec::new();
    for t in list(value) {
        match t.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad(t))?, b.trim().parse().map_err(|_| bad(t))?);
                if a > b {
                    return Err(bad(t));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(t.parse().map_err(|_| bad(t))?),
        }
    }
    Ok(seeds)
}

impl RunConfig {
    /// Defaults overridden by the keys in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Parse {
                    source_name: "config".into(),
                    line: no + 1,
                    message: format!("expected 'key = value', found '{line}'"),
                })?;
            cfg.apply(key, value).map_err(|e| HarnessError::Parse {
                source_name: "config".into(),
                line: no + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&read_file(path)?)
    }

    /// Sets one key; later calls override earlier ones.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        let cfg_err = |msg: String| HarnessError::Config(msg);
        let count = |v: &str| v.parse::<usize>().map_err(|_| cfg_err(format!("{key}: '{v}' is not a count")));
        match key.as_str() {
            "datasets" | "dataset" => {
                self.datasets = value.split_whitespace().map(str::parse).collect::<Result<_>>()?;
            }
            "algorithms" | "algorithm" => {
                self.algorithms = list(value).map(|t| t.parse().map_err(cfg_err)).collect::<Result<_>>()?;
            }
            "k" => self.ks = list(value).map(str::parse).collect::<Result<_>>()?,
            "costs" => {
                self.costs = match value {
                    "unit" => CostMode::Unit,
                    path => CostMode::File(path.strip_prefix("file:").unwrap_or(path).into()),
                }
            }
            "seeds" | "seed" => self.seeds = parse_seeds(value)?,
            "format" => self.format = value.parse()?,
            "record_timing" => self.record_timing = parse_bool(&key, value)?,
            "iterations" => self.options.iterations = count(value)?,
            "polish" => self.options.polish = parse_bool(&key, value)?,
            "samples" => self.options.samples = count(value)?,
            "bound" | "bnb_bound" => {
                self.options.bnb_bound = match value {
                    "none" => None,
                    v => Some(v.parse().map_err(|e: String| cfg_err(format!("{key}: {e}")))?),
                }
            }
            "time_limit" => {
                self.options.time_limit = match value {
                    "none" | "" => None,
                    v => {
                        let secs: f64 = v.parse().map_err(|_| cfg_err(format!("time_limit: '{v}' is not seconds")))?;
                        if !(secs.is_finite() && secs >= 0.0) {
                            return Err(cfg_err(format!("time_limit: '{v}' is not seconds")));
                        }
                        Some(Duration::from_secs_f64(secs))
                    }
                }
            }
            "enumeration_limit" => {
                self.options.enumeration_limit =
                    value.parse().map_err(|_| cfg_err(format!("enumeration_limit: '{value}' is not a count")))?
            }
            "sdp_tol" => {
                self.options.sdp.tol =
                    value.parse().map_err(|_| cfg_err(format!("sdp_tol: '{value}' is not a number")))?
            }
            "sdp_max_iters" => self.options.sdp.max_iters = count(value)?,
            _ => return Err(cfg_err(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_resolution_floors() {
        assert_eq!("0.1n".parse::<KSpec>().unwrap().resolve(34), 3.0);
        assert_eq!("0.2n".parse::<KSpec>().unwrap().resolve(34), 6.0);
        assert_eq!("n".parse::<KSpec>().unwrap().resolve(34), 34.0);
        assert_eq!("7".parse::<KSpec>().unwrap().resolve(34), 7.0);
        assert!("-1".parse::<KSpec>().is_err());
        assert!("xn".parse::<KSpec>().is_err());
    }

    #[test]
    fn dataset_specs_round_trip() {
        for s in ["karate", "karate-d:4", "two-community:100:0.1:0.01:3", "subsetsum:1,2:3", "files:a.e:a.x:a.c"] {
            assert_eq!(s.parse::<DatasetSpec>().unwrap().to_string(), s);
        }
        assert_eq!("files:dir/books.edges:b.x".parse::<DatasetSpec>().unwrap().name(), "books");
        assert!("karate:3".parse::<DatasetSpec>().is_err());
    }

    #[test]
    fn parse_and_override() {
        let text = "# sweep\ndatasets = karate karate-d:2\nalgorithms = s-greedy, i-greedy\nk = 0.1n, 7\nseeds = 1-3, 9\n\
                    polish = false\ntime_limit = 1.5\nformat = md\nrecord_timing = no\n";
        let mut cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.datasets.len(), 2);
        assert_eq!(cfg.algorithms, vec![Algorithm::SGreedy, Algorithm::IGreedy]);
        assert_eq!(cfg.ks, vec![KSpec::Fraction(0.1), KSpec::Absolute(7.0)]);
        assert_eq!(cfg.seeds, vec![1, 2, 3, 9]);
        assert!(!cfg.options.polish && !cfg.record_timing);
        assert_eq!(cfg.options.time_limit, Some(Duration::from_millis(1500)));
        assert_eq!(cfg.format, OutputFormat::Markdown);
        cfg.apply("seeds", "5").unwrap();
        assert_eq!(cfg.seeds, vec![5]);
        cfg.apply("algorithms", "").unwrap();
        assert!(cfg.algorithms.is_empty());
    }

    #[test]
    fn config_errors_carry_lines() {
        assert!(matches!(RunConfig::parse("k = 3\nbogus = 1\n"), Err(HarnessError::Parse { line: 2, .. })));
        assert!(matches!(RunConfig::parse("no equals sign\n"), Err(HarnessError::Parse { line: 1, .. })));
        assert!(RunConfig::parse("seeds = 5-2\n").is_err());
    }
}
