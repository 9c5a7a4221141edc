//! Command-line arguments, the `key = value` config file, and the resolved
//! run configuration. Flags override the file, which overrides defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mobility_loci::loci::FdrMethod;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mobility-loci", version, about = "Find mobility loci in commuting graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate the graph and write its components, degrees and weight histogram.
    Build(RunArgs),
    /// Solve for the stationary distribution of the selected component.
    Stationary(RunArgs),
    /// Run the permutation test and the max-k loci selection.
    Loci(RunArgs),
    /// Compute comparison features and their association with the stationary distribution.
    Features(RunArgs),
    /// Run every stage.
    Report(RunArgs),
}

impl Command {
    pub fn split(self) -> (Stage, RunArgs) {
        match self {
            Command::Build(a) => (Stage::Build, a),
            Command::Stationary(a) => (Stage::Stationary, a),
            Command::Loci(a) => (Stage::Loci, a),
            Command::Features(a) => (Stage::Features, a),
            Command::Report(a) => (Stage::Report, a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Build,
    Stationary,
    Loci,
    Features,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Build => "build",
            Stage::Stationary => "stationary",
            Stage::Loci => "loci",
            Stage::Features => "features",
            Stage::Report => "report",
        })
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// `key = value` file supplying defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input file; repeat for several. Trajectory files are concatenated.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Input format; detected from the header line when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionChoice>,
    /// `largest` or a component index (0 is the largest).
    #[arg(long)]
    pub component: Option<ComponentSelector>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of permutation replicates.
    #[arg(long, alias = "B")]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stationary solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Visit every weight permutation instead of sampling.
    #[arg(long)]
    pub enumerate: bool,
    #[arg(long)]
    pub fdr: Option<FdrMethod>,
    /// Worker threads for the permutation test.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Edge-weight histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Vertex count above which the stationary solver iterates.
    #[arg(long)]
    pub direct_threshold: Option<usize>,
    /// Also write the null samples as `null.bin`.
    #[arg(long)]
    pub save_null: bool,
    /// Reuse null samples written by `--save-null`.
    #[arg(long)]
    pub load_null: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Traj,
    Edges,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionChoice {
    #[default]
    Morning,
    Evening,
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ComponentSelector {
    #[default]
    Largest,
    Index(usize),
}

impl ComponentSelector {
    pub fn index(self) -> usize {
        match self {
            ComponentSelector::Largest => 0,
            ComponentSelector::Index(i) => i,
        }
    }
}

impl FromStr for ComponentSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "largest" => Ok(ComponentSelector::Largest),
            other => other
                .parse()
                .map(ComponentSelector::Index)
                .map_err(|_| format!("expected `largest` or an index, got {other:?}")),
        }
    }
}

impl fmt::Display for ComponentSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSelector::Largest => f.write_str("largest"),
            ComponentSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

impl Serialize for ComponentSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub format: Option<InputFormat>,
    pub direction: DirectionChoice,
    pub component: ComponentSelector,
    pub alpha: f64,
    pub permutations: usize,
    pub seed: Option<u64>,
    pub tol: f64,
    pub out: PathBuf,
    pub enumerate: bool,
    pub fdr: FdrMethod,
    pub workers: Option<usize>,
    pub bins: usize,
    pub direct_threshold: usize,
    pub save_null: bool,
    pub load_null: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            inputs,
            format: None,
            direction: DirectionChoice::Morning,
            component: ComponentSelector::Largest,
            alpha: 0.05,
            permutations: 1000,
            seed: None,
            tol: 1e-10,
            out: out.into(),
            enumerate: false,
            fdr: FdrMethod::Bh,
            workers: None,
            bins: 20,
            direct_threshold: 20_000,
            save_null: false,
            load_null: None,
        }
    }

    /// Merges flags over the optional config file over defaults.
    pub fn resolve(args: RunArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let inputs = if !args.input.is_empty() {
            args.input
        } else {
            file.paths("input")
        };
        let mut cfg = RunConfig::new(inputs, PathBuf::from("out"));
        macro_rules! layer {
            ($field:ident, $key:literal) => {
                if let Some(v) = file.parsed($key)? {
                    cfg.$field = v;
                }
                if let Some(v) = args.$field {
                    cfg.$field = v;
                }
            };
        }
        layer!(direction, "direction");
        layer!(component, "component");
        layer!(alpha, "alpha");
        layer!(permutations, "permutations");
        layer!(tol, "tol");
        layer!(fdr, "fdr");
        layer!(bins, "bins");
        layer!(direct_threshold, "direct-threshold");
        cfg.format = args.format.or(file.parsed("format")?);
        cfg.seed = args.seed.or(file.parsed("seed")?);
        cfg.workers = args.workers.or(file.parsed("workers")?);
        cfg.out = args.out.or_else(|| file.path("out")).unwrap_or(cfg.out);
        cfg.load_null = args.load_null.or_else(|| file.path("load-null"));
        cfg.enumerate = args.enumerate || file.parsed("enumerate")?.unwrap_or(false);
        cfg.save_null = args.save_null || file.parsed("save-null")?.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.inputs.is_empty() {
            bail!("no input files given (use --input)");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.permutations == 0 {
            bail!("at least one permutation is required");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tolerance must be positive, got {}", self.tol);
        }
        if self.workers == Some(0) {
            bail!("worker count must be positive");
        }
        if self.bins == 0 {
            bail!("histogram needs at least one bin");
        }
        if self.load_null.is_some() && self.direction == DirectionChoice::Both {
            bail!("--load-null holds one direction; pick --direction morning or evening");
        }
        Ok(())
    }
}

/// Parsed `key = value` lines. Keys may use `-` or `_`; `#` starts a
/// comment line; `input` may repeat. Relative paths are taken from the
/// file's directory.
#[derive(Debug, Default)]
struct ConfigFile {
    base: PathBuf,
    values: BTreeMap<String, Vec<String>>,
}

const KNOWN_KEYS: [&str; 16] = [
    "input",
    "format",
    "direction",
    "component",
    "alpha",
    "permutations",
    "seed",
    "tol",
    "out",
    "enumerate",
    "fdr",
    "workers",
    "bins",
    "direct-threshold",
    "save-null",
    "load-null",
];

impl ConfigFile {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn parse(text: &str) -> anyhow::Result<Self> {
        let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key {key:?}", i + 1);
            }
            let value = value.trim().trim_matches('"').to_string();
            let slot = values.entry(key.clone()).or_default();
            if !slot.is_empty() && key != "input" {
                bail!("line {}: {key:?} given twice", i + 1);
            }
            slot.push(value);
        }
        Ok(ConfigFile {
            base: PathBuf::new(),
            values,
        })
    }

    fn parsed<T>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.values.get(key).and_then(|v| v.first()) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key {key:?}: {e}")),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.paths(key).into_iter().next()
    }

    fn paths(&self, key: &str) -> Vec<PathBuf> {
        self.values
            .get(key)
            .map(|v| v.iter().map(|p| self.base.join(p)).collect())
            .unwrap_or_default()
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}

impl FromStr for DirectionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}
