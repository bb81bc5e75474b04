//! Experiment configuration files (TOML) and their validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stein_core::bounds::Variant;
use stein_core::laws::{DiscreteLaw, IidGroup, IndependentSum};
use stein_core::math::{factorial, falling};
use stein_core::score::{center_for_cycle_type, center_for_uniform, random_raw};
use stein_core::size_bias::{LocalStatModel, WindowPayoff};
use stein_core::{CycleType, PermutationModel, ScoreArray};

use crate::io::read_array_csv;

/// Largest state count handled by enumeration-based checks.
pub const ORACLE_STATE_CAP: u128 = 1_000_000;
/// Largest exact law of an independent sum used by the oracle check.
pub const ORACLE_ATOM_CAP: usize = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    ZeroUniform,
    ZeroCycleType,
    ZeroIndependent,
    SizeLocal,
    SizeIndependent,
}

impl Construction {
    pub fn is_zero_bias(self) -> bool {
        matches!(self, Construction::ZeroUniform | Construction::ZeroCycleType | Construction::ZeroIndependent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Characterizing,
    Gap,
    Distance,
    Oracle,
    Linearity,
    Exchangeability,
    MomentIdentity,
    DeltaProxy,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Characterizing,
        CheckKind::Gap,
        CheckKind::Distance,
        CheckKind::Oracle,
        CheckKind::Linearity,
        CheckKind::Exchangeability,
        CheckKind::MomentIdentity,
        CheckKind::DeltaProxy,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    Main,
    HalfLine,
    Interval,
    Alt,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 4] = [BoundVariant::Main, BoundVariant::HalfLine, BoundVariant::Interval, BoundVariant::Alt];

    pub fn variant(self) -> Variant {
        match self {
            BoundVariant::Main => Variant::Main,
            BoundVariant::HalfLine => Variant::HalfLine,
            BoundVariant::Interval => Variant::Interval,
            BoundVariant::Alt => Variant::Alt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArraySpec {
    /// I.i.d. uniform(-1, 1) entries from the given seed.
    Random { seed: u64 },
    /// `n` rows of `n` comma-separated numbers; relative to the config file.
    Csv { path: PathBuf },
    Inline { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffSpec {
    Ascent,
    AllAbove,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub count: u64,
    /// `[value, probability]` pairs.
    pub atoms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Permutation {
        n: usize,
        /// `[length, count]` pairs; absent for the uniform law.
        #[serde(default)]
        cycle_type: Option<Vec<[usize; 2]>>,
        array: ArraySpec,
        /// Apply the centering matching the construction.
        #[serde(default = "yes")]
        center: bool,
    },
    Independent {
        groups: Vec<GroupSpec>,
    },
    Window {
        n: usize,
        m: usize,
        payoff: PayoffSpec,
        #[serde(default)]
        threshold: Option<f64>,
    },
    /// `pattern` is 1-based, e.g. `[1, 2]` for an ascent.
    PermPattern {
        n: usize,
        pattern: Vec<usize>,
    },
    TorusPattern {
        n: usize,
        p: usize,
        color_probs: Vec<f64>,
        target: Vec<usize>,
    },
    SubgraphCount {
        n: usize,
        p: usize,
        edge_prob: f64,
    },
    HypercubeMax {
        p: usize,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaSettings {
    pub outer: usize,
    pub inner: usize,
}

impl Default for DeltaSettings {
    fn default() -> Self {
        DeltaSettings { outer: 2000, inner: 8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write every draw to a binary spool file.
    #[serde(default)]
    pub spool: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted config path to the list of values it takes.
    pub parameters: BTreeMap<String, Vec<toml::Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub construction: Construction,
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to every check that applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckKind>>,
    /// Defaults to every variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<BoundVariant>>,
    /// Draws for the variance pre-pass when `σ²` cannot be enumerated.
    /// Defaults to `max(10 * replicates, 100000)` for zero-bias runs, whose
    /// identity check uses `σ²`, and to `max(replicates, 100000)` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_replicates: Option<u64>,
    /// Sampled `π` for the linearity check.
    #[serde(default = "default_linearity_reps")]
    pub linearity_reps: usize,
    pub model: ModelSpec,
    #[serde(default)]
    pub delta: DeltaSettings,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_linearity_reps() -> usize {
    10
}

/// A validated model ready for sampling.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Permutation { score: ScoreArray, model: PermutationModel },
    Independent(IndependentSum),
    Local(LocalStatModel),
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: BuiltModel,
    pub checks: Vec<CheckKind>,
    pub bounds: Vec<BoundVariant>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), source: Box::new(e) })
    }

    /// Reads a config; relative CSV paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_path_buf(), source: e })?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        if let ModelSpec::Permutation { array: ArraySpec::Csv { path: csv }, .. } = &mut cfg.model {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(cfg)
    }

    pub fn moment_reps(&self) -> u64 {
        let factor = if self.construction.is_zero_bias() { 10 } else { 1 };
        self.moment_replicates.unwrap_or((factor * self.replicates).max(100_000))
    }

    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        if self.id.trim().is_empty() {
            return Err(invalid("id", "must not be empty"));
        }
        if self.replicates < 1 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.moment_replicates == Some(0) || self.moment_replicates == Some(1) {
            return Err(invalid("moment_replicates", "must be at least 2"));
        }
        let model = self.build_model()?;
        let applicable = |c: CheckKind| self.check_applies(c, &model);
        let checks = match &self.checks {
            None => CheckKind::ALL.into_iter().filter(|&c| applicable(c).is_ok()).collect(),
            Some(list) => {
                let mut out: Vec<CheckKind> = Vec::new();
                for &c in list {
                    if out.contains(&c) {
                        return Err(invalid("checks", format!("{c:?} listed twice")));
                    }
                    applicable(c).map_err(|m| invalid("checks", m))?;
                    out.push(c);
                }
                out
            }
        };
        let bounds = self.bounds.clone().unwrap_or_else(|| BoundVariant::ALL.to_vec());
        if !bounds.is_empty() && self.construction == Construction::SizeIndependent {
            if let BuiltModel::Independent(sum) = &model {
                if sum.groups.len() != 1 {
                    return Err(invalid("bounds", "size-independent bounds need a single i.i.d. group"));
                }
            }
        }
        if self.delta.outer < 2 || self.delta.inner < 1 {
            return Err(invalid("delta", "outer must be at least 2 and inner at least 1"));
        }
        Ok(Experiment { config: self.clone(), model, checks, bounds })
    }

    fn check_applies(&self, check: CheckKind, model: &BuiltModel) -> Result<(), String> {
        let c = self.construction;
        let ok = match check {
            CheckKind::Characterizing => self.replicates >= 2,
            CheckKind::Gap | CheckKind::Distance => true,
            CheckKind::Oracle => match model {
                BuiltModel::Permutation { model, .. } => pair_state_count(model).is_some_and(|s| s <= ORACLE_STATE_CAP),
                BuiltModel::Independent(sum) => sum.exact_law(ORACLE_ATOM_CAP).is_some(),
                BuiltModel::Local(m) => local_state_count(m).is_some_and(|s| s <= ORACLE_STATE_CAP),
            },
            CheckKind::Linearity => matches!(model, BuiltModel::Permutation { .. }),
            CheckKind::Exchangeability | CheckKind::MomentIdentity => match model {
                BuiltModel::Permutation { model, .. } => pair_state_count(model).is_some_and(|s| s <= ORACLE_STATE_CAP),
                _ => false,
            },
            CheckKind::DeltaProxy => c == Construction::SizeLocal,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("check {check:?} does not apply to this construction and model size"))
        }
    }

    fn build_model(&self) -> Result<BuiltModel, ConfigError> {
        let c = self.construction;
        match (&self.model, c) {
            (ModelSpec::Permutation { n, cycle_type, array, center }, Construction::ZeroUniform | Construction::ZeroCycleType) => {
                let raw = match array {
                    ArraySpec::Random { seed } => random_raw(*n, &mut stein_core::rng::substream(*seed, 0)),
                    ArraySpec::Csv { path } => read_array_csv(path).map_err(|e| invalid("model.array.path", e.to_string()))?,
                    ArraySpec::Inline { rows } => rows.clone(),
                };
                if raw.len() != *n || raw.iter().any(|r| r.len() != *n) {
                    return Err(invalid("model.array", format!("expected a {n}x{n} array")));
                }
                let model = match (c, cycle_type) {
                    (Construction::ZeroUniform, None) => {
                        PermutationModel::uniform(*n).map_err(|e| invalid("model.n", e.to_string()))?
                    }
                    (Construction::ZeroCycleType, Some(pairs)) => {
                        let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p[0], p[1])).collect();
                        let ct = CycleType::from_pairs(&pairs).map_err(|e| invalid("model.cycle_type", e.to_string()))?;
                        if ct.n() != *n {
                            return Err(invalid("model.cycle_type", format!("cycle lengths sum to {}, not n = {n}", ct.n())));
                        }
                        PermutationModel::fixed_cycle_type(ct).map_err(|e| invalid("model.cycle_type", e.to_string()))?
                    }
                    (Construction::ZeroUniform, Some(_)) => {
                        return Err(invalid("model.cycle_type", "zero-uniform takes no cycle type"))
                    }
                    _ => return Err(invalid("model.cycle_type", "zero-cycle-type needs a cycle type")),
                };
                let score = if *center {
                    match c {
                        Construction::ZeroUniform => center_for_uniform(&raw),
                        _ => center_for_cycle_type(&raw),
                    }
                } else {
                    ScoreArray::from_rows(&raw)
                }
                .map_err(|e| invalid("model.array", e.to_string()))?;
                Ok(BuiltModel::Permutation { score, model })
            }
            (ModelSpec::Independent { groups }, Construction::ZeroIndependent | Construction::SizeIndependent) => {
                if groups.is_empty() {
                    return Err(invalid("model.groups", "need at least one group"));
                }
                let mut built = Vec::with_capacity(groups.len());
                for (k, g) in groups.iter().enumerate() {
                    let atoms: Vec<(f64, f64)> = g.atoms.iter().map(|a| (a[0], a[1])).collect();
                    let law = DiscreteLaw::new(&atoms).map_err(|e| invalid(&format!("model.groups[{k}]"), e.to_string()))?;
                    built.push(IidGroup { law, count: g.count });
                }
                let sum = IndependentSum::new(built).map_err(|e| invalid("model.groups", e.to_string()))?;
                match c {
                    Construction::ZeroIndependent => {
                        if sum.mean().abs() > 1e-12 {
                            return Err(invalid("model.groups", "zero-independent needs mean-zero summands"));
                        }
                    }
                    _ => {
                        if sum.groups.iter().any(|g| !g.law.is_nonnegative()) {
                            return Err(invalid("model.groups", "size-independent needs non-negative summands"));
                        }
                    }
                }
                if !(sum.variance() > 0.0) {
                    return Err(invalid("model.groups", "the sum has zero variance"));
                }
                Ok(BuiltModel::Independent(sum))
            }
            (spec, Construction::SizeLocal) => {
                let m = match spec {
                    ModelSpec::Window { n, m, payoff, threshold } => {
                        let payoff = match (payoff, threshold) {
                            (PayoffSpec::Ascent, None) => WindowPayoff::Ascent,
                            (PayoffSpec::Mean, None) => WindowPayoff::Mean,
                            (PayoffSpec::AllAbove, Some(t)) => WindowPayoff::AllAbove(*t),
                            (PayoffSpec::AllAbove, None) => {
                                return Err(invalid("model.threshold", "all-above payoff needs a threshold"))
                            }
                            _ => return Err(invalid("model.threshold", "only the all-above payoff takes a threshold")),
                        };
                        LocalStatModel::window(*n, *m, payoff)
                    }
                    ModelSpec::PermPattern { n, pattern } => {
                        if pattern.contains(&0) {
                            return Err(invalid("model.pattern", "pattern entries are 1-based"));
                        }
                        LocalStatModel::perm_pattern(*n, pattern.iter().map(|v| v - 1).collect())
                    }
                    ModelSpec::TorusPattern { n, p, color_probs, target } => {
                        LocalStatModel::torus_pattern(*n, *p, color_probs.clone(), target.clone())
                    }
                    ModelSpec::SubgraphCount { n, p, edge_prob } => LocalStatModel::subgraph_count(*n, *p, *edge_prob),
                    ModelSpec::HypercubeMax { p } => LocalStatModel::hypercube_max(*p),
                    _ => return Err(invalid("model.kind", "size-local needs a local model")),
                }
                .map_err(|e| invalid("model", e.to_string()))?;
                Ok(BuiltModel::Local(m))
            }
            _ => Err(invalid("construction", format!("{c:?} does not fit the model kind"))),
        }
    }
}

/// `|support| * n(n-1)` for the pair law, when it fits.
pub fn pair_state_count(model: &PermutationModel) -> Option<u128> {
    let n = model.n();
    model.support_size()?.checked_mul((n * (n - 1)) as u128)
}

/// Number of underlying states of an enumerable local model.
pub fn local_state_count(model: &LocalStatModel) -> Option<u128> {
    match model {
        LocalStatModel::PermPattern { n, .. } => factorial(*n),
        LocalStatModel::TorusPattern { color_probs, .. } => {
            (color_probs.len() as u128).checked_pow(u32::try_from(model.state_len()).ok()?)
        }
        LocalStatModel::SubgraphCount { .. } => 2u128.checked_pow(u32::try_from(model.state_len()).ok()?),
        _ => None,
    }
}

/// `n!` or the class size, used for reporting only.
pub fn support_size(model: &PermutationModel) -> Option<u128> {
    match model {
        PermutationModel::Uniform { n } => falling(*n, *n),
        PermutationModel::FixedCycleType(ct) => ct.class_size(),
    }
}
