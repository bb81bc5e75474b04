//! The experiment pipeline: moments, draws, bounds and checks.
//!
//! Replicate `r` always draws from `substream(seed, r)`. Draws are produced
//! in fixed-size chunks on the rayon pool and concatenated in chunk order,
//! so every statistic is independent of the thread count.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stein_core::bounds::{
    combinatorial_bound, local_bound_inputs, size_bias_bound, zero_bias_bound, BoundReport, ClassKind, SmoothnessClass,
    Variant,
};
use stein_core::laws::{DiscreteLaw, IndependentSum};
use stein_core::rng::substream;
use stein_core::score::{exact_moments, MomentMethod, MomentSummary};
use stein_core::size_bias::{
    delta_exact, delta_proxy_estimate, size_bias_discrete_oracle, DeltaProxy, ExactDelta, IndependentSizeBias,
    LocalStatModel, SizeBiasSampler,
};
use stein_core::verify::{
    delta_vs_bound, exchangeability_check, interval_distance, kolmogorov_against, kolmogorov_distance,
    linearity_check, moment_identity_check, CheckReport, DistanceEstimate, GapAccumulator, Metric,
    SizeBiasAccumulator, ZeroBiasAccumulator, Z_THRESHOLD,
};
use stein_core::zero_bias::{
    enumerate_pair_law, square_bias_oracle, CycleTypeZeroBias, ExchangeablePairSpec, IndependentZeroBias,
    SquareBiasLaw, UniformZeroBias, RECORD_FIELDS,
};
use stein_core::PermutationModel;

use crate::config::{
    local_state_count, BuiltModel, CheckKind, ConfigError, Construction, Experiment, ExperimentConfig,
    ORACLE_ATOM_CAP, ORACLE_STATE_CAP,
};
use crate::gof::{chi_square, ChiSquare};
use crate::spool::{encode, SpoolError, SpoolWriter, PAIR_FIELDS};

/// Replicates per parallel work item.
pub const CHUNK: u64 = 4096;
/// Stream offsets for the auxiliary computations.
pub const MOMENT_STREAM: u64 = 1 << 62;
pub const LINEARITY_STREAM: u64 = (1 << 62) + (1 << 61);
pub const DELTA_STREAM: u64 = 1 << 63;
/// Significance level of the oracle goodness-of-fit checks.
pub const ORACLE_ALPHA: f64 = 0.001;
/// Largest support enumerated for exact moments.
pub const MOMENT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core { context: String, source: stein_core::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Spool(#[from] SpoolError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn core(context: &str) -> impl FnOnce(stein_core::Error) -> RunError + '_ {
    move |source| RunError::Core { context: context.into(), source }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
    pub threads: Option<usize>,
    /// Where to write the spool; `None` skips it unless the config asks.
    pub spool_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        cfg
    }
}

/// A bound together with the test-function class it was evaluated for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedBound {
    pub class: ClassKind,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub proxy: DeltaProxy,
    pub bound: f64,
    pub exact: Option<ExactDelta>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub moments_ms: f64,
    pub sampling_ms: f64,
    pub checks_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub id: String,
    pub construction: Construction,
    pub seed: u64,
    pub replicates: u64,
    pub config: ExperimentConfig,
    /// Mean and variance of `Y`.
    pub moments: MomentSummary,
    /// Known mean used to standardize `Y`.
    pub mu: f64,
    pub sigma: f64,
    pub gap_bound: f64,
    pub distances: Vec<DistanceEstimate>,
    pub bounds: Vec<EvaluatedBound>,
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spool: Option<PathBuf>,
    pub passed: bool,
    pub timings: Timings,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// JSON with the timing block zeroed, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> Result<String, serde_json::Error> {
        let mut r = self.clone();
        r.timings = Timings::default();
        serde_json::to_string_pretty(&r)
    }
}

enum Sampler {
    Uniform(UniformZeroBias),
    Cycle(CycleTypeZeroBias),
    IndependentZero(IndependentZeroBias),
    IndependentSize(IndependentSizeBias),
    Local(SizeBiasSampler),
}

struct Draw {
    y: f64,
    partner: f64,
    gap: f64,
    pair: Option<(f64, f64)>,
    record: Option<[f64; RECORD_FIELDS]>,
}

impl Sampler {
    fn build(exp: &Experiment) -> Result<Self, RunError> {
        let bad = |e: stein_core::Error| RunError::Config(ConfigError::Invalid { field: "model".into(), message: e.to_string() });
        Ok(match (&exp.model, exp.config.construction) {
            (BuiltModel::Permutation { score, .. }, Construction::ZeroUniform) => {
                Sampler::Uniform(UniformZeroBias::new(score.clone()).map_err(bad)?)
            }
            (BuiltModel::Permutation { score, model: PermutationModel::FixedCycleType(ct) }, Construction::ZeroCycleType) => {
                Sampler::Cycle(CycleTypeZeroBias::new(score.clone(), ct.clone()).map_err(bad)?)
            }
            (BuiltModel::Independent(sum), Construction::ZeroIndependent) => {
                Sampler::IndependentZero(IndependentZeroBias::new(sum.clone()).map_err(bad)?)
            }
            (BuiltModel::Independent(sum), Construction::SizeIndependent) => {
                Sampler::IndependentSize(IndependentSizeBias::new(sum.clone()).map_err(bad)?)
            }
            (BuiltModel::Local(m), Construction::SizeLocal) => Sampler::Local(SizeBiasSampler::new(m.clone()).map_err(bad)?),
            _ => unreachable!("validated configuration"),
        })
    }

    fn gap_bound(&self) -> f64 {
        match self {
            Sampler::Uniform(s) => 2.0 * s.gap_half_bound(),
            Sampler::Cycle(s) => 2.0 * s.gap_half_bound(),
            Sampler::IndependentZero(s) => s.sum().max_summand_range(),
            Sampler::IndependentSize(s) => s.sum().max_summand_range(),
            Sampler::Local(s) => s.gap_bound(),
        }
    }

    fn draw(&self, rng: &mut stein_core::rng::SeedStream) -> Result<Draw, RunError> {
        let full = |d: stein_core::zero_bias::ZeroBiasDraw| Draw {
            y: d.y,
            partner: d.y_star,
            gap: d.gap,
            pair: Some((d.y_dagger, d.y_ddagger)),
            record: Some(d.to_record()),
        };
        Ok(match self {
            Sampler::Uniform(s) => full(s.draw(rng).map_err(core("uniform draw"))?),
            Sampler::Cycle(s) => full(s.draw(rng).map_err(core("cycle-type draw"))?),
            Sampler::IndependentZero(s) => {
                let d = s.draw(rng);
                Draw { y: d.y, partner: d.y_star, gap: d.gap(), pair: None, record: None }
            }
            Sampler::IndependentSize(s) => {
                let d = s.draw(rng);
                Draw { y: d.y, partner: d.y_s, gap: (d.y_s - d.y).abs(), pair: None, record: None }
            }
            Sampler::Local(s) => {
                let d = s.draw(rng).map_err(core("size-bias draw"))?;
                Draw { y: d.y, partner: d.y_s, gap: d.gap, pair: None, record: None }
            }
        })
    }

    fn record_fields(&self) -> usize {
        match self {
            Sampler::Uniform(_) | Sampler::Cycle(_) => RECORD_FIELDS,
            _ => PAIR_FIELDS.len(),
        }
    }
}

#[derive(Default)]
struct Chunk {
    ys: Vec<f64>,
    partners: Vec<f64>,
    gaps: Vec<f64>,
    pairs: Vec<(f64, f64)>,
    spool: Vec<u8>,
}

/// All draws of a run, in replicate order.
pub struct DrawSet {
    pub ys: Vec<f64>,
    /// `Y*` or `Yˢ`.
    pub partners: Vec<f64>,
    pub gaps: Vec<f64>,
    /// `(Y†, Y‡)` for the permutation constructions.
    pub pairs: Vec<(f64, f64)>,
    pub gap_bound: f64,
}

fn chunks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total))).collect()
}

fn sample_all(sampler: &Sampler, seed: u64, total: u64, spool: bool) -> Result<(DrawSet, Vec<u8>), RunError> {
    let parts: Vec<Result<Chunk, RunError>> = chunks(total)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut c = Chunk::default();
            for r in lo..hi {
                let mut rng = substream(seed, r);
                let d = sampler.draw(&mut rng)?;
                c.ys.push(d.y);
                c.partners.push(d.partner);
                c.gaps.push(d.gap);
                if let Some(p) = d.pair {
                    c.pairs.push(p);
                }
                if spool {
                    match d.record {
                        Some(rec) => encode(&rec, &mut c.spool),
                        None => encode(&[d.y, d.partner, d.gap], &mut c.spool),
                    }
                }
            }
            Ok(c)
        })
        .collect();
    let mut set = DrawSet {
        ys: Vec::with_capacity(total as usize),
        partners: Vec::with_capacity(total as usize),
        gaps: Vec::with_capacity(total as usize),
        pairs: Vec::new(),
        gap_bound: sampler.gap_bound(),
    };
    let mut bytes = Vec::new();
    for part in parts {
        let c = part?;
        set.ys.extend(c.ys);
        set.partners.extend(c.partners);
        set.gaps.extend(c.gaps);
        set.pairs.extend(c.pairs);
        bytes.extend(c.spool);
    }
    Ok((set, bytes))
}

/// Parallel Monte Carlo draws of `Y` alone.
fn sample_y<F>(seed: u64, total: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut stein_core::rng::SeedStream) -> f64 + Sync,
{
    let parts: Vec<Vec<f64>> = chunks(total)
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).map(|r| f(&mut substream(seed, MOMENT_STREAM + r))).collect())
        .collect();
    parts.concat()
}

/// Moments of `Y` and the mean used for standardization.
fn moments(exp: &Experiment) -> Result<(MomentSummary, f64), RunError> {
    let cfg = &exp.config;
    match &exp.model {
        BuiltModel::Permutation { score, model } => {
            let m = match model.support_size() {
                Some(s) if s <= MOMENT_ENUMERATION_CAP => {
                    exact_moments(score, model, MOMENT_ENUMERATION_CAP).map_err(core("exact moments"))?
                }
                _ => {
                    let ys = sample_y(cfg.seed, cfg.moment_reps(), |rng| score.evaluate(&model.sample(rng)));
                    MomentSummary::from_sample(&ys).map_err(core("moment pre-pass"))?
                }
            };
            // both centerings make E Y = 0 exactly
            Ok((m, 0.0))
        }
        BuiltModel::Independent(sum) => Ok((independent_moments(sum), sum.mean())),
        BuiltModel::Local(model) => {
            let mu = model.mu();
            let m = match local_state_count(model) {
                Some(s) if s <= MOMENT_ENUMERATION_CAP => {
                    let states = model.enumerate_states(MOMENT_ENUMERATION_CAP).map_err(core("state enumeration"))?;
                    MomentSummary::from_law(states.iter().map(|(st, p)| (model.y(st), *p)))
                }
                _ => {
                    let ys = sample_y(cfg.seed, cfg.moment_reps(), |rng| model.y(&model.sample_state(rng)));
                    let mut m = MomentSummary::from_sample(&ys).map_err(core("moment pre-pass"))?;
                    m.mean = mu;
                    m.mean_stderr = None;
                    m
                }
            };
            Ok((m, mu))
        }
    }
}

fn independent_moments(sum: &IndependentSum) -> MomentSummary {
    MomentSummary {
        mean: sum.mean(),
        variance: sum.variance(),
        method: MomentMethod::ExactEnumeration,
        stderr: None,
        mean_stderr: None,
        sample_count: None,
    }
}

fn classes_for(variant: Variant) -> Vec<SmoothnessClass> {
    match variant {
        Variant::HalfLine => vec![SmoothnessClass::half_lines()],
        Variant::Interval => vec![SmoothnessClass::intervals()],
        Variant::Main | Variant::Alt => vec![SmoothnessClass::half_lines(), SmoothnessClass::intervals()],
    }
}

/// Every requested bound; needs `σ` only.
pub fn evaluate_bounds(exp: &Experiment, mu: f64, sigma: f64) -> Result<Vec<EvaluatedBound>, RunError> {
    let mut out = Vec::new();
    for v in &exp.bounds {
        for class in classes_for(v.variant()) {
            let report = match &exp.model {
                BuiltModel::Permutation { score, model } => combinatorial_bound(score, model, sigma, &class, v.variant()),
                BuiltModel::Independent(sum) => match exp.config.construction {
                    Construction::ZeroIndependent => {
                        zero_bias_bound(sigma, sum.max_summand_range() / 2.0, &class, v.variant())
                    }
                    _ => size_bias_bound(
                        mu,
                        sigma,
                        sum.max_summand_range(),
                        sum.size_bias_delta_bound(),
                        &class,
                        v.variant(),
                    ),
                },
                BuiltModel::Local(model) => {
                    let structure = SizeBiasSampler::new(model.clone()).map_err(core("dependency structure"))?;
                    let inputs = local_bound_inputs(structure.structure(), model.value_cap());
                    size_bias_bound(mu, sigma, inputs.big_b, inputs.delta_bound, &class, v.variant())
                }
            }
            .map_err(core("bound evaluation"))?;
            out.push(EvaluatedBound { class: class.kind, report });
        }
    }
    Ok(out)
}

/// Runs the full pipeline of a validated experiment.
pub fn run_experiment(exp: &Experiment, opts: &RunOptions) -> Result<RunReport, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    pool.install(|| run_inner(exp, opts))
}

/// Validates, applies overrides and runs.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let exp = opts.apply(cfg).validate()?;
    run_experiment(&exp, opts)
}

fn run_inner(exp: &Experiment, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cfg = &exp.config;
    let start = Instant::now();
    let sampler = Sampler::build(exp)?;
    let (moments, mu) = moments(exp)?;
    let sigma = moments.sigma();
    if !(sigma > 0.0) {
        return Err(RunError::Core {
            context: "moments".into(),
            source: stein_core::Error::Degenerate("Y has zero variance".into()),
        });
    }
    let t_moments = start.elapsed();

    let spool_dir = opts.spool_dir.clone().or_else(|| if cfg.output.spool { cfg.output.dir.clone() } else { None });
    let (draws, bytes) = sample_all(&sampler, cfg.seed, cfg.replicates, spool_dir.is_some())?;
    let spool = match spool_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}.spool", cfg.id));
            let mut w = SpoolWriter::create(&path, sampler.record_fields())?;
            w.write_raw(&bytes)?;
            w.finish()?;
            Some(path)
        }
        None => None,
    };
    let t_sampling = start.elapsed();

    let standardized: Vec<f64> = draws.ys.iter().map(|y| (y - mu) / sigma).collect();
    let distances = vec![
        kolmogorov_distance(&standardized).map_err(core("half-line distance"))?,
        interval_distance(&standardized).map_err(core("interval distance"))?,
    ];
    let bounds = evaluate_bounds(exp, mu, sigma)?;
    let mut checks = Vec::new();
    let mut delta = None;
    for &kind in &exp.checks {
        match kind {
            CheckKind::Characterizing => checks.push(characterizing(cfg.construction, &draws, &moments, mu, sigma)?),
            CheckKind::Gap => {
                let mut acc = GapAccumulator::new(draws.gap_bound);
                draws.gaps.iter().for_each(|&g| acc.push(g));
                checks.push(acc.report());
            }
            CheckKind::Distance => {
                for b in &bounds {
                    let d = match b.class {
                        ClassKind::HalfLines => &distances[0],
                        _ => &distances[1],
                    };
                    checks.push(distance_check(d, b));
                }
            }
            CheckKind::Oracle => checks.push(oracle(exp, &draws)?),
            CheckKind::Linearity => {
                let spec = pair_spec(exp)?;
                let mut rng = substream(cfg.seed, LINEARITY_STREAM);
                checks.push(linearity_check(&spec, cfg.linearity_reps, &mut rng));
            }
            CheckKind::Exchangeability => {
                checks.push(exchangeability_check(&pair_spec(exp)?, ORACLE_STATE_CAP).map_err(core("exchangeability"))?)
            }
            CheckKind::MomentIdentity => {
                checks.push(moment_identity_check(&pair_spec(exp)?, ORACLE_STATE_CAP).map_err(core("moment identity"))?)
            }
            CheckKind::DeltaProxy => {
                let (summary, reports) = delta_checks(exp)?;
                checks.extend(reports);
                delta = Some(summary);
            }
        }
    }
    let t_checks = start.elapsed();
    let passed = checks.iter().all(|c| c.passed);
    Ok(RunReport {
        id: cfg.id.clone(),
        construction: cfg.construction,
        seed: cfg.seed,
        replicates: cfg.replicates,
        config: cfg.clone(),
        moments,
        mu,
        sigma,
        gap_bound: draws.gap_bound,
        distances,
        bounds,
        checks,
        delta,
        spool,
        passed,
        timings: Timings {
            moments_ms: ms(t_moments),
            sampling_ms: ms(t_sampling - t_moments),
            checks_ms: ms(t_checks - t_sampling),
            total_ms: ms(t_checks),
        },
    })
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn characterizing(
    construction: Construction,
    draws: &DrawSet,
    moments: &MomentSummary,
    mu: f64,
    sigma: f64,
) -> Result<CheckReport, RunError> {
    let pairs = draws.ys.iter().zip(&draws.partners);
    let mut report = if construction.is_zero_bias() {
        let mut acc = ZeroBiasAccumulator::new(moments.variance).map_err(core("characterizing"))?;
        pairs.for_each(|(&y, &s)| acc.push(y, s));
        acc.report("characterizing-zero")
    } else {
        let mut acc = SizeBiasAccumulator::new(mu, sigma).map_err(core("characterizing"))?;
        pairs.for_each(|(&y, &s)| acc.push(y, s));
        acc.report("characterizing-size")
    }
    .map_err(core("characterizing"))?;
    if moments.method == MomentMethod::MonteCarlo {
        report.details.push_str("; sigma^2 from an independent pre-pass");
    }
    Ok(report)
}

fn distance_check(d: &DistanceEstimate, b: &EvaluatedBound) -> CheckReport {
    let metric = match d.metric {
        Metric::HalfLine => "half-line",
        Metric::Interval => "interval",
    };
    let name = format!("delta-vs-bound:{}:{}", b.report.formula.id(), metric);
    let mut r = if b.report.precondition_ok {
        delta_vs_bound(d, &b.report)
    } else {
        // the bound is not certified; only the trivial bound applies
        let observed = d.value;
        CheckReport {
            name: String::new(),
            passed: observed <= 1.0,
            observed,
            threshold: 1.0,
            details: format!(
                "precondition {} fails; bound={} vacuous={}",
                b.report.precondition_text, b.report.delta_bound, b.report.vacuous
            ),
        }
    };
    r.name = name;
    r
}

fn pair_spec(exp: &Experiment) -> Result<ExchangeablePairSpec, RunError> {
    match &exp.model {
        BuiltModel::Permutation { score, model } => {
            ExchangeablePairSpec::new(model.clone(), score.clone()).map_err(core("exchangeable pair"))
        }
        _ => unreachable!("validated configuration"),
    }
}

fn key(y: f64) -> i64 {
    (y * 1e9).round() as i64
}

fn chi_report(name: &str, chi: ChiSquare, detail: String) -> CheckReport {
    CheckReport {
        name: name.into(),
        passed: chi.p_value >= ORACLE_ALPHA,
        observed: chi.p_value,
        threshold: ORACLE_ALPHA,
        details: format!(
            "chi2={:.3} df={} cells={} outside={}; {detail}; passes when p >= threshold",
            chi.statistic, chi.df, chi.cells, chi.outside
        ),
    }
}

/// Chi-square of observed values against a finite `(value, probability)` law.
pub fn discrete_law_fit(name: &str, law: &[(f64, f64)], values: &[f64]) -> CheckReport {
    let index: BTreeMap<i64, usize> = law.iter().enumerate().map(|(k, (v, _))| (key(*v), k)).collect();
    let mut counts = vec![0u64; law.len()];
    let mut outside = 0;
    for &v in values {
        match index.get(&key(v)) {
            Some(&k) => counts[k] += 1,
            None => outside += 1,
        }
    }
    let probs: Vec<f64> = law.iter().map(|a| a.1).collect();
    chi_report(name, chi_square(&counts, &probs, outside), format!("atoms={}", law.len()))
}

fn merge_law(atoms: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut m: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for (v, p) in atoms {
        let e = m.entry(key(v)).or_insert((v, 0.0));
        e.1 += p;
    }
    m.into_values().filter(|a| a.1 > 0.0).collect()
}

/// Exact law of `Y` for an enumerable local model.
pub fn local_y_law(model: &LocalStatModel) -> Result<Vec<(f64, f64)>, RunError> {
    let states = model.enumerate_states(ORACLE_STATE_CAP).map_err(core("state enumeration"))?;
    Ok(merge_law(states.iter().map(|(s, p)| (model.y(s), *p))))
}

fn oracle(exp: &Experiment, draws: &DrawSet) -> Result<CheckReport, RunError> {
    match (&exp.model, exp.config.construction) {
        (BuiltModel::Permutation { .. }, _) => {
            let law = enumerate_pair_law(&pair_spec(exp)?, ORACLE_STATE_CAP).map_err(core("pair law"))?;
            let sb = square_bias_oracle(&law).map_err(core("square-bias oracle"))?;
            Ok(square_bias_fit(&sb, &draws.pairs))
        }
        (BuiltModel::Independent(sum), Construction::ZeroIndependent) => {
            let law = sum.exact_law(ORACLE_ATOM_CAP).expect("validated configuration");
            let zb = DiscreteLaw::new(&law).and_then(|l| l.zero_biased()).map_err(core("zero-biased law"))?;
            let d = kolmogorov_against(&draws.partners, |x| zb.cdf(x)).map_err(core("oracle distance"))?;
            let band = (2.0f64 / ORACLE_ALPHA).ln() / (2.0 * d.sample_count as f64);
            let band = band.sqrt();
            Ok(CheckReport {
                name: "oracle-zero-independent".into(),
                passed: d.value <= band,
                observed: d.value,
                threshold: band,
                details: format!("Kolmogorov distance of Y* to the exact zero-biased law; 99.9% DKW band, N={}", d.sample_count),
            })
        }
        (BuiltModel::Independent(sum), _) => {
            let law = sum.exact_law(ORACLE_ATOM_CAP).expect("validated configuration");
            let sb = size_bias_discrete_oracle(&law).map_err(core("size-bias oracle"))?;
            Ok(discrete_law_fit("oracle-size-independent", &merge_law(sb), &draws.partners))
        }
        (BuiltModel::Local(model), _) => {
            let sb = size_bias_discrete_oracle(&local_y_law(model)?).map_err(core("size-bias oracle"))?;
            Ok(discrete_law_fit("oracle-size-local", &merge_law(sb), &draws.partners))
        }
    }
}

/// Chi-square of `(Y†, Y‡)` draws against the square-biased law.
pub fn square_bias_fit(sb: &SquareBiasLaw, pairs: &[(f64, f64)]) -> CheckReport {
    let mut counts = vec![0u64; sb.atoms.len()];
    let mut outside = 0;
    for &(a, b) in pairs {
        match sb.atom_index(a, b) {
            Some(k) => counts[k] += 1,
            None => outside += 1,
        }
    }
    let probs: Vec<f64> = sb.atoms.iter().map(|a| a.p).collect();
    chi_report("oracle-square-bias", chi_square(&counts, &probs, outside), format!("atoms={}", sb.atoms.len()))
}

fn delta_checks(exp: &Experiment) -> Result<(DeltaSummary, Vec<CheckReport>), RunError> {
    let BuiltModel::Local(model) = &exp.model else { unreachable!("validated configuration") };
    let sampler = SizeBiasSampler::new(model.clone()).map_err(core("size-bias sampler"))?;
    let bound = local_bound_inputs(sampler.structure(), model.value_cap()).delta_bound;
    let mut rng = substream(exp.config.seed, DELTA_STREAM);
    let proxy = delta_proxy_estimate(&sampler, exp.config.delta.outer, exp.config.delta.inner, &mut rng)
        .map_err(core("delta proxy"))?;
    let se = proxy.stderr.unwrap_or(0.0);
    let mut reports = vec![CheckReport {
        name: "delta-proxy-vs-bound".into(),
        passed: proxy.estimate <= bound + Z_THRESHOLD * se,
        observed: proxy.estimate,
        threshold: bound + Z_THRESHOLD * se,
        details: format!("structural bound={bound} stderr={se} outer={} inner={}", proxy.outer, proxy.inner),
    }];
    let exact = if model.deterministic_regeneration() && local_state_count(model).is_some_and(|s| s <= ORACLE_STATE_CAP) {
        let ex = delta_exact(&sampler, ORACLE_STATE_CAP).map_err(core("exact delta"))?;
        let err = (proxy.estimate - ex.proxy).abs();
        // an exact zero proxy has no sampling error
        let tol = Z_THRESHOLD * se + 1e-12;
        reports.push(CheckReport {
            name: "delta-proxy-vs-exact".into(),
            passed: err <= tol,
            observed: err,
            threshold: tol,
            details: format!("estimate={} exact={} Delta(Y)={}", proxy.estimate, ex.proxy, ex.delta),
        });
        Some(ex)
    } else {
        None
    };
    Ok((DeltaSummary { proxy, bound, exact }, reports))
}

/// Bounds alone, for the `bound` subcommand.
pub fn bounds_only(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(MomentSummary, Vec<EvaluatedBound>), RunError> {
    let exp = opts.apply(cfg).validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    pool.install(|| {
        let (m, mu) = moments(&exp)?;
        let b = evaluate_bounds(&exp, mu, m.sigma())?;
        Ok((m, b))
    })
}
