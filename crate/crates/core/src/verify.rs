//! Distances to the normal law and checks on couplings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::math::{abs, normal_cdf, sqrt};
use crate::perm::PermutationModel;
use crate::score::exact_moments;
use crate::zero_bias::{enumerate_pair_law, square_bias_oracle, ExchangeablePairSpec};

/// Default `|z|` threshold for Monte Carlo checks.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Metric {
    /// Kolmogorov distance.
    HalfLine,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceEstimate {
    pub metric: Metric,
    pub value: f64,
    pub sample_count: usize,
    /// 99% DKW half-width.
    pub dkw_band: f64,
}

/// `sqrt(ln(2/0.01) / (2N))`.
pub fn dkw_band(n: usize) -> f64 {
    sqrt(libm::log(2.0 / 0.01) / (2.0 * n as f64))
}

/// `(y - μ)/σ` for every draw.
pub fn standardize(ys: &[f64], mu: f64, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    Ok(ys.iter().map(|y| (y - mu) / sigma).collect())
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Sup-distance between the empirical law and a continuous `cdf`.
pub fn kolmogorov_against(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<DistanceEstimate> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max(abs((i + 1) as f64 / n - f)).max(abs(i as f64 / n - f));
    }
    Ok(DistanceEstimate { metric: Metric::HalfLine, value: worst.min(1.0), sample_count: v.len(), dkw_band: dkw_band(v.len()) })
}

/// Kolmogorov distance of a standardized sample to the standard normal.
pub fn kolmogorov_distance(sample: &[f64]) -> Result<DistanceEstimate> {
    kolmogorov_against(sample, normal_cdf)
}

/// Sup over intervals whose endpoints are distinct members of the sample
/// or `±∞`, each end open or closed, of `|empirical mass - normal mass|`.
///
/// Every such interval splits as a right end minus a left end, so one pass
/// keeping the running extremes of the left-end terms suffices.
pub fn interval_distance(sample: &[f64]) -> Result<DistanceEstimate> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    // left-end terms L - Φ, starting with -∞
    let mut left_max: f64 = 0.0;
    let mut left_min: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let through = j as f64 / n;
        let phi = normal_cdf(x);
        for r in [through - phi, below - phi] {
            worst = worst.max(r - left_min).max(left_max - r);
        }
        for l in [below - phi, through - phi] {
            left_max = left_max.max(l);
            left_min = left_min.min(l);
        }
        i = j;
    }
    // right end at +∞
    worst = worst.max(-left_min).max(left_max);
    Ok(DistanceEstimate { metric: Metric::Interval, value: worst.min(1.0), sample_count: v.len(), dkw_band: dkw_band(v.len()) })
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub details: String,
}

impl CheckReport {
    fn new(name: &str, observed: f64, threshold: f64, details: String) -> Self {
        CheckReport { name: name.into(), passed: observed <= threshold, observed, threshold, details }
    }
}

/// Running mean and second central moment; merges exactly in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        sqrt(self.variance() / self.count.max(1) as f64)
    }

    /// `mean / stderr`, with `0/0 = 0`.
    pub fn z(&self) -> f64 {
        let se = self.stderr();
        if se > 0.0 {
            self.mean / se
        } else if self.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Test functions for the zero-bias identity, with derivatives.
pub const ZERO_TEST_FUNCTIONS: [&str; 4] = ["x", "x^2", "x^3", "cos"];
/// Test functions for the size-bias identity.
pub const SIZE_TEST_FUNCTIONS: [&str; 3] = ["x", "x^2", "cos"];

/// Paired differences `W f(W) - f'(W*)` with `W = Y/σ`, `W* = Y*/σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroBiasAccumulator {
    pub sigma: f64,
    pub parts: [Moments; 4],
}

impl ZeroBiasAccumulator {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Degenerate("sigma^2 must be positive".into()));
        }
        Ok(ZeroBiasAccumulator { sigma: sqrt(sigma2), parts: [Moments::default(); 4] })
    }

    pub fn push(&mut self, y: f64, y_star: f64) {
        let w = y / self.sigma;
        let s = y_star / self.sigma;
        let d = [w * w - 1.0, w * w * w - 2.0 * s, w * w * w * w - 3.0 * s * s, w * libm::cos(w) + libm::sin(s)];
        for (m, x) in self.parts.iter_mut().zip(d) {
            m.push(x);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.merge(b);
        }
    }

    pub fn report(&self, name: &str) -> Result<CheckReport> {
        z_report(name, &ZERO_TEST_FUNCTIONS, &self.parts)
    }
}

/// Paired differences `Y f(Y/σ) - μ f(Yˢ/σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SizeBiasAccumulator {
    pub mu: f64,
    pub scale: f64,
    pub parts: [Moments; 3],
}

impl SizeBiasAccumulator {
    /// `scale` only sets the argument scale of the test functions.
    pub fn new(mu: f64, scale: f64) -> Result<Self> {
        if !(mu > 0.0) || !(scale > 0.0) {
            return Err(Error::Degenerate("mu and scale must be positive".into()));
        }
        Ok(SizeBiasAccumulator { mu, scale, parts: [Moments::default(); 3] })
    }

    pub fn push(&mut self, y: f64, y_s: f64) {
        let (u, v) = (y / self.scale, y_s / self.scale);
        let d = [y * u - self.mu * v, y * u * u - self.mu * v * v, y * libm::cos(u) - self.mu * libm::cos(v)];
        for (m, x) in self.parts.iter_mut().zip(d) {
            m.push(x);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.merge(b);
        }
    }

    pub fn report(&self, name: &str) -> Result<CheckReport> {
        z_report(name, &SIZE_TEST_FUNCTIONS, &self.parts)
    }
}

fn z_report(name: &str, labels: &[&str], parts: &[Moments]) -> Result<CheckReport> {
    if parts[0].count < 2 {
        return Err(Error::Degenerate("need at least two draws".into()));
    }
    let mut worst: f64 = 0.0;
    let mut details = String::new();
    for (label, m) in labels.iter().zip(parts) {
        let z = m.z();
        worst = worst.max(abs(z));
        if !details.is_empty() {
            details.push_str("; ");
        }
        details.push_str(&alloc::format!("f={label}: diff={:.3e} se={:.3e} z={:.2}", m.mean, m.stderr(), z));
    }
    Ok(CheckReport::new(name, worst, Z_THRESHOLD, details))
}

/// `E[Y f(Y)] = σ² E f'(Y*)` on a stream of `(y, y*)`.
pub fn characterizing_check_zero(draws: &[(f64, f64)], sigma2: f64) -> Result<CheckReport> {
    let mut acc = ZeroBiasAccumulator::new(sigma2)?;
    for &(y, s) in draws {
        acc.push(y, s);
    }
    acc.report("characterizing-zero")
}

/// `E[Y f(Y)] = μ E f(Yˢ)` on a stream of `(y, yˢ)`; `scale` is typically `σ`.
pub fn characterizing_check_size(draws: &[(f64, f64)], mu: f64, scale: f64) -> Result<CheckReport> {
    let mut acc = SizeBiasAccumulator::new(mu, scale)?;
    for &(y, s) in draws {
        acc.push(y, s);
    }
    acc.report("characterizing-size")
}

/// For `reps` sampled `π`, compares the exact average of `Y''` over all
/// pairs with `(1 - λ) Y'`.
pub fn linearity_check<R: Rng + ?Sized>(spec: &ExchangeablePairSpec, reps: usize, rng: &mut R) -> CheckReport {
    let scale = spec.score().c_sup().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for _ in 0..reps {
        let pi = spec.model().sample(rng);
        let y = spec.score().evaluate(&pi);
        let avg = spec.pair_average(&pi);
        let err = abs(avg - (1.0 - spec.lambda()) * y) / abs(y).max(scale);
        worst = worst.max(err);
    }
    CheckReport::new("linearity", worst, 1e-10, alloc::format!("lambda={} reps={reps}", spec.lambda()))
}

/// Exact symmetry of the enumerated `(Y', Y'')` law; partners outside the
/// model's support also fail the check.
pub fn exchangeability_check(spec: &ExchangeablePairSpec, cap: u128) -> Result<CheckReport> {
    let n = spec.model().n();
    let mut joint: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let key = |y: f64| libm::round(y * 1e9) as i64;
    let mut escapes = 0usize;
    let support = spec.model().enumerate_support(cap)?;
    let pairs = (n * (n - 1)) as f64;
    if support.len() as f64 * pairs > cap as f64 {
        return Err(Error::SupportTooLarge { size: support.len() as u128 * pairs as u128, cap });
    }
    for (pi, p) in &support {
        let y1 = spec.score().evaluate(pi);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pp = spec.partner(pi, i, j);
                if let PermutationModel::FixedCycleType(ct) = spec.model() {
                    if pp.cycle_type() != *ct {
                        escapes += 1;
                    }
                }
                *joint.entry((key(y1), key(spec.score().evaluate(&pp)))).or_default() += p / pairs;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (&(a, b), &p) in &joint {
        let q = joint.get(&(b, a)).copied().unwrap_or(0.0);
        worst = worst.max(abs(p - q));
    }
    let mut report = CheckReport::new(
        "exchangeability",
        worst,
        1e-12,
        alloc::format!("atoms={} partners outside support={escapes}", joint.len()),
    );
    report.passed &= escapes == 0;
    Ok(report)
}

/// `E(Y' - Y'')² = 2λσ²` by enumeration.
pub fn moment_identity_check(spec: &ExchangeablePairSpec, cap: u128) -> Result<CheckReport> {
    let law = enumerate_pair_law(spec, cap)?;
    let sb = square_bias_oracle(&law)?;
    let var = exact_moments(spec.score(), spec.model(), cap)?.variance;
    let target = 2.0 * spec.lambda() * var;
    let err = abs(sb.second_moment - target) / target.max(f64::MIN_POSITIVE);
    Ok(CheckReport::new(
        "moment-identity",
        err,
        1e-10,
        alloc::format!("E(Y'-Y'')^2={} 2*lambda*sigma^2={target}", sb.second_moment),
    ))
}

/// Float slack allowed on gap certificates, relative to the bound.
pub const GAP_SLACK: f64 = 1e-12;

/// Largest gap and the number of draws over the declared bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapAccumulator {
    pub bound: f64,
    pub count: u64,
    pub max_gap: f64,
    pub violations: u64,
}

impl GapAccumulator {
    pub fn new(bound: f64) -> Self {
        GapAccumulator { bound, count: 0, max_gap: 0.0, violations: 0 }
    }

    pub fn push(&mut self, gap: f64) {
        self.count += 1;
        self.max_gap = self.max_gap.max(gap);
        if !(gap <= self.bound * (1.0 + GAP_SLACK)) {
            self.violations += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.max_gap = self.max_gap.max(other.max_gap);
        self.violations += other.violations;
    }

    pub fn report(&self) -> CheckReport {
        let mut r = CheckReport::new(
            "gap-audit",
            self.max_gap,
            self.bound * (1.0 + GAP_SLACK),
            alloc::format!("draws={} violations={}", self.count, self.violations),
        );
        r.passed = self.count > 0 && self.violations == 0;
        r
    }
}

/// Every gap within `bound`.
pub fn gap_audit(gaps: impl IntoIterator<Item = f64>, bound: f64) -> CheckReport {
    let mut acc = GapAccumulator::new(bound);
    for g in gaps {
        acc.push(g);
    }
    acc.report()
}

/// Empirical distance, less its sampling band, against `min(bound, 1)`.
/// Interval distances use twice the DKW band.
pub fn delta_vs_bound(distance: &DistanceEstimate, bound: &BoundReport) -> CheckReport {
    let band = match distance.metric {
        Metric::HalfLine => distance.dkw_band,
        Metric::Interval => 2.0 * distance.dkw_band,
    };
    let observed = distance.value - band;
    CheckReport::new(
        "delta-vs-bound",
        observed,
        bound.delta_bound.min(1.0),
        alloc::format!(
            "distance={} band={band} bound={} formula={} precondition_ok={}",
            distance.value,
            bound.delta_bound,
            bound.formula.id(),
            bound.precondition_ok
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::CycleType;
    use crate::rng::substream;
    use crate::score::{center_for_cycle_type, center_for_uniform, random_raw, ScoreArray};
    use crate::zero_bias::PairRule;
    use alloc::vec;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_quantile(p: f64) -> f64 {
        // bisection on Φ; accurate enough for test fixtures
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Every interval with distinct endpoints, each end open or closed.
    fn brute_interval(sample: &[f64]) -> f64 {
        let mut pts: Vec<f64> = sample.to_vec();
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        let mut ends = vec![f64::NEG_INFINITY];
        ends.extend(pts.iter().copied());
        ends.push(f64::INFINITY);
        let n = sample.len() as f64;
        let mut worst: f64 = 0.0;
        for a in 0..ends.len() {
            for b in a + 1..ends.len() {
                let (c, d) = (ends[a], ends[b]);
                for lc in [true, false] {
                    for rc in [true, false] {
                        let inside = sample
                            .iter()
                            .filter(|&&x| (if lc { x >= c } else { x > c }) && (if rc { x <= d } else { x < d }))
                            .count() as f64;
                        let phi = |x: f64| if x.is_infinite() { if x > 0.0 { 1.0 } else { 0.0 } } else { normal_cdf(x) };
                        worst = worst.max(abs(inside / n - (phi(d) - phi(c))));
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn distance_examples() {
        assert_eq!(kolmogorov_distance(&[0.0]).unwrap().value, 0.5);
        assert_eq!(interval_distance(&[0.0]).unwrap().value, 0.5);
        let n = 50;
        let q: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.5) / n as f64)).collect();
        assert!((kolmogorov_distance(&q).unwrap().value - 0.5 / n as f64).abs() < 1e-12);
        assert!(kolmogorov_distance(&[]).is_err());
        assert!(standardize(&[1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn interval_distance_matches_brute_force() {
        let mut rng = substream(1, 0);
        for trial in 0..40 {
            let len = 1 + trial % 9;
            let sample: Vec<f64> = (0..len)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    if trial % 3 == 0 { libm::round(x) } else { x }
                })
                .collect();
            let fast = interval_distance(&sample).unwrap().value;
            assert!((fast - brute_interval(&sample)).abs() < 1e-12, "{sample:?}");
            assert!(fast >= kolmogorov_distance(&sample).unwrap().value - 1e-12);
        }
    }

    #[test]
    fn dkw_coverage_on_normal_samples() {
        let mut inside = 0;
        let runs = 200;
        for seed in 0..runs {
            let mut rng = substream(1000 + seed, 0);
            let xs: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
            let d = kolmogorov_distance(&xs).unwrap();
            if d.value <= d.dkw_band {
                inside += 1;
            }
            let iv = interval_distance(&xs).unwrap();
            assert!(iv.value <= 2.0 * iv.dkw_band);
        }
        assert!(inside >= runs - 6);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| libm::sin(i as f64) * 3.0 + 1.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Moments::default();
        let mut right = Moments::default();
        xs[..377].iter().for_each(|&x| left.push(x));
        xs[377..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean - whole.mean).abs() < 1e-12);
        assert!((left.variance() - whole.variance()).abs() < 1e-10);
    }

    #[test]
    fn zero_bias_identity_detects_a_broken_coupling() {
        // Y uniform on {-1, +1}: Y* ~ U(-1, 1), while Y* = Y is wrong
        let mut rng = substream(2, 0);
        let good: Vec<(f64, f64)> = (0..100_000)
            .map(|_| {
                let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (y, rng.random_range(-1.0..1.0))
            })
            .collect();
        assert!(characterizing_check_zero(&good, 1.0).unwrap().passed);
        let broken: Vec<(f64, f64)> = good.iter().map(|&(y, _)| (y, y)).collect();
        let r = characterizing_check_zero(&broken, 1.0).unwrap();
        assert!(!r.passed, "{}", r.details);
    }

    #[test]
    fn size_bias_identity_detects_a_broken_coupling() {
        let mut rng = substream(3, 0);
        let n = 10;
        let p = 0.3;
        let mu = n as f64 * p;
        let sigma = sqrt(n as f64 * p * (1.0 - p));
        let draws: Vec<(f64, f64)> = (0..100_000)
            .map(|_| {
                let xs: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() < p) as u8 as f64).collect();
                let y: f64 = xs.iter().sum();
                let i = rng.random_range(0..n);
                (y, y - xs[i] + 1.0)
            })
            .collect();
        assert!(characterizing_check_size(&draws, mu, sigma).unwrap().passed);
        let broken: Vec<(f64, f64)> = draws.iter().map(|&(y, _)| (y, y)).collect();
        assert!(!characterizing_check_size(&broken, mu, sigma).unwrap().passed);
    }

    #[test]
    fn linearity_passes_and_fails_as_expected() {
        let mut rng = substream(4, 0);
        let u = center_for_uniform(&random_raw(7, &mut rng)).unwrap();
        let spec = ExchangeablePairSpec::new(PermutationModel::uniform(7).unwrap(), u).unwrap();
        assert!(linearity_check(&spec, 50, &mut rng).passed);
        let ct = CycleType::from_pairs(&[(3, 1), (4, 1)]).unwrap();
        let c = center_for_cycle_type(&random_raw(7, &mut rng)).unwrap();
        let model = PermutationModel::fixed_cycle_type(ct).unwrap();
        let spec = ExchangeablePairSpec::new(model.clone(), c.clone()).unwrap();
        assert!(linearity_check(&spec, 50, &mut rng).passed);
        let diag = c.inject_diagonal(0.7);
        let broken = ExchangeablePairSpec::unchecked(model, diag, PairRule::Conjugation);
        assert!(!linearity_check(&broken, 50, &mut rng).passed);
    }

    #[test]
    fn exchangeability_examples() {
        let mut rng = substream(5, 0);
        let u = center_for_uniform(&random_raw(4, &mut rng)).unwrap();
        let spec = ExchangeablePairSpec::new(PermutationModel::uniform(4).unwrap(), u).unwrap();
        assert!(exchangeability_check(&spec, 1_000_000).unwrap().passed);
        let c = center_for_cycle_type(&random_raw(4, &mut rng)).unwrap();
        let model = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(2, 2)]).unwrap()).unwrap();
        let spec = ExchangeablePairSpec::new(model.clone(), c.clone()).unwrap();
        assert!(exchangeability_check(&spec, 1_000_000).unwrap().passed);
        let broken = ExchangeablePairSpec::unchecked(model, c, PairRule::RightTransposition);
        assert!(!exchangeability_check(&broken, 1_000_000).unwrap().passed);
    }

    #[test]
    fn moment_identity_passes() {
        let mut rng = substream(6, 0);
        let c = center_for_cycle_type(&random_raw(6, &mut rng)).unwrap();
        let model = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(3, 2)]).unwrap()).unwrap();
        assert!(moment_identity_check(&ExchangeablePairSpec::new(model, c).unwrap(), 1_000_000).unwrap().passed);
    }

    #[test]
    fn gap_audit_counts_violations() {
        assert!(gap_audit([0.1, 0.5, 1.0], 1.0).passed);
        let r = gap_audit([0.1, 1.5, 1.0], 1.0);
        assert!(!r.passed);
        assert!(r.details.contains("violations=1"));
        assert!(!gap_audit(core::iter::empty(), 1.0).passed);
    }

    #[test]
    fn delta_vs_bound_uses_band() {
        let a = ScoreArray::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let _ = a;
        let d = DistanceEstimate { metric: Metric::HalfLine, value: 0.05, sample_count: 100, dkw_band: dkw_band(100) };
        let b = crate::bounds::zero_bias_bound(1.0, 0.001, &crate::bounds::SmoothnessClass::half_lines(), crate::bounds::Variant::Main).unwrap();
        assert!(b.delta_bound > 0.05 - d.dkw_band);
        assert!(delta_vs_bound(&d, &b).passed);
        let tiny = crate::bounds::zero_bias_bound(1.0, 1e-9, &crate::bounds::SmoothnessClass::half_lines(), crate::bounds::Variant::Main).unwrap();
        let far = DistanceEstimate { value: 0.9, ..d };
        assert!(!delta_vs_bound(&far, &tiny).passed);
    }
}
