//! Finite discrete summand laws and sums of independent summands.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::math::abs;

/// A law with finitely many atoms, sorted by value with merged duplicates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("law needs at least one atom".into()));
        }
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidInput("atoms need finite values and non-negative probabilities".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!("probabilities sum to {total}, not 1")));
        }
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (v, p) in sorted {
            if values.last() == Some(&v) {
                *probs.last_mut().unwrap() += p;
            } else {
                values.push(v);
                probs.push(p);
            }
        }
        Ok(DiscreteLaw { values, probs })
    }

    /// Uniform on `{-c, +c}`.
    pub fn rademacher(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidInput("rademacher scale must be positive".into()));
        }
        Self::new(&[(-c, 0.5), (c, 0.5)])
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(alloc::format!("bernoulli p = {p} outside [0, 1]")));
        }
        Self::new(&[(0.0, 1.0 - p), (1.0, p)])
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms().map(|(v, p)| p * (v - m) * (v - m)).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values[0] >= 0.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, p) in self.atoms() {
            acc += p;
            if u < acc {
                return v;
            }
        }
        *self.values.last().unwrap()
    }

    /// Sum of `count` independent copies; multinomial counts via sequential binomials.
    pub fn sample_sum<R: Rng + ?Sized>(&self, count: u64, rng: &mut R) -> f64 {
        if count <= 16 {
            return (0..count).map(|_| self.sample(rng)).sum();
        }
        let mut remaining = count;
        let mut mass_left = 1.0;
        let mut total = 0.0;
        let last = self.values.len() - 1;
        for (k, (v, p)) in self.atoms().enumerate() {
            if remaining == 0 {
                break;
            }
            let take = if k == last {
                remaining
            } else {
                let q = (p / mass_left).clamp(0.0, 1.0);
                Binomial::new(remaining, q).expect("valid binomial").sample(rng)
            };
            total += take as f64 * v;
            remaining -= take;
            mass_left -= p;
        }
        total
    }

    /// The size-biased law `P(Xˢ = x) = x P(X = x) / E X`.
    pub fn size_biased(&self) -> Result<DiscreteLaw> {
        if !self.is_nonnegative() {
            return Err(Error::Validation("size biasing needs a non-negative law".into()));
        }
        let mu = self.mean();
        if !(mu > 0.0) {
            return Err(Error::Degenerate("size biasing needs a positive mean".into()));
        }
        let atoms: Vec<(f64, f64)> = self.atoms().map(|(v, p)| (v, v * p / mu)).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        Self::new(&atoms.iter().map(|&(v, p)| (v, p / total)).collect::<Vec<_>>())
    }

    /// The zero-biased law, with density `E[X 1(X > t)] / σ²` on `[x_min, x_max]`.
    pub fn zero_biased(&self) -> Result<ZeroBiasedLaw> {
        if abs(self.mean()) > 1e-12 {
            return Err(Error::Validation(alloc::format!(
                "zero biasing needs mean 0, got {}",
                self.mean()
            )));
        }
        let var = self.variance();
        if !(var > 0.0) {
            return Err(Error::Degenerate("zero biasing needs positive variance".into()));
        }
        let k = self.values.len();
        let mut segments = Vec::with_capacity(k - 1);
        // tail[m] = Σ_{j > m} x_j p_j
        let mut tail: f64 = self.atoms().map(|(v, p)| v * p).sum();
        for m in 0..k - 1 {
            tail -= self.values[m] * self.probs[m];
            let (lo, hi) = (self.values[m], self.values[m + 1]);
            let mass = (tail / var * (hi - lo)).max(0.0);
            segments.push(Segment { lo, hi, mass });
        }
        let total: f64 = segments.iter().map(|s| s.mass).sum();
        for s in &mut segments {
            s.mass /= total;
        }
        Ok(ZeroBiasedLaw { segments })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
struct Segment {
    lo: f64,
    hi: f64,
    mass: f64,
}

/// Piecewise-uniform zero-biased law of a finite discrete mean-zero law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroBiasedLaw {
    segments: Vec<Segment>,
}

impl ZeroBiasedLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.segments.last().unwrap();
        for s in &self.segments {
            acc += s.mass;
            if u < acc {
                chosen = s;
                break;
            }
        }
        let v: f64 = rng.random();
        chosen.lo + v * (chosen.hi - chosen.lo)
    }

    /// Distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            if x >= s.hi {
                acc += s.mass;
            } else if x > s.lo {
                acc += s.mass * (x - s.lo) / (s.hi - s.lo);
            }
        }
        acc.min(1.0)
    }
}

/// `count` independent copies of one law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IidGroup {
    pub law: DiscreteLaw,
    pub count: u64,
}

/// A sum of independent summands, grouped into identically distributed blocks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndependentSum {
    pub groups: Vec<IidGroup>,
}

impl IndependentSum {
    pub fn new(groups: Vec<IidGroup>) -> Result<Self> {
        if groups.is_empty() || groups.iter().all(|g| g.count == 0) {
            return Err(Error::InvalidInput("independent sum needs at least one summand".into()));
        }
        Ok(IndependentSum { groups })
    }

    /// One summand per law.
    pub fn from_laws(laws: Vec<DiscreteLaw>) -> Result<Self> {
        Self::new(laws.into_iter().map(|law| IidGroup { law, count: 1 }).collect())
    }

    pub fn summand_count(&self) -> u64 {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn mean(&self) -> f64 {
        self.groups.iter().map(|g| g.count as f64 * g.law.mean()).sum()
    }

    pub fn variance(&self) -> f64 {
        self.groups.iter().map(|g| g.count as f64 * g.law.variance()).sum()
    }

    /// Upper bound on `sqrt(Var(E(Yˢ - Y | Y)))` for the index-replacement
    /// size-bias coupling: `sqrt(Σ_i (μ_i/μ)² Var X_i)`, which is `σ/n` for
    /// i.i.d. summands.
    pub fn size_bias_delta_bound(&self) -> f64 {
        let mu = self.mean();
        let s: f64 = self
            .groups
            .iter()
            .map(|g| {
                let w = g.law.mean() / mu;
                g.count as f64 * w * w * g.law.variance()
            })
            .sum();
        libm::sqrt(s)
    }

    /// Largest `|x - x'|` over pairs of support points within any one law
    /// paired with its biased support; bounds `|Y* - Y|` and `|Yˢ - Y|`.
    pub fn max_summand_range(&self) -> f64 {
        self.groups
            .iter()
            .filter(|g| g.count > 0)
            .map(|g| {
                let v = &g.law.values;
                v[v.len() - 1] - v[0]
            })
            .fold(0.0, f64::max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.groups.iter().map(|g| g.law.sample_sum(g.count, rng)).sum()
    }

    /// Exact law of the sum, when the convolution stays small.
    pub fn exact_law(&self, max_atoms: usize) -> Option<Vec<(f64, f64)>> {
        let mut law: Vec<(f64, f64)> = alloc::vec![(0.0, 1.0)];
        for g in &self.groups {
            for _ in 0..g.count {
                let mut next: Vec<(f64, f64)> = Vec::with_capacity(law.len() * g.law.values.len());
                for &(y, p) in &law {
                    for (v, q) in g.law.atoms() {
                        next.push((y + v, p * q));
                    }
                }
                next.sort_by(|a, b| a.0.total_cmp(&b.0));
                law.clear();
                for (y, p) in next {
                    match law.last_mut() {
                        Some(last) if abs(last.0 - y) <= 1e-9 * (1.0 + abs(y)) => last.1 += p,
                        _ => law.push((y, p)),
                    }
                }
                if law.len() > max_atoms {
                    return None;
                }
            }
        }
        Some(law)
    }
}
