use alloc::vec::Vec;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::laws::{DiscreteLaw, IndependentSum};

/// `P(Yˢ = y) = y P(Y = y) / μ` for a finite non-negative law.
pub fn size_bias_discrete_oracle(pmf: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    Ok(DiscreteLaw::new(pmf)?.size_biased()?.atoms().collect())
}

/// `(Y, Yˢ)` for a sum of independent non-negative summands.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndependentSizeDraw {
    pub y: f64,
    pub y_s: f64,
    pub group: usize,
}

/// Picks summand `I` with probability proportional to its mean and swaps
/// it for an independent size-biased copy.
#[derive(Debug, Clone)]
pub struct IndependentSizeBias {
    sum: IndependentSum,
    biased: Vec<Option<DiscreteLaw>>,
    pick: WeightedAliasIndex<f64>,
}

impl IndependentSizeBias {
    pub fn new(sum: IndependentSum) -> Result<Self> {
        let mut biased = Vec::with_capacity(sum.groups.len());
        let mut weights = Vec::with_capacity(sum.groups.len());
        for (k, g) in sum.groups.iter().enumerate() {
            if !g.law.is_nonnegative() {
                return Err(Error::Validation(alloc::format!("summand group {k} takes negative values")));
            }
            let m = g.law.mean();
            if g.count > 0 && m > 0.0 {
                biased.push(Some(g.law.size_biased()?));
                weights.push(g.count as f64 * m);
            } else {
                biased.push(None);
                weights.push(0.0);
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::Degenerate("every summand has mean zero".into()));
        }
        let pick = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?;
        Ok(IndependentSizeBias { sum, biased, pick })
    }

    pub fn sum(&self) -> &IndependentSum {
        &self.sum
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> IndependentSizeDraw {
        let group = self.pick.sample(rng);
        let mut rest = 0.0;
        for (k, g) in self.sum.groups.iter().enumerate() {
            let count = if k == group { g.count - 1 } else { g.count };
            rest += g.law.sample_sum(count, rng);
        }
        let x = self.sum.groups[group].law.sample(rng);
        let x_s = self.biased[group].as_ref().expect("positive weight").sample(rng);
        IndependentSizeDraw { y: rest + x, y_s: rest + x_s, group }
    }
}

/// One-shot convenience wrapper around [`IndependentSizeBias`].
pub fn size_bias_independent_sum<R: Rng + ?Sized>(sum: &IndependentSum, rng: &mut R) -> Result<IndependentSizeDraw> {
    Ok(IndependentSizeBias::new(sum.clone())?.draw(rng))
}
