use alloc::vec::Vec;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::laws::{IndependentSum, ZeroBiasedLaw};
use crate::math::abs;

/// `(Y, Y*)` for a sum of independent mean-zero summands.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndependentZeroDraw {
    pub y: f64,
    pub y_star: f64,
    /// Group of the replaced summand.
    pub group: usize,
    pub x: f64,
    pub x_star: f64,
}

impl IndependentZeroDraw {
    pub fn gap(&self) -> f64 {
        abs(self.y_star - self.y)
    }
}

/// Picks summand `I` with probability proportional to its variance and swaps
/// it for an independent zero-biased copy.
#[derive(Debug, Clone)]
pub struct IndependentZeroBias {
    sum: IndependentSum,
    biased: Vec<Option<ZeroBiasedLaw>>,
    pick: WeightedAliasIndex<f64>,
}

impl IndependentZeroBias {
    pub fn new(sum: IndependentSum) -> Result<Self> {
        let mut biased = Vec::with_capacity(sum.groups.len());
        let mut weights = Vec::with_capacity(sum.groups.len());
        for (k, g) in sum.groups.iter().enumerate() {
            let m = g.law.mean();
            if abs(m) > 1e-12 {
                return Err(Error::Validation(alloc::format!("summand group {k} has mean {m}, not 0")));
            }
            let var = g.law.variance();
            if g.count > 0 && var > 0.0 {
                biased.push(Some(g.law.zero_biased()?));
                weights.push(g.count as f64 * var);
            } else {
                biased.push(None);
                weights.push(0.0);
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::Degenerate("every summand has zero variance".into()));
        }
        let pick = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?;
        Ok(IndependentZeroBias { sum, biased, pick })
    }

    pub fn sum(&self) -> &IndependentSum {
        &self.sum
    }

    pub fn variance(&self) -> f64 {
        self.sum.variance()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> IndependentZeroDraw {
        let group = self.pick.sample(rng);
        let chosen = &self.sum.groups[group];
        let mut y = 0.0;
        for (k, g) in self.sum.groups.iter().enumerate() {
            let count = if k == group { g.count - 1 } else { g.count };
            y += g.law.sample_sum(count, rng);
        }
        let x = chosen.law.sample(rng);
        let x_star = self.biased[group].as_ref().expect("positive weight").sample(rng);
        let rest = y;
        IndependentZeroDraw { y: rest + x, y_star: rest + x_star, group, x, x_star }
    }
}

/// One-shot convenience wrapper around [`IndependentZeroBias`].
pub fn zero_bias_independent_sum<R: Rng + ?Sized>(sum: &IndependentSum, rng: &mut R) -> Result<IndependentZeroDraw> {
    Ok(IndependentZeroBias::new(sum.clone())?.draw(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{DiscreteLaw, IidGroup};
    use crate::rng::substream;

    #[test]
    fn rejects_nonzero_mean() {
        let sum = IndependentSum::from_laws(alloc::vec![DiscreteLaw::bernoulli(0.5).unwrap()]).unwrap();
        assert!(matches!(IndependentZeroBias::new(sum), Err(Error::Validation(_))));
    }

    #[test]
    fn index_follows_variance_weights() {
        let sum = IndependentSum::from_laws(alloc::vec![
            DiscreteLaw::new(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            DiscreteLaw::new(&[(-3f64.sqrt(), 0.5), (3f64.sqrt(), 0.5)]).unwrap(),
        ])
        .unwrap();
        let zb = IndependentZeroBias::new(sum).unwrap();
        let mut rng = substream(5, 0);
        let reps = 100_000;
        let hits = (0..reps).filter(|_| zb.draw(&mut rng).group == 1).count() as f64;
        let p = hits / reps as f64;
        let se = (0.75f64 * 0.25 / reps as f64).sqrt();
        assert!((p - 0.75).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn gap_is_within_summand_range() {
        let sum = IndependentSum::new(alloc::vec![IidGroup { law: DiscreteLaw::rademacher(1.0).unwrap(), count: 10 }])
            .unwrap();
        let zb = IndependentZeroBias::new(sum).unwrap();
        let mut rng = substream(6, 0);
        for _ in 0..10_000 {
            let d = zb.draw(&mut rng);
            assert!(d.gap() <= 2.0);
            assert!(d.x_star.abs() <= 1.0);
        }
    }
}
