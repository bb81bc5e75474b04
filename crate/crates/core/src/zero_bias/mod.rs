//! Zero-bias couplings `(Y, Y*)` with `E[Y f(Y)] = σ² E f'(Y*)`.

mod cycle;
mod independent;
mod pair;
mod uniform;

use alloc::vec::Vec;

pub use cycle::{
    zero_bias_draw_cycle_type, CaseMass, CaseMassMethod, CaseMasses, CycleTypeZeroBias, LocalCase, LocalShape,
    TupleMode,
};
pub use independent::{zero_bias_independent_sum, IndependentZeroBias, IndependentZeroDraw};
pub use pair::{
    enumerate_pair_law, exchangeable_pair_cycle_type, exchangeable_pair_uniform, square_bias_oracle,
    ExchangeablePairSpec, PairAtom, PairDraw, PairRule, SquareBiasLaw, SquareBiasRejection,
};
pub use uniform::{zero_bias_draw_uniform, UniformZeroBias};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::score::ScoreArray;

/// Relabelling used to move a local configuration: positions `i[k]` are
/// carried onto `i_dagger[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexSurgery {
    pub i: Vec<usize>,
    pub i_dagger: Vec<usize>,
}

impl IndexSurgery {
    pub fn kappa(&self) -> usize {
        self.i.len()
    }
}

/// One realisation of `(Y, Y†, Y‡, Y*)` sharing the untouched part `S`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroBiasDraw {
    pub y: f64,
    pub y_dagger: f64,
    pub y_ddagger: f64,
    pub y_star: f64,
    pub u: f64,
    pub s: f64,
    pub t_prime: f64,
    pub t_dagger: f64,
    pub t_ddagger: f64,
    /// Sorted, 0-based.
    pub touched: Vec<usize>,
    pub gap: f64,
    pub surgery: IndexSurgery,
}

/// Number of `f64` fields in a spooled draw record.
pub const RECORD_FIELDS: usize = 11;

impl ZeroBiasDraw {
    /// Flat record in declaration order; the touched set is stored as its size.
    pub fn to_record(&self) -> [f64; RECORD_FIELDS] {
        [
            self.y,
            self.y_dagger,
            self.y_ddagger,
            self.y_star,
            self.u,
            self.s,
            self.t_prime,
            self.t_dagger,
            self.t_ddagger,
            self.touched.len() as f64,
            self.gap,
        ]
    }
}

/// `u·y† + (1-u)·y‡`.
pub fn assemble_y_star(y_dagger: f64, y_ddagger: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidInput(alloc::format!("u = {u} outside [0, 1]")));
    }
    Ok(u * y_dagger + (1.0 - u) * y_ddagger)
}

/// Splits the three permutations over the touched set and fills a draw.
pub(crate) fn assemble_draw(
    score: &ScoreArray,
    pi: &Permutation,
    pi_dagger: &Permutation,
    pi_ddagger: &Permutation,
    mut touched: Vec<usize>,
    surgery: IndexSurgery,
    u: f64,
) -> ZeroBiasDraw {
    touched.sort_unstable();
    touched.dedup();
    let n = score.n();
    let mut inside = alloc::vec![false; n];
    for &i in &touched {
        inside[i] = true;
    }
    let mut s = 0.0;
    for i in 0..n {
        if !inside[i] {
            debug_assert_eq!(pi.apply(i), pi_dagger.apply(i));
            debug_assert_eq!(pi.apply(i), pi_ddagger.apply(i));
            s += score.get(i, pi.apply(i));
        }
    }
    let t_prime = score.partial_sum(pi, &touched);
    let t_dagger = score.partial_sum(pi_dagger, &touched);
    let t_ddagger = score.partial_sum(pi_ddagger, &touched);
    let y = s + t_prime;
    let y_dagger = s + t_dagger;
    let y_ddagger = s + t_ddagger;
    let y_star = u * y_dagger + (1.0 - u) * y_ddagger;
    ZeroBiasDraw {
        y,
        y_dagger,
        y_ddagger,
        y_star,
        u,
        s,
        t_prime,
        t_dagger,
        t_ddagger,
        touched,
        gap: crate::math::abs(y_star - y),
        surgery,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_star_endpoints() {
        assert_eq!(assemble_y_star(3.0, -1.0, 0.0).unwrap(), -1.0);
        assert_eq!(assemble_y_star(3.0, -1.0, 1.0).unwrap(), 3.0);
        assert_eq!(assemble_y_star(2.0, 0.0, 0.5).unwrap(), 1.0);
        assert!(assemble_y_star(2.0, 0.0, 1.5).is_err());
        assert!(assemble_y_star(2.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn y_star_is_monotone_in_u() {
        let mut last = f64::NEG_INFINITY;
        for k in 0..=100 {
            let v = assemble_y_star(2.5, -0.5, k as f64 / 100.0).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
