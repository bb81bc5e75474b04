use alloc::vec::Vec;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::{assemble_draw, IndexSurgery, ZeroBiasDraw};
use crate::error::{Error, Result};
use crate::perm::{Permutation, PermutationModel};
use crate::score::{centering_tolerance, ScoreArray};

/// Alias tables are built while the tuple space stays under this many atoms.
pub const ALIAS_ATOM_CAP: u128 = 10_000_000;

const MAX_REJECTIONS: usize = 100_000_000;

#[derive(Debug, Clone)]
enum TupleSampler {
    /// Index `((i·n + k)·n + j)·n + l`; invalid tuples carry weight zero.
    Alias(WeightedAliasIndex<f64>),
    Rejection { envelope: f64 },
}

/// Zero-bias construction for `Σ a_{i,π(i)}` with `π` uniform on `S_n`.
///
/// A tuple `(I†, K†, J†, L†)` is drawn with weight
/// `[(a_{I†K†} + a_{J†L†}) - (a_{I†L†} + a_{J†K†})]²`, then `π` is moved onto
/// `π(I†) = K†`, `π(J†) = L†` by two right transpositions.
#[derive(Debug, Clone)]
pub struct UniformZeroBias {
    score: ScoreArray,
    model: PermutationModel,
    sampler: TupleSampler,
}

impl UniformZeroBias {
    pub fn new(score: ScoreArray) -> Result<Self> {
        let n = score.n();
        let model = PermutationModel::uniform(n)?;
        if !score.row_centered() {
            return Err(Error::Validation("uniform construction needs a row-centered array".into()));
        }
        let c = score.c_sup();
        if !(c > centering_tolerance(n, c)) {
            return Err(Error::Degenerate("all tuple weights are zero".into()));
        }
        let atoms = (n as u128).pow(4);
        let sampler = if atoms <= ALIAS_ATOM_CAP {
            let mut weights = Vec::with_capacity(atoms as usize);
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            let w = if i != j && k != l { tuple_weight(&score, i, k, j, l) } else { 0.0 };
                            weights.push(w);
                        }
                    }
                }
            }
            if weights.iter().all(|&w| w <= 0.0) {
                return Err(Error::Degenerate("all tuple weights are zero".into()));
            }
            TupleSampler::Alias(WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?)
        } else {
            TupleSampler::Rejection { envelope: 16.0 * c * c }
        };
        Ok(UniformZeroBias { score, model, sampler })
    }

    pub fn score(&self) -> &ScoreArray {
        &self.score
    }

    pub fn model(&self) -> &PermutationModel {
        &self.model
    }

    /// Declared `B`; draws satisfy `gap ≤ 2B = 8C`.
    pub fn gap_half_bound(&self) -> f64 {
        4.0 * self.score.c_sup()
    }

    pub fn uses_alias(&self) -> bool {
        matches!(self.sampler, TupleSampler::Alias(_))
    }

    /// Draws `(I†, K†, J†, L†)`.
    pub fn sample_tuple<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[usize; 4]> {
        let n = self.score.n();
        match &self.sampler {
            TupleSampler::Alias(table) => {
                let mut idx = table.sample(rng);
                let l = idx % n;
                idx /= n;
                let j = idx % n;
                idx /= n;
                let k = idx % n;
                Ok([idx / n, k, j, l])
            }
            TupleSampler::Rejection { envelope } => {
                for _ in 0..MAX_REJECTIONS {
                    let i = rng.random_range(0..n);
                    let j = (i + 1 + rng.random_range(0..n - 1)) % n;
                    let k = rng.random_range(0..n);
                    let l = (k + 1 + rng.random_range(0..n - 1)) % n;
                    let w = tuple_weight(&self.score, i, k, j, l);
                    if rng.random::<f64>() * envelope < w {
                        return Ok([i, k, j, l]);
                    }
                }
                Err(Error::RejectionExhausted(MAX_REJECTIONS))
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ZeroBiasDraw> {
        let pi = self.model.sample(rng);
        let tuple = self.sample_tuple(rng)?;
        let u: f64 = rng.random();
        Ok(self.draw_from(&pi, tuple, u))
    }

    /// Deterministic surgery on a given base permutation and tuple.
    pub fn draw_from(&self, pi: &Permutation, tuple: [usize; 4], u: f64) -> ZeroBiasDraw {
        let [i, k, j, l] = tuple;
        let mut map = pi.images().to_vec();
        let mut inv = pi.inverse().images().to_vec();
        let x = inv[k];
        let y = inv[l];
        // π1 = π ∘ τ_{I†, π⁻¹(K†)}
        swap_positions(&mut map, &mut inv, i, x);
        let y1 = inv[l];
        // π† = π1 ∘ τ_{J†, π1⁻¹(L†)}
        swap_positions(&mut map, &mut inv, j, y1);
        let pi_dagger = Permutation::from_images_unchecked(map.clone());
        map.swap(i, j);
        let pi_ddagger = Permutation::from_images_unchecked(map);
        let surgery = IndexSurgery { i: alloc::vec![x, y], i_dagger: alloc::vec![i, j] };
        assemble_draw(&self.score, pi, &pi_dagger, &pi_ddagger, alloc::vec![i, x, j, y], surgery, u)
    }
}

fn swap_positions(map: &mut [usize], inv: &mut [usize], a: usize, b: usize) {
    map.swap(a, b);
    inv[map[a]] = a;
    inv[map[b]] = b;
}

/// `[(a_ik + a_jl) - (a_il + a_jk)]²`.
pub fn tuple_weight(a: &ScoreArray, i: usize, k: usize, j: usize, l: usize) -> f64 {
    let d = (a.get(i, k) + a.get(j, l)) - (a.get(i, l) + a.get(j, k));
    d * d
}

/// One-shot convenience wrapper around [`UniformZeroBias`].
pub fn zero_bias_draw_uniform<R: Rng + ?Sized>(score: &ScoreArray, rng: &mut R) -> Result<ZeroBiasDraw> {
    UniformZeroBias::new(score.clone())?.draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::score::{center_for_uniform, random_raw};
    use crate::zero_bias::{enumerate_pair_law, square_bias_oracle, ExchangeablePairSpec};
    use alloc::vec;
    use std::collections::HashMap;

    fn worked_array() -> ScoreArray {
        ScoreArray::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap()
    }

    #[test]
    fn worked_tuple_weight() {
        assert_eq!(tuple_weight(&worked_array(), 0, 0, 1, 1), 16.0);
    }

    #[test]
    fn surgery_hits_targets_and_stays_local() {
        let a = center_for_uniform(&random_raw(7, &mut substream(1, 0))).unwrap();
        let zb = UniformZeroBias::new(a.clone()).unwrap();
        let mut rng = substream(1, 1);
        for _ in 0..5000 {
            let d = zb.draw(&mut rng).unwrap();
            assert!(d.gap <= 8.0 * a.c_sup());
            assert!(d.touched.len() <= 4);
            assert_eq!(d.y_star, d.u * d.y_dagger + (1.0 - d.u) * d.y_ddagger);
        }
        let pi = zb.model().sample(&mut rng);
        for tuple in [[0, 1, 2, 3], [0, pi.apply(2), 2, pi.apply(0)], [3, pi.apply(3), 5, 6]] {
            if tuple[1] == tuple[3] {
                continue;
            }
            let d = zb.draw_from(&pi, tuple, 0.25);
            assert!((d.y - a.evaluate(&pi)).abs() < 1e-12);
            let mut m = pi.images().to_vec();
            // rebuild π† independently
            let x = m.iter().position(|&v| v == tuple[1]).unwrap();
            m.swap(tuple[0], x);
            let y = m.iter().position(|&v| v == tuple[3]).unwrap();
            m.swap(tuple[2], y);
            let pd = Permutation::from_images(m.clone()).unwrap();
            assert_eq!(pd.apply(tuple[0]), tuple[1]);
            assert_eq!(pd.apply(tuple[2]), tuple[3]);
            assert!((d.y_dagger - a.evaluate(&pd)).abs() < 1e-12);
            m.swap(tuple[0], tuple[2]);
            assert!((d.y_ddagger - a.evaluate(&Permutation::from_images(m).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn surgery_preserves_uniformity() {
        // for a fixed tuple, π ↦ π† is n(n-1)-to-one onto {π(I)=K, π(J)=L}
        let n = 5;
        let zb = UniformZeroBias::new(center_for_uniform(&random_raw(n, &mut substream(2, 0))).unwrap()).unwrap();
        let tuple = [1, 3, 4, 0];
        let mut counts: HashMap<F64Key, usize> = HashMap::new();
        for pi in crate::perm::all_permutations(n) {
            let d = zb.draw_from(&pi, tuple, 1.0);
            *counts.entry(F64Key((d.y_dagger * 1e9).round() as i64)).or_default() += 1;
        }
        let mut direct: HashMap<F64Key, usize> = HashMap::new();
        for pi in crate::perm::all_permutations(n) {
            if pi.apply(1) == 3 && pi.apply(4) == 0 {
                let d = zb.draw_from(&pi, tuple, 1.0);
                assert_eq!(d.y_dagger, d.y);
                *direct.entry(F64Key((d.y * 1e9).round() as i64)).or_default() += n * (n - 1);
            }
        }
        assert_eq!(counts, direct);
    }

    #[derive(Hash, PartialEq, Eq, Debug)]
    struct F64Key(i64);

    #[test]
    fn rejection_and_alias_agree_on_tuple_law() {
        let a = center_for_uniform(&random_raw(4, &mut substream(3, 0))).unwrap();
        let zb = UniformZeroBias::new(a.clone()).unwrap();
        let rej = UniformZeroBias { sampler: TupleSampler::Rejection { envelope: 16.0 * a.c_sup() * a.c_sup() }, ..zb.clone() };
        let mut rng = substream(3, 1);
        let reps = 200_000;
        let target = [0, 1, 2, 3];
        let total: f64 = (0..4)
            .flat_map(|i| (0..4).flat_map(move |k| (0..4).flat_map(move |j| (0..4).map(move |l| [i, k, j, l]))))
            .filter(|t| t[0] != t[2] && t[1] != t[3])
            .map(|t| tuple_weight(&a, t[0], t[1], t[2], t[3]))
            .sum();
        let p = tuple_weight(&a, 0, 1, 2, 3) / total;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        for s in [&zb, &rej] {
            let hits = (0..reps).filter(|_| s.sample_tuple(&mut rng).unwrap() == target).count() as f64;
            assert!((hits / reps as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn matches_oracle_mean_of_y_dagger() {
        let a = worked_array();
        let zb = UniformZeroBias::new(a.clone()).unwrap();
        let spec = ExchangeablePairSpec::new(zb.model().clone(), a).unwrap();
        let sb = square_bias_oracle(&enumerate_pair_law(&spec, 1_000_000).unwrap()).unwrap();
        let mut rng = substream(4, 0);
        let reps = 100_000;
        let mut hits = vec![0usize; sb.atoms.len()];
        for _ in 0..reps {
            let d = zb.draw(&mut rng).unwrap();
            hits[sb.atom_index(d.y_dagger, d.y_ddagger).expect("atom in oracle support")] += 1;
        }
        for (h, atom) in hits.iter().zip(&sb.atoms) {
            let se = (atom.p * (1.0 - atom.p) / reps as f64).sqrt();
            assert!((*h as f64 / reps as f64 - atom.p).abs() < 4.5 * se);
        }
    }

    #[test]
    fn degenerate_and_invalid_arrays() {
        assert!(matches!(UniformZeroBias::new(ScoreArray::from_rows(&vec![vec![0.0; 3]; 3]).unwrap()), Err(Error::Degenerate(_))));
        let raw = ScoreArray::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert!(matches!(UniformZeroBias::new(raw), Err(Error::Validation(_))));
    }
}
