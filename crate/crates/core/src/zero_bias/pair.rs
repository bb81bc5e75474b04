use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{Permutation, PermutationModel};
use crate::score::{centering_tolerance, ScoreArray};

/// How the partner permutation is built from `π` and the pair `(I, J)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PairRule {
    /// `π'' = π ∘ τ_IJ`.
    RightTransposition,
    /// `π'' = τ_IJ π τ_IJ`.
    Conjugation,
}

/// Exchangeable pair `(Y', Y'')` with `E(Y''|Y') = (1 - λ) Y'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeablePairSpec {
    model: PermutationModel,
    score: ScoreArray,
    rule: PairRule,
    lambda: f64,
}

/// One step of the pair chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDraw {
    pub pi: Permutation,
    pub pi_pp: Permutation,
    pub i: usize,
    pub j: usize,
    pub y1: f64,
    pub y2: f64,
}

impl ExchangeablePairSpec {
    /// Checks the array against the model's standing assumptions.
    pub fn new(model: PermutationModel, score: ScoreArray) -> Result<Self> {
        if model.n() != score.n() {
            return Err(Error::Dimension(alloc::format!(
                "model on {} points, array is {}x{}",
                model.n(),
                score.n(),
                score.n()
            )));
        }
        let rule = match &model {
            PermutationModel::Uniform { .. } => {
                if !score.row_centered() {
                    return Err(Error::Validation("uniform model needs a row-centered array".into()));
                }
                PairRule::RightTransposition
            }
            PermutationModel::FixedCycleType(_) => {
                if !score.symmetric() || !score.zero_diagonal() {
                    return Err(Error::Validation(
                        "cycle-type model needs a symmetric array with zero diagonal".into(),
                    ));
                }
                PairRule::Conjugation
            }
        };
        Ok(Self::unchecked(model, score, rule))
    }

    /// No validation; used to exhibit what breaks when assumptions fail.
    pub fn unchecked(model: PermutationModel, score: ScoreArray, rule: PairRule) -> Self {
        let lambda = model.lambda();
        ExchangeablePairSpec { model, score, rule, lambda }
    }

    pub fn model(&self) -> &PermutationModel {
        &self.model
    }

    pub fn score(&self) -> &ScoreArray {
        &self.score
    }

    pub fn rule(&self) -> PairRule {
        self.rule
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn partner(&self, pi: &Permutation, i: usize, j: usize) -> Permutation {
        let mut map = pi.images().to_vec();
        match self.rule {
            PairRule::RightTransposition => map.swap(i, j),
            PairRule::Conjugation => {
                map.swap(i, j);
                for v in map.iter_mut() {
                    if *v == i {
                        *v = j;
                    } else if *v == j {
                        *v = i;
                    }
                }
            }
        }
        Permutation::from_images_unchecked(map)
    }

    /// `Y' - Y''` from the handful of entries that change.
    pub fn difference(&self, pi: &Permutation, inv: &[usize], i: usize, j: usize) -> f64 {
        let a = &self.score;
        match self.rule {
            PairRule::RightTransposition => {
                let (k, l) = (pi.apply(i), pi.apply(j));
                (a.get(i, k) + a.get(j, l)) - (a.get(i, l) + a.get(j, k))
            }
            PairRule::Conjugation => conjugation_difference(a, &local_slots(pi, inv, i, j)),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, pi: &Permutation, rng: &mut R) -> PairDraw {
        let n = pi.len();
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let pi_pp = self.partner(pi, i, j);
        PairDraw { y1: self.score.evaluate(pi), y2: self.score.evaluate(&pi_pp), pi: pi.clone(), pi_pp, i, j }
    }

    /// Average of `Y''` over all ordered pairs `(I, J)` for a fixed `π`.
    pub fn pair_average(&self, pi: &Permutation) -> f64 {
        let n = pi.len();
        let inv = pi.inverse();
        let y = self.score.evaluate(pi);
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += self.difference(pi, inv.images(), i, j);
                }
            }
        }
        y - total / (n * (n - 1)) as f64
    }
}

/// `[π⁻¹(I), I, π(I), π⁻¹(J), J, π(J)]`.
pub(crate) fn local_slots(pi: &Permutation, inv: &[usize], i: usize, j: usize) -> [usize; 6] {
    [inv[i], i, pi.apply(i), inv[j], j, pi.apply(j)]
}

/// `Y(π) - Y(τ_IJ π τ_IJ)` given the local slots of `π` at `(I, J)`.
///
/// Only positions in `{π⁻¹(I), I, π⁻¹(J), J}` change, and the partial map
/// `π⁻¹(I) → I → π(I)`, `π⁻¹(J) → J → π(J)` determines both sides there.
pub(crate) fn conjugation_difference(a: &ScoreArray, v: &[usize; 6]) -> f64 {
    let [p, i, k, q, j, l] = *v;
    let sigma = |x: usize| {
        if x == i {
            k
        } else if x == j {
            l
        } else if x == p {
            i
        } else {
            debug_assert_eq!(x, q);
            j
        }
    };
    let tau = |x: usize| {
        if x == i {
            j
        } else if x == j {
            i
        } else {
            x
        }
    };
    let mut domain = [p, i, q, j];
    domain.sort_unstable();
    let mut plus = [0.0f64; 4];
    let mut minus = [0.0f64; 4];
    let mut live = [false; 4];
    let mut m = 0;
    for (idx, &x) in domain.iter().enumerate() {
        if idx > 0 && domain[idx - 1] == x {
            continue;
        }
        plus[m] = a.get(x, sigma(x));
        minus[m] = a.get(x, tau(sigma(tau(x))));
        live[m] = true;
        m += 1;
    }
    // cancel bit-identical entries so that symmetric cancellations are exact
    let mut minus_live = live;
    for s in 0..m {
        if let Some(t) = (0..m).find(|&t| minus_live[t] && minus[t].to_bits() == plus[s].to_bits()) {
            live[s] = false;
            minus_live[t] = false;
        }
    }
    let pos: f64 = (0..m).filter(|&s| live[s]).map(|s| plus[s]).sum();
    let neg: f64 = (0..m).filter(|&t| minus_live[t]).map(|t| minus[t]).sum();
    pos - neg
}

/// Draws `(I, J)` and the partner of `π` under the uniform model.
pub fn exchangeable_pair_uniform<R: Rng + ?Sized>(score: &ScoreArray, pi: &Permutation, rng: &mut R) -> Result<PairDraw> {
    let spec = ExchangeablePairSpec::new(PermutationModel::uniform(score.n())?, score.clone())?;
    if pi.len() != score.n() {
        return Err(Error::Dimension("permutation and array sizes differ".into()));
    }
    Ok(spec.draw(pi, rng))
}

/// Draws `(I, J)` and the conjugated partner of `π` under its cycle type.
pub fn exchangeable_pair_cycle_type<R: Rng + ?Sized>(
    score: &ScoreArray,
    pi: &Permutation,
    rng: &mut R,
) -> Result<PairDraw> {
    if pi.len() != score.n() {
        return Err(Error::Dimension("permutation and array sizes differ".into()));
    }
    let model = PermutationModel::fixed_cycle_type(pi.cycle_type())?;
    let spec = ExchangeablePairSpec::new(model, score.clone())?;
    Ok(spec.draw(pi, rng))
}

/// One atom of an enumerated pair law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairAtom {
    pub y1: f64,
    pub y2: f64,
    pub p: f64,
}

/// Every `(π, I, J)` state with its probability; `cap` bounds the state count.
pub fn enumerate_pair_law(spec: &ExchangeablePairSpec, cap: u128) -> Result<Vec<PairAtom>> {
    let n = spec.model.n();
    let pairs = (n * (n - 1)) as u128;
    let support = spec.model.support_size().unwrap_or(u128::MAX);
    let states = support.saturating_mul(pairs);
    if states > cap {
        return Err(Error::SupportTooLarge { size: states, cap });
    }
    let mut atoms = Vec::with_capacity(states as usize);
    for (pi, p) in spec.model.enumerate_support(cap)? {
        let y1 = spec.score.evaluate(&pi);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let y2 = spec.score.evaluate(&spec.partner(&pi, i, j));
                    atoms.push(PairAtom { y1, y2, p: p / pairs as f64 });
                }
            }
        }
    }
    Ok(atoms)
}

/// Grid on which oracle atoms are merged.
const KEY_SCALE: f64 = 1e9;

fn key(y: f64) -> i64 {
    libm::round(y * KEY_SCALE) as i64
}

/// Exact law of `(Y†, Y‡)`: the pair law reweighted by `(y' - y'')²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquareBiasLaw {
    /// Merged atoms, sorted by `(y1, y2)`.
    pub atoms: Vec<PairAtom>,
    /// `E(Y' - Y'')²` under the original pair law.
    pub second_moment: f64,
}

impl SquareBiasLaw {
    /// Index of the atom at `(y1, y2)` on the merge grid.
    pub fn atom_index(&self, y1: f64, y2: f64) -> Option<usize> {
        let k = (key(y1), key(y2));
        self.atoms.binary_search_by(|a| (key(a.y1), key(a.y2)).cmp(&k)).ok()
    }

    /// Law of `U·Y† + (1-U)·Y‡` evaluated as a distribution function.
    pub fn y_star_cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let (lo, hi) = if a.y1 <= a.y2 { (a.y1, a.y2) } else { (a.y2, a.y1) };
                let frac = if x >= hi {
                    1.0
                } else if x < lo {
                    0.0
                } else if hi == lo {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                };
                a.p * frac
            })
            .sum::<f64>()
            .min(1.0)
    }
}

/// Reweights a finite pair law by `(y' - y'')²`.
pub fn square_bias_oracle(law: &[PairAtom]) -> Result<SquareBiasLaw> {
    let mut merged: BTreeMap<(i64, i64), PairAtom> = BTreeMap::new();
    let mut second_moment = 0.0;
    for a in law {
        if !(a.p >= 0.0) {
            return Err(Error::InvalidInput("negative pair probability".into()));
        }
        let w = (a.y1 - a.y2) * (a.y1 - a.y2) * a.p;
        second_moment += w;
        if w > 0.0 {
            merged
                .entry((key(a.y1), key(a.y2)))
                .and_modify(|m| m.p += w)
                .or_insert(PairAtom { y1: a.y1, y2: a.y2, p: w });
        }
    }
    if !(second_moment > 0.0) {
        return Err(Error::Degenerate("E(Y' - Y'')² is zero".into()));
    }
    let atoms = merged.into_values().map(|a| PairAtom { p: a.p / second_moment, ..a }).collect();
    Ok(SquareBiasLaw { atoms, second_moment })
}

/// Exact `(Y†, Y‡)` by rejection: propose `(π, I, J)` from the base law and
/// accept with probability `(Y' - Y'')² / envelope`.
#[derive(Debug, Clone)]
pub struct SquareBiasRejection {
    spec: ExchangeablePairSpec,
    envelope: f64,
    max_attempts: usize,
}

impl SquareBiasRejection {
    pub fn new(spec: ExchangeablePairSpec) -> Result<Self> {
        let c = spec.score.c_sup();
        let bound = match spec.rule {
            PairRule::RightTransposition => 4.0 * c,
            PairRule::Conjugation => 8.0 * c,
        };
        if !(bound > centering_tolerance(spec.score.n(), c)) {
            return Err(Error::Degenerate("array is identically zero".into()));
        }
        Ok(SquareBiasRejection { spec, envelope: bound * bound, max_attempts: 50_000_000 })
    }

    /// Returns `(y†, y‡, π†)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64, Permutation)> {
        let n = self.spec.model.n();
        for _ in 0..self.max_attempts {
            let pi = self.spec.model.sample(rng);
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let inv = pi.inverse();
            let w = self.spec.difference(&pi, inv.images(), i, j);
            if rng.random::<f64>() * self.envelope < w * w {
                let pp = self.spec.partner(&pi, i, j);
                return Ok((self.spec.score.evaluate(&pi), self.spec.score.evaluate(&pp), pi));
            }
        }
        Err(Error::RejectionExhausted(self.max_attempts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, CycleType, DEFAULT_ENUMERATION_CAP};
    use crate::rng::substream;
    use crate::score::{center_for_cycle_type, center_for_uniform, exact_moments, random_raw};
    use alloc::vec;

    fn worked_array() -> ScoreArray {
        ScoreArray::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap()
    }

    fn cycle_spec(n: usize, pairs: &[(usize, usize)], seed: u64) -> ExchangeablePairSpec {
        let a = center_for_cycle_type(&random_raw(n, &mut substream(seed, 0))).unwrap();
        let model = PermutationModel::fixed_cycle_type(CycleType::from_pairs(pairs).unwrap()).unwrap();
        ExchangeablePairSpec::new(model, a).unwrap()
    }

    #[test]
    fn uniform_difference_matches_entries() {
        let a = center_for_uniform(&random_raw(6, &mut substream(1, 0))).unwrap();
        let spec = ExchangeablePairSpec::new(PermutationModel::uniform(6).unwrap(), a.clone()).unwrap();
        let mut rng = substream(1, 1);
        for _ in 0..200 {
            let pi = spec.model().sample(&mut rng);
            let d = spec.draw(&pi, &mut rng);
            let (i, j) = (d.i, d.j);
            let (k, l) = (pi.apply(i), pi.apply(j));
            let expected = (a.get(i, k) + a.get(j, l)) - (a.get(i, l) + a.get(j, k));
            assert!((d.y1 - d.y2 - expected).abs() < 1e-12);
            assert_eq!(d.pi_pp.apply_transposition(i, j).unwrap(), pi);
        }
    }

    #[test]
    fn uniform_linearity_per_permutation() {
        for n in [3, 5, 9] {
            let a = center_for_uniform(&random_raw(n, &mut substream(2, n as u64))).unwrap();
            let spec = ExchangeablePairSpec::new(PermutationModel::uniform(n).unwrap(), a.clone()).unwrap();
            let mut rng = substream(2, 100 + n as u64);
            for _ in 0..20 {
                let pi = spec.model().sample(&mut rng);
                let y = a.evaluate(&pi);
                let avg = spec.pair_average(&pi);
                let direct: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a.evaluate(&spec.partner(&pi, i, j)))
                    .sum::<f64>()
                    / (n * (n - 1)) as f64;
                let target = (1.0 - 2.0 / (n as f64 - 1.0)) * y;
                assert!((avg - direct).abs() <= 1e-10 * (1.0 + y.abs()));
                assert!((avg - target).abs() <= 1e-10 * y.abs().max(a.c_sup()));
            }
        }
    }

    #[test]
    fn cycle_type_linearity_and_invariance() {
        for (n, pairs) in [(4, vec![(2, 2)]), (7, vec![(7, 1)]), (9, vec![(2, 1), (3, 1), (4, 1)])] {
            let spec = cycle_spec(n, &pairs, 3);
            let a = spec.score().clone();
            let mut rng = substream(3, n as u64);
            for _ in 0..20 {
                let pi = spec.model().sample(&mut rng);
                let y = a.evaluate(&pi);
                let avg = spec.pair_average(&pi);
                let target = (1.0 - 4.0 / n as f64) * y;
                assert!((avg - target).abs() <= 1e-10 * y.abs().max(a.c_sup()), "n={n}");
                let d = spec.draw(&pi, &mut rng);
                assert_eq!(d.pi_pp.cycle_type(), pi.cycle_type());
                let inv = pi.inverse();
                assert!((spec.difference(&pi, inv.images(), d.i, d.j) - (d.y1 - d.y2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_pairs_leave_permutation_unchanged() {
        let spec = cycle_spec(6, &[(2, 3)], 4);
        let pi = spec.model().sample(&mut substream(4, 1));
        for i in 0..6 {
            let j = pi.apply(i);
            assert_eq!(spec.partner(&pi, i, j), pi);
        }
    }

    #[test]
    fn cycle_type_requires_flags() {
        let raw = random_raw(5, &mut substream(5, 0));
        let a = center_for_uniform(&raw).unwrap();
        let pi = Permutation::from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap();
        assert!(matches!(exchangeable_pair_cycle_type(&a, &pi, &mut substream(5, 1)), Err(Error::Validation(_))));
    }

    #[test]
    fn oracle_trivial_example() {
        let law = [
            PairAtom { y1: 0.0, y2: 2.0, p: 1.0 / 3.0 },
            PairAtom { y1: 2.0, y2: 0.0, p: 1.0 / 3.0 },
            PairAtom { y1: 0.0, y2: 0.0, p: 1.0 / 3.0 },
        ];
        let sb = square_bias_oracle(&law).unwrap();
        assert_eq!(sb.atoms.len(), 2);
        for a in &sb.atoms {
            assert!((a.p - 0.5).abs() < 1e-15);
        }
        let flat = [PairAtom { y1: 1.0, y2: 1.0, p: 1.0 }];
        assert!(matches!(square_bias_oracle(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn oracle_marginal_matches_brute_force_reweighting() {
        // every (π, I, J) on n = 3, reweighted one state at a time
        let a = worked_array();
        let spec = ExchangeablePairSpec::new(PermutationModel::uniform(3).unwrap(), a.clone()).unwrap();
        let law = enumerate_pair_law(&spec, 1_000_000).unwrap();
        assert_eq!(law.len(), 36);
        let sb = square_bias_oracle(&law).unwrap();
        let mut brute: Vec<(f64, f64)> = Vec::new();
        let mut total = 0.0;
        for pi in all_permutations(3) {
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        continue;
                    }
                    let mut m = pi.images().to_vec();
                    m.swap(i, j);
                    let y1 = a.evaluate(&pi);
                    let y2 = a.evaluate(&Permutation::from_images(m).unwrap());
                    let w = (y1 - y2) * (y1 - y2);
                    total += w;
                    brute.push((y1, w));
                }
            }
        }
        for target in [-2.0, 0.0, 2.0] {
            let b: f64 = brute.iter().filter(|x| x.0 == target).map(|x| x.1).sum::<f64>() / total;
            let o: f64 = sb.atoms.iter().filter(|x| (x.y1 - target).abs() < 1e-12).map(|x| x.p).sum();
            assert!((b - o).abs() < 1e-12, "{target}: {b} vs {o}");
        }
        let mass: f64 = sb.atoms.iter().map(|x| x.p).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_second_moment_is_two_lambda_sigma_squared() {
        let uni = ExchangeablePairSpec::new(
            PermutationModel::uniform(5).unwrap(),
            center_for_uniform(&random_raw(5, &mut substream(6, 0))).unwrap(),
        )
        .unwrap();
        for spec in [uni, cycle_spec(6, &[(2, 3)], 6), cycle_spec(6, &[(3, 2)], 7), cycle_spec(7, &[(3, 1), (4, 1)], 8)] {
            let law = enumerate_pair_law(&spec, 10_000_000).unwrap();
            let sb = square_bias_oracle(&law).unwrap();
            let var = exact_moments(spec.score(), spec.model(), DEFAULT_ENUMERATION_CAP).unwrap().variance;
            let target = 2.0 * spec.lambda() * var;
            assert!((sb.second_moment - target).abs() < 1e-10 * (1.0 + target), "{} vs {target}", sb.second_moment);
        }
    }

    #[test]
    fn enumeration_respects_cap() {
        let spec = cycle_spec(8, &[(8, 1)], 9);
        assert!(matches!(enumerate_pair_law(&spec, 1000), Err(Error::SupportTooLarge { .. })));
    }

    #[test]
    fn rejection_marginal_mean() {
        // E Y† = E[(Y'-Y'')² Y'] / E(Y'-Y'')²
        let spec = cycle_spec(5, &[(5, 1)], 10);
        let law = enumerate_pair_law(&spec, 1_000_000).unwrap();
        let sb = square_bias_oracle(&law).unwrap();
        let exact: f64 = sb.atoms.iter().map(|a| a.p * a.y1).sum();
        let rej = SquareBiasRejection::new(spec).unwrap();
        let mut rng = substream(10, 1);
        let xs: Vec<f64> = (0..40_000).map(|_| rej.draw(&mut rng).unwrap().0).collect();
        let m = crate::score::MomentSummary::from_sample(&xs).unwrap();
        assert!((m.mean - exact).abs() < 4.0 * m.mean_stderr.unwrap());
    }
}
