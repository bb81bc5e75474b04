//! Permutations, cycle types and the two permutation laws: uniform on `S_n`
//! and uniform on a single fixed-point-free conjugacy class.
//!
//! Indices are 0-based throughout; `Display` prints 1-based cycle notation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{factorial, falling};

/// Default enumeration cap, `8!`.
pub const DEFAULT_ENUMERATION_CAP: u128 = 40_320;

/// A bijection of `0..n`, stored as the image of each point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// Builds a permutation from its image vector, checking bijectivity.
    pub fn from_images(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::Validation(alloc::format!(
                    "image vector is not a bijection of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// Builds a permutation of `0..n` from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                if x >= n || used[x] {
                    return Err(Error::Validation(alloc::format!(
                        "cycle entry {x} out of range or repeated"
                    )));
                }
                used[x] = true;
                map[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { map })
    }

    pub(crate) fn from_images_unchecked(map: Vec<usize>) -> Self {
        debug_assert!(Permutation::from_images(map.clone()).is_ok());
        Permutation { map }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "composing permutations of different degree");
        Permutation { map: other.map.iter().map(|&x| self.map[x]).collect() }
    }

    /// `rho⁻¹ ∘ self ∘ rho`.
    pub fn conjugate(&self, rho: &Permutation) -> Permutation {
        rho.inverse().compose(&self.compose(rho))
    }

    /// Right multiplication by a transposition, `self ∘ τ_ij`.
    pub fn apply_transposition(&self, i: usize, j: usize) -> Result<Permutation> {
        check_pair(self.len(), i, j)?;
        let mut map = self.map.clone();
        map.swap(i, j);
        Ok(Permutation { map })
    }

    /// `τ_ij ∘ self ∘ τ_ij`: interchange `i` and `j` in the cycle representation.
    pub fn conjugate_by_transposition(&self, i: usize, j: usize) -> Result<Permutation> {
        check_pair(self.len(), i, j)?;
        let mut out = self.clone();
        out.conjugate_transposition_in_place(i, j);
        Ok(out)
    }

    pub(crate) fn conjugate_transposition_in_place(&mut self, i: usize, j: usize) {
        let swap = |x: usize| if x == i { j } else if x == j { i } else { x };
        let old_i = self.map[i];
        let old_j = self.map[j];
        self.map[i] = swap(old_j);
        self.map[j] = swap(old_i);
        let n = self.len();
        for x in 0..n {
            if x == i || x == j {
                continue;
            }
            let v = self.map[x];
            if v == i || v == j {
                self.map[x] = swap(v);
            }
        }
    }

    /// Number of points in the cycle containing `i`.
    pub fn cycle_length_at(&self, i: usize) -> usize {
        let mut len = 1;
        let mut x = self.map[i];
        while x != i {
            x = self.map[x];
            len += 1;
        }
        len
    }

    /// Cycles in canonical form: each starts at its minimum, ordered by that minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.map[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut counts = vec![0usize; self.len()];
        for c in self.cycles() {
            counts[c.len() - 1] += 1;
        }
        CycleType { n: self.len(), counts }
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|(i, v)| i == *v).count()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, cycle) in self.cycles().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "(")?;
            for (t, x) in cycle.iter().enumerate() {
                if t > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        write!(f, ")")
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidInput(alloc::format!(
            "transposition needs distinct indices in 0..{n}, got ({i}, {j})"
        )));
    }
    Ok(())
}

/// Cycle counts `c_q`, stored at `counts[q - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleType {
    n: usize,
    counts: Vec<usize>,
}

impl CycleType {
    /// From `(q, c_q)` pairs; `n = Σ q c_q`. Repeated lengths accumulate.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let n: usize = pairs.iter().map(|&(q, c)| q * c).sum();
        if n == 0 {
            return Err(Error::Dimension("cycle type describes an empty permutation".into()));
        }
        let mut counts = vec![0; n];
        for &(q, c) in pairs {
            if q == 0 {
                return Err(Error::Validation("cycle length must be positive".into()));
            }
            counts[q - 1] += c;
        }
        Ok(CycleType { n, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c_q`; zero for `q` outside `1..=n`.
    pub fn count(&self, q: usize) -> usize {
        if q == 0 || q > self.n {
            0
        } else {
            self.counts[q - 1]
        }
    }

    /// Non-zero `(q, c_q)` pairs in increasing `q`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(q, &c)| (q + 1, c))
            .collect()
    }

    /// Cycle lengths in non-increasing order, one entry per cycle.
    pub fn template(&self) -> Vec<usize> {
        let mut lengths = Vec::new();
        for q in (1..=self.n).rev() {
            for _ in 0..self.count(q) {
                lengths.push(q);
            }
        }
        lengths
    }

    /// Class size `n! / Π q^{c_q} c_q!`, `None` on overflow.
    pub fn class_size(&self) -> Option<u128> {
        let mut size = factorial(self.n)?;
        for (q, c) in self.pairs() {
            let qc = (q as u128).checked_pow(c as u32)?;
            size /= qc;
            size /= factorial(c)?;
        }
        Some(size)
    }

    /// The canonical member whose cycles are consecutive runs of `0..n`.
    pub fn representative(&self) -> Permutation {
        let mut map = vec![0; self.n];
        let mut start = 0;
        for q in self.template() {
            for k in 0..q {
                map[start + k] = start + (k + 1) % q;
            }
            start += q;
        }
        Permutation::from_images_unchecked(map)
    }
}

/// A sampleable law on `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PermutationModel {
    Uniform { n: usize },
    FixedCycleType(CycleType),
}

impl PermutationModel {
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(alloc::format!("uniform model needs n >= 3, got {n}")));
        }
        Ok(PermutationModel::Uniform { n })
    }

    pub fn fixed_cycle_type(ct: CycleType) -> Result<Self> {
        if ct.n() < 4 {
            return Err(Error::Dimension(alloc::format!(
                "cycle-type model needs n >= 4, got {}",
                ct.n()
            )));
        }
        if ct.count(1) != 0 {
            return Err(Error::Validation("cycle-type model must not have fixed points (c_1 = 0)".into()));
        }
        Ok(PermutationModel::FixedCycleType(ct))
    }

    pub fn n(&self) -> usize {
        match self {
            PermutationModel::Uniform { n } => *n,
            PermutationModel::FixedCycleType(ct) => ct.n(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, PermutationModel::Uniform { .. })
    }

    /// Linearity constant of the matching exchangeable pair.
    pub fn lambda(&self) -> f64 {
        let n = self.n() as f64;
        match self {
            PermutationModel::Uniform { .. } => 2.0 / (n - 1.0),
            PermutationModel::FixedCycleType(_) => 4.0 / n,
        }
    }

    /// Support size; `None` when it overflows `u128`.
    pub fn support_size(&self) -> Option<u128> {
        match self {
            PermutationModel::Uniform { n } => factorial(*n),
            PermutationModel::FixedCycleType(ct) => ct.class_size(),
        }
    }

    /// Exact draw: Fisher–Yates for the uniform law; for a conjugacy class,
    /// a uniform arrangement of `0..n` poured into the cycle-length template.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        match self {
            PermutationModel::Uniform { n } => {
                let mut map: Vec<usize> = (0..*n).collect();
                map.shuffle(rng);
                Permutation { map }
            }
            PermutationModel::FixedCycleType(ct) => {
                let n = ct.n();
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                let mut map = vec![0; n];
                let mut start = 0;
                for q in ct.template() {
                    let slot = &order[start..start + q];
                    for k in 0..q {
                        map[slot[k]] = slot[(k + 1) % q];
                    }
                    start += q;
                }
                Permutation { map }
            }
        }
    }

    /// Every support point with its exact probability.
    pub fn enumerate_support(&self, cap: u128) -> Result<Vec<(Permutation, f64)>> {
        let size = self.support_size().unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::SupportTooLarge { size, cap });
        }
        let perms = match self {
            PermutationModel::Uniform { n } => all_permutations(*n),
            PermutationModel::FixedCycleType(ct) => class_members(ct),
        };
        debug_assert_eq!(perms.len() as u128, size);
        let p = 1.0 / perms.len() as f64;
        Ok(perms.into_iter().map(|pi| (pi, p)).collect())
    }
}

/// All of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(factorial(n).unwrap_or(0).min(1 << 24) as usize);
    loop {
        out.push(Permutation { map: cur.clone() });
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Every member of a conjugacy class, each generated once: the smallest
/// unused point always opens the next cycle.
fn class_members(ct: &CycleType) -> Vec<Permutation> {
    fn rec(
        n: usize,
        counts: &mut Vec<usize>,
        used: &mut Vec<bool>,
        map: &mut Vec<usize>,
        out: &mut Vec<Permutation>,
    ) {
        let Some(start) = (0..n).find(|&x| !used[x]) else {
            out.push(Permutation { map: map.clone() });
            return;
        };
        for q in 1..=n {
            if counts[q - 1] == 0 {
                continue;
            }
            counts[q - 1] -= 1;
            used[start] = true;
            let mut cycle = vec![start];
            extend_cycle(n, q, &mut cycle, counts, used, map, out);
            used[start] = false;
            counts[q - 1] += 1;
        }
    }
    fn extend_cycle(
        n: usize,
        q: usize,
        cycle: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        used: &mut Vec<bool>,
        map: &mut Vec<usize>,
        out: &mut Vec<Permutation>,
    ) {
        if cycle.len() == q {
            for k in 0..q {
                map[cycle[k]] = cycle[(k + 1) % q];
            }
            rec(n, counts, used, map, out);
            return;
        }
        for x in 0..n {
            if used[x] {
                continue;
            }
            used[x] = true;
            cycle.push(x);
            extend_cycle(n, q, cycle, counts, used, map, out);
            cycle.pop();
            used[x] = false;
        }
    }
    let n = ct.n();
    let mut counts: Vec<usize> = (1..=n).map(|q| ct.count(q)).collect();
    let mut out = Vec::new();
    rec(n, &mut counts, &mut vec![false; n], &mut vec![0; n], &mut out);
    out
}

/// Number of ordered pairs `(i, j)`, `i ≠ j`.
pub fn ordered_pair_count(n: usize) -> u128 {
    falling(n, 2).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    fn sample_permutation() -> Permutation {
        // ((1,3,7,5),(2,6,4)) in 1-based notation
        Permutation::from_cycles(7, &[&[0, 2, 6, 4], &[1, 5, 3]]).unwrap()
    }

    #[test]
    fn cycle_type_of_worked_example() {
        let pi = sample_permutation();
        let ct = pi.cycle_type();
        assert_eq!(ct.count(4), 1);
        assert_eq!(ct.count(3), 1);
        assert_eq!(ct.pairs(), alloc::vec![(3, 1), (4, 1)]);
        assert_eq!(pi.cycle_length_at(1), 3);
        assert_eq!(pi.to_string(), "((1,3,7,5),(2,6,4))");
    }

    #[test]
    fn cycle_type_trivial_cases() {
        assert_eq!(Permutation::identity(5).cycle_type().count(1), 5);
        let t = Permutation::identity(2).apply_transposition(0, 1).unwrap();
        assert_eq!(t.cycle_type().count(2), 1);
    }

    #[test]
    fn group_operations() {
        let pi = sample_permutation();
        assert_eq!(pi.compose(&pi.inverse()), Permutation::identity(7));
        let tau = Permutation::identity(7).apply_transposition(2, 5).unwrap();
        assert_eq!(pi.conjugate(&tau).cycle_type(), pi.cycle_type());
        assert_eq!(pi.conjugate(&tau), pi.conjugate_by_transposition(2, 5).unwrap());
        assert!(pi.apply_transposition(3, 3).is_err());
        assert!(Permutation::from_images(alloc::vec![0, 0, 1]).is_err());
    }

    #[test]
    fn conjugation_by_transposition_matches_general_conjugation() {
        let mut rng = substream(1, 0);
        let model = PermutationModel::uniform(7).unwrap();
        for _ in 0..200 {
            let pi = model.sample(&mut rng);
            let i = rng.random_range(0..7);
            let j = (i + rng.random_range(1..7)) % 7;
            let tau = Permutation::identity(7).apply_transposition(i, j).unwrap();
            assert_eq!(pi.conjugate(&tau), pi.conjugate_by_transposition(i, j).unwrap());
        }
    }

    #[test]
    fn class_sizes_by_enumeration() {
        let two_two = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(2, 2)]).unwrap()).unwrap();
        let support = two_two.enumerate_support(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(support.len(), 3);
        assert!(support.iter().all(|(_, p)| (*p - 1.0 / 3.0).abs() < 1e-15));

        let four = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(4, 1)]).unwrap()).unwrap();
        assert_eq!(four.enumerate_support(DEFAULT_ENUMERATION_CAP).unwrap().len(), 6);

        let five = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(5, 1)]).unwrap()).unwrap();
        assert_eq!(five.enumerate_support(DEFAULT_ENUMERATION_CAP).unwrap().len(), 24);

        let u3 = PermutationModel::uniform(3).unwrap().enumerate_support(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(u3.len(), 6);
        let total: f64 = u3.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_enumeration_matches_filtering_s_n() {
        for pairs in [&[(2usize, 3usize)][..], &[(3, 2)], &[(2, 1), (4, 1)], &[(6, 1)], &[(2, 1), (3, 1)]] {
            let ct = CycleType::from_pairs(pairs).unwrap();
            let by_class: alloc::collections::BTreeSet<_> = class_members(&ct).into_iter().collect();
            let by_filter: alloc::collections::BTreeSet<_> =
                all_permutations(ct.n()).into_iter().filter(|p| p.cycle_type() == ct).collect();
            assert_eq!(by_class, by_filter);
            assert_eq!(by_class.len() as u128, ct.class_size().unwrap());
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let model = PermutationModel::uniform(9).unwrap();
        assert!(matches!(
            model.enumerate_support(DEFAULT_ENUMERATION_CAP),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn model_validation() {
        assert!(PermutationModel::uniform(2).is_err());
        assert!(PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(1, 1), (3, 1)]).unwrap()).is_err());
        assert!(PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(3, 1)]).unwrap()).is_err());
    }

    #[test]
    fn fixed_cycle_type_samples_stay_in_class() {
        let ct = CycleType::from_pairs(&[(2, 1), (3, 2)]).unwrap();
        let model = PermutationModel::fixed_cycle_type(ct.clone()).unwrap();
        let mut rng = substream(3, 0);
        for _ in 0..1000 {
            let pi = model.sample(&mut rng);
            assert_eq!(pi.cycle_type(), ct);
            assert_eq!(pi.fixed_points(), 0);
        }
    }

    #[test]
    fn two_two_sampler_frequencies() {
        let model = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(2, 2)]).unwrap()).unwrap();
        let mut rng = substream(11, 0);
        let reps = 300_000;
        let mut freq: BTreeMap<Permutation, usize> = BTreeMap::new();
        for _ in 0..reps {
            *freq.entry(model.sample(&mut rng)).or_default() += 1;
        }
        assert_eq!(freq.len(), 3);
        let p = 1.0 / 3.0;
        let se = crate::math::sqrt(p * (1.0 - p) / reps as f64);
        for (_, c) in freq {
            assert!((c as f64 / reps as f64 - p).abs() <= 4.0 * se);
        }
    }
}
