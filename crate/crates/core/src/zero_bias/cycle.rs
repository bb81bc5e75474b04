//! Zero-bias construction for `Σ a_{i,π(i)}` with `π` uniform on one
//! fixed-point-free conjugacy class.
//!
//! Each `(π, I, J)` has local slots `[π⁻¹(I), I, π(I), π⁻¹(J), J, π(J)]`.
//! Their equality pattern (the shape) fixes which entries enter
//! `Y' - Y''`, and every class member carries each labelled tuple of a shape
//! equally often. A square-biased draw therefore picks a shape, then a
//! labelled tuple with probability proportional to its squared difference,
//! and relabels a matching occurrence in `π` onto that tuple.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::pair::{conjugation_difference, local_slots};
use super::uniform::ALIAS_ATOM_CAP;
use super::{assemble_draw, IndexSurgery, ZeroBiasDraw};
use crate::error::{Error, Result};
use crate::math::falling;
use crate::perm::{CycleType, Permutation, PermutationModel};
use crate::score::{centering_tolerance, ScoreArray};

const OCCURRENCE_TRIES: usize = 64;
const MAX_REJECTIONS: usize = 100_000_000;

/// Equality pattern of the six local slots, as a restricted growth string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalShape([u8; 6]);

impl LocalShape {
    /// Shape of the slots plus the distinct labels in order of first appearance.
    pub fn of(slots: &[usize; 6]) -> (LocalShape, [usize; 6]) {
        let mut codes = [0u8; 6];
        let mut labels = [usize::MAX; 6];
        let mut kappa = 0usize;
        for (s, &v) in slots.iter().enumerate() {
            match labels[..kappa].iter().position(|&x| x == v) {
                Some(c) => codes[s] = c as u8,
                None => {
                    labels[kappa] = v;
                    codes[s] = kappa as u8;
                    kappa += 1;
                }
            }
        }
        (LocalShape(codes), labels)
    }

    pub fn codes(&self) -> [u8; 6] {
        self.0
    }

    /// Number of distinct labels.
    pub fn kappa(&self) -> usize {
        *self.0.iter().max().unwrap() as usize + 1
    }

    pub fn slots(&self, labels: &[usize; 6]) -> [usize; 6] {
        self.0.map(|c| labels[c as usize])
    }

    pub fn case(&self) -> LocalCase {
        let [p, i, k, q, j, l] = self.0;
        let mut core = [i, k, j, l];
        core.sort_unstable();
        let distinct = 1 + core.windows(2).filter(|w| w[0] != w[1]).count();
        match distinct {
            2 => LocalCase::Stationary,
            3 if k == i => LocalCase::FixedPointI,
            3 if l == j => LocalCase::FixedPointJ,
            3 if k == j => LocalCase::AdjacentIJ { three_cycle: p == l },
            3 => LocalCase::AdjacentJI { three_cycle: q == k },
            _ => LocalCase::Separated { i_two: p == k, j_two: q == l },
        }
    }
}

/// Named configurations of `I, J, π(I), π(J)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LocalCase {
    /// Only two distinct points; `π'' = π`.
    Stationary,
    FixedPointI,
    FixedPointJ,
    /// `π(I) = J`.
    AdjacentIJ { three_cycle: bool },
    /// `π(J) = I`.
    AdjacentJI { three_cycle: bool },
    /// Four distinct points; flags mark 2-cycles through `I` or `J`.
    Separated { i_two: bool, j_two: bool },
}

impl fmt::Display for LocalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let len = |short: bool, k: usize| if short { alloc::format!("{k}") } else { alloc::format!(">={}", k + 1) };
        match *self {
            LocalCase::Stationary => write!(f, "stationary"),
            LocalCase::FixedPointI => write!(f, "fixed-I"),
            LocalCase::FixedPointJ => write!(f, "fixed-J"),
            LocalCase::AdjacentIJ { three_cycle } => write!(f, "adjacent-IJ(|I|{})", len(three_cycle, 3)),
            LocalCase::AdjacentJI { three_cycle } => write!(f, "adjacent-JI(|J|{})", len(three_cycle, 3)),
            LocalCase::Separated { i_two, j_two } => {
                write!(f, "separated(|I|{},|J|{})", len(i_two, 2), len(j_two, 2))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CaseMassMethod {
    Exact,
    MonteCarlo { draws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseMass {
    pub case: LocalCase,
    pub mass: f64,
    pub stderr: Option<f64>,
}

/// Probability of each case under the square-biased joint law of `(π, I, J)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseMasses {
    pub method: CaseMassMethod,
    pub entries: Vec<CaseMass>,
}

impl CaseMasses {
    pub fn mass(&self, case: LocalCase) -> f64 {
        self.entries.iter().filter(|e| e.case == case).map(|e| e.mass).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TupleMode {
    /// Per-shape alias tables over labelled tuples.
    Alias,
    /// Propose `(π, I, J)` from the base law, accept with `(Y' - Y'')² / (8C)²`.
    Rejection,
}

#[derive(Debug, Clone)]
struct ShapeEntry {
    shape: LocalShape,
    occurrences: u64,
    mass: f64,
    tuples: Option<WeightedAliasIndex<f64>>,
}

/// Square-biased sampler for a fixed cycle type.
#[derive(Debug, Clone)]
pub struct CycleTypeZeroBias {
    score: ScoreArray,
    model: PermutationModel,
    shapes: Vec<ShapeEntry>,
    shape_pick: Option<WeightedAliasIndex<f64>>,
    mode: TupleMode,
    envelope: f64,
}

impl CycleTypeZeroBias {
    pub fn new(score: ScoreArray, cycle_type: CycleType) -> Result<Self> {
        let model = PermutationModel::fixed_cycle_type(cycle_type.clone())?;
        let n = score.n();
        if cycle_type.n() != n {
            return Err(Error::Dimension(alloc::format!("cycle type on {} points, array is {n}x{n}", cycle_type.n())));
        }
        if !score.symmetric() || !score.zero_diagonal() {
            return Err(Error::Validation("cycle-type construction needs a symmetric array with zero diagonal".into()));
        }
        if !score.globally_centered() {
            return Err(Error::Validation("cycle-type construction needs entries summing to zero".into()));
        }
        let c = score.c_sup();
        if !(c > centering_tolerance(n, c)) {
            return Err(Error::Degenerate("array is identically zero".into()));
        }

        let rep = cycle_type.representative();
        let inv = rep.inverse();
        let mut counts: BTreeMap<LocalShape, u64> = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    *counts.entry(LocalShape::of(&local_slots(&rep, inv.images(), i, j)).0).or_default() += 1;
                }
            }
        }
        let atoms: u128 = counts.keys().map(|s| falling(n, s.kappa()).unwrap_or(u128::MAX)).sum();
        let mode = if atoms <= ALIAS_ATOM_CAP { TupleMode::Alias } else { TupleMode::Rejection };

        let mut shapes = Vec::with_capacity(counts.len());
        for (shape, occurrences) in counts {
            let (mass, tuples) = if mode == TupleMode::Alias {
                let weights = shape_weights(&score, shape);
                let total: f64 = weights.iter().sum();
                let t = falling(n, shape.kappa()).unwrap() as f64;
                if total > 0.0 {
                    let table = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?;
                    (occurrences as f64 * total / t, Some(table))
                } else {
                    (0.0, None)
                }
            } else {
                (0.0, None)
            };
            shapes.push(ShapeEntry { shape, occurrences, mass, tuples });
        }

        let shape_pick = if mode == TupleMode::Alias {
            let total: f64 = shapes.iter().map(|s| s.mass).sum();
            if !(total > 0.0) {
                return Err(Error::Degenerate("every square weight is zero".into()));
            }
            for s in &mut shapes {
                s.mass /= total;
            }
            Some(
                WeightedAliasIndex::new(shapes.iter().map(|s| s.mass).collect())
                    .map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?,
            )
        } else {
            None
        };

        Ok(CycleTypeZeroBias { score, model, shapes, shape_pick, mode, envelope: 64.0 * c * c })
    }

    pub fn score(&self) -> &ScoreArray {
        &self.score
    }

    pub fn model(&self) -> &PermutationModel {
        &self.model
    }

    pub fn mode(&self) -> TupleMode {
        self.mode
    }

    /// Declared `B`; draws satisfy `gap ≤ 2B = 40C`.
    pub fn gap_half_bound(&self) -> f64 {
        20.0 * self.score.c_sup()
    }

    /// Shapes present in the class with their occurrence counts per member.
    pub fn shapes(&self) -> impl Iterator<Item = (LocalShape, u64)> + '_ {
        self.shapes.iter().map(|s| (s.shape, s.occurrences))
    }

    /// Exact case masses, available when tuple tables were built.
    pub fn case_masses(&self) -> Option<CaseMasses> {
        if self.mode != TupleMode::Alias {
            return None;
        }
        let mut by_case: BTreeMap<LocalCase, f64> = BTreeMap::new();
        for s in &self.shapes {
            *by_case.entry(s.shape.case()).or_default() += s.mass;
        }
        Some(CaseMasses {
            method: CaseMassMethod::Exact,
            entries: by_case.into_iter().map(|(case, mass)| CaseMass { case, mass, stderr: None }).collect(),
        })
    }

    /// Case masses from `draws` square-biased proposals.
    pub fn estimate_case_masses<R: Rng + ?Sized>(&self, draws: usize, rng: &mut R) -> Result<CaseMasses> {
        let mut by_case: BTreeMap<LocalCase, usize> = BTreeMap::new();
        for _ in 0..draws {
            let (shape, _) = self.propose_by_rejection(rng)?;
            *by_case.entry(shape.case()).or_default() += 1;
        }
        let d = draws.max(1) as f64;
        Ok(CaseMasses {
            method: CaseMassMethod::MonteCarlo { draws },
            entries: by_case
                .into_iter()
                .map(|(case, k)| {
                    let p = k as f64 / d;
                    CaseMass { case, mass: p, stderr: Some(libm::sqrt(p * (1.0 - p) / d)) }
                })
                .collect(),
        })
    }

    fn propose_by_rejection<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(LocalShape, [usize; 6])> {
        let n = self.score.n();
        for _ in 0..MAX_REJECTIONS {
            let pi = self.model.sample(rng);
            let (i, j) = distinct_pair(n, rng);
            let inv = pi.inverse();
            let slots = local_slots(&pi, inv.images(), i, j);
            let w = conjugation_difference(&self.score, &slots);
            if rng.random::<f64>() * self.envelope < w * w {
                return Ok(LocalShape::of(&slots));
            }
        }
        Err(Error::RejectionExhausted(MAX_REJECTIONS))
    }

    /// Draws a shape and labelled tuple from the square-biased law.
    pub fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(LocalShape, [usize; 6])> {
        match &self.shape_pick {
            Some(pick) => {
                let entry = &self.shapes[pick.sample(rng)];
                let table = entry.tuples.as_ref().expect("positive mass has a table");
                let labels = unrank_injective(self.score.n(), entry.shape.kappa(), table.sample(rng));
                Ok((entry.shape, labels))
            }
            None => self.propose_by_rejection(rng),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ZeroBiasDraw> {
        let pi = self.model.sample(rng);
        let (shape, target) = self.sample_target(rng)?;
        let u: f64 = rng.random();
        self.draw_from(&pi, shape, &target, u, rng)
    }

    /// Relabels a uniformly chosen occurrence of `shape` in `π` onto `target`.
    pub fn draw_from<R: Rng + ?Sized>(
        &self,
        pi: &Permutation,
        shape: LocalShape,
        target: &[usize; 6],
        u: f64,
        rng: &mut R,
    ) -> Result<ZeroBiasDraw> {
        let n = pi.len();
        let kappa = shape.kappa();
        let inv = pi.inverse();
        let source = find_occurrence(pi, inv.images(), shape, rng)
            .ok_or_else(|| Error::InvalidInput("shape does not occur in this permutation".into()))?;

        let rho = relabelling(&source[..kappa], &target[..kappa], n);
        let mut rho_inv = alloc::vec![0usize; n];
        for (x, &y) in rho.iter().enumerate() {
            rho_inv[y] = x;
        }
        let dagger: Vec<usize> = (0..n).map(|x| rho[pi.apply(rho_inv[x])]).collect();
        let slots = shape.slots(target);
        let (i, j) = (slots[1], slots[4]);
        let ddagger: Vec<usize> = {
            let tau = |x: usize| if x == i { j } else if x == j { i } else { x };
            (0..n).map(|x| tau(dagger[tau(x)])).collect()
        };
        let pi_dagger = Permutation::from_images_unchecked(dagger);
        let pi_ddagger = Permutation::from_images_unchecked(ddagger);

        let mut touched = Vec::with_capacity(4 * kappa);
        for &x in source[..kappa].iter().chain(&target[..kappa]) {
            touched.push(x);
            touched.push(inv.images()[x]);
        }
        let surgery = IndexSurgery { i: source[..kappa].to_vec(), i_dagger: target[..kappa].to_vec() };
        Ok(assemble_draw(&self.score, pi, &pi_dagger, &pi_ddagger, touched, surgery, u))
    }
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Labels of a uniformly chosen `(I, J)` whose local slots have `shape`.
fn find_occurrence<R: Rng + ?Sized>(pi: &Permutation, inv: &[usize], shape: LocalShape, rng: &mut R) -> Option<[usize; 6]> {
    let n = pi.len();
    for _ in 0..OCCURRENCE_TRIES {
        let (i, j) = distinct_pair(n, rng);
        let (s, labels) = LocalShape::of(&local_slots(pi, inv, i, j));
        if s == shape {
            return Some(labels);
        }
    }
    let mut all = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (s, labels) = LocalShape::of(&local_slots(pi, inv, i, j));
                if s == shape {
                    all.push(labels);
                }
            }
        }
    }
    if all.is_empty() {
        None
    } else {
        Some(all[rng.random_range(0..all.len())])
    }
}

/// A permutation of `0..n` sending `from[k]` to `to[k]`, supported on
/// `from ∪ to`; chains of the partial map are closed into cycles.
fn relabelling(from: &[usize], to: &[usize], n: usize) -> Vec<usize> {
    let mut rho: Vec<usize> = (0..n).collect();
    for (&x, &y) in from.iter().zip(to) {
        rho[x] = y;
    }
    let preimage = |y: usize| to.iter().position(|&t| t == y).map(|k| from[k]);
    for &end in to {
        if from.contains(&end) {
            continue;
        }
        let mut x = preimage(end).unwrap();
        while let Some(prev) = preimage(x) {
            x = prev;
        }
        rho[end] = x;
    }
    rho
}

/// Squared differences over all injective label tuples of a shape, in
/// lexicographic order.
fn shape_weights(score: &ScoreArray, shape: LocalShape) -> Vec<f64> {
    let n = score.n();
    let kappa = shape.kappa();
    let mut out = Vec::with_capacity(falling(n, kappa).unwrap_or(0) as usize);
    let mut labels = [0usize; 6];
    let mut used = alloc::vec![false; n];
    fn recurse(
        depth: usize,
        kappa: usize,
        labels: &mut [usize; 6],
        used: &mut [bool],
        f: &mut dyn FnMut(&[usize; 6]),
    ) {
        if depth == kappa {
            f(labels);
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                labels[depth] = v;
                recurse(depth + 1, kappa, labels, used, f);
                used[v] = false;
            }
        }
    }
    recurse(0, kappa, &mut labels, &mut used, &mut |l| {
        let w = conjugation_difference(score, &shape.slots(l));
        out.push(w * w);
    });
    out
}

/// Inverse of the lexicographic enumeration in [`shape_weights`].
fn unrank_injective(n: usize, kappa: usize, mut idx: usize) -> [usize; 6] {
    let mut digits = [0usize; 6];
    for d in (0..kappa).rev() {
        let base = n - d;
        digits[d] = idx % base;
        idx /= base;
    }
    let mut labels = [0usize; 6];
    let mut used = [usize::MAX; 6];
    for d in 0..kappa {
        let mut r = digits[d];
        let mut v = 0;
        loop {
            if !used[..d].contains(&v) {
                if r == 0 {
                    break;
                }
                r -= 1;
            }
            v += 1;
        }
        labels[d] = v;
        used[d] = v;
    }
    labels
}

/// One-shot convenience wrapper around [`CycleTypeZeroBias`].
pub fn zero_bias_draw_cycle_type<R: Rng + ?Sized>(
    score: &ScoreArray,
    model: &PermutationModel,
    rng: &mut R,
) -> Result<ZeroBiasDraw> {
    match model {
        PermutationModel::FixedCycleType(ct) => CycleTypeZeroBias::new(score.clone(), ct.clone())?.draw(rng),
        PermutationModel::Uniform { .. } => Err(Error::Validation("model must be a fixed cycle type".into())),
    }
}
