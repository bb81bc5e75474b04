//! Score arrays `{a_ij}` defining combinatorial sums `Y = Σ_i a_{i,π(i)}`,
//! their centering, and exact or Monte Carlo moments under a permutation law.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};
use crate::perm::{Permutation, PermutationModel};

/// Dense row-major `n × n` real array with centering metadata.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreArray {
    n: usize,
    entries: Vec<f64>,
    c_sup: f64,
    row_centered: bool,
    symmetric: bool,
    zero_diagonal: bool,
}

/// Absolute tolerance for row sums: `1e-12 · n · C`.
pub fn centering_tolerance(n: usize, c_sup: f64) -> f64 {
    1e-12 * n as f64 * c_sup.max(f64::MIN_POSITIVE)
}

impl ScoreArray {
    /// Wraps raw entries; flags are detected, not assumed.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("score array must be square and non-empty".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("score array entries must be finite".into()));
        }
        Ok(Self::from_entries(n, rows.iter().flatten().copied().collect()))
    }

    pub(crate) fn from_entries(n: usize, entries: Vec<f64>) -> Self {
        let mut out = ScoreArray {
            n,
            entries,
            c_sup: 0.0,
            row_centered: false,
            symmetric: false,
            zero_diagonal: false,
        };
        out.refresh_flags();
        out
    }

    fn refresh_flags(&mut self) {
        let n = self.n;
        self.c_sup = self.entries.iter().fold(0.0, |m, &x| m.max(abs(x)));
        let tol = centering_tolerance(n, self.c_sup);
        self.row_centered = (0..n).all(|i| abs(self.row(i).iter().sum::<f64>()) <= tol);
        self.symmetric = (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)));
        self.zero_diagonal = (0..n).all(|i| self.get(i, i) == 0.0);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// `C = max |a_ij|`.
    pub fn c_sup(&self) -> f64 {
        self.c_sup
    }

    pub fn row_centered(&self) -> bool {
        self.row_centered
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    /// `|Σ_ij a_ij| ≤ 1e-12 · n² · C`.
    pub fn globally_centered(&self) -> bool {
        abs(self.entries.iter().sum::<f64>()) <= centering_tolerance(self.n * self.n, self.c_sup)
    }

    /// `Y(π) = Σ_i a_{i,π(i)}`.
    #[inline]
    pub fn evaluate(&self, pi: &Permutation) -> f64 {
        debug_assert_eq!(pi.len(), self.n);
        pi.images().iter().enumerate().map(|(i, &j)| self.entries[i * self.n + j]).sum()
    }

    /// `Σ_{i ∈ idx} a_{i,π(i)}`.
    pub fn partial_sum(&self, pi: &Permutation, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.get(i, pi.apply(i))).sum()
    }

    pub fn scale(&self, c: f64) -> ScoreArray {
        Self::from_entries(self.n, self.entries.iter().map(|x| x * c).collect())
    }

    /// Copy with the diagonal overwritten by `value`.
    pub fn with_diagonal(&self, value: f64) -> ScoreArray {
        let mut entries = self.entries.clone();
        for i in 0..self.n {
            entries[i * self.n + i] = value;
        }
        Self::from_entries(self.n, entries)
    }

    /// Sets the diagonal to `value` and shifts every off-diagonal entry so
    /// the sum over all `n²` entries is unchanged.
    pub fn inject_diagonal(&self, value: f64) -> ScoreArray {
        let n = self.n;
        let old: f64 = (0..n).map(|i| self.entries[i * n + i]).sum();
        let shift = (n as f64 * value - old) / (n * (n - 1)).max(1) as f64;
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = if i == j { value } else { entries[i * n + j] - shift };
            }
        }
        Self::from_entries(n, entries)
    }
}

/// Uniform-law centering: subtract each row's mean.
pub fn center_for_uniform(raw: &[Vec<f64>]) -> Result<ScoreArray> {
    let a = ScoreArray::from_rows(raw)?;
    let n = a.n;
    if n < 2 {
        return Err(Error::Dimension(alloc::format!("centering needs n >= 2, got {n}")));
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let mean = a.row(i).iter().sum::<f64>() / n as f64;
        entries.extend(a.row(i).iter().map(|x| x - mean));
    }
    let mut out = ScoreArray::from_entries(n, entries);
    // exact by construction up to the rounding the tolerance absorbs
    out.row_centered = true;
    Ok(out)
}

/// Cycle-type centering: symmetrize, zero the diagonal, then subtract the
/// off-diagonal mean from every off-diagonal entry so `Σ_ij a_ij = 0`.
/// Rows are not individually centered; `row_centered` is recorded as false.
pub fn center_for_cycle_type(raw: &[Vec<f64>]) -> Result<ScoreArray> {
    let a = ScoreArray::from_rows(raw)?;
    let n = a.n;
    if n < 4 {
        return Err(Error::Dimension(alloc::format!("cycle-type centering needs n >= 4, got {n}")));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                entries[i * n + j] = 0.5 * (a.get(i, j) + a.get(j, i));
            }
        }
    }
    let off: f64 = entries.iter().sum::<f64>() / (n * (n - 1)) as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                entries[i * n + j] -= off;
            }
        }
    }
    // keep exact symmetry after the float subtraction
    for i in 0..n {
        for j in 0..i {
            entries[i * n + j] = entries[j * n + i];
        }
    }
    let mut out = ScoreArray::from_entries(n, entries);
    out.row_centered = false;
    Ok(out)
}

/// `max |a_ij|`.
pub fn sup_norm(a: &ScoreArray) -> f64 {
    a.c_sup()
}

/// Raw `n × n` entries drawn uniformly from `[-1, 1)`.
pub fn random_raw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MomentMethod {
    ExactEnumeration,
    MonteCarlo,
}

/// Mean and variance of `Y`, exact or estimated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub method: MomentMethod,
    /// Standard error of the variance estimate (Monte Carlo only).
    pub stderr: Option<f64>,
    /// Standard error of the mean estimate (Monte Carlo only).
    pub mean_stderr: Option<f64>,
    pub sample_count: Option<u64>,
}

impl MomentSummary {
    pub fn sigma(&self) -> f64 {
        sqrt(self.variance)
    }

    /// Exact moments of an explicit discrete law given as `(value, probability)` atoms.
    pub fn from_law(atoms: impl IntoIterator<Item = (f64, f64)> + Clone) -> Self {
        let mean: f64 = atoms.clone().into_iter().map(|(y, p)| p * y).sum();
        let variance: f64 = atoms.into_iter().map(|(y, p)| p * (y - mean) * (y - mean)).sum();
        MomentSummary {
            mean,
            variance: variance.max(0.0),
            method: MomentMethod::ExactEnumeration,
            stderr: None,
            mean_stderr: None,
            sample_count: None,
        }
    }

    /// Unbiased mean/variance of a sample, with standard errors.
    pub fn from_sample(sample: &[f64]) -> Result<Self> {
        let n = sample.len();
        if n < 2 {
            return Err(Error::InvalidInput("moment estimation needs at least 2 samples".into()));
        }
        let nf = n as f64;
        let mean = sample.iter().sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &y in sample {
            let d = y - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (nf - 1.0);
        let mu2 = m2 / nf;
        let mu4 = m4 / nf;
        // Var(s²) ≈ (μ4 − σ⁴ (n−3)/(n−1)) / n
        let var_of_var = ((mu4 - mu2 * mu2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
        Ok(MomentSummary {
            mean,
            variance,
            method: MomentMethod::MonteCarlo,
            stderr: Some(sqrt(var_of_var)),
            mean_stderr: Some(sqrt(variance / nf)),
            sample_count: Some(n as u64),
        })
    }
}

/// Exact `E Y` and `Var Y` by enumerating the model's support.
pub fn exact_moments(a: &ScoreArray, model: &PermutationModel, cap: u128) -> Result<MomentSummary> {
    check_model_fit(a, model)?;
    let support = model.enumerate_support(cap)?;
    Ok(MomentSummary::from_law(support.iter().map(|(pi, p)| (a.evaluate(pi), *p))))
}

/// Monte Carlo moments from `reps` independent draws.
pub fn mc_moments<R: Rng + ?Sized>(
    a: &ScoreArray,
    model: &PermutationModel,
    reps: usize,
    rng: &mut R,
) -> Result<MomentSummary> {
    check_model_fit(a, model)?;
    if reps < 2 {
        return Err(Error::InvalidInput(alloc::format!("mc_moments needs reps >= 2, got {reps}")));
    }
    let sample: Vec<f64> = (0..reps).map(|_| a.evaluate(&model.sample(rng))).collect();
    MomentSummary::from_sample(&sample)
}

pub(crate) fn check_model_fit(a: &ScoreArray, model: &PermutationModel) -> Result<()> {
    if a.n() != model.n() {
        return Err(Error::Dimension(alloc::format!(
            "score array has n = {} but permutation model has n = {}",
            a.n(),
            model.n()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{CycleType, DEFAULT_ENUMERATION_CAP};
    use crate::rng::substream;
    use alloc::vec;
    use proptest::prelude::*;

    pub(crate) fn three_by_three() -> ScoreArray {
        ScoreArray::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap()
    }

    #[test]
    fn uniform_centering_examples() {
        let a = center_for_uniform(&[vec![1.0, 2.0, 3.0], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert_eq!(a.row(0), &[-1.0, 0.0, 1.0]);

        let z = center_for_uniform(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert_eq!(z.c_sup(), 0.0);
        assert!(z.rows().iter().flatten().all(|&x| x == 0.0));

        let b = center_for_uniform(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(b.rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(b.c_sup(), 1.0);
        assert!(b.row_centered());

        assert!(matches!(center_for_uniform(&[vec![1.0]]), Err(Error::Dimension(_))));
    }

    #[test]
    fn cycle_type_centering_examples() {
        // already symmetric, zero diagonal, zero total
        let ok = vec![
            vec![0.0, 1.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0, -1.0],
            vec![-1.0, 0.0, 0.0, 1.0],
            vec![0.0, -1.0, 1.0, 0.0],
        ];
        let a = center_for_cycle_type(&ok).unwrap();
        assert_eq!(a.rows(), ok);
        assert!(!a.row_centered());

        // [[0,4],[0,0]] padded: symmetrized pair (2,2); off-diagonal mean 4/12 subtracted
        let mut raw = vec![vec![0.0; 4]; 4];
        raw[0][1] = 4.0;
        let b = center_for_cycle_type(&raw).unwrap();
        let shift = 4.0 / 12.0;
        assert!((b.get(0, 1) - (2.0 - shift)).abs() < 1e-15);
        assert!((b.get(1, 0) - (2.0 - shift)).abs() < 1e-15);
        assert!((b.get(2, 3) + shift).abs() < 1e-15);
        assert!((0..4).all(|i| b.get(i, i) == 0.0));
        assert!(b.symmetric() && b.zero_diagonal() && b.globally_centered());

        let mut diag = ok.clone();
        diag[2][2] = 5.0;
        assert!(center_for_cycle_type(&diag).unwrap().zero_diagonal());
        assert!(center_for_cycle_type(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let a = ScoreArray::from_rows(&[vec![1.0, -1.0], vec![-2.0, 2.0]]).unwrap();
        assert_eq!(sup_norm(&a), 2.0);
        assert_eq!(sup_norm(&ScoreArray::from_rows(&[vec![0.0; 2], vec![0.0; 2]]).unwrap()), 0.0);
        assert_eq!(sup_norm(&three_by_three()), 1.0);
    }

    #[test]
    fn exact_moments_three_by_three() {
        let model = PermutationModel::uniform(3).unwrap();
        let m = exact_moments(&three_by_three(), &model, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(m.mean.abs() < 1e-12 * 3.0);
        assert!((m.variance - 2.0).abs() < 1e-12);
        assert_eq!(m.method, MomentMethod::ExactEnumeration);
        assert!(m.stderr.is_none());
    }

    #[test]
    fn exact_moments_zero_array_and_cap() {
        let z = ScoreArray::from_rows(&vec![vec![0.0; 4]; 4]).unwrap();
        let ct = PermutationModel::fixed_cycle_type(CycleType::from_pairs(&[(4, 1)]).unwrap()).unwrap();
        let m = exact_moments(&z, &ct, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 0.0));
        let big = ScoreArray::from_rows(&vec![vec![0.0; 9]; 9]).unwrap();
        assert!(matches!(
            exact_moments(&big, &PermutationModel::uniform(9).unwrap(), DEFAULT_ENUMERATION_CAP),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn mc_moments_contracts() {
        let model = PermutationModel::uniform(3).unwrap();
        let z = ScoreArray::from_rows(&vec![vec![0.0; 3]; 3]).unwrap();
        let m = mc_moments(&z, &model, 1000, &mut substream(1, 0)).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 0.0));
        assert!(mc_moments(&z, &model, 1, &mut substream(1, 0)).is_err());

        let a = three_by_three();
        let m1 = mc_moments(&a, &model, 10_000, &mut substream(5, 2)).unwrap();
        let m2 = mc_moments(&a, &model, 10_000, &mut substream(5, 2)).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn mc_variance_within_four_stderr_of_exact() {
        let model = PermutationModel::uniform(3).unwrap();
        let m = mc_moments(&three_by_three(), &model, 1_000_000, &mut substream(99, 0)).unwrap();
        assert!((m.variance - 2.0).abs() <= 4.0 * m.stderr.unwrap());
    }

    #[test]
    fn mc_variance_coverage_over_seeds() {
        let model = PermutationModel::uniform(3).unwrap();
        let a = three_by_three();
        let covered = (0..100)
            .filter(|&s| {
                let m = mc_moments(&a, &model, 20_000, &mut substream(1234, s)).unwrap();
                (m.variance - 2.0).abs() <= 4.0 * m.stderr.unwrap()
            })
            .count();
        assert!(covered >= 99, "covered {covered} of 100");
    }

    fn arb_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..7).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), n))
    }

    proptest! {
        #[test]
        fn centering_is_idempotent(rows in arb_rows()) {
            let once = center_for_uniform(&rows).unwrap();
            let twice = center_for_uniform(&once.rows()).unwrap();
            let tol = centering_tolerance(once.n(), once.c_sup()) + 1e-15;
            for i in 0..once.n() {
                for j in 0..once.n() {
                    prop_assert!((once.get(i, j) - twice.get(i, j)).abs() <= tol);
                }
            }
        }

        #[test]
        fn sup_norm_is_absolutely_homogeneous(rows in arb_rows(), c in -5.0f64..5.0) {
            let a = ScoreArray::from_rows(&rows).unwrap();
            prop_assert!((sup_norm(&a.scale(c)) - c.abs() * sup_norm(&a)).abs() <= 1e-12 * (1.0 + sup_norm(&a)));
        }

        #[test]
        fn row_centered_arrays_have_zero_uniform_mean(rows in (3usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), n))) {
            let a = center_for_uniform(&rows).unwrap();
            let m = exact_moments(&a, &PermutationModel::uniform(a.n()).unwrap(), DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert!(m.mean.abs() <= 1e-12 * a.n() as f64 * a.c_sup().max(1.0));
        }
    }
}
