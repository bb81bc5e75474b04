//! Pearson chi-square goodness of fit against a finite law.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Cells with expected count below this are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Cells after pooling.
    pub cells: usize,
    /// Draws that landed outside the support of the law.
    pub outside: u64,
}

/// `observed[k]` counts draws on atom `k` of a law with probabilities
/// `probs`; `outside` counts draws on no atom, which forces `p = 0`.
pub fn chi_square(observed: &[u64], probs: &[f64], outside: u64) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total = observed.iter().sum::<u64>() + outside;
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n;
        if e < MIN_EXPECTED {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        if pooled.1 >= MIN_EXPECTED || cells.is_empty() {
            cells.push(pooled);
        } else {
            // fold the small remainder into the smallest regular cell
            let k = (0..cells.len()).min_by(|&a, &b| cells[a].1.total_cmp(&cells[b].1)).unwrap();
            cells[k].0 += pooled.0;
            cells[k].1 += pooled.1;
        }
    }
    let statistic: f64 = cells.iter().filter(|c| c.1 > 0.0).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = cells.len().saturating_sub(1);
    let p_value = if outside > 0 {
        0.0
    } else if df == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(df as f64).map(|d| d.cdf(statistic)).unwrap_or(0.0)
    };
    ChiSquare { statistic, df, p_value, cells: cells.len(), outside }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts_give_zero_statistic() {
        let r = chi_square(&[250, 500, 250], &[0.25, 0.5, 0.25], 0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.df, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4 on one degree of freedom
        let r = chi_square(&[60, 40], &[0.5, 0.5], 0);
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.045_500_263_896_358_4).abs() < 1e-9);
    }

    #[test]
    fn small_cells_pool_and_outside_fails() {
        let r = chi_square(&[500, 498, 1, 1], &[0.5, 0.498, 0.001, 0.001], 0);
        assert_eq!(r.cells, 2);
        assert_eq!(chi_square(&[10, 10], &[0.5, 0.5], 1).p_value, 0.0);
    }
}
