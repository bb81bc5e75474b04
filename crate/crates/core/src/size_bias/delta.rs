use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use super::SizeBiasSampler;
use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DeltaMethod {
    ExactEnumeration,
    MonteCarlo,
}

/// Estimate of `sqrt(Var(E(Yˢ - Y | state)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaProxy {
    pub estimate: f64,
    /// Bias-corrected variance of the conditional mean.
    pub variance: f64,
    /// Delete-one jackknife standard error of `variance`.
    pub variance_stderr: Option<f64>,
    pub stderr: Option<f64>,
    pub outer: usize,
    pub inner: usize,
    pub method: DeltaMethod,
}

/// Nested Monte Carlo: `outer` states, `inner` regenerations per state.
///
/// The variance of the per-state means is reduced by the average
/// within-state variance over `inner`, removing the inner-noise bias.
pub fn delta_proxy_estimate<R: Rng + ?Sized>(
    sampler: &SizeBiasSampler,
    outer: usize,
    inner: usize,
    rng: &mut R,
) -> Result<DeltaProxy> {
    if outer < 2 {
        return Err(Error::InvalidInput("delta proxy needs at least 2 outer replicates".into()));
    }
    let deterministic = sampler.model().deterministic_regeneration();
    let inner = if deterministic { 1 } else { inner };
    if inner < 2 && !deterministic {
        return Err(Error::InvalidInput("random regeneration needs at least 2 inner replicates".into()));
    }
    let mut means = Vec::with_capacity(outer);
    let mut within = Vec::with_capacity(outer);
    for _ in 0..outer {
        let mut state = sampler.model().sample_state(rng);
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for _ in 0..inner {
            let g = sampler.conditional_increment(&mut state, rng)?;
            s1 += g;
            s2 += g * g;
        }
        let k = inner as f64;
        let m = s1 / k;
        means.push(m);
        within.push(if inner > 1 { ((s2 - k * m * m) / (k - 1.0)).max(0.0) } else { 0.0 });
    }
    Ok(summarise(&means, &within, inner))
}

fn summarise(means: &[f64], within: &[f64], inner: usize) -> DeltaProxy {
    let r = means.len() as f64;
    let k = inner as f64;
    let center = means.iter().sum::<f64>() / r;
    let dev: Vec<f64> = means.iter().map(|m| m - center).collect();
    let s1: f64 = dev.iter().sum();
    let s2: f64 = dev.iter().map(|d| d * d).sum();
    let sw: f64 = within.iter().sum();
    let theta = |s1: f64, s2: f64, sw: f64, n: f64| (s2 - s1 * s1 / n) / (n - 1.0) - sw / n / k;
    let variance = theta(s1, s2, sw, r);
    let variance_stderr = if means.len() >= 3 {
        let loo: Vec<f64> =
            dev.iter().zip(within).map(|(d, w)| theta(s1 - d, s2 - d * d, sw - w, r - 1.0)).collect();
        let mean_loo = loo.iter().sum::<f64>() / r;
        Some(sqrt((r - 1.0) / r * loo.iter().map(|t| (t - mean_loo) * (t - mean_loo)).sum::<f64>()))
    } else {
        None
    };
    let estimate = sqrt(variance.max(0.0));
    let stderr = variance_stderr.map(|se| if estimate > 0.0 { se / (2.0 * estimate) } else { sqrt(se) });
    DeltaProxy {
        estimate,
        variance,
        variance_stderr,
        stderr,
        outer: means.len(),
        inner,
        method: DeltaMethod::MonteCarlo,
    }
}

/// Exact conditional-variance quantities for enumerable models with
/// deterministic regeneration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExactDelta {
    /// `sqrt(Var(E(Yˢ - Y | state)))`.
    pub proxy: f64,
    /// `sqrt(Var(E(Yˢ - Y | Y)))`.
    pub delta: f64,
    /// `E(Yˢ - Y)`.
    pub mean_increment: f64,
    pub y_mean: f64,
    pub y_variance: f64,
}

pub fn delta_exact(sampler: &SizeBiasSampler, cap: u128) -> Result<ExactDelta> {
    if !sampler.model().deterministic_regeneration() {
        return Err(Error::InvalidInput("exact delta needs deterministic regeneration".into()));
    }
    let states = sampler.model().enumerate_states(cap)?;
    let mut rng = crate::rng::substream(0, 0);
    let mut by_y: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let (mut g1, mut g2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    for (mut state, p) in states {
        let y = sampler.model().y(&state);
        let g = sampler.conditional_increment(&mut state, &mut rng)?;
        g1 += p * g;
        g2 += p * g * g;
        y1 += p * y;
        y2 += p * y * y;
        let e = by_y.entry(libm::round(y * 1e9) as i64).or_insert((0.0, 0.0));
        e.0 += p;
        e.1 += p * g;
    }
    let given_y: f64 = by_y.values().map(|&(p, pg)| pg * pg / p).sum::<f64>() - g1 * g1;
    Ok(ExactDelta {
        proxy: sqrt((g2 - g1 * g1).max(0.0)),
        delta: sqrt(given_y.max(0.0)),
        mean_increment: g1,
        y_mean: y1,
        y_variance: y2 - y1 * y1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::size_bias::{LocalStatModel, WindowPayoff};
    use alloc::vec;

    #[test]
    fn constant_model_has_zero_proxy() {
        let sampler = SizeBiasSampler::new(LocalStatModel::subgraph_count(3, 1, 1.0).unwrap()).unwrap();
        let d = delta_proxy_estimate(&sampler, 50, 1, &mut substream(1, 0)).unwrap();
        assert_eq!(d.estimate, 0.0);
        let e = delta_exact(&sampler, 1000).unwrap();
        assert_eq!((e.proxy, e.delta), (0.0, 0.0));
    }

    #[test]
    fn circular_ascent_proxy_matches_enumeration() {
        let sampler = SizeBiasSampler::new(LocalStatModel::perm_pattern(3, vec![0, 1]).unwrap()).unwrap();
        let e = delta_exact(&sampler, 1000).unwrap();
        assert!((e.y_mean - 1.5).abs() < 1e-15);
        // E(Yˢ - Y) = σ²/μ
        assert!((e.mean_increment - e.y_variance / e.y_mean).abs() < 1e-12);
        let d = delta_proxy_estimate(&sampler, 20_000, 1, &mut substream(2, 0)).unwrap();
        assert!((d.estimate - e.proxy).abs() < 4.0 * d.stderr.unwrap());
        assert!(e.delta <= e.proxy + 1e-12);
    }

    #[test]
    fn exact_mean_increment_identity_on_small_models() {
        for model in [
            LocalStatModel::perm_pattern(6, vec![2, 0, 1]).unwrap(),
            LocalStatModel::torus_pattern(3, 1, vec![0.3, 0.7], vec![1, 0]).unwrap(),
            LocalStatModel::subgraph_count(3, 1, 0.4).unwrap(),
        ] {
            let sampler = SizeBiasSampler::new(model).unwrap();
            let e = delta_exact(&sampler, 100_000).unwrap();
            assert!((e.mean_increment - e.y_variance / e.y_mean).abs() < 1e-12);
            assert!(e.delta <= e.proxy + 1e-12);
        }
    }

    #[test]
    fn window_proxy_respects_size_bound() {
        let sampler = SizeBiasSampler::new(LocalStatModel::window(100, 2, WindowPayoff::Ascent).unwrap()).unwrap();
        let d = delta_proxy_estimate(&sampler, 400, 8, &mut substream(3, 0)).unwrap();
        let bound = 3.0 * 7f64.sqrt() / 10.0;
        assert!(d.estimate <= bound + 4.0 * d.stderr.unwrap());
    }

    #[test]
    fn jackknife_recovers_known_variance() {
        // means ~ N(0, 1) plus inner noise of variance 4 averaged over 4
        let mut rng = substream(4, 0);
        let r = 4000;
        let mut means = Vec::new();
        let mut within = Vec::new();
        for _ in 0..r {
            let c: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let xs: Vec<f64> = (0..4)
                .map(|_| c + 2.0 * rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng))
                .collect();
            let m = xs.iter().sum::<f64>() / 4.0;
            means.push(m);
            within.push(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0);
        }
        let d = summarise(&means, &within, 4);
        assert!((d.variance - 1.0).abs() < 4.0 * d.variance_stderr.unwrap());
    }

    #[test]
    fn rejects_tiny_replicate_counts() {
        let sampler = SizeBiasSampler::new(LocalStatModel::window(10, 2, WindowPayoff::Ascent).unwrap()).unwrap();
        assert!(delta_proxy_estimate(&sampler, 1, 5, &mut substream(5, 0)).is_err());
        assert!(delta_proxy_estimate(&sampler, 10, 1, &mut substream(5, 0)).is_err());
    }
}
