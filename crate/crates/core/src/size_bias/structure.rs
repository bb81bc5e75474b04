use alloc::vec::Vec;

use super::local::{Geometry, LocalStatModel};

/// Dependency neighbourhoods, the pair set `𝓓` and index weights `p_α`.
///
/// Every shipped geometry is vertex-transitive and every model is
/// translation-invariant, so the structure is computed once around the
/// origin and translated: `𝓑_α` is the `ρ`-ball at `α`, `𝓓` holds the pairs
/// at distance at most `3ρ`, and `p_α = 1/|𝓐|`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DependencyStructure {
    geometry: Geometry,
    index_count: usize,
    rho: usize,
    ball: Vec<usize>,
    /// Number of indices at each distance from the origin.
    shells: Vec<usize>,
}

/// Computes `ρ`, the neighbourhoods and `V(r)` by enumerating the geometry.
pub fn build_dependency_structure(model: &LocalStatModel) -> DependencyStructure {
    let geometry = model.geometry();
    let size = geometry.size();
    let mut origin = model.vertex_support(0);
    origin.sort_unstable();
    let mut rho = 0;
    let mut shells: Vec<usize> = Vec::new();
    for beta in 0..size {
        let d = geometry.distance(0, beta);
        if shells.len() <= d {
            shells.resize(d + 1, 0);
        }
        shells[d] += 1;
        if d > rho && model.vertex_support(beta).iter().any(|v| origin.binary_search(v).is_ok()) {
            rho = d;
        }
    }
    let ball = (0..size).filter(|&b| geometry.distance(0, b) <= rho).collect();
    DependencyStructure { geometry, index_count: size, rho, ball, shells }
}

impl DependencyStructure {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// `|𝓐|`.
    pub fn index_count(&self) -> usize {
        self.index_count
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    /// `b = max_α |𝓑_α|`.
    pub fn b(&self) -> usize {
        self.ball.len()
    }

    /// `V(r)`: indices within distance `r` of any fixed index.
    pub fn v(&self, r: usize) -> usize {
        self.shells.iter().take(r + 1).sum()
    }

    /// `𝓑_α`, starting with `α` itself.
    pub fn neighborhood(&self, alpha: usize) -> Vec<usize> {
        self.ball.iter().map(|&o| self.geometry.translate(alpha, o)).collect()
    }

    pub fn in_neighborhood(&self, alpha: usize, beta: usize) -> bool {
        self.geometry.distance(alpha, beta) <= self.rho
    }

    /// `(α1, α2) ∈ 𝓓`.
    pub fn in_pairs(&self, a1: usize, a2: usize) -> bool {
        self.geometry.distance(a1, a2) <= 3 * self.rho
    }

    /// `|𝓓| = |𝓐| V(3ρ)`.
    pub fn pair_count(&self) -> u128 {
        self.index_count as u128 * self.v(3 * self.rho) as u128
    }

    pub fn p(&self, _alpha: usize) -> f64 {
        1.0 / self.index_count as f64
    }

    pub fn p_max(&self) -> f64 {
        1.0 / self.index_count as f64
    }

    /// `Σ_{(α1,α2) ∈ 𝓓} p_α1 p_α2 |𝓑_α1| |𝓑_α2|`.
    pub fn weighted_pair_sum(&self) -> f64 {
        let p = self.p_max();
        let b = self.b() as f64;
        self.pair_count() as f64 * p * p * b * b
    }
}
