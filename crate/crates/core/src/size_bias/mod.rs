//! Size-bias couplings `(Y, Yˢ)` with `E[Y f(Y)] = μ E f(Yˢ)`.

mod delta;
mod independent;
mod local;
mod structure;

use alloc::vec::Vec;

use rand::Rng;

pub use delta::{delta_exact, delta_proxy_estimate, DeltaMethod, DeltaProxy, ExactDelta};
pub use independent::{size_bias_discrete_oracle, size_bias_independent_sum, IndependentSizeBias, IndependentSizeDraw};
pub use local::{Geometry, LocalState, LocalStatModel, WindowPayoff, REGENERATION_CAP};
pub use structure::{build_dependency_structure, DependencyStructure};

use crate::error::{Error, Result};

/// One realisation of `(Y, Yˢ)` for a local model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SizeBiasDraw {
    pub y: f64,
    pub y_s: f64,
    /// The index `I`.
    pub chosen: usize,
    /// `(variable, new value)` for each variable of `X_I`.
    pub regenerated: Vec<(usize, f64)>,
    /// `|Yˢ - Y|`.
    pub gap: f64,
}

/// Draws `I` with probability `p_α`, regenerates the variables of `X_I`
/// from the `X_I`-weighted law and recomputes `X_β` on `𝓑_I`.
#[derive(Debug, Clone)]
pub struct SizeBiasSampler {
    model: LocalStatModel,
    structure: DependencyStructure,
}

impl SizeBiasSampler {
    pub fn new(model: LocalStatModel) -> Result<Self> {
        if !(model.mean_x() > 0.0) {
            return Err(Error::Degenerate("E X_α is zero".into()));
        }
        let structure = build_dependency_structure(&model);
        Ok(SizeBiasSampler { model, structure })
    }

    pub fn model(&self) -> &LocalStatModel {
        &self.model
    }

    pub fn structure(&self) -> &DependencyStructure {
        &self.structure
    }

    /// Declared `b·M`.
    pub fn gap_bound(&self) -> f64 {
        self.structure.b() as f64 * self.model.value_cap()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SizeBiasDraw> {
        let state = self.model.sample_state(rng);
        let alpha = rng.random_range(0..self.structure.index_count());
        Ok(self.draw_at(&state, alpha, rng)?.0)
    }

    /// Regenerates direction `alpha` on a copy of `state`; returns the draw and
    /// the regenerated state `X^α`.
    pub fn draw_at<R: Rng + ?Sized>(
        &self,
        state: &LocalState,
        alpha: usize,
        rng: &mut R,
    ) -> Result<(SizeBiasDraw, LocalState)> {
        let y = self.model.y(state);
        let mut next = state.clone();
        self.model.regenerate(&mut next, alpha, rng)?;
        let delta: f64 = self
            .structure
            .neighborhood(alpha)
            .into_iter()
            .map(|b| self.model.x(&next, b) - self.model.x(state, b))
            .sum();
        let regenerated = self.model.variables(alpha).into_iter().map(|v| (v, next.value(v))).collect();
        let y_s = y + delta;
        Ok((SizeBiasDraw { y, y_s, chosen: alpha, regenerated, gap: crate::math::abs(delta) }, next))
    }

    /// `Σ_{β ∈ 𝓑_α} (X_β^α - X_β)` for one regeneration; `state` is restored.
    pub(crate) fn local_increment<R: Rng + ?Sized>(
        &self,
        state: &mut LocalState,
        alpha: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let vars = self.model.variables(alpha);
        let nb = self.structure.neighborhood(alpha);
        let before: f64 = nb.iter().map(|&b| self.model.x(state, b)).sum();
        let saved: Vec<f64> = vars.iter().map(|&v| state.value(v)).collect();
        self.model.regenerate(state, alpha, rng)?;
        let after: f64 = nb.iter().map(|&b| self.model.x(state, b)).sum();
        for (&v, &x) in vars.iter().zip(&saved) {
            match state {
                LocalState::Labels(l) => l[v] = x as usize,
                LocalState::Reals(r) => r[v] = x,
            }
        }
        Ok(after - before)
    }

    /// `E(Yˢ - Y | state)` estimated from one regeneration per direction
    /// (exact when regeneration is deterministic).
    pub(crate) fn conditional_increment<R: Rng + ?Sized>(&self, state: &mut LocalState, rng: &mut R) -> Result<f64> {
        let mut total = 0.0;
        for alpha in 0..self.structure.index_count() {
            total += self.structure.p(alpha) * self.local_increment(state, alpha, rng)?;
        }
        Ok(total)
    }
}

/// Convenience wrapper matching the sampler's `draw`.
pub fn size_bias_sum_draw<R: Rng + ?Sized>(
    model: &LocalStatModel,
    structure: &DependencyStructure,
    rng: &mut R,
) -> Result<SizeBiasDraw> {
    let sampler = SizeBiasSampler { model: model.clone(), structure: structure.clone() };
    if !(model.mean_x() > 0.0) {
        return Err(Error::Degenerate("E X_α is zero".into()));
    }
    sampler.draw(rng)
}

/// Number of `β ∉ 𝓑_α` whose `X_β` changed between `before` and `after`.
pub fn independence_violations(
    model: &LocalStatModel,
    structure: &DependencyStructure,
    before: &LocalState,
    after: &LocalState,
    alpha: usize,
) -> usize {
    (0..structure.index_count())
        .filter(|&b| !structure.in_neighborhood(alpha, b) && model.x(before, b) != model.x(after, b))
        .count()
}
