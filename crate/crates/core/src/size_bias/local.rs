//! Locally dependent sums `Y = Σ_α X_α` on circles, tori and hypercubes.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{abs, factorial};
use crate::perm::all_permutations;

/// Rejection cap for general `[0, M]` payoffs.
pub const REGENERATION_CAP: usize = 1_000_000;

/// Index geometry; every geometry here is vertex-transitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Geometry {
    /// `{0..n}` mod `n` with circular distance.
    Circle { n: usize },
    /// `{0..n}^p` mod `n` with the sup-norm of circular coordinate distances.
    Torus { n: usize, p: usize },
    /// `{0,1}^p` with Hamming distance.
    Hypercube { p: usize },
}

impl Geometry {
    pub fn size(&self) -> usize {
        match *self {
            Geometry::Circle { n } => n,
            Geometry::Torus { n, p } => n.pow(p as u32),
            Geometry::Hypercube { p } => 1 << p,
        }
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        match *self {
            Geometry::Circle { n } => circ(a, b, n),
            Geometry::Torus { n, p } => {
                let (mut a, mut b, mut d) = (a, b, 0);
                for _ in 0..p {
                    d = d.max(circ(a % n, b % n, n));
                    a /= n;
                    b /= n;
                }
                d
            }
            Geometry::Hypercube { .. } => (a ^ b).count_ones() as usize,
        }
    }

    /// The point `a + offset`, with `offset` given as a point relative to the origin.
    pub fn translate(&self, a: usize, offset: usize) -> usize {
        match *self {
            Geometry::Circle { n } => (a + offset) % n,
            Geometry::Torus { n, p } => {
                let (mut a, mut o, mut out, mut scale) = (a, offset, 0, 1);
                for _ in 0..p {
                    out += ((a % n + o % n) % n) * scale;
                    a /= n;
                    o /= n;
                    scale *= n;
                }
                out
            }
            Geometry::Hypercube { .. } => a ^ offset,
        }
    }
}

fn circ(a: usize, b: usize, n: usize) -> usize {
    let d = if a > b { a - b } else { b - a };
    d.min(n - d)
}

/// Payoff applied to the `m` values of a sliding window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WindowPayoff {
    /// All values strictly increasing.
    Ascent,
    /// All values at least `t`.
    AllAbove(f64),
    /// Average of the window, in `[0, 1]`.
    Mean,
}

/// Underlying variables of a model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LocalState {
    Reals(Vec<f64>),
    Labels(Vec<usize>),
}

impl LocalState {
    pub fn reals(&self) -> &[f64] {
        match self {
            LocalState::Reals(v) => v,
            LocalState::Labels(_) => panic!("state holds labels"),
        }
    }

    pub fn labels(&self) -> &[usize] {
        match self {
            LocalState::Labels(v) => v,
            LocalState::Reals(_) => panic!("state holds reals"),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LocalState::Reals(v) => v.len(),
            LocalState::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value of variable `k` as a real.
    pub fn value(&self, k: usize) -> f64 {
        match self {
            LocalState::Reals(v) => v[k],
            LocalState::Labels(v) => v[k] as f64,
        }
    }
}

/// A sum of bounded local statistics with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LocalStatModel {
    /// I.i.d. uniforms on a circle; `X_α` is the payoff of positions `α..α+m`.
    Window { n: usize, m: usize, payoff: WindowPayoff },
    /// Uniform permutation; `X_α = 1` when positions `α..α+m` follow `pattern`.
    PermPattern { n: usize, pattern: Vec<usize> },
    /// I.i.d. vertex colours on the torus; `X_α = 1` when the unit cube at
    /// `α` shows `target` (indexed by the cube's corner bits).
    TorusPattern { n: usize, p: usize, color_probs: Vec<f64>, target: Vec<usize> },
    /// Bernoulli edges between torus vertices at sup-distance 1; `X_α = 1`
    /// when every edge inside the unit cube at `α` is present.
    SubgraphCount { n: usize, p: usize, edge_prob: f64 },
    /// I.i.d. uniforms on `{0,1}^p`; `X_α = 1` when `α` is at least all its neighbours.
    HypercubeMax { p: usize },
}

impl LocalStatModel {
    pub fn window(n: usize, m: usize, payoff: WindowPayoff) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidInput(alloc::format!("window needs 1 <= m <= n, got m = {m}, n = {n}")));
        }
        if let WindowPayoff::AllAbove(t) = payoff {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidInput(alloc::format!("threshold {t} outside [0, 1)")));
            }
        }
        Ok(LocalStatModel::Window { n, m, payoff })
    }

    /// `pattern` is a 0-based permutation of `0..m`.
    pub fn perm_pattern(n: usize, pattern: Vec<usize>) -> Result<Self> {
        let m = pattern.len();
        if m == 0 || m > n {
            return Err(Error::InvalidInput(alloc::format!("pattern length {m} must be in 1..={n}")));
        }
        let mut seen = alloc::vec![false; m];
        for &v in &pattern {
            if v >= m || seen[v] {
                return Err(Error::InvalidInput("pattern is not a permutation".into()));
            }
            seen[v] = true;
        }
        Ok(LocalStatModel::PermPattern { n, pattern })
    }

    pub fn torus_pattern(n: usize, p: usize, color_probs: Vec<f64>, target: Vec<usize>) -> Result<Self> {
        if n < 2 || p == 0 {
            return Err(Error::InvalidInput("torus needs n >= 2 and p >= 1".into()));
        }
        if target.len() != 1 << p {
            return Err(Error::InvalidInput(alloc::format!("target needs {} colours", 1 << p)));
        }
        let total: f64 = color_probs.iter().sum();
        if color_probs.iter().any(|&q| !(q >= 0.0)) || abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidInput("colour probabilities must be non-negative and sum to 1".into()));
        }
        if target.iter().any(|&c| c >= color_probs.len()) {
            return Err(Error::InvalidInput("target uses an unknown colour".into()));
        }
        Ok(LocalStatModel::TorusPattern { n, p, color_probs, target })
    }

    pub fn subgraph_count(n: usize, p: usize, edge_prob: f64) -> Result<Self> {
        if n < 3 || p == 0 {
            return Err(Error::InvalidInput("subgraph torus needs n >= 3 and p >= 1".into()));
        }
        if !(0.0..=1.0).contains(&edge_prob) {
            return Err(Error::InvalidInput("edge probability outside [0, 1]".into()));
        }
        Ok(LocalStatModel::SubgraphCount { n, p, edge_prob })
    }

    pub fn hypercube_max(p: usize) -> Result<Self> {
        if p == 0 || p > 24 {
            return Err(Error::InvalidInput("hypercube dimension must be in 1..=24".into()));
        }
        Ok(LocalStatModel::HypercubeMax { p })
    }

    pub fn geometry(&self) -> Geometry {
        match *self {
            LocalStatModel::Window { n, .. } | LocalStatModel::PermPattern { n, .. } => Geometry::Circle { n },
            LocalStatModel::TorusPattern { n, p, .. } | LocalStatModel::SubgraphCount { n, p, .. } => {
                Geometry::Torus { n, p }
            }
            LocalStatModel::HypercubeMax { p } => Geometry::Hypercube { p },
        }
    }

    /// `|𝓐|`.
    pub fn index_count(&self) -> usize {
        self.geometry().size()
    }

    /// `M`.
    pub fn value_cap(&self) -> f64 {
        1.0
    }

    pub fn is_indicator(&self) -> bool {
        !matches!(self, LocalStatModel::Window { payoff: WindowPayoff::Mean, .. })
    }

    /// Regeneration is a function of the state alone.
    pub fn deterministic_regeneration(&self) -> bool {
        matches!(
            self,
            LocalStatModel::PermPattern { .. } | LocalStatModel::TorusPattern { .. } | LocalStatModel::SubgraphCount { .. }
        )
    }

    /// `E X_α`, the same for every `α`.
    pub fn mean_x(&self) -> f64 {
        match self {
            LocalStatModel::Window { m, payoff, .. } => match *payoff {
                WindowPayoff::Ascent => 1.0 / factorial(*m).map(|f| f as f64).unwrap_or(f64::INFINITY),
                WindowPayoff::AllAbove(t) => libm::pow(1.0 - t, *m as f64),
                WindowPayoff::Mean => 0.5,
            },
            LocalStatModel::PermPattern { pattern, .. } => {
                1.0 / factorial(pattern.len()).map(|f| f as f64).unwrap_or(f64::INFINITY)
            }
            LocalStatModel::TorusPattern { color_probs, target, .. } => target.iter().map(|&c| color_probs[c]).product(),
            LocalStatModel::SubgraphCount { p, edge_prob, .. } => {
                let k = 1u64 << p;
                libm::pow(*edge_prob, (k * (k - 1) / 2) as f64)
            }
            LocalStatModel::HypercubeMax { p } => 1.0 / (*p as f64 + 1.0),
        }
    }

    /// `μ = E Y`.
    pub fn mu(&self) -> f64 {
        self.index_count() as f64 * self.mean_x()
    }

    /// Vertex set `𝒱_α`.
    pub fn vertex_support(&self, alpha: usize) -> Vec<usize> {
        let g = self.geometry();
        match *self {
            LocalStatModel::Window { m, .. } => (0..m).map(|k| g.translate(alpha, k)).collect(),
            LocalStatModel::PermPattern { ref pattern, .. } => (0..pattern.len()).map(|k| g.translate(alpha, k)).collect(),
            LocalStatModel::TorusPattern { n, p, .. } | LocalStatModel::SubgraphCount { n, p, .. } => {
                (0..1usize << p).map(|e| g.translate(alpha, corner_offset(e, n, p))).collect()
            }
            LocalStatModel::HypercubeMax { p } => {
                let mut v = alloc::vec![alpha];
                v.extend((0..p).map(|k| alpha ^ (1 << k)));
                v
            }
        }
    }

    /// Indices of the state variables `X_α` reads.
    pub fn variables(&self, alpha: usize) -> Vec<usize> {
        match *self {
            LocalStatModel::SubgraphCount { n, p, .. } => cube_edges(alpha, n, p),
            _ => self.vertex_support(alpha),
        }
    }

    pub fn state_len(&self) -> usize {
        match *self {
            LocalStatModel::SubgraphCount { n, p, .. } => n.pow(p as u32) * offsets_half(p).len(),
            _ => self.index_count(),
        }
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> LocalState {
        match self {
            LocalStatModel::Window { n, .. } => LocalState::Reals((0..*n).map(|_| rng.random()).collect()),
            LocalStatModel::HypercubeMax { p } => LocalState::Reals((0..1usize << p).map(|_| rng.random()).collect()),
            LocalStatModel::PermPattern { n, .. } => {
                let mut v: Vec<usize> = (0..*n).collect();
                v.shuffle(rng);
                LocalState::Labels(v)
            }
            LocalStatModel::TorusPattern { color_probs, .. } => {
                LocalState::Labels((0..self.index_count()).map(|_| pick(color_probs, rng.random())).collect())
            }
            LocalStatModel::SubgraphCount { edge_prob, .. } => {
                LocalState::Labels((0..self.state_len()).map(|_| (rng.random::<f64>() < *edge_prob) as usize).collect())
            }
        }
    }

    /// `X_α` evaluated on a state.
    pub fn x(&self, state: &LocalState, alpha: usize) -> f64 {
        match self {
            LocalStatModel::Window { payoff, .. } => {
                let s = state.reals();
                let support = self.vertex_support(alpha);
                match *payoff {
                    WindowPayoff::Ascent => support.windows(2).all(|w| s[w[0]] < s[w[1]]) as u8 as f64,
                    WindowPayoff::AllAbove(t) => support.iter().all(|&v| s[v] >= t) as u8 as f64,
                    WindowPayoff::Mean => support.iter().map(|&v| s[v]).sum::<f64>() / support.len() as f64,
                }
            }
            LocalStatModel::PermPattern { pattern, .. } => {
                let s = state.labels();
                let support = self.vertex_support(alpha);
                let ok = (0..pattern.len()).all(|k| {
                    let rank = support.iter().filter(|&&v| s[v] < s[support[k]]).count();
                    rank == pattern[k]
                });
                ok as u8 as f64
            }
            LocalStatModel::TorusPattern { target, .. } => {
                let s = state.labels();
                self.vertex_support(alpha).iter().zip(target).all(|(&v, &c)| s[v] == c) as u8 as f64
            }
            LocalStatModel::SubgraphCount { .. } => {
                let s = state.labels();
                self.variables(alpha).iter().all(|&e| s[e] == 1) as u8 as f64
            }
            LocalStatModel::HypercubeMax { .. } => {
                let s = state.reals();
                let support = self.vertex_support(alpha);
                support[1..].iter().all(|&b| s[alpha] >= s[b]) as u8 as f64
            }
        }
    }

    /// `Y = Σ_α X_α`.
    pub fn y(&self, state: &LocalState) -> f64 {
        (0..self.index_count()).map(|a| self.x(state, a)).sum()
    }

    /// Replaces the variables of `X_α` by a draw from the `X_α`-weighted law.
    pub fn regenerate<R: Rng + ?Sized>(&self, state: &mut LocalState, alpha: usize, rng: &mut R) -> Result<()> {
        if !(self.mean_x() > 0.0) {
            return Err(Error::Degenerate(alloc::format!("E X_{alpha} is zero")));
        }
        match (self, state) {
            (LocalStatModel::Window { m, payoff, .. }, LocalState::Reals(s)) => {
                let support = self.vertex_support(alpha);
                let mut fresh: Vec<f64> = alloc::vec![0.0; *m];
                match *payoff {
                    WindowPayoff::Ascent => {
                        fresh.iter_mut().for_each(|v| *v = rng.random());
                        fresh.sort_by(|a, b| a.total_cmp(b));
                    }
                    WindowPayoff::AllAbove(t) => fresh.iter_mut().for_each(|v| *v = t + (1.0 - t) * rng.random::<f64>()),
                    WindowPayoff::Mean => {
                        let mut tries = 0;
                        loop {
                            fresh.iter_mut().for_each(|v| *v = rng.random());
                            let x = fresh.iter().sum::<f64>() / *m as f64;
                            if rng.random::<f64>() * self.value_cap() < x {
                                break;
                            }
                            tries += 1;
                            if tries >= REGENERATION_CAP {
                                return Err(Error::RejectionExhausted(REGENERATION_CAP));
                            }
                        }
                    }
                }
                for (&v, x) in support.iter().zip(fresh) {
                    s[v] = x;
                }
            }
            (LocalStatModel::PermPattern { pattern, .. }, LocalState::Labels(s)) => {
                let support = self.vertex_support(alpha);
                let mut values: Vec<usize> = support.iter().map(|&v| s[v]).collect();
                values.sort_unstable();
                for (k, &v) in support.iter().enumerate() {
                    s[v] = values[pattern[k]];
                }
            }
            (LocalStatModel::TorusPattern { target, .. }, LocalState::Labels(s)) => {
                for (v, &c) in self.vertex_support(alpha).into_iter().zip(target) {
                    s[v] = c;
                }
            }
            (LocalStatModel::SubgraphCount { .. }, LocalState::Labels(s)) => {
                for e in self.variables(alpha) {
                    s[e] = 1;
                }
            }
            (LocalStatModel::HypercubeMax { .. }, LocalState::Reals(s)) => {
                let support = self.vertex_support(alpha);
                let fresh: Vec<f64> = support.iter().map(|_| rng.random()).collect();
                let top = (0..fresh.len()).max_by(|&a, &b| fresh[a].total_cmp(&fresh[b])).unwrap();
                for (k, &v) in support.iter().enumerate() {
                    s[v] = fresh[k];
                }
                s.swap(support[0], support[top]);
            }
            _ => return Err(Error::InvalidInput("state kind does not match model".into())),
        }
        Ok(())
    }

    /// Every state with its probability, for discrete models.
    pub fn enumerate_states(&self, cap: u128) -> Result<Vec<(LocalState, f64)>> {
        match self {
            LocalStatModel::PermPattern { n, .. } => {
                let size = factorial(*n).unwrap_or(u128::MAX);
                if size > cap {
                    return Err(Error::SupportTooLarge { size, cap });
                }
                let p = 1.0 / size as f64;
                Ok(all_permutations(*n).into_iter().map(|pi| (LocalState::Labels(pi.images().to_vec()), p)).collect())
            }
            LocalStatModel::TorusPattern { color_probs, .. } => {
                product_states(self.state_len(), color_probs, cap)
            }
            LocalStatModel::SubgraphCount { edge_prob, .. } => {
                product_states(self.state_len(), &[1.0 - edge_prob, *edge_prob], cap)
            }
            _ => Err(Error::InvalidInput("model has continuous underlying variables".into())),
        }
    }
}

fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &q) in probs.iter().enumerate() {
        acc += q;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|&q| q > 0.0).unwrap_or(0)
}

fn product_states(len: usize, probs: &[f64], cap: u128) -> Result<Vec<(LocalState, f64)>> {
    let k = probs.len() as u128;
    let size = k.checked_pow(len as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::SupportTooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut digits = alloc::vec![0usize; len];
    loop {
        let p: f64 = digits.iter().map(|&d| probs[d]).product();
        if p > 0.0 {
            out.push((LocalState::Labels(digits.clone()), p));
        }
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < probs.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Torus point whose coordinates are the bits of `e`.
fn corner_offset(e: usize, n: usize, p: usize) -> usize {
    (0..p).map(|k| ((e >> k) & 1) * n.pow(k as u32)).sum()
}

/// Offsets in `{-1,0,1}^p \ {0}` whose first nonzero coordinate is `+1`,
/// as coordinate vectors.
fn offsets_half(p: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(p as u32);
    for code in 0..total {
        let mut c = code;
        let v: Vec<i64> = (0..p)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                d
            })
            .collect();
        if v.iter().find(|&&d| d != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

fn coords(v: usize, n: usize, p: usize) -> Vec<i64> {
    let mut c = v;
    (0..p)
        .map(|_| {
            let x = (c % n) as i64;
            c /= n;
            x
        })
        .collect()
}

fn point(c: &[i64], n: usize) -> usize {
    let n = n as i64;
    let mut out = 0i64;
    let mut scale = 1i64;
    for &x in c {
        out += x.rem_euclid(n) * scale;
        scale *= n;
    }
    out as usize
}

/// Edge id of `{u, w}` for torus neighbours at sup-distance 1.
fn edge_id(u: &[i64], w: &[i64], n: usize, half: &[Vec<i64>]) -> usize {
    let d: Vec<i64> = u.iter().zip(w).map(|(a, b)| b - a).collect();
    let (start, dir) = if d.iter().find(|&&x| x != 0) == Some(&1) {
        (u, d)
    } else {
        (w, d.iter().map(|x| -x).collect())
    };
    let k = half.iter().position(|h| *h == dir).expect("unit step");
    point(start, n) * half.len() + k
}

/// Edges joining the corners of the unit cube at `alpha`.
fn cube_edges(alpha: usize, n: usize, p: usize) -> Vec<usize> {
    let half = offsets_half(p);
    let base = coords(alpha, n, p);
    let corners: Vec<Vec<i64>> =
        (0..1usize << p).map(|e| base.iter().enumerate().map(|(k, &b)| b + ((e >> k) & 1) as i64).collect()).collect();
    let mut out = Vec::new();
    for a in 0..corners.len() {
        for b in a + 1..corners.len() {
            out.push(edge_id(&corners[a], &corners[b], n, &half));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use alloc::vec;

    #[test]
    fn geometry_distances() {
        let c = Geometry::Circle { n: 10 };
        assert_eq!(c.distance(1, 9), 2);
        assert_eq!(c.translate(8, 5), 3);
        let t = Geometry::Torus { n: 5, p: 2 };
        assert_eq!(t.distance(0, 4 + 5 * 2), 2);
        assert_eq!(t.translate(4, 1 + 5), 5);
        let h = Geometry::Hypercube { p: 4 };
        assert_eq!(h.distance(0b1010, 0b0110), 2);
    }

    #[test]
    fn rising_sequences_match_direct_scan() {
        let model = LocalStatModel::perm_pattern(9, vec![0, 1, 2]).unwrap();
        let mut rng = substream(1, 0);
        for _ in 0..200 {
            let s = model.sample_state(&mut rng);
            let pi = s.labels();
            let direct = (0..9).filter(|&a| pi[a] < pi[(a + 1) % 9] && pi[(a + 1) % 9] < pi[(a + 2) % 9]).count();
            assert_eq!(model.y(&s), direct as f64);
        }
    }

    #[test]
    fn circular_ascent_law_on_three_points() {
        let model = LocalStatModel::perm_pattern(3, vec![0, 1]).unwrap();
        let states = model.enumerate_states(100).unwrap();
        assert_eq!(states.len(), 6);
        let ones = states.iter().filter(|(s, _)| model.y(s) == 1.0).count();
        let twos = states.iter().filter(|(s, _)| model.y(s) == 2.0).count();
        assert_eq!((ones, twos), (3, 3));
        assert!((model.mu() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn full_edge_probability_counts_every_copy() {
        let model = LocalStatModel::subgraph_count(4, 2, 1.0).unwrap();
        let s = model.sample_state(&mut substream(2, 0));
        assert_eq!(model.y(&s), 16.0);
        assert_eq!(model.variables(0).len(), 6);
        assert_eq!(model.state_len(), 16 * 4);
    }

    #[test]
    fn cube_edges_are_distinct_ids() {
        let model = LocalStatModel::subgraph_count(3, 3, 0.5).unwrap();
        for a in 0..27 {
            let mut e = model.variables(a);
            assert_eq!(e.len(), 28);
            e.sort_unstable();
            e.dedup();
            assert_eq!(e.len(), 28);
            assert!(e.iter().all(|&x| x < model.state_len()));
        }
    }

    #[test]
    fn regeneration_forces_the_indicator() {
        let models = [
            LocalStatModel::window(12, 3, WindowPayoff::Ascent).unwrap(),
            LocalStatModel::window(12, 3, WindowPayoff::AllAbove(0.7)).unwrap(),
            LocalStatModel::perm_pattern(10, vec![2, 0, 1]).unwrap(),
            LocalStatModel::torus_pattern(4, 2, vec![0.5, 0.3, 0.2], vec![0, 1, 2, 1]).unwrap(),
            LocalStatModel::subgraph_count(4, 2, 0.3).unwrap(),
            LocalStatModel::hypercube_max(5).unwrap(),
        ];
        let mut rng = substream(3, 0);
        for model in &models {
            for _ in 0..200 {
                let mut s = model.sample_state(&mut rng);
                let alpha = rng.random_range(0..model.index_count());
                model.regenerate(&mut s, alpha, &mut rng).unwrap();
                assert_eq!(model.x(&s, alpha), 1.0, "{model:?}");
            }
        }
    }

    #[test]
    fn hypercube_regeneration_makes_alpha_a_local_max() {
        let model = LocalStatModel::hypercube_max(4).unwrap();
        let mut rng = substream(4, 0);
        for _ in 0..1000 {
            let mut s = model.sample_state(&mut rng);
            model.regenerate(&mut s, 5, &mut rng).unwrap();
            let r = s.reals();
            for k in 0..4 {
                assert!(r[5] >= r[5 ^ (1 << k)]);
            }
        }
    }

    #[test]
    fn zero_mean_direction_is_degenerate() {
        let model = LocalStatModel::torus_pattern(3, 1, vec![1.0, 0.0], vec![0, 1]).unwrap();
        let mut s = model.sample_state(&mut substream(5, 0));
        assert!(matches!(model.regenerate(&mut s, 0, &mut substream(5, 1)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mean_payoff_regeneration_tilts_by_x() {
        // E[X_α after regeneration] = E X² / E X = (1/4 + 1/(12 m)) / (1/2)
        let m = 2;
        let model = LocalStatModel::window(5, m, WindowPayoff::Mean).unwrap();
        let mut rng = substream(6, 0);
        let reps = 200_000;
        let xs: Vec<f64> = (0..reps)
            .map(|_| {
                let mut s = model.sample_state(&mut rng);
                model.regenerate(&mut s, 0, &mut rng).unwrap();
                model.x(&s, 0)
            })
            .collect();
        let m_sum = crate::score::MomentSummary::from_sample(&xs).unwrap();
        let exact = (0.25 + 1.0 / (12.0 * m as f64)) / 0.5;
        assert!((m_sum.mean - exact).abs() < 4.0 * m_sum.mean_stderr.unwrap());
    }
}
