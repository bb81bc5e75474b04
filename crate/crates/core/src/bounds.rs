//! Berry–Esseen type bounds from bounded zero-bias and size-bias couplings.

use alloc::string::String;

use crate::error::{Error, Result};
use crate::math::{sqrt, sqrt_2_over_pi};
use crate::perm::PermutationModel;
use crate::score::ScoreArray;
use crate::size_bias::DependencyStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ClassKind {
    HalfLines,
    Intervals,
    Custom,
}

/// Test-function class with its smoothing constant `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothnessClass {
    pub kind: ClassKind,
    pub a: f64,
}

impl SmoothnessClass {
    pub fn half_lines() -> Self {
        SmoothnessClass { kind: ClassKind::HalfLines, a: sqrt_2_over_pi() }
    }

    pub fn intervals() -> Self {
        SmoothnessClass { kind: ClassKind::Intervals, a: 2.0 * sqrt_2_over_pi() }
    }

    /// A user-supplied class; `a` cannot be checked.
    pub fn custom(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("class constant a = {a} must be positive")));
        }
        Ok(SmoothnessClass { kind: ClassKind::Custom, a })
    }
}

/// Which displayed form of a bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Variant {
    /// Symbolic in `a`.
    Main,
    /// Rounded constants for half-lines.
    HalfLine,
    /// Rounded constants for intervals.
    Interval,
    /// Alternative smoothing under a tighter precondition.
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Formula {
    ZeroMain,
    ZeroHalfLine,
    ZeroInterval,
    ZeroAlt,
    SizeMain,
    SizeHalfLine,
    SizeInterval,
    SizeAlt,
}

impl Formula {
    pub fn id(&self) -> &'static str {
        match self {
            Formula::ZeroMain => "zero-main",
            Formula::ZeroHalfLine => "zero-half-line",
            Formula::ZeroInterval => "zero-interval",
            Formula::ZeroAlt => "zero-alt",
            Formula::SizeMain => "size-main",
            Formula::SizeHalfLine => "size-half-line",
            Formula::SizeInterval => "size-interval",
            Formula::SizeAlt => "size-alt",
        }
    }
}

/// A bound with all inputs echoed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub delta_bound: f64,
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub big_a: f64,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub big_b: f64,
    pub a: f64,
    pub mu: Option<f64>,
    pub sigma: f64,
    #[cfg_attr(feature = "serde", serde(rename = "Delta"))]
    pub delta: Option<f64>,
    pub formula: Formula,
    pub precondition_ok: bool,
    pub precondition_text: String,
    /// The bound exceeds 1 and says nothing about a distance between laws.
    pub vacuous: bool,
}

fn check_class(variant: Variant, class: &SmoothnessClass) -> Result<()> {
    match (variant, class.kind) {
        (Variant::HalfLine, k) if k != ClassKind::HalfLines => {
            Err(Error::InvalidInput("half-line variant needs the half-line class".into()))
        }
        (Variant::Interval, k) if k != ClassKind::Intervals => {
            Err(Error::InvalidInput("interval variant needs the interval class".into()))
        }
        _ => Ok(()),
    }
}

/// Bound from `|Y* - Y| ≤ 2B` with `A = 2B/σ`.
pub fn zero_bias_bound(sigma: f64, big_b: f64, class: &SmoothnessClass, variant: Variant) -> Result<BoundReport> {
    if !(sigma > 0.0) || !(big_b > 0.0) {
        return Err(Error::InvalidInput("sigma and B must be positive".into()));
    }
    check_class(variant, class)?;
    let a = class.a;
    let x = 2.0 * big_b / sigma;
    let (formula, value, limit, text) = match variant {
        Variant::Main => (Formula::ZeroMain, x * (37.0 + 12.0 * x + 112.0 * a), sigma / 24.0, "B <= sigma/24"),
        Variant::HalfLine => (Formula::ZeroHalfLine, x * (127.0 + 12.0 * x), sigma / 24.0, "B <= sigma/24"),
        Variant::Interval => (Formula::ZeroInterval, x * (216.0 + 12.0 * x), sigma / 24.0, "B <= sigma/24"),
        Variant::Alt => (Formula::ZeroAlt, x * (145.0 * a + 7.5 * x + 25.0), sigma / 48.0, "B <= sigma/48"),
    };
    Ok(BoundReport {
        delta_bound: value,
        big_a: x,
        big_b,
        a,
        mu: None,
        sigma,
        delta: None,
        formula,
        precondition_ok: big_b <= limit,
        precondition_text: text.into(),
        vacuous: value > 1.0,
    })
}

/// Bound from `|Yˢ - Y| ≤ B` with `A = B/σ`.
pub fn size_bias_bound(
    mu: f64,
    sigma: f64,
    big_b: f64,
    delta: f64,
    class: &SmoothnessClass,
    variant: Variant,
) -> Result<BoundReport> {
    if !(mu > 0.0) || !(sigma > 0.0) || !(big_b > 0.0) {
        return Err(Error::InvalidInput("mu, sigma and B must be positive".into()));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput("Delta must be non-negative".into()));
    }
    check_class(variant, class)?;
    let a = class.a;
    let x = big_b / sigma;
    let r = mu / sigma;
    let d = mu * delta / (sigma * sigma);
    let main_limit = sigma * sqrt(sigma) / sqrt(6.0 * mu);
    let (formula, value, limit, text) = match variant {
        Variant::Main => (
            Formula::SizeMain,
            a * x / 2.0 + r * ((19.0 + 56.0 * a) * x * x + 4.0 * x * x * x) + 23.0 * d,
            main_limit,
            "B <= sigma^(3/2)/sqrt(6 mu)",
        ),
        Variant::HalfLine => (
            Formula::SizeHalfLine,
            0.4 * x + r * (64.0 * x * x + 4.0 * x * x * x) + 23.0 * d,
            main_limit,
            "B <= sigma^(3/2)/sqrt(6 mu)",
        ),
        Variant::Interval => (
            Formula::SizeInterval,
            0.8 * x + r * (109.0 * x * x + 4.0 * x * x * x) + 23.0 * d,
            main_limit,
            "B <= sigma^(3/2)/sqrt(6 mu)",
        ),
        Variant::Alt => (
            Formula::SizeAlt,
            a * x / 6.0 + r * ((13.0 + 73.0 * a) * x * x + 2.5 * x * x * x) + 15.0 * d,
            sigma * sqrt(sigma) / sqrt(12.0 * mu),
            "B <= sigma^(3/2)/sqrt(12 mu)",
        ),
    };
    Ok(BoundReport {
        delta_bound: value,
        big_a: x,
        big_b,
        a,
        mu: Some(mu),
        sigma,
        delta: Some(delta),
        formula,
        precondition_ok: big_b <= limit,
        precondition_text: text.into(),
        vacuous: value > 1.0,
    })
}

/// Zero-bias bound for `Σ a_{i,π(i)}` with `A = 8C/σ` (uniform) or `40C/σ`
/// (fixed cycle type), valid when `A ≤ 1/12`.
pub fn combinatorial_bound(
    score: &ScoreArray,
    model: &PermutationModel,
    sigma: f64,
    class: &SmoothnessClass,
    variant: Variant,
) -> Result<BoundReport> {
    if score.n() != model.n() {
        return Err(Error::Dimension("array and model sizes differ".into()));
    }
    let factor = match model {
        PermutationModel::Uniform { .. } => {
            if !score.row_centered() {
                return Err(Error::Validation("uniform model needs a row-centered array".into()));
            }
            8.0
        }
        PermutationModel::FixedCycleType(_) => {
            if !score.symmetric() || !score.zero_diagonal() {
                return Err(Error::Validation("cycle-type model needs a symmetric zero-diagonal array".into()));
            }
            40.0
        }
    };
    let half_gap = factor * score.c_sup() / 2.0;
    let mut report = zero_bias_bound(sigma, half_gap, class, variant)?;
    report.precondition_text = match variant {
        Variant::Alt => alloc::format!("A = {}C/sigma <= 1/24", factor),
        _ => alloc::format!("A = {}C/sigma <= 1/12", factor),
    };
    Ok(report)
}

/// `B` and `Δ` bounds derived from a dependency structure.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalBoundInputs {
    /// `bM`.
    pub big_b: f64,
    /// `V(ρ) M`.
    pub big_b_regular: f64,
    /// `M sqrt(Σ_𝓓 p p |𝓑| |𝓑|)`.
    pub delta_bound: f64,
    /// `(max p) b M sqrt(|𝓓|)`.
    pub delta_bound_coarse: f64,
    /// `M |𝓐|^{-1/2} V(ρ) sqrt(V(3ρ))`.
    pub delta_bound_regular: f64,
}

pub fn local_bound_inputs(structure: &DependencyStructure, m: f64) -> LocalBoundInputs {
    let b = structure.b() as f64;
    let v_rho = structure.v(structure.rho()) as f64;
    let v_3rho = structure.v(3 * structure.rho()) as f64;
    LocalBoundInputs {
        big_b: b * m,
        big_b_regular: v_rho * m,
        delta_bound: m * sqrt(structure.weighted_pair_sum()),
        delta_bound_coarse: structure.p_max() * b * m * sqrt(structure.pair_count() as f64),
        delta_bound_regular: m * v_rho * sqrt(v_3rho) / sqrt(structure.index_count() as f64),
    }
}
