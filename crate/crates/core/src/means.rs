//! Two-argument means of positive reals and the classical chain
//! `H <= G <= L <= I <= A`.
//!
//! All formulas are evaluated on the sorted pair `(lo, hi)` with
//! `hi = lo (1 + d)`, so they are exactly symmetric and stay accurate as
//! `d -> 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which a pair is treated as equal.
pub const EQUAL_PAIR_REL: f64 = 1e-14;

/// Slack allowed between consecutive members of the chain.
pub const CHAIN_SLACK: f64 = 1e-12;

/// Two positive reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivePair {
    a: f64,
    b: f64,
}

impl PositivePair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (what, v) in [("a", a), ("b", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    expected: "finite positive real",
                });
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn sorted(&self) -> (f64, f64) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }

    /// `(lo, d)` with `hi = lo (1 + d)`, or `None` when the pair is equal
    /// within [`EQUAL_PAIR_REL`].
    fn spread(&self) -> (f64, Option<f64>) {
        let (lo, hi) = self.sorted();
        let d = (hi - lo) / lo;
        if d <= EQUAL_PAIR_REL {
            (lo, None)
        } else {
            (lo, Some(d))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "r")]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    Logarithmic,
    Identric,
    PLogarithmic(f64),
}

/// A tagged mean evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValue {
    pub mean: MeanKind,
    pub value: f64,
}

pub fn mean_arithmetic(p: &PositivePair) -> f64 {
    let (lo, hi) = p.sorted();
    0.5 * lo + 0.5 * hi
}

pub fn mean_geometric(p: &PositivePair) -> f64 {
    let (lo, hi) = p.sorted();
    let prod = lo * hi;
    if prod.is_normal() {
        prod.sqrt()
    } else {
        lo.sqrt() * hi.sqrt()
    }
}

pub fn mean_harmonic(p: &PositivePair) -> f64 {
    let (lo, hi) = p.sorted();
    2.0 * lo * (hi / (lo + hi))
}

/// `(b - a) / (ln b - ln a)`.
pub fn mean_logarithmic(p: &PositivePair) -> f64 {
    match p.spread() {
        (lo, None) => lo,
        (lo, Some(d)) => lo * d / d.ln_1p(),
    }
}

/// `(1/e) (b^b / a^a)^(1/(b-a))`, evaluated as
/// `ln I = ln lo + (1 + d) ln(1 + d) / d - 1`.
pub fn mean_identric(p: &PositivePair) -> f64 {
    match p.spread() {
        (lo, None) => lo,
        (lo, Some(d)) => lo * ((1.0 + d) * d.ln_1p() / d - 1.0).exp(),
    }
}

/// `ln(expm1(u) / u)` without overflow; zero at `u = 0`.
fn ln_expm1_over_u(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if u > 30.0 {
        u + (-(-u).exp()).ln_1p() - u.ln()
    } else {
        (u.exp_m1() / u).ln()
    }
}

/// p-logarithmic mean `[(b^{r+1} - a^{r+1}) / ((r+1)(b-a))]^{1/r}`, extended
/// by continuity with `L_0 = I` and `L_{-1} = L`.
pub fn mean_p_logarithmic(p: &PositivePair, r: f64) -> f64 {
    if r == 0.0 {
        return mean_identric(p);
    }
    if r == -1.0 {
        return mean_logarithmic(p);
    }
    match p.spread() {
        (lo, None) => lo,
        (lo, Some(d)) => {
            let l1p = d.ln_1p();
            let u = (r + 1.0) * l1p;
            // ratio = ((1+d)^{r+1} - 1) / ((r+1) d)
            let ln_ratio = ln_expm1_over_u(u) + (l1p / d).ln();
            lo * (ln_ratio / r).exp()
        }
    }
}

pub fn evaluate(p: &PositivePair, kind: MeanKind) -> MeanValue {
    let value = match kind {
        MeanKind::Arithmetic => mean_arithmetic(p),
        MeanKind::Geometric => mean_geometric(p),
        MeanKind::Harmonic => mean_harmonic(p),
        MeanKind::Logarithmic => mean_logarithmic(p),
        MeanKind::Identric => mean_identric(p),
        MeanKind::PLogarithmic(r) => mean_p_logarithmic(p, r),
    };
    MeanValue { mean: kind, value }
}

/// All six means; `r` selects the p-logarithmic member.
pub fn all_means(p: &PositivePair, r: f64) -> Vec<MeanValue> {
    [
        MeanKind::Arithmetic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
        MeanKind::Logarithmic,
        MeanKind::Identric,
        MeanKind::PLogarithmic(r),
    ]
    .into_iter()
    .map(|k| evaluate(p, k))
    .collect()
}

/// The chain `H <= G <= L <= I <= A` evaluated at one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub harmonic: f64,
    pub geometric: f64,
    pub logarithmic: f64,
    pub identric: f64,
    pub arithmetic: f64,
    pub holds: bool,
    /// Most negative consecutive gap, scaled by the arithmetic mean.
    pub worst_gap: f64,
}

pub fn means_chain_check(p: &PositivePair) -> ChainCheck {
    let chain = [
        mean_harmonic(p),
        mean_geometric(p),
        mean_logarithmic(p),
        mean_identric(p),
        mean_arithmetic(p),
    ];
    let scale = chain[4].max(f64::MIN_POSITIVE);
    let worst_gap = chain
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::INFINITY, f64::min);
    ChainCheck {
        harmonic: chain[0],
        geometric: chain[1],
        logarithmic: chain[2],
        identric: chain[3],
        arithmetic: chain[4],
        holds: worst_gap >= -CHAIN_SLACK,
        worst_gap,
    }
}
