//! Grid audit of every inequality: build cases, evaluate each against the
//! oracle, classify, summarise.
//!
//! Cases for a claim are generated from a seeded ChaCha stream derived from
//! the grid seed and the claim, so a claim's cases do not depend on which
//! other claims are audited alongside it. Evaluation is parallel; results are
//! collected in generation order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnmodel::{FnSpec, Interval};
use crate::hhbounds::{self, BoundInput, TheoremId};
use crate::means::{
    mean_arithmetic, mean_geometric, mean_harmonic, mean_identric, mean_logarithmic,
    mean_p_logarithmic, PositivePair,
};
use crate::quadrature::{midpoint_error_bound, trapezoid_error_bound, Partition};
use crate::special::jagers_bounds;

pub use crate::hhbounds::Variant;

/// Relative tolerance for bound claims.
pub const BOUND_TOL: f64 = 1e-9;

/// Relative tolerance for the pure orderings (chain, Jagers).
pub const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    Cor1,
    Cor2,
    QProp1,
    QProp2,
    MProp1,
    MProp2,
    MProp3,
    MProp4,
    Chain,
    Jagers,
}

impl ClaimId {
    pub const ALL: [ClaimId; 20] = [
        ClaimId::T1,
        ClaimId::T2,
        ClaimId::T3,
        ClaimId::T4,
        ClaimId::T5,
        ClaimId::T6,
        ClaimId::T7,
        ClaimId::T8,
        ClaimId::T9,
        ClaimId::T10,
        ClaimId::Cor1,
        ClaimId::Cor2,
        ClaimId::QProp1,
        ClaimId::QProp2,
        ClaimId::MProp1,
        ClaimId::MProp2,
        ClaimId::MProp3,
        ClaimId::MProp4,
        ClaimId::Chain,
        ClaimId::Jagers,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimId::T1 => "t1",
            ClaimId::T2 => "t2",
            ClaimId::T3 => "t3",
            ClaimId::T4 => "t4",
            ClaimId::T5 => "t5",
            ClaimId::T6 => "t6",
            ClaimId::T7 => "t7",
            ClaimId::T8 => "t8",
            ClaimId::T9 => "t9",
            ClaimId::T10 => "t10",
            ClaimId::Cor1 => "cor1",
            ClaimId::Cor2 => "cor2",
            ClaimId::QProp1 => "q_prop1",
            ClaimId::QProp2 => "q_prop2",
            ClaimId::MProp1 => "m_prop1",
            ClaimId::MProp2 => "m_prop2",
            ClaimId::MProp3 => "m_prop3",
            ClaimId::MProp4 => "m_prop4",
            ClaimId::Chain => "chain",
            ClaimId::Jagers => "jagers",
        }
    }

    pub fn theorem(&self) -> Option<TheoremId> {
        Some(match self {
            ClaimId::T2 => TheoremId::T2,
            ClaimId::T3 => TheoremId::T3,
            ClaimId::T4 => TheoremId::T4,
            ClaimId::T5 => TheoremId::T5,
            ClaimId::T6 => TheoremId::T6,
            ClaimId::T7 => TheoremId::T7,
            ClaimId::T8 => TheoremId::T8,
            ClaimId::T9 => TheoremId::T9,
            ClaimId::T10 => TheoremId::T10,
            ClaimId::Cor1 => TheoremId::Cor1,
            ClaimId::Cor2 => TheoremId::Cor2,
            _ => return None,
        })
    }

    /// Forms audited for this claim.
    pub fn variants(&self) -> &'static [Variant] {
        if self.has_correction() {
            &[Variant::AsPrinted, Variant::Corrected]
        } else {
            &[Variant::AsPrinted]
        }
    }

    fn has_correction(&self) -> bool {
        matches!(
            self,
            ClaimId::T6 | ClaimId::Cor1 | ClaimId::Cor2 | ClaimId::QProp1 | ClaimId::MProp1
        )
    }

    /// The form whose violations count as failures. `None` for claims that
    /// are only measured, never certified.
    pub fn certified_variant(&self) -> Option<Variant> {
        match self {
            ClaimId::MProp2 | ClaimId::MProp3 | ClaimId::MProp4 => None,
            c if c.has_correction() => Some(Variant::Corrected),
            _ => Some(Variant::AsPrinted),
        }
    }

    fn tolerance(&self, stated: f64) -> f64 {
        match self {
            ClaimId::Chain | ClaimId::Jagers => ORDER_TOL * stated.abs().max(1.0),
            _ => BOUND_TOL * (1.0 + stated.abs()),
        }
    }

    fn index(&self) -> u64 {
        ClaimId::ALL.iter().position(|c| c == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    HypothesisUnmet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridSize {
    Small,
    #[default]
    Full,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "small" => Ok(GridSize::Small),
            "full" => Ok(GridSize::Full),
            other => Err(format!("unknown grid `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GridSpec {
    pub size: GridSize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(size: GridSize, seed: u64) -> Self {
        Self { size, seed }
    }

    fn rng(&self, claim: ClaimId) -> ChaCha8Rng {
        let mix = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(claim.index() + 1);
        ChaCha8Rng::seed_from_u64(self.seed ^ mix)
    }

    fn pick(&self, small: usize, full: usize) -> usize {
        match self.size {
            GridSize::Small => small,
            GridSize::Full => full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichSide {
    /// `2^{s-1} f(mid) <= mean`
    Lower,
    /// `mean <= (f(a) + f(b))/(s+1)`
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainForm {
    Tight,
    Weak,
}

/// Inputs of one case; the shape is fixed by the claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CasePayload {
    Sandwich {
        function: FnSpec,
        a: f64,
        b: f64,
        s: f64,
        side: SandwichSide,
    },
    Bound {
        function: FnSpec,
        a: f64,
        b: f64,
        lambda: f64,
        n: usize,
        s: f64,
        q: f64,
    },
    Quadrature {
        function: FnSpec,
        nodes: Vec<f64>,
        s: f64,
        q: f64,
    },
    Pair {
        a: f64,
        b: f64,
    },
    PairP {
        a: f64,
        b: f64,
        p: f64,
    },
    PowerPair {
        a: f64,
        b: f64,
        n: i32,
        s: f64,
        q: f64,
        form: ChainForm,
    },
    Order {
        s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCase {
    pub claim: ClaimId,
    pub variant: Variant,
    pub payload: CasePayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub case: AuditCase,
    pub stated: f64,
    pub measured: f64,
    pub verdict: Verdict,
    /// `measured / stated`; `None` when a positive measurement meets a zero bound.
    pub tightness: Option<f64>,
    pub note: String,
}

impl AuditRecord {
    /// Whether this record counts against the certified form of its claim.
    pub fn is_certified(&self) -> bool {
        self.case.claim.certified_variant() == Some(self.case.variant)
    }
}

fn classify(claim: ClaimId, stated: f64, measured: f64, hypothesis: bool) -> Verdict {
    if !hypothesis {
        Verdict::HypothesisUnmet
    } else if measured > stated + claim.tolerance(stated) {
        Verdict::Violated
    } else {
        Verdict::Holds
    }
}

fn record(case: AuditCase, stated: f64, measured: f64, hypothesis: bool, mut note: String) -> AuditRecord {
    let verdict = classify(case.claim, stated, measured, hypothesis);
    if verdict == Verdict::HypothesisUnmet {
        let held = measured <= stated + case.claim.tolerance(stated);
        let tail = if held {
            "inequality holds anyway"
        } else {
            "inequality fails"
        };
        note = if note.is_empty() {
            tail.to_string()
        } else {
            format!("{note}; {tail}")
        };
    }
    AuditRecord {
        case,
        stated,
        measured,
        verdict,
        // A zero bound met up to roundoff counts as exact.
        tightness: if stated == 0.0 && verdict != Verdict::Violated {
            Some(0.0)
        } else {
            hhbounds::tightness(measured, stated)
        },
        note,
    }
}

/// Evaluates one case. Every stored case replays to the same record.
pub fn evaluate_case(case: &AuditCase) -> Result<AuditRecord> {
    let claim = case.claim;
    match (&case.payload, claim) {
        (
            CasePayload::Sandwich {
                function,
                a,
                b,
                s,
                side,
            },
            ClaimId::T1,
        ) => {
            let f = function.build()?;
            let r = hhbounds::hh_bounds_s(&f, &Interval::new(*a, *b)?, *s)?;
            let (stated, measured) = match side {
                SandwichSide::Lower => (r.mid_integral, r.lower),
                SandwichSide::Upper => (r.upper, r.mid_integral),
            };
            Ok(record(
                case.clone(),
                stated,
                measured,
                r.hypothesis.holds,
                r.hypothesis.description,
            ))
        }
        (
            CasePayload::Bound {
                function,
                a,
                b,
                lambda,
                n,
                s,
                q,
            },
            _,
        ) => {
            let theorem = claim.theorem().ok_or_else(|| mismatch(claim))?;
            let f = function.build()?;
            let input = BoundInput::new(&f, Interval::new(*a, *b)?, *lambda, *n, *s, *q)?;
            let r = hhbounds::bound(theorem, &input)?;
            Ok(record(
                case.clone(),
                r.bound_for(case.variant),
                r.lhs,
                r.hypothesis.holds,
                r.hypothesis.description,
            ))
        }
        (CasePayload::Quadrature { function, nodes, s, q }, ClaimId::QProp1 | ClaimId::QProp2) => {
            let f = function.build()?;
            let k = Partition::new(nodes.clone())?;
            let r = if claim == ClaimId::QProp1 {
                midpoint_error_bound(&f, &k, *s, *q)?
            } else {
                trapezoid_error_bound(&f, &k, *s, *q)?
            };
            let stated = match case.variant {
                Variant::AsPrinted => r.printed_bound,
                Variant::Corrected => r.error_bound,
            };
            Ok(record(
                case.clone(),
                stated,
                r.oracle_error,
                r.hypothesis.holds,
                r.hypothesis.description,
            ))
        }
        (CasePayload::Pair { a, b }, ClaimId::MProp1) => {
            audit_means_prop1(&PositivePair::new(*a, *b)?, case.variant)
        }
        (CasePayload::PairP { a, b, p }, ClaimId::MProp2) => {
            audit_means_prop2(&PositivePair::new(*a, *b)?, *p)
        }
        (CasePayload::PairP { a, b, p }, ClaimId::MProp3) => {
            audit_means_prop3(&PositivePair::new(*a, *b)?, *p)
        }
        (
            CasePayload::PowerPair {
                a,
                b,
                n,
                s,
                q,
                form,
            },
            ClaimId::MProp4,
        ) => audit_means_prop4(*a, *b, *n, *s, *q, *form),
        (CasePayload::Pair { a, b }, ClaimId::Chain) => {
            let p = PositivePair::new(*a, *b)?;
            let chain = [
                mean_harmonic(&p),
                mean_geometric(&p),
                mean_logarithmic(&p),
                mean_identric(&p),
                mean_arithmetic(&p),
            ];
            Ok(order_record(case.clone(), &chain, "H <= G <= L <= I <= A"))
        }
        (CasePayload::Order { s }, ClaimId::Jagers) => {
            let j = jagers_bounds(*s)?;
            let chain = [2f64.powf(s - 1.0), j.lower, j.middle, j.upper];
            Ok(order_record(
                case.clone(),
                &chain,
                "2^(s-1) <= lower <= middle <= upper",
            ))
        }
        _ => Err(mismatch(claim)),
    }
}

fn mismatch(claim: ClaimId) -> Error {
    Error::UnknownClaim(format!("payload does not match claim {claim}"))
}

/// Orderings are recorded as the largest consecutive ratio against 1.
fn order_record(case: AuditCase, chain: &[f64], note: &str) -> AuditRecord {
    let worst = chain
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    record(case, 1.0, worst, true, note.to_string())
}

/// `|A - L| <= (b-a)^2/3 · A(|a|, |b|)`; the corrected form uses
/// `(ln b - ln a)^2`, the width of the interval the exponential is applied on.
pub fn audit_means_prop1(pair: &PositivePair, variant: Variant) -> Result<AuditRecord> {
    let (a, b) = (pair.a(), pair.b());
    let measured = (mean_arithmetic(pair) - mean_logarithmic(pair)).abs();
    let abs_mean = mean_arithmetic(&PositivePair::new(a.abs(), b.abs())?);
    let width = match variant {
        Variant::AsPrinted => b - a,
        Variant::Corrected => b.ln() - a.ln(),
    };
    let stated = width * width / 3.0 * abs_mean;
    let case = AuditCase {
        claim: ClaimId::MProp1,
        variant,
        payload: CasePayload::Pair { a, b },
    };
    Ok(record(case, stated, measured, true, String::new()))
}

/// `G/I <= exp[-((b-a)^2/2) (2/(p+1))^2 / H(a,b)]`, as printed.
pub fn audit_means_prop2(pair: &PositivePair, p: f64) -> Result<AuditRecord> {
    check_p(p)?;
    let (a, b) = (pair.a(), pair.b());
    let measured = (mean_geometric(pair) / mean_identric(pair)).abs();
    let k = 2.0 / (p + 1.0);
    let stated = (-(b - a).powi(2) / 2.0 * k * k / mean_harmonic(pair)).exp();
    let case = AuditCase {
        claim: ClaimId::MProp2,
        variant: Variant::AsPrinted,
        payload: CasePayload::PairP { a, b, p },
    };
    Ok(record(case, stated, measured, true, String::new()))
}

/// `|A^{1/2} - L_p^2| <= ((b-a)^2 / (2 (p+1)^{1/p})) (1/2)^{1/q} / H(√a, √b)`,
/// reading `A^{1/2}` as `sqrt(A(a,b))` and `L_p^2` as `L_p(a,b)^2`.
pub fn audit_means_prop3(pair: &PositivePair, p: f64) -> Result<AuditRecord> {
    check_p(p)?;
    let (a, b) = (pair.a(), pair.b());
    let q = p / (p - 1.0);
    let measured = (mean_arithmetic(pair).sqrt() - mean_p_logarithmic(pair, p).powi(2)).abs();
    let roots = PositivePair::new(a.sqrt(), b.sqrt())?;
    let stated = (b - a).powi(2) / (2.0 * (p + 1.0).powf(1.0 / p)) * 0.5f64.powf(1.0 / q)
        / mean_harmonic(&roots);
    let case = AuditCase {
        claim: ClaimId::MProp3,
        variant: Variant::AsPrinted,
        payload: CasePayload::PairP { a, b, p },
    };
    Ok(record(
        case,
        stated,
        measured,
        true,
        "A^(1/2) read as sqrt(A(a,b)); L_p^2 read as L_p(a,b)^2".into(),
    ))
}

/// `|A[(1-a)^n, (1-b)^n] - L_n^n[1-a, 1-b]|` against
/// `((b-a)^2 / 12^{(q-1)/q}) (n(n-1)/((s+2)(s+3)))^{1/q} · M`, with
/// `M = A(|1-a|^{q(n-1)}, |1-b|^{q(n-1)})^{1/q}` (tight) or
/// `M = A(|1-a|^{n-1}, |1-b|^{n-1})` (weak).
pub fn audit_means_prop4(a: f64, b: f64, n: i32, s: f64, q: f64, form: ChainForm) -> Result<AuditRecord> {
    if !(0.0 < a && a <= b && b < 1.0) {
        return Err(Error::InvalidInterval { a, b });
    }
    if n.abs() < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as f64,
            expected: "|n| >= 2",
        });
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange {
            what: "s",
            value: s,
            expected: "(0, 1]",
        });
    }
    let conj = hhbounds::Conjugate::new(q)?;
    let (u, v) = (1.0 - a, 1.0 - b);
    let powers = PositivePair::new(u.powi(n), v.powi(n))?;
    let shifted = PositivePair::new(u, v)?;
    let measured = (mean_arithmetic(&powers) - mean_p_logarithmic(&shifted, n as f64).powi(n)).abs();
    let nf = n as f64;
    let m = match form {
        ChainForm::Tight => {
            let e = q * (nf - 1.0);
            (0.5 * (u.abs().powf(e) + v.abs().powf(e))).powf(conj.inv_q())
        }
        ChainForm::Weak => 0.5 * (u.abs().powf(nf - 1.0) + v.abs().powf(nf - 1.0)),
    };
    let stated = (b - a).powi(2) / 12f64.powf(conj.inv_p())
        * (nf * (nf - 1.0) / ((s + 2.0) * (s + 3.0))).powf(conj.inv_q())
        * m;
    let case = AuditCase {
        claim: ClaimId::MProp4,
        variant: Variant::AsPrinted,
        payload: CasePayload::PowerPair { a, b, n, s, q, form },
    };
    Ok(record(
        case,
        stated,
        measured,
        true,
        "L_n^n read as the mean of (1-x)^n over [a,b]".into(),
    ))
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "p",
            value: p,
            expected: "finite p > 1",
        })
    }
}

struct PoolEntry {
    name: &'static str,
    params: &'static [f64],
    lo: f64,
    hi: f64,
}

/// Functions sampled for the bound and quadrature claims, each with a box
/// on which its derivatives stay well scaled.
const POOL: [PoolEntry; 11] = [
    PoolEntry { name: "exp", params: &[], lo: -1.0, hi: 2.0 },
    PoolEntry { name: "neg_log", params: &[], lo: 0.5, hi: 2.5 },
    PoolEntry { name: "reciprocal", params: &[], lo: 0.5, hi: 2.5 },
    PoolEntry { name: "sqrt", params: &[], lo: 0.5, hi: 3.0 },
    PoolEntry { name: "pow_s", params: &[0.25], lo: 0.5, hi: 3.0 },
    PoolEntry { name: "one_minus_x_pow_n", params: &[4.0], lo: 0.0, hi: 0.7 },
    PoolEntry { name: "one_minus_x_pow_n", params: &[-2.0], lo: 0.0, hi: 0.7 },
    PoolEntry { name: "poly", params: &[0.0, 0.0, 1.0], lo: -1.0, hi: 2.0 },
    PoolEntry { name: "poly", params: &[0.0, 0.0, 0.0, 1.0], lo: 0.0, hi: 2.0 },
    // f'' = 1 + 3x - x^2/2: positive and concave on the box.
    PoolEntry { name: "poly", params: &[0.0, 0.0, 0.5, 0.5, -1.0 / 24.0], lo: 0.0, hi: 2.0 },
    PoolEntry { name: "poly", params: &[3.0], lo: -1.0, hi: 1.0 },
];

const S_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const Q_GRID: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const P_GRID: [f64; 4] = [1.5, 2.0, 3.0, 4.0];

fn choose<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

fn sample_interval(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64) {
    let min_width = 1e-3 * (hi - lo);
    loop {
        let (x, y) = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        if b - a >= min_width {
            return (a, b);
        }
    }
}

fn theorem_cases(claim: ClaimId, theorem: TheoremId, grid: &GridSpec) -> Vec<CasePayload> {
    let mut rng = grid.rng(claim);
    let per_fn = grid.pick(2, 20);
    let concave = matches!(
        theorem,
        TheoremId::T4 | TheoremId::T7 | TheoremId::T8 | TheoremId::T10
    );
    let mut out = Vec::new();
    for entry in &POOL {
        for i in 0..per_fn {
            let (a, b) = sample_interval(&mut rng, entry.lo, entry.hi);
            let lambda = if theorem.uses_lambda() {
                match i % 5 {
                    0 => a,
                    1 => b,
                    2 => 0.5 * (a + b),
                    _ => rng.gen_range(a..=b),
                }
            } else {
                0.5 * (a + b)
            };
            let n = match theorem {
                TheoremId::Cor1 => 1,
                TheoremId::Cor2 => 2,
                _ => rng.gen_range(1..=4),
            };
            let s = match theorem {
                TheoremId::T4 | TheoremId::T8 | TheoremId::Cor2 => 1.0,
                TheoremId::T7 | TheoremId::T10 => choose(&mut rng, &[0.5, 1.0, 1.0, 1.0]),
                _ => choose(&mut rng, &S_GRID),
            };
            let q = match theorem {
                TheoremId::T2 => 1.0,
                _ if concave => choose(&mut rng, &[1.0, 1.0, 1.5, 2.0]),
                _ => choose(&mut rng, &Q_GRID),
            };
            out.push(CasePayload::Bound {
                function: FnSpec::new(entry.name, entry.params.to_vec()),
                a,
                b,
                lambda,
                n,
                s,
                q,
            });
        }
    }
    out
}

fn sandwich_cases(grid: &GridSpec) -> Vec<CasePayload> {
    let mut rng = grid.rng(ClaimId::T1);
    let per_fn = grid.pick(2, 12);
    let fns = [
        FnSpec::new("poly", vec![0.0, 1.0]),
        FnSpec::new("poly", vec![0.0, 0.0, 1.0]),
        FnSpec::new("exp", vec![]),
        FnSpec::new("pow_s", vec![0.25]),
        FnSpec::new("pow_s", vec![0.5]),
        FnSpec::new("pow_s", vec![0.75]),
    ];
    let mut out = Vec::new();
    for f in &fns {
        for _ in 0..per_fn {
            let (a, b) = sample_interval(&mut rng, 0.0, 5.0);
            let s = choose(&mut rng, &S_GRID);
            for side in [SandwichSide::Lower, SandwichSide::Upper] {
                out.push(CasePayload::Sandwich {
                    function: f.clone(),
                    a,
                    b,
                    s,
                    side,
                });
            }
        }
    }
    out
}

fn quadrature_cases(claim: ClaimId, grid: &GridSpec) -> Vec<CasePayload> {
    let mut rng = grid.rng(claim);
    let per_fn = grid.pick(2, 10);
    let square = FnSpec::new("poly", vec![0.0, 0.0, 1.0]);
    let mut out = vec![
        CasePayload::Quadrature {
            function: square.clone(),
            nodes: vec![0.0, 0.5, 1.0],
            s: 1.0,
            q: 2.0,
        },
        // Cells around a stationary point, where |f'| is small against f''.
        CasePayload::Quadrature {
            function: square,
            nodes: vec![-0.1, 0.0, 0.1],
            s: 1.0,
            q: 2.0,
        },
    ];
    for entry in &POOL {
        for _ in 0..per_fn {
            let (a, b) = sample_interval(&mut rng, entry.lo, entry.hi);
            let pieces = rng.gen_range(1..=6);
            let mut inner: Vec<f64> = (1..pieces).map(|_| rng.gen_range(a..b)).collect();
            inner.sort_by(f64::total_cmp);
            inner.dedup();
            let mut nodes = vec![a];
            nodes.extend(inner.into_iter().filter(|&x| x > a && x < b));
            nodes.push(b);
            out.push(CasePayload::Quadrature {
                function: FnSpec::new(entry.name, entry.params.to_vec()),
                nodes,
                s: choose(&mut rng, &S_GRID),
                q: choose(&mut rng, &Q_GRID),
            });
        }
    }
    out
}

fn ordered_pair(rng: &mut ChaCha8Rng, hi: f64) -> (f64, f64) {
    // (0, hi]: 1 - U with U in [0, 1) never hits zero.
    let x = hi * (1.0 - rng.gen::<f64>());
    let y = hi * (1.0 - rng.gen::<f64>());
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

fn means_cases(claim: ClaimId, grid: &GridSpec) -> Vec<CasePayload> {
    let mut rng = grid.rng(claim);
    match claim {
        ClaimId::Chain => (0..grid.pick(100, 1000))
            .map(|_| {
                let (a, b) = ordered_pair(&mut rng, 100.0);
                CasePayload::Pair { a, b }
            })
            .collect(),
        ClaimId::MProp1 => {
            let mut out = vec![CasePayload::Pair { a: 0.1, b: 0.2 }, CasePayload::Pair { a: 1.0, b: 2.0 }];
            out.extend((0..grid.pick(20, 200)).map(|_| {
                let (a, b) = ordered_pair(&mut rng, 5.0);
                CasePayload::Pair { a, b }
            }));
            out
        }
        ClaimId::MProp2 | ClaimId::MProp3 => {
            let mut out = vec![
                CasePayload::PairP { a: 1.0, b: 1.0, p: 2.0 },
                CasePayload::PairP { a: 1.0, b: 2.0, p: 2.0 },
                CasePayload::PairP { a: 1.0, b: 4.0, p: 2.0 },
                CasePayload::PairP { a: 0.5, b: 2.0, p: 2.0 },
                CasePayload::PairP { a: 1.0, b: 10.0, p: 2.0 },
            ];
            out.extend((0..grid.pick(20, 200)).map(|_| {
                let (a, b) = ordered_pair(&mut rng, 5.0);
                CasePayload::PairP {
                    a,
                    b,
                    p: choose(&mut rng, &P_GRID),
                }
            }));
            out
        }
        ClaimId::MProp4 => {
            let mut base = vec![(0.1, 0.4, 2, 1.0, 2.0), (0.2, 0.3, 3, 1.0, 1.0)];
            for _ in 0..grid.pick(10, 100) {
                let (a, b) = ordered_pair(&mut rng, 0.9);
                let n = choose(&mut rng, &[-3, -2, 2, 3, 4, 5]);
                base.push((a, b, n, choose(&mut rng, &S_GRID), choose(&mut rng, &Q_GRID)));
            }
            base.into_iter()
                .flat_map(|(a, b, n, s, q)| {
                    [ChainForm::Tight, ChainForm::Weak]
                        .map(|form| CasePayload::PowerPair { a, b, n, s, q, form })
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

/// All cases of one claim, in evaluation order.
pub fn generate_cases(claim: ClaimId, grid: &GridSpec) -> Vec<AuditCase> {
    let payloads = match claim {
        ClaimId::T1 => sandwich_cases(grid),
        ClaimId::QProp1 | ClaimId::QProp2 => quadrature_cases(claim, grid),
        ClaimId::Jagers => {
            let k = grid.pick(100, 1000);
            (1..=k).map(|i| CasePayload::Order { s: i as f64 / k as f64 }).collect()
        }
        c => match c.theorem() {
            Some(t) => theorem_cases(c, t, grid),
            None => means_cases(c, grid),
        },
    };
    payloads
        .into_iter()
        .flat_map(|payload| {
            claim.variants().iter().map(move |&variant| AuditCase {
                claim,
                variant,
                payload: payload.clone(),
            })
        })
        .collect()
}

/// Runs every case of `claim` on the grid.
pub fn audit_claim(claim: ClaimId, grid: &GridSpec) -> Result<Vec<AuditRecord>> {
    generate_cases(claim, grid)
        .par_iter()
        .map(evaluate_case)
        .collect()
}

/// Runs every claim, in [`ClaimId::ALL`] order.
pub fn audit_all(grid: &GridSpec) -> Result<Vec<AuditRecord>> {
    let mut out = Vec::new();
    for claim in ClaimId::ALL {
        out.extend(audit_claim(claim, grid)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub claim: ClaimId,
    pub variant: Variant,
    pub certified: bool,
    pub cases: usize,
    pub holds: usize,
    pub violations: usize,
    pub hypothesis_unmet: usize,
    /// Largest tightness among holding cases.
    pub max_tightness: f64,
    pub violated: Vec<CasePayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub claims: Vec<ClaimSummary>,
    pub total_cases: usize,
    pub certified_violations: usize,
    pub printed_violations: usize,
}

pub fn audit_summary(records: &[AuditRecord]) -> AuditSummary {
    let mut groups: BTreeMap<(ClaimId, Variant), ClaimSummary> = BTreeMap::new();
    for r in records {
        let key = (r.case.claim, r.case.variant);
        let g = groups.entry(key).or_insert_with(|| ClaimSummary {
            claim: key.0,
            variant: key.1,
            certified: r.is_certified(),
            cases: 0,
            holds: 0,
            violations: 0,
            hypothesis_unmet: 0,
            max_tightness: 0.0,
            violated: Vec::new(),
        });
        g.cases += 1;
        match r.verdict {
            Verdict::Holds => {
                g.holds += 1;
                g.max_tightness = g.max_tightness.max(r.tightness.unwrap_or(0.0));
            }
            Verdict::Violated => {
                g.violations += 1;
                g.violated.push(r.case.payload.clone());
            }
            Verdict::HypothesisUnmet => g.hypothesis_unmet += 1,
        }
    }
    let claims: Vec<ClaimSummary> = groups.into_values().collect();
    let (mut certified, mut printed) = (0, 0);
    for c in &claims {
        if c.certified {
            certified += c.violations;
        } else {
            printed += c.violations;
        }
    }
    AuditSummary {
        total_cases: records.len(),
        certified_violations: certified,
        printed_violations: printed,
        claims,
    }
}
