//! The n-th order integral identity and the family of Hermite–Hadamard type
//! bounds built on it.
//!
//! Every bound is returned together with the left-hand side it controls,
//! measured with the reference integrator, and the outcome of the lattice
//! check of its convexity hypothesis. Where the commonly quoted closed form
//! differs from the one its derivation supports, both are computed: `bound`
//! is the sound one and `printed_bound` is the quoted one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnmodel::{
    check_concavity, check_s_convexity, ConvexityReport, DifferentiableFunction, Interval,
};
use crate::quadrature::{integrate_derivative, oracle_integral};
use crate::special::beta;

/// Lattice resolution used for hypothesis checks.
pub const HYPOTHESIS_GRID: usize = 17;

/// Integrator tolerance for the identity residual.
pub const IDENTITY_TOL: f64 = 1e-11;

/// Relative slack of the dominance test `lhs <= bound + slack (1 + bound)`.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Hölder pair `(p, q)` with `1/p + 1/q = 1`, `q >= 1`; `q = 1` means
/// `p = ∞` and every `(·)^{1/p}` factor collapses to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    q: f64,
}

impl Conjugate {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::OutOfRange {
                what: "q",
                value: q,
                expected: "finite q >= 1",
            });
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        if self.q == 1.0 {
            f64::INFINITY
        } else {
            self.q / (self.q - 1.0)
        }
    }

    pub fn inv_q(&self) -> f64 {
        1.0 / self.q
    }

    pub fn inv_p(&self) -> f64 {
        1.0 - 1.0 / self.q
    }

    /// `x^{-1/p}`, equal to 1 when `p = ∞`.
    pub fn inv_p_root(&self, x: f64) -> f64 {
        if self.q == 1.0 {
            1.0
        } else {
            x.powf(-self.inv_p())
        }
    }

    /// `(x^q + y^q)^{1/q}`.
    pub fn q_norm(&self, x: f64, y: f64) -> f64 {
        (x.powf(self.q) + y.powf(self.q)).powf(self.inv_q())
    }

    /// `(wx x^q + wy y^q)^{1/q}`.
    pub fn weighted_q_norm(&self, wx: f64, x: f64, wy: f64, y: f64) -> f64 {
        (wx * x.powf(self.q) + wy * y.powf(self.q)).powf(self.inv_q())
    }
}

/// Result of checking a bound's convexity hypothesis on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub description: String,
    pub holds: bool,
    pub worst_violation: f64,
}

impl Hypothesis {
    pub fn from_report(description: String, report: &ConvexityReport) -> Self {
        Self {
            description,
            holds: report.passed(),
            worst_violation: report.worst_violation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AsPrinted,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
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
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::T7,
        TheoremId::T8,
        TheoremId::T9,
        TheoremId::T10,
        TheoremId::Cor1,
        TheoremId::Cor2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::T2 => "t2",
            TheoremId::T3 => "t3",
            TheoremId::T4 => "t4",
            TheoremId::T5 => "t5",
            TheoremId::T6 => "t6",
            TheoremId::T7 => "t7",
            TheoremId::T8 => "t8",
            TheoremId::T9 => "t9",
            TheoremId::T10 => "t10",
            TheoremId::Cor1 => "cor1",
            TheoremId::Cor2 => "cor2",
        }
    }

    /// Whether the bound depends on the interior point λ.
    pub fn uses_lambda(&self) -> bool {
        matches!(
            self,
            TheoremId::T2 | TheoremId::T3 | TheoremId::T4 | TheoremId::T5 | TheoremId::T7
        )
    }

    /// Whether the quoted closed form differs from the sound one.
    pub fn has_printed_variant(&self) -> bool {
        matches!(self, TheoremId::T6 | TheoremId::Cor1 | TheoremId::Cor2)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

/// Query for one bound evaluation.
#[derive(Debug, Clone, Copy)]
pub struct BoundInput<'a> {
    pub f: &'a DifferentiableFunction,
    pub interval: Interval,
    pub lambda: f64,
    pub n: usize,
    pub s: f64,
    pub conj: Conjugate,
}

impl<'a> BoundInput<'a> {
    pub fn new(
        f: &'a DifferentiableFunction,
        interval: Interval,
        lambda: f64,
        n: usize,
        s: f64,
        q: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                what: "n",
                value: 0.0,
                expected: "n >= 1",
            });
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::OutOfRange {
                what: "s",
                value: s,
                expected: "(0, 1]",
            });
        }
        if !interval.contains(lambda) {
            return Err(Error::OutOfRange {
                what: "lambda",
                value: lambda,
                expected: "a <= lambda <= b",
            });
        }
        f.require(&interval, n)?;
        Ok(Self {
            f,
            interval,
            lambda,
            n,
            s,
            conj: Conjugate::new(q)?,
        })
    }

    fn a(&self) -> f64 {
        self.interval.a()
    }

    fn b(&self) -> f64 {
        self.interval.b()
    }

    fn dn_abs(&self, x: f64) -> f64 {
        self.f.deriv(self.n, x).abs()
    }

    fn with_n(&self, n: usize) -> Result<Self> {
        self.f.require(&self.interval, n)?;
        Ok(Self { n, ..*self })
    }
}

/// A bound together with the measured quantity it controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub theorem: TheoremId,
    /// Sound closed form.
    pub bound: f64,
    /// Closed form as usually quoted; equals `bound` when they agree.
    pub printed_bound: f64,
    /// Absolute-sum weakening (corollaries only).
    pub weak_bound: Option<f64>,
    pub printed_weak_bound: Option<f64>,
    /// Oracle-measured left-hand side.
    pub lhs: f64,
    /// `lhs / bound`; `None` when a positive lhs meets a zero bound.
    pub tightness: Option<f64>,
    pub hypothesis: Hypothesis,
    pub notes: Vec<String>,
}

impl BoundResult {
    pub fn bound_for(&self, variant: Variant) -> f64 {
        match variant {
            Variant::AsPrinted => self.printed_bound,
            Variant::Corrected => self.bound,
        }
    }

    pub fn dominated(&self, variant: Variant) -> bool {
        dominated(self.lhs, self.bound_for(variant))
    }
}

pub fn dominated(lhs: f64, bound: f64) -> bool {
    lhs <= bound + DOMINANCE_SLACK * (1.0 + bound.abs())
}

/// `measured / stated`, zero when both vanish; undefined for a positive
/// measurement against a zero bound.
pub fn tightness(measured: f64, stated: f64) -> Option<f64> {
    if stated > 0.0 {
        Some(measured / stated)
    } else if measured == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Absolute value of a signed sum, snapped to zero below its roundoff level.
fn cancelled_abs(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if sum.abs() <= 64.0 * f64::EPSILON * scale {
        0.0
    } else {
        sum.abs()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `|LHS - RHS|` of the n-th order identity
///
/// `(-1)^n ∫_a^b f = Σ_{m=1}^n (-1)^{n-m+1} [((t-a)^m - (t-b)^m)/m!] f^(m-1)(t)
///   + (1/n!) [∫_a^t (x-a)^n f^(n) + ∫_t^b (x-b)^n f^(n)]`.
pub fn lemma3_residual(f: &DifferentiableFunction, interval: &Interval, t: f64, n: usize) -> Result<f64> {
    if !interval.contains(t) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            expected: "a <= t <= b",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    f.require(interval, n)?;
    let (a, b) = (interval.a(), interval.b());
    let lhs = sign(n) * integrate_derivative(f, 0, |_| 1.0, interval, IDENTITY_TOL)?;
    let mut rhs = 0.0;
    for m in 1..=n {
        let coeff = ((t - a).powi(m as i32) - (t - b).powi(m as i32)) / factorial(m);
        rhs += sign(n - m + 1) * coeff * f.deriv(m - 1, t);
    }
    let ni = n as i32;
    let left = if t > a {
        integrate_derivative(f, n, |x| (x - a).powi(ni), &Interval::new(a, t)?, IDENTITY_TOL)?
    } else {
        0.0
    };
    let right = if t < b {
        integrate_derivative(f, n, |x| (x - b).powi(ni), &Interval::new(t, b)?, IDENTITY_TOL)?
    } else {
        0.0
    };
    rhs += (left + right) / factorial(n);
    Ok((lhs - rhs).abs())
}

/// Right side of the first-order midpoint identity,
/// `((b-a)/4) ∫_0^1 (1-t) [f'(ta + (1-t)m) - f'(tb + (1-t)m)] dt`,
/// which equals `f(m) - (1/(b-a)) ∫ f`.
pub fn midpoint_identity_rhs(f: &DifferentiableFunction, interval: &Interval) -> Result<f64> {
    f.require(interval, 1)?;
    let (a, b, m) = (interval.a(), interval.b(), interval.midpoint());
    let g = |t: f64| (1.0 - t) * (f.deriv(1, t * a + (1.0 - t) * m) - f.deriv(1, t * b + (1.0 - t) * m));
    let unit = Interval::new(0.0, 1.0)?;
    Ok(0.25 * (b - a) * crate::quadrature::reference_integral(g, &unit, IDENTITY_TOL)?)
}

/// Right side of the second-order trapezoid identity,
/// `((b-a)^2/2) ∫_0^1 t(1-t) f''(ta + (1-t)b) dt`,
/// which equals `(f(a)+f(b))/2 - (1/(b-a)) ∫ f`.
pub fn trapezoid_identity_rhs(f: &DifferentiableFunction, interval: &Interval) -> Result<f64> {
    f.require(interval, 2)?;
    let (a, b) = (interval.a(), interval.b());
    let g = |t: f64| t * (1.0 - t) * f.deriv(2, t * a + (1.0 - t) * b);
    let unit = Interval::new(0.0, 1.0)?;
    Ok(0.5 * (b - a).powi(2) * crate::quadrature::reference_integral(g, &unit, IDENTITY_TOL)?)
}

/// The two-sided estimate for s-convex `f`:
/// `2^{s-1} f((a+b)/2) <= mean <= (f(a) + f(b))/(s+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    pub mid_integral: f64,
    pub hypothesis: Hypothesis,
}

impl Sandwich {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.mid_integral + slack && self.mid_integral <= self.upper + slack
    }
}

pub fn hh_bounds_s(f: &DifferentiableFunction, interval: &Interval, s: f64) -> Result<Sandwich> {
    f.require(interval, 0)?;
    let (fa, fb, fm) = (f.eval(interval.a()), f.eval(interval.b()), f.eval(interval.midpoint()));
    for (x, v) in [(interval.a(), fa), (interval.b(), fb), (interval.midpoint(), fm)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
    }
    let report = check_s_convexity(|x| f.eval(x), interval, s, HYPOTHESIS_GRID)?;
    Ok(Sandwich {
        lower: 2f64.powf(s - 1.0) * fm,
        upper: (fa + fb) / (s + 1.0),
        mid_integral: oracle_integral(f, interval)? / interval.width(),
        hypothesis: Hypothesis::from_report(format!("f is {s}-convex"), &report),
    })
}

/// `|(-1)^n ∫f + Σ_{m=1}^n (-1)^{n-m+2} [((λ-a)^m - (λ-b)^m)/m!] f^(m-1)(λ)|`.
pub fn lambda_lhs(input: &BoundInput, integral: f64) -> f64 {
    let (a, b, lam, n) = (input.a(), input.b(), input.lambda, input.n);
    let mut terms = vec![sign(n) * integral];
    for m in 1..=n {
        let coeff = ((lam - a).powi(m as i32) - (lam - b).powi(m as i32)) / factorial(m);
        terms.push(sign(n - m + 2) * coeff * input.f.deriv(m - 1, lam));
    }
    cancelled_abs(&terms)
}

/// `|Σ_{m=1}^n (-1)^{n-m+2} ((b-a)^m / (k m!)) [f^(m-1)(b) - (-1)^m f^(m-1)(a)] + (2/k) (-1)^n ∫f|` with `k = 1` for the two-endpoint form and `k = 2`
/// for its halved form.
pub fn endpoint_lhs(input: &BoundInput, integral: f64, halved: bool) -> f64 {
    let (a, b, n) = (input.a(), input.b(), input.n);
    let h = b - a;
    let k = if halved { 2.0 } else { 1.0 };
    let mut terms = vec![2.0 / k * sign(n) * integral];
    for m in 1..=n {
        let coeff = h.powi(m as i32) / (k * factorial(m));
        let fb = input.f.deriv(m - 1, b);
        let fa = input.f.deriv(m - 1, a);
        terms.push(sign(n - m + 2) * coeff * fb);
        terms.push(-sign(n - m + 2) * sign(m) * coeff * fa);
    }
    cancelled_abs(&terms)
}

enum Shape {
    SConvex { s: f64 },
    SConcave { s: f64 },
}

fn derivative_hypothesis(input: &BoundInput, q: f64, shape: Shape) -> Result<Hypothesis> {
    let n = input.n;
    let g = |x: f64| input.f.deriv(n, x).abs().powf(q);
    let power = if q == 1.0 { String::new() } else { format!("^{q}") };
    let (report, desc) = match shape {
        Shape::SConvex { s } => (
            check_s_convexity(g, &input.interval, s, HYPOTHESIS_GRID)?,
            format!("|f^({n})|{power} is {s}-convex"),
        ),
        Shape::SConcave { s } => (
            check_concavity(g, &input.interval, s, HYPOTHESIS_GRID)?,
            if s == 1.0 {
                format!("|f^({n})|{power} is concave")
            } else {
                format!("|f^({n})|{power} is {s}-concave")
            },
        ),
    };
    Ok(Hypothesis::from_report(desc, &report))
}

fn finish(
    theorem: TheoremId,
    bound: f64,
    printed_bound: f64,
    lhs: f64,
    hypothesis: Hypothesis,
    notes: Vec<String>,
) -> BoundResult {
    BoundResult {
        theorem,
        bound,
        printed_bound,
        weak_bound: None,
        printed_weak_bound: None,
        lhs,
        tightness: tightness(lhs, bound),
        hypothesis,
        notes,
    }
}

struct SideWeights {
    left: f64,
    right: f64,
}

fn side_weights(input: &BoundInput) -> SideWeights {
    let e = input.n as i32 + 1;
    SideWeights {
        left: (input.lambda - input.a()).powi(e),
        right: (input.b() - input.lambda).powi(e),
    }
}

/// `|f^(n)|` s-convex:
/// `(1/n!) [β(s+1,n+1)((λ-a)^{n+1}|f^(n)(a)| + (b-λ)^{n+1}|f^(n)(b)|)
///  + β(1,n+s+1)((λ-a)^{n+1} + (b-λ)^{n+1})|f^(n)(λ)|]`.
pub fn bound_t2(input: &BoundInput) -> Result<BoundResult> {
    let (n, s) = (input.n as f64, input.s);
    let w = side_weights(input);
    let (da, db, dl) = (input.dn_abs(input.a()), input.dn_abs(input.b()), input.dn_abs(input.lambda));
    let bound = (beta(s + 1.0, n + 1.0)? * (w.left * da + w.right * db)
        + beta(1.0, n + s + 1.0)? * (w.left + w.right) * dl)
        / factorial(input.n);
    let lhs = lambda_lhs(input, oracle_integral(input.f, &input.interval)?);
    let hyp = derivative_hypothesis(input, 1.0, Shape::SConvex { s })?;
    Ok(finish(TheoremId::T2, bound, bound, lhs, hyp, Vec::new()))
}

/// `|f^(n)|^q` s-convex, weighted Hölder with `(1-t)^n`.
pub fn bound_t3(input: &BoundInput) -> Result<BoundResult> {
    let (n, s, c) = (input.n as f64, input.s, input.conj);
    let w = side_weights(input);
    let (da, db, dl) = (input.dn_abs(input.a()), input.dn_abs(input.b()), input.dn_abs(input.lambda));
    let (b1, b2) = (beta(s + 1.0, n + 1.0)?, beta(1.0, n + s + 1.0)?);
    let bound = c.inv_p_root(n + 1.0) / factorial(input.n)
        * (w.left * c.weighted_q_norm(b1, da, b2, dl) + w.right * c.weighted_q_norm(b1, db, b2, dl));
    let lhs = lambda_lhs(input, oracle_integral(input.f, &input.interval)?);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConvex { s })?;
    Ok(finish(TheoremId::T3, bound, bound, lhs, hyp, Vec::new()))
}

fn concave_sides(input: &BoundInput) -> f64 {
    let w = side_weights(input);
    w.left * input.dn_abs(0.5 * (input.a() + input.lambda))
        + w.right * input.dn_abs(0.5 * (input.b() + input.lambda))
}

/// `|f^(n)|^q` concave, Hölder then Jensen on each side of λ.
pub fn bound_t4(input: &BoundInput) -> Result<BoundResult> {
    let c = input.conj;
    let n = input.n as f64;
    let bound = c.inv_p_root(n * c.p() + 1.0) / factorial(input.n) * concave_sides(input);
    let lhs = lambda_lhs(input, oracle_integral(input.f, &input.interval)?);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConcave { s: 1.0 })?;
    Ok(finish(TheoremId::T4, bound, bound, lhs, hyp, Vec::new()))
}

/// `|f^(n)|^q` s-convex, plain Hölder.
pub fn bound_t5(input: &BoundInput) -> Result<BoundResult> {
    let (n, s, c) = (input.n as f64, input.s, input.conj);
    let w = side_weights(input);
    let (da, db, dl) = (input.dn_abs(input.a()), input.dn_abs(input.b()), input.dn_abs(input.lambda));
    let bound = c.inv_p_root(n * c.p() + 1.0) / factorial(input.n)
        * (1.0 / (s + 1.0)).powf(c.inv_q())
        * (w.left * c.q_norm(da, dl) + w.right * c.q_norm(db, dl));
    let lhs = lambda_lhs(input, oracle_integral(input.f, &input.interval)?);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConvex { s })?;
    Ok(finish(TheoremId::T5, bound, bound, lhs, hyp, Vec::new()))
}

/// `|f^(n)|^q` s-concave: the concave bound scaled by `2^{(s-1)/q}`.
pub fn bound_t7(input: &BoundInput) -> Result<BoundResult> {
    let c = input.conj;
    let n = input.n as f64;
    let bound = c.inv_p_root(n * c.p() + 1.0) / factorial(input.n)
        * 2f64.powf((input.s - 1.0) * c.inv_q())
        * concave_sides(input);
    let lhs = lambda_lhs(input, oracle_integral(input.f, &input.interval)?);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConcave { s: input.s })?;
    Ok(finish(TheoremId::T7, bound, bound, lhs, hyp, Vec::new()))
}

/// Midpoint inequality: first-order, λ at the midpoint, normalised by the
/// interval width.
///
/// The sound bound is
/// `((b-a)/(4 (p+1)^{1/p})) (1/(s+1))^{1/q} [(|f'(a)|^q + |f'(m)|^q)^{1/q} + (|f'(b)|^q + |f'(m)|^q)^{1/q}]`;
/// the printed form carries `(b-a)^2`, which is the un-normalised value.
pub fn bound_cor1(input: &BoundInput) -> Result<BoundResult> {
    let centred = BoundInput {
        lambda: input.interval.midpoint(),
        ..input.with_n(1)?
    };
    let (s, c) = (centred.s, centred.conj);
    let (a, b, m) = (centred.a(), centred.b(), centred.lambda);
    let h = b - a;
    let (da, db, dm) = (centred.dn_abs(a), centred.dn_abs(b), centred.dn_abs(m));
    let k = c.inv_p_root(c.p() + 1.0) * (1.0 / (s + 1.0)).powf(c.inv_q());
    let bracket = c.q_norm(da, dm) + c.q_norm(db, dm);
    let printed = h * h / 4.0 * k * bracket;
    let printed_weak = h * h / 2.0 * k * (da + db);

    let mean = oracle_integral(centred.f, &centred.interval)? / h;
    let fm = centred.f.eval(m);
    let lhs = cancelled_abs(&[fm, -mean]);
    let hyp = derivative_hypothesis(&centred, c.q(), Shape::SConvex { s })?;
    let mut r = finish(
        TheoremId::Cor1,
        printed / h,
        printed,
        lhs,
        hyp,
        vec!["printed form scales as (b-a)^2; sound form as (b-a)".into()],
    );
    r.weak_bound = Some(printed_weak / h);
    r.printed_weak_bound = Some(printed_weak);
    Ok(r)
}

/// Two-endpoint form: `|f^(n)|^q` s-convex,
/// `((b-a)^{n+1}/n!) (1/(n+1))^{1/p} [{β(s+1,n+1)|f^(n)(a)|^q + β(1,n+s+1)|f^(n)(b)|^q}^{1/q} + {… a ↔ b …}^{1/q}]`.
///
/// The printed form raises `1/(n+1)` to `q/(q-1) = p` instead of `1/p`.
pub fn bound_t6(input: &BoundInput) -> Result<BoundResult> {
    let (n, s, c) = (input.n as f64, input.s, input.conj);
    let h = input.b() - input.a();
    let (da, db) = (input.dn_abs(input.a()), input.dn_abs(input.b()));
    let (b1, b2) = (beta(s + 1.0, n + 1.0)?, beta(1.0, n + s + 1.0)?);
    let braces = c.weighted_q_norm(b1, da, b2, db) + c.weighted_q_norm(b1, db, b2, da);
    let scale = h.powi(input.n as i32 + 1) / factorial(input.n) * braces;
    let bound = scale * c.inv_p_root(n + 1.0);
    let printed = if c.q() == 1.0 {
        0.0
    } else {
        scale * (1.0 / (n + 1.0)).powf(c.p())
    };
    let lhs = endpoint_lhs(input, oracle_integral(input.f, &input.interval)?, false);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConvex { s })?;
    Ok(finish(
        TheoremId::T6,
        bound,
        printed,
        lhs,
        hyp,
        vec!["printed exponent on 1/(n+1) is q/(q-1); sound exponent is 1/p".into()],
    ))
}

/// Trapezoid inequality: second order, `|f''|^q` convex,
/// `((b-a)^2 / (2·6^{1/p})) (1/12)^{1/q} (|f''(a)|^q + |f''(b)|^q)^{1/q}`.
///
/// The printed form repeats `|f''(a)|^q` in place of `|f''(b)|^q`.
pub fn bound_cor2(input: &BoundInput) -> Result<BoundResult> {
    let second = BoundInput {
        s: 1.0,
        ..input.with_n(2)?
    };
    let c = second.conj;
    let (a, b) = (second.a(), second.b());
    let h = b - a;
    let (da, db) = (second.dn_abs(a), second.dn_abs(b));
    let k = h * h / 2.0 * c.inv_p_root(6.0) * (1.0 / 12.0f64).powf(c.inv_q());
    let bound = k * c.q_norm(da, db);
    let printed = k * c.q_norm(da, da);

    let mean = oracle_integral(second.f, &second.interval)? / h;
    let lhs = cancelled_abs(&[0.5 * second.f.eval(a), 0.5 * second.f.eval(b), -mean]);
    let hyp = derivative_hypothesis(&second, c.q(), Shape::SConvex { s: 1.0 })?;
    let mut r = finish(
        TheoremId::Cor2,
        bound,
        printed,
        lhs,
        hyp,
        vec!["printed form uses |f''(a)| twice; sound form uses both endpoints".into()],
    );
    r.weak_bound = Some(k * (da + db));
    r.printed_weak_bound = Some(k * (da + db));
    Ok(r)
}

fn midpoint_concave_bound(input: &BoundInput) -> f64 {
    let c = input.conj;
    let n = input.n as f64;
    let h = input.b() - input.a();
    h.powi(input.n as i32 + 1) / factorial(input.n)
        * c.inv_p_root(n * c.p() + 1.0)
        * input.dn_abs(input.interval.midpoint())
}

/// Halved two-endpoint form, `|f^(n)|^q` concave.
pub fn bound_t8(input: &BoundInput) -> Result<BoundResult> {
    let bound = midpoint_concave_bound(input);
    let lhs = endpoint_lhs(input, oracle_integral(input.f, &input.interval)?, true);
    let hyp = derivative_hypothesis(input, input.conj.q(), Shape::SConcave { s: 1.0 })?;
    Ok(finish(TheoremId::T8, bound, bound, lhs, hyp, Vec::new()))
}

/// Halved two-endpoint form, `|f^(n)|^q` s-convex.
pub fn bound_t9(input: &BoundInput) -> Result<BoundResult> {
    let (n, s, c) = (input.n as f64, input.s, input.conj);
    let h = input.b() - input.a();
    let (da, db) = (input.dn_abs(input.a()), input.dn_abs(input.b()));
    let bound = h.powi(input.n as i32 + 1) / factorial(input.n)
        * c.inv_p_root(n * c.p() + 1.0)
        * (s + 1.0).powf(-c.inv_q())
        * c.q_norm(da, db);
    let lhs = endpoint_lhs(input, oracle_integral(input.f, &input.interval)?, true);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConvex { s })?;
    Ok(finish(TheoremId::T9, bound, bound, lhs, hyp, Vec::new()))
}

/// Halved two-endpoint form, `|f^(n)|^q` s-concave.
pub fn bound_t10(input: &BoundInput) -> Result<BoundResult> {
    let c = input.conj;
    let bound = midpoint_concave_bound(input) * 2f64.powf((input.s - 1.0) * c.inv_q());
    let lhs = endpoint_lhs(input, oracle_integral(input.f, &input.interval)?, true);
    let hyp = derivative_hypothesis(input, c.q(), Shape::SConcave { s: input.s })?;
    Ok(finish(TheoremId::T10, bound, bound, lhs, hyp, Vec::new()))
}

pub fn bound(theorem: TheoremId, input: &BoundInput) -> Result<BoundResult> {
    match theorem {
        TheoremId::T2 => bound_t2(input),
        TheoremId::T3 => bound_t3(input),
        TheoremId::T4 => bound_t4(input),
        TheoremId::T5 => bound_t5(input),
        TheoremId::T6 => bound_t6(input),
        TheoremId::T7 => bound_t7(input),
        TheoremId::T8 => bound_t8(input),
        TheoremId::T9 => bound_t9(input),
        TheoremId::T10 => bound_t10(input),
        TheoremId::Cor1 => bound_cor1(input),
        TheoremId::Cor2 => bound_cor2(input),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::catalog_get;
    use std::f64::consts::E;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn f(name: &str, params: &[f64]) -> DifferentiableFunction {
        catalog_get(name, params).unwrap()
    }

    #[test]
    fn conjugate_pairs() {
        let c = Conjugate::new(2.0).unwrap();
        assert_eq!(c.p(), 2.0);
        assert!((1.0 / c.p() + 1.0 / c.q() - 1.0).abs() < 1e-12);
        let one = Conjugate::new(1.0).unwrap();
        assert!(one.p().is_infinite());
        assert_eq!(one.inv_p_root(7.0), 1.0);
        assert!(Conjugate::new(0.5).is_err());
    }

    #[test]
    fn identity_residual_constant() {
        let c = f("poly", &[2.5]);
        for n in 1..=4 {
            for t in [0.0, 0.3, 1.0] {
                assert!(lemma3_residual(&c, &unit(), t, n).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_residual_square_and_exp() {
        assert!(lemma3_residual(&f("poly", &[0.0, 0.0, 1.0]), &unit(), 0.3, 2).unwrap() <= 1e-9);
        assert!(lemma3_residual(&f("exp", &[]), &unit(), 0.5, 1).unwrap() <= 1e-9);
    }

    #[test]
    fn identity_residual_errors() {
        let e = f("exp", &[]);
        assert!(lemma3_residual(&e, &unit(), 1.5, 1).is_err());
        assert!(lemma3_residual(&e, &unit(), 0.5, 0).is_err());
        let sq = f("sqrt", &[]);
        assert!(lemma3_residual(&sq, &unit(), 0.5, 1).is_err());
    }

    #[test]
    fn midpoint_identity_matches_gap() {
        let e = f("exp", &[]);
        let gap = (0.5f64).exp() - (E - 1.0);
        assert!((midpoint_identity_rhs(&e, &unit()).unwrap() - gap).abs() < 1e-12);
        let gap = 0.5 * (1.0 + E) - (E - 1.0);
        assert!((trapezoid_identity_rhs(&e, &unit()).unwrap() - gap).abs() < 1e-12);
    }

    #[test]
    fn sandwich_examples() {
        let r = hh_bounds_s(&f("poly", &[0.0, 1.0]), &unit(), 1.0).unwrap();
        assert!((r.lower - 0.5).abs() < 1e-15 && (r.upper - 0.5).abs() < 1e-15);
        assert!((r.mid_integral - 0.5).abs() < 1e-14);
        let r = hh_bounds_s(&f("poly", &[0.0, 0.0, 1.0]), &unit(), 1.0).unwrap();
        assert!((r.lower - 0.25).abs() < 1e-12);
        assert!((r.mid_integral - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.upper - 0.5).abs() < 1e-12);
        let r = hh_bounds_s(&f("sqrt", &[]), &unit(), 0.5).unwrap();
        assert!((r.mid_integral - 2.0 / 3.0).abs() < 1e-11);
        assert!(r.holds(1e-10));
        assert!(r.hypothesis.holds);
    }

    #[test]
    fn constant_function_bounds_vanish() {
        let c = f("poly", &[3.0]);
        for th in TheoremId::ALL {
            let input = BoundInput::new(&c, Interval::new(0.5, 2.0).unwrap(), 1.1, 2, 0.5, 2.0).unwrap();
            let r = bound(th, &input).unwrap();
            assert_eq!(r.bound, 0.0, "{th}");
            assert_eq!(r.lhs, 0.0, "{th}");
            assert_eq!(r.tightness, Some(0.0), "{th}");
        }
    }

    #[test]
    fn t2_square_dominates() {
        let sq = f("poly", &[0.0, 0.0, 1.0]);
        let input = BoundInput::new(&sq, unit(), 0.5, 1, 1.0, 1.0).unwrap();
        let r = bound_t2(&input).unwrap();
        // lhs = |-1/3 + 1 * f(1/2)| = 1/12;
        // bound = β(2,2)(1/4)(0 + 2) + β(1,3)(1/2)(1) = 1/12 + 1/6
        assert!((r.lhs - 1.0 / 12.0).abs() < 1e-13);
        assert!((r.bound - 0.25).abs() < 1e-13);
        assert!(r.dominated(Variant::Corrected));
    }

    #[test]
    fn t2_exp_third_order() {
        let e = f("exp", &[]);
        let input = BoundInput::new(&e, unit(), 0.25, 3, 1.0, 1.0).unwrap();
        let r = bound_t2(&input).unwrap();
        assert!(r.hypothesis.holds);
        assert!(r.dominated(Variant::Corrected));
        let t = r.tightness.unwrap();
        assert!(t > 0.0 && t <= 1.0);
    }

    #[test]
    fn t3_with_q_one_equals_t2() {
        let e = f("exp", &[]);
        for lam in [0.0, 0.3, 0.5, 1.0] {
            let input = BoundInput::new(&e, unit(), lam, 2, 0.7, 1.0).unwrap();
            let (r2, r3) = (bound_t2(&input).unwrap(), bound_t3(&input).unwrap());
            assert!((r2.bound - r3.bound).abs() <= 1e-12 * r2.bound);
        }
    }

    #[test]
    fn t5_square_value() {
        let sq = f("poly", &[0.0, 0.0, 1.0]);
        let input = BoundInput::new(&sq, unit(), 0.5, 1, 1.0, 2.0).unwrap();
        let r = bound_t5(&input).unwrap();
        // (1/√3)(1/√2)(1/4)(1 + √5)
        let expected = 0.25 * (1.0 + 5f64.sqrt()) / 6f64.sqrt();
        assert!((r.bound - expected).abs() < 1e-14);
        assert!(r.dominated(Variant::Corrected));
    }

    #[test]
    fn lambda_endpoint_keeps_one_side() {
        let e = f("exp", &[]);
        let at_a = BoundInput::new(&e, unit(), 0.0, 1, 1.0, 2.0).unwrap();
        let r = bound_t5(&at_a).unwrap();
        let c = at_a.conj;
        let expected = c.inv_p_root(c.p() + 1.0) * 0.5f64.sqrt() * c.q_norm(E, 1.0);
        assert!((r.bound - expected).abs() < 1e-14);
    }

    #[test]
    fn cor1_square() {
        let sq = f("poly", &[0.0, 0.0, 1.0]);
        let input = BoundInput::new(&sq, unit(), 0.5, 1, 1.0, 2.0).unwrap();
        let r = bound_cor1(&input).unwrap();
        assert!((r.lhs - 1.0 / 12.0).abs() < 1e-13);
        let tight = 0.25 * (1.0 + 5f64.sqrt()) / 6f64.sqrt();
        assert!((r.bound - tight).abs() < 1e-14);
        assert!((r.weak_bound.unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        assert!(r.dominated(Variant::Corrected) && r.dominated(Variant::AsPrinted));
    }

    #[test]
    fn cor1_printed_form_fails_on_short_interval() {
        let sq = f("poly", &[0.0, 0.0, 1.0]);
        let input = BoundInput::new(&sq, Interval::new(0.0, 0.1).unwrap(), 0.05, 1, 1.0, 2.0).unwrap();
        let r = bound_cor1(&input).unwrap();
        assert!(r.dominated(Variant::Corrected));
        assert!(!r.dominated(Variant::AsPrinted));
    }

    #[test]
    fn cor2_square_is_tight() {
        let sq = f("poly", &[0.0, 0.0, 1.0]);
        let input = BoundInput::new(&sq, unit(), 0.5, 2, 1.0, 2.0).unwrap();
        let r = bound_cor2(&input).unwrap();
        assert!((r.lhs - 1.0 / 6.0).abs() < 1e-13);
        assert!((r.bound - 1.0 / 6.0).abs() < 1e-14);
        assert!(r.dominated(Variant::Corrected));
    }

    #[test]
    fn t6_printed_exponent_collapses_at_q_one() {
        let e = f("exp", &[]);
        let input = BoundInput::new(&e, unit(), 0.5, 2, 1.0, 1.0).unwrap();
        let r = bound_t6(&input).unwrap();
        assert_eq!(r.printed_bound, 0.0);
        assert!(r.dominated(Variant::Corrected));
        assert!(!r.dominated(Variant::AsPrinted));
    }

    #[test]
    fn t6_symmetric_in_endpoint_magnitudes() {
        // x^3 on [0, 1] and (1-x)^3 on [0, 1] swap |f''(a)| and |f''(b)|.
        let cube = f("poly", &[0.0, 0.0, 0.0, 1.0]);
        let flip = f("one_minus_x_pow_n", &[3.0]);
        let i1 = BoundInput::new(&cube, unit(), 0.5, 2, 0.5, 2.0).unwrap();
        let i2 = BoundInput::new(&flip, unit(), 0.5, 2, 0.5, 2.0).unwrap();
        let (r1, r2) = (bound_t6(&i1).unwrap(), bound_t6(&i2).unwrap());
        assert!((r1.bound - r2.bound).abs() <= 1e-12 * r1.bound);
    }

    #[test]
    fn s_concave_reductions_at_s_one() {
        let g = f("neg_log", &[]);
        let i = Interval::new(1.0, 2.0).unwrap();
        let input = BoundInput::new(&g, i, 1.5, 2, 1.0, 1.0).unwrap();
        assert_eq!(bound_t7(&input).unwrap().bound, bound_t4(&input).unwrap().bound);
        assert_eq!(bound_t10(&input).unwrap().bound, bound_t8(&input).unwrap().bound);
    }

    #[test]
    fn t8_beta_form() {
        for np in 1..=10 {
            let np = np as f64;
            let c = Conjugate::new(2.0).unwrap();
            let via_beta = beta(np + 1.0, 1.0).unwrap().powf(c.inv_p());
            assert!((via_beta - (1.0 / (np + 1.0)).powf(c.inv_p())).abs() <= 1e-13);
        }
    }

    #[test]
    fn t4_concave_instance() {
        // |f''| = 6x is linear, hence concave.
        let cube = f("poly", &[0.0, 0.0, 0.0, 1.0]);
        let input = BoundInput::new(&cube, Interval::new(1.0, 2.0).unwrap(), 1.5, 2, 1.0, 1.0).unwrap();
        let r = bound_t4(&input).unwrap();
        assert!(r.hypothesis.holds);
        assert!(r.dominated(Variant::Corrected));
        // q = 2 squares it into a convex function.
        let input = BoundInput { conj: Conjugate::new(2.0).unwrap(), ..input };
        assert!(!bound_t4(&input).unwrap().hypothesis.holds);
    }

    #[test]
    fn input_validation() {
        let e = f("exp", &[]);
        assert!(BoundInput::new(&e, unit(), 1.5, 1, 1.0, 1.0).is_err());
        assert!(BoundInput::new(&e, unit(), 0.5, 0, 1.0, 1.0).is_err());
        assert!(BoundInput::new(&e, unit(), 0.5, 1, 0.0, 1.0).is_err());
        assert!(BoundInput::new(&e, unit(), 0.5, 1, 1.0, 0.9).is_err());
        let sq = f("sqrt", &[]);
        assert!(BoundInput::new(&sq, unit(), 0.5, 1, 1.0, 1.0).is_err());
    }
}
