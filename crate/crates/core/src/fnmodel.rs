//! Functions with closed-form derivatives and lattice certification of
//! s-convexity in the second sense.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order exposed by families whose derivatives grow
/// factorially. Exponential and polynomial entries are unbounded.
pub const FACTORIAL_FAMILY_MAX_ORDER: usize = 20;

/// Scaled tolerance used by the lattice checkers.
pub const LATTICE_TOLERANCE: f64 = 1e-12;

/// Closed interval `[a, b]` with finite `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Validity domain of a catalog entry. Infinite endpoints are allowed.
///
/// An open endpoint means derivatives (and possibly the value) do not extend
/// to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Domain {
    const REALS: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };
}

/// Catalog reference: a name plus its real parameters, written
/// `NAME[:v1,v2,...]` on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FnSpec {
    pub name: String,
    pub params: Vec<f64>,
}

impl From<FnSpec> for String {
    fn from(spec: FnSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for FnSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FnSpec {
    pub fn new(name: impl Into<String>, params: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            params,
        }
    }

    pub fn build(&self) -> Result<DifferentiableFunction> {
        catalog_get(&self.name, &self.params)
    }
}

impl fmt::Display for FnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for FnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (s.trim(), None),
        };
        if name.is_empty() {
            return Err(Error::UnknownFunction(s.to_string()));
        }
        let params = match rest {
            None => Vec::new(),
            Some(r) => r
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| Error::InvalidParams {
                        name: name.to_string(),
                        reason: format!("`{v}` is not a real number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self::new(name, params))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Exp,
    NegLog,
    /// `x^s`, also used for `sqrt`.
    Power(f64),
    /// `(1 - x)^n` for integer `n`, `|n| >= 2`.
    OneMinusPow(i32),
    Reciprocal,
    /// Ascending-degree coefficients.
    Poly(Vec<f64>),
}

/// A catalog function together with exact derivative evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiableFunction {
    spec: FnSpec,
    family: Family,
    max_order: usize,
    domain: Domain,
}

/// Names accepted by [`catalog_get`].
pub const CATALOG_NAMES: [&str; 7] = [
    "exp",
    "neg_log",
    "sqrt",
    "pow_s",
    "one_minus_x_pow_n",
    "reciprocal",
    "poly",
];

/// Looks up a catalog entry by name.
///
/// Parameter arity: `pow_s` takes `s` in (0, 1]; `one_minus_x_pow_n` takes an
/// integer `n` with `|n| >= 2`; `poly` takes ascending coefficients; all other
/// entries take none.
pub fn catalog_get(name: &str, params: &[f64]) -> Result<DifferentiableFunction> {
    let bad = |reason: &str| Error::InvalidParams {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    let expect_none = || {
        if params.is_empty() {
            Ok(())
        } else {
            Err(bad("takes no parameters"))
        }
    };
    let positive_axis = |lo_open: bool| Domain {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open,
        hi_open: true,
    };

    let (family, max_order, domain) = match name {
        "exp" => {
            expect_none()?;
            (Family::Exp, usize::MAX, Domain::REALS)
        }
        "neg_log" => {
            expect_none()?;
            (Family::NegLog, FACTORIAL_FAMILY_MAX_ORDER, positive_axis(true))
        }
        "reciprocal" => {
            expect_none()?;
            (
                Family::Reciprocal,
                FACTORIAL_FAMILY_MAX_ORDER,
                positive_axis(true),
            )
        }
        "sqrt" => {
            expect_none()?;
            (
                Family::Power(0.5),
                FACTORIAL_FAMILY_MAX_ORDER,
                positive_axis(true),
            )
        }
        "pow_s" => {
            let &[s] = params else {
                return Err(bad("expects exactly one parameter s"));
            };
            if !(s > 0.0 && s <= 1.0) {
                return Err(bad("s must lie in (0, 1]"));
            }
            // x^s has unbounded derivatives at 0 unless s = 1.
            (
                Family::Power(s),
                FACTORIAL_FAMILY_MAX_ORDER,
                positive_axis(s < 1.0),
            )
        }
        "one_minus_x_pow_n" => {
            let &[n] = params else {
                return Err(bad("expects exactly one parameter n"));
            };
            if n.fract() != 0.0 || n.abs() < 2.0 || n.abs() > 64.0 {
                return Err(bad("n must be an integer with 2 <= |n| <= 64"));
            }
            let n = n as i32;
            let domain = if n > 0 {
                Domain::REALS
            } else {
                Domain {
                    lo: f64::NEG_INFINITY,
                    hi: 1.0,
                    lo_open: true,
                    hi_open: true,
                }
            };
            (Family::OneMinusPow(n), FACTORIAL_FAMILY_MAX_ORDER, domain)
        }
        "poly" => {
            if params.is_empty() {
                return Err(bad("expects at least one coefficient"));
            }
            if params.iter().any(|c| !c.is_finite()) {
                return Err(bad("coefficients must be finite"));
            }
            (Family::Poly(params.to_vec()), usize::MAX, Domain::REALS)
        }
        _ => return Err(Error::UnknownFunction(name.to_string())),
    };

    Ok(DifferentiableFunction {
        spec: FnSpec::new(name, params.to_vec()),
        family,
        max_order,
        domain,
    })
}

/// `c(c-1)...(c-k+1)`.
fn falling_factorial(c: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (c - j as f64))
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl DifferentiableFunction {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &FnSpec {
        &self.spec
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    /// `f^(k)(x)`; `k = 0` is the function itself. Orders above
    /// [`max_order`](Self::max_order) return NaN.
    pub fn deriv(&self, k: usize, x: f64) -> f64 {
        if k > self.max_order {
            return f64::NAN;
        }
        match &self.family {
            Family::Exp => x.exp(),
            Family::NegLog => {
                if k == 0 {
                    -x.ln()
                } else {
                    sign(k) * factorial(k - 1) * x.powi(-(k as i32))
                }
            }
            Family::Reciprocal => sign(k) * factorial(k) * x.powi(-(k as i32) - 1),
            Family::Power(s) => {
                let c = falling_factorial(*s, k);
                if c == 0.0 {
                    0.0
                } else {
                    c * x.powf(s - k as f64)
                }
            }
            Family::OneMinusPow(n) => {
                let c = falling_factorial(*n as f64, k);
                if c == 0.0 {
                    0.0
                } else {
                    sign(k) * c * (1.0 - x).powi(n - k as i32)
                }
            }
            Family::Poly(coeffs) => {
                if k >= coeffs.len() {
                    return 0.0;
                }
                coeffs[k..]
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (j, c)| {
                        acc * x + c * falling_factorial((j + k) as f64, k)
                    })
            }
        }
    }

    /// Handle to the `k`-th derivative.
    pub fn derivative(&self, k: usize) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.deriv(k, x)
    }

    /// Whether derivatives up to `order` are defined on all of `interval`.
    pub fn supports(&self, interval: &Interval, order: usize) -> bool {
        let d = &self.domain;
        // At an open lower end the value alone may still extend by continuity.
        let lo_ok = interval.a() > d.lo
            || (interval.a() == d.lo && (!d.lo_open || (order == 0 && self.eval(d.lo).is_finite())));
        let hi_ok = interval.b() < d.hi || (interval.b() == d.hi && !d.hi_open);
        lo_ok && hi_ok && order <= self.max_order
    }

    /// Errors unless derivatives up to `order` exist on `interval`.
    pub fn require(&self, interval: &Interval, order: usize) -> Result<()> {
        if order > self.max_order {
            return Err(Error::OrderTooHigh {
                name: self.spec.to_string(),
                order,
                max: self.max_order,
            });
        }
        if !self.supports(interval, order) {
            return Err(Error::OutsideDomain {
                name: self.spec.to_string(),
                a: interval.a(),
                b: interval.b(),
            });
        }
        Ok(())
    }
}

/// A lattice point `(x, y, λ)` at which the defining inequality fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
}

/// Outcome of a lattice convexity or concavity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub verdict: CheckVerdict,
    pub s: f64,
    /// Largest scaled violation found; zero when none.
    pub worst_violation: f64,
    pub witness: Option<Witness>,
    /// A sample of `g` was negative somewhere on the lattice.
    pub negative_sample: bool,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Convex,
    Concave,
}

/// Checks `g(λx+(1-λ)y) <= λ^s g(x) + (1-λ)^s g(y)` on a
/// `grid_n × grid_n × grid_n` lattice over `I × I × [0, 1]`.
///
/// Violations are scaled by `max(1, |rhs|)`. Negative samples of `g` count as
/// domain violations, since the definition is stated for non-negative maps.
pub fn check_s_convexity<G>(g: G, interval: &Interval, s: f64, grid_n: usize) -> Result<ConvexityReport>
where
    G: Fn(f64) -> f64,
{
    lattice_check(&g, interval, s, grid_n, Direction::Convex)
}

/// Reversed inequality: `g(λx+(1-λ)y) >= λ^s g(x) + (1-λ)^s g(y)`.
/// With `s = 1` this is ordinary concavity.
pub fn check_concavity<G>(g: G, interval: &Interval, s: f64, grid_n: usize) -> Result<ConvexityReport>
where
    G: Fn(f64) -> f64,
{
    lattice_check(&g, interval, s, grid_n, Direction::Concave)
}

fn lattice_check(
    g: &dyn Fn(f64) -> f64,
    interval: &Interval,
    s: f64,
    grid_n: usize,
    dir: Direction,
) -> Result<ConvexityReport> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange {
            what: "s",
            value: s,
            expected: "(0, 1]",
        });
    }
    if grid_n < 3 {
        return Err(Error::OutOfRange {
            what: "grid_n",
            value: grid_n as f64,
            expected: ">= 3",
        });
    }
    let eval = |x: f64| {
        let v = g(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    };

    let last = (grid_n - 1) as f64;
    let nodes: Vec<f64> = (0..grid_n)
        .map(|i| {
            if i + 1 == grid_n {
                interval.b()
            } else {
                interval.a() + interval.width() * (i as f64 / last)
            }
        })
        .collect();
    let values = nodes.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
    let weights: Vec<(f64, f64, f64)> = (0..grid_n)
        .map(|k| {
            let lam = k as f64 / last;
            (lam, lam.powf(s), (1.0 - lam).powf(s))
        })
        .collect();

    let mut worst = 0.0_f64;
    let mut witness = None;
    let mut negative_sample = false;

    for (i, (&x, &gx)) in nodes.iter().zip(&values).enumerate() {
        if gx < 0.0 {
            negative_sample = true;
            let v = -gx / gx.abs().max(1.0);
            if v > worst {
                worst = v;
                witness = Some(Witness { x, y: x, lambda: 1.0 });
            }
        }
        for (j, (&y, &gy)) in nodes.iter().zip(&values).enumerate() {
            for &(lam, wx, wy) in &weights {
                // Reuse node values where the convex combination is a node.
                let lhs = if lam == 1.0 || i == j {
                    gx
                } else if lam == 0.0 {
                    gy
                } else {
                    eval(lam * x + (1.0 - lam) * y)?
                };
                let rhs = wx * gx + wy * gy;
                let gap = match dir {
                    Direction::Convex => lhs - rhs,
                    Direction::Concave => rhs - lhs,
                };
                let v = gap / rhs.abs().max(1.0);
                if v > worst {
                    worst = v;
                    witness = Some(Witness { x, y, lambda: lam });
                }
            }
        }
    }

    let failed = worst > LATTICE_TOLERANCE;
    Ok(ConvexityReport {
        verdict: if failed {
            CheckVerdict::Fail
        } else {
            CheckVerdict::Pass
        },
        s,
        worst_violation: worst,
        witness: if failed { witness } else { None },
        negative_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn exp_derivatives_at_zero_are_one() {
        let f = catalog_get("exp", &[]).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        for k in 1..=6 {
            assert_eq!(f.deriv(k, 0.0), 1.0);
        }
    }

    #[test]
    fn poly_square() {
        let f = catalog_get("poly", &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.deriv(1, 0.5), 1.0);
        for x in [-3.0, 0.0, 0.25, 7.0] {
            assert_eq!(f.deriv(2, x), 2.0);
            assert_eq!(f.deriv(3, x), 0.0);
        }
    }

    #[test]
    fn neg_log_at_one() {
        let f = catalog_get("neg_log", &[]).unwrap();
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.deriv(1, 1.0), -1.0);
        assert_eq!(f.deriv(2, 1.0), 1.0);
        assert_eq!(f.deriv(3, 1.0), -2.0);
    }

    #[test]
    fn one_minus_x_pow_n_closed_forms() {
        let f = catalog_get("one_minus_x_pow_n", &[3.0]).unwrap();
        // (1-x)^3 at x = 0.5: 1/8, -3/4, 3, -6, 0
        assert_eq!(f.eval(0.5), 0.125);
        assert_eq!(f.deriv(1, 0.5), -0.75);
        assert_eq!(f.deriv(2, 0.5), 3.0);
        assert_eq!(f.deriv(3, 0.5), -6.0);
        assert_eq!(f.deriv(4, 0.5), 0.0);
        let g = catalog_get("one_minus_x_pow_n", &[-2.0]).unwrap();
        assert_eq!(g.eval(0.5), 4.0);
        assert_eq!(g.deriv(1, 0.5), 16.0);
    }

    #[test]
    fn pow_s_domain_is_open_at_zero_unless_linear() {
        let f = catalog_get("pow_s", &[0.5]).unwrap();
        assert!(f.domain().lo_open);
        assert!(f.deriv(1, 0.0).is_infinite());
        assert!(f.supports(&unit(), 0));
        assert!(!f.supports(&unit(), 1));
        let lin = catalog_get("pow_s", &[1.0]).unwrap();
        assert!(!lin.domain().lo_open);
        assert_eq!(lin.deriv(1, 0.0), 1.0);
        assert_eq!(lin.deriv(2, 0.0), 0.0);
        assert!(lin.supports(&unit(), 4));
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(catalog_get("sin", &[]), Err(Error::UnknownFunction(_))));
        assert!(catalog_get("pow_s", &[1.5]).is_err());
        assert!(catalog_get("pow_s", &[0.0]).is_err());
        assert!(catalog_get("pow_s", &[]).is_err());
        assert!(catalog_get("one_minus_x_pow_n", &[1.0]).is_err());
        assert!(catalog_get("one_minus_x_pow_n", &[2.5]).is_err());
        assert!(catalog_get("poly", &[]).is_err());
        assert!(catalog_get("exp", &[1.0]).is_err());
    }

    #[test]
    fn fnspec_parse_and_display() {
        let spec: FnSpec = "poly:0,0,1".parse().unwrap();
        assert_eq!(spec.name, "poly");
        assert_eq!(spec.params, vec![0.0, 0.0, 1.0]);
        assert_eq!(spec.to_string(), "poly:0,0,1");
        let plain: FnSpec = "exp".parse().unwrap();
        assert!(plain.params.is_empty());
        assert!("poly:1,x".parse::<FnSpec>().is_err());
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn linear_is_convex_with_equality() {
        let r = check_s_convexity(|x| x, &unit(), 1.0, 9).unwrap();
        assert!(r.passed());
        assert!(r.worst_violation <= LATTICE_TOLERANCE);
        assert!(r.witness.is_none());
    }

    #[test]
    fn sqrt_is_half_convex() {
        let r = check_s_convexity(f64::sqrt, &unit(), 0.5, 17).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn negative_square_is_not_convex() {
        let g = |x: f64| -x * x;
        let r = check_s_convexity(g, &unit(), 1.0, 9).unwrap();
        assert!(!r.passed());
        assert!(r.witness.is_some());
        assert!(r.negative_sample);
        // The midpoint of the endpoints violates the inequality on its own.
        let (lhs, rhs) = (g(0.5), 0.5 * g(0.0) + 0.5 * g(1.0));
        assert_eq!((lhs, rhs), (-0.25, -0.5));
        assert!(lhs > rhs);
    }

    #[test]
    fn concavity_examples() {
        assert!(check_concavity(|x| 1.0 - x * x, &unit(), 1.0, 9).unwrap().passed());
        assert!(!check_concavity(|x| x * x, &unit(), 1.0, 9).unwrap().passed());
        assert!(check_concavity(f64::sqrt, &unit(), 1.0, 9).unwrap().passed());
    }

    #[test]
    fn checker_rejects_bad_arguments() {
        assert!(check_s_convexity(|x| x, &unit(), 0.0, 9).is_err());
        assert!(check_s_convexity(|x| x, &unit(), 1.1, 9).is_err());
        assert!(check_s_convexity(|x| x, &unit(), 1.0, 2).is_err());
        let r = check_s_convexity(|x: f64| 1.0 / x, &unit(), 1.0, 9);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn fail_iff_witness() {
        for s in [0.3, 0.7, 1.0] {
            for g in [|x: f64| x * x, |x: f64| (x - 0.5).abs(), |x: f64| 1.0 - x * x] {
                let r = check_s_convexity(g, &unit(), s, 9).unwrap();
                assert_eq!(!r.passed(), r.witness.is_some());
                assert_eq!(!r.passed(), r.worst_violation > LATTICE_TOLERANCE);
            }
        }
    }
}
