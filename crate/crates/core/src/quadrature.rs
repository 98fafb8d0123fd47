//! Composite midpoint / trapezoid rules, their a-priori error certificates,
//! and the adaptive reference integrator used as the oracle everywhere else.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnmodel::{check_s_convexity, DifferentiableFunction, Interval};
use crate::hhbounds::{Conjugate, Hypothesis, HYPOTHESIS_GRID};

/// Bisection depth cap of the reference integrator.
pub const MAX_DEPTH: usize = 60;

/// Tolerance used when the integrator serves as an oracle.
pub const ORACLE_TOL: f64 = 1e-12;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Kronrod 15-point estimate on `[a, b]`. Never touches the endpoints.
fn kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).enumerate() {
        let pts: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in pts {
            let t = c + sgn * h * x;
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::NonFinite { x: t });
            }
            sum += w * v;
        }
    }
    Ok(sum * h)
}

/// Recursive bisection: a segment is accepted once the Kronrod value on the
/// whole segment agrees with the sum over its halves.
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = kronrod15(f, a, m)?;
    let right = kronrod15(f, m, b)?;
    let halves = left + right;
    let diff = (halves - whole).abs();
    let roundoff = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if diff <= tol || diff <= roundoff {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH || m <= a || m >= b {
        return Err(Error::NonConvergence { a, b });
    }
    Ok(adapt(f, a, m, left, 0.5 * tol, depth + 1)? + adapt(f, m, b, right, 0.5 * tol, depth + 1)?)
}

fn smooth_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = kronrod15(f, a, b)?;
    let tol = tol * whole.abs().max(1.0);
    adapt(f, a, b, whole, tol, 0)
}

/// Integral over the segment between `end` and `other`, taken left to right,
/// of an integrand that may blow up at `end`: geometric pieces shrinking
/// toward `end`, with the tail summed as a geometric series once the piece
/// ratio settles.
fn singular_end_integral(f: &dyn Fn(f64) -> f64, end: f64, other: f64, tol: f64) -> Result<f64> {
    let w = other - end;
    let piece_tol = tol / 128.0;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    for k in 0..MAX_DEPTH {
        let near = end + w * 0.5f64.powi(k as i32 + 1);
        let far = end + w * 0.5f64.powi(k as i32);
        let (lo, hi) = if near < far { (near, far) } else { (far, near) };
        let piece = smooth_integral(f, lo, hi, piece_tol)?;
        total += piece;
        if let Some(p) = prev {
            if p != 0.0 {
                let ratio = piece / p;
                if ratio > 0.0 && ratio < 1.0 {
                    let tail = piece * ratio / (1.0 - ratio);
                    // The tail estimate is off by about `tail` times the
                    // drift of the ratio between consecutive pieces.
                    let drift = prev_ratio.map_or(1.0, |r: f64| (r - ratio).abs() / ratio);
                    if tail.abs() * drift.min(1.0) <= 0.1 * tol {
                        return Ok(total + tail);
                    }
                }
                prev_ratio = Some(ratio);
            } else if piece == 0.0 {
                return Ok(total);
            }
        }
        prev = Some(piece);
    }
    Err(Error::NonConvergence {
        a: end.min(other),
        b: end.max(other),
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-13..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "tol",
            value: tol,
            expected: "[1e-13, 1e-6]",
        })
    }
}

/// Adaptive reference integral of a smooth integrand, error at most
/// `tol · max(1, |result|)`.
pub fn reference_integral<F>(f: F, interval: &Interval, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    reference_integral_singular(f, interval, tol, false, false)
}

/// As [`reference_integral`], with integrable singularities allowed at the
/// flagged endpoints.
pub fn reference_integral_singular<F>(
    f: F,
    interval: &Interval,
    tol: f64,
    singular_lo: bool,
    singular_hi: bool,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_tol(tol)?;
    let f: &dyn Fn(f64) -> f64 = &f;
    let (a, b) = (interval.a(), interval.b());
    match (singular_lo, singular_hi) {
        (false, false) => smooth_integral(f, a, b, tol),
        (true, false) => singular_end_integral(f, a, b, tol),
        (false, true) => singular_end_integral(f, b, a, tol),
        (true, true) => {
            let m = interval.midpoint();
            Ok(singular_end_integral(f, a, m, 0.5 * tol)? + singular_end_integral(f, b, m, 0.5 * tol)?)
        }
    }
}

/// Integral of `weight(x) · f^(k)(x)` over `interval`, flagging endpoints
/// that touch an open end of the function's domain.
pub fn integrate_derivative<W>(
    f: &DifferentiableFunction,
    k: usize,
    weight: W,
    interval: &Interval,
    tol: f64,
) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    let d = f.domain();
    let lo = d.lo_open && interval.a() == d.lo;
    let hi = d.hi_open && interval.b() == d.hi;
    reference_integral_singular(|x| weight(x) * f.deriv(k, x), interval, tol, lo, hi)
}

/// Oracle value of `∫_a^b f`.
pub fn oracle_integral(f: &DifferentiableFunction, interval: &Interval) -> Result<f64> {
    integrate_derivative(f, 0, |_| 1.0, interval, ORACLE_TOL)
}

/// Left-to-right pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Strictly increasing nodes `a = x_0 < ... < x_n = b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    nodes: Vec<f64>,
}

impl Partition {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidPartition("need at least 2 nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPartition("nodes must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.nodes[0], self.nodes[self.nodes.len() - 1])
            .expect("partition endpoints are ordered")
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn pieces(&self) -> usize {
        self.nodes.len() - 1
    }
}

pub fn uniform_partition(interval: &Interval, pieces: usize) -> Result<Partition> {
    if pieces == 0 {
        return Err(Error::InvalidPartition("pieces must be >= 1".into()));
    }
    let h = interval.width() / pieces as f64;
    let nodes = (0..=pieces)
        .map(|i| {
            if i == pieces {
                interval.b()
            } else {
                interval.a() + h * i as f64
            }
        })
        .collect();
    Partition::new(nodes)
}

pub fn composite_midpoint<F: Fn(f64) -> f64>(f: F, k: &Partition) -> f64 {
    let terms: Vec<f64> = k.cells().map(|(l, r)| f(0.5 * (l + r)) * (r - l)).collect();
    pairwise_sum(&terms)
}

pub fn composite_trapezoid<F: Fn(f64) -> f64>(f: F, k: &Partition) -> f64 {
    let terms: Vec<f64> = k
        .cells()
        .map(|(l, r)| 0.5 * (f(l) + f(r)) * (r - l))
        .collect();
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Midpoint,
    Trapezoid,
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "midpoint" => Ok(Rule::Midpoint),
            "trapezoid" => Ok(Rule::Trapezoid),
            other => Err(format!("unknown rule `{other}`")),
        }
    }
}

/// Composite rule value with its a-priori certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub rule: Rule,
    pub value: f64,
    /// Certified bound on `|R(f, K)|`.
    pub error_bound: f64,
    /// Bound exactly as the closed form is usually quoted (see notes).
    pub printed_bound: f64,
    /// Weaker absolute-sum form, where one exists.
    pub weak_bound: Option<f64>,
    pub oracle_error: f64,
    pub hypothesis: Hypothesis,
    pub notes: Vec<String>,
}

impl QuadratureResult {
    /// Oracle error dominated by the certificate, with relative slack.
    pub fn dominated(&self, slack: f64) -> bool {
        self.oracle_error <= self.error_bound + slack * (1.0 + self.error_bound)
    }
}

/// Midpoint rule with the first-derivative certificate
/// `(p+1)^{-1/p} (s+1)^{-1/q} Σ h_m^2/2 (|f'(x_m)| + |f'(x_{m+1})|)`.
///
/// The per-cell mean-value gap is linear in the cell width, so each cell
/// contributes `h^2`, not `h^3`. The cubic form is kept as `printed_bound`.
pub fn midpoint_error_bound(
    f: &DifferentiableFunction,
    k: &Partition,
    s: f64,
    q: f64,
) -> Result<QuadratureResult> {
    let interval = k.interval();
    f.require(&interval, 1)?;
    let conj = Conjugate::new(q)?;
    let hyp = quad_hypothesis(f, 1, &interval, s, conj)?;
    let c = (conj.inv_p_root(1.0 + conj.p())) * (1.0 / (s + 1.0)).powf(conj.inv_q());

    let mut quad = Vec::with_capacity(k.pieces());
    let mut cubic = Vec::with_capacity(k.pieces());
    for (l, r) in k.cells() {
        let h = r - l;
        let d = f.deriv(1, l).abs() + f.deriv(1, r).abs();
        quad.push(0.5 * h * h * d);
        cubic.push(0.5 * h * h * h * d);
    }
    let value = composite_midpoint(|x| f.eval(x), k);
    let exact = oracle_integral(f, &interval)?;
    Ok(QuadratureResult {
        rule: Rule::Midpoint,
        value,
        error_bound: c * pairwise_sum(&quad),
        printed_bound: c * pairwise_sum(&cubic),
        weak_bound: None,
        oracle_error: (exact - value).abs(),
        hypothesis: hyp,
        notes: vec![
            "error_bound uses h^2 per cell; printed_bound is the h^3 form".into(),
        ],
    })
}

/// Trapezoid rule with the second-derivative certificate
/// `6^{-1/p} ((s+2)(s+3))^{-1/q} Σ h_m^3/2 (|f''(x_m)|^q + |f''(x_{m+1})|^q)^{1/q}`
/// and its absolute-sum weakening.
pub fn trapezoid_error_bound(
    f: &DifferentiableFunction,
    k: &Partition,
    s: f64,
    q: f64,
) -> Result<QuadratureResult> {
    let interval = k.interval();
    f.require(&interval, 2)?;
    let conj = Conjugate::new(q)?;
    let hyp = quad_hypothesis(f, 2, &interval, s, conj)?;
    let c = conj.inv_p_root(6.0) * (1.0 / ((s + 2.0) * (s + 3.0))).powf(conj.inv_q());

    let mut tight = Vec::with_capacity(k.pieces());
    let mut weak = Vec::with_capacity(k.pieces());
    for (l, r) in k.cells() {
        let h3 = 0.5 * (r - l).powi(3);
        let (fl, fr) = (f.deriv(2, l).abs(), f.deriv(2, r).abs());
        tight.push(h3 * conj.q_norm(fl, fr));
        weak.push(h3 * (fl + fr));
    }
    let value = composite_trapezoid(|x| f.eval(x), k);
    let exact = oracle_integral(f, &interval)?;
    let bound = c * pairwise_sum(&tight);
    Ok(QuadratureResult {
        rule: Rule::Trapezoid,
        value,
        error_bound: bound,
        printed_bound: bound,
        weak_bound: Some(c * pairwise_sum(&weak)),
        oracle_error: (exact - value).abs(),
        hypothesis: hyp,
        notes: Vec::new(),
    })
}

fn quad_hypothesis(
    f: &DifferentiableFunction,
    order: usize,
    interval: &Interval,
    s: f64,
    conj: Conjugate,
) -> Result<Hypothesis> {
    let q = conj.q();
    let report = check_s_convexity(|x| f.deriv(order, x).abs().powf(q), interval, s, HYPOTHESIS_GRID)?;
    Ok(Hypothesis::from_report(
        format!("|f^({order})|^{q} is {s}-convex"),
        &report,
    ))
}

pub fn error_bound(
    f: &DifferentiableFunction,
    rule: Rule,
    k: &Partition,
    s: f64,
    q: f64,
) -> Result<QuadratureResult> {
    match rule {
        Rule::Midpoint => midpoint_error_bound(f, k, s, q),
        Rule::Trapezoid => trapezoid_error_bound(f, k, s, q),
    }
}

/// One row of a uniform-refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub pieces: usize,
    pub value: f64,
    pub bound: f64,
    pub printed_bound: f64,
    pub oracle_error: f64,
}

pub fn convergence_study(
    f: &DifferentiableFunction,
    interval: &Interval,
    rule: Rule,
    s: f64,
    q: f64,
    pieces_list: &[usize],
) -> Result<Vec<StudyRow>> {
    pieces_list
        .iter()
        .map(|&n| {
            let k = uniform_partition(interval, n)?;
            let r = error_bound(f, rule, &k, s, q)?;
            Ok(StudyRow {
                pieces: n,
                value: r.value,
                bound: r.error_bound,
                printed_bound: r.printed_bound,
                oracle_error: r.oracle_error,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::catalog_get;
    use std::f64::consts::E;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn square() -> DifferentiableFunction {
        catalog_get("poly", &[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn uniform_partitions() {
        assert_eq!(uniform_partition(&unit(), 2).unwrap().nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(uniform_partition(&unit(), 1).unwrap().nodes(), &[0.0, 1.0]);
        let i = Interval::new(2.0, 8.0).unwrap();
        assert_eq!(uniform_partition(&i, 3).unwrap().nodes(), &[2.0, 4.0, 6.0, 8.0]);
        assert!(uniform_partition(&unit(), 0).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0.0]).is_err());
        assert!(Partition::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(Partition::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn composite_rules_on_square() {
        let k = uniform_partition(&unit(), 2).unwrap();
        assert_eq!(composite_midpoint(|x| x * x, &k), 0.3125);
        assert_eq!(composite_trapezoid(|x| x * x, &k), 0.375);
    }

    #[test]
    fn composite_rules_exact_on_affine() {
        let k = Partition::new(vec![-1.0, -0.3, 0.2, 1.7, 4.0]).unwrap();
        for rule in [composite_midpoint::<fn(f64) -> f64>, composite_trapezoid] {
            assert!((rule(|_| 3.0, &k) - 15.0).abs() < 1e-13);
            // ∫_{-1}^{4} (2x + 1) = 20
            assert!((rule(|x| 2.0 * x + 1.0, &k) - 20.0).abs() < 1e-13);
        }
    }

    #[test]
    fn reference_integral_closed_forms() {
        let v = reference_integral(f64::exp, &unit(), 1e-11).unwrap();
        assert!((v - (E - 1.0)).abs() < 1e-11);
        let v = reference_integral(|x| x * x, &unit(), 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn reference_integral_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let v = reference_integral_singular(|x: f64| x.powf(-0.5), &unit(), 1e-12, true, false).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // ∫_0^1 (1-x)^{-1/2} = 2
        let v = reference_integral_singular(|x: f64| (1.0 - x).powf(-0.5), &unit(), 1e-12, false, true).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // β(1/2, 1/2) = π
        let v = reference_integral_singular(
            |x: f64| (x * (1.0 - x)).powf(-0.5),
            &unit(),
            1e-12,
            true,
            true,
        )
        .unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn reference_integral_rejects_bad_tol() {
        assert!(reference_integral(f64::exp, &unit(), 1e-3).is_err());
        assert!(reference_integral(f64::exp, &unit(), 1e-15).is_err());
    }

    #[test]
    fn sqrt_oracle_touching_zero() {
        let f = catalog_get("sqrt", &[]).unwrap();
        let v = oracle_integral(&f, &unit()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn pairwise_sum_basic() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }

    #[test]
    fn midpoint_certificate_on_square() {
        let k = uniform_partition(&unit(), 2).unwrap();
        let r = midpoint_error_bound(&square(), &k, 1.0, 2.0).unwrap();
        assert_eq!(r.value, 0.3125);
        assert!((r.printed_bound - 0.25 / 6f64.sqrt()).abs() < 1e-15);
        assert!((r.error_bound - 0.5 / 6f64.sqrt()).abs() < 1e-15);
        assert!((r.oracle_error - 1.0 / 48.0).abs() < 1e-13);
        assert!(r.dominated(1e-9));
        assert!(r.hypothesis.holds);
    }

    #[test]
    fn trapezoid_certificate_on_square_is_tight() {
        let k = uniform_partition(&unit(), 2).unwrap();
        let r = trapezoid_error_bound(&square(), &k, 1.0, 2.0).unwrap();
        assert_eq!(r.value, 0.375);
        assert!((r.error_bound - 1.0 / 24.0).abs() < 1e-15);
        assert!((r.oracle_error - 1.0 / 24.0).abs() < 1e-13);
        assert!(r.dominated(1e-9));
        assert!(r.weak_bound.unwrap() >= r.error_bound);
    }

    #[test]
    fn affine_functions_have_zero_error() {
        let f = catalog_get("poly", &[1.0, -2.0]).unwrap();
        let k = Partition::new(vec![0.0, 0.1, 0.7, 1.0]).unwrap();
        for rule in [Rule::Midpoint, Rule::Trapezoid] {
            let r = error_bound(&f, rule, &k, 1.0, 2.0).unwrap();
            assert!(r.oracle_error < 1e-13);
        }
    }

    #[test]
    fn certificates_require_derivatives_on_interval() {
        let f = catalog_get("sqrt", &[]).unwrap();
        let k = uniform_partition(&unit(), 4).unwrap();
        assert!(matches!(
            midpoint_error_bound(&f, &k, 1.0, 1.0),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn printed_midpoint_bound_quarters_on_refinement() {
        let f = catalog_get("exp", &[]).unwrap();
        for n in [1, 2, 4, 8, 16] {
            let b1 = midpoint_error_bound(&f, &uniform_partition(&unit(), n).unwrap(), 1.0, 1.0).unwrap();
            let b2 = midpoint_error_bound(&f, &uniform_partition(&unit(), 2 * n).unwrap(), 1.0, 1.0).unwrap();
            assert!(b2.printed_bound <= b1.printed_bound / 4.0 + 1e-12);
            assert!(b2.error_bound <= b1.error_bound / 2.0 + 1e-12);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.0)).collect();
        assert!((log_log_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }
}
