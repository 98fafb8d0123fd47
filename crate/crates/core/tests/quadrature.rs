use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sconvex::quadrature::{
    error_bound, log_log_slope, oracle_integral, reference_integral, trapezoid_error_bound, uniform_partition,
    convergence_study,
};
use sconvex::special::beta;
use sconvex::{catalog_get, DifferentiableFunction, Interval, Partition, Rule};

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

fn random_partition(rng: &mut ChaCha8Rng, a: f64, b: f64) -> Partition {
    let cuts = rng.gen_range(1..12);
    let mut nodes: Vec<f64> = (0..cuts).map(|_| rng.gen_range(a..b)).collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    nodes.dedup();
    Partition::new(nodes).unwrap()
}

fn pool() -> Vec<(DifferentiableFunction, f64, f64)> {
    vec![
        (catalog_get("exp", &[]).unwrap(), -1.0, 2.0),
        (catalog_get("poly", &[0.0, 0.0, 1.0]).unwrap(), -1.0, 1.0),
        (catalog_get("poly", &[1.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), 0.0, 1.5),
        (catalog_get("reciprocal", &[]).unwrap(), 0.5, 3.0),
        (catalog_get("neg_log", &[]).unwrap(), 0.2, 2.0),
    ]
}

#[test]
fn certificates_dominate_on_random_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (g, a, b) in pool() {
        for _ in 0..50 {
            let k = random_partition(&mut rng, a, b);
            let s = rng.gen_range(0.1..=1.0);
            let q = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4)];
            for rule in [Rule::Midpoint, Rule::Trapezoid] {
                let r = error_bound(&g, rule, &k, s, q).unwrap();
                if r.hypothesis.holds {
                    assert!(r.dominated(1e-9), "{} {rule:?} {:?}: {} > {}", g.name(), k.nodes(), r.oracle_error, r.error_bound);
                }
            }
        }
    }
}

#[test]
fn affine_functions_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let g = catalog_get("poly", &[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).unwrap();
        let k = random_partition(&mut rng, -2.0, 2.0);
        for rule in [Rule::Midpoint, Rule::Trapezoid] {
            let r = error_bound(&g, rule, &k, 1.0, 1.0).unwrap();
            assert!(r.oracle_error <= 1e-13, "{rule:?}: {}", r.oracle_error);
        }
        let t = trapezoid_error_bound(&g, &k, 1.0, 2.0).unwrap();
        assert_eq!(t.error_bound, 0.0);
    }
}

#[test]
fn weak_form_never_below_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let pool = pool();
    for i in 0..100 {
        let (g, a, b) = &pool[i % pool.len()];
        let k = random_partition(&mut rng, *a, *b);
        let q = rng.gen_range(1.0..4.0);
        let r = trapezoid_error_bound(g, &k, rng.gen_range(0.1..=1.0), q).unwrap();
        assert!(r.weak_bound.unwrap() >= r.error_bound * (1.0 - 1e-14));
    }
}

#[test]
fn uniform_refinement_shrinks_certificates() {
    let g = catalog_get("exp", &[]).unwrap();
    let i = iv(0.0, 1.0);
    for rule in [Rule::Midpoint, Rule::Trapezoid] {
        let mut prev = f64::INFINITY;
        for pieces in [1, 2, 4, 8, 16, 32] {
            let r = error_bound(&g, rule, &uniform_partition(&i, pieces).unwrap(), 1.0, 1.0).unwrap();
            assert!(r.error_bound < prev);
            prev = r.error_bound;
        }
    }
}

#[test]
fn study_slopes() {
    let g = catalog_get("exp", &[]).unwrap();
    let pieces = [2, 4, 8, 16, 32, 64];
    let xs: Vec<f64> = pieces.iter().map(|&n| n as f64).collect();
    let rows = convergence_study(&g, &iv(0.0, 1.0), Rule::Midpoint, 1.0, 1.0, &pieces).unwrap();
    let err: Vec<f64> = rows.iter().map(|r| r.oracle_error).collect();
    let sound: Vec<f64> = rows.iter().map(|r| r.bound).collect();
    let printed: Vec<f64> = rows.iter().map(|r| r.printed_bound).collect();
    assert!((log_log_slope(&xs, &err) + 2.0).abs() < 0.05);
    assert!((log_log_slope(&xs, &sound) + 1.0).abs() < 0.05);
    assert!((log_log_slope(&xs, &printed) + 2.0).abs() < 0.05);
    let rows = convergence_study(&g, &iv(0.0, 1.0), Rule::Trapezoid, 1.0, 1.0, &pieces).unwrap();
    let sound: Vec<f64> = rows.iter().map(|r| r.bound).collect();
    assert!((log_log_slope(&xs, &sound) + 2.0).abs() < 0.05);
}

#[test]
fn reference_integral_is_self_consistent() {
    let g = catalog_get("exp", &[]).unwrap();
    let i = iv(-1.0, 3.0);
    let exact = 3f64.exp() - (-1f64).exp();
    let mut prev = None;
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let v = reference_integral(|x| g.eval(x), &i, tol).unwrap();
        assert!((v - exact).abs() <= tol * exact.max(1.0));
        if let Some(p) = prev {
            let p: f64 = p;
            assert!((v - p).abs() <= 2.0 * tol * exact.max(1.0) + 1e-6);
        }
        prev = Some(v);
    }
}

#[test]
fn oracle_handles_singular_endpoint() {
    // ∫_0^1 sqrt(x)(1-x)^2 dx = β(1.5, 3).
    let expected = beta(1.5, 3.0).unwrap();
    let v = reference_integral(|x: f64| x.sqrt() * (1.0 - x).powi(2), &iv(0.0, 1.0), 1e-12).unwrap();
    assert!((v - expected).abs() <= 1e-11);
    let root = catalog_get("sqrt", &[]).unwrap();
    assert!((oracle_integral(&root, &iv(0.0, 1.0)).unwrap() - 2.0 / 3.0).abs() <= 1e-12);
    let inv_root = catalog_get("pow_s", &[0.5]).unwrap();
    assert!((oracle_integral(&inv_root, &iv(0.0, 4.0)).unwrap() - 16.0 / 3.0).abs() <= 1e-11);
}

#[test]
fn square_on_unit_interval() {
    let sq = catalog_get("poly", &[0.0, 0.0, 1.0]).unwrap();
    let k = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
    let m = error_bound(&sq, Rule::Midpoint, &k, 1.0, 1.0).unwrap();
    assert!((m.value - 0.3125).abs() <= 1e-15);
    assert!((m.oracle_error - 1.0 / 48.0).abs() <= 1e-14);
    let t = error_bound(&sq, Rule::Trapezoid, &k, 1.0, 1.0).unwrap();
    assert!((t.value - 0.375).abs() <= 1e-15);
    assert!((t.oracle_error - 1.0 / 24.0).abs() <= 1e-14);
    assert!(t.dominated(1e-12));
}

#[test]
fn bad_partitions_rejected() {
    assert!(Partition::new(vec![0.0]).is_err());
    assert!(Partition::new(vec![0.0, 0.0, 1.0]).is_err());
    assert!(Partition::new(vec![1.0, 0.0]).is_err());
    assert!(uniform_partition(&iv(0.0, 1.0), 0).is_err());
}
