//! Measured quantities compared against independent computations and
//! frozen values.

use coarsegeo::admissible::{compute_constants, measure_factor_system, RateSet};
use coarsegeo::coarse::RateFunction;
use coarsegeo::combination::{
    check_hnn_fixture, estimate_hnn_kappas, hnn_threshold, min_double_coset_rep, AmalgamFixture, HnnFixture,
};
use coarsegeo::{GroupModel, MetricGraph, SubgroupSpec};

/// Power series coefficients of `1 / f` for `f` with `f[0] = 1`.
fn series_inverse(f: &[i64], n: usize) -> Vec<i64> {
    let mut g = vec![0i64; n];
    g[0] = 1;
    for k in 1..n {
        g[k] = -(1..=k).map(|j| f.get(j).copied().unwrap_or(0) * g[k - j]).sum::<i64>();
    }
    g
}

/// Sphere sizes of a free product from the factor growth series, through
/// `1/f = sum 1/f_i - (k - 1)`.
fn free_product_spheres(factors: &[Vec<i64>], n: usize) -> Vec<i64> {
    let mut inv = vec![0i64; n];
    for f in factors {
        for (a, b) in inv.iter_mut().zip(series_inverse(f, n)) {
            *a += b;
        }
    }
    inv[0] -= factors.len() as i64 - 1;
    series_inverse(&inv, n)
}

/// Sphere sizes of Z^2 with the standard generators: 1, 4, 8, 12, ...
fn z2_spheres(n: usize) -> Vec<i64> {
    (0..n as i64).map(|k| if k == 0 { 1 } else { 4 * k }).collect()
}

fn sphere_sizes(g: &MetricGraph) -> Vec<i64> {
    let mut s = vec![0i64; g.radius() as usize + 1];
    for e in g.elements() {
        s[e.len() as usize] += 1;
    }
    s
}

#[test]
fn lattice_free_product_spheres_match_growth_series() {
    let m = GroupModel::z2_star_z2();
    let g = MetricGraph::ball(&m, 6, 1 << 22).unwrap();
    let want = free_product_spheres(&[z2_spheres(7), z2_spheres(7)], 7);
    assert_eq!(sphere_sizes(&g), want);
    assert_eq!(want, vec![1, 8, 48, 280, 1632, 9512, 55440]);
}

#[test]
fn free_group_spheres_match_growth_series() {
    let z = |n: usize| (0..n).map(|k| if k == 0 { 1 } else { 2 }).collect::<Vec<i64>>();
    let g = MetricGraph::ball(&GroupModel::f2(), 7, 1 << 22).unwrap();
    assert_eq!(sphere_sizes(&g), free_product_spheres(&[z(8), z(8)], 8));
    let g3 = MetricGraph::ball(&GroupModel::free(3), 4, 1 << 22).unwrap();
    assert_eq!(sphere_sizes(&g3), vec![1, 6, 30, 150, 750]);
}

/// Independent evaluation of the constants for constant `mu, eps, tau` and
/// the given `nu`, `sigma` as closures. Strict candidates get `+1`.
fn constants_by_hand(
    mu: i64,
    eps: i64,
    tau: i64,
    nu: impl Fn(i64) -> i64,
    sigma: impl Fn(i64) -> i64,
    lambda: i64,
    c: i64,
) -> [i64; 6] {
    let a = mu + tau + eps;
    let cc = lambda * (mu + eps + a) + c;
    let b = 2 * eps + 2 * mu + nu(mu + sigma(0)) + a;
    let r = [a + 2 * eps + 4 * mu + 1, b + 3 * eps + 4 * mu + 1, mu + 5 * eps + b + 1].into_iter().max().unwrap() + 1;
    let big = lambda * (6 * r + 1) + 3 * c;
    let d = [
        mu + eps + a + cc,
        2 * a + 3 * eps + 6 * mu,
        big * (b + eps + mu),
        big * (r + sigma(mu)),
        13 * eps + 6 * mu + 2 * b,
    ]
    .into_iter()
    .max()
    .unwrap()
        + 1;
    [a, b, cc, r, big, d]
}

fn bundle_array(r: &RateSet, lambda: i64, c: i64) -> [i64; 6] {
    let b = compute_constants(r, lambda, c).unwrap();
    [b.a, b.b, b.c_const, b.r, b.big_lambda, b.d]
}

#[test]
fn worked_table_constants() {
    let got = bundle_array(&RateSet::worked_example(), 1, 0);
    assert_eq!(got, [4, 20, 6, 29, 175, 5776]);
    let hand = constants_by_hand(1, 1, 2, |u| 2 * u + 2, |u| 3 * u.max(1) + 1, 1, 0);
    assert_eq!(got, hand);
    for (l, c) in [(1, 3), (2, 1), (3, 7)] {
        let hand = constants_by_hand(1, 1, 2, |u| 2 * u + 2, |u| 3 * u.max(1) + 1, l, c);
        assert_eq!(bundle_array(&RateSet::worked_example(), l, c), hand, "({l}, {c})");
    }
}

#[test]
fn free_group_measured_rates_and_constants() {
    let sys = measure_factor_system(&GroupModel::f2(), 6, 1).unwrap();
    assert!(sys.stabilized);
    let r = &sys.rates;
    assert_eq!(r.mu, RateFunction::constant(1));
    assert_eq!(r.epsilon, RateFunction::constant(1));
    assert_eq!(r.tau, RateFunction::constant(1));
    for u in 0..6 {
        assert_eq!(r.nu.at_u(u).unwrap(), 2 * u + 1);
    }
    assert_eq!(bundle_array(r, 1, 0), [3, 18, 5, 27, 163, 5054]);
    assert_eq!(bundle_array(r, 1, 3), [3, 18, 8, 27, 172, 5333]);
    let hand = constants_by_hand(1, 1, 1, |u| 2 * u + 1, |u| 3 * u.max(1) + 1, 1, 0);
    assert_eq!(bundle_array(r, 1, 0), hand);
}

#[test]
fn lattice_measured_rates_match_the_free_group() {
    let f2 = measure_factor_system(&GroupModel::f2(), 6, 1).unwrap();
    let z = measure_factor_system(&GroupModel::z2_star_z2(), 4, 1).unwrap();
    assert!(z.stabilized);
    assert_eq!(bundle_array(&z.rates, 1, 0), bundle_array(&f2.rates, 1, 0));
}

#[test]
fn hnn_constants_are_frozen() {
    let fx = HnnFixture::standard(1);
    let k = estimate_hnn_kappas(&fx, 5, 1, 4).unwrap();
    assert_eq!((k.m, k.kappa1(), k.kappa2()), (1, 2, 1));
    let sys = measure_factor_system(&GroupModel::z2_star_z2(), 4, 1).unwrap();
    let bundle = compute_constants(&sys.rates, 1, 3).unwrap();
    assert_eq!(hnn_threshold(&bundle, &k), 5339);
    let check = check_hnn_fixture(&HnnFixture::standard(5340), 4);
    assert!(check.holds(), "{check:?}");
}

#[test]
fn amalgam_fixture_representatives_are_minimal() {
    let f = AmalgamFixture::free(7);
    assert_eq!(f.model.format(&f.dot_h.generators[0]), "a^7");
    let m = GroupModel::z2_star_z2();
    let c = SubgroupSpec::new(vec![m.parse("a1").unwrap()], 6);
    let r = min_double_coset_rep(&m, &m.parse("a1^3 a2 a1^-2").unwrap(), &c).unwrap();
    assert_eq!(m.format(&r.rep), "a2");
}
