use proptest::prelude::*;

use coarsegeo::admissible::{compute_constants, RateSet};
use coarsegeo::coarse::{elements_diam, RateFunction};
use coarsegeo::combination::{
    classify_hyperbolic, cyclic_reduction, evaluate_hnn, formal_normal_form, lift_path, relative_geodesic_and_components,
    Classification, HnnFixture, HnnWord,
};
use coarsegeo::{Element, GroupModel, PathSeq};

fn lattice() -> GroupModel {
    GroupModel::z2_star_z2()
}

/// Elements of Z^2 * Z^2 as products of random letters.
fn element() -> impl Strategy<Value = Element> {
    prop::collection::vec(0usize..8, 0..14).prop_map(|letters| {
        let m = lattice();
        let word: Vec<_> = letters.into_iter().map(|i| m.letters()[i]).collect();
        m.normalize(&word)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tree_diameter_matches_pairwise_maximum(pts in prop::collection::vec(element(), 1..12)) {
        let brute = pts.iter().flat_map(|a| pts.iter().map(move |b| a.dist(b))).max().unwrap();
        prop_assert_eq!(elements_diam(&pts), brute);
    }

    #[test]
    fn metric_axioms(a in element(), b in element(), c in element()) {
        prop_assert_eq!(a.dist(&b), b.dist(&a));
        prop_assert!(a.dist(&c) <= a.dist(&b) + b.dist(&c));
        prop_assert_eq!(c.mul(&a).dist(&c.mul(&b)), a.dist(&b));
    }

    #[test]
    fn format_and_parse_round_trip(a in element()) {
        let m = lattice();
        prop_assert_eq!(m.parse(&m.format(&a)).unwrap(), a.clone());
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert_eq!(m.word(&a).len() as u64, a.len());
    }

    #[test]
    fn geodesic_paths_have_the_distance_as_length(a in element(), b in element()) {
        let p = PathSeq::geodesic(&lattice(), &a, &b);
        prop_assert_eq!(p.len() as u64, a.dist(&b));
        let vs = p.vertices();
        prop_assert_eq!(vs.first(), Some(&a));
        prop_assert_eq!(vs.last(), Some(&b));
    }

    #[test]
    fn cyclic_reduction_conjugates_back(w in element()) {
        let (g, r) = cyclic_reduction(&w);
        prop_assert_eq!(g.mul(&r).mul(&g.inverse()), w);
    }

    #[test]
    fn classification_is_conjugation_invariant(w in element(), g in element()) {
        let m = lattice();
        let kind = |c: Classification| match c {
            Classification::Trivial => (0, 0),
            Classification::Parabolic { factor, .. } => (1, factor),
            Classification::Hyperbolic { cyclic_syllables } => (2, cyclic_syllables),
        };
        let conj = g.mul(&w).mul(&g.inverse());
        prop_assert_eq!(kind(classify_hyperbolic(&m, &w)), kind(classify_hyperbolic(&m, &conj)));
    }

    #[test]
    fn lifts_of_relative_geodesics_are_geodesics(w in element()) {
        let m = lattice();
        let (rel, comps) = relative_geodesic_and_components(&m, &w);
        prop_assert!(comps.all_isolated);
        prop_assert_eq!(rel.edges.len(), w.syllable_count());
        let lift = lift_path(&m, &rel);
        prop_assert_eq!(lift.len() as u64, w.len());
        let vs = lift.vertices();
        prop_assert_eq!(vs.last(), Some(&w));
    }

    #[test]
    fn constants_are_monotone_in_c(c in 0i64..20, extra in 1i64..10, lambda in 1i64..4) {
        let r = RateSet::worked_example();
        let lo = compute_constants(&r, lambda, c).unwrap();
        let hi = compute_constants(&r, lambda, c + extra).unwrap();
        prop_assert!(hi.c_const > lo.c_const);
        prop_assert!(hi.big_lambda > lo.big_lambda);
        prop_assert!(hi.d >= lo.d);
        prop_assert_eq!(hi.r, lo.r);
    }

    #[test]
    fn constants_dominate_their_candidates(mu in 0i64..4, eps in 0i64..4, tau in 0i64..4, slope in 0i64..4, icpt in 0i64..6) {
        let rates = RateSet {
            mu: RateFunction::constant(mu),
            epsilon: RateFunction::constant(eps),
            tau: RateFunction::constant(tau),
            nu: RateFunction::Affine { slope, intercept: icpt },
            sigma: RateFunction::ThreeMaxPlus { mu, eps },
        };
        let b = compute_constants(&rates, 1, 0).unwrap();
        for k in &b.candidates {
            prop_assert_eq!(k.value, k.raw + k.strict as i64);
            if k.name.starts_with('R') && k.name.len() == 2 {
                prop_assert!(b.r >= k.value);
            }
            if k.name.starts_with('D') && k.name.len() == 2 {
                prop_assert!(b.d >= k.value);
            }
        }
        prop_assert_eq!(b.big_lambda, 6 * b.r + 1);
    }

    #[test]
    fn hnn_normal_forms_decide_equality(
        h1 in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2, 3, -3]), 0..3), 1..3),
        e1 in prop::collection::vec(prop::sample::select(vec![1i8, -1]), 1..3),
        h2 in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2, 3, -3]), 0..3), 1..3),
        e2 in prop::collection::vec(prop::sample::select(vec![1i8, -1]), 1..3),
    ) {
        let n = h1.len().min(e1.len());
        let w1 = HnnWord { h: h1[..n].to_vec(), eps: e1[..n].to_vec() };
        let n = h2.len().min(e2.len());
        let w2 = HnnWord { h: h2[..n].to_vec(), eps: e2[..n].to_vec() };
        let fx = HnnFixture::standard(5340);
        let (Ok(v1), Ok(v2)) = (evaluate_hnn(&fx, &w1), evaluate_hnn(&fx, &w2)) else { return Ok(()) };
        let same_form = formal_normal_form(&fx, &w1) == formal_normal_form(&fx, &w2);
        if coarsegeo::combination::britton_pinch(&fx, &w1).is_none() && coarsegeo::combination::britton_pinch(&fx, &w2).is_none() {
            prop_assert_eq!(same_form, v1 == v2, "{} vs {}", w1.format(), w2.format());
        }
    }
}
