use lozenge_core::enumerate::{count_tilings, tgf, tgf_fast};
use lozenge_core::exactalg::{rat, LaurentPoly, Monomial, RationalFunction};
use lozenge_core::qformulas::{pp_q, ratio_q, ratio_s, Quartered, TwoSided};
use lozenge_core::regions::{build_q, build_s, reflect, tileable_q, tileable_s};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-3i64..=3, -3i64..=3, 0i64..=2, 0i64..=2), 0..5).prop_map(|terms| {
        terms.into_iter().map(|(c, k, xe, ye)| LaurentPoly::term(rat(c, 1), Monomial::new(2 * k, xe, ye))).sum()
    })
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=7, 1i64..=5, any::<bool>()).prop_map(|(n, d, neg)| rat(if neg { -n } else { n }, d))
}

/// Two-sided specs on `1..=max_rows` rows: `m` left dents and `rows - m` right dents, rows may repeat across sides.
fn two_sided(max_rows: i64) -> impl Strategy<Value = TwoSided> {
    (1..=max_rows as usize).prop_flat_map(|rows| {
        (0..=rows).prop_flat_map(move |m| {
            let all: Vec<i64> = (1..=rows as i64).collect();
            (prop::sample::subsequence(all.clone(), m), prop::sample::subsequence(all, rows - m))
                .prop_map(|(a, b)| TwoSided::new(a, b).unwrap())
        })
    })
}

fn quartered(max_m: usize) -> impl Strategy<Value = Quartered> {
    (1..=max_m).prop_flat_map(|m| {
        prop::sample::subsequence((1..=2 * m as i64).collect::<Vec<_>>(), m).prop_map(|a| Quartered::new(a).unwrap())
    })
}

/// Value at `q = X = Y = 1` of a rational function whose numerator and denominator
/// may both vanish there: cancel factors of `q^(1/2) - 1` first.
fn value_at_one(f: &RationalFunction) -> BigRational {
    let root = &LaurentPoly::monomial(Monomial::new(1, 0, 0)) - &LaurentPoly::one();
    let (mut num, mut den) = (f.num.drop_xy(), f.den.drop_xy());
    while den.coefficient_sum() == rat(0, 1) {
        num = num.div_exact(&root).expect("numerator vanishes to at least the same order");
        den = den.div_exact(&root).expect("exact");
    }
    num.coefficient_sum() / den.coefficient_sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), q in nonzero_rational(), x in nonzero_rational(), y in nonzero_rational()) {
        let ev = |p: &LaurentPoly| p.eval(&q, &x, &y).unwrap();
        prop_assert_eq!(ev(&(&a * &b)), ev(&a) * ev(&b));
        prop_assert_eq!(ev(&(&a + &b)), ev(&a) + ev(&b));
    }

    #[test]
    fn display_parse_round_trip(a in poly()) {
        let back: LaurentPoly = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn exact_division_inverts_multiplication(a in poly(), b in poly()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
    }

    #[test]
    fn two_sided_ratio_is_transitive(spec in two_sided(4), x in 0i64..4, y in 0i64..4, z in 0i64..4) {
        let xy = ratio_s(x, y, &spec);
        let yz = ratio_s(y, z, &spec);
        prop_assert_eq!(&xy * &yz, ratio_s(x, z, &spec));
        prop_assert!(ratio_s(x, x, &spec) == RationalFunction::one());
    }

    #[test]
    fn quartered_ratio_is_transitive(spec in quartered(3), x in 0i64..4, y in 0i64..4, z in 0i64..4) {
        prop_assert_eq!(&ratio_q(x, y, &spec) * &ratio_q(y, z, &spec), ratio_q(x, z, &spec));
    }

    #[test]
    fn macmahon_is_symmetric(a in 0i64..4, b in 0i64..4, c in 0i64..4) {
        let f = pp_q(a, b, c);
        prop_assert_eq!(&f, &pp_q(b, a, c));
        prop_assert_eq!(&f, &pp_q(c, b, a));
    }

    #[test]
    fn up_excess_equals_dent_count(spec in two_sided(4), x in 0i64..3) {
        // With x = 0 the first row has a single up triangle, which both sides would remove.
        prop_assume!(x > 0 || !(spec.a.contains(&1) && spec.b.contains(&1)));
        let r = build_s(x, &spec).unwrap();
        let excess = r.up_count() as i64 - r.down_count() as i64;
        prop_assert_eq!(excess, spec.rows() - spec.m() - spec.n());
    }

    #[test]
    fn tileability_predicates_match_enumeration(spec in two_sided(4), q in quartered(3), x in 0i64..3) {
        let zero = BigInt::from(0);
        prop_assert_eq!(tileable_s(&spec), count_tilings(&build_s(x, &spec).unwrap()) > zero);
        prop_assert_eq!(tileable_q(&q), count_tilings(&build_q(x, &q).unwrap()) > zero);
    }

    #[test]
    fn generating_function_at_one_counts_tilings(spec in two_sided(4), x in 0i64..3) {
        let r = build_s(x, &spec).unwrap();
        let at_one = tgf(&r).eval(&rat(1, 1), &rat(1, 1), &rat(1, 1)).unwrap();
        prop_assert_eq!(at_one, BigRational::from_integer(count_tilings(&r)));
    }

    #[test]
    fn ratio_at_one_is_a_count_ratio(spec in two_sided(4), x in 0i64..3, y in 0i64..3) {
        prop_assume!(tileable_s(&spec));
        let f = value_at_one(&ratio_s(x, y, &spec));
        let cx = BigRational::from_integer(count_tilings(&build_s(x, &spec).unwrap()));
        let cy = BigRational::from_integer(count_tilings(&build_s(y, &spec).unwrap()));
        prop_assert_eq!(cx, f * cy);
    }

    #[test]
    fn fast_engine_agrees_with_brute_force(spec in two_sided(4), q in quartered(3), x in 0i64..3) {
        let s = build_s(x, &spec).unwrap();
        prop_assert_eq!(tgf_fast(&s).unwrap(), tgf(&s));
        let r = build_q(x, &q).unwrap();
        prop_assert_eq!(tgf_fast(&r).unwrap(), tgf(&r));
    }

    #[test]
    fn symmetric_regions_reflect_onto_themselves(a in prop::sample::subsequence(vec![1i64, 2, 3, 4], 2), x in 0i64..3) {
        let spec = TwoSided::new(a.clone(), a).unwrap();
        let r = build_s(2 * x, &spec).unwrap();
        let m = reflect(&r).unwrap();
        prop_assert_eq!(&m.cells, &r.cells);
        prop_assert_eq!(tgf(&m), tgf(&r));
    }
}
