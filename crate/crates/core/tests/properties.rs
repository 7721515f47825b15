use cfpgn::arith::{rat, LogCoord, Rational};
use cfpgn::oracle::brute_minima;
use cfpgn::{build_graph, decode, evaluate_graph, normalize, CfExpansion};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rational(max_den: i64) -> impl Strategy<Value = Rational> {
    (1i64..max_den).prop_flat_map(|d| (-3 * d..3 * d).prop_map(move |p| rat(p, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decode_recovers_expansion(xi in rational(1_000_000)) {
        let norm = normalize(&xi);
        let graph = build_graph(&xi, None);
        prop_assert_eq!(decode(&graph).unwrap(), CfExpansion::expand(&norm).unwrap());
    }

    #[test]
    fn decode_recovers_quotients(qs in prop::collection::vec(1u32..40, 0..12), first in 2u32..40) {
        let mut quotients = vec![BigInt::from(first)];
        quotients.extend(qs.into_iter().map(BigInt::from));
        if *quotients.last().unwrap() == BigInt::from(1) {
            *quotients.last_mut().unwrap() = BigInt::from(2);
        }
        let cf = CfExpansion::from_quotients(quotients.clone()).unwrap();
        let decoded = decode(&build_graph(cf.value(), None)).unwrap();
        prop_assert_eq!(decoded.quotients(), &quotients[..]);
    }

    #[test]
    fn graph_matches_oracle_off_vertices(xi in rational(300), num in 1i64..5000, den in 1i64..50) {
        let r = Rational::from_integer(1.into()) + rat(num, den);
        let q = LogCoord::new(r).unwrap();
        let graph = build_graph(&xi, None);
        let (l1, l2) = evaluate_graph(&graph, &q).unwrap();
        let w = brute_minima(&normalize(&xi), &q, None);
        prop_assert_eq!((w.lambda1, w.lambda2), (l1, l2));
    }
}

#[test]
fn integer_shift_and_sign_leave_graph_unchanged() {
    let base = build_graph(&rat(3, 7), None);
    for xi in [rat(10, 7), rat(-3, 7), rat(4, 7), rat(-25, 7)] {
        assert_eq!(build_graph(&xi, None), base);
    }
}

#[test]
fn large_quotients() {
    let cf = CfExpansion::from_quotients(vec![BigInt::from(5_000u64), BigInt::from(3)]).unwrap();
    let graph = build_graph(cf.value(), None);
    assert_eq!(graph.interval_max_counts(), &[5_000, 3]);
    assert_eq!(decode(&graph).unwrap(), cf);
}
