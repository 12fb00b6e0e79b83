mod common;

use common::*;
use manna::transforms::{
    earnings_to_prices, normalize_prices_zero_min, prices_to_earnings,
    reduce_bivalued_to_dichotomous, restore_bivalued, shift_utilities,
};
use manna::verify::{
    check_earnings_equilibrium, check_envy_free, check_hz_equilibrium, check_pareto_optimal,
    ToleranceConfig,
};
use manna::{envy_report, validate_allocation, Allocation, Instance, PriceVector, Rational, ShiftSpec};
use proptest::prelude::*;

fn exact() -> ToleranceConfig<Rational> {
    ToleranceConfig::exact()
}

fn verdicts(inst: &Instance<Rational>, x: &Allocation<Rational>, p: &PriceVector<Rational>) -> [bool; 5] {
    let q = prices_to_earnings(p).vector;
    [
        envy_report(inst, x).envy_free,
        check_envy_free(inst, x).holds,
        check_pareto_optimal(inst, x).holds,
        check_hz_equilibrium(inst, x, p, &exact()).holds,
        check_earnings_equilibrium(inst, x, &q, &exact()).holds,
    ]
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A bundle summing to 1 from nonnegative integer weights.
fn bundle(w: &[u32]) -> Vec<Rational> {
    let total: u32 = w.iter().sum::<u32>().max(1);
    let mut b: Vec<Rational> = w.iter().map(|&v| r(v as i64, total as i64)).collect();
    if w.iter().all(|&v| v == 0) {
        b[0] = ri(1);
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_preserves_every_verdict(
        u in arb_instance(-5, 5),
        w in arb_weights(),
        ks in prop::collection::vec(0u32..12, 3),
        cs in prop::collection::vec(-6i64..=6, 3),
        a in (1i64..=5, 1i64..=3),
    ) {
        let n = u.len();
        let inst = unit(&u);
        let x = mix(n, &w);
        let p = quarter_prices(&ks[..n]);
        let spec = ShiftSpec::new(cs[..n].iter().map(|&c| ri(c)).collect(), r(a.0, a.1)).unwrap();
        let shifted = shift_utilities(&inst, &spec).unwrap();
        prop_assert_eq!(verdicts(&inst, &x, &p), verdicts(&shifted, &x, &p));
    }

    #[test]
    fn money_is_conserved(u in arb_instance(-5, 5), w in arb_weights(), ks in prop::collection::vec(0u32..20, 3)) {
        let n = u.len();
        let inst = unit(&u);
        let x = mix(n, &w);
        prop_assert!(validate_allocation(&inst, &x).holds);
        let p = quarter_prices(&ks[..n]);
        let spent: Rational = (0..n).map(|i| dot(p.values(), x.row(i))).sum();
        let total: Rational = p.values().iter().sum();
        prop_assert_eq!(spent, total);
    }

    #[test]
    fn affordable_bundles_earn_enough(ks in prop::collection::vec(0u32..16, 2..=4), w in prop::collection::vec(0u32..5, 4)) {
        let p = quarter_prices(&ks);
        prop_assume!(p.max() > ri(1));
        let y = bundle(&w[..ks.len()]);
        prop_assume!(dot(p.values(), &y) <= ri(1));
        let q = prices_to_earnings(&p).vector;
        prop_assert!(dot(q.values(), &y) >= ri(1));
    }

    #[test]
    fn conversion_reverses_cost_order(
        ks in prop::collection::vec(0u32..16, 3),
        wy in prop::collection::vec(0u32..5, 3),
        wz in prop::collection::vec(0u32..5, 3),
    ) {
        let p = quarter_prices(&ks);
        prop_assume!(p.max() > ri(1));
        let q = prices_to_earnings(&p).vector;
        let (y, z) = (bundle(&wy), bundle(&wz));
        let cheaper = dot(p.values(), &y) <= dot(p.values(), &z);
        let earns_more = dot(q.values(), &y) >= dot(q.values(), &z);
        prop_assert_eq!(cheaper, earns_more);
    }

    #[test]
    fn round_trip_is_zero_min_normalization(ks in prop::collection::vec(0u32..16, 2..=4)) {
        let p = quarter_prices(&ks);
        prop_assume!(p.min() < ri(1) && p.max() > ri(1));
        let back = earnings_to_prices(&prices_to_earnings(&p).vector);
        prop_assert!(!back.degenerate);
        prop_assert_eq!(&back.vector, &normalize_prices_zero_min(&p).unwrap());
        if p.min() == ri(0) {
            prop_assert_eq!(back.vector, p);
        }
    }

    #[test]
    fn normalization_keeps_hz_verdict(u in arb_instance(-5, 5), w in arb_weights(), ks in prop::collection::vec(0u32..12, 3)) {
        let n = u.len();
        let inst = unit(&u);
        let x = mix(n, &w);
        let p = quarter_prices(&ks[..n]);
        prop_assume!(p.min() < ri(1));
        let pn = normalize_prices_zero_min(&p).unwrap();
        prop_assert_eq!(pn.min(), ri(0));
        prop_assert_eq!(
            check_hz_equilibrium(&inst, &x, &p, &exact()).holds,
            check_hz_equilibrium(&inst, &x, &pn, &exact()).holds
        );
    }

    #[test]
    fn hz_and_earnings_agree(u in arb_instance(-5, 5), w in arb_weights(), ks in prop::collection::vec(0u32..16, 3)) {
        let n = u.len();
        let inst = unit(&u);
        let x = mix(n, &w);
        let p = quarter_prices(&ks[..n]);
        let conv = prices_to_earnings(&p);
        let hz = check_hz_equilibrium(&inst, &x, &p, &exact()).holds;
        let earn = check_earnings_equilibrium(&inst, &x, &conv.vector, &exact()).holds;
        if conv.degenerate {
            prop_assert!(!hz || earn);
        } else {
            prop_assert_eq!(hz, earn);
        }
    }

    #[test]
    fn looser_eps_never_breaks_a_verdict(
        u in arb_instance(-5, 5),
        w in arb_weights(),
        ks in prop::collection::vec(0u32..12, 3),
        e1 in 0i64..20,
        e2 in 0i64..20,
    ) {
        let n = u.len();
        let inst = unit(&u);
        let x = mix(n, &w);
        let p = quarter_prices(&ks[..n]);
        let q = prices_to_earnings(&p).vector;
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let tl = ToleranceConfig::new(r(lo, 40)).unwrap();
        let th = ToleranceConfig::new(r(hi, 40)).unwrap();
        if check_hz_equilibrium(&inst, &x, &p, &tl).holds {
            prop_assert!(check_hz_equilibrium(&inst, &x, &p, &th).holds);
        }
        if check_earnings_equilibrium(&inst, &x, &q, &tl).holds {
            prop_assert!(check_earnings_equilibrium(&inst, &x, &q, &th).holds);
        }
    }

    #[test]
    fn bivalued_reduction_shape(
        lows in prop::collection::vec(-5i64..=5, 3),
        gaps in prop::collection::vec(0i64..=4, 3),
        pattern in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 3),
    ) {
        let rows: Vec<Vec<i64>> = (0..3)
            .map(|i| pattern[i].iter().map(|&hi| if hi { lows[i] + gaps[i] } else { lows[i] }).collect())
            .collect();
        let inst = unit(&rows);
        let (red, rec) = reduce_bivalued_to_dichotomous(&inst).unwrap();
        for i in 0..3 {
            let row = inst.utility_row(i);
            let top = row.iter().max().unwrap();
            let constant = row.iter().all(|v| v == top);
            for (u, v) in row.iter().zip(red.utility_row(i)) {
                prop_assert!(*v == ri(0) || *v == ri(1));
                if constant {
                    prop_assert_eq!(v, &ri(0));
                } else {
                    prop_assert_eq!(*v == ri(1), u == top);
                }
            }
        }
        prop_assert_eq!(restore_bivalued(&red, &rec), inst);
    }

    #[test]
    fn identity_is_always_valid(u in arb_instance(-5, 5)) {
        let inst = unit(&u);
        prop_assert!(validate_allocation(&inst, &Allocation::identity(u.len())).holds);
    }
}
