use proptest::prelude::*;

use rhi_core::constants::{a1_constant, a1_plus_constant};
use rhi_core::dyadic::{dyadic_fujii_wilson, local_dyadic_maximal, verify_superlevel_lemma, DyadicWeight};
use rhi_core::geom::Cube;
use rhi_core::io::{dyadic_to_json, parse_weight, step_to_json, WeightFile};
use rhi_core::maximal1d::{eval_maximal, maximal_profile, rearrangement, Op};
use rhi_core::num::{int, rat, to_f64, Rational};
use rhi_core::report::TheoremId;
use rhi_core::rhi::sharp_constant;
use rhi_core::StepWeight;

fn step_weight() -> impl Strategy<Value = StepWeight> {
    (1usize..=8)
        .prop_flat_map(|m| (prop::collection::btree_set(1i64..32, m - 1), prop::collection::vec(1i64..=16, m)))
        .prop_map(|(cuts, vals)| {
            let mut bps = vec![int(0)];
            bps.extend(cuts.into_iter().map(|k| rat(k, 32)));
            bps.push(int(1));
            StepWeight::new(bps, vals.into_iter().map(int).collect()).unwrap()
        })
}

fn dyadic_weight() -> impl Strategy<Value = DyadicWeight> {
    (1usize..=3, 0u32..=3)
        .prop_flat_map(|(n, depth)| (Just(n), Just(depth), prop::collection::vec(1i64..=9, 1usize << (n as u32 * depth))))
        .prop_map(|(n, depth, cells)| DyadicWeight::new(Cube::unit(n), depth, cells.into_iter().map(int).collect()).unwrap())
}

fn piece_midpoints(w: &StepWeight) -> Vec<Rational> {
    w.pieces().map(|(a, b, _)| (a + b) / int(2)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maximal_operators_are_ordered(w in step_weight()) {
        let i = w.support();
        for x in piece_midpoints(&w) {
            let m = eval_maximal(&w, &i, Op::M, &x).unwrap();
            let plus = eval_maximal(&w, &i, Op::MPlus, &x).unwrap();
            let minus = eval_maximal(&w, &i, Op::MMinus, &x).unwrap();
            let v = w.value_at(&x).unwrap();
            prop_assert!(m >= plus && m >= minus);
            prop_assert!(&plus >= v && &minus >= v);
            prop_assert!(&m <= w.max_value());
        }
    }

    #[test]
    fn profile_agrees_with_pointwise(w in step_weight()) {
        let i = w.support();
        let p = maximal_profile(&w, &i, Op::M).unwrap();
        for x in piece_midpoints(&w) {
            prop_assert_eq!(p.eval(&x), eval_maximal(&w, &i, Op::M, &x).unwrap());
        }
        let integral = p.integrate_over(&i).unwrap();
        prop_assert!(integral >= to_f64(&w.total_mass()) * (1.0 - 1e-12));
    }

    #[test]
    fn a1_constants_are_ordered_and_scale_free(w in step_weight(), c in 1i64..50) {
        let a1 = a1_constant(&w).exact_value.unwrap();
        let a1p = a1_plus_constant(&w).exact_value.unwrap();
        prop_assert!(a1p >= int(1) && a1 >= a1p);
        prop_assert_eq!(a1_constant(&w.scale(&rat(c, 7)).unwrap()).exact_value.unwrap(), a1.clone());
        prop_assert_eq!(a1_constant(&w.affine(&rat(3, 2), &int(c)).unwrap()).exact_value.unwrap(), a1);
    }

    #[test]
    fn rearrangement_is_monotone_and_mass_preserving(w in step_weight()) {
        let r = rearrangement(&w, &w.support()).unwrap();
        prop_assert_eq!(r.total_mass(), w.total_mass());
        prop_assert!(r.values().windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn step_json_round_trip(w in step_weight()) {
        let back = parse_weight(&step_to_json(&w)).unwrap();
        prop_assert_eq!(back, WeightFile::Step(w));
    }

    #[test]
    fn dyadic_json_round_trip(w in dyadic_weight()) {
        let back = parse_weight(&dyadic_to_json(&w)).unwrap();
        prop_assert_eq!(back, WeightFile::Dyadic(w));
    }

    #[test]
    fn dyadic_fw_is_at_least_one_and_scale_free(w in dyadic_weight(), c in 1i64..20) {
        let fw = dyadic_fujii_wilson(&w).exact_value.unwrap();
        prop_assert!(fw >= int(1));
        prop_assert_eq!(fw == int(1), w.is_constant());
        prop_assert_eq!(dyadic_fujii_wilson(&w.scale(&rat(c, 3)).unwrap()).exact_value.unwrap(), fw);
    }

    #[test]
    fn dyadic_maximal_dominates_cells(w in dyadic_weight()) {
        let m = local_dyadic_maximal(&w);
        prop_assert!(m.cells().iter().zip(w.cells()).all(|(a, b)| a >= b));
    }

    #[test]
    fn superlevel_estimate_holds(w in dyadic_weight()) {
        let v = verify_superlevel_lemma(&w);
        prop_assert!(v.holds && v.exact);
    }

    #[test]
    fn sharp_constants_grow_with_r(d in 1.01f64..4.0, t0 in 0.0f64..0.9, dt in 0.01f64..0.09) {
        for id in [TheoremId::T1_2, TheoremId::T1_1, TheoremId::T4_2] {
            let bound = rhi_core::rhi::admissible_range(d, id, 2).unwrap();
            let (r0, r1) = (1.0 + t0 * (bound - 1.0), 1.0 + (t0 + dt) * (bound - 1.0));
            let (c0, c1) = (sharp_constant(r0, d, id, 2).unwrap(), sharp_constant(r1, d, id, 2).unwrap());
            prop_assert!(c1 >= c0 * (1.0 - 1e-12), "{id}: {c0} > {c1}");
            prop_assert!(c0 >= 1.0 - 1e-12);
        }
    }
}
