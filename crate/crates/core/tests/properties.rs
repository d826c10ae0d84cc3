use proptest::prelude::*;

use bstone_core::basicmaps::{build_basic, unique_basic_phi, Transform};
use bstone_core::exact::{gi, q, qf, GaussQ, Q};
use bstone_core::fintop::FiniteSpace;
use bstone_core::funcrel::DiscreteFamily;
use bstone_core::haarconv::{
    build_haar_map, radon_nikodym, verify_measured_decomposition, weighted_convolve, HaarData, HaarSystem, MeasuredGroupoid, UnitMeasure,
};
use bstone_core::ideals::recover_homeo;
use bstone_core::steinberg::{all_cocycles, decompose_diagonal_preserving, theta_map, FiniteGroupoid, RingSpec, Steinberg, DEFAULT_ENUMERATION_CAP};
use bstone_core::stone::{duality_roundtrip, GenBoolAlg};
use bstone_core::suite::{run_suite, SuiteConfig};

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn gauss_vec(n: usize) -> impl Strategy<Value = Vec<GaussQ>> {
    prop::collection::vec((-3i64..=3, -3i64..=3).prop_map(|(a, b)| gi(a, b)), n)
}

fn level() -> impl Strategy<Value = Q> {
    prop_oneof![Just(q(1)), Just(q(2)), Just(qf(1, 3)), Just(qf(5, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relabelled_power_sets_round_trip(p in perm(8)) {
        let b = GenBoolAlg::power_set(3).relabel(&p);
        prop_assert!(duality_roundtrip(&b).unwrap().isomorphism);
    }

    #[test]
    fn basic_maps_recover_their_point_map(phi in perm(3), s in prop::collection::vec(perm(3), 3)) {
        let h: Vec<u8> = vec![0, 1, 2];
        let fam = DiscreteFamily::full(FiniteSpace::discrete(3), h.clone(), vec![0; 3]).unwrap();
        let sections = s.iter().map(|sy| h.iter().copied().zip(sy.iter().map(|&v| v as u8)).collect()).collect();
        let t = build_basic(&fam, FiniteSpace::discrete(3), h, &Transform { phi: phi.clone(), sections }).unwrap();
        prop_assert_eq!(recover_homeo(&t).unwrap().phi, phi.clone());
        prop_assert_eq!(unique_basic_phi(&t).unwrap(), phi);
    }

    #[test]
    fn convolution_is_associative_on_c2_ltimes_c2(
        w in prop::collection::vec(level(), 2),
        f in gauss_vec(4), g in gauss_vec(4), h in gauss_vec(4),
    ) {
        let gr = FiniteGroupoid::c2_ltimes_c2();
        let units = gr.units().to_vec();
        let lam = HaarSystem::from_source_weights(&gr, |x| w[units.iter().position(|&u| u == x).unwrap()].clone()).unwrap();
        let left = weighted_convolve(&gr, &lam, &weighted_convolve(&gr, &lam, &f, &g), &h);
        let right = weighted_convolve(&gr, &lam, &f, &weighted_convolve(&gr, &lam, &g, &h));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn weighted_isometries_on_pair_groupoids_decompose(
        wg in prop::collection::vec(level(), 2),
        wh in prop::collection::vec(level(), 2),
        mass in prop::collection::vec(level(), 2),
        swap in any::<bool>(),
    ) {
        let g = FiniteGroupoid::pair(2);
        // units of pair(2) are arrows 0 and 3
        let unit_slot = |x: usize| usize::from(x == 3);
        let lg = HaarSystem::from_source_weights(&g, |x| wg[unit_slot(x)].clone()).unwrap();
        let lh = HaarSystem::from_source_weights(&g, |x| wh[unit_slot(x)].clone()).unwrap();
        let phi: Vec<usize> = if swap { vec![3, 2, 1, 0] } else { vec![0, 1, 2, 3] };
        let mh = UnitMeasure::new(&g, |y| mass[unit_slot(y)].clone()).unwrap();
        let mg = UnitMeasure::new(&g, |x| mass[unit_slot(if swap { 3 - x } else { x })].clone()).unwrap();
        let src = MeasuredGroupoid { groupoid: &g, lambda: &lg, mu: Some(&mg) };
        let tgt = MeasuredGroupoid { groupoid: &g, lambda: &lh, mu: Some(&mh) };
        let data = HaarData { phi: phi.clone(), p: vec![gi(1, 0); 4], d: radon_nikodym(&src, &tgt, &phi) };
        let t = build_haar_map(&src, &tgt, &data).unwrap();
        let r = verify_measured_decomposition(&t, &src, &tgt, None).unwrap();
        prop_assert!(r.verified(), "{:?}", r.failed());
        prop_assert_eq!(r.data.unwrap().phi, phi);
    }

    #[test]
    fn theta_round_trips_over_z3(c in 0usize..2, swap in any::<bool>()) {
        let alg = Steinberg::new(FiniteGroupoid::pair(2), RingSpec::zn(3)).unwrap();
        let cocycles = all_cocycles(&alg, 1 << 20).unwrap();
        let alpha: Vec<usize> = if swap { vec![3, 2, 1, 0] } else { vec![0, 1, 2, 3] };
        let chi = &cocycles[c % cocycles.len()];
        let t = theta_map(&alg, chi, &alpha).unwrap();
        let d = decompose_diagonal_preserving(&t, &alg, &alg, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(&d.chi, chi);
        prop_assert_eq!(d.phi, alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn seeded_suites_pass_for_any_seed(seed in any::<u64>()) {
        for id in ["REL-2", "IDE-2", "BAS-1", "HAA-1"] {
            let r = run_suite(id, &SuiteConfig { max_size: 2, seed }).unwrap();
            prop_assert!(r.passed(), "{} seed {}: {:?}", id, seed, r.witnesses);
        }
    }
}
