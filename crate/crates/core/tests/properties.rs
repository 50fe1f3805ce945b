use mixpolar_core::channels::{capacity, make_bec, split_channel};
use mixpolar_core::code_design::{block_error_bound, select_information_set, InformationSet};
use mixpolar_core::construction::{build_layout, Scheme};
use mixpolar_core::erasure_de::{bec_base_state, de_split, state_metrics};
use mixpolar_core::gf_algebra::BitVec;
use mixpolar_core::kernels::Kernel;
use mixpolar_core::sc_codec::{erasure_likelihoods, kernel_step_likelihood, sc_decode, LikelihoodVector};
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Mixed), Just(Scheme::Arikan), Just(Scheme::Rs4Top)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_linear(s in scheme(), a in prop::collection::vec(0u8..2, 64), b in prop::collection::vec(0u8..2, 64)) {
        let layout = build_layout(s, 3).unwrap();
        let (a, b) = (BitVec::from_bits(&a), BitVec::from_bits(&b));
        let lhs = layout.encode(&a.xor(&b)).unwrap();
        let rhs = layout.encode(&a).unwrap().xor(&layout.encode(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn de_children_are_distributions_and_conserve_information(eps in 0.0f64..=1.0, rs in any::<bool>()) {
        let (k, w) = if rs { (Kernel::rs4(), 2) } else { (Kernel::g1(), 1) };
        let parent = bec_base_state(eps, w).unwrap();
        let mut total = 0.0;
        for g in 0..k.groups() {
            let child = de_split(&k, &parent, g).unwrap();
            let sum: f64 = child.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            total += state_metrics(&child).i;
        }
        prop_assert!((total - k.ell() as f64 * state_metrics(&parent).i).abs() < 1e-9);
    }

    #[test]
    fn de_split_matches_exact_split(eps in 0.0f64..=1.0) {
        let k = Kernel::g1();
        let w = make_bec(eps).unwrap();
        let parent = bec_base_state(eps, 1).unwrap();
        for g in 0..3 {
            let de = state_metrics(&de_split(&k, &parent, g).unwrap()).i;
            prop_assert!((de - capacity(&split_channel(&k, &w, g).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn step_likelihood_is_scale_invariant(values in prop::collection::vec(0.01f64..1.0, 16), scale in 0.001f64..1000.0, group in 0usize..4) {
        let k = Kernel::rs4();
        let lvs: Vec<LikelihoodVector> = values.chunks(4).map(|c| LikelihoodVector::new(c.to_vec()).unwrap()).collect();
        let scaled: Vec<LikelihoodVector> = values.chunks(4).map(|c| LikelihoodVector::new(c.iter().map(|v| v * scale).collect()).unwrap()).collect();
        let prefix = vec![1u32; group];
        let a = kernel_step_likelihood(&k, &lvs, &prefix, group).unwrap();
        let b = kernel_step_likelihood(&k, &scaled, &prefix, group).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn decoding_without_erasures_recovers_information(s in scheme(), eps in 0.05f64..0.95, rate in 0.0f64..=1.0, bits in prop::collection::vec(0u8..2, 64)) {
        let layout = build_layout(s, 3).unwrap();
        let de = mixpolar_core::erasure_de::de_evolve(&layout, eps).unwrap();
        let set = select_information_set(&de, (rate * 64.0).round() as usize).unwrap();
        let mask = set.info_mask(&de);
        let u = BitVec::from_bits(&bits.iter().zip(&mask).map(|(b, m)| if *m { *b } else { 0 }).collect::<Vec<_>>());
        let x = layout.encode(&u).unwrap();
        let out = sc_decode(&layout, &erasure_likelihoods(&layout, &x, &[false; 64]), &set).unwrap();
        prop_assert_eq!(out.u, u);
    }

    #[test]
    fn union_bound_grows_with_k(eps in 0.05f64..0.95, k in 0usize..63) {
        let layout = build_layout(Scheme::Mixed, 3).unwrap();
        let de = mixpolar_core::erasure_de::de_evolve(&layout, eps).unwrap();
        let a = select_information_set(&de, k).unwrap();
        let b = select_information_set(&de, k + 2).unwrap();
        prop_assert!(block_error_bound(&de, &a) <= block_error_bound(&de, &b) + 1e-15);
        let all = InformationSet::from_selected(&de, (0..de.channels.len()).collect()).unwrap();
        prop_assert!(block_error_bound(&de, &b) <= block_error_bound(&de, &all) + 1e-12);
    }
}
