use proptest::prelude::*;
use topocode::crypto_protocols::{
    authenticate_coincide, gen_keypair, open, seal, simulate, KeySource, ProtocolId,
};
use topocode::graph_core::Graph;
use topocode::string_algebra::{DigitString, Ring};

fn protocol() -> impl Strategy<Value = ProtocolId> {
    (0..ProtocolId::ALL.len()).prop_map(|i| ProtocolId::ALL[i])
}

proptest! {
    #[test]
    fn seal_open_round_trip(data in prop::collection::vec(any::<u8>(), 0..200), key in prop::collection::vec(0u8..10, 1..30), label in "[a-z.]{1,12}") {
        let key = DigitString::new(key, Ring::Mod10).unwrap();
        let sealed = seal(&data, &key, &label).unwrap();
        prop_assert_eq!(open(&sealed, &key, &label).unwrap(), data);
        let wrong = label.clone() + "x";
        prop_assert!(open(&sealed, &key, &wrong).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn protocols_round_trip_deterministically(id in protocol(), seed in any::<u64>(), plaintext in prop::collection::vec(any::<u8>(), 1..64)) {
        let a = simulate(id, seed, &plaintext).unwrap();
        prop_assert!(a.transcript.verdict, "{:?}", a.transcript.reason);
        prop_assert_eq!(a.recovered.as_deref(), Some(plaintext.as_slice()));
        let b = simulate(id, seed, &plaintext).unwrap();
        prop_assert_eq!(a.transcript.digest(), b.transcript.digest());
        prop_assert_eq!(a.transcript.to_json_lines(), b.transcript.to_json_lines());
    }

    #[test]
    fn coincide_auth_ignores_private_order(half in 2usize..=4, seed in any::<u64>(), shuffle in Just((0..3usize).collect::<Vec<_>>()).prop_shuffle()) {
        // m edge-disjoint spanning trees of K_2m.
        let pair = gen_keypair(&KeySource::CompleteSplit { m: half }, seed).unwrap();
        let public = &pair.public.graphs[0];
        let private = &pair.private.graphs;
        let target = Graph::complete(2 * half);
        let base = authenticate_coincide(public, private, &target).unwrap();
        prop_assert!(base.verdict, "{}", base.detail);
        let order: Vec<usize> = shuffle.into_iter().filter(|&i| i < private.len()).collect();
        let permuted: Vec<_> = order.iter().map(|&i| private[i].clone()).collect();
        let again = authenticate_coincide(public, &permuted, &target).unwrap();
        prop_assert_eq!(&again, &base);
        let partial = authenticate_coincide(public, &private[1..], &target).unwrap();
        prop_assert!(!partial.verdict);
    }
}
