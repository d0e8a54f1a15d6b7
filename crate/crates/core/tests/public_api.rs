use fbasis_core::fbasis::verify_factorization;
use fbasis_core::fixtures::{fixture_gen, Bounds, Sampler};
use fbasis_core::scalar_products::{gaudin_norm, norm_direct, sp_direct, sp_fbasis, sp_slavnov, sp_subset_sum};
use fbasis_core::{ChainSpec, ExactChain, Field, FloatChain, Rational};

#[test]
fn chain_json_round_trip() {
    let text = r#"{"regime":"xxx","n":3,"eta":"1/2","xi":["0","7/3","-5/4"]}"#;
    let chain: ExactChain = ChainSpec::from_json(&serde_json::from_str(text).unwrap()).unwrap();
    assert_eq!(chain.xi()[1], Rational::from_ratio(7, 3));
    let again: ExactChain = ChainSpec::from_json(&chain.to_json()).unwrap();
    assert_eq!(again, chain);
    // A decimal forces the float field.
    let float: FloatChain =
        ChainSpec::from_json(&serde_json::json!({"regime":"xxz","n":2,"eta":"0.3","xi":["0","0.7"]})).unwrap();
    assert_eq!(float.n(), 2);
}

#[test]
fn generated_fixtures_factorize() {
    for config in fixture_gen(17, 5, Bounds::default().with_n(2, 4)).unwrap() {
        let chain: ExactChain = config.chain.build().unwrap();
        assert!(verify_factorization(&chain, 0.0).unwrap().all_pass());
    }
}

#[test]
fn exact_two_root_states() {
    let mut s = Sampler::new(3, Bounds::small());
    let (chain, t) = s.onshell_pair().unwrap();
    let l = s.generic(2, &[chain.xi(), &t[..]].concat(), chain.eta(), &[1]).unwrap();
    let direct = sp_direct(&chain, &l, &t).unwrap();
    assert_eq!(sp_subset_sum(&chain, &l, &t).unwrap(), direct);
    assert_eq!(sp_fbasis(&chain, &l, &t).unwrap(), direct);
    assert_eq!(sp_slavnov(&chain, &l, &t).unwrap(), direct);
    assert_eq!(gaudin_norm(&chain, &t, 0.0).unwrap().value, norm_direct(&chain, &t).unwrap());
}
