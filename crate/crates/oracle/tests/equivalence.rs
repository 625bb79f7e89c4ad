use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xeqci_oracle::{cross_check, random_small_spec, Agreement};

#[test]
fn stabilizer_routes_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut defined = 0;
    for i in 0..60 {
        let spec = random_small_spec(&mut rng);
        spec.validate().unwrap();
        let inst = spec.realize(&mut rng);
        match cross_check(&inst, 1e-12) {
            Ok(Agreement::Defined(_)) => defined += 1,
            Ok(Agreement::Undefined) => {}
            Err(e) => panic!("case {i}: {e}\n{spec:?}"),
        }
    }
    assert!(defined > 30);
}
