use std::sync::Arc;

use flowkit::serial::compare_with_network;
use flowkit::serial::gen::{inputs, CircuitGen};
use flowkit::StoreRegistry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn network_agrees_with_serial_on_random_circuits() {
    let registry = Arc::new(StoreRegistry::default());
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..150 {
        let c = CircuitGen::new(&mut rng).circuit();
        let jobs: Vec<_> = (0..5)
            .map(|_| inputs(&mut rng, c.signature().ins()))
            .collect();
        compare_with_network(&c, &jobs, registry.clone()).unwrap();
    }
}

#[test]
fn generated_inputs_trigger_both_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut ok, mut failed) = (0, 0);
    for _ in 0..300 {
        let c = CircuitGen::new(&mut rng).circuit();
        let xs = inputs(&mut rng, c.signature().ins());
        match flowkit::serial::run_serial_values(&c, xs) {
            Ok(_) => ok += 1,
            Err(_) => failed += 1,
        }
    }
    assert!(ok > 100 && failed > 10, "ok {ok}, failed {failed}");
}
