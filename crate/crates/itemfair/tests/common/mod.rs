//! Helpers shared by the integration test targets.

use itemfair::model::{ItemCatalog, TopKRun};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random valid run for a fixed seed: every (user, round) list is a
/// sample of k distinct catalog items. The generator is seeded, so each
/// seed names one run forever.
pub fn random_run(seed: u64, k: usize, m: usize, rounds: usize, catalog: &ItemCatalog) -> TopKRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = catalog.len();
    let lists: Vec<Vec<usize>> = (0..m * rounds)
        .map(|_| rand::seq::index::sample(&mut rng, n, k).into_vec())
        .collect();
    TopKRun::from_lists(k, m, rounds, lists, catalog).expect("sampled lists form a valid run")
}
