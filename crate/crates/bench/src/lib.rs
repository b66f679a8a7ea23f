//! Synthetic rating data for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reclab::{RatingStore, RatingTriple};

/// Integer ratings for `users x items` with the given fill ratio.
///
/// Each user and item gets a latent taste in [-1, 1]; ratings center on
/// 3 plus their product, so the data has structure for models to find.
pub fn synthetic_triples(users: usize, items: usize, density: f64, seed: u64) -> Vec<RatingTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taste_u: Vec<f64> = (0..users).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let taste_i: Vec<f64> = (0..items).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = Vec::new();
    for (u, tu) in taste_u.iter().enumerate() {
        for (i, ti) in taste_i.iter().enumerate() {
            if rng.gen_bool(density) {
                let noise: f64 = rng.gen_range(-0.7..0.7);
                let r = (3.0 + 2.0 * tu * ti + noise).round().clamp(1.0, 5.0);
                out.push(RatingTriple::new(u.to_string(), i.to_string(), r));
            }
        }
    }
    out
}

pub fn synthetic_store(users: usize, items: usize, density: f64, seed: u64) -> RatingStore {
    RatingStore::build(&synthetic_triples(users, items, density, seed))
        .expect("synthetic ratings are valid")
}
