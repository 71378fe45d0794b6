//! Seeded random system generation for property testing and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Vass;
use crate::rat::{int, Int};

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub locations: usize,
    pub transitions: usize,
    pub max_update: i64,
    /// Start from a random ring through all locations, so the result is
    /// strongly connected by construction. May raise the transition count to
    /// the number of locations.
    pub connected: bool,
    /// Sample all but the last update entry and set the last to the negated
    /// sum, so every update sums to zero.
    pub conservative: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            dim: 2,
            locations: 3,
            transitions: 4,
            max_update: 2,
            connected: true,
            conservative: false,
        }
    }
}

/// Deterministic for a fixed seed and configuration.
pub fn generate_random(seed: u64, cfg: &GeneratorConfig) -> Vass {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = cfg.dim.max(1);
    let n_locs = cfg.locations.max(1);
    let names: Vec<String> = (0..n_locs).map(|i| format!("l{i}")).collect();

    let mut transitions: Vec<(String, String, Vec<Int>)> = Vec::new();
    if cfg.connected && n_locs > 1 {
        let mut ring: Vec<usize> = (0..n_locs).collect();
        ring.shuffle(&mut rng);
        for i in 0..n_locs {
            let from = ring[i];
            let to = ring[(i + 1) % n_locs];
            transitions.push((
                names[from].clone(),
                names[to].clone(),
                sample_update(&mut rng, dim, cfg),
            ));
        }
    }
    while transitions.len() < cfg.transitions.max(1) {
        let from = rng.random_range(0..n_locs);
        let to = rng.random_range(0..n_locs);
        transitions.push((
            names[from].clone(),
            names[to].clone(),
            sample_update(&mut rng, dim, cfg),
        ));
    }

    Vass::new(dim, names, transitions).expect("generated system is well-formed")
}

fn sample_update(rng: &mut ChaCha8Rng, dim: usize, cfg: &GeneratorConfig) -> Vec<Int> {
    let bound = cfg.max_update.max(0);
    let mut update: Vec<Int> = Vec::with_capacity(dim);
    if cfg.conservative {
        let mut sum = 0i64;
        for _ in 0..dim.saturating_sub(1) {
            let x = rng.random_range(-bound..=bound);
            sum += x;
            update.push(int(x));
        }
        update.push(int(-sum));
    } else {
        for _ in 0..dim {
            update.push(int(rng.random_range(-bound..=bound)));
        }
    }
    update
}

/// Size ranges for a random test corpus; each instance samples its own
/// dimension, location and transition counts.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub max_dim: usize,
    pub max_locations: usize,
    pub max_transitions: usize,
    pub max_update: i64,
    pub connected: bool,
    pub conservative: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            max_dim: 3,
            max_locations: 4,
            max_transitions: 6,
            max_update: 2,
            connected: true,
            conservative: false,
        }
    }
}

/// A deterministic stream of random instances: element `i` depends only on
/// the master seed and `i`.
pub fn corpus(master_seed: u64, count: usize, spec: &CorpusSpec) -> Vec<Vass> {
    (0..count)
        .map(|i| {
            let mut meta = ChaCha8Rng::seed_from_u64(master_seed.wrapping_add(i as u64));
            let dim = meta.random_range(1..=spec.max_dim.max(1));
            let locations = meta.random_range(1..=spec.max_locations.max(1));
            let lo = if spec.connected { locations } else { 1 };
            let hi = spec.max_transitions.max(lo);
            let transitions = meta.random_range(lo..=hi);
            let cfg = GeneratorConfig {
                dim,
                locations,
                transitions,
                max_update: spec.max_update,
                connected: spec.connected,
                conservative: spec.conservative,
            };
            generate_random(meta.random(), &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_strongly_connected;
    use num::Zero;

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = GeneratorConfig::default();
        assert_eq!(generate_random(1, &cfg), generate_random(1, &cfg));
    }

    #[test]
    fn minimal_instance() {
        let cfg = GeneratorConfig {
            dim: 1,
            locations: 1,
            transitions: 1,
            max_update: 1,
            connected: false,
            conservative: false,
        };
        let v = generate_random(7, &cfg);
        assert_eq!(v.dim(), 1);
        assert_eq!(v.transitions().len(), 1);
    }

    #[test]
    fn conservative_updates_sum_to_zero() {
        let cfg = GeneratorConfig {
            conservative: true,
            dim: 3,
            ..GeneratorConfig::default()
        };
        for seed in 0..20 {
            let v = generate_random(seed, &cfg);
            for tr in v.transitions() {
                assert!(tr.update.iter().sum::<crate::rat::Int>().is_zero());
            }
        }
    }

    #[test]
    fn connected_by_construction() {
        for seed in 0..30 {
            let v = generate_random(
                seed,
                &GeneratorConfig {
                    connected: true,
                    locations: 4,
                    transitions: 5,
                    ..GeneratorConfig::default()
                },
            );
            assert!(is_strongly_connected(&v.view()), "seed {seed}");
        }
    }

    #[test]
    fn corpus_is_prefix_stable() {
        let spec = CorpusSpec::default();
        let big = corpus(42, 10, &spec);
        let small = corpus(42, 4, &spec);
        assert_eq!(&big[..4], &small[..]);
    }
}
