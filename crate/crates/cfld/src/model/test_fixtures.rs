//! Shared fixtures for unit tests.

use crate::instancegen::{generate, GenConfig, SplitMix64};
use crate::model::{CandidateSite, Competitor, FractionalPoint, Instance, Levels, Zone};

/// One zone (a = 1000), one candidate (f = 0, c = 0), one competitor with
/// q = 100 at distance 10 and a single level Q = 100 at distance 10.
///
/// The single coefficient is exactly b = 1, so opening splits the zone 50/50
/// with the competitor.
pub fn tiny_symmetric_instance() -> Instance {
    Instance::new(
        vec![Zone {
            id: "z1".into(),
            buying_power: 1000.0,
            position: None,
        }],
        vec![CandidateSite {
            id: "c1".into(),
            fixed_cost: 0.0,
            position: None,
        }],
        vec![Competitor {
            id: "k1".into(),
            attractiveness: 100.0,
            position: None,
        }],
        Levels::new(vec![100.0], vec![vec![0.0]]).unwrap(),
        vec![10.0],
        vec![10.0],
    )
    .unwrap()
}

/// A seeded random instance with the requested shape and f_j = 500.
pub fn random_instance(
    seed: u64,
    n_zones: usize,
    n_candidates: usize,
    n_competitors: usize,
    n_levels: usize,
) -> Instance {
    let all_levels = [100.0, 300.0, 500.0, 700.0, 900.0];
    assert!(n_levels >= 1 && n_levels <= all_levels.len());
    let config = GenConfig {
        n_zones,
        n_candidates,
        n_competitors,
        fixed_cost: 500.0,
        seed,
        level_values: all_levels[..n_levels].to_vec(),
        ..GenConfig::default()
    };
    generate(&config).unwrap()
}

/// A strictly interior point of the relaxed region.
pub fn random_point(seed: u64, n_candidates: usize, n_levels: usize) -> FractionalPoint {
    let mut rng = SplitMix64::new(seed);
    let mut y = Vec::with_capacity(n_candidates * n_levels);
    for _ in 0..n_candidates {
        let weights: Vec<f64> = (0..n_levels).map(|_| rng.next_f64() + 1e-6).collect();
        let total: f64 = weights.iter().sum();
        let mass = 0.95 * rng.next_f64();
        y.extend(weights.iter().map(|w| mass * w / total));
    }
    FractionalPoint::new(y, n_candidates, n_levels).unwrap()
}
