use cfld::instancegen::{generate, GenConfig};
use cfld::model::DerivedCoefficients;
use cfld::oa;
use std::time::Instant;

fn main() {
    for (f, k, seed) in [(0.0, 1usize, 1u64), (2500.0, 5, 1), (5000.0, 10, 2)] {
        let inst = generate(&GenConfig {
            n_zones: 20, n_candidates: 20, n_competitors: k,
            fixed_cost: f, seed, ..GenConfig::default()
        }).unwrap();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let mut master = oa::BnbMaster::with_node_cap(3_000_000);
        let t = Instant::now();
        match oa::run(&inst, &coeffs, &mut master, &oa::default_init(&inst), &oa::OaCaps::default()) {
            Ok(r) => println!("f={f} K={k} seed={seed}: {} iters, profit {:.1}, {:?}, {:.1}s",
                              r.iterations, r.profit, r.termination, t.elapsed().as_secs_f64()),
            Err(e) => println!("f={f} K={k} seed={seed}: ERROR after {:.1}s: {e}", t.elapsed().as_secs_f64()),
        }
    }
}
