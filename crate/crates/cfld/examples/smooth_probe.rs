use cfld::instancegen::{generate, GenConfig};
use cfld::model::{DerivedCoefficients, Solution};
use cfld::oa::{self, MasterOracle};
use std::time::Instant;

fn main() {
    let inst = generate(&GenConfig {
        n_zones: 20, n_candidates: 20, n_competitors: 1,
        fixed_cost: 0.0, seed: 1, ..GenConfig::default()
    }).unwrap();
    let coeffs = DerivedCoefficients::from_instance(&inst);
    let mut pool = oa::CutPool::new();
    pool.add(oa::default_init(&inst), &coeffs);
    pool.add(Solution::closed(20), &coeffs);
    let t = Instant::now();
    let mut m = oa::BnbMaster::with_node_cap(200_000);
    match m.solve(&inst, &coeffs, &pool) {
        Ok(s) => println!("iter1 objective {:.3} in {:.1}s ({} nodes, {} fw iters)", s.objective, t.elapsed().as_secs_f64(), m.last_nodes, m.last_fw_iterations),
        Err(e) => println!("iter1 failed after {:.1}s: {e}", t.elapsed().as_secs_f64()),
    }
}
