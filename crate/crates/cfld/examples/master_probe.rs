use cfld::instancegen::{generate, GenConfig};
use cfld::model::{DerivedCoefficients, Solution};
use cfld::oa;
use cfld::oa::MasterOracle;

fn main() {
    let inst = generate(&GenConfig {
        n_zones: 20, n_candidates: 20, n_competitors: 1,
        fixed_cost: 0.0, seed: 1, ..GenConfig::default()
    }).unwrap();
    let coeffs = DerivedCoefficients::from_instance(&inst);
    // Reproduce the pool right before the failing iteration-2 master solve.
    let mut pool = oa::CutPool::new();
    pool.add(oa::default_init(&inst), &coeffs);
    pool.add(Solution::closed(20), &coeffs);
    let mut m1 = oa::BnbMaster::with_node_cap(10_000_000);
    let s1 = m1.solve(&inst, &coeffs, &pool).unwrap();
    println!("iter1 master objective {:.3}, open {}", s1.objective, s1.solution.open_count());
    pool.add(s1.solution.clone(), &coeffs);
    // Diagnostics on the iteration-2 master.
    oa::debug_master_solve(&inst, &coeffs, &pool, Some(s1.solution), Some(7472.3656566719));
}
