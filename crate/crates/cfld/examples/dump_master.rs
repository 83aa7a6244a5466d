use cfld::instancegen::{generate, GenConfig};
use cfld::model::{DerivedCoefficients, Solution};
use cfld::oa::{self, MasterOracle};

fn main() {
    let inst = generate(&GenConfig {
        n_zones: 20, n_candidates: 20, n_competitors: 1,
        fixed_cost: 0.0, seed: 1, ..GenConfig::default()
    }).unwrap();
    let coeffs = DerivedCoefficients::from_instance(&inst);
    let mut pool = oa::CutPool::new();
    pool.add(oa::default_init(&inst), &coeffs);
    pool.add(Solution::closed(20), &coeffs);
    let mut m1 = oa::BnbMaster::with_node_cap(10_000_000);
    let s1 = m1.solve(&inst, &coeffs, &pool).unwrap();
    eprintln!("iter1 objective {:.3}", s1.objective);
    pool.add(s1.solution.clone(), &coeffs);
    let model = cfld::formulations::build_oa_master(&inst, &coeffs, &pool);
    print!("{}", cfld::formulations::export::to_json(&model));
}
