use cfld::instancegen::{generate, GenConfig};
use cfld::model::{DerivedCoefficients, Instance};
use cfld::oa::{self, CutPool, MasterOracle, MasterSolution};
use std::time::Instant;

struct Timed(oa::BnbMaster);
impl MasterOracle for Timed {
    fn solve(&mut self, i: &Instance, c: &DerivedCoefficients, p: &CutPool) -> cfld::Result<MasterSolution> {
        let t = Instant::now();
        let r = self.0.solve(i, c, p);
        if let Ok(ms) = &r {
            eprintln!("  master T={}: obj {:.1}, {} nodes, {} fw, {:.1}s",
                p.len(), ms.objective, self.0.last_nodes, self.0.last_fw_iterations, t.elapsed().as_secs_f64());
        }
        r
    }
    fn describe(&self) -> &'static str { "bnb" }
}

fn main() {
    let inst = generate(&GenConfig {
        n_zones: 20, n_candidates: 20, n_competitors: 1,
        fixed_cost: 0.0, seed: 1, ..GenConfig::default()
    }).unwrap();
    let coeffs = DerivedCoefficients::from_instance(&inst);
    let mut master = Timed(oa::BnbMaster::default());
    let t = Instant::now();
    let r = oa::run(&inst, &coeffs, &mut master, &oa::default_init(&inst), &oa::OaCaps::default()).unwrap();
    println!("total: {} iters, profit {:.1}, {:?}, {:.1}s", r.iterations, r.profit, r.termination, t.elapsed().as_secs_f64());
}
