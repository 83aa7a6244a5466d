//! Outer approximation: iterate master solves over an accumulating pool of
//! first-order cuts until the master revisits a recorded point.
//!
//! Each recorded binary point ȳ contributes one tangent row per zone,
//! β_i ≥ F̂_i(ȳ) + Σ_jr ∂F̂_i/∂y_jr·(y_jr − ȳ_jr), valid because F̂_i is
//! convex. The master minimizes costs plus Σ a_i β_i over the feasible set
//! under all pooled cuts, so its optimal value can only grow as cuts
//! accumulate and always bounds the true minimum from below. When a master
//! solution already belongs to the pool, its own cut pins β_i = F̂_i there and
//! the bound closes: that point is globally optimal.
//!
//! The loop starts from two cut points: the caller's initial solution
//! (by default everything open at the top level, where gradients are flattest)
//! and the all-closed point, which anchors the other extreme. A safeguard also
//! declares optimality when the master value reaches the best visited point's
//! value within 1e-9; the membership rule alone can cycle under floating-point
//! gradient noise.
//!
//! Master solves go through the [`MasterOracle`] boundary: exhaustive
//! enumeration for oracle-sized instances, a dedicated branch-and-bound for
//! larger ones, or an external MILP engine via exchange files.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::CfldError;
use crate::extsolver::{self, AdapterConfig};
use crate::formulations;
use crate::model::{
    capture_complement, gradient_fhat, min_objective_solution, profit, DerivedCoefficients,
    Instance, Solution,
};
use crate::relaxation::{FacilityStatus, LevelRange, NodeFixings, VertexChoices};
use crate::Result;

/// One recorded point with its tangent data.
#[derive(Debug, Clone)]
pub struct Cut {
    pub point: Solution,
    /// ∂F̂_i/∂y_jr at the point, zone × candidate × level.
    pub gradient: Vec<f64>,
    /// F̂_i at the point.
    pub intercepts: Vec<f64>,
}

/// Ordered pool of pairwise-distinct recorded points.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
}

impl CutPool {
    pub fn new() -> Self {
        CutPool::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Exact binary membership; points are binary so no tolerance enters.
    pub fn contains(&self, point: &Solution) -> bool {
        self.cuts.iter().any(|c| &c.point == point)
    }

    /// Record a point, computing its tangent data. Returns false on repeats.
    pub fn add(&mut self, point: Solution, coeffs: &DerivedCoefficients) -> bool {
        if self.contains(&point) {
            return false;
        }
        let frac = point.to_point(coeffs.num_levels());
        self.cuts.push(Cut {
            gradient: gradient_fhat(coeffs, &frac),
            intercepts: capture_complement(coeffs, &frac),
            point,
        });
        true
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cut> {
        self.cuts.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &Solution> {
        self.cuts.iter().map(|c| &c.point)
    }
}

/// Master objective of a feasible binary point under the pooled cuts:
/// costs plus Σ_i a_i · max(β^L_i, best cut value). With an empty pool the
/// betas rest at their lower bounds.
pub fn master_objective_value(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    pool: &CutPool,
    solution: &Solution,
) -> f64 {
    let (nc, nl) = (instance.num_candidates(), instance.num_levels());
    let mut value = 0.0;
    for (j, choice) in solution.choices().iter().enumerate() {
        if let Some(r) = choice {
            value += instance.fixed_cost(j) + instance.level_cost(j, *r);
        }
    }
    for i in 0..instance.num_zones() {
        let mut beta = coeffs.beta_lower(i);
        for cut in pool.iter() {
            let mut cv = cut.intercepts[i];
            for (j, choice) in solution.choices().iter().enumerate() {
                for r in 0..nl {
                    let y = match choice {
                        Some(cr) if *cr == r => 1.0,
                        _ => 0.0,
                    };
                    let ybar = match cut.point.choice(j) {
                        Some(cr) if cr == r => 1.0,
                        _ => 0.0,
                    };
                    if y != ybar {
                        cv += cut.gradient[(i * nc + j) * nl + r] * (y - ybar);
                    }
                }
            }
            beta = beta.max(cv);
        }
        value += instance.buying_power(i) * beta;
    }
    value
}

/// A master solution with its proven-optimal objective value.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub solution: Solution,
    pub objective: f64,
}

/// Pluggable boundary for solving the cut master to proven optimality.
pub trait MasterOracle {
    fn solve(
        &mut self,
        instance: &Instance,
        coeffs: &DerivedCoefficients,
        pool: &CutPool,
    ) -> Result<MasterSolution>;

    fn describe(&self) -> &'static str;
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The master revisited a recorded point: exact optimality.
    RepeatInT,
    /// The master value reached the best visited value within 1e-9.
    ObjectiveGap,
    /// Iteration cap; the incumbent is returned unproven.
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct OaReport {
    pub solution: Solution,
    pub profit: f64,
    /// Number of master solves.
    pub iterations: usize,
    /// Master objective per iteration; nondecreasing.
    pub master_objectives: Vec<f64>,
    pub termination: Termination,
    /// False only when the iteration cap was hit.
    pub proven: bool,
}

#[derive(Debug, Clone)]
pub struct OaCaps {
    pub max_iterations: usize,
}

impl Default for OaCaps {
    fn default() -> Self {
        OaCaps {
            max_iterations: 100,
        }
    }
}

/// The default initial point: every facility open at the highest level, where
/// the gradients are smallest in magnitude and the first cut is deepest.
pub fn default_init(instance: &Instance) -> Solution {
    let top = instance.num_levels() - 1;
    Solution::from_choices(vec![Some(top); instance.num_candidates()])
}

/// Run the outer-approximation loop.
pub fn run(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    master: &mut dyn MasterOracle,
    init: &Solution,
    caps: &OaCaps,
) -> Result<OaReport> {
    if init.num_candidates() != instance.num_candidates() {
        return Err(CfldError::InfeasibleSolution(format!(
            "initial solution covers {} candidates, instance has {}",
            init.num_candidates(),
            instance.num_candidates()
        )));
    }
    let mut pool = CutPool::new();
    pool.add(init.clone(), coeffs);
    pool.add(Solution::closed(instance.num_candidates()), coeffs);

    let mut incumbent = init.clone();
    let mut incumbent_value = min_objective_solution(instance, coeffs, init)?;
    for point in pool.points() {
        let value = min_objective_solution(instance, coeffs, point)?;
        if value < incumbent_value {
            incumbent = point.clone();
            incumbent_value = value;
        }
    }

    let mut master_objectives = Vec::new();
    for iteration in 1..=caps.max_iterations {
        let ms = master.solve(instance, coeffs, &pool).map_err(|e| {
            CfldError::solver_at(
                e.to_string(),
                format!("{} master, iteration {iteration}", master.describe()),
            )
        })?;
        master_objectives.push(ms.objective);

        if pool.contains(&ms.solution) {
            let phi = profit(instance, coeffs, &ms.solution)?;
            return Ok(OaReport {
                solution: ms.solution,
                profit: phi,
                iterations: iteration,
                master_objectives,
                termination: Termination::RepeatInT,
                proven: true,
            });
        }

        let value = min_objective_solution(instance, coeffs, &ms.solution)?;
        if value < incumbent_value {
            incumbent = ms.solution.clone();
            incumbent_value = value;
        }
        // The master is a relaxation: once its value meets the best visited
        // value, that visit is optimal.
        if ms.objective >= incumbent_value - 1e-9 {
            let phi = profit(instance, coeffs, &incumbent)?;
            return Ok(OaReport {
                solution: incumbent,
                profit: phi,
                iterations: iteration,
                master_objectives,
                termination: Termination::ObjectiveGap,
                proven: true,
            });
        }
        pool.add(ms.solution, coeffs);
    }

    let phi = profit(instance, coeffs, &incumbent)?;
    Ok(OaReport {
        solution: incumbent,
        profit: phi,
        iterations: caps.max_iterations,
        master_objectives,
        termination: Termination::IterationCap,
        proven: false,
    })
}

/// Exact master by exhaustive enumeration of the feasible set; for fixed
/// binaries the optimal β_i is the larger of its lower bound and the best cut
/// value, so the whole master collapses to one evaluation per point.
pub struct ExhaustiveMaster {
    pub cap: u128,
}

impl Default for ExhaustiveMaster {
    fn default() -> Self {
        ExhaustiveMaster {
            cap: crate::oracle::DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl MasterOracle for ExhaustiveMaster {
    fn solve(
        &mut self,
        instance: &Instance,
        coeffs: &DerivedCoefficients,
        pool: &CutPool,
    ) -> Result<MasterSolution> {
        let nc = instance.num_candidates();
        let nl = instance.num_levels();
        let radix = nl as u128 + 1;
        let mut total: u128 = 1;
        for _ in 0..nc {
            total = total.checked_mul(radix).ok_or(CfldError::OracleTooLarge {
                configurations: u128::MAX,
                cap: self.cap,
            })?;
        }
        if total > self.cap {
            return Err(CfldError::OracleTooLarge {
                configurations: total,
                cap: self.cap,
            });
        }

        let mut digits = vec![0usize; nc];
        let mut best: Option<(f64, Solution)> = None;
        for _ in 0..total {
            let sol = Solution::from_choices(
                digits
                    .iter()
                    .map(|&d| if d == 0 { None } else { Some(d - 1) })
                    .collect(),
            );
            let value = master_objective_value(instance, coeffs, pool, &sol);
            let better = match &best {
                None => true,
                Some((bv, bs)) => {
                    value < *bv || (value == *bv && sol.lex_y_key(nl) < bs.lex_y_key(nl))
                }
            };
            if better {
                best = Some((value, sol));
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < radix as usize {
                    break;
                }
                *d = 0;
            }
        }
        let (objective, solution) = best.expect("nonempty enumeration");
        Ok(MasterSolution {
            solution,
            objective,
        })
    }

    fn describe(&self) -> &'static str {
        "exhaustive"
    }
}

/// Exact master by branch-and-bound over facility statuses and level ranges.
///
/// The node bound relaxes each cut independently: with gradients nonpositive,
/// a cut's minimum over the undecided box sets every undecided y_jr to one, so
/// β_i is bounded below by max(β^L_i, max over cuts of that box minimum), and
/// the fixed opening decisions contribute their cheapest surviving level cost.
pub struct BnbMaster {
    pub node_cap: usize,
    /// Nodes explored by the most recent solve.
    pub last_nodes: usize,
    /// Smoothed-bound iterations spent by the most recent solve.
    pub last_fw_iterations: usize,
    /// Optimal point of the previous master solve; one added cut rarely moves
    /// the optimum far, so it seeds the greedy incumbent search.
    last_solution: Option<Solution>,
}

impl Default for BnbMaster {
    fn default() -> Self {
        BnbMaster {
            node_cap: 10_000_000,
            last_nodes: 0,
            last_fw_iterations: 0,
            last_solution: None,
        }
    }
}

impl BnbMaster {
    pub fn with_node_cap(node_cap: usize) -> Self {
        BnbMaster {
            node_cap,
            ..BnbMaster::default()
        }
    }
}

struct MasterNode {
    statuses: Vec<FacilityStatus>,
    bound: f64,
    /// Terminal point of the bound solve: warm start and branching guide.
    point: Vec<f64>,
    seq: usize,
}

impl Ord for MasterNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap()
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for MasterNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for MasterNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MasterNode {}

/// Per-master-solve tables behind the node bound.
///
/// A cut's minimum over the completions of a node fixes, per facility
/// independently, the cheapest admissible contribution: 0 when closed, the
/// most negative gradient entry of the surviving range when open, and the
/// smaller of the two when still free (gradients are strictly negative, so a
/// free facility's minimum is its best single level — at most one level can
/// be active in any completion). `base` pre-aggregates the all-free minimum
/// per (cut, zone), so bounding a node costs only the adjustment for its
/// non-free facilities.
struct MasterTables {
    num_zones: usize,
    num_candidates: usize,
    num_levels: usize,
    /// g_{t,i,j,r}, level-fastest.
    gradients: Vec<f64>,
    /// min_r g_{t,i,j,r}.
    full_min: Vec<f64>,
    /// const_{t,i} + Σ_j full_min: the all-free per-cut minimum.
    base: Vec<f64>,
    /// const_{t,i} = F̂_i(ȳ_t) − Σ g·ȳ_t.
    constants: Vec<f64>,
    level_costs: Vec<f64>,
    fixed_costs: Vec<f64>,
    buying_power: Vec<f64>,
    beta_lower: Vec<f64>,
    num_cuts: usize,
}

impl MasterTables {
    fn build(instance: &Instance, coeffs: &DerivedCoefficients, pool: &CutPool) -> Self {
        let (nz, nc, nl) = (
            instance.num_zones(),
            instance.num_candidates(),
            instance.num_levels(),
        );
        let nt = pool.len();
        let mut gradients = vec![0.0; nt * nz * nc * nl];
        let mut full_min = vec![0.0; nt * nz * nc];
        let mut base = Vec::with_capacity(nt * nz);
        let mut constants = Vec::with_capacity(nt * nz);
        for (t, cut) in pool.iter().enumerate() {
            let ybar = cut.point.y_values(nl);
            for i in 0..nz {
                let mut c = cut.intercepts[i];
                let mut free_total = 0.0;
                for j in 0..nc {
                    let gbase = (((t * nz) + i) * nc + j) * nl;
                    let mut best = f64::INFINITY;
                    for r in 0..nl {
                        let g = cut.gradient[(i * nc + j) * nl + r];
                        c -= g * ybar[j * nl + r];
                        gradients[gbase + r] = g;
                        best = best.min(g);
                    }
                    full_min[((t * nz) + i) * nc + j] = best;
                    free_total += best;
                }
                constants.push(c);
                base.push(c + free_total);
            }
        }
        let mut level_costs = Vec::with_capacity(nc * nl);
        for j in 0..nc {
            for r in 0..nl {
                level_costs.push(instance.level_cost(j, r));
            }
        }
        MasterTables {
            num_zones: nz,
            num_candidates: nc,
            num_levels: nl,
            gradients,
            full_min,
            base,
            constants,
            level_costs,
            fixed_costs: (0..nc).map(|j| instance.fixed_cost(j)).collect(),
            buying_power: (0..nz).map(|i| instance.buying_power(i)).collect(),
            beta_lower: (0..nz).map(|i| coeffs.beta_lower(i)).collect(),
            num_cuts: nt,
        }
    }

    fn range_min(&self, t: usize, i: usize, j: usize, lo: usize, hi: usize) -> f64 {
        let gbase = (((t * self.num_zones) + i) * self.num_candidates + j) * self.num_levels;
        let mut best = f64::INFINITY;
        for r in lo..=hi {
            best = best.min(self.gradients[gbase + r]);
        }
        best
    }

    /// Node lower bound for the given statuses: the better of two valid
    /// relaxations, plus a branching hint.
    ///
    /// The decoupled pass bounds each zone's β by the clipped per-cut minimum
    /// over completions and adds the cheapest fixed costs separately. The
    /// coupled pass then keeps, per zone, only its active cut (dropping the
    /// clip for zones whose active value clears β^L), which makes the whole
    /// expression affine in y and therefore separable per facility — each
    /// facility now weighs its opening cost against its demand-weighted
    /// gradient revenue jointly, which is what actually prunes open/closed
    /// decisions.
    /// Decoupled pass: per zone, the clipped best per-cut minimum over the
    /// node's completions, plus the cheapest fixed costs. Also reports each
    /// zone's active cut for the coupled pass.
    fn clipped_per_cut_bound(
        &self,
        statuses: &[FacilityStatus],
    ) -> (f64, Vec<usize>, Vec<f64>) {
        let (nz, nc, nl) = (self.num_zones, self.num_candidates, self.num_levels);
        let mut cost = 0.0;
        let mut non_free: Vec<(usize, &FacilityStatus)> = Vec::new();
        for (j, status) in statuses.iter().enumerate() {
            match status {
                FacilityStatus::Free => {}
                FacilityStatus::Closed => non_free.push((j, status)),
                FacilityStatus::Open(range) => {
                    let cheapest = range
                        .iter()
                        .map(|r| self.level_costs[j * nl + r])
                        .fold(f64::INFINITY, f64::min);
                    cost += self.fixed_costs[j] + cheapest;
                    non_free.push((j, status));
                }
            }
        }

        let mut beta_part = 0.0;
        let mut active_cut = vec![usize::MAX; nz]; // MAX: clipped at β^L
        let mut active_const = vec![0.0; nz];
        for i in 0..nz {
            let mut beta = self.beta_lower[i];
            let mut best_cut = usize::MAX;
            for t in 0..self.num_cuts {
                let mut cv = self.base[t * nz + i];
                for &(j, status) in &non_free {
                    let free_contrib = self.full_min[((t * nz) + i) * nc + j];
                    match status {
                        FacilityStatus::Closed => cv -= free_contrib,
                        FacilityStatus::Open(range) => {
                            cv += self.range_min(t, i, j, range.lo, range.hi) - free_contrib;
                        }
                        FacilityStatus::Free => unreachable!(),
                    }
                }
                if cv > beta {
                    beta = cv;
                    best_cut = t;
                }
            }
            beta_part += self.buying_power[i] * beta;
            active_cut[i] = best_cut;
            if best_cut != usize::MAX {
                // Reconstruct the cut constant: base minus the all-free minima.
                let mut c = self.base[best_cut * nz + i];
                for j in 0..nc {
                    c -= self.full_min[((best_cut * nz) + i) * nc + j];
                }
                active_const[i] = c;
            }
        }
        (cost + beta_part, active_cut, active_const)
    }

    fn node_bound(&self, statuses: &[FacilityStatus]) -> NodeBound {
        let (nz, nc, nl) = (self.num_zones, self.num_candidates, self.num_levels);
        let (decoupled, mut active_cut, mut active_const) =
            self.clipped_per_cut_bound(statuses);

        // Coupled passes: evaluate the separable bound for the current per-zone
        // cut selection, then re-select each zone's cut as the one binding at
        // the inner minimizer and repeat. Every round is a valid bound (it is
        // the dual function at one multiplier choice); best-response usually
        // settles within a few rounds.
        let mut best_coupled = f64::NEG_INFINITY;
        let mut branch_hint: Option<usize> = None;
        let mut weighted = vec![0.0; nc * nl];
        let mut inner_choice: Vec<Option<usize>> = vec![None; nc];
        for _round in 0..4 {
            weighted.fill(0.0);
            let mut coupled = 0.0;
            for i in 0..nz {
                let t = active_cut[i];
                if t == usize::MAX {
                    coupled += self.buying_power[i] * self.beta_lower[i];
                    continue;
                }
                coupled += self.buying_power[i] * active_const[i];
                let a = self.buying_power[i];
                let gbase = ((t * nz) + i) * nc * nl;
                for (w, g) in weighted
                    .iter_mut()
                    .zip(&self.gradients[gbase..gbase + nc * nl])
                {
                    *w += a * g;
                }
            }
            let mut round_hint: Option<(usize, f64)> = None;
            for (j, status) in statuses.iter().enumerate() {
                let choice_value = |r: usize| {
                    self.fixed_costs[j] + self.level_costs[j * nl + r] + weighted[j * nl + r]
                };
                let (contribution, choice) = match status {
                    FacilityStatus::Closed => (0.0, None),
                    FacilityStatus::Free => {
                        let mut best = (0.0f64, None);
                        for r in 0..nl {
                            let v = choice_value(r);
                            if v < best.0 {
                                best = (v, Some(r));
                            }
                        }
                        if best.0 < 0.0
                            && round_hint.map(|(_, v)| best.0 < v).unwrap_or(true)
                        {
                            round_hint = Some((j, best.0));
                        }
                        best
                    }
                    FacilityStatus::Open(range) => {
                        let mut best = (f64::INFINITY, None);
                        for r in range.iter() {
                            let v = choice_value(r);
                            if v < best.0 {
                                best = (v, Some(r));
                            }
                        }
                        best
                    }
                };
                coupled += contribution;
                inner_choice[j] = choice;
            }
            if coupled > best_coupled {
                best_coupled = coupled;
                branch_hint = round_hint.map(|(j, _)| j);
            } else {
                break;
            }

            // Re-select each zone's cut as the one binding at the inner
            // minimizer (clipped at β^L).
            let mut changed = false;
            for i in 0..nz {
                let mut best = (self.beta_lower[i], usize::MAX);
                for t in 0..self.num_cuts {
                    let mut cv = self.base[t * nz + i];
                    for j in 0..nc {
                        let fm = self.full_min[((t * nz) + i) * nc + j];
                        let actual = match inner_choice[j] {
                            Some(r) => {
                                self.gradients[(((t * nz) + i) * nc + j) * nl + r]
                            }
                            None => 0.0,
                        };
                        cv += actual - fm;
                    }
                    if cv > best.0 {
                        best = (cv, t);
                    }
                }
                if best.1 != active_cut[i] {
                    changed = true;
                    active_cut[i] = best.1;
                    if best.1 != usize::MAX {
                        let mut c = self.base[best.1 * nz + i];
                        for j in 0..nc {
                            c -= self.full_min[((best.1 * nz) + i) * nc + j];
                        }
                        active_const[i] = c;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        NodeBound {
            bound: decoupled.max(best_coupled),
            branch_hint,
        }
    }
}

/// Node bound plus the facility the coupled pass found most contested.
struct NodeBound {
    bound: f64,
    branch_hint: Option<usize>,
}

impl BnbMaster {
    /// Greedy single-facility improvement sweeps from a starting point.
    fn polish(
        instance: &Instance,
        coeffs: &DerivedCoefficients,
        pool: &CutPool,
        start: Solution,
    ) -> (Solution, f64) {
        let (nc, nl) = (instance.num_candidates(), instance.num_levels());
        let mut best = start;
        let mut best_value = master_objective_value(instance, coeffs, pool, &best);
        for _ in 0..50 {
            let mut improved = false;
            for j in 0..nc {
                let mut local_best: Option<(f64, Option<usize>)> = None;
                for choice in std::iter::once(None).chain((0..nl).map(Some)) {
                    if choice == best.choice(j) {
                        continue;
                    }
                    let mut probe = best.choices().to_vec();
                    probe[j] = choice;
                    let value = master_objective_value(
                        instance,
                        coeffs,
                        pool,
                        &Solution::from_choices(probe),
                    );
                    if value < best_value - 1e-12
                        && local_best.map(|(v, _)| value < v).unwrap_or(true)
                    {
                        local_best = Some((value, choice));
                    }
                }
                if let Some((value, choice)) = local_best {
                    let mut next = best.choices().to_vec();
                    next[j] = choice;
                    best = Solution::from_choices(next);
                    best_value = value;
                    improved = true;
                }
            }

            // Swap neighborhood: close one open facility and open a closed
            // one; deals with the cardinality plateaus single moves cannot
            // cross.
            let open: Vec<usize> = (0..nc).filter(|&j| best.is_open(j)).collect();
            let closed: Vec<usize> = (0..nc).filter(|&j| !best.is_open(j)).collect();
            let mut best_swap: Option<(f64, usize, usize, usize)> = None;
            for &j_close in &open {
                for &j_open in &closed {
                    for r in 0..nl {
                        let mut probe = best.choices().to_vec();
                        probe[j_close] = None;
                        probe[j_open] = Some(r);
                        let value = master_objective_value(
                            instance,
                            coeffs,
                            pool,
                            &Solution::from_choices(probe),
                        );
                        if value < best_value - 1e-12
                            && best_swap.map(|(v, _, _, _)| value < v).unwrap_or(true)
                        {
                            best_swap = Some((value, j_close, j_open, r));
                        }
                    }
                }
            }
            if let Some((value, j_close, j_open, r)) = best_swap {
                let mut next = best.choices().to_vec();
                next[j_close] = None;
                next[j_open] = Some(r);
                best = Solution::from_choices(next);
                best_value = value;
                improved = true;
            }

            if !improved {
                break;
            }
        }
        (best, best_value)
    }
}

impl MasterOracle for BnbMaster {
    fn solve(
        &mut self,
        instance: &Instance,
        coeffs: &DerivedCoefficients,
        pool: &CutPool,
    ) -> Result<MasterSolution> {
        let (nc, nl) = (instance.num_candidates(), instance.num_levels());
        let tables = MasterTables::build(instance, coeffs, pool);
        let mut smoothed = SmoothedMasterFw::new(&tables);

        // Incumbents: all recorded points, the previous optimum, and greedy
        // polish from the best of them.
        let mut incumbent = Solution::closed(nc);
        let mut incumbent_value = master_objective_value(instance, coeffs, pool, &incumbent);
        let offer = |incumbent: &mut Solution, incumbent_value: &mut f64, sol: Solution| {
            let value = master_objective_value(instance, coeffs, pool, &sol);
            if value < *incumbent_value {
                *incumbent = sol;
                *incumbent_value = value;
            }
        };
        for point in pool.points() {
            offer(&mut incumbent, &mut incumbent_value, point.clone());
        }
        if let Some(previous) = &self.last_solution {
            if previous.num_candidates() == nc {
                offer(&mut incumbent, &mut incumbent_value, previous.clone());
            }
        }
        let (polished, polished_value) = Self::polish(instance, coeffs, pool, incumbent.clone());
        if polished_value < incumbent_value {
            incumbent = polished;
            incumbent_value = polished_value;
        }

        // Root bound from a long smoothed solve; its rounded point usually
        // lands on (or next to) the optimum and seeds the incumbent.
        let root_statuses = vec![FacilityStatus::Free; nc];
        let root_fixings = NodeFixings::from_statuses(root_statuses.clone());
        self.last_nodes = 0;
        self.last_fw_iterations = 0;
        let root = smoothed.solve_annealed(&root_fixings, &vec![0.0; nc * nl], None, 6000, 200, 64.0);
        self.last_fw_iterations += root.iterations;
        let rounded = round_master_point(&root.point, nc, nl);
        let (rp, rv) = Self::polish(instance, coeffs, pool, rounded);
        if rv < incumbent_value {
            incumbent = rp;
            incumbent_value = rv;
        }
        if std::env::var_os("CFLD_MASTER_DEBUG").is_some() {
            eprintln!(
                "    [debug] root bound {:.1}, incumbent after polish {:.1}",
                root.bound, incumbent_value
            );
        }

        let mut queue = BinaryHeap::new();
        let root_combinatorial = tables.clipped_per_cut_bound(&root_statuses).0;
        queue.push(MasterNode {
            statuses: root_statuses,
            bound: root.bound.max(root_combinatorial),
            point: root.point,
            seq: 0,
        });
        let mut seq = 1usize;
        let mut explored = 0usize;

        while let Some(node) = queue.pop() {
            if node.bound >= incumbent_value {
                continue;
            }
            explored += 1;
            self.last_nodes = explored;
            if explored > self.node_cap {
                return Err(CfldError::solver(format!(
                    "master node cap {} exceeded; best value {incumbent_value} not proven",
                    self.node_cap
                )));
            }

            let Some(children) = branch_master(&node.statuses, &node.point, nl) else {
                // Integral terminal point: evaluate it exactly.
                let sol = round_master_point_solution(&node.point, nc, nl);
                offer(&mut incumbent, &mut incumbent_value, sol);
                continue;
            };
            for statuses in children {
                // Cheap per-facility bound first; the smoothed bound only for
                // survivors.
                let quick = tables.node_bound(&statuses);
                if quick.bound >= incumbent_value {
                    continue;
                }
                let fixings = NodeFixings::from_statuses(statuses.clone());
                let out = smoothed.solve_annealed(
                    &fixings,
                    &node.point,
                    Some(incumbent_value),
                    200,
                    16,
                    8.0,
                );
                self.last_fw_iterations += out.iterations;
                offer(
                    &mut incumbent,
                    &mut incumbent_value,
                    round_master_point_solution(&out.point, nc, nl),
                );
                let bound = out.bound.max(quick.bound);
                if bound < incumbent_value {
                    queue.push(MasterNode {
                        statuses,
                        bound,
                        point: out.point,
                        seq,
                    });
                    seq += 1;
                }
            }
        }

        self.last_solution = Some(incumbent.clone());
        Ok(MasterSolution {
            solution: incumbent,
            objective: incumbent_value,
        })
    }

    fn describe(&self) -> &'static str {
        "bnb"
    }
}



/// Near-LP node bound for the master: pairwise Frank–Wolfe on the smoothed
/// relaxation.
///
/// Over the relaxed region, the master objective is
/// cost·y + Σ_i a_i·max(β^L_i, max_t cut_{t,i}(y)) — convex piecewise-linear.
/// Replacing each zone's max by a log-sum-exp with temperature σ gives a
/// smooth convex overestimate within Δ = σ·ln(T+1)·Σ_i a_i of it, so at any
/// iterate y with Frank–Wolfe gap g the value Φ_σ(y) − g − Δ is a certified
/// lower bound on the node's master optimum. Warm-started from the parent's
/// terminal point, a handful of weight-transfer steps per node recovers most
/// of the LP bound, which is what actually prunes this tree — the per-facility
/// combinatorial bounds stall an order of magnitude below it.
struct SmoothedMasterFw<'a> {
    tables: &'a MasterTables,
    /// Current smoothing temperature; annealed down to `sigma_target`.
    sigma: f64,
    sigma_target: f64,
    /// ln(T+1)·Σ_i a_i: the certificate penalty is σ times this.
    penalty_rate: f64,
    /// Certificate penalty at the current σ.
    delta: f64,
    /// Scratch: current iterate and its state.
    y: Vec<f64>,
    cut_values: Vec<f64>,
    cost_dot: f64,
    active: Vec<(VertexChoices, f64)>,
    gradient: Vec<f64>,
    weights: Vec<f64>,
    cost_vec: Vec<f64>,
}

struct SmoothedOutcome {
    bound: f64,
    point: Vec<f64>,
    iterations: usize,
}

impl<'a> SmoothedMasterFw<'a> {
    fn new(tables: &'a MasterTables) -> Self {
        let (nz, nc, nl) = (tables.num_zones, tables.num_candidates, tables.num_levels);
        let total_demand: f64 = tables.buying_power.iter().sum();
        // Δ around 1e-4 of total demand: small against the value differences
        // the tree must resolve, large enough to keep the smoothing tractable.
        let delta = (2e-4 * total_demand).max(1e-9);
        let penalty_rate = ((tables.num_cuts + 1) as f64).ln().max(1.0) * total_demand;
        let sigma = delta / penalty_rate;
        let mut cost_vec = vec![0.0; nc * nl];
        for j in 0..nc {
            for r in 0..nl {
                cost_vec[j * nl + r] = tables.fixed_costs[j] + tables.level_costs[j * nl + r];
            }
        }
        SmoothedMasterFw {
            tables,
            sigma,
            sigma_target: sigma,
            penalty_rate,
            delta,
            y: vec![0.0; nc * nl],
            cut_values: vec![0.0; tables.num_cuts * nz],
            cost_dot: 0.0,
            active: Vec::new(),
            gradient: vec![0.0; nc * nl],
            weights: vec![0.0; tables.num_cuts + 1],
            cost_vec,
        }
    }

    fn refresh(&mut self) {
        let tb = self.tables;
        let (nz, nc, nl) = (tb.num_zones, tb.num_candidates, tb.num_levels);
        let total: f64 = self.active.iter().map(|(_, w)| w).sum();
        self.y.fill(0.0);
        for (vertex, weight) in &mut self.active {
            *weight /= total;
            for (j, choice) in vertex.iter().enumerate() {
                if let Some(r) = choice {
                    self.y[j * nl + r] += *weight;
                }
            }
        }
        for t in 0..tb.num_cuts {
            for i in 0..nz {
                let gbase = ((t * nz) + i) * nc * nl;
                let mut v = tb.constants[t * nz + i];
                for (g, yv) in tb.gradients[gbase..gbase + nc * nl].iter().zip(&self.y) {
                    v += g * yv;
                }
                self.cut_values[t * nz + i] = v;
            }
        }
        self.cost_dot = self.cost_vec.iter().zip(&self.y).map(|(c, y)| c * y).sum();
    }

    /// Smoothed objective at the current state.
    fn value(&self) -> f64 {
        let tb = self.tables;
        let nz = tb.num_zones;
        let mut acc = self.cost_dot;
        for i in 0..nz {
            acc += tb.buying_power[i] * self.zone_lse(i);
        }
        acc
    }

    fn zone_lse(&self, i: usize) -> f64 {
        let tb = self.tables;
        let mut m = tb.beta_lower[i];
        for t in 0..tb.num_cuts {
            m = m.max(self.cut_values[t * tb.num_zones + i]);
        }
        let mut z = ((tb.beta_lower[i] - m) / self.sigma).exp();
        for t in 0..tb.num_cuts {
            z += ((self.cut_values[t * tb.num_zones + i] - m) / self.sigma).exp();
        }
        m + self.sigma * z.ln()
    }

    /// Gradient of the smoothed objective; skips negligible softmax weights.
    fn compute_gradient(&mut self) {
        let tb = self.tables;
        let (nz, nc, nl) = (tb.num_zones, tb.num_candidates, tb.num_levels);
        self.gradient.copy_from_slice(&self.cost_vec);
        for i in 0..nz {
            let mut m = tb.beta_lower[i];
            for t in 0..tb.num_cuts {
                m = m.max(self.cut_values[t * nz + i]);
            }
            let mut z = ((tb.beta_lower[i] - m) / self.sigma).exp();
            for t in 0..tb.num_cuts {
                let w = ((self.cut_values[t * nz + i] - m) / self.sigma).exp();
                self.weights[t] = w;
                z += w;
            }
            let scale = tb.buying_power[i] / z;
            for t in 0..tb.num_cuts {
                let w = self.weights[t] * scale;
                if w < 1e-12 {
                    continue;
                }
                let gbase = ((t * nz) + i) * nc * nl;
                for (gv, g) in self
                    .gradient
                    .iter_mut()
                    .zip(&tb.gradients[gbase..gbase + nc * nl])
                {
                    *gv += w * g;
                }
            }
        }
    }

    /// Cut-value and cost slopes along `to − from`.
    fn pair_slopes(&self, to: &VertexChoices, from: &VertexChoices) -> (Vec<f64>, f64) {
        let tb = self.tables;
        let (nz, nc, nl) = (tb.num_zones, tb.num_candidates, tb.num_levels);
        let mut slopes = vec![0.0; tb.num_cuts * nz];
        let mut cost_slope = 0.0;
        for j in 0..to.len() {
            if to[j] == from[j] {
                continue;
            }
            if let Some(r) = to[j] {
                cost_slope += self.cost_vec[j * nl + r];
            }
            if let Some(r) = from[j] {
                cost_slope -= self.cost_vec[j * nl + r];
            }
            for t in 0..tb.num_cuts {
                for i in 0..nz {
                    let gbase = ((t * nz) + i) * nc * nl + j * nl;
                    let mut d = 0.0;
                    if let Some(r) = to[j] {
                        d += tb.gradients[gbase + r];
                    }
                    if let Some(r) = from[j] {
                        d -= tb.gradients[gbase + r];
                    }
                    slopes[t * nz + i] += d;
                }
            }
        }
        (slopes, cost_slope)
    }

    /// Directional derivative of the smoothed objective at offset γ.
    fn dir_derivative(&self, gamma: f64, slopes: &[f64], cost_slope: f64) -> f64 {
        let tb = self.tables;
        let nz = tb.num_zones;
        let mut acc = cost_slope;
        for i in 0..nz {
            // Softmax weights of the moved cut values.
            let mut m = tb.beta_lower[i];
            for t in 0..tb.num_cuts {
                let v = self.cut_values[t * nz + i] + gamma * slopes[t * nz + i];
                m = m.max(v);
            }
            let mut z = ((tb.beta_lower[i] - m) / self.sigma).exp();
            let mut num = 0.0;
            for t in 0..tb.num_cuts {
                let v = self.cut_values[t * nz + i] + gamma * slopes[t * nz + i];
                let w = ((v - m) / self.sigma).exp();
                z += w;
                num += w * slopes[t * nz + i];
            }
            acc += tb.buying_power[i] * num / z;
        }
        acc
    }

    fn line_search(&self, gamma_max: f64, slopes: &[f64], cost_slope: f64) -> f64 {
        if self.dir_derivative(gamma_max, slopes, cost_slope) <= 0.0 {
            return gamma_max;
        }
        if self.dir_derivative(0.0, slopes, cost_slope) >= 0.0 {
            return 0.0;
        }
        // A coarse root suffices: the step only drives the next gap, the
        // certificate never depends on step quality.
        let (mut lo, mut hi) = (0.0f64, gamma_max);
        for _ in 0..14 {
            if hi - lo < 1e-5 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.dir_derivative(mid, slopes, cost_slope) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn apply_step(
        &mut self,
        gamma: f64,
        to: &VertexChoices,
        from: &VertexChoices,
        slopes: &[f64],
        cost_slope: f64,
    ) {
        let nl = self.tables.num_levels;
        for j in 0..to.len() {
            if to[j] != from[j] {
                if let Some(r) = to[j] {
                    self.y[j * nl + r] += gamma;
                }
                if let Some(r) = from[j] {
                    self.y[j * nl + r] -= gamma;
                }
            }
        }
        for (v, s) in self.cut_values.iter_mut().zip(slopes) {
            *v += gamma * s;
        }
        self.cost_dot += gamma * cost_slope;
    }

    fn vertex_dot(&self, g: &[f64], vertex: &VertexChoices) -> f64 {
        let nl = self.tables.num_levels;
        vertex
            .iter()
            .enumerate()
            .map(|(j, choice)| match choice {
                Some(r) => g[j * nl + r],
                None => 0.0,
            })
            .sum()
    }

    /// Cold-start solve with σ-continuation: descend at a smooth temperature
    /// first, then tighten toward the target. Every phase certifies at its own
    /// penalty, so the best bound seen is valid.
    fn solve_annealed(
        &mut self,
        fixings: &NodeFixings,
        warm: &[f64],
        cutoff: Option<f64>,
        budget: usize,
        stall_window: usize,
        start_factor: f64,
    ) -> SmoothedOutcome {
        let mut sigma = self.sigma_target * start_factor;
        let mut point = warm.to_vec();
        let mut best = f64::NEG_INFINITY;
        let mut spent = 0usize;
        loop {
            sigma = sigma.max(self.sigma_target);
            self.sigma = sigma;
            self.delta = sigma * self.penalty_rate;
            let phase_budget = (budget - spent).min(budget / 3).max(200);
            let out = self.solve(fixings, &point, cutoff, phase_budget, stall_window);
            spent += out.iterations.max(1);
            point = out.point;
            best = best.max(out.bound);
            let done = sigma <= self.sigma_target || spent >= budget;
            let pruned = cutoff.map(|c| best >= c).unwrap_or(false);
            if done || pruned {
                return SmoothedOutcome {
                    bound: best,
                    point,
                    iterations: spent,
                };
            }
            sigma /= 4.0;
        }
    }

    /// Minimize from `warm` under `fixings`; stop early once the certified
    /// bound clears `cutoff` or the gap target is met.
    fn solve(
        &mut self,
        fixings: &NodeFixings,
        warm: &[f64],
        cutoff: Option<f64>,
        max_iterations: usize,
        stall_window: usize,
    ) -> SmoothedOutcome {
        let (nc, nl) = (self.tables.num_candidates, self.tables.num_levels);
        let repaired = crate::relaxation::repair_init(
            &crate::model::FractionalPoint::from_raw(warm.to_vec(), nc, nl),
            fixings,
            nl,
        );
        self.active = crate::relaxation::decompose(&repaired, nc, nl);
        self.refresh();

        let mut iterations = 0;
        let mut best_bound = f64::NEG_INFINITY;
        let mut last_improvement = 0usize;
        loop {
            if iterations > 0 && iterations % 64 == 0 {
                self.refresh();
            }
            self.compute_gradient();
            let target = crate::relaxation::lmo_choices(&self.gradient, fixings, nl);
            let mut at_y = 0.0;
            for (gv, yv) in self.gradient.iter().zip(&self.y) {
                at_y += gv * yv;
            }
            let target_dot = target
                .iter()
                .enumerate()
                .map(|(j, choice)| match choice {
                    Some(r) => self.gradient[j * nl + r],
                    None => 0.0,
                })
                .sum::<f64>();
            let gap = at_y - target_dot;
            let value = self.value();
            let bound = value - gap - self.delta;
            if bound > best_bound + 0.01 * self.delta {
                best_bound = bound;
                last_improvement = iterations;
            }
            // Exits: pruned by the cutoff, gap small against the smoothing
            // penalty already paid, bound stalled, or out of budget.
            let cut_hit = cutoff.map(|c| bound >= c).unwrap_or(false);
            let converged = gap <= self.delta;
            // Give up on stalls only when the cutoff is out of reach; nodes
            // within a few penalties of pruning earn a longer budget.
            let within_reach = cutoff
                .map(|c| c - bound <= 4.0 * self.delta)
                .unwrap_or(false);
            let window = if within_reach {
                5 * stall_window
            } else {
                stall_window
            };
            let stalled = iterations >= last_improvement + window;
            if cut_hit || converged || stalled || iterations >= max_iterations {
                // Certify from a fresh rebuild; incremental drift must not
                // leak into the reported bound.
                self.refresh();
                self.compute_gradient();
                let target = crate::relaxation::lmo_choices(&self.gradient, fixings, nl);
                let mut at_y = 0.0;
                for (gv, yv) in self.gradient.iter().zip(&self.y) {
                    at_y += gv * yv;
                }
                let target_dot = target
                    .iter()
                    .enumerate()
                    .map(|(j, choice)| match choice {
                        Some(r) => self.gradient[j * nl + r],
                        None => 0.0,
                    })
                    .sum::<f64>();
                let gap = at_y - target_dot;
                let value = self.value();
                return SmoothedOutcome {
                    bound: value - gap - self.delta,
                    point: self.y.clone(),
                    iterations,
                };
            }

            // Pairwise step: move weight from the worst active vertex.
            let mut away_idx = 0;
            let mut away_dot = f64::NEG_INFINITY;
            for (idx, (vertex, _)) in self.active.iter().enumerate() {
                let dot = self.vertex_dot(&self.gradient, vertex);
                if dot > away_dot {
                    away_dot = dot;
                    away_idx = idx;
                }
            }
            let away = self.active[away_idx].0.clone();
            if away == target {
                // Every active vertex ties the target: y is optimal over its
                // own support, and the gap check above already passed.
                return SmoothedOutcome {
                    bound,
                    point: self.y.clone(),
                    iterations,
                };
            }
            let (slopes, cost_slope) = self.pair_slopes(&target, &away);
            let gamma_max = self.active[away_idx].1;
            let gamma = self.line_search(gamma_max, &slopes, cost_slope);
            if gamma <= 0.0 {
                return SmoothedOutcome {
                    bound,
                    point: self.y.clone(),
                    iterations,
                };
            }
            self.apply_step(gamma, &target, &away, &slopes, cost_slope);
            self.active[away_idx].1 -= gamma;
            if self.active[away_idx].1 <= 1e-15 {
                self.active.swap_remove(away_idx);
            }
            match self.active.iter_mut().find(|(v, _)| v == &target) {
                Some((_, w)) => *w += gamma,
                None => self.active.push((target.clone(), gamma)),
            }
            iterations += 1;
        }
    }
}



/// Round a relaxed master point to facility choices (mass ≥ 1/2 opens at the
/// heaviest level).
fn round_master_point_solution(y: &[f64], nc: usize, nl: usize) -> Solution {
    Solution::from_choices(
        (0..nc)
            .map(|j| {
                let row = &y[j * nl..(j + 1) * nl];
                let mass: f64 = row.iter().sum();
                if mass >= 0.5 {
                    let mut best = (0usize, f64::NEG_INFINITY);
                    for (r, &v) in row.iter().enumerate() {
                        if v > best.1 {
                            best = (r, v);
                        }
                    }
                    Some(best.0)
                } else {
                    None
                }
            })
            .collect(),
    )
}

fn round_master_point(y: &[f64], nc: usize, nl: usize) -> Solution {
    round_master_point_solution(y, nc, nl)
}

/// Children of a master node, or None when the terminal point is integral.
///
/// Facility branching on the most fractional opening mass first, then SOS1
/// level-range splits around the fractional mass, exactly like the main
/// solver's tree.
fn branch_master(
    statuses: &[FacilityStatus],
    point: &[f64],
    nl: usize,
) -> Option<Vec<Vec<FacilityStatus>>> {
    const TOL: f64 = 1e-7;
    let row_sum = |j: usize| -> f64 { point[j * nl..(j + 1) * nl].iter().sum() };

    let mut best: Option<(usize, f64)> = None;
    for (j, status) in statuses.iter().enumerate() {
        if *status == FacilityStatus::Free {
            let s = row_sum(j);
            let frac = s.min(1.0 - s);
            if frac > TOL && best.map(|(_, f)| frac > f).unwrap_or(true) {
                best = Some((j, frac));
            }
        }
    }
    if let Some((j, _)) = best {
        let mut closed = statuses.to_vec();
        closed[j] = FacilityStatus::Closed;
        let mut open = statuses.to_vec();
        open[j] = FacilityStatus::Open(LevelRange::full(nl));
        return Some(vec![closed, open]);
    }

    // Opening masses integral: split level ranges spread over several levels.
    let mut pick: Option<(usize, f64, LevelRange)> = None;
    for (j, status) in statuses.iter().enumerate() {
        let range = match status {
            FacilityStatus::Closed => continue,
            FacilityStatus::Free => LevelRange::full(nl),
            FacilityStatus::Open(range) => *range,
        };
        if row_sum(j) < 0.5 || range.len() == 1 {
            continue;
        }
        let top = range
            .iter()
            .map(|r| point[j * nl + r])
            .fold(0.0f64, f64::max);
        let spread = 1.0 - top;
        if spread > TOL && pick.as_ref().map(|(_, s, _)| spread > *s).unwrap_or(true) {
            pick = Some((j, spread, range));
        }
    }
    if let Some((j, _, range)) = pick {
        if statuses[j] == FacilityStatus::Free {
            let mut closed = statuses.to_vec();
            closed[j] = FacilityStatus::Closed;
            let mut open = statuses.to_vec();
            open[j] = FacilityStatus::Open(LevelRange::full(nl));
            return Some(vec![closed, open]);
        }
        let total: f64 = range.iter().map(|r| point[j * nl + r]).sum();
        let mut acc = 0.0;
        let mut cut = range.lo;
        for r in range.iter() {
            acc += point[j * nl + r];
            if acc >= 0.5 * total {
                cut = r;
                break;
            }
        }
        let cut = cut.min(range.hi - 1);
        let mut low = statuses.to_vec();
        low[j] = FacilityStatus::Open(LevelRange {
            lo: range.lo,
            hi: cut,
        });
        let mut high = statuses.to_vec();
        high[j] = FacilityStatus::Open(LevelRange {
            lo: cut + 1,
            hi: range.hi,
        });
        return Some(vec![low, high]);
    }
    None
}

/// Master solved by an external MILP engine through exchange files. The
/// returned assignment is re-validated before acceptance.
pub struct ExternalMaster {
    pub adapter: AdapterConfig,
    pub time_limit_secs: f64,
}

impl MasterOracle for ExternalMaster {
    fn solve(
        &mut self,
        instance: &Instance,
        coeffs: &DerivedCoefficients,
        pool: &CutPool,
    ) -> Result<MasterSolution> {
        let model = formulations::build_oa_master(instance, coeffs, pool);
        let mps = formulations::export::to_mps(&model)?;
        let raw = extsolver::invoke(&self.adapter, &mps, "master.mps", self.time_limit_secs)?;
        let parsed = extsolver::parse_solution(&raw, &model)?;
        let report = formulations::check_feasibility(&model, &parsed.assignment);
        if report.max_violation() > 1e-6 {
            return Err(crate::error::AdapterError::Rejected(format!(
                "assignment violates the master model by {:.3e}",
                report.max_violation()
            ))
            .into());
        }
        let solution =
            formulations::solution_from_assignment(instance, &model, &parsed.assignment, 1e-6)?;
        Ok(MasterSolution {
            solution,
            objective: report.objective_value,
        })
    }

    fn describe(&self) -> &'static str {
        "external"
    }
}
