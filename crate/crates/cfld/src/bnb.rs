//! Built-in certified exact solver: best-first branch-and-bound over facility
//! status and level ranges, bounded by the convex relaxation.
//!
//! Branching follows the structure of the feasible set. While any facility has
//! a fractional opening mass s_j = Σ_r y_jr, the most fractional one is split
//! into a closed child and an open child. Once every s_j is integral but some
//! open facility spreads mass across levels, its surviving level range is
//! split in two around the fractional mass. Nodes are explored best-bound
//! first with depth-first tie-breaking, so the reported gap stays meaningful
//! when the node cap is hit.
//!
//! Single-worker runs are fully deterministic. With the `parallel` feature and
//! [`ExecMode::Parallel`], node relaxations are solved in waves on the rayon
//! pool; wave results are merged in deterministic node order, so the certified
//! optimum is the same — only node counts may differ.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::exec::{map_collect, ExecMode};
use crate::model::{
    min_objective_solution, profit, DerivedCoefficients, FractionalPoint, Instance, Solution,
};
use crate::relaxation::{
    solve_relaxation_opts, FacilityStatus, LevelRange, NodeFixings, RelaxOptions,
};
use crate::Result;

/// Tolerance below which an opening mass counts as integral.
const INTEGRALITY_TOL: f64 = 1e-7;

/// Options for [`solve_with`].
#[derive(Debug, Clone)]
pub struct BnbOptions {
    /// Relative optimality tolerance on the min-form objective.
    pub rel_tol: f64,
    /// Maximum number of explored nodes before giving up with an honest gap.
    pub node_cap: usize,
    pub mode: ExecMode,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            rel_tol: 1e-6,
            node_cap: 1_000_000,
            mode: ExecMode::Sequential,
        }
    }
}

/// Outcome of a branch-and-bound run.
#[derive(Debug, Clone)]
pub struct BnbReport {
    pub best_solution: Solution,
    /// Exact profit of `best_solution`.
    pub best_profit: f64,
    /// Certified relative gap (min-form): (incumbent − bound) / (1 + |incumbent|).
    pub proven_gap: f64,
    /// Whether `proven_gap` met the requested tolerance.
    pub proven: bool,
    pub nodes_explored: usize,
    pub wall_time_secs: f64,
}

/// Solve to certified global optimality with default options.
pub fn solve(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    rel_tol: f64,
    node_cap: usize,
) -> Result<BnbReport> {
    solve_with(
        instance,
        coeffs,
        &BnbOptions {
            rel_tol,
            node_cap,
            ..BnbOptions::default()
        },
    )
}

struct Node {
    fixings: NodeFixings,
    lower_bound: f64,
    warm_start: FractionalPoint,
    depth: usize,
    seq: usize,
}

/// Best-bound first; ties prefer deeper nodes, then the most recent.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower_bound
            .partial_cmp(&self.lower_bound)
            .unwrap()
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Round a relaxation point to a feasible solution: a facility opens at its
/// heaviest level when its total mass reaches one half, otherwise closes.
pub fn round_incumbent(point: &FractionalPoint) -> Solution {
    let (nc, nl) = (point.num_candidates(), point.num_levels());
    let choices = (0..nc)
        .map(|j| {
            if point.facility_sum(j) >= 0.5 {
                let mut best = (0, f64::NEG_INFINITY);
                for r in 0..nl {
                    let v = point.y(j, r);
                    if v > best.1 {
                        best = (r, v);
                    }
                }
                Some(best.0)
            } else {
                None
            }
        })
        .collect();
    Solution::from_choices(choices)
}

struct Search<'a> {
    instance: &'a Instance,
    coeffs: &'a DerivedCoefficients,
    rel_tol: f64,
    incumbent: Solution,
    /// Min-form value of the incumbent.
    incumbent_value: f64,
    queue: BinaryHeap<Node>,
    next_seq: usize,
    nodes_explored: usize,
}

impl<'a> Search<'a> {
    fn offer_incumbent(&mut self, candidate: Solution) -> Result<()> {
        let value = min_objective_solution(self.instance, self.coeffs, &candidate)?;
        if value < self.incumbent_value {
            self.incumbent = candidate;
            self.incumbent_value = value;
        }
        Ok(())
    }

    /// Prune threshold: bounds at or above this cannot improve the incumbent
    /// beyond the requested tolerance.
    fn cutoff(&self) -> f64 {
        self.incumbent_value - self.rel_tol * (1.0 + self.incumbent_value.abs())
    }

    fn push(&mut self, fixings: NodeFixings, bound: f64, warm: FractionalPoint, depth: usize) {
        self.queue.push(Node {
            fixings,
            lower_bound: bound,
            warm_start: warm,
            depth,
            seq: self.next_seq,
        });
        self.next_seq += 1;
    }

    /// Pick the branching facility and produce the child fixing pairs.
    fn branch(&self, fixings: &NodeFixings, point: &FractionalPoint) -> Vec<NodeFixings> {
        let nl = self.instance.num_levels();

        // Facility branching: most fractional opening mass among free ones.
        let mut best: Option<(usize, f64)> = None;
        for (j, status) in fixings.statuses().iter().enumerate() {
            if *status == FacilityStatus::Free {
                let s = point.facility_sum(j);
                let frac = s.min(1.0 - s);
                if frac > INTEGRALITY_TOL && best.map(|(_, f)| frac > f).unwrap_or(true) {
                    best = Some((j, frac));
                }
            }
        }
        if let Some((j, _)) = best {
            return vec![
                fixings.with_closed(j),
                fixings.with_open(j, LevelRange::full(nl)),
            ];
        }

        // All opening masses integral: find level-fractional facilities, i.e.
        // mass one spread over more than one level.
        let mut pick: Option<(usize, f64, LevelRange)> = None;
        for (j, status) in fixings.statuses().iter().enumerate() {
            let range = match status {
                FacilityStatus::Closed => continue,
                FacilityStatus::Free => LevelRange::full(nl),
                FacilityStatus::Open(range) => *range,
            };
            if point.facility_sum(j) < 0.5 || range.len() == 1 {
                continue;
            }
            let top = range.iter().map(|r| point.y(j, r)).fold(0.0, f64::max);
            let spread = 1.0 - top;
            if spread > INTEGRALITY_TOL && pick.as_ref().map(|(_, s, _)| spread > *s).unwrap_or(true)
            {
                pick = Some((j, spread, range));
            }
        }
        if let Some((j, _, range)) = pick {
            if *fixings.status(j) == FacilityStatus::Free {
                // Decide the status first; level splitting happens once open.
                return vec![
                    fixings.with_closed(j),
                    fixings.with_open(j, LevelRange::full(nl)),
                ];
            }
            // Split the surviving range in half around the fractional mass:
            // cut at the weighted median level.
            let total: f64 = range.iter().map(|r| point.y(j, r)).sum();
            let mut acc = 0.0;
            let mut cut = range.lo;
            for r in range.iter() {
                acc += point.y(j, r);
                if acc >= 0.5 * total {
                    cut = r;
                    break;
                }
            }
            let cut = cut.min(range.hi - 1); // both halves stay nonempty
            return vec![
                fixings.with_open(j, LevelRange { lo: range.lo, hi: cut }),
                fixings.with_open(
                    j,
                    LevelRange {
                        lo: cut + 1,
                        hi: range.hi,
                    },
                ),
            ];
        }
        Vec::new()
    }
}

/// Solve to certified global optimality.
pub fn solve_with(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    opts: &BnbOptions,
) -> Result<BnbReport> {
    let start = Instant::now();
    let nc = instance.num_candidates();
    let root_fixings = NodeFixings::all_free(nc);

    let mut search = Search {
        instance,
        coeffs,
        rel_tol: opts.rel_tol,
        incumbent: Solution::closed(nc),
        incumbent_value: instance.total_buying_power(),
        queue: BinaryHeap::new(),
        next_seq: 0,
        nodes_explored: 0,
    };

    // Root relaxation seeds both the bound and a rounded incumbent.
    let root = solve_relaxation_opts(
        instance,
        coeffs,
        &root_fixings,
        opts.rel_tol,
        &RelaxOptions::default(),
    );
    search.offer_incumbent(round_incumbent(&root.point))?;
    search.nodes_explored += 1;
    let best_open_bound = root.lower_bound;
    if root.lower_bound < search.cutoff() {
        let children = search.branch(&root_fixings, &root.point);
        if children.is_empty() {
            // Integral relaxation point: it is the node optimum.
            search.offer_incumbent(round_incumbent(&root.point))?;
        } else {
            for child in children {
                search.push(child, root.lower_bound, root.point.clone(), 1);
            }
        }
    }

    let wave_size = if opts.mode.is_parallel() {
        crate::exec::worker_count().max(2)
    } else {
        1
    };

    while !search.queue.is_empty() {
        if search.nodes_explored >= opts.node_cap {
            break;
        }
        // Pop a deterministic wave of the best nodes, skipping any already cut
        // off by the current incumbent.
        let mut wave = Vec::with_capacity(wave_size);
        while wave.len() < wave_size {
            match search.queue.pop() {
                Some(node) => {
                    if node.lower_bound < search.cutoff() {
                        wave.push(node);
                    }
                }
                None => break,
            }
        }
        if wave.is_empty() {
            continue;
        }
        if search.nodes_explored + wave.len() > opts.node_cap {
            let keep = opts.node_cap - search.nodes_explored;
            for extra in wave.drain(keep..) {
                search.queue.push(extra);
            }
            if wave.is_empty() {
                break;
            }
        }

        let cutoff = search.cutoff();
        let rel_tol = opts.rel_tol;
        let results = map_collect(opts.mode, wave, |node| {
            let relax = solve_relaxation_opts(
                instance,
                coeffs,
                &node.fixings,
                rel_tol,
                &RelaxOptions {
                    init: Some(node.warm_start.clone()),
                    cutoff: Some(cutoff),
                    max_iterations: None,
                },
            );
            (node, relax)
        });

        for (node, relax) in results {
            search.nodes_explored += 1;
            search.offer_incumbent(round_incumbent(&relax.point))?;
            if relax.lower_bound >= search.cutoff() {
                continue;
            }
            let children = search.branch(&node.fixings, &relax.point);
            if children.is_empty() {
                // Integral point: the relaxation solved the node exactly.
                search.offer_incumbent(round_incumbent(&relax.point))?;
                continue;
            }
            for child in children {
                search.push(child, relax.lower_bound, relax.point.clone(), node.depth + 1);
            }
        }
    }

    // Pruned subtrees had bounds at or above the cutoff at prune time, and the
    // cutoff only moves down, so the final cutoff bounds everything pruned.
    // The root bound is valid globally throughout.
    let root_bound = best_open_bound;
    let (proven, proven_gap) = if search.queue.is_empty() {
        let global_lb = root_bound.max(search.cutoff());
        let gap = (search.incumbent_value - global_lb).max(0.0)
            / (1.0 + search.incumbent_value.abs());
        (true, gap.min(opts.rel_tol))
    } else {
        let queue_min = search
            .queue
            .iter()
            .map(|n| n.lower_bound)
            .fold(f64::INFINITY, f64::min);
        let global_lb = root_bound.max(queue_min.min(search.cutoff()));
        let gap = (search.incumbent_value - global_lb).max(0.0)
            / (1.0 + search.incumbent_value.abs());
        (gap <= opts.rel_tol, gap)
    };

    let best_profit = profit(instance, coeffs, &search.incumbent)?;
    Ok(BnbReport {
        best_solution: search.incumbent,
        best_profit,
        proven_gap,
        proven,
        nodes_explored: search.nodes_explored,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_fixtures::{random_instance, random_point};
    use crate::model::{CandidateSite, Instance};
    use crate::oracle;

    #[test]
    fn rounding_keeps_integral_points() {
        let sol = Solution::from_choices(vec![Some(1), None, Some(0)]);
        assert_eq!(round_incumbent(&sol.to_point(2)), sol);
    }

    #[test]
    fn rounding_picks_argmax_level_above_half_mass() {
        let point = FractionalPoint::new(vec![0.6, 0.3], 1, 2).unwrap();
        assert_eq!(
            round_incumbent(&point),
            Solution::from_choices(vec![Some(0)])
        );
        let light = FractionalPoint::new(vec![0.2, 0.2], 1, 2).unwrap();
        assert_eq!(round_incumbent(&light), Solution::closed(1));
    }

    #[test]
    fn rounded_points_never_beat_the_oracle() {
        let inst = random_instance(19, 8, 6, 3, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let best = oracle::enumerate_optimal(&inst, &coeffs, 1 << 24)
            .unwrap()
            .best_profit;
        for trial in 0..100 {
            let sol = round_incumbent(&random_point(5000 + trial, 6, 2));
            let value = profit(&inst, &coeffs, &sol).unwrap();
            assert!(value <= best + 1e-9);
        }
    }

    #[test]
    fn prohibitive_costs_close_at_the_root() {
        let base = random_instance(29, 5, 4, 2, 2);
        let total = base.total_buying_power();
        let inst = Instance::new(
            base.zones().to_vec(),
            base.candidates()
                .iter()
                .map(|c| CandidateSite {
                    id: c.id.clone(),
                    fixed_cost: 2.0 * total,
                    position: c.position,
                })
                .collect(),
            base.competitors().to_vec(),
            base.levels().clone(),
            base.dist_candidates_raw().to_vec(),
            base.dist_competitors_raw().to_vec(),
        )
        .unwrap();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let report = solve(&inst, &coeffs, 1e-6, 10_000).unwrap();
        assert_eq!(report.best_solution, Solution::closed(4));
        assert_eq!(report.best_profit, 0.0);
        assert!(report.proven);
        assert_eq!(report.nodes_explored, 1);
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        for seed in [101, 202, 303, 404] {
            let inst = random_instance(seed, 10, 6, 3, 3);
            let coeffs = DerivedCoefficients::from_instance(&inst);
            let best = oracle::enumerate_optimal(&inst, &coeffs, 1 << 24).unwrap();
            let report = solve(&inst, &coeffs, 1e-6, 100_000).unwrap();
            assert!(report.proven, "seed {seed} not proven");
            let scale = 1.0 + best.best_profit.abs();
            assert!(
                (report.best_profit - best.best_profit).abs() / scale <= 1e-6,
                "seed {seed}: bnb {} vs oracle {}",
                report.best_profit,
                best.best_profit
            );
        }
    }

    #[test]
    fn node_cap_returns_honest_unproven_gap() {
        let inst = random_instance(7, 12, 8, 3, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let report = solve(&inst, &coeffs, 1e-9, 2).unwrap();
        if !report.proven {
            assert!(report.proven_gap > 1e-9);
        }
        // The incumbent is always feasible and its profit exact.
        let check = profit(&inst, &coeffs, &report.best_solution).unwrap();
        assert_eq!(check, report.best_profit);
    }

    #[test]
    fn single_worker_runs_are_deterministic() {
        let inst = random_instance(57, 10, 7, 3, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let a = solve(&inst, &coeffs, 1e-6, 100_000).unwrap();
        let b = solve(&inst, &coeffs, 1e-6, 100_000).unwrap();
        assert_eq!(a.best_solution, b.best_solution);
        assert_eq!(a.best_profit, b.best_profit);
        assert_eq!(a.nodes_explored, b.nodes_explored);
    }

    #[test]
    fn parallel_mode_matches_sequential_value() {
        let inst = random_instance(73, 10, 7, 3, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let seq = solve_with(
            &inst,
            &coeffs,
            &BnbOptions {
                rel_tol: 1e-6,
                node_cap: 100_000,
                mode: ExecMode::Sequential,
            },
        )
        .unwrap();
        let par = solve_with(
            &inst,
            &coeffs,
            &BnbOptions {
                rel_tol: 1e-6,
                node_cap: 100_000,
                mode: ExecMode::Parallel,
            },
        )
        .unwrap();
        assert!(seq.proven && par.proven);
        let scale = 1.0 + seq.best_profit.abs();
        assert!((seq.best_profit - par.best_profit).abs() / scale <= 1e-6);
    }

    #[test]
    fn node_bounds_respect_restricted_oracle() {
        // Bound sandwich: each child's bound must not exceed the best
        // completion under its fixings.
        let inst = random_instance(83, 8, 5, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let fixings = NodeFixings::all_free(5);
        let relax = crate::relaxation::solve_relaxation(&inst, &coeffs, &fixings, 1e-8);

        let restricted_min = |fx: &NodeFixings| -> f64 {
            let mut best = f64::INFINITY;
            let options: Vec<Vec<Option<usize>>> = fx
                .statuses()
                .iter()
                .map(|s| match s {
                    FacilityStatus::Closed => vec![None],
                    FacilityStatus::Free => vec![None, Some(0), Some(1)],
                    FacilityStatus::Open(range) => range.iter().map(Some).collect(),
                })
                .collect();
            let mut idx = vec![0usize; options.len()];
            'outer: loop {
                let choices: Vec<Option<usize>> =
                    idx.iter().enumerate().map(|(j, &k)| options[j][k]).collect();
                let v = min_objective_solution(&inst, &coeffs, &Solution::from_choices(choices))
                    .unwrap();
                best = best.min(v);
                for j in (0..options.len()).rev() {
                    idx[j] += 1;
                    if idx[j] < options[j].len() {
                        continue 'outer;
                    }
                    idx[j] = 0;
                    if j == 0 {
                        break 'outer;
                    }
                }
            }
            best
        };

        for j in 0..5 {
            for child in [
                fixings.with_closed(j),
                fixings.with_open(j, LevelRange::full(2)),
            ] {
                let res = solve_relaxation_opts(
                    &inst,
                    &coeffs,
                    &child,
                    1e-8,
                    &RelaxOptions {
                        init: Some(relax.point.clone()),
                        ..RelaxOptions::default()
                    },
                );
                let exact = restricted_min(&child);
                assert!(
                    res.lower_bound <= exact + 1e-9,
                    "child of {j}: bound {} above restricted optimum {exact}",
                    res.lower_bound
                );
            }
        }
    }
}
