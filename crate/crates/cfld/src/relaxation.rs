//! Convex continuous relaxation of the min-form objective, solved by
//! conditional gradient (Frank–Wolfe) with an analytic linear-minimization
//! oracle.
//!
//! After eliminating the opening variables (x_j = Σ_r y_jr), the relaxed
//! feasible region is a product of per-facility simplices, so the linear
//! minimization step decomposes facility by facility and needs no LP. The fixed
//! cost f_j is distributed onto every level of facility j (coefficient
//! f_j + c_jr), which is exact under the elimination.
//!
//! Steps are pairwise: the iterate is kept as a convex combination of region
//! vertices, and each iteration moves weight from the worst active vertex to
//! the linear-minimization vertex, with an exact bisection line search along
//! the transfer segment. Plain Frank–Wolfe steps zigzag when the optimum sits
//! on a face and stall short of tight gap targets; weight transfer converges
//! linearly on these problems while using the same oracle.
//!
//! At any iterate y with vertex s = lmo(∇f(y)), the Frank–Wolfe gap
//! ⟨∇f(y), y − s⟩ bounds the suboptimality of y, so `objective − gap` is a
//! certified lower bound on the node's integer optimum whether or not the
//! target gap was reached. Branch-and-bound exploits this through
//! [`RelaxOptions::cutoff`]: iteration stops as soon as the bound crosses the
//! pruning threshold.

use std::collections::HashMap;

use crate::model::{DerivedCoefficients, FractionalPoint, Instance};

/// One facility's branching state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FacilityStatus {
    Free,
    Closed,
    /// Forced open with the surviving level range (inclusive).
    Open(LevelRange),
}

/// A contiguous inclusive range of level indices.
///
/// Level branching always splits a range into two halves, so surviving level
/// sets stay contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub lo: usize,
    pub hi: usize,
}

impl LevelRange {
    pub fn full(num_levels: usize) -> Self {
        LevelRange {
            lo: 0,
            hi: num_levels - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, r: usize) -> bool {
        r >= self.lo && r <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

/// Per-facility branching decisions describing a branch-and-bound node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeFixings {
    statuses: Vec<FacilityStatus>,
}

impl NodeFixings {
    pub(crate) fn from_statuses(statuses: Vec<FacilityStatus>) -> Self {
        NodeFixings { statuses }
    }

    pub fn all_free(num_candidates: usize) -> Self {
        NodeFixings {
            statuses: vec![FacilityStatus::Free; num_candidates],
        }
    }

    pub fn status(&self, j: usize) -> &FacilityStatus {
        &self.statuses[j]
    }

    pub fn statuses(&self) -> &[FacilityStatus] {
        &self.statuses
    }

    pub fn num_candidates(&self) -> usize {
        self.statuses.len()
    }

    pub fn with_closed(&self, j: usize) -> Self {
        let mut child = self.clone();
        child.statuses[j] = FacilityStatus::Closed;
        child
    }

    pub fn with_open(&self, j: usize, range: LevelRange) -> Self {
        debug_assert!(range.lo <= range.hi);
        let mut child = self.clone();
        child.statuses[j] = FacilityStatus::Open(range);
        child
    }

    /// True if every facility is decided down to closed or a single level.
    pub fn fully_decided(&self) -> bool {
        self.statuses.iter().all(|s| match s {
            FacilityStatus::Free => false,
            FacilityStatus::Closed => true,
            FacilityStatus::Open(range) => range.len() == 1,
        })
    }
}

/// Outcome of one relaxation solve.
#[derive(Debug, Clone)]
pub struct RelaxationResult {
    /// Certified lower bound on the node's integer optimum: objective − gap.
    pub lower_bound: f64,
    pub point: FractionalPoint,
    /// Min-form objective value at `point`.
    pub objective: f64,
    /// Absolute Frank–Wolfe gap at `point`.
    pub gap: f64,
    pub iterations: usize,
    /// Whether the relative gap target was reached (the bound is valid either way).
    pub gap_met: bool,
    /// Whether iteration stopped early because the bound crossed the cutoff.
    pub cutoff_hit: bool,
}

/// Tuning knobs for [`solve_relaxation_opts`].
#[derive(Debug, Clone, Default)]
pub struct RelaxOptions {
    /// Warm-start iterate, typically the parent node's point. Repaired to
    /// satisfy the fixings before use.
    pub init: Option<FractionalPoint>,
    /// Stop as soon as the certified bound reaches this value.
    pub cutoff: Option<f64>,
    /// Iteration cap override (default 10,000).
    pub max_iterations: Option<usize>,
}

const DEFAULT_MAX_ITERATIONS: usize = 10_000;
pub(crate) const LINE_SEARCH_TOL: f64 = 1e-12;
pub(crate) const LINE_SEARCH_MAX_ITERS: usize = 60;

/// Minimize the relaxed min-form objective over the node's region.
///
/// `rel_tol_gap` is relative: iteration targets a Frank–Wolfe gap of
/// `rel_tol_gap · (1 + |objective|)`.
pub fn solve_relaxation(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    fixings: &NodeFixings,
    rel_tol_gap: f64,
) -> RelaxationResult {
    solve_relaxation_opts(
        instance,
        coeffs,
        fixings,
        rel_tol_gap,
        &RelaxOptions::default(),
    )
}

/// Gradient of the min-form objective at `point`, candidate × level:
/// f_j + c_jr + Σ_i a_i · ∂F̂_i/∂y_jr.
pub fn objective_gradient(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    point: &FractionalPoint,
) -> Vec<f64> {
    let state = FwState::from_point(instance, coeffs, point.clone());
    let mut g = vec![0.0; point.as_slice().len()];
    state.gradient(&mut g);
    g
}

/// Analytic linear-minimization oracle over the node's region.
///
/// Per free facility: open the level with the most negative gradient entry if
/// one exists (ties toward the smaller index), otherwise stay closed. Closed
/// fixings force zero, open fixings pick the gradient argmin within the
/// surviving range even when positive. The result is a vertex.
pub fn lmo(gradient: &[f64], fixings: &NodeFixings, num_levels: usize) -> FractionalPoint {
    let choices = lmo_choices(gradient, fixings, num_levels);
    let n = fixings.num_candidates();
    let mut y = vec![0.0; n * num_levels];
    for (j, choice) in choices.iter().enumerate() {
        if let Some(r) = choice {
            y[j * num_levels + r] = 1.0;
        }
    }
    FractionalPoint::from_raw(y, n, num_levels)
}

pub(crate) fn lmo_choices(
    gradient: &[f64],
    fixings: &NodeFixings,
    num_levels: usize,
) -> Vec<Option<usize>> {
    fixings
        .statuses()
        .iter()
        .enumerate()
        .map(|(j, status)| {
            let row = &gradient[j * num_levels..(j + 1) * num_levels];
            match status {
                FacilityStatus::Closed => None,
                FacilityStatus::Free => {
                    let (r, g) = argmin(row, 0, num_levels - 1);
                    if g < 0.0 {
                        Some(r)
                    } else {
                        None
                    }
                }
                FacilityStatus::Open(range) => Some(argmin(row, range.lo, range.hi).0),
            }
        })
        .collect()
}

fn argmin(row: &[f64], lo: usize, hi: usize) -> (usize, f64) {
    let mut best = (lo, row[lo]);
    for r in lo + 1..=hi {
        if row[r] < best.1 {
            best = (r, row[r]);
        }
    }
    best
}

/// Vertices of the relaxed region are per-facility choices, like solutions.
pub(crate) type VertexChoices = Vec<Option<usize>>;

/// Frank–Wolfe iterate with incrementally maintained zone totals and the
/// active-set decomposition behind pairwise steps.
struct FwState<'a> {
    instance: &'a Instance,
    coeffs: &'a DerivedCoefficients,
    /// Cost coefficient per (j, r): f_j + c_jr.
    cost: Vec<f64>,
    y: Vec<f64>,
    /// z_i = Σ b_ijr y_jr + 1.
    z: Vec<f64>,
    /// Σ cost ⊙ y.
    cost_dot: f64,
    /// Convex decomposition of y: vertices with strictly positive weights.
    active: Vec<(VertexChoices, f64)>,
    active_index: HashMap<VertexChoices, usize>,
}

impl<'a> FwState<'a> {
    fn from_point(
        instance: &'a Instance,
        coeffs: &'a DerivedCoefficients,
        point: FractionalPoint,
    ) -> Self {
        let (nc, nl) = (instance.num_candidates(), instance.num_levels());
        let mut cost = Vec::with_capacity(nc * nl);
        for j in 0..nc {
            for r in 0..nl {
                cost.push(instance.fixed_cost(j) + instance.level_cost(j, r));
            }
        }
        let active = decompose(point.as_slice(), nc, nl);
        let active_index = active
            .iter()
            .enumerate()
            .map(|(idx, (v, _))| (v.clone(), idx))
            .collect();
        let mut state = FwState {
            instance,
            coeffs,
            cost,
            y: vec![0.0; nc * nl],
            z: Vec::new(),
            cost_dot: 0.0,
            active,
            active_index,
        };
        state.refresh();
        state
    }

    /// Rebuild y from the decomposition and recompute totals exactly; clears
    /// incremental drift and keeps the iterate an exact convex combination.
    fn refresh(&mut self) {
        let nl = self.coeffs.num_levels();
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
        self.z = (0..self.coeffs.num_zones())
            .map(|i| {
                let b = self.coeffs.zone_b(i);
                let mut s = 0.0;
                for (bv, yv) in b.iter().zip(&self.y) {
                    s += bv * yv;
                }
                s + 1.0
            })
            .collect();
        self.cost_dot = self.cost.iter().zip(&self.y).map(|(c, y)| c * y).sum();
    }

    fn objective(&self) -> f64 {
        let lost: f64 = self
            .z
            .iter()
            .enumerate()
            .map(|(i, z)| self.instance.buying_power(i) / z)
            .sum();
        self.cost_dot + lost
    }

    fn gradient(&self, g: &mut [f64]) {
        g.copy_from_slice(&self.cost);
        for (i, &z) in self.z.iter().enumerate() {
            let t = self.instance.buying_power(i) / (z * z);
            for (gv, bv) in g.iter_mut().zip(self.coeffs.zone_b(i)) {
                *gv -= t * bv;
            }
        }
    }

    fn vertex_dot(&self, g: &[f64], vertex: &VertexChoices) -> f64 {
        let nl = self.coeffs.num_levels();
        vertex
            .iter()
            .enumerate()
            .map(|(j, choice)| match choice {
                Some(r) => g[j * nl + r],
                None => 0.0,
            })
            .sum()
    }

    /// The active vertex with the largest gradient dot: the weight donor.
    fn away_vertex(&self, g: &[f64]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (idx, (vertex, _)) in self.active.iter().enumerate() {
            let dot = self.vertex_dot(g, vertex);
            if dot > best.1 {
                best = (idx, dot);
            }
        }
        best.0
    }

    /// Attraction swing per zone along `to − from`.
    fn pair_swing(&self, to: &VertexChoices, from: &VertexChoices) -> Vec<f64> {
        let nl = self.coeffs.num_levels();
        (0..self.coeffs.num_zones())
            .map(|i| {
                let b = self.coeffs.zone_b(i);
                let mut acc = 0.0;
                for j in 0..to.len() {
                    if to[j] != from[j] {
                        if let Some(r) = to[j] {
                            acc += b[j * nl + r];
                        }
                        if let Some(r) = from[j] {
                            acc -= b[j * nl + r];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn vertex_cost(&self, choices: &VertexChoices) -> f64 {
        let nl = self.coeffs.num_levels();
        choices
            .iter()
            .enumerate()
            .map(|(j, choice)| match choice {
                Some(r) => self.cost[j * nl + r],
                None => 0.0,
            })
            .sum()
    }

    /// Directional derivative of the objective at y + γ·d for the direction
    /// with the given cost slope and attraction swing.
    fn dir_derivative(&self, gamma: f64, cost_delta: f64, swing: &[f64]) -> f64 {
        let mut acc = cost_delta;
        for (i, &w) in swing.iter().enumerate() {
            let z = self.z[i] + gamma * w;
            acc -= self.instance.buying_power(i) * w / (z * z);
        }
        acc
    }

    /// Attraction swing per zone along `to − y`.
    fn pair_swing_from_y(&self, to: &VertexChoices) -> Vec<f64> {
        let nl = self.coeffs.num_levels();
        self.z
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let b = self.coeffs.zone_b(i);
                let mut at_vertex = 0.0;
                for (j, choice) in to.iter().enumerate() {
                    if let Some(r) = choice {
                        at_vertex += b[j * nl + r];
                    }
                }
                at_vertex - (z - 1.0)
            })
            .collect()
    }

    /// Plain step y ← y + γ(v − y): every active weight shrinks by (1 − γ).
    fn collapse_step(
        &mut self,
        gamma: f64,
        to: &VertexChoices,
        cost_delta: f64,
        swing: &[f64],
    ) {
        let nl = self.coeffs.num_levels();
        for (j, choice) in to.iter().enumerate() {
            let row = &mut self.y[j * nl..(j + 1) * nl];
            for (r, yv) in row.iter_mut().enumerate() {
                let target = match choice {
                    Some(cr) if *cr == r => 1.0,
                    _ => 0.0,
                };
                *yv += gamma * (target - *yv);
            }
        }
        for (zi, &w) in self.z.iter_mut().zip(swing) {
            *zi += gamma * w;
        }
        self.cost_dot += gamma * cost_delta;

        for (_, weight) in &mut self.active {
            *weight *= 1.0 - gamma;
        }
        match self.active_index.get(to) {
            Some(&idx) => self.active[idx].1 += gamma,
            None => {
                self.active.push((to.clone(), gamma));
                self.active_index.insert(to.clone(), self.active.len() - 1);
            }
        }
        self.active.retain(|(_, w)| *w > 1e-15);
        self.active_index = self
            .active
            .iter()
            .enumerate()
            .map(|(idx, (v, _))| (v.clone(), idx))
            .collect();
    }

    /// Transfer `gamma` of weight from the away vertex to the target vertex,
    /// updating y, totals and the decomposition.
    fn transfer(
        &mut self,
        gamma: f64,
        to: &VertexChoices,
        away_idx: usize,
        cost_delta: f64,
        swing: &[f64],
    ) {
        let nl = self.coeffs.num_levels();
        let from = self.active[away_idx].0.clone();
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
        for (zi, &w) in self.z.iter_mut().zip(swing) {
            *zi += gamma * w;
        }
        self.cost_dot += gamma * cost_delta;

        self.active[away_idx].1 -= gamma;
        if self.active[away_idx].1 <= 1e-15 {
            let (removed, _) = self.active.swap_remove(away_idx);
            self.active_index.remove(&removed);
            if away_idx < self.active.len() {
                let moved = self.active[away_idx].0.clone();
                self.active_index.insert(moved, away_idx);
            }
        }
        match self.active_index.get(to) {
            Some(&idx) => self.active[idx].1 += gamma,
            None => {
                self.active.push((to.clone(), gamma));
                self.active_index.insert(to.clone(), self.active.len() - 1);
            }
        }
    }
}

/// Comonotone decomposition of a feasible point into product-region vertices:
/// merge the per-facility cumulative breakpoints and read one joint vertex off
/// each segment. Produces at most J·(R+1) vertices.
pub(crate) fn decompose(
    y: &[f64],
    num_candidates: usize,
    num_levels: usize,
) -> Vec<(VertexChoices, f64)> {
    // Per facility: cumulative weights over the choices (None, 0, 1, ...).
    let mut cumulative: Vec<Vec<(f64, Option<usize>)>> = Vec::with_capacity(num_candidates);
    let mut breakpoints: Vec<f64> = vec![1.0];
    for j in 0..num_candidates {
        let row = &y[j * num_levels..(j + 1) * num_levels];
        let mass: f64 = row.iter().sum();
        let mut acc = (1.0 - mass).max(0.0);
        let mut cuts = vec![(acc, None)];
        for (r, &w) in row.iter().enumerate() {
            if w > 0.0 {
                acc = (acc + w).min(1.0);
                cuts.push((acc, Some(r)));
            }
        }
        if let Some(last) = cuts.last_mut() {
            last.0 = 1.0;
        }
        for &(cut, _) in &cuts {
            if cut > 0.0 && cut < 1.0 {
                breakpoints.push(cut);
            }
        }
        cumulative.push(cuts);
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();

    let mut out: Vec<(VertexChoices, f64)> = Vec::new();
    let mut t0 = 0.0;
    for &t1 in &breakpoints {
        if t1 <= t0 {
            continue;
        }
        let mid = 0.5 * (t0 + t1);
        let vertex: VertexChoices = cumulative
            .iter()
            .map(|cuts| {
                cuts.iter()
                    .find(|(cut, _)| mid < *cut)
                    .map(|(_, choice)| *choice)
                    .unwrap_or(cuts.last().unwrap().1)
            })
            .collect();
        out.push((vertex, t1 - t0));
        t0 = t1;
    }
    out
}

/// Exact line search on [0, γ_max]: bisection on the directional derivative of
/// the restricted (convex, smooth) one-variable objective.
fn line_search(state: &FwState, gamma_max: f64, cost_delta: f64, swing: &[f64]) -> f64 {
    if state.dir_derivative(gamma_max, cost_delta, swing) <= 0.0 {
        return gamma_max;
    }
    if state.dir_derivative(0.0, cost_delta, swing) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, gamma_max);
    for _ in 0..LINE_SEARCH_MAX_ITERS {
        if hi - lo < LINE_SEARCH_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if state.dir_derivative(mid, cost_delta, swing) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Repair an arbitrary point so it satisfies the fixings.
pub(crate) fn repair_init(point: &FractionalPoint, fixings: &NodeFixings, num_levels: usize) -> Vec<f64> {
    let n = fixings.num_candidates();
    let mut y = point.as_slice().to_vec();
    for (j, status) in fixings.statuses().iter().enumerate() {
        let row = &mut y[j * num_levels..(j + 1) * num_levels];
        match status {
            FacilityStatus::Free => {}
            FacilityStatus::Closed => row.fill(0.0),
            FacilityStatus::Open(range) => {
                for (r, v) in row.iter_mut().enumerate() {
                    if !range.contains(r) {
                        *v = 0.0;
                    }
                }
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    for v in row.iter_mut() {
                        *v /= mass;
                    }
                } else {
                    let share = 1.0 / range.len() as f64;
                    for r in range.iter() {
                        row[r] = share;
                    }
                }
            }
        }
    }
    debug_assert_eq!(y.len(), n * num_levels);
    y
}

fn default_init(fixings: &NodeFixings, num_levels: usize) -> Vec<f64> {
    let zero = FractionalPoint::zeros(fixings.num_candidates(), num_levels);
    repair_init(&zero, fixings, num_levels)
}

/// [`solve_relaxation`] with warm start, cutoff and iteration overrides.
pub fn solve_relaxation_opts(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    fixings: &NodeFixings,
    rel_tol_gap: f64,
    opts: &RelaxOptions,
) -> RelaxationResult {
    debug_assert!(rel_tol_gap > 0.0);
    let nl = instance.num_levels();
    let y0 = match &opts.init {
        Some(p) => repair_init(p, fixings, nl),
        None => default_init(fixings, nl),
    };
    let mut state = FwState::from_point(
        instance,
        coeffs,
        FractionalPoint::from_raw(y0, instance.num_candidates(), nl),
    );
    let max_iterations = opts.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS);

    let mut g = vec![0.0; state.y.len()];
    let mut iterations = 0;
    loop {
        if iterations > 0 && iterations % 128 == 0 {
            state.refresh();
        }
        state.gradient(&mut g);
        let target = lmo_choices(&g, fixings, nl);
        let gap = fw_gap(&g, &state.y, &target, nl);
        let objective = state.objective();
        let tol = rel_tol_gap * (1.0 + objective.abs());
        let cutoff_hit = opts.cutoff.map(|c| objective - gap >= c).unwrap_or(false);

        if gap <= tol || cutoff_hit || iterations >= max_iterations {
            // Certify the exit state from an exact rebuild; incremental drift
            // must never leak into a reported bound.
            state.refresh();
            state.gradient(&mut g);
            let target = lmo_choices(&g, fixings, nl);
            let gap = fw_gap(&g, &state.y, &target, nl);
            let objective = state.objective();
            let tol = rel_tol_gap * (1.0 + objective.abs());
            let cutoff_hit = opts.cutoff.map(|c| objective - gap >= c).unwrap_or(false);
            if gap <= tol || cutoff_hit || iterations >= max_iterations {
                return RelaxationResult {
                    lower_bound: objective - gap,
                    point: FractionalPoint::from_raw(
                        state.y.clone(),
                        instance.num_candidates(),
                        nl,
                    ),
                    objective,
                    gap,
                    iterations,
                    gap_met: gap <= tol,
                    cutoff_hit,
                };
            }
            continue;
        }

        let away_idx = state.away_vertex(&g);
        let away = state.active[away_idx].0.clone();
        if away == target {
            // Degenerate transfer; take a plain step toward the target by
            // collapsing the whole decomposition onto it.
            let swing = state.pair_swing_from_y(&target);
            let cost_delta = state.vertex_cost(&target) - state.cost_dot;
            let gamma = line_search(&state, 1.0, cost_delta, &swing);
            state.collapse_step(gamma, &target, cost_delta, &swing);
        } else {
            let swing = state.pair_swing(&target, &away);
            let cost_delta = state.vertex_cost(&target) - state.vertex_cost(&away);
            let gamma_max = state.active[away_idx].1;
            let gamma = line_search(&state, gamma_max, cost_delta, &swing);
            state.transfer(gamma, &target, away_idx, cost_delta, &swing);
        }
        iterations += 1;
    }
}

/// FW gap ⟨g, y − s⟩ for the vertex described by `choices`.
fn fw_gap(g: &[f64], y: &[f64], choices: &[Option<usize>], num_levels: usize) -> f64 {
    let mut at_y = 0.0;
    for (gv, yv) in g.iter().zip(y) {
        at_y += gv * yv;
    }
    let mut at_s = 0.0;
    for (j, choice) in choices.iter().enumerate() {
        if let Some(r) = choice {
            at_s += g[j * num_levels + r];
        }
    }
    at_y - at_s
}
