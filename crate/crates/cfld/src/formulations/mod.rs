//! The three exact reformulations as solver-agnostic sparse models.
//!
//! * [`build_milp`] — the McCormick linearization: every bilinear product
//!   y_jr·β_i becomes a bounded variable w_ijr caged by four linear rows, at
//!   the price of Θ(|I|·|J|·|R|) extra variables and rows.
//! * [`build_oa_master`] — the epigraph master with one first-order cut per
//!   (recorded point, zone).
//! * [`build_micqp`] — the conic form: per zone an auxiliary total z_i and the
//!   rotated-cone row β_i·z_i ≥ 1, only Θ(|I|) extras.
//!
//! The lower bound β_i ≥ 1/(Σ_j b_ij* + 1) and upper bound β_i ≤ 1 are applied
//! in all three formulations; both hold at optimality in each, and they
//! tighten the relaxations.
//!
//! Models are immutable after build. [`check_feasibility`] reports the worst
//! linear, conic and integrality violations of an assignment, which is how
//! oracle optima and external-solver outputs are validated. Exporters live in
//! [`export`]; variable names follow the fixed `x_j` / `y_j_r` / `beta_i` /
//! `z_i` / `w_i_j_r` scheme (1-based) so exchange files match across runs.

pub mod export;

use crate::error::CfldError;
use crate::model::{capture_complement, DerivedCoefficients, Instance, Solution};
use crate::oa::CutPool;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

/// A model variable; `None` bounds mean unbounded on that side.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VariableDef {
    pub name: String,
    pub kind: VarKind,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// Sparse linear row: Σ terms `sense` rhs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearRow {
    pub name: String,
    /// (variable index, coefficient) pairs, index-sorted.
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Sparse affine expression Σ terms + constant.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(index: usize) -> Self {
        LinExpr {
            terms: vec![(index, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        LinExpr {
            terms: self.terms.iter().map(|&(i, c)| (i, c * factor)).collect(),
            constant: self.constant * factor,
        }
    }

    /// self − other.
    pub fn minus(&self, other: &LinExpr) -> Self {
        self.combine(other, -1.0)
    }

    /// self + other.
    pub fn plus(&self, other: &LinExpr) -> Self {
        self.combine(other, 1.0)
    }

    fn combine(&self, other: &LinExpr, sign: f64) -> Self {
        let mut terms = self.terms.clone();
        for &(i, c) in &other.terms {
            match terms.iter_mut().find(|(ti, _)| *ti == i) {
                Some((_, tc)) => *tc += sign * c,
                None => terms.push((i, sign * c)),
            }
        }
        terms.sort_by_key(|&(i, _)| i);
        LinExpr {
            terms,
            constant: self.constant + sign * other.constant,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(i, c)| c * values[i])
            .sum::<f64>()
            + self.constant
    }
}

/// A conic row.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRow {
    /// u·w ≥ t² with u, w ≥ 0.
    Rotated {
        name: String,
        u: LinExpr,
        w: LinExpr,
        t: LinExpr,
    },
    /// ‖norm‖₂ ≤ bound.
    Soc {
        name: String,
        norm: Vec<LinExpr>,
        bound: LinExpr,
    },
}

impl ConeRow {
    pub fn name(&self) -> &str {
        match self {
            ConeRow::Rotated { name, .. } => name,
            ConeRow::Soc { name, .. } => name,
        }
    }
}

/// Minimization objective: Σ terms + constant.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Objective {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

/// A solver-agnostic sparse mathematical program (always minimization).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FormulationModel {
    pub name: String,
    pub variables: Vec<VariableDef>,
    pub linear_rows: Vec<LinearRow>,
    pub cone_rows: Vec<ConeRow>,
    pub objective: Objective,
}

impl FormulationModel {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_linear_rows(&self) -> usize {
        self.linear_rows.len()
    }

    pub fn num_cone_rows(&self) -> usize {
        self.cone_rows.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Name → index map for bulk lookups.
    pub fn name_map(&self) -> std::collections::HashMap<&str, usize> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect()
    }
}

/// Dense variable assignment aligned with a model's variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    values: Vec<f64>,
}

impl Assignment {
    /// Build from name/value pairs; every model variable must be covered and
    /// unknown names are rejected.
    pub fn from_pairs_strict<'a>(
        model: &FormulationModel,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let map = model.name_map();
        let mut values = vec![f64::NAN; model.num_variables()];
        for (name, value) in pairs {
            match map.get(name) {
                Some(&idx) => values[idx] = value,
                None => return Err(CfldError::MissingVariable(format!("unknown name {name}"))),
            }
        }
        if let Some(idx) = values.iter().position(|v| v.is_nan()) {
            return Err(CfldError::MissingVariable(
                model.variables[idx].name.clone(),
            ));
        }
        Ok(Assignment { values })
    }

    /// Build from name/value pairs with defaults: missing binaries are 0,
    /// missing continuous variables sit at their lower bound (or 0 when
    /// unbounded below). Unknown names are collected, not fatal.
    pub fn from_pairs_with_defaults<'a>(
        model: &FormulationModel,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> (Self, Vec<String>) {
        let map = model.name_map();
        let mut values: Vec<f64> = model
            .variables
            .iter()
            .map(|v| match v.kind {
                VarKind::Binary => 0.0,
                VarKind::Continuous => v.lower.unwrap_or(0.0),
            })
            .collect();
        let mut ignored = Vec::new();
        for (name, value) in pairs {
            match map.get(name) {
                Some(&idx) => values[idx] = value,
                None => ignored.push(name.to_string()),
            }
        }
        (Assignment { values }, ignored)
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Assignment { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, model: &FormulationModel, name: &str) -> Option<f64> {
        model.var_index(name).map(|i| self.values[i])
    }
}

/// Worst violations of an assignment, reported as nonnegative magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Worst linear-row or variable-bound residual.
    pub max_linear_residual: f64,
    pub max_cone_violation: f64,
    pub max_integrality_violation: f64,
    pub objective_value: f64,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        self.max_linear_residual
            .max(self.max_cone_violation)
            .max(self.max_integrality_violation)
    }
}

fn var_name_x(j: usize) -> String {
    format!("x_{}", j + 1)
}

fn var_name_y(j: usize, r: usize) -> String {
    format!("y_{}_{}", j + 1, r + 1)
}

fn var_name_beta(i: usize) -> String {
    format!("beta_{}", i + 1)
}

fn var_name_z(i: usize) -> String {
    format!("z_{}", i + 1)
}

fn var_name_w(i: usize, j: usize, r: usize) -> String {
    format!("w_{}_{}_{}", i + 1, j + 1, r + 1)
}

/// Shared x/y/β prefix of all three formulations. Returns the β block offset.
fn push_common_variables(
    model: &mut FormulationModel,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
) -> (usize, usize, usize) {
    let (nc, nl, nz) = (
        instance.num_candidates(),
        instance.num_levels(),
        instance.num_zones(),
    );
    for j in 0..nc {
        model.variables.push(VariableDef {
            name: var_name_x(j),
            kind: VarKind::Binary,
            lower: Some(0.0),
            upper: Some(1.0),
        });
    }
    for j in 0..nc {
        for r in 0..nl {
            model.variables.push(VariableDef {
                name: var_name_y(j, r),
                kind: VarKind::Binary,
                lower: Some(0.0),
                upper: Some(1.0),
            });
        }
    }
    let beta_offset = model.variables.len();
    for i in 0..nz {
        model.variables.push(VariableDef {
            name: var_name_beta(i),
            kind: VarKind::Continuous,
            lower: Some(coeffs.beta_lower(i)),
            upper: Some(coeffs.beta_upper()),
        });
    }
    let x_offset = 0;
    let y_offset = nc;
    (x_offset, y_offset, beta_offset)
}

fn y_index(y_offset: usize, num_levels: usize, j: usize, r: usize) -> usize {
    y_offset + j * num_levels + r
}

/// Linking rows Σ_r y_jr − x_j = 0, one per candidate.
fn push_linking_rows(
    model: &mut FormulationModel,
    instance: &Instance,
    x_offset: usize,
    y_offset: usize,
) {
    let nl = instance.num_levels();
    for j in 0..instance.num_candidates() {
        let mut terms: Vec<(usize, f64)> =
            (0..nl).map(|r| (y_index(y_offset, nl, j, r), 1.0)).collect();
        terms.push((x_offset + j, -1.0));
        terms.sort_by_key(|&(i, _)| i);
        model.linear_rows.push(LinearRow {
            name: format!("link_{}", j + 1),
            terms,
            sense: RowSense::Eq,
            rhs: 0.0,
        });
    }
}

fn cost_objective(
    instance: &Instance,
    x_offset: usize,
    y_offset: usize,
    beta_offset: usize,
) -> Objective {
    let nl = instance.num_levels();
    let mut terms = Vec::new();
    for j in 0..instance.num_candidates() {
        terms.push((x_offset + j, instance.fixed_cost(j)));
    }
    for j in 0..instance.num_candidates() {
        for r in 0..nl {
            terms.push((y_index(y_offset, nl, j, r), instance.level_cost(j, r)));
        }
    }
    for i in 0..instance.num_zones() {
        terms.push((beta_offset + i, instance.buying_power(i)));
    }
    Objective {
        terms,
        constant: 0.0,
    }
}

/// McCormick MILP: w_ijr stands in for the bilinear product y_jr·β_i, caged by
/// the four envelope rows, which force w = y·β at binary points.
pub fn build_milp(instance: &Instance, coeffs: &DerivedCoefficients) -> FormulationModel {
    let (nz, nc, nl) = (
        instance.num_zones(),
        instance.num_candidates(),
        instance.num_levels(),
    );
    let mut model = FormulationModel {
        name: "cfld_milp".into(),
        variables: Vec::new(),
        linear_rows: Vec::new(),
        cone_rows: Vec::new(),
        objective: Objective {
            terms: Vec::new(),
            constant: 0.0,
        },
    };
    let (x_offset, y_offset, beta_offset) = push_common_variables(&mut model, instance, coeffs);
    let w_offset = model.variables.len();
    for i in 0..nz {
        for j in 0..nc {
            for r in 0..nl {
                model.variables.push(VariableDef {
                    name: var_name_w(i, j, r),
                    kind: VarKind::Continuous,
                    lower: Some(0.0),
                    upper: Some(1.0),
                });
            }
        }
    }
    let w_index = |i: usize, j: usize, r: usize| w_offset + (i * nc + j) * nl + r;

    // Defining rows: Σ_jr b_ijr w_ijr + β_i = 1.
    for i in 0..nz {
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(nc * nl + 1);
        for j in 0..nc {
            for r in 0..nl {
                terms.push((w_index(i, j, r), coeffs.b(i, j, r)));
            }
        }
        terms.push((beta_offset + i, 1.0));
        terms.sort_by_key(|&(idx, _)| idx);
        model.linear_rows.push(LinearRow {
            name: format!("def_{}", i + 1),
            terms,
            sense: RowSense::Eq,
            rhs: 1.0,
        });
    }

    // Four envelope rows per (i, j, r).
    let beta_u = coeffs.beta_upper();
    for i in 0..nz {
        let beta_l = coeffs.beta_lower(i);
        for j in 0..nc {
            for r in 0..nl {
                let w = w_index(i, j, r);
                let y = y_index(y_offset, nl, j, r);
                let beta = beta_offset + i;
                // w ≥ β − β^U(1 − y)
                model.linear_rows.push(LinearRow {
                    name: format!("mclo1_{}_{}_{}", i + 1, j + 1, r + 1),
                    terms: vec![(y, -beta_u), (beta, -1.0), (w, 1.0)],
                    sense: RowSense::Ge,
                    rhs: -beta_u,
                });
                // w ≥ β^L_i y
                model.linear_rows.push(LinearRow {
                    name: format!("mclo2_{}_{}_{}", i + 1, j + 1, r + 1),
                    terms: vec![(y, -beta_l), (w, 1.0)],
                    sense: RowSense::Ge,
                    rhs: 0.0,
                });
                // w ≤ β − β^L_i(1 − y)
                model.linear_rows.push(LinearRow {
                    name: format!("mcup1_{}_{}_{}", i + 1, j + 1, r + 1),
                    terms: vec![(y, -beta_l), (beta, -1.0), (w, 1.0)],
                    sense: RowSense::Le,
                    rhs: -beta_l,
                });
                // w ≤ β^U y
                model.linear_rows.push(LinearRow {
                    name: format!("mcup2_{}_{}_{}", i + 1, j + 1, r + 1),
                    terms: vec![(y, -beta_u), (w, 1.0)],
                    sense: RowSense::Le,
                    rhs: 0.0,
                });
            }
        }
    }

    push_linking_rows(&mut model, instance, x_offset, y_offset);
    model.objective = cost_objective(instance, x_offset, y_offset, beta_offset);
    model
}

/// Outer-approximation master: the epigraph variables β_i are pinned from
/// below by one tangent cut per recorded point and zone.
pub fn build_oa_master(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    cuts: &CutPool,
) -> FormulationModel {
    let (nz, nc, nl) = (
        instance.num_zones(),
        instance.num_candidates(),
        instance.num_levels(),
    );
    let mut model = FormulationModel {
        name: "cfld_oa_master".into(),
        variables: Vec::new(),
        linear_rows: Vec::new(),
        cone_rows: Vec::new(),
        objective: Objective {
            terms: Vec::new(),
            constant: 0.0,
        },
    };
    let (x_offset, y_offset, beta_offset) = push_common_variables(&mut model, instance, coeffs);

    // β_i ≥ Σ_jr g_ijr(ȳ)(y_jr − ȳ_jr) + F̂_i(ȳ), rearranged to put variables
    // on the left: β_i − Σ_jr g_ijr y_jr ≥ F̂_i(ȳ) − Σ_jr g_ijr ȳ_jr.
    for (t, cut) in cuts.iter().enumerate() {
        let ybar = cut.point.y_values(nl);
        for i in 0..nz {
            let mut terms: Vec<(usize, f64)> = Vec::with_capacity(nc * nl + 1);
            let mut rhs = cut.intercepts[i];
            for j in 0..nc {
                for r in 0..nl {
                    let g = cut.gradient[(i * nc + j) * nl + r];
                    terms.push((y_index(y_offset, nl, j, r), -g));
                    rhs -= g * ybar[j * nl + r];
                }
            }
            terms.push((beta_offset + i, 1.0));
            terms.sort_by_key(|&(idx, _)| idx);
            model.linear_rows.push(LinearRow {
                name: format!("cut_{}_{}", t + 1, i + 1),
                terms,
                sense: RowSense::Ge,
                rhs,
            });
        }
    }

    push_linking_rows(&mut model, instance, x_offset, y_offset);
    model.objective = cost_objective(instance, x_offset, y_offset, beta_offset);
    model
}

/// Conic form: z_i carries the zone total and the rotated cone β_i·z_i ≥ 1
/// replaces the fractional term exactly at optimality.
pub fn build_micqp(instance: &Instance, coeffs: &DerivedCoefficients) -> FormulationModel {
    let (nz, nc, nl) = (
        instance.num_zones(),
        instance.num_candidates(),
        instance.num_levels(),
    );
    let mut model = FormulationModel {
        name: "cfld_micqp".into(),
        variables: Vec::new(),
        linear_rows: Vec::new(),
        cone_rows: Vec::new(),
        objective: Objective {
            terms: Vec::new(),
            constant: 0.0,
        },
    };
    let (x_offset, y_offset, beta_offset) = push_common_variables(&mut model, instance, coeffs);
    let z_offset = model.variables.len();
    for i in 0..nz {
        model.variables.push(VariableDef {
            name: var_name_z(i),
            kind: VarKind::Continuous,
            lower: Some(1.0),
            upper: None,
        });
    }

    // z_i − Σ_jr b_ijr y_jr = 1.
    for i in 0..nz {
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(nc * nl + 1);
        for j in 0..nc {
            for r in 0..nl {
                terms.push((y_index(y_offset, nl, j, r), -coeffs.b(i, j, r)));
            }
        }
        terms.push((z_offset + i, 1.0));
        terms.sort_by_key(|&(idx, _)| idx);
        model.linear_rows.push(LinearRow {
            name: format!("zdef_{}", i + 1),
            terms,
            sense: RowSense::Eq,
            rhs: 1.0,
        });
    }

    push_linking_rows(&mut model, instance, x_offset, y_offset);
    for i in 0..nz {
        model.cone_rows.push(ConeRow::Rotated {
            name: format!("rc_{}", i + 1),
            u: LinExpr::var(beta_offset + i),
            w: LinExpr::var(z_offset + i),
            t: LinExpr::constant(1.0),
        });
    }
    model.objective = cost_objective(instance, x_offset, y_offset, beta_offset);
    model
}

/// Replace every rotated-cone row u·w ≥ t² by the equivalent second-order-cone
/// row ‖(2t, u − w)‖₂ ≤ u + w. Variables are untouched.
pub fn soc_convert(model: &FormulationModel) -> FormulationModel {
    let mut out = model.clone();
    out.cone_rows = model
        .cone_rows
        .iter()
        .map(|row| match row {
            ConeRow::Rotated { name, u, w, t } => ConeRow::Soc {
                name: name.clone(),
                norm: vec![t.scaled(2.0), u.minus(w)],
                bound: u.plus(w),
            },
            soc @ ConeRow::Soc { .. } => soc.clone(),
        })
        .collect();
    out
}

/// Evaluate the worst constraint violations of a dense assignment.
pub fn check_feasibility(model: &FormulationModel, assignment: &Assignment) -> FeasibilityReport {
    let v = assignment.values();
    debug_assert_eq!(v.len(), model.num_variables());

    let mut linear: f64 = 0.0;
    for row in &model.linear_rows {
        let lhs: f64 = row.terms.iter().map(|&(i, c)| c * v[i]).sum();
        let residual = match row.sense {
            RowSense::Le => (lhs - row.rhs).max(0.0),
            RowSense::Ge => (row.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - row.rhs).abs(),
        };
        linear = linear.max(residual);
    }
    for (idx, var) in model.variables.iter().enumerate() {
        if let Some(lo) = var.lower {
            linear = linear.max(lo - v[idx]);
        }
        if let Some(up) = var.upper {
            linear = linear.max(v[idx] - up);
        }
    }

    let mut cone: f64 = 0.0;
    for row in &model.cone_rows {
        let violation = match row {
            ConeRow::Rotated { u, w, t, .. } => {
                let (uv, wv, tv) = (u.eval(v), w.eval(v), t.eval(v));
                (tv * tv - uv * wv).max(-uv).max(-wv).max(0.0)
            }
            ConeRow::Soc { norm, bound, .. } => {
                let nrm = norm
                    .iter()
                    .map(|e| e.eval(v).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (nrm - bound.eval(v)).max(0.0)
            }
        };
        cone = cone.max(violation);
    }

    let mut integrality: f64 = 0.0;
    for (idx, var) in model.variables.iter().enumerate() {
        if var.kind == VarKind::Binary {
            integrality = integrality.max(v[idx].min((v[idx] - 1.0).abs()).abs());
        }
    }

    let objective_value = model
        .objective
        .terms
        .iter()
        .map(|&(i, c)| c * v[i])
        .sum::<f64>()
        + model.objective.constant;

    FeasibilityReport {
        max_linear_residual: linear,
        max_cone_violation: cone,
        max_integrality_violation: integrality,
        objective_value,
    }
}

/// Exact MILP assignment for a feasible solution: β_i = F̂_i(y),
/// w_ijr = y_jr·β_i.
pub fn milp_assignment(
    model: &FormulationModel,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    solution: &Solution,
) -> Result<Assignment> {
    let nl = instance.num_levels();
    let fhat = capture_complement(coeffs, &solution.to_point(nl));
    let mut pairs: Vec<(String, f64)> = xy_pairs(instance, solution);
    for (i, &f) in fhat.iter().enumerate() {
        pairs.push((var_name_beta(i), f));
    }
    for i in 0..instance.num_zones() {
        for (j, choice) in solution.choices().iter().enumerate() {
            for r in 0..nl {
                let y = match choice {
                    Some(cr) if *cr == r => 1.0,
                    _ => 0.0,
                };
                pairs.push((var_name_w(i, j, r), y * fhat[i]));
            }
        }
    }
    Assignment::from_pairs_strict(model, pairs.iter().map(|(n, v)| (n.as_str(), *v)))
}

/// Exact OA-master assignment: β_i = F̂_i(y).
pub fn oa_master_assignment(
    model: &FormulationModel,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    solution: &Solution,
) -> Result<Assignment> {
    let fhat = capture_complement(coeffs, &solution.to_point(instance.num_levels()));
    let mut pairs = xy_pairs(instance, solution);
    for (i, &f) in fhat.iter().enumerate() {
        pairs.push((var_name_beta(i), f));
    }
    Assignment::from_pairs_strict(model, pairs.iter().map(|(n, v)| (n.as_str(), *v)))
}

/// Exact MICQP assignment: z_i = Σ b·y + 1, β_i = 1/z_i.
pub fn micqp_assignment(
    model: &FormulationModel,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    solution: &Solution,
) -> Result<Assignment> {
    let point = solution.to_point(instance.num_levels());
    let totals = crate::model::zone_totals(coeffs, &point);
    let mut pairs = xy_pairs(instance, solution);
    for (i, &z) in totals.iter().enumerate() {
        pairs.push((var_name_z(i), z));
        pairs.push((var_name_beta(i), 1.0 / z));
    }
    Assignment::from_pairs_strict(model, pairs.iter().map(|(n, v)| (n.as_str(), *v)))
}

fn xy_pairs(instance: &Instance, solution: &Solution) -> Vec<(String, f64)> {
    let nl = instance.num_levels();
    let mut pairs = Vec::new();
    for (j, choice) in solution.choices().iter().enumerate() {
        pairs.push((var_name_x(j), if choice.is_some() { 1.0 } else { 0.0 }));
        for r in 0..nl {
            let y = match choice {
                Some(cr) if *cr == r => 1.0,
                _ => 0.0,
            };
            pairs.push((var_name_y(j, r), y));
        }
    }
    pairs
}

/// Recover a feasible solution from a model assignment's x/y block.
pub fn solution_from_assignment(
    instance: &Instance,
    model: &FormulationModel,
    assignment: &Assignment,
    tol: f64,
) -> Result<Solution> {
    let (nc, nl) = (instance.num_candidates(), instance.num_levels());
    let map = model.name_map();
    let v = assignment.values();
    let mut x = Vec::with_capacity(nc);
    let mut y = Vec::with_capacity(nc * nl);
    for j in 0..nc {
        let idx = map
            .get(var_name_x(j).as_str())
            .copied()
            .ok_or_else(|| CfldError::MissingVariable(var_name_x(j)))?;
        x.push(v[idx]);
        for r in 0..nl {
            let idx = map
                .get(var_name_y(j, r).as_str())
                .copied()
                .ok_or_else(|| CfldError::MissingVariable(var_name_y(j, r)))?;
            y.push(v[idx]);
        }
    }
    Solution::from_binary_xy(&x, &y, nc, nl, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_fixtures::{random_instance, tiny_symmetric_instance};
    use crate::model::{min_objective_solution, profit};
    use crate::oa::CutPool;
    use crate::oracle;

    fn all_solutions(nc: usize, nl: usize) -> Vec<Solution> {
        let mut out = Vec::new();
        let radix = nl + 1;
        let total = radix.pow(nc as u32);
        for code in 0..total {
            let mut rest = code;
            let mut choices = Vec::with_capacity(nc);
            for _ in 0..nc {
                let d = rest % radix;
                rest /= radix;
                choices.push(if d == 0 { None } else { Some(d - 1) });
            }
            out.push(Solution::from_choices(choices));
        }
        out
    }

    #[test]
    fn milp_size_matches_closed_forms() {
        let inst = random_instance(3, 4, 3, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_milp(&inst, &coeffs);
        let (i, j, r) = (4, 3, 2);
        assert_eq!(model.num_variables(), j + j * r + i + i * j * r);
        assert_eq!(model.num_linear_rows(), i + j + 4 * i * j * r);
        assert_eq!(model.num_cone_rows(), 0);
    }

    #[test]
    fn unit_milp_has_four_variables_and_six_rows() {
        let inst = tiny_symmetric_instance();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_milp(&inst, &coeffs);
        assert_eq!(model.num_variables(), 4);
        assert_eq!(model.num_linear_rows(), 6);
        let names: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["x_1", "y_1_1", "beta_1", "w_1_1_1"]);
    }

    #[test]
    fn oracle_point_is_exactly_feasible_in_the_milp() {
        let inst = random_instance(47, 6, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let best = oracle::enumerate_optimal(&inst, &coeffs, 1 << 24).unwrap();
        let model = build_milp(&inst, &coeffs);
        let assignment = milp_assignment(&model, &inst, &coeffs, &best.best).unwrap();
        let report = check_feasibility(&model, &assignment);
        assert!(report.max_violation() < 1e-9, "{report:?}");
        let expect = inst.total_buying_power() - best.best_profit;
        assert!((report.objective_value - expect).abs() < 1e-9);
    }

    #[test]
    fn envelopes_hold_for_every_binary_point() {
        let inst = random_instance(51, 3, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_milp(&inst, &coeffs);
        for sol in all_solutions(4, 2) {
            let assignment = milp_assignment(&model, &inst, &coeffs, &sol).unwrap();
            let report = check_feasibility(&model, &assignment);
            assert!(
                report.max_violation() < 1e-9,
                "solution {sol:?}: {report:?}"
            );
        }
    }

    #[test]
    fn empty_pool_master_underestimates_true_optimum() {
        let inst = random_instance(9, 5, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let best = oracle::enumerate_optimal(&inst, &coeffs, 1 << 24).unwrap();
        let model = build_oa_master(&inst, &coeffs, &CutPool::new());
        // With no cuts the betas rest at their lower bounds and the master
        // value of any feasible point underestimates its true value.
        for sol in [Solution::closed(4), best.best.clone()] {
            let mut value = 0.0;
            for (j, choice) in sol.choices().iter().enumerate() {
                if let Some(r) = choice {
                    value += inst.fixed_cost(j) + inst.level_cost(j, *r);
                }
            }
            for i in 0..5 {
                value += inst.buying_power(i) * coeffs.beta_lower(i);
            }
            let truth = min_objective_solution(&inst, &coeffs, &sol).unwrap();
            assert!(value <= truth + 1e-9);
        }
        assert_eq!(model.num_linear_rows(), 4); // linking only
    }

    #[test]
    fn cut_at_origin_reads_one_minus_attraction() {
        // The tangent at ȳ = 0 has gradient −b and intercept 1, so the row is
        // β_i ≥ 1 − Σ_jr b_ijr y_jr.
        let inst = tiny_symmetric_instance();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let mut pool = CutPool::new();
        assert!(pool.add(Solution::closed(1), &coeffs));
        let model = build_oa_master(&inst, &coeffs, &pool);
        let row = model
            .linear_rows
            .iter()
            .find(|r| r.name == "cut_1_1")
            .unwrap();
        // β_1 − (−b)·y = β_1 + 1.0·y ≥ 1.
        let y_idx = model.var_index("y_1_1").unwrap();
        let beta_idx = model.var_index("beta_1").unwrap();
        assert_eq!(row.sense, RowSense::Ge);
        assert!((row.rhs - 1.0).abs() < 1e-15);
        let y_coeff = row.terms.iter().find(|(i, _)| *i == y_idx).unwrap().1;
        let beta_coeff = row.terms.iter().find(|(i, _)| *i == beta_idx).unwrap().1;
        assert!((y_coeff - 1.0).abs() < 1e-15);
        assert!((beta_coeff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cuts_never_exclude_feasible_binary_points() {
        let inst = random_instance(73, 4, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let mut pool = CutPool::new();
        pool.add(Solution::closed(4), &coeffs);
        pool.add(
            Solution::from_choices(vec![Some(1), None, Some(0), Some(1)]),
            &coeffs,
        );
        pool.add(
            Solution::from_choices(vec![Some(1), Some(1), Some(1), Some(1)]),
            &coeffs,
        );
        let model = build_oa_master(&inst, &coeffs, &pool);
        for sol in all_solutions(4, 2) {
            let assignment = oa_master_assignment(&model, &inst, &coeffs, &sol).unwrap();
            let report = check_feasibility(&model, &assignment);
            assert!(
                report.max_violation() < 1e-9,
                "cut violated at {sol:?}: {report:?}"
            );
        }
    }

    #[test]
    fn micqp_size_is_linear_in_zones() {
        let inst = random_instance(3, 6, 4, 2, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_micqp(&inst, &coeffs);
        let (i, j, r) = (6, 4, 3);
        assert_eq!(model.num_variables(), j + j * r + 2 * i);
        assert_eq!(model.num_linear_rows(), i + j);
        assert_eq!(model.num_cone_rows(), i);
    }

    #[test]
    fn oracle_point_sits_on_the_cone_boundary() {
        let inst = random_instance(29, 5, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let best = oracle::enumerate_optimal(&inst, &coeffs, 1 << 24).unwrap();
        let model = build_micqp(&inst, &coeffs);
        let assignment = micqp_assignment(&model, &inst, &coeffs, &best.best).unwrap();
        let report = check_feasibility(&model, &assignment);
        assert!(report.max_violation() < 1e-12, "{report:?}");
        let expect = inst.total_buying_power() - best.best_profit;
        assert!((report.objective_value - expect).abs() < 1e-9);

        // β·z = 1 exactly at the optimal completion for fixed binaries: the
        // objective is strictly increasing in each β_i.
        for i in 0..5 {
            let beta = assignment.get(&model, &format!("beta_{}", i + 1)).unwrap();
            let z = assignment.get(&model, &format!("z_{}", i + 1)).unwrap();
            assert!((beta * z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_closed_point_is_conic_feasible_at_total_demand() {
        let inst = random_instance(31, 4, 3, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_micqp(&inst, &coeffs);
        let assignment = micqp_assignment(&model, &inst, &coeffs, &Solution::closed(3)).unwrap();
        let report = check_feasibility(&model, &assignment);
        assert!(report.max_violation() < 1e-12);
        assert!((report.objective_value - inst.total_buying_power()).abs() < 1e-9);
    }

    #[test]
    fn soc_conversion_boundary_identities() {
        // Triple (β, z, 1) at β = 0.5, z = 2: ‖(2, −1.5)‖ = 2.5 = β + z.
        let model = FormulationModel {
            name: "t".into(),
            variables: vec![
                VariableDef {
                    name: "beta".into(),
                    kind: VarKind::Continuous,
                    lower: Some(0.0),
                    upper: Some(1.0),
                },
                VariableDef {
                    name: "z".into(),
                    kind: VarKind::Continuous,
                    lower: Some(1.0),
                    upper: None,
                },
            ],
            linear_rows: vec![],
            cone_rows: vec![ConeRow::Rotated {
                name: "rc".into(),
                u: LinExpr::var(0),
                w: LinExpr::var(1),
                t: LinExpr::constant(1.0),
            }],
            objective: Objective {
                terms: vec![],
                constant: 0.0,
            },
        };
        let soc = soc_convert(&model);
        match &soc.cone_rows[0] {
            ConeRow::Soc { norm, bound, .. } => {
                let at = |beta: f64, z: f64| {
                    let v = vec![beta, z];
                    let n = norm.iter().map(|e| e.eval(&v).powi(2)).sum::<f64>().sqrt();
                    (n, bound.eval(&v))
                };
                let (n, b) = at(0.5, 2.0);
                assert!((n - 2.5).abs() < 1e-15 && (b - 2.5).abs() < 1e-15);
                let (n, b) = at(1.0, 1.0);
                assert!((n - 2.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
            }
            _ => panic!("expected a SOC row"),
        }
        assert_eq!(soc.num_variables(), model.num_variables());
    }

    #[test]
    fn rotated_and_soc_agree_on_random_triples() {
        let mut rng = crate::instancegen::SplitMix64::new(2024);
        let mut checked = 0usize;
        for _ in 0..100_000 {
            let x = rng.uniform(0.0, 10.0);
            let y = rng.uniform(0.0, 10.0);
            let z = rng.uniform(0.0, 10.0);
            let rotated = x * x - y * z; // ≤ 0 iff inside
            let soc = (4.0 * x * x + (y - z) * (y - z)).sqrt() - (y + z);
            let disagree = (rotated <= 0.0) != (soc <= 0.0);
            if disagree {
                assert!(
                    rotated.abs() < 1e-12 || soc.abs() < 1e-12,
                    "genuine disagreement at ({x},{y},{z}): {rotated} vs {soc}"
                );
            }
            checked += 1;
        }
        assert_eq!(checked, 100_000);
    }

    #[test]
    fn three_formulations_agree_at_every_binary_point() {
        let inst = random_instance(91, 4, 4, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let total = inst.total_buying_power();
        let milp = build_milp(&inst, &coeffs);
        let mut pool = CutPool::new();
        pool.add(Solution::closed(4), &coeffs);
        let master = build_oa_master(&inst, &coeffs, &pool);
        let micqp = build_micqp(&inst, &coeffs);
        for sol in all_solutions(4, 2) {
            let phi = profit(&inst, &coeffs, &sol).unwrap();
            let expect = total - phi;
            let a = check_feasibility(&milp, &milp_assignment(&milp, &inst, &coeffs, &sol).unwrap());
            let b = check_feasibility(
                &master,
                &oa_master_assignment(&master, &inst, &coeffs, &sol).unwrap(),
            );
            let c = check_feasibility(
                &micqp,
                &micqp_assignment(&micqp, &inst, &coeffs, &sol).unwrap(),
            );
            for (tag, report) in [("milp", &a), ("oa", &b), ("micqp", &c)] {
                assert!(
                    (report.objective_value - expect).abs() < 1e-9,
                    "{tag} at {sol:?}: {} vs {expect}",
                    report.objective_value
                );
            }
        }
    }

    #[test]
    fn constructed_violations_are_reported() {
        let inst = tiny_symmetric_instance();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_milp(&inst, &coeffs);
        let sol = Solution::from_choices(vec![Some(0)]);
        let good = milp_assignment(&model, &inst, &coeffs, &sol).unwrap();

        // Perturb one binary to 0.5.
        let mut values = good.values().to_vec();
        values[model.var_index("y_1_1").unwrap()] = 0.5;
        let report = check_feasibility(&model, &Assignment::from_values(values));
        assert!((report.max_integrality_violation - 0.5).abs() < 1e-12);

        // Violate one McCormick row knowingly: w ≤ β^U y fails by the slack.
        let mut values = good.values().to_vec();
        let w_idx = model.var_index("w_1_1_1").unwrap();
        let y_idx = model.var_index("y_1_1").unwrap();
        values[y_idx] = 0.0;
        values[model.var_index("x_1").unwrap()] = 0.0;
        values[w_idx] = 0.25; // w − β^U·y = 0.25 > 0
        let report = check_feasibility(&model, &Assignment::from_values(values));
        assert!(report.max_linear_residual >= 0.25 - 1e-12);
    }

    #[test]
    fn strict_assignment_rejects_missing_and_unknown() {
        let inst = tiny_symmetric_instance();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let model = build_micqp(&inst, &coeffs);
        let err = Assignment::from_pairs_strict(&model, [("x_1", 1.0)]).unwrap_err();
        assert!(matches!(err, CfldError::MissingVariable(_)));
        let err = Assignment::from_pairs_strict(&model, [("bogus", 1.0)]).unwrap_err();
        assert!(matches!(err, CfldError::MissingVariable(_)));
    }
}
