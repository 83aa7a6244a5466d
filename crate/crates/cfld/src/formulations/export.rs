//! Byte-deterministic exporters for [`FormulationModel`].
//!
//! * MPS — free format, for linear models only (the MILP and OA master).
//!   Integrality travels through `MARKER INTORG/INTEND`, binaries get `BV`
//!   bounds, and an objective constant is carried as a negated RHS entry on
//!   the objective row, the convention mainstream solvers read back.
//! * CBF — conic benchmark format, version 3. Variables are declared free and
//!   all bounds become scalar constraint rows; rotated cones emit `QR` blocks
//!   (with the first member halved, since CBF's rotated cone carries a
//!   factor 2) and converted second-order rows emit `Q` blocks.
//! * JSON — a lossless serde mirror of the model; export → parse → export is
//!   a fixed point.
//!
//! Floats are rendered with the shortest round-trip decimal encoding, so
//! identical models always export identical bytes.

use std::fmt::Write as _;

use crate::error::CfldError;
use crate::formulations::{ConeRow, FormulationModel, LinExpr, RowSense, VarKind};
use crate::Result;

/// Render a float in shortest round-trip form.
fn num(x: f64) -> String {
    format!("{x}")
}

/// Free-format MPS text for a purely linear model.
pub fn to_mps(model: &FormulationModel) -> Result<String> {
    if model.num_cone_rows() > 0 {
        return Err(CfldError::UnsupportedExport(format!(
            "MPS cannot express the {} cone rows of {}; use the CBF or JSON export",
            model.num_cone_rows(),
            model.name
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", model.name);
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N OBJ");
    for row in &model.linear_rows {
        let tag = match row.sense {
            RowSense::Le => 'L',
            RowSense::Eq => 'E',
            RowSense::Ge => 'G',
        };
        let _ = writeln!(out, " {tag} {}", row.name);
    }

    // Column-major view of the coefficients.
    let mut columns: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.num_variables()];
    for (idx, coeff) in &model.objective.terms {
        if *coeff != 0.0 {
            columns[*idx].push(("OBJ", *coeff));
        }
    }
    for row in &model.linear_rows {
        for (idx, coeff) in &row.terms {
            if *coeff != 0.0 {
                columns[*idx].push((row.name.as_str(), *coeff));
            }
        }
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_integer_block = false;
    let mut marker_count = 0usize;
    for (var, entries) in model.variables.iter().zip(&columns) {
        let wants_integer = var.kind == VarKind::Binary;
        if wants_integer != in_integer_block {
            let tag = if wants_integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER{marker_count} 'MARKER' '{tag}'");
            marker_count += 1;
            in_integer_block = wants_integer;
        }
        for (row_name, coeff) in entries {
            let _ = writeln!(out, " {} {} {}", var.name, row_name, num(*coeff));
        }
        if entries.is_empty() {
            // A column must appear at least once to exist.
            let _ = writeln!(out, " {} OBJ 0", var.name);
        }
    }
    if in_integer_block {
        let _ = writeln!(out, " MARKER{marker_count} 'MARKER' 'INTEND'");
    }

    let _ = writeln!(out, "RHS");
    if model.objective.constant != 0.0 {
        let _ = writeln!(out, " RHS OBJ {}", num(-model.objective.constant));
    }
    for row in &model.linear_rows {
        if row.rhs != 0.0 {
            let _ = writeln!(out, " RHS {} {}", row.name, num(row.rhs));
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for var in &model.variables {
        match var.kind {
            VarKind::Binary => {
                let _ = writeln!(out, " BV BND {}", var.name);
            }
            VarKind::Continuous => {
                match var.lower {
                    Some(lo) if lo != 0.0 => {
                        let _ = writeln!(out, " LO BND {} {}", var.name, num(lo));
                    }
                    Some(_) => {} // the MPS default lower bound
                    None => {
                        let _ = writeln!(out, " MI BND {}", var.name);
                    }
                }
                if let Some(up) = var.upper {
                    let _ = writeln!(out, " UP BND {} {}", var.name, num(up));
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    Ok(out)
}

/// CBF v3 text; accepts linear rows, rotated cones and second-order cones.
pub fn to_cbf(model: &FormulationModel) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", model.name);
    let _ = writeln!(out, "VER\n3");
    let _ = writeln!(out, "\nOBJSENSE\nMIN");
    let _ = writeln!(out, "\nVAR\n{} 1\nF {}", model.num_variables(), model.num_variables());

    let integers: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| i)
        .collect();
    if !integers.is_empty() {
        let _ = writeln!(out, "\nINT\n{}", integers.len());
        for idx in &integers {
            let _ = writeln!(out, "{idx}");
        }
    }

    // Scalar rows in fixed order: model linear rows, then bound rows, then
    // cone blocks. Every row is A·vars + b ∈ cone.
    struct ScalarRow {
        terms: Vec<(usize, f64)>,
        constant: f64,
    }
    let mut rows: Vec<ScalarRow> = Vec::new();
    let mut groups: Vec<(String, usize)> = Vec::new();

    for row in &model.linear_rows {
        let cone = match row.sense {
            RowSense::Le => "L-",
            RowSense::Eq => "L=",
            RowSense::Ge => "L+",
        };
        rows.push(ScalarRow {
            terms: row.terms.clone(),
            constant: -row.rhs,
        });
        groups.push((cone.to_string(), 1));
    }
    for (idx, var) in model.variables.iter().enumerate() {
        if let Some(lo) = var.lower {
            rows.push(ScalarRow {
                terms: vec![(idx, 1.0)],
                constant: -lo,
            });
            groups.push(("L+".to_string(), 1));
        }
        if let Some(up) = var.upper {
            rows.push(ScalarRow {
                terms: vec![(idx, 1.0)],
                constant: -up,
            });
            groups.push(("L-".to_string(), 1));
        }
    }
    let expr_row = |e: &LinExpr, scale: f64| ScalarRow {
        terms: e.terms.iter().map(|&(i, c)| (i, c * scale)).collect(),
        constant: e.constant * scale,
    };
    for cone in &model.cone_rows {
        match cone {
            ConeRow::Rotated { u, w, t, .. } => {
                // CBF's QR cone reads 2·g1·g2 ≥ Σ g_k², so halve the first
                // member to encode u·w ≥ t².
                rows.push(expr_row(u, 0.5));
                rows.push(expr_row(w, 1.0));
                rows.push(expr_row(t, 1.0));
                groups.push(("QR".to_string(), 3));
            }
            ConeRow::Soc { norm, bound, .. } => {
                rows.push(expr_row(bound, 1.0));
                for e in norm {
                    rows.push(expr_row(e, 1.0));
                }
                groups.push(("Q".to_string(), 1 + norm.len()));
            }
        }
    }

    let _ = writeln!(out, "\nCON\n{} {}", rows.len(), groups.len());
    for (cone, dim) in &groups {
        let _ = writeln!(out, "{cone} {dim}");
    }

    let obj_nnz = model
        .objective
        .terms
        .iter()
        .filter(|(_, c)| *c != 0.0)
        .count();
    let _ = writeln!(out, "\nOBJACOORD\n{obj_nnz}");
    for (idx, coeff) in &model.objective.terms {
        if *coeff != 0.0 {
            let _ = writeln!(out, "{idx} {}", num(*coeff));
        }
    }
    if model.objective.constant != 0.0 {
        let _ = writeln!(out, "\nOBJBCOORD\n{}", num(model.objective.constant));
    }

    let a_nnz: usize = rows
        .iter()
        .map(|r| r.terms.iter().filter(|(_, c)| *c != 0.0).count())
        .sum();
    let _ = writeln!(out, "\nACOORD\n{a_nnz}");
    for (row_idx, row) in rows.iter().enumerate() {
        for (var_idx, coeff) in &row.terms {
            if *coeff != 0.0 {
                let _ = writeln!(out, "{row_idx} {var_idx} {}", num(*coeff));
            }
        }
    }
    let b_nnz = rows.iter().filter(|r| r.constant != 0.0).count();
    let _ = writeln!(out, "\nBCOORD\n{b_nnz}");
    for (row_idx, row) in rows.iter().enumerate() {
        if row.constant != 0.0 {
            let _ = writeln!(out, "{row_idx} {}", num(row.constant));
        }
    }
    Ok(out)
}

/// Lossless JSON mirror of the model.
pub fn to_json(model: &FormulationModel) -> String {
    let mut text = serde_json::to_string_pretty(model).expect("model serialization");
    text.push('\n');
    text
}

/// Parse a model previously produced by [`to_json`].
pub fn from_json(text: &str, origin: &str) -> Result<FormulationModel> {
    serde_json::from_str(text).map_err(|e| CfldError::Parse {
        path: origin.to_string(),
        detail: e.to_string(),
    })
}
