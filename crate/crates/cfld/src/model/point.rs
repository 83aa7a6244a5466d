use crate::error::CfldError;
use crate::Result;

/// A binary location/level assignment.
///
/// Each candidate is either closed or open at exactly one level, which encodes
/// membership in the feasible set (Σ_r y_jr = x_j with binary entries) by
/// construction. Level indices refer to the instance's ascending level order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Solution {
    choices: Vec<Option<usize>>,
}

impl Solution {
    /// All candidates closed.
    pub fn closed(num_candidates: usize) -> Self {
        Solution {
            choices: vec![None; num_candidates],
        }
    }

    pub fn from_choices(choices: Vec<Option<usize>>) -> Self {
        Solution { choices }
    }

    /// Reconstruct from raw binary x/y values, validating feasibility.
    ///
    /// `y` is row-major candidate × level. Entries must be within `tol` of 0
    /// or 1, each open candidate must carry exactly one level, and x must link
    /// to y.
    pub fn from_binary_xy(
        x: &[f64],
        y: &[f64],
        num_candidates: usize,
        num_levels: usize,
        tol: f64,
    ) -> Result<Self> {
        if x.len() != num_candidates || y.len() != num_candidates * num_levels {
            return Err(CfldError::InfeasibleSolution(format!(
                "expected {num_candidates} x values and {} y values, got {} and {}",
                num_candidates * num_levels,
                x.len(),
                y.len()
            )));
        }
        let as_bit = |v: f64, what: &str, idx: usize| -> Result<bool> {
            if (v - 0.0).abs() <= tol {
                Ok(false)
            } else if (v - 1.0).abs() <= tol {
                Ok(true)
            } else {
                Err(CfldError::InfeasibleSolution(format!(
                    "{what}[{idx}] = {v} is not binary within tolerance {tol}"
                )))
            }
        };
        let mut choices = Vec::with_capacity(num_candidates);
        for j in 0..num_candidates {
            let open = as_bit(x[j], "x", j)?;
            let mut level = None;
            for r in 0..num_levels {
                if as_bit(y[j * num_levels + r], "y", j * num_levels + r)? {
                    if level.is_some() {
                        return Err(CfldError::InfeasibleSolution(format!(
                            "candidate {j} has more than one active level"
                        )));
                    }
                    level = Some(r);
                }
            }
            match (open, level) {
                (true, Some(r)) => choices.push(Some(r)),
                (false, None) => choices.push(None),
                (true, None) => {
                    return Err(CfldError::InfeasibleSolution(format!(
                        "candidate {j} is open without a level"
                    )))
                }
                (false, Some(_)) => {
                    return Err(CfldError::InfeasibleSolution(format!(
                        "candidate {j} is closed but has an active level"
                    )))
                }
            }
        }
        Ok(Solution { choices })
    }

    pub fn num_candidates(&self) -> usize {
        self.choices.len()
    }

    /// `None` when closed, `Some(level)` when open.
    pub fn choice(&self, j: usize) -> Option<usize> {
        self.choices[j]
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choices
    }

    pub fn is_open(&self, j: usize) -> bool {
        self.choices[j].is_some()
    }

    pub fn open_count(&self) -> usize {
        self.choices.iter().filter(|c| c.is_some()).count()
    }

    /// The y matrix flattened row-major (candidate × level), entries 0 or 1.
    pub fn y_values(&self, num_levels: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.choices.len() * num_levels];
        for (j, choice) in self.choices.iter().enumerate() {
            if let Some(r) = choice {
                y[j * num_levels + r] = 1.0;
            }
        }
        y
    }

    pub fn x_values(&self) -> Vec<f64> {
        self.choices
            .iter()
            .map(|c| if c.is_some() { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn to_point(&self, num_levels: usize) -> FractionalPoint {
        FractionalPoint {
            y: self.y_values(num_levels),
            num_candidates: self.choices.len(),
            num_levels,
        }
    }

    /// Compare flattened y matrices lexicographically; the tie-break order
    /// used by the exhaustive optimizers.
    pub fn lex_y_key(&self, num_levels: usize) -> Vec<u8> {
        let mut key = vec![0u8; self.choices.len() * num_levels];
        for (j, choice) in self.choices.iter().enumerate() {
            if let Some(r) = choice {
                key[j * num_levels + r] = 1;
            }
        }
        key
    }
}

/// A point of the relaxed feasible region: y ∈ [0,1]^{J×R} with per-facility
/// level mass Σ_r y_jr ≤ 1. The opening variable is eliminated — the
/// continuous x_j is recovered as the facility sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint {
    y: Vec<f64>,
    num_candidates: usize,
    num_levels: usize,
}

impl FractionalPoint {
    const FEAS_TOL: f64 = 1e-9;

    pub fn zeros(num_candidates: usize, num_levels: usize) -> Self {
        FractionalPoint {
            y: vec![0.0; num_candidates * num_levels],
            num_candidates,
            num_levels,
        }
    }

    /// Validate and wrap a row-major candidate × level matrix.
    pub fn new(y: Vec<f64>, num_candidates: usize, num_levels: usize) -> Result<Self> {
        if y.len() != num_candidates * num_levels {
            return Err(CfldError::InvalidPoint(format!(
                "expected {num_candidates}x{num_levels} entries, got {}",
                y.len()
            )));
        }
        for (idx, &v) in y.iter().enumerate() {
            if !(v >= -Self::FEAS_TOL) || !v.is_finite() {
                return Err(CfldError::InvalidPoint(format!(
                    "y[{},{}] = {v} is negative",
                    idx / num_levels,
                    idx % num_levels
                )));
            }
        }
        for j in 0..num_candidates {
            let s: f64 = y[j * num_levels..(j + 1) * num_levels].iter().sum();
            if s > 1.0 + Self::FEAS_TOL {
                return Err(CfldError::InvalidPoint(format!(
                    "facility {j} level mass {s} exceeds 1"
                )));
            }
        }
        Ok(FractionalPoint {
            y,
            num_candidates,
            num_levels,
        })
    }

    pub(crate) fn from_raw(y: Vec<f64>, num_candidates: usize, num_levels: usize) -> Self {
        debug_assert_eq!(y.len(), num_candidates * num_levels);
        FractionalPoint {
            y,
            num_candidates,
            num_levels,
        }
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn y(&self, j: usize, r: usize) -> f64 {
        self.y[j * self.num_levels + r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.y
    }

    /// Level mass s_j = Σ_r y_jr, the continuous opening variable.
    pub fn facility_sum(&self, j: usize) -> f64 {
        self.y[j * self.num_levels..(j + 1) * self.num_levels]
            .iter()
            .sum()
    }
}
