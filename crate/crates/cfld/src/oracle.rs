//! Exhaustive ground-truth optimizer for small instances.
//!
//! Every feasible assignment is a digit vector over the candidates: digit 0
//! means closed, digit d > 0 means open at level d−1. The optimizer walks all
//! (|R|+1)^|J| digit vectors in mixed-radix order with the last candidate's
//! digit moving fastest, evaluates the exact profit of each, and keeps the
//! maximum, breaking ties toward the lexicographically smallest flattened
//! y matrix. This module stays deliberately simple — no pruning, no
//! incremental tricks — because every solver path in the crate is validated
//! against it.
//!
//! With `ExecMode::Parallel` the digit space is partitioned by leading digits
//! across the rayon pool; the merge applies the same (profit, tie-break) total
//! order, so the result is identical to the sequential walk.

use crate::error::CfldError;
use crate::exec::{map_collect, ExecMode};
use crate::model::{profit, DerivedCoefficients, Instance, Solution};
use crate::Result;

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUMERATION_CAP: u128 = 20_000_000;

/// Result of an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub best: Solution,
    pub best_profit: f64,
    /// Exactly (|R|+1)^|J|.
    pub count_evaluated: u128,
}

/// Exhaustively maximize profit over the feasible set.
pub fn enumerate_optimal(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    cap: u128,
) -> Result<OracleReport> {
    enumerate_optimal_with(instance, coeffs, cap, ExecMode::Sequential)
}

/// [`enumerate_optimal`] with an explicit execution mode.
pub fn enumerate_optimal_with(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    cap: u128,
    mode: ExecMode,
) -> Result<OracleReport> {
    let radix = instance.num_levels() as u128 + 1;
    let n = instance.num_candidates();
    let total = checked_pow(radix, n).filter(|&t| t <= cap).ok_or({
        CfldError::OracleTooLarge {
            configurations: checked_pow(radix, n).unwrap_or(u128::MAX),
            cap,
        }
    })?;

    // Partition by the leading digit block so each chunk is a contiguous
    // mixed-radix range.
    let chunks: u128 = if mode.is_parallel() {
        (total / 4096).clamp(1, 256)
    } else {
        1
    };
    let chunk_len = total.div_ceil(chunks);
    let ranges: Vec<(u128, u128)> = (0..chunks)
        .map(|c| {
            let lo = c * chunk_len;
            (lo, ((c + 1) * chunk_len).min(total))
        })
        .filter(|(lo, hi)| lo < hi)
        .collect();

    let bests = map_collect(mode, ranges, |(lo, hi)| scan_range(instance, coeffs, lo, hi));
    let mut best: Option<(f64, Solution)> = None;
    for candidate in bests {
        best = Some(match best {
            None => candidate,
            Some(incumbent) => pick_better(incumbent, candidate, instance.num_levels()),
        });
    }
    let (best_profit, best_solution) = best.expect("at least one configuration");
    Ok(OracleReport {
        best: best_solution,
        best_profit,
        count_evaluated: total,
    })
}

fn scan_range(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    lo: u128,
    hi: u128,
) -> (f64, Solution) {
    let n = instance.num_candidates();
    let radix = instance.num_levels() + 1;
    let mut digits = decode_digits(lo, radix, n);
    let mut best: Option<(f64, Solution)> = None;
    let mut code = lo;
    while code < hi {
        let solution = solution_from_digits(&digits);
        let value = profit(instance, coeffs, &solution).expect("digit vectors are feasible");
        let candidate = (value, solution);
        best = Some(match best {
            None => candidate,
            Some(incumbent) => pick_better(incumbent, candidate, instance.num_levels()),
        });
        code += 1;
        increment_digits(&mut digits, radix);
    }
    best.expect("nonempty range")
}

/// Larger profit wins; exact ties go to the lexicographically smaller y.
fn pick_better(
    a: (f64, Solution),
    b: (f64, Solution),
    num_levels: usize,
) -> (f64, Solution) {
    if b.0 > a.0 {
        b
    } else if b.0 == a.0 && b.1.lex_y_key(num_levels) < a.1.lex_y_key(num_levels) {
        b
    } else {
        a
    }
}

fn checked_pow(radix: u128, n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(radix)?;
    }
    Some(acc)
}

/// Digits of `code` in the given radix, most significant first.
fn decode_digits(code: u128, radix: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0usize; n];
    let mut rest = code;
    for slot in digits.iter_mut().rev() {
        *slot = (rest % radix as u128) as usize;
        rest /= radix as u128;
    }
    digits
}

/// Odometer step with the last digit fastest.
fn increment_digits(digits: &mut [usize], radix: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}

fn solution_from_digits(digits: &[usize]) -> Solution {
    Solution::from_choices(
        digits
            .iter()
            .map(|&d| if d == 0 { None } else { Some(d - 1) })
            .collect(),
    )
}
