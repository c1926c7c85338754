//! Independent brute-force oracle over the dense amplitude vector.
//!
//! Everything here re-derives its verdicts from first principles on the
//! full 2^n amplitude array: Schmidt rank across a cut is the rank of the
//! reshaped amplitude matrix, computed by exact Gaussian elimination over
//! the rational complex field, so a disagreement with the sparse machinery
//! is a real bug and never numerical noise. None of the canonical-form or
//! coefficient-matrix code is used. A floating-point rank routine exists
//! for speed comparisons only; nothing else consumes it.

use std::collections::HashSet;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::ExactComplex;
use crate::separability::FamilyLabel;
use crate::state::{PureState, QubitSubset};

/// Dense expansions are capped to keep memory bounded.
pub const MAX_DENSE_QUBITS: u8 = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("dense expansion supports at most {MAX_DENSE_QUBITS} qubits, requested {0}")]
    TooManyQubits(u8),
    #[error("amplitude vector has {got} entries, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("amplitude vector must contain a nonzero entry")]
    AllZero,
    #[error("subset must be a nonempty proper subset")]
    ImproperSubset,
    #[error("subset width {subset} does not match state width {state}")]
    WidthMismatch { subset: u8, state: u8 },
}

/// Full amplitude vector of an n-qubit state, indexed by basis integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseState {
    n: u8,
    amplitudes: Vec<ExactComplex>,
}

impl DenseState {
    pub fn new(n: u8, amplitudes: Vec<ExactComplex>) -> Result<Self, OracleError> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let expected = 1usize << n;
        if amplitudes.len() != expected {
            return Err(OracleError::BadLength {
                got: amplitudes.len(),
                expected,
            });
        }
        if amplitudes.iter().all(|a| a.is_zero()) {
            return Err(OracleError::AllZero);
        }
        Ok(DenseState { n, amplitudes })
    }

    pub fn qubit_count(&self) -> u8 {
        self.n
    }

    pub fn amplitudes(&self) -> &[ExactComplex] {
        &self.amplitudes
    }

    fn support(&self) -> Vec<u64> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, _)| i as u64)
            .collect()
    }
}

/// Expands a sparse state into its dense amplitude vector.
pub fn dense_vector(s: &PureState) -> Result<DenseState, OracleError> {
    let n = s.qubit_count();
    if n > MAX_DENSE_QUBITS {
        return Err(OracleError::TooManyQubits(n));
    }
    let mut amplitudes = vec![ExactComplex::zero(); 1usize << n];
    for (label, coeff) in s.terms() {
        amplitudes[label.bits() as usize] = coeff.clone();
    }
    DenseState::new(n, amplitudes)
}

fn check_subset(d: &DenseState, subset: QubitSubset) -> Result<(), OracleError> {
    if subset.register_width() != d.n {
        return Err(OracleError::WidthMismatch {
            subset: subset.register_width(),
            state: d.n,
        });
    }
    if !subset.is_proper_nonempty() {
        return Err(OracleError::ImproperSubset);
    }
    Ok(())
}

/// Rank of the amplitude matrix reshaped across the bipartition, with the
/// subset bits as row index. Exact elimination, no tolerance anywhere.
pub fn schmidt_rank(d: &DenseState, subset: QubitSubset) -> Result<usize, OracleError> {
    check_subset(d, subset)?;
    let co = subset.complement();
    // Keep only rows and columns that actually hold an entry; dropping
    // all-zero lines leaves the rank unchanged.
    let entries: Vec<(u64, u64, &ExactComplex)> = d
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, a)| (subset.extract(i as u64), co.extract(i as u64), a))
        .collect();
    let mut rows: Vec<u64> = entries.iter().map(|e| e.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<u64> = entries.iter().map(|e| e.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut matrix = vec![vec![ExactComplex::zero(); cols.len()]; rows.len()];
    for (r, c, amp) in entries {
        let ri = rows.binary_search(&r).expect("row present");
        let ci = cols.binary_search(&c).expect("column present");
        matrix[ri][ci] = amp.clone();
    }
    Ok(exact_rank(&mut matrix))
}

fn exact_rank(matrix: &mut [Vec<ExactComplex>]) -> usize {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(rank, pivot);
        let (done, rest) = matrix.split_at_mut(rank + 1);
        let pivot_row = &done[rank];
        for row in rest {
            if !row[col].is_zero() {
                let factor = &row[col] / &pivot_row[col];
                for (cell, pivot_cell) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    let delta = &factor * pivot_cell;
                    *cell = &*cell - &delta;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Floating-point rank with partial pivoting and a relative pivot
/// threshold. Fast but approximate; excluded from all acceptance checks.
pub fn schmidt_rank_f64(
    d: &DenseState,
    subset: QubitSubset,
    relative_tolerance: f64,
) -> Result<usize, OracleError> {
    check_subset(d, subset)?;
    let co = subset.complement();
    let rows = 1usize << subset.size();
    let cols = 1usize << co.size();
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
    let mut max_abs = 0.0f64;
    for (i, amp) in d.amplitudes.iter().enumerate() {
        if amp.is_zero() {
            continue;
        }
        let value = Complex64::new(
            amp.re.to_f64().unwrap_or(f64::NAN),
            amp.im.to_f64().unwrap_or(f64::NAN),
        );
        max_abs = max_abs.max(value.norm());
        matrix[subset.extract(i as u64) as usize][co.extract(i as u64) as usize] = value;
    }
    let threshold = relative_tolerance * max_abs;
    let mut rank = 0;
    for col in 0..cols {
        let Some((pivot, _)) = (rank..rows)
            .map(|r| (r, matrix[r][col].norm()))
            .filter(|&(_, norm)| norm > threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            continue;
        };
        matrix.swap(rank, pivot);
        let (done, rest) = matrix.split_at_mut(rank + 1);
        let pivot_row = &done[rank];
        for row in rest {
            let factor = row[col] / pivot_row[col];
            for (cell, pivot_cell) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *cell -= factor * pivot_cell;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

/// Classifies a dense state into the four families without touching any of
/// the sparse machinery: constant columns straight off the support,
/// separability by exhaustive rank-1 cuts, and the family-3/4 distinction
/// by a Cartesian-product test on the projected supports using set
/// membership only.
pub fn oracle_classify(d: &DenseState) -> FamilyLabel {
    let n = d.n;
    let support = d.support();
    if n == 1 {
        return FamilyLabel::Family1;
    }
    for q in 1..=n {
        let bit = 1u64 << (n - q);
        let first = support[0] & bit;
        if support.iter().all(|s| s & bit == first) {
            return FamilyLabel::Family1;
        }
    }
    let cuts: Vec<QubitSubset> = (0..1u64 << (n - 1))
        .map(|low| 1u64 << (n - 1) | low)
        .filter(|&mask| mask != (1u64 << n) - 1)
        .map(|mask| QubitSubset::from_mask(mask, n).expect("mask fits"))
        .collect();
    for &cut in &cuts {
        if schmidt_rank(d, cut).expect("valid cut") == 1 {
            return FamilyLabel::Family2;
        }
    }
    let pair_set: HashSet<u64> = support.iter().copied().collect();
    for &cut in &cuts {
        let co_mask = cut.complement().mask();
        let lefts: HashSet<u64> = support.iter().map(|s| s & cut.mask()).collect();
        let rights: HashSet<u64> = support.iter().map(|s| s & co_mask).collect();
        if lefts.len() < 2 || rights.len() < 2 {
            continue;
        }
        let cartesian = lefts
            .iter()
            .all(|&l| rights.iter().all(|&r| pair_set.contains(&(l | r))));
        if cartesian {
            return FamilyLabel::Family4;
        }
    }
    FamilyLabel::Family3
}
