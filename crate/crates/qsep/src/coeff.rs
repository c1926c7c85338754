//! Coefficient matrices over canonical forms and the exact rank-1 test.
//!
//! Filling the g×h grid of a canonical form with the matching state
//! coefficients yields a matrix with no zero entries. The state factors
//! across that subset exactly when the matrix is an outer product, which —
//! because every entry is nonzero — reduces to the vanishing of the 2×2
//! minors anchored at entry (0,0). The solver is constructive and gauge
//! fixed: the row factor starts at 1, the column factor is the first row.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::bsm::CanonicalForm;
use crate::scalar::ExactComplex;
use crate::state::PureState;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("coefficient matrix must be at least 2x2, got {g}x{h}")]
    TooSmall { g: usize, h: usize },
    #[error("coefficient matrix entry ({row},{col}) is zero")]
    ZeroEntry { row: usize, col: usize },
    #[error("entry count {got} does not match shape {g}x{h}")]
    ShapeMismatch { got: usize, g: usize, h: usize },
    #[error("canonical form does not belong to this state")]
    StaleForm,
    #[error("matrix is not rank one")]
    NotRankOne,
}

/// A g×h matrix of nonzero exact coefficients, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    g: usize,
    h: usize,
    entries: Vec<ExactComplex>,
    provenance: Option<CanonicalForm>,
}

impl CoefficientMatrix {
    /// Builds a matrix from raw entries (row-major), without provenance.
    pub fn from_entries(
        g: usize,
        h: usize,
        entries: Vec<ExactComplex>,
    ) -> Result<Self, CoeffError> {
        if g < 2 || h < 2 {
            return Err(CoeffError::TooSmall { g, h });
        }
        if entries.len() != g * h {
            return Err(CoeffError::ShapeMismatch {
                got: entries.len(),
                g,
                h,
            });
        }
        for (i, entry) in entries.iter().enumerate() {
            if entry.is_zero() {
                return Err(CoeffError::ZeroEntry {
                    row: i / h,
                    col: i % h,
                });
            }
        }
        Ok(CoefficientMatrix {
            g,
            h,
            entries,
            provenance: None,
        })
    }

    pub fn row_count(&self) -> usize {
        self.g
    }

    pub fn col_count(&self) -> usize {
        self.h
    }

    pub fn entry(&self, row: usize, col: usize) -> &ExactComplex {
        &self.entries[row * self.h + col]
    }

    /// The canonical form this matrix was read through, when built from one.
    pub fn provenance(&self) -> Option<&CanonicalForm> {
        self.provenance.as_ref()
    }
}

/// Reads the state's coefficients through a canonical form's index map.
/// Entry `(row, col)` is the coefficient of the term whose label combines
/// `left_patterns[row]` with `right_patterns[col]`.
pub fn coefficient_matrix(
    s: &PureState,
    cf: &CanonicalForm,
) -> Result<CoefficientMatrix, CoeffError> {
    let (g, h) = (cf.g(), cf.h());
    if g < 2 || h < 2 {
        return Err(CoeffError::TooSmall { g, h });
    }
    let mut entries = Vec::with_capacity(g * h);
    for row in 0..g {
        for col in 0..h {
            let idx = cf.term_index(row, col);
            let expected = cf.assemble_bits(row, col);
            match s.terms().get(idx) {
                Some((label, coeff)) if label.bits() == expected => entries.push(coeff.clone()),
                _ => return Err(CoeffError::StaleForm),
            }
        }
    }
    Ok(CoefficientMatrix {
        g,
        h,
        entries,
        provenance: Some(cf.clone()),
    })
}

/// True iff the matrix is an outer product. With all entries nonzero this
/// is equivalent to `a[r][c]·a[0][0] = a[r][0]·a[0][c]` for every cell, so
/// only the minors through the anchor entry are checked.
pub fn is_rank_one(a: &CoefficientMatrix) -> bool {
    let anchor = a.entry(0, 0);
    for row in 1..a.row_count() {
        let lead = a.entry(row, 0);
        for col in 1..a.col_count() {
            if a.entry(row, col) * anchor != lead * a.entry(0, col) {
                return false;
            }
        }
    }
    true
}

/// Factor vectors recovered from a rank-1 matrix: `alpha[r]·beta[c]` equals
/// entry `(r, c)` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOneFactors {
    pub alpha: Vec<ExactComplex>,
    pub beta: Vec<ExactComplex>,
}

/// Solves `alphaᵀ·beta = A` with the gauge `alpha[0] = 1`, which makes
/// `beta` the first row of `A` and `alpha[r] = a[r][0]/a[0][0]`. Fails on
/// a matrix that is not rank one.
pub fn solve_rank_one(a: &CoefficientMatrix) -> Result<RankOneFactors, CoeffError> {
    let anchor = a.entry(0, 0);
    let alpha: Vec<ExactComplex> = (0..a.row_count())
        .map(|row| {
            if row == 0 {
                ExactComplex::one()
            } else {
                a.entry(row, 0) / anchor
            }
        })
        .collect();
    let beta: Vec<ExactComplex> = (0..a.col_count()).map(|col| a.entry(0, col).clone()).collect();
    for (row, alpha_r) in alpha.iter().enumerate() {
        for (col, beta_c) in beta.iter().enumerate() {
            if &(alpha_r * beta_c) != a.entry(row, col) {
                return Err(CoeffError::NotRankOne);
            }
        }
    }
    Ok(RankOneFactors { alpha, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsm::try_canonical_form;
    use crate::scalar::{one, real};
    use crate::state::{parse_state, QubitSubset};
    use crate::test_support::arb_scalar;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<ExactComplex>>) -> CoefficientMatrix {
        let g = rows.len();
        let h = rows[0].len();
        CoefficientMatrix::from_entries(g, h, rows.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn worked_example_matrix() {
        let s = parse_state("000 1/2\n010 1/2\n101 1/2\n111 1/2").unwrap();
        let subset = QubitSubset::from_qubits(&[2], 3).unwrap();
        let cf = try_canonical_form(&s, subset).unwrap().unwrap();
        let a = coefficient_matrix(&s, &cf).unwrap();
        assert_eq!(a.row_count(), 2);
        assert_eq!(a.col_count(), 2);
        assert!((0..2).all(|r| (0..2).all(|c| *a.entry(r, c) == real(1, 2))));
        assert!(is_rank_one(&a));
    }

    #[test]
    fn cluster_matrix_is_not_rank_one() {
        let s = parse_state("0000 1/2\n0101 1/2\n1010 1/2\n1111 -1/2").unwrap();
        let subset = QubitSubset::from_qubits(&[1, 3], 4).unwrap();
        let cf = try_canonical_form(&s, subset).unwrap().unwrap();
        let a = coefficient_matrix(&s, &cf).unwrap();
        assert_eq!(
            (a.entry(0, 0), a.entry(0, 1), a.entry(1, 0), a.entry(1, 1)),
            (&real(1, 2), &real(1, 2), &real(1, 2), &real(-1, 2))
        );
        assert!(!is_rank_one(&a));
        assert_eq!(solve_rank_one(&a), Err(CoeffError::NotRankOne));
    }

    #[test]
    fn stale_form_is_rejected() {
        let s = parse_state("000 1/2\n010 1/2\n101 1/2\n111 1/2").unwrap();
        let subset = QubitSubset::from_qubits(&[2], 3).unwrap();
        let cf = try_canonical_form(&s, subset).unwrap().unwrap();
        let other = parse_state("001 1/2\n010 1/2\n101 1/2\n111 1/2").unwrap();
        assert_eq!(coefficient_matrix(&other, &cf), Err(CoeffError::StaleForm));
    }

    #[test]
    fn solve_gauge_and_examples() {
        let a = matrix(vec![vec![real(1, 2), real(1, 2)], vec![real(1, 2), real(1, 2)]]);
        let f = solve_rank_one(&a).unwrap();
        assert_eq!(f.alpha, vec![one(), one()]);
        assert_eq!(f.beta, vec![real(1, 2), real(1, 2)]);

        let b = matrix(vec![vec![real(2, 1), real(4, 1)], vec![real(3, 1), real(6, 1)]]);
        let f = solve_rank_one(&b).unwrap();
        assert_eq!(f.alpha, vec![one(), real(3, 2)]);
        assert_eq!(f.beta, vec![real(2, 1), real(4, 1)]);
    }

    #[test]
    fn rejects_degenerate_shapes_and_zeros() {
        assert_eq!(
            CoefficientMatrix::from_entries(1, 2, vec![one(), one()]),
            Err(CoeffError::TooSmall { g: 1, h: 2 })
        );
        let zero = ExactComplex::new(crate::scalar::ratio(0, 1), crate::scalar::ratio(0, 1));
        assert!(matches!(
            CoefficientMatrix::from_entries(2, 2, vec![one(), zero, one(), one()]),
            Err(CoeffError::ZeroEntry { row: 0, col: 1 })
        ));
    }

    fn row_pairs_proportional(a: &CoefficientMatrix) -> bool {
        // Cross-multiplied comparison of every row pair, columnwise.
        for r1 in 0..a.row_count() {
            for r2 in r1 + 1..a.row_count() {
                for col in 1..a.col_count() {
                    if a.entry(r1, 0) * a.entry(r2, col) != a.entry(r2, 0) * a.entry(r1, col) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn col_pairs_proportional(a: &CoefficientMatrix) -> bool {
        for c1 in 0..a.col_count() {
            for c2 in c1 + 1..a.col_count() {
                for row in 1..a.row_count() {
                    if a.entry(0, c1) * a.entry(row, c2) != a.entry(0, c2) * a.entry(row, c1) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn outer(alpha: &[ExactComplex], beta: &[ExactComplex]) -> CoefficientMatrix {
        let entries: Vec<ExactComplex> = alpha
            .iter()
            .flat_map(|a| beta.iter().map(move |b| a * b))
            .collect();
        CoefficientMatrix::from_entries(alpha.len(), beta.len(), entries).unwrap()
    }

    proptest! {
        #[test]
        fn outer_products_are_rank_one(
            alpha in proptest::collection::vec(arb_scalar(), 2..=5),
            beta in proptest::collection::vec(arb_scalar(), 2..=5),
        ) {
            let a = outer(&alpha, &beta);
            prop_assert!(is_rank_one(&a));
            let f = solve_rank_one(&a).unwrap();
            prop_assert_eq!(outer(&f.alpha, &f.beta), a);
        }

        #[test]
        fn single_entry_perturbation_breaks_rank_one(
            alpha in proptest::collection::vec(arb_scalar(), 2..=4),
            beta in proptest::collection::vec(arb_scalar(), 2..=4),
            row_pick in any::<proptest::sample::Index>(),
            col_pick in any::<proptest::sample::Index>(),
            delta in arb_scalar(),
        ) {
            let a = outer(&alpha, &beta);
            let row = row_pick.index(a.row_count());
            let col = col_pick.index(a.col_count());
            let mut entries: Vec<ExactComplex> = (0..a.row_count())
                .flat_map(|r| (0..a.col_count()).map(move |c| (r, c)))
                .map(|(r, c)| a.entry(r, c).clone())
                .collect();
            let bumped = &entries[row * a.col_count() + col] + &delta;
            prop_assume!(!num_traits::Zero::is_zero(&bumped));
            entries[row * a.col_count() + col] = bumped;
            let perturbed = CoefficientMatrix::from_entries(a.row_count(), a.col_count(), entries).unwrap();
            prop_assert!(!is_rank_one(&perturbed));
        }

        #[test]
        fn row_and_column_proportionality_coincide(
            entries in proptest::collection::vec(arb_scalar(), 4..=16),
            g in 2usize..=4,
        ) {
            let h = entries.len() / g;
            prop_assume!(h >= 2);
            let a = CoefficientMatrix::from_entries(g, h, entries[..g * h].to_vec()).unwrap();
            prop_assert_eq!(row_pairs_proportional(&a), col_pairs_proportional(&a));
            prop_assert_eq!(is_rank_one(&a), row_pairs_proportional(&a));
        }

        #[test]
        fn rank_one_is_scale_invariant(
            alpha in proptest::collection::vec(arb_scalar(), 2..=4),
            beta in proptest::collection::vec(arb_scalar(), 2..=4),
            scale in arb_scalar(),
            bump in arb_scalar(),
        ) {
            let a = outer(&alpha, &beta);
            let scaled_entries: Vec<ExactComplex> = (0..a.row_count())
                .flat_map(|r| (0..a.col_count()).map(move |c| (r, c)))
                .map(|(r, c)| a.entry(r, c) * &scale)
                .collect();
            let scaled = CoefficientMatrix::from_entries(a.row_count(), a.col_count(), scaled_entries).unwrap();
            prop_assert_eq!(is_rank_one(&scaled), is_rank_one(&a));

            // Same check on a (generically) non-rank-one matrix.
            let mut entries: Vec<ExactComplex> = (0..a.row_count())
                .flat_map(|r| (0..a.col_count()).map(move |c| (r, c)))
                .map(|(r, c)| a.entry(r, c).clone())
                .collect();
            let bumped = &entries[0] + &bump;
            prop_assume!(!num_traits::Zero::is_zero(&bumped));
            entries[0] = bumped;
            let b = CoefficientMatrix::from_entries(a.row_count(), a.col_count(), entries).unwrap();
            let scaled_entries: Vec<ExactComplex> = (0..b.row_count())
                .flat_map(|r| (0..b.col_count()).map(move |c| (r, c)))
                .map(|(r, c)| b.entry(r, c) * &scale)
                .collect();
            let b_scaled = CoefficientMatrix::from_entries(b.row_count(), b.col_count(), scaled_entries).unwrap();
            prop_assert_eq!(is_rank_one(&b_scaled), is_rank_one(&b));
        }
    }
}
