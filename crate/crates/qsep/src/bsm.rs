//! Support-level machinery over the basis-state matrix.
//!
//! The basis-state matrix of a state has one 0/1 row per support label and
//! one column per qubit. Everything here looks only at that matrix, never
//! at the coefficients: constant-column detection, the canonical block form
//! a qubit subset may induce, and a pruned stream of candidate subsets for
//! the separability search.
//!
//! A subset `S` induces a canonical form when the support is exactly the
//! Cartesian product of its projections onto `S` and onto the complement,
//! with more than one distinct pattern on each side. Since every support
//! label projects to one (left, right) pair and the pairs are distinct, the
//! product structure holds precisely when
//! `(#left patterns) · (#right patterns) = m`.

use thiserror::Error;

use crate::state::{full_mask, PureState, QubitSubset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BsmError {
    #[error("state has a constant column; strip it before the canonical-form search")]
    ConstantColumn,
    #[error("subset must be a nonempty proper subset of the register")]
    ImproperSubset,
    #[error("subset register width {subset} does not match state width {state}")]
    WidthMismatch { subset: u8, state: u8 },
}

/// The block structure a qubit subset induces on a state's support.
///
/// Pattern lists hold the projected labels still in register position
/// (masked, not compacted) and are sorted ascending by integer encoding,
/// which fixes one representative among the row orders the block form
/// leaves free. `index_map` locates the source term for every
/// (left, right) pattern pair, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    subset: QubitSubset,
    left_patterns: Vec<u64>,
    right_patterns: Vec<u64>,
    index_map: Vec<usize>,
}

impl CanonicalForm {
    pub(crate) fn from_parts(
        subset: QubitSubset,
        left_patterns: Vec<u64>,
        right_patterns: Vec<u64>,
        index_map: Vec<usize>,
    ) -> CanonicalForm {
        debug_assert!(left_patterns.len() > 1 && right_patterns.len() > 1);
        debug_assert_eq!(index_map.len(), left_patterns.len() * right_patterns.len());
        CanonicalForm {
            subset,
            left_patterns,
            right_patterns,
            index_map,
        }
    }

    /// The columns moved to the left side of the block form.
    pub fn subset(&self) -> QubitSubset {
        self.subset
    }

    /// Distinct projections of the support onto the subset, ascending.
    pub fn left_patterns(&self) -> &[u64] {
        &self.left_patterns
    }

    /// Distinct projections onto the complement, ascending.
    pub fn right_patterns(&self) -> &[u64] {
        &self.right_patterns
    }

    /// Number of left patterns (block count).
    pub fn g(&self) -> usize {
        self.left_patterns.len()
    }

    /// Number of right patterns (rows per block).
    pub fn h(&self) -> usize {
        self.right_patterns.len()
    }

    /// Index into the source state's term list for pattern pair `(row, col)`.
    pub fn term_index(&self, row: usize, col: usize) -> usize {
        self.index_map[row * self.h() + col]
    }

    /// Reassembles the full label for pattern pair `(row, col)`.
    pub fn assemble_bits(&self, row: usize, col: usize) -> u64 {
        self.left_patterns[row] | self.right_patterns[col]
    }
}

/// Qubit positions whose bit value is identical across the whole support,
/// with that value. A single-term state fixes every qubit.
pub fn constant_columns(s: &PureState) -> Vec<(u8, bool)> {
    let n = s.qubit_count();
    let mut all_and = full_mask(n);
    let mut all_or = 0u64;
    for bits in s.labels() {
        all_and &= bits;
        all_or |= bits;
    }
    (1..=n)
        .filter_map(|q| {
            let bit = 1u64 << (n - q);
            if all_or & bit == 0 {
                Some((q, false))
            } else if all_and & bit != 0 {
                Some((q, true))
            } else {
                None
            }
        })
        .collect()
}

/// Projections of the support onto a mask and its complement.
pub(crate) struct SupportSplit {
    /// Distinct left projections, ascending.
    pub lefts: Vec<u64>,
    /// Distinct right projections, ascending.
    pub rights: Vec<u64>,
    /// Row-major term indices when the support is exactly lefts × rights.
    pub index_map: Option<Vec<usize>>,
}

pub(crate) fn split_support(s: &PureState, mask: u64) -> SupportSplit {
    let co_mask = mask ^ full_mask(s.qubit_count());
    let mut lefts: Vec<u64> = s.labels().map(|bits| bits & mask).collect();
    lefts.sort_unstable();
    lefts.dedup();
    let mut rights: Vec<u64> = s.labels().map(|bits| bits & co_mask).collect();
    rights.sort_unstable();
    rights.dedup();
    if lefts.len() * rights.len() != s.term_count() {
        return SupportSplit {
            lefts,
            rights,
            index_map: None,
        };
    }
    // m distinct (left, right) pairs inside a grid of exactly m cells fill
    // it, so every lookup below succeeds.
    let mut index_map = Vec::with_capacity(s.term_count());
    for &left in &lefts {
        for &right in &rights {
            index_map.push(
                s.term_index(left | right)
                    .expect("cartesian support contains every pattern pair"),
            );
        }
    }
    SupportSplit {
        lefts,
        rights,
        index_map: Some(index_map),
    }
}

/// Number of distinct projections of `labels` onto `mask`.
pub(crate) fn distinct_projection_count(labels: &[u64], mask: u64, scratch: &mut Vec<u64>) -> usize {
    scratch.clear();
    scratch.extend(labels.iter().map(|bits| bits & mask));
    scratch.sort_unstable();
    scratch.dedup();
    scratch.len()
}

/// Tests whether moving `subset`'s columns to the left turns the state's
/// basis-state matrix into the canonical block form. Requires a state with
/// no constant column and a nonempty proper subset.
pub fn try_canonical_form(
    s: &PureState,
    subset: QubitSubset,
) -> Result<Option<CanonicalForm>, BsmError> {
    if subset.register_width() != s.qubit_count() {
        return Err(BsmError::WidthMismatch {
            subset: subset.register_width(),
            state: s.qubit_count(),
        });
    }
    if !subset.is_proper_nonempty() {
        return Err(BsmError::ImproperSubset);
    }
    if !constant_columns(s).is_empty() {
        return Err(BsmError::ConstantColumn);
    }
    let split = split_support(s, subset.mask());
    let (g, h) = (split.lefts.len(), split.rights.len());
    match split.index_map {
        Some(index_map) if g > 1 && h > 1 => Ok(Some(CanonicalForm {
            subset,
            left_patterns: split.lefts,
            right_patterns: split.rights,
            index_map,
        })),
        _ => Ok(None),
    }
}

/// Enumerates the masks of all nonempty proper subsets containing qubit 1,
/// ordered by size and then by mask value. Restricting to qubit-1 subsets
/// is lossless: a bipartition and its complement certify the same split.
pub(crate) struct QubitOneMasks {
    n: u8,
    size: u8,
    combo: u64,
    exhausted: bool,
}

pub(crate) fn qubit_one_masks(n: u8) -> QubitOneMasks {
    QubitOneMasks {
        n,
        size: 1,
        combo: 0,
        exhausted: n < 2,
    }
}

/// Next mask of the same popcount (Gosper's hack), bounded by `width` bits.
pub(crate) fn next_same_popcount(v: u64, width: u8) -> Option<u64> {
    if v == 0 {
        return None;
    }
    let lowest = v & v.wrapping_neg();
    let carried = v + lowest;
    let next = carried | (((v ^ carried) / lowest) >> 2);
    if next >> width != 0 {
        None
    } else {
        Some(next)
    }
}

impl Iterator for QubitOneMasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.exhausted {
            return None;
        }
        let out = 1u64 << (self.n - 1) | self.combo;
        match next_same_popcount(self.combo, self.n - 1) {
            Some(combo) => self.combo = combo,
            None => {
                self.size += 1;
                if self.size > self.n - 1 {
                    self.exhausted = true;
                } else {
                    self.combo = (1u64 << (self.size - 1)) - 1;
                }
            }
        }
        Some(out)
    }
}

/// Stream of bipartition candidates for the separability search: subsets
/// containing qubit 1, size-ascending then mask-ascending, that pass the
/// divisor prune — the left pattern count `g` satisfies `1 < g`, `g | m`
/// and `m/g > 1`. States with a constant column have no candidates worth
/// scanning; strip such columns first.
pub fn candidate_subsets(s: &PureState) -> CandidateSubsets {
    debug_assert!(constant_columns(s).is_empty());
    CandidateSubsets {
        n: s.qubit_count(),
        m: s.term_count(),
        labels: s.labels().collect(),
        scratch: Vec::with_capacity(s.term_count()),
        masks: qubit_one_masks(s.qubit_count()),
    }
}

pub struct CandidateSubsets {
    n: u8,
    m: usize,
    labels: Vec<u64>,
    scratch: Vec<u64>,
    masks: QubitOneMasks,
}

impl Iterator for CandidateSubsets {
    type Item = QubitSubset;

    fn next(&mut self) -> Option<QubitSubset> {
        for mask in self.masks.by_ref() {
            let g = distinct_projection_count(&self.labels, mask, &mut self.scratch);
            if g > 1 && self.m.is_multiple_of(g) && self.m / g > 1 {
                return Some(QubitSubset::from_mask(mask, self.n).expect("mask fits register"));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::one;
    use crate::state::{parse_state, permute_qubits, PureState};
    use crate::test_support::arb_state;
    use proptest::prelude::*;

    fn worked_example() -> PureState {
        parse_state("000 1/2\n010 1/2\n101 1/2\n111 1/2").unwrap()
    }

    fn c4() -> PureState {
        parse_state("0000 1/2\n0101 1/2\n1010 1/2\n1111 -1/2").unwrap()
    }

    fn ghz(n: u8) -> PureState {
        PureState::new(n, vec![(0, one()), (full_mask(n), one())]).unwrap()
    }

    #[test]
    fn constant_columns_examples() {
        let s = parse_state("000 1\n011 1").unwrap();
        assert_eq!(constant_columns(&s), vec![(1, false)]);
        assert_eq!(constant_columns(&ghz(3)), vec![]);
        let single = parse_state("0 1").unwrap();
        assert_eq!(constant_columns(&single), vec![(1, false)]);
        let fixed_one = parse_state("10 1\n11 1").unwrap();
        assert_eq!(constant_columns(&fixed_one), vec![(1, true)]);
    }

    #[test]
    fn canonical_form_on_worked_example() {
        let s = worked_example();
        let subset = QubitSubset::from_qubits(&[2], 3).unwrap();
        let cf = try_canonical_form(&s, subset).unwrap().unwrap();
        assert_eq!(cf.g(), 2);
        assert_eq!(cf.h(), 2);
        let lefts: Vec<u64> = cf.left_patterns().iter().map(|&p| subset.extract(p)).collect();
        assert_eq!(lefts, vec![0b0, 0b1]);
        let co = subset.complement();
        let rights: Vec<u64> = cf.right_patterns().iter().map(|&p| co.extract(p)).collect();
        assert_eq!(rights, vec![0b00, 0b11]);
    }

    #[test]
    fn ghz_has_no_canonical_form() {
        let s = ghz(3);
        for qubits in [vec![1u8], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3]] {
            let subset = QubitSubset::from_qubits(&qubits, 3).unwrap();
            assert_eq!(try_canonical_form(&s, subset).unwrap(), None);
        }
    }

    #[test]
    fn cluster_state_splits_on_odd_qubits() {
        let s = c4();
        let subset = QubitSubset::from_qubits(&[1, 3], 4).unwrap();
        let cf = try_canonical_form(&s, subset).unwrap().unwrap();
        let lefts: Vec<u64> = cf.left_patterns().iter().map(|&p| subset.extract(p)).collect();
        assert_eq!(lefts, vec![0b00, 0b11]);
        let co = subset.complement();
        let rights: Vec<u64> = cf.right_patterns().iter().map(|&p| co.extract(p)).collect();
        assert_eq!(rights, vec![0b00, 0b11]);
    }

    #[test]
    fn canonical_form_preconditions() {
        let s = parse_state("00 1\n01 1").unwrap(); // qubit 1 constant
        let subset = QubitSubset::from_qubits(&[1], 2).unwrap();
        assert_eq!(try_canonical_form(&s, subset), Err(BsmError::ConstantColumn));
        let full = QubitSubset::full(3);
        assert_eq!(
            try_canonical_form(&worked_example(), full),
            Err(BsmError::ImproperSubset)
        );
    }

    #[test]
    fn candidates_for_worked_example() {
        let subsets: Vec<String> = candidate_subsets(&worked_example())
            .map(|s| s.to_string())
            .collect();
        assert_eq!(subsets, vec!["{1}", "{1,3}"]);
    }

    #[test]
    fn candidates_on_two_qubits() {
        let s = parse_state("00 1\n01 1\n10 1\n11 1").unwrap();
        let subsets: Vec<String> = candidate_subsets(&s).map(|s| s.to_string()).collect();
        assert_eq!(subsets, vec!["{1}"]);
    }

    #[test]
    fn prime_support_has_no_candidates() {
        let s = parse_state("001 1\n010 1\n100 1").unwrap(); // m = 3
        assert_eq!(candidate_subsets(&s).count(), 0);
        assert_eq!(candidate_subsets(&ghz(4)).count(), 0); // m = 2
    }

    #[test]
    fn mask_stream_order_and_count() {
        let masks: Vec<u64> = qubit_one_masks(3).collect();
        // {1} = 100, then size 2 ascending: 101 = {1,3}, 110 = {1,2}.
        assert_eq!(masks, vec![0b100, 0b101, 0b110]);
        assert_eq!(qubit_one_masks(6).count(), (1 << 5) - 1);
        assert_eq!(qubit_one_masks(1).count(), 0);
    }

    fn no_constant_columns() -> impl Strategy<Value = PureState> {
        arb_state(4, 8).prop_filter("no constant column and n >= 2", |s| {
            s.qubit_count() >= 2 && constant_columns(s).is_empty()
        })
    }

    proptest! {
        #[test]
        fn complement_subset_symmetry(s in no_constant_columns()) {
            let n = s.qubit_count();
            for mask in 1..full_mask(n) {
                let subset = QubitSubset::from_mask(mask, n).unwrap();
                let direct = try_canonical_form(&s, subset).unwrap();
                let swapped = try_canonical_form(&s, subset.complement()).unwrap();
                match (direct, swapped) {
                    (Some(a), Some(b)) => {
                        prop_assert_eq!(a.left_patterns(), b.right_patterns());
                        prop_assert_eq!(a.right_patterns(), b.left_patterns());
                    }
                    (None, None) => {}
                    _ => prop_assert!(false, "split succeeded on one side only"),
                }
            }
        }

        #[test]
        fn canonical_form_reconstructs_support(s in no_constant_columns()) {
            let n = s.qubit_count();
            for mask in 1..full_mask(n) {
                let subset = QubitSubset::from_mask(mask, n).unwrap();
                if let Some(cf) = try_canonical_form(&s, subset).unwrap() {
                    let mut rebuilt: Vec<u64> = (0..cf.g())
                        .flat_map(|row| (0..cf.h()).map(move |col| (row, col)))
                        .map(|(row, col)| cf.assemble_bits(row, col))
                        .collect();
                    rebuilt.sort_unstable();
                    prop_assert_eq!(rebuilt, s.labels().collect::<Vec<_>>());
                }
            }
        }

        #[test]
        fn pattern_counts_bound_support(s in arb_state(4, 10)) {
            let n = s.qubit_count();
            let m = s.term_count();
            let mut scratch = Vec::new();
            let labels: Vec<u64> = s.labels().collect();
            for mask in 1..full_mask(n) {
                let g = distinct_projection_count(&labels, mask, &mut scratch);
                let h = distinct_projection_count(&labels, mask ^ full_mask(n), &mut scratch);
                prop_assert!(g * h >= m);
                let cartesian = split_support(&s, mask).index_map.is_some();
                prop_assert_eq!(g * h == m, cartesian);
            }
        }

        #[test]
        fn pattern_count_multiset_is_permutation_invariant(
            s in no_constant_columns(),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = s.qubit_count();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<u8> = (1..=n).collect();
            perm.shuffle(&mut rng);
            let permuted = permute_qubits(&s, &perm).unwrap();

            let outcomes = |state: &PureState| -> Vec<(usize, usize)> {
                let labels: Vec<u64> = state.labels().collect();
                let mut scratch = Vec::new();
                let mut pairs: Vec<(usize, usize)> = (1..full_mask(n))
                    .map(|mask| {
                        (
                            distinct_projection_count(&labels, mask, &mut scratch),
                            distinct_projection_count(&labels, mask ^ full_mask(n), &mut scratch),
                        )
                    })
                    .collect();
                pairs.sort_unstable();
                pairs
            };
            prop_assert_eq!(outcomes(&s), outcomes(&permuted));
        }
    }
}
