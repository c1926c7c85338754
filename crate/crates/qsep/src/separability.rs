//! The decision layer: bipartition search, fast paths, the four-family
//! classification, and recursive full factorization.
//!
//! A state with no constant column is separable across a subset exactly
//! when the subset induces a canonical support form whose coefficient
//! matrix is rank one. The scan walks the pruned candidate stream in a
//! fixed order (size-ascending, then mask-ascending, qubit 1 always on the
//! left side), so verdicts and witnesses are deterministic. Two shortcuts
//! skip the scan when they can: a prime term count admits no canonical
//! form at all, and four-term states decide separability from the two
//! complementary label pairs and one coefficient equation.
//!
//! Family labels:
//! 1. some qubit is constant across the support (includes single terms),
//! 2. separable through a rank-1 coefficient matrix,
//! 3. no canonical support form exists — entangled for every choice of
//!    nonzero coefficients,
//! 4. canonical forms exist but none is rank one — entangled through the
//!    coefficients.

use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::bsm::{
    constant_columns, distinct_projection_count, qubit_one_masks, split_support, CanonicalForm,
};
use crate::coeff::{coefficient_matrix, is_rank_one, solve_rank_one, RankOneFactors};
use crate::scalar::ExactComplex;
use crate::state::{full_mask, tensor_product, BasisLabel, PureState, QubitSubset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparabilityError {
    #[error("state has a constant column; strip it first")]
    ConstantColumn,
    #[error("state must have more than one term")]
    SingleTerm,
    #[error("operation requires exactly 4 terms, state has {0}")]
    NotFourTerms(usize),
    #[error("subset must be a nonempty proper subset")]
    ImproperSubset,
    #[error("subset width {subset} does not match state width {state}")]
    WidthMismatch { subset: u8, state: u8 },
}

/// The four classification families. Families 1 and 2 are separable,
/// families 3 and 4 genuinely entangled. The labels are not SLOCC
/// invariants: SLOCC-equivalent states can land in different families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyLabel {
    Family1,
    Family2,
    Family3,
    Family4,
}

impl FamilyLabel {
    pub fn index(&self) -> u8 {
        match self {
            FamilyLabel::Family1 => 1,
            FamilyLabel::Family2 => 2,
            FamilyLabel::Family3 => 3,
            FamilyLabel::Family4 => 4,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, FamilyLabel::Family1 | FamilyLabel::Family2)
    }

    pub fn description(&self) -> &'static str {
        match self {
            FamilyLabel::Family1 => "separable: a qubit is constant across the support",
            FamilyLabel::Family2 => "separable: a canonical split has a rank-1 coefficient matrix",
            FamilyLabel::Family3 => "genuinely entangled by support structure alone",
            FamilyLabel::Family4 => "genuinely entangled through the coefficients",
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family {}", self.index())
    }
}

/// Which shortcut settled (part of) the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastPath {
    None,
    PrimeM,
    M4,
}

impl fmt::Display for FastPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FastPath::None => write!(f, "none"),
            FastPath::PrimeM => write!(f, "prime-m"),
            FastPath::M4 => write!(f, "m=4"),
        }
    }
}

/// A certified bipartition: the tensor product of the two factors placed
/// at `subset` reproduces the source state exactly.
///
/// Scale convention: the left factor is gauge fixed with first coefficient
/// 1; the right factor carries the matching coefficient row, so no overall
/// normalization is needed anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitWitness {
    pub subset: QubitSubset,
    pub left_factor: PureState,
    pub right_factor: PureState,
}

impl SplitWitness {
    /// Reassembles the full state from the factors.
    pub fn product(&self) -> PureState {
        tensor_product(&self.left_factor, &self.right_factor, self.subset)
            .expect("witness factors fill the register")
    }

    /// The same bipartition presented from the complement side, with the
    /// gauge re-fixed so the new left factor again starts at coefficient 1.
    pub fn flipped(&self) -> SplitWitness {
        let pivot = self.right_factor.terms()[0].1.clone();
        let left_factor = self
            .right_factor
            .scaled(&(ExactComplex::one() / &pivot))
            .expect("pivot coefficient is nonzero");
        let right_factor = self
            .left_factor
            .scaled(&pivot)
            .expect("pivot coefficient is nonzero");
        SplitWitness {
            subset: self.subset.complement(),
            left_factor,
            right_factor,
        }
    }

    /// Presents the split from its smaller side; on ties, from the side
    /// containing qubit 1.
    fn normalized_orientation(self) -> SplitWitness {
        let own = self.subset.size();
        let other = self.subset.register_width() - own;
        if other < own || (other == own && !self.subset.contains(1)) {
            self.flipped()
        } else {
            self
        }
    }
}

/// Scan statistics for one classification run. Counts stay zero when a
/// fast path made the scan unnecessary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchSummary {
    /// Subsets enumerated (pruned ones included).
    pub subsets_examined: u64,
    /// Canonical forms among them.
    pub canonical_forms: u64,
    /// Rank-1 coefficient matrices among the canonical forms.
    pub rank1_hits: u64,
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub family: FamilyLabel,
    pub witness: Option<SplitWitness>,
    pub search: SearchSummary,
    pub fast_path: FastPath,
}

/// Knobs for [`classify_with`]; the defaults enable every shortcut and
/// scan single-threaded.
#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub prime_shortcut: bool,
    pub m4_fast_path: bool,
    pub workers: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            prime_shortcut: true,
            m4_fast_path: true,
            workers: 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Scan engine
// ---------------------------------------------------------------------------

enum SubsetOutcome {
    Pruned,
    NoForm,
    FormNotRankOne,
    Split(Box<SplitWitness>),
}

fn evaluate_subset(s: &PureState, labels: &[u64], mask: u64) -> SubsetOutcome {
    let m = s.term_count();
    let mut scratch = Vec::with_capacity(m);
    let g = distinct_projection_count(labels, mask, &mut scratch);
    if g < 2 || !m.is_multiple_of(g) || m / g < 2 {
        return SubsetOutcome::Pruned;
    }
    let split = split_support(s, mask);
    let index_map = match split.index_map {
        Some(map) if split.rights.len() > 1 => map,
        _ => return SubsetOutcome::NoForm,
    };
    let subset =
        QubitSubset::from_mask(mask, s.qubit_count()).expect("enumerated mask fits register");
    let cf = CanonicalForm::from_parts(subset, split.lefts, split.rights, index_map);
    let matrix = coefficient_matrix(s, &cf).expect("form was built from this state");
    if !is_rank_one(&matrix) {
        return SubsetOutcome::FormNotRankOne;
    }
    let factors = solve_rank_one(&matrix).expect("rank-1 matrix solves");
    SubsetOutcome::Split(Box::new(witness_from_form(&cf, &factors)))
}

fn witness_from_form(cf: &CanonicalForm, factors: &RankOneFactors) -> SplitWitness {
    let subset = cf.subset();
    let left_width = subset.size();
    // Pattern lists are ascending; extraction keeps that order, so the
    // factor terms arrive sorted.
    let left_terms = cf
        .left_patterns()
        .iter()
        .zip(&factors.alpha)
        .map(|(&pattern, coeff)| {
            (
                BasisLabel::new(subset.extract(pattern), left_width).expect("pattern fits"),
                coeff.clone(),
            )
        })
        .collect();
    let co = subset.complement();
    let right_terms = cf
        .right_patterns()
        .iter()
        .zip(&factors.beta)
        .map(|(&pattern, coeff)| {
            (
                BasisLabel::new(co.extract(pattern), co.size()).expect("pattern fits"),
                coeff.clone(),
            )
        })
        .collect();
    SplitWitness {
        subset,
        left_factor: PureState::from_sorted_terms(left_width, left_terms),
        right_factor: PureState::from_sorted_terms(co.size(), right_terms),
    }
}

/// Chunk width for the parallel scan. Chunks commit in enumeration order,
/// so counts and the first-success witness match the sequential scan for
/// any worker count.
const SCAN_CHUNK: usize = 1024;

fn scan(s: &PureState, workers: usize) -> (Option<SplitWitness>, SearchSummary) {
    let labels: Vec<u64> = s.labels().collect();
    let mut summary = SearchSummary::default();
    let mut masks = qubit_one_masks(s.qubit_count());

    let fold = |summary: &mut SearchSummary, outcome: SubsetOutcome| -> Option<SplitWitness> {
        summary.subsets_examined += 1;
        match outcome {
            SubsetOutcome::Pruned | SubsetOutcome::NoForm => None,
            SubsetOutcome::FormNotRankOne => {
                summary.canonical_forms += 1;
                None
            }
            SubsetOutcome::Split(witness) => {
                summary.canonical_forms += 1;
                summary.rank1_hits += 1;
                Some(*witness)
            }
        }
    };

    if workers <= 1 {
        for mask in masks {
            let outcome = evaluate_subset(s, &labels, mask);
            if let Some(witness) = fold(&mut summary, outcome) {
                return (Some(witness), summary);
            }
        }
        return (None, summary);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    loop {
        let chunk: Vec<u64> = masks.by_ref().take(SCAN_CHUNK).collect();
        if chunk.is_empty() {
            return (None, summary);
        }
        let outcomes: Vec<SubsetOutcome> = pool.install(|| {
            use rayon::prelude::*;
            chunk
                .par_iter()
                .map(|&mask| evaluate_subset(s, &labels, mask))
                .collect()
        });
        for outcome in outcomes {
            if let Some(witness) = fold(&mut summary, outcome) {
                return (Some(witness), summary);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Finds the first bipartition (in candidate order) across which the state
/// factors, for states with no constant column and more than one term.
/// The returned witness is presented from the smaller side of the cut.
pub fn split_once(s: &PureState) -> Result<Option<SplitWitness>, SeparabilityError> {
    split_once_with(s, &ClassifyOptions::default())
}

pub fn split_once_with(
    s: &PureState,
    opts: &ClassifyOptions,
) -> Result<Option<SplitWitness>, SeparabilityError> {
    if s.term_count() < 2 {
        return Err(SeparabilityError::SingleTerm);
    }
    if !constant_columns(s).is_empty() {
        return Err(SeparabilityError::ConstantColumn);
    }
    let (witness, _) = scan(s, opts.workers);
    Ok(witness.map(SplitWitness::normalized_orientation))
}

/// Decides separability across one specific bipartition, for any state.
/// Returns the witness oriented at the given subset, or `None` when the
/// state does not factor across this cut.
pub fn split_at(
    s: &PureState,
    subset: QubitSubset,
) -> Result<Option<SplitWitness>, SeparabilityError> {
    if subset.register_width() != s.qubit_count() {
        return Err(SeparabilityError::WidthMismatch {
            subset: subset.register_width(),
            state: s.qubit_count(),
        });
    }
    if !subset.is_proper_nonempty() {
        return Err(SeparabilityError::ImproperSubset);
    }
    let split = split_support(s, subset.mask());
    let index_map = match split.index_map {
        Some(map) => map,
        None => return Ok(None), // support is not a product across this cut
    };
    let (g, h) = (split.lefts.len(), split.rights.len());
    let co = subset.complement();
    if g == 1 {
        // Every label agrees on the subset: |pattern⟩ ⊗ rest, with the
        // gauge coefficient 1 already on the single-pattern side.
        let left = PureState::new(
            subset.size(),
            vec![(subset.extract(split.lefts[0]), ExactComplex::one())],
        )
        .expect("single-pattern factor");
        let right_terms = split
            .rights
            .iter()
            .zip(&index_map)
            .map(|(&pattern, &idx)| {
                (
                    BasisLabel::new(co.extract(pattern), co.size()).expect("pattern fits"),
                    s.terms()[idx].1.clone(),
                )
            })
            .collect();
        return Ok(Some(SplitWitness {
            subset,
            left_factor: left,
            right_factor: PureState::from_sorted_terms(co.size(), right_terms),
        }));
    }
    if h == 1 {
        // Mirror case: rest ⊗ |pattern⟩, gauge on the varying side.
        let anchor = s.terms()[index_map[0]].1.clone();
        let left_terms = split
            .lefts
            .iter()
            .zip(&index_map)
            .map(|(&pattern, &idx)| {
                (
                    BasisLabel::new(subset.extract(pattern), subset.size()).expect("pattern fits"),
                    &s.terms()[idx].1 / &anchor,
                )
            })
            .collect();
        let right = PureState::new(co.size(), vec![(co.extract(split.rights[0]), anchor)])
            .expect("single-pattern factor");
        return Ok(Some(SplitWitness {
            subset,
            left_factor: PureState::from_sorted_terms(subset.size(), left_terms),
            right_factor: right,
        }));
    }
    let cf = CanonicalForm::from_parts(subset, split.lefts, split.rights, index_map);
    let matrix = coefficient_matrix(s, &cf).expect("form was built from this state");
    if !is_rank_one(&matrix) {
        return Ok(None);
    }
    let factors = solve_rank_one(&matrix).expect("rank-1 matrix solves");
    Ok(Some(witness_from_form(&cf, &factors)))
}

/// A state with a prime number of nonzero terms admits no canonical form
/// (`m = g·h` with `g, h > 1` is impossible), so it is genuinely entangled
/// whenever it has no constant column.
pub fn prime_m_shortcut(m: usize) -> bool {
    if m < 2 {
        return false;
    }
    if m.is_multiple_of(2) {
        return m == 2;
    }
    let mut d = 3usize;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M4Reason {
    /// The support is not closed under bitwise complement.
    NoComplementaryPairs,
    /// Complementary pairs exist but `d1·d4 ≠ d2·d3`.
    CoefficientMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum M4Verdict {
    Separable(SplitWitness),
    Entangled(M4Reason),
}

/// Separability decision for four-term states with no constant column:
/// separable iff the support consists of two complementary label pairs and
/// the outer coefficients multiply to the inner ones.
pub fn m4_verdict(s: &PureState) -> Result<M4Verdict, SeparabilityError> {
    if s.term_count() != 4 {
        return Err(SeparabilityError::NotFourTerms(s.term_count()));
    }
    if !constant_columns(s).is_empty() {
        return Err(SeparabilityError::ConstantColumn);
    }
    let n = s.qubit_count();
    let full = full_mask(n);
    let labels: Vec<u64> = s.labels().collect();
    // Complement reverses the integer order of labels, so a complement-
    // closed four-term support necessarily pairs outermost with outermost
    // and innermost with innermost.
    let paired = labels[3] == labels[0] ^ full && labels[2] == labels[1] ^ full;
    debug_assert_eq!(
        paired,
        labels.iter().all(|&b| s.term_index(b ^ full).is_some())
    );
    if !paired {
        return Ok(M4Verdict::Entangled(M4Reason::NoComplementaryPairs));
    }
    let d: Vec<&ExactComplex> = s.terms().iter().map(|(_, c)| c).collect();
    if d[0] * d[3] != d[1] * d[2] {
        return Ok(M4Verdict::Entangled(M4Reason::CoefficientMismatch));
    }
    // Reconstruct the split: the two lowest labels agree exactly on one
    // side (which includes qubit 1) and differ on the whole other side.
    let differ = labels[0] ^ labels[1];
    let agree = QubitSubset::from_mask(differ ^ full, n).expect("mask fits");
    let co = agree.complement();
    let a = agree.extract(labels[0]);
    let a_flip = a ^ full_mask(agree.size());
    let b = co.extract(labels[0]);
    let b_flip = b ^ full_mask(co.size());
    let left = PureState::new(
        agree.size(),
        vec![(a, ExactComplex::one()), (a_flip, d[3] / d[1])],
    )
    .expect("two-term factor");
    let right = PureState::new(co.size(), vec![(b, d[0].clone()), (b_flip, d[1].clone())])
        .expect("two-term factor");
    let witness = SplitWitness {
        subset: agree,
        left_factor: left,
        right_factor: right,
    }
    .normalized_orientation();
    debug_assert_eq!(witness.product(), *s);
    Ok(M4Verdict::Separable(witness))
}

/// Full classification with default options.
pub fn classify(s: &PureState) -> ClassificationReport {
    classify_with(s, &ClassifyOptions::default())
}

/// Full classification. Order of decision: constant columns (Family 1,
/// covers single terms and single qubits), the prime-m shortcut (Family
/// 3), the four-term fast path for the separability half of the verdict,
/// then the general scan. Entangled four-term states still scan so that
/// Families 3 and 4 can be told apart.
pub fn classify_with(s: &PureState, opts: &ClassifyOptions) -> ClassificationReport {
    let n = s.qubit_count();
    if n == 1 {
        // No bipartition exists; a lone qubit is trivially a product.
        return ClassificationReport {
            family: FamilyLabel::Family1,
            witness: None,
            search: SearchSummary::default(),
            fast_path: FastPath::None,
        };
    }
    let consts = constant_columns(s);
    if !consts.is_empty() {
        return ClassificationReport {
            family: FamilyLabel::Family1,
            witness: Some(constant_strip_witness(s, &consts)),
            search: SearchSummary::default(),
            fast_path: FastPath::None,
        };
    }
    let m = s.term_count();
    if opts.prime_shortcut && prime_m_shortcut(m) {
        return ClassificationReport {
            family: FamilyLabel::Family3,
            witness: None,
            search: SearchSummary::default(),
            fast_path: FastPath::PrimeM,
        };
    }
    let mut fast_path = FastPath::None;
    if opts.m4_fast_path && m == 4 {
        fast_path = FastPath::M4;
        let verdict = m4_verdict(s).expect("preconditions established");
        if let M4Verdict::Separable(witness) = verdict {
            return ClassificationReport {
                family: FamilyLabel::Family2,
                witness: Some(witness),
                search: SearchSummary::default(),
                fast_path,
            };
        }
        // Entangled: fall through to the scan, which tells Family 3 from
        // Family 4 by whether any canonical form exists at all.
    }
    let (witness, search) = scan(s, opts.workers);
    debug_assert!(fast_path != FastPath::M4 || witness.is_none());
    match witness {
        Some(witness) => ClassificationReport {
            family: FamilyLabel::Family2,
            witness: Some(witness.normalized_orientation()),
            search,
            fast_path,
        },
        None => ClassificationReport {
            family: if search.canonical_forms > 0 {
                FamilyLabel::Family4
            } else {
                FamilyLabel::Family3
            },
            witness: None,
            search,
            fast_path,
        },
    }
}

/// Family-1 witness: the constant qubits split off as a single-term factor
/// with coefficient 1, the rest keeps the original coefficients. When every
/// column is constant (a single-term state) the split is taken at qubit 1.
fn constant_strip_witness(s: &PureState, consts: &[(u8, bool)]) -> SplitWitness {
    let n = s.qubit_count();
    let subset = if consts.len() == n as usize {
        QubitSubset::from_qubits(&[1], n).expect("qubit 1 exists")
    } else {
        QubitSubset::from_qubits(&consts.iter().map(|&(q, _)| q).collect::<Vec<_>>(), n)
            .expect("constant columns fit register")
    };
    let first_label = s.terms()[0].0.bits();
    let left = PureState::new(
        subset.size(),
        vec![(subset.extract(first_label), ExactComplex::one())],
    )
    .expect("constant factor");
    let right = s.project_assuming_distinct(subset.complement());
    SplitWitness {
        subset,
        left_factor: left,
        right_factor: right,
    }
}

/// A complete factorization: pairwise-disjoint qubit subsets covering the
/// register, each carrying a factor that splits no further. The iterated
/// tensor product of the factors reproduces the source state exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorTree {
    pub factors: Vec<(QubitSubset, PureState)>,
}

impl FactorTree {
    /// Reassembles the source state from the factors.
    pub fn product(&self) -> PureState {
        let (mut acc_subset, mut acc_state) = self.factors[0].clone();
        for (subset, factor) in &self.factors[1..] {
            let n = acc_subset.register_width();
            let union =
                QubitSubset::from_mask(acc_subset.mask() | subset.mask(), n).expect("mask fits");
            // Positions of the accumulated factor inside the union register.
            let placement = QubitSubset::from_mask(union.extract(acc_subset.mask()), union.size())
                .expect("compacted mask fits");
            acc_state =
                tensor_product(&acc_state, factor, placement).expect("factors are disjoint");
            acc_subset = union;
        }
        acc_state
    }
}

/// Factors a state completely: constant columns split off first, then each
/// residual is split recursively until nothing separates. Factors are
/// ordered by their smallest qubit index.
pub fn factorize_fully(s: &PureState) -> FactorTree {
    let n = s.qubit_count();
    let positions: Vec<u8> = (1..=n).collect();
    let mut factors = Vec::new();
    factorize_into(s, &positions, n, &mut factors);
    factors.sort_by_key(|(subset, _)| subset.min_qubit().expect("factors are nonempty"));
    FactorTree { factors }
}

/// `positions[i]` is the original register position of local qubit `i+1`.
fn factorize_into(
    s: &PureState,
    positions: &[u8],
    register: u8,
    out: &mut Vec<(QubitSubset, PureState)>,
) {
    let width = s.qubit_count();
    if width == 1 {
        let subset = QubitSubset::from_qubits(positions, register).expect("position fits");
        out.push((subset, s.clone()));
        return;
    }
    if s.term_count() == 1 {
        // All columns constant: one single-qubit factor per position; the
        // first carries the overall coefficient so the product stays exact.
        let (label, coeff) = &s.terms()[0];
        for (i, &orig) in positions.iter().enumerate() {
            let c = if i == 0 {
                coeff.clone()
            } else {
                ExactComplex::one()
            };
            let factor = PureState::new(1, vec![(label.bit(i as u8 + 1) as u64, c)])
                .expect("single-qubit factor");
            let subset = QubitSubset::from_qubits(&[orig], register).expect("position fits");
            out.push((subset, factor));
        }
        return;
    }
    let consts = constant_columns(s);
    if !consts.is_empty() {
        for &(q, bit) in &consts {
            let factor =
                PureState::new(1, vec![(bit as u64, ExactComplex::one())]).expect("bit factor");
            let subset = QubitSubset::from_qubits(&[positions[q as usize - 1]], register)
                .expect("position fits");
            out.push((subset, factor));
        }
        let const_local =
            QubitSubset::from_qubits(&consts.iter().map(|&(q, _)| q).collect::<Vec<_>>(), width)
                .expect("constant columns fit");
        let keep = const_local.complement();
        let residual = s.project_assuming_distinct(keep);
        let kept_positions: Vec<u8> = keep.qubits().map(|q| positions[q as usize - 1]).collect();
        factorize_into(&residual, &kept_positions, register, out);
        return;
    }
    match scan(s, 1).0 {
        None => {
            let subset = QubitSubset::from_qubits(positions, register).expect("positions fit");
            out.push((subset, s.clone()));
        }
        Some(witness) => {
            let left_positions: Vec<u8> = witness
                .subset
                .qubits()
                .map(|q| positions[q as usize - 1])
                .collect();
            let right_positions: Vec<u8> = witness
                .subset
                .complement()
                .qubits()
                .map(|q| positions[q as usize - 1])
                .collect();
            factorize_into(&witness.left_factor, &left_positions, register, out);
            factorize_into(&witness.right_factor, &right_positions, register, out);
        }
    }
}
