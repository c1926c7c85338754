//! Sparse pure states of *n* qubits.
//!
//! A state is stored as its support: a sorted list of distinct basis labels
//! with nonzero exact coefficients. Qubit 1 is the leftmost character of a
//! written bitstring and the most significant bit of the integer encoding,
//! so `|011⟩` on three qubits is the integer `0b011 = 3`.
//!
//! Normalization is never required; every procedure downstream is invariant
//! under multiplying the whole state by a nonzero scalar.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{format_complex, format_rational, parse_rational, ExactComplex};

/// Labels must fit one machine word.
pub const MAX_QUBITS: u8 = 63;
/// Practical guard on the support size.
pub const MAX_TERMS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid structured state: {0}")]
    Structured(String),
    #[error("qubit count {0} outside 1..=63")]
    QubitCountOutOfRange(usize),
    #[error("basis label {bits} does not fit {n} qubits")]
    LabelOutOfRange { bits: u64, n: u8 },
    #[error("zero coefficient on basis label {0}")]
    ZeroCoefficient(String),
    #[error("duplicate basis label {0}")]
    DuplicateLabel(String),
    #[error("state has no terms")]
    Empty,
    #[error("state has {0} terms; the supported maximum is 1048576")]
    TooManyTerms(usize),
    #[error("factor widths {left}+{right} do not fill a {total}-qubit register")]
    FactorSizeMismatch { left: u8, right: u8, total: u8 },
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(u8),
    #[error("scaling by zero")]
    ZeroScale,
    #[error("subset mask {mask} does not fit {n} qubits")]
    SubsetOutOfRange { mask: u64, n: u8 },
    #[error("qubit index {qubit} outside 1..={n}")]
    QubitOutOfRange { qubit: u8, n: u8 },
}

impl StateError {
    /// True for malformed input text, false for well-formed input that
    /// violates a state invariant. The CLI maps the two onto different
    /// exit codes.
    pub fn is_syntactic(&self) -> bool {
        matches!(self, StateError::Parse { .. } | StateError::Structured(_))
    }
}

/// One computational basis label on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    bits: u64,
    n: u8,
}

impl BasisLabel {
    pub fn new(bits: u64, n: u8) -> Result<Self, StateError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(StateError::QubitCountOutOfRange(n as usize));
        }
        if bits >> n != 0 {
            return Err(StateError::LabelOutOfRange { bits, n });
        }
        Ok(BasisLabel { bits, n })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn qubit_count(&self) -> u8 {
        self.n
    }

    /// Bit value at a 1-based qubit position (qubit 1 is the most
    /// significant bit).
    pub fn bit(&self, qubit: u8) -> bool {
        debug_assert!(qubit >= 1 && qubit <= self.n);
        self.bits >> (self.n - qubit) & 1 == 1
    }

    /// Bitwise NOT within the n-bit register: `|0101⟩ ↦ |1010⟩`.
    pub fn complement(&self) -> Self {
        BasisLabel {
            bits: self.bits ^ full_mask(self.n),
            n: self.n,
        }
    }

    /// Number of 1 bits.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n as usize)
    }
}

/// Bitwise complement of a basis label within its register.
pub fn complement_label(label: BasisLabel) -> BasisLabel {
    label.complement()
}

pub(crate) fn full_mask(n: u8) -> u64 {
    (1u64 << n) - 1
}

/// A set of qubit positions within an n-qubit register, encoded as a mask
/// in the same bit convention as [`BasisLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitSubset {
    mask: u64,
    n: u8,
}

impl QubitSubset {
    pub fn from_mask(mask: u64, n: u8) -> Result<Self, StateError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(StateError::QubitCountOutOfRange(n as usize));
        }
        if mask >> n != 0 {
            return Err(StateError::SubsetOutOfRange { mask, n });
        }
        Ok(QubitSubset { mask, n })
    }

    /// Builds a subset from 1-based qubit indices.
    pub fn from_qubits(qubits: &[u8], n: u8) -> Result<Self, StateError> {
        let mut mask = 0u64;
        for &q in qubits {
            if q == 0 || q > n {
                return Err(StateError::QubitOutOfRange { qubit: q, n });
            }
            mask |= 1 << (n - q);
        }
        QubitSubset::from_mask(mask, n)
    }

    pub fn full(n: u8) -> Self {
        QubitSubset {
            mask: full_mask(n),
            n,
        }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Width of the surrounding register.
    pub fn register_width(&self) -> u8 {
        self.n
    }

    /// Number of selected qubits.
    pub fn size(&self) -> u8 {
        self.mask.count_ones() as u8
    }

    pub fn complement(&self) -> Self {
        QubitSubset {
            mask: self.mask ^ full_mask(self.n),
            n: self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_full(&self) -> bool {
        self.mask == full_mask(self.n)
    }

    /// Nonempty and not the whole register: usable as one side of a
    /// bipartition.
    pub fn is_proper_nonempty(&self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    pub fn contains(&self, qubit: u8) -> bool {
        qubit >= 1 && qubit <= self.n && self.mask >> (self.n - qubit) & 1 == 1
    }

    /// Selected qubit indices, ascending and 1-based.
    pub fn qubits(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.n).filter(|&q| self.contains(q))
    }

    pub fn min_qubit(&self) -> Option<u8> {
        self.qubits().next()
    }

    /// Compacts the selected bits of `bits` into a `size()`-bit word. The
    /// lowest selected qubit index lands on the most significant output
    /// bit, so the compact word reads in the same qubit order as the
    /// register it came from.
    pub fn extract(&self, bits: u64) -> u64 {
        let mut out = 0u64;
        let mut out_bit = 1u64;
        let mut m = self.mask;
        while m != 0 {
            let low = m & m.wrapping_neg();
            if bits & low != 0 {
                out |= out_bit;
            }
            out_bit <<= 1;
            m ^= low;
        }
        out
    }

    /// Inverse of [`extract`](Self::extract): scatters a compact word back
    /// onto the selected positions.
    pub fn deposit(&self, bits: u64) -> u64 {
        let mut out = 0u64;
        let mut in_bit = 1u64;
        let mut m = self.mask;
        while m != 0 {
            let low = m & m.wrapping_neg();
            if bits & in_bit != 0 {
                out |= low;
            }
            in_bit <<= 1;
            m ^= low;
        }
        out
    }
}

impl fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.qubits().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

/// A sparse pure state: distinct basis labels with nonzero coefficients,
/// sorted ascending by integer encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureState {
    n: u8,
    terms: Vec<(BasisLabel, ExactComplex)>,
}

impl PureState {
    /// Validates and sorts raw `(bits, coefficient)` terms.
    pub fn new(n: u8, terms: Vec<(u64, ExactComplex)>) -> Result<Self, StateError> {
        if n == 0 || n as usize > MAX_QUBITS as usize {
            return Err(StateError::QubitCountOutOfRange(n as usize));
        }
        if terms.is_empty() {
            return Err(StateError::Empty);
        }
        if terms.len() > MAX_TERMS {
            return Err(StateError::TooManyTerms(terms.len()));
        }
        let mut labelled = Vec::with_capacity(terms.len());
        for (bits, coeff) in terms {
            let label = BasisLabel::new(bits, n)?;
            if coeff.is_zero() {
                return Err(StateError::ZeroCoefficient(label.to_string()));
            }
            labelled.push((label, coeff));
        }
        labelled.sort_by_key(|(label, _)| label.bits);
        for pair in labelled.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(StateError::DuplicateLabel(pair[0].0.to_string()));
            }
        }
        Ok(PureState { n, terms: labelled })
    }

    /// Internal constructor for terms already sorted, distinct and nonzero.
    pub(crate) fn from_sorted_terms(n: u8, terms: Vec<(BasisLabel, ExactComplex)>) -> Self {
        debug_assert!(!terms.is_empty());
        debug_assert!(terms
            .windows(2)
            .all(|pair| pair[0].0.bits() < pair[1].0.bits()));
        debug_assert!(terms
            .iter()
            .all(|(label, coeff)| label.qubit_count() == n && !coeff.is_zero()));
        PureState { n, terms }
    }

    pub fn qubit_count(&self) -> u8 {
        self.n
    }

    /// Number of terms in the support, `m`.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(BasisLabel, ExactComplex)] {
        &self.terms
    }

    pub fn labels(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.iter().map(|(label, _)| label.bits)
    }

    /// Position of a label in the sorted term list.
    pub fn term_index(&self, bits: u64) -> Option<usize> {
        self.terms
            .binary_search_by_key(&bits, |(label, _)| label.bits)
            .ok()
    }

    pub fn coefficient(&self, bits: u64) -> Option<&ExactComplex> {
        self.term_index(bits).map(|i| &self.terms[i].1)
    }

    /// Multiplies every coefficient by a nonzero scalar.
    pub fn scaled(&self, factor: &ExactComplex) -> Result<PureState, StateError> {
        if factor.is_zero() {
            return Err(StateError::ZeroScale);
        }
        let terms = self
            .terms
            .iter()
            .map(|(label, coeff)| (*label, coeff * factor))
            .collect();
        Ok(PureState { n: self.n, terms })
    }

    /// Restriction to the selected qubits, dropping the rest of each label.
    /// Caller guarantees the projected labels stay distinct (true when the
    /// dropped qubits are constant across the support).
    pub(crate) fn project_assuming_distinct(&self, keep: QubitSubset) -> PureState {
        debug_assert_eq!(keep.register_width(), self.n);
        let width = keep.size();
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(label, coeff)| {
                (
                    BasisLabel::new(keep.extract(label.bits), width).expect("projected label fits"),
                    coeff.clone(),
                )
            })
            .collect();
        debug_assert!(terms
            .windows(2)
            .all(|pair| pair[0].0.bits() < pair[1].0.bits()));
        PureState::from_sorted_terms(width, terms)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{One, Signed};
        for (i, (label, coeff)) in self.terms.iter().enumerate() {
            if coeff.im.is_zero() {
                let negative = coeff.re.is_negative();
                match (i == 0, negative) {
                    (true, true) => write!(f, "-")?,
                    (true, false) => {}
                    (false, true) => write!(f, " - ")?,
                    (false, false) => write!(f, " + ")?,
                }
                let magnitude = coeff.re.abs();
                if !magnitude.is_one() {
                    write!(f, "{}", format_rational(&magnitude))?;
                }
                write!(f, "|{label}>")?;
            } else {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "({})|{label}>", format_complex(coeff))?;
            }
        }
        Ok(())
    }
}

/// Tensor product of two factor states. `placement` names the positions of
/// `a`'s qubits inside the combined register; `b` fills the complement, both
/// in ascending qubit order.
pub fn tensor_product(
    a: &PureState,
    b: &PureState,
    placement: QubitSubset,
) -> Result<PureState, StateError> {
    let n = placement.register_width();
    if a.qubit_count() != placement.size() || b.qubit_count() != n - placement.size() {
        return Err(StateError::FactorSizeMismatch {
            left: a.qubit_count(),
            right: b.qubit_count(),
            total: n,
        });
    }
    let m = a.term_count() * b.term_count();
    if m > MAX_TERMS {
        return Err(StateError::TooManyTerms(m));
    }
    let co_placement = placement.complement();
    let mut terms = Vec::with_capacity(m);
    for (la, ca) in a.terms() {
        let scattered_a = placement.deposit(la.bits());
        for (lb, cb) in b.terms() {
            let bits = scattered_a | co_placement.deposit(lb.bits());
            let label = BasisLabel::new(bits, n).expect("combined label fits");
            terms.push((label, ca * cb));
        }
    }
    terms.sort_by_key(|(label, _)| label.bits());
    Ok(PureState::from_sorted_terms(n, terms))
}

/// Relabels qubits: the bit at position `i` moves to position `perm[i-1]`.
pub fn permute_qubits(s: &PureState, perm: &[u8]) -> Result<PureState, StateError> {
    let n = s.qubit_count();
    if perm.len() != n as usize {
        return Err(StateError::NotAPermutation(n));
    }
    let mut seen = vec![false; n as usize + 1];
    for &target in perm {
        if target == 0 || target > n || seen[target as usize] {
            return Err(StateError::NotAPermutation(n));
        }
        seen[target as usize] = true;
    }
    let mut terms: Vec<_> = s
        .terms()
        .iter()
        .map(|(label, coeff)| {
            let mut bits = 0u64;
            for (i, &target) in perm.iter().enumerate() {
                let src = n - (i as u8 + 1);
                let dst = n - target;
                bits |= (label.bits() >> src & 1) << dst;
            }
            (
                BasisLabel::new(bits, n).expect("permuted label fits"),
                coeff.clone(),
            )
        })
        .collect();
    terms.sort_by_key(|(label, _)| label.bits());
    Ok(PureState::from_sorted_terms(n, terms))
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StateDoc {
    n: u8,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TermDoc {
    pub basis: String,
    pub re: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<String>,
}

impl TermDoc {
    pub(crate) fn from_term(label: &BasisLabel, coeff: &ExactComplex) -> TermDoc {
        TermDoc {
            basis: label.to_string(),
            re: format_rational(&coeff.re),
            im: if coeff.im.is_zero() {
                None
            } else {
                Some(format_rational(&coeff.im))
            },
        }
    }
}

/// Parses a state from either the line-oriented text format or the
/// structured JSON alternative (detected by a leading `{`).
pub fn parse_state(text: &str) -> Result<PureState, StateError> {
    if text.trim_start().starts_with('{') {
        parse_state_json(text)
    } else {
        parse_state_text(text)
    }
}

/// Text format: one `<bitstring> <re> [<im>]` term per line, `#` comments.
pub fn parse_state_text(text: &str) -> Result<PureState, StateError> {
    let mut n: Option<u8> = None;
    let mut terms: Vec<(u64, ExactComplex)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(StateError::Parse {
                line: line_no,
                message: format!("expected `<bitstring> <re> [<im>]`, got {} fields", fields.len()),
            });
        }
        let bitstring = fields[0];
        if !bitstring.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(StateError::Parse {
                line: line_no,
                message: format!("`{bitstring}` is not a bitstring"),
            });
        }
        if bitstring.len() > MAX_QUBITS as usize {
            return Err(StateError::QubitCountOutOfRange(bitstring.len()));
        }
        let width = bitstring.len() as u8;
        match n {
            None => n = Some(width),
            Some(expected) if expected != width => {
                return Err(StateError::Parse {
                    line: line_no,
                    message: format!(
                        "bitstring length {width} does not match earlier length {expected}"
                    ),
                });
            }
            _ => {}
        }
        let bits = u64::from_str_radix(bitstring, 2).expect("validated bitstring");
        let re = parse_rational(fields[1]).map_err(|e| StateError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let im = match fields.get(2) {
            Some(field) => parse_rational(field).map_err(|e| StateError::Parse {
                line: line_no,
                message: e.to_string(),
            })?,
            None => crate::scalar::Rational::zero(),
        };
        terms.push((bits, ExactComplex::new(re, im)));
    }
    match n {
        Some(n) => PureState::new(n, terms),
        None => Err(StateError::Empty),
    }
}

fn parse_state_json(text: &str) -> Result<PureState, StateError> {
    let doc: StateDoc =
        serde_json::from_str(text).map_err(|e| StateError::Structured(e.to_string()))?;
    if doc.n == 0 || doc.n > MAX_QUBITS {
        return Err(StateError::QubitCountOutOfRange(doc.n as usize));
    }
    let mut terms = Vec::with_capacity(doc.terms.len());
    for term in &doc.terms {
        if !term.basis.bytes().all(|b| b == b'0' || b == b'1') || term.basis.is_empty() {
            return Err(StateError::Structured(format!(
                "`{}` is not a bitstring",
                term.basis
            )));
        }
        if term.basis.len() != doc.n as usize {
            return Err(StateError::Structured(format!(
                "basis `{}` does not have n={} bits",
                term.basis, doc.n
            )));
        }
        let bits = u64::from_str_radix(&term.basis, 2).expect("validated bitstring");
        let re = parse_rational(&term.re).map_err(|e| StateError::Structured(e.to_string()))?;
        let im = match &term.im {
            Some(text) => parse_rational(text).map_err(|e| StateError::Structured(e.to_string()))?,
            None => crate::scalar::Rational::zero(),
        };
        terms.push((bits, ExactComplex::new(re, im)));
    }
    PureState::new(doc.n, terms)
}

/// Canonical text serialization; `parse_state` round-trips it exactly.
pub fn serialize_state(s: &PureState) -> String {
    let mut out = String::new();
    for (label, coeff) in s.terms() {
        out.push_str(&label.to_string());
        out.push(' ');
        out.push_str(&format_rational(&coeff.re));
        if !coeff.im.is_zero() {
            out.push(' ');
            out.push_str(&format_rational(&coeff.im));
        }
        out.push('\n');
    }
    out
}

/// Structured JSON serialization carrying the same content as the text form.
pub fn state_to_json(s: &PureState) -> String {
    let doc = StateDoc {
        n: s.qubit_count(),
        terms: s
            .terms()
            .iter()
            .map(|(label, coeff)| TermDoc::from_term(label, coeff))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("state document serializes")
}
