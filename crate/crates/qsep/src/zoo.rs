//! State generators for fixtures and fuzzing, registered by name.
//!
//! Each kind lives behind the [`Generator`] trait and is looked up at
//! runtime through [`registry`], which is how the CLI's `--gen KIND`
//! selects one. Named states use unnormalized integer or half-integer
//! coefficients — every consumer is scale invariant, so nothing needs a
//! √2. Seeded kinds are bit-for-bit reproducible: same seed, same state.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bsm::{constant_columns, next_same_popcount};
use crate::scalar::{ratio, ExactComplex, Rational};
use crate::state::{full_mask, tensor_product, PureState, QubitSubset, MAX_QUBITS, MAX_TERMS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZooError {
    #[error("unknown generator `{0}`")]
    UnknownKind(String),
    #[error("generator `{kind}` requires parameter `{param}`")]
    MissingParameter { kind: &'static str, param: &'static str },
    #[error("invalid parameters for `{kind}`: {message}")]
    InvalidParameters { kind: &'static str, message: String },
}

fn invalid(kind: &'static str, message: impl Into<String>) -> ZooError {
    ZooError::InvalidParameters {
        kind,
        message: message.into(),
    }
}

/// Parameter bag shared by all generators; each kind reads what it needs
/// and rejects what is out of range.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenParams {
    pub n: Option<u8>,
    pub k: Option<u32>,
    pub m: Option<usize>,
    pub blocks: Option<Vec<u8>>,
    pub seed: u64,
}

/// A named state constructor selectable at runtime.
pub trait Generator: Send + Sync {
    fn name(&self) -> &'static str;
    /// One-line parameter summary for listings.
    fn usage(&self) -> &'static str;
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError>;
}

/// Name-keyed registry of generators.
pub struct GeneratorRegistry {
    by_name: BTreeMap<&'static str, Box<dyn Generator>>,
}

impl GeneratorRegistry {
    pub fn register(&mut self, generator: Box<dyn Generator>) {
        self.by_name.insert(generator.name(), generator);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Generator> {
        self.by_name.get(name).map(|g| g.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Generator> {
        self.by_name.values().map(|g| g.as_ref())
    }
}

/// The built-in generators, constructed once.
pub fn registry() -> &'static GeneratorRegistry {
    static REGISTRY: OnceLock<GeneratorRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg = GeneratorRegistry {
            by_name: BTreeMap::new(),
        };
        reg.register(Box::new(GhzGen));
        reg.register(Box::new(WGen));
        reg.register(Box::new(DickeGen));
        reg.register(Box::new(C4Gen));
        reg.register(Box::new(LinearClusterGen));
        reg.register(Box::new(BellGen));
        reg.register(Box::new(C2Gen));
        reg.register(Box::new(RandomProductGen));
        reg.register(Box::new(RandomSparseGen));
        reg
    })
}

/// A generator selection: kind name plus parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: String,
    pub params: GenParams,
}

/// Looks the kind up in the registry and runs it.
pub fn generate(spec: &GeneratorSpec) -> Result<PureState, ZooError> {
    registry()
        .get(&spec.kind)
        .ok_or_else(|| ZooError::UnknownKind(spec.kind.clone()))?
        .generate(&spec.params)
}

// ---------------------------------------------------------------------------
// Named states
// ---------------------------------------------------------------------------

fn check_n(kind: &'static str, n: u8, lo: u8, hi: u8) -> Result<(), ZooError> {
    if n < lo || n > hi {
        return Err(invalid(kind, format!("n = {n} outside {lo}..={hi}")));
    }
    Ok(())
}

/// `|0…0⟩ + |1…1⟩` on `n` qubits.
pub fn ghz(n: u8) -> Result<PureState, ZooError> {
    check_n("ghz", n, 2, MAX_QUBITS)?;
    Ok(PureState::new(
        n,
        vec![(0, ExactComplex::one()), (full_mask(n), ExactComplex::one())],
    )
    .expect("two distinct labels"))
}

/// Sum of all weight-1 labels.
pub fn w(n: u8) -> Result<PureState, ZooError> {
    check_n("w", n, 2, MAX_QUBITS)?;
    dicke(n, 1)
}

/// Sum of all weight-k labels, coefficients 1.
pub fn dicke(n: u8, k: u32) -> Result<PureState, ZooError> {
    check_n("dicke", n, 2, MAX_QUBITS)?;
    if k == 0 || k as u8 > n - 1 {
        return Err(invalid("dicke", format!("k = {k} outside 1..={}", n - 1)));
    }
    if binomial(n as u64, k as u64) > MAX_TERMS as u128 {
        return Err(invalid("dicke", "support exceeds the term cap"));
    }
    let mut labels = Vec::new();
    let mut bits = (1u64 << k) - 1;
    loop {
        labels.push((bits, ExactComplex::one()));
        match next_same_popcount(bits, n) {
            Some(next) => bits = next,
            None => break,
        }
    }
    Ok(PureState::new(n, labels).expect("distinct weight-k labels"))
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
        if out > MAX_TERMS as u128 {
            return out;
        }
    }
    out
}

/// The four-qubit state `½(|0000⟩ + |0101⟩ + |1010⟩ − |1111⟩)`.
pub fn c4() -> PureState {
    PureState::new(
        4,
        vec![
            (0b0000, half()),
            (0b0101, half()),
            (0b1010, half()),
            (0b1111, -half()),
        ],
    )
    .expect("literal state")
}

/// `|00⟩ + |11⟩`.
pub fn bell() -> PureState {
    PureState::new(2, vec![(0b00, ExactComplex::one()), (0b11, ExactComplex::one())])
        .expect("literal state")
}

/// `½(|00⟩ + |01⟩ + |10⟩ − |11⟩)`.
pub fn c2() -> PureState {
    PureState::new(
        2,
        vec![(0b00, half()), (0b01, half()), (0b10, half()), (0b11, -half())],
    )
    .expect("literal state")
}

fn half() -> ExactComplex {
    ExactComplex::new(ratio(1, 2), Rational::zero())
}

/// Full 2^n expansion of the linear cluster chain: each label gets sign
/// (−1)^(number of adjacent 1-pairs). For n = 4 this is a locally rotated
/// relative of [`c4`], not the same literal state.
pub fn linear_cluster(n: u8) -> Result<PureState, ZooError> {
    check_n("linear_cluster", n, 2, 20)?;
    let terms = (0..1u64 << n)
        .map(|bits| {
            let adjacent_ones = (bits & bits >> 1).count_ones();
            let sign = if adjacent_ones % 2 == 0 { 1 } else { -1 };
            (bits, ExactComplex::new(ratio(sign, 1), Rational::zero()))
        })
        .collect();
    Ok(PureState::new(n, terms).expect("full support"))
}

// ---------------------------------------------------------------------------
// Seeded random states
// ---------------------------------------------------------------------------

/// Nonzero rational with numerator in ±1..=9 and denominator in 1..=9.
fn random_coefficient(rng: &mut ChaCha8Rng) -> ExactComplex {
    let mut numerator = 0i64;
    while numerator == 0 {
        numerator = rng.gen_range(-9..=9);
    }
    let denominator = rng.gen_range(1..=9);
    ExactComplex::new(ratio(numerator, denominator), Rational::zero())
}

/// `m` distinct uniformly chosen labels with random nonzero rational
/// coefficients. May well have constant columns; callers that need a
/// constant-free state must filter.
pub fn random_sparse(n: u8, m: usize, seed: u64) -> Result<PureState, ZooError> {
    check_n("random_sparse", n, 1, MAX_QUBITS)?;
    let dim = 1u128 << n;
    if m == 0 || m as u128 > dim || m > MAX_TERMS {
        return Err(invalid(
            "random_sparse",
            format!("m = {m} outside 1..=min(2^n, {MAX_TERMS})"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = std::collections::BTreeSet::new();
    while labels.len() < m {
        labels.insert(rng.gen_range(0..1u64 << n));
    }
    let terms = labels
        .into_iter()
        .map(|bits| (bits, random_coefficient(&mut rng)))
        .collect();
    Ok(PureState::new(n, terms).expect("distinct labels, nonzero coefficients"))
}

/// Random factor on `width` qubits with no constant column. Two-term
/// factors take a complementary label pair (the only constant-free shape);
/// larger supports are drawn by rejection.
fn random_factor(width: u8, rng: &mut ChaCha8Rng) -> PureState {
    let dim = 1u64 << width;
    let max_m = dim.min(8) as usize;
    for _ in 0..10_000 {
        let m = rng.gen_range(2..=max_m);
        if m == 2 {
            let a = rng.gen_range(0..dim);
            let b = a ^ full_mask(width);
            let terms = vec![
                (a.min(b), random_coefficient(rng)),
                (a.max(b), random_coefficient(rng)),
            ];
            return PureState::new(width, terms).expect("complementary pair");
        }
        let mut labels = std::collections::BTreeSet::new();
        while labels.len() < m {
            labels.insert(rng.gen_range(0..dim));
        }
        let terms: Vec<_> = labels
            .into_iter()
            .map(|bits| (bits, random_coefficient(rng)))
            .collect();
        let state = PureState::new(width, terms).expect("distinct labels");
        if constant_columns(&state).is_empty() {
            return state;
        }
    }
    // Rejection is overwhelmingly likely to have returned long before this.
    let a = rng.gen_range(0..dim);
    let b = a ^ full_mask(width);
    PureState::new(
        width,
        vec![
            (a.min(b), random_coefficient(rng)),
            (a.max(b), random_coefficient(rng)),
        ],
    )
    .expect("complementary pair")
}

/// Exact tensor product of seeded random constant-free factors, one per
/// block, placed on a seeded random assignment of qubit positions.
pub fn random_product(blocks: &[u8], seed: u64) -> Result<PureState, ZooError> {
    if blocks.len() < 2 {
        return Err(invalid("random_product", "needs at least two blocks"));
    }
    if blocks.contains(&0) {
        return Err(invalid("random_product", "blocks must be nonempty"));
    }
    let n: u64 = blocks.iter().map(|&b| b as u64).sum();
    if n > MAX_QUBITS as u64 {
        return Err(invalid(
            "random_product",
            format!("blocks sum to {n} qubits, more than {MAX_QUBITS}"),
        ));
    }
    let n = n as u8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<u8> = (1..=n).collect();
    positions.shuffle(&mut rng);

    let mut offset = 0usize;
    let mut acc: Option<(QubitSubset, PureState)> = None;
    for &width in blocks {
        let block = &positions[offset..offset + width as usize];
        offset += width as usize;
        let factor = random_factor(width, &mut rng);
        let subset = QubitSubset::from_qubits(block, n).expect("positions fit");
        acc = Some(match acc {
            None => (subset, factor),
            Some((acc_subset, acc_state)) => {
                let union = QubitSubset::from_mask(acc_subset.mask() | subset.mask(), n)
                    .expect("mask fits");
                let placement =
                    QubitSubset::from_mask(union.extract(acc_subset.mask()), union.size())
                        .expect("compacted mask fits");
                let product = tensor_product(&acc_state, &factor, placement)
                    .expect("blocks are disjoint");
                (union, product)
            }
        });
    }
    Ok(acc.expect("at least two blocks").1)
}

// ---------------------------------------------------------------------------
// Registry entries
// ---------------------------------------------------------------------------

fn require_n(kind: &'static str, params: &GenParams) -> Result<u8, ZooError> {
    params.n.ok_or(ZooError::MissingParameter { kind, param: "n" })
}

struct GhzGen;
impl Generator for GhzGen {
    fn name(&self) -> &'static str {
        "ghz"
    }
    fn usage(&self) -> &'static str {
        "ghz --n N"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        ghz(require_n("ghz", params)?)
    }
}

struct WGen;
impl Generator for WGen {
    fn name(&self) -> &'static str {
        "w"
    }
    fn usage(&self) -> &'static str {
        "w --n N"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        w(require_n("w", params)?)
    }
}

struct DickeGen;
impl Generator for DickeGen {
    fn name(&self) -> &'static str {
        "dicke"
    }
    fn usage(&self) -> &'static str {
        "dicke --n N --k K"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        let n = require_n("dicke", params)?;
        let k = params.k.ok_or(ZooError::MissingParameter {
            kind: "dicke",
            param: "k",
        })?;
        dicke(n, k)
    }
}

struct C4Gen;
impl Generator for C4Gen {
    fn name(&self) -> &'static str {
        "c4"
    }
    fn usage(&self) -> &'static str {
        "c4"
    }
    fn generate(&self, _params: &GenParams) -> Result<PureState, ZooError> {
        Ok(c4())
    }
}

struct LinearClusterGen;
impl Generator for LinearClusterGen {
    fn name(&self) -> &'static str {
        "linear_cluster"
    }
    fn usage(&self) -> &'static str {
        "linear_cluster --n N"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        linear_cluster(require_n("linear_cluster", params)?)
    }
}

struct BellGen;
impl Generator for BellGen {
    fn name(&self) -> &'static str {
        "bell"
    }
    fn usage(&self) -> &'static str {
        "bell"
    }
    fn generate(&self, _params: &GenParams) -> Result<PureState, ZooError> {
        Ok(bell())
    }
}

struct C2Gen;
impl Generator for C2Gen {
    fn name(&self) -> &'static str {
        "c2"
    }
    fn usage(&self) -> &'static str {
        "c2"
    }
    fn generate(&self, _params: &GenParams) -> Result<PureState, ZooError> {
        Ok(c2())
    }
}

struct RandomProductGen;
impl Generator for RandomProductGen {
    fn name(&self) -> &'static str {
        "random_product"
    }
    fn usage(&self) -> &'static str {
        "random_product --blocks K1,K2[,..] --seed S"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        let blocks = params.blocks.as_ref().ok_or(ZooError::MissingParameter {
            kind: "random_product",
            param: "blocks",
        })?;
        random_product(blocks, params.seed)
    }
}

struct RandomSparseGen;
impl Generator for RandomSparseGen {
    fn name(&self) -> &'static str {
        "random_sparse"
    }
    fn usage(&self) -> &'static str {
        "random_sparse --n N --m M --seed S"
    }
    fn generate(&self, params: &GenParams) -> Result<PureState, ZooError> {
        let n = require_n("random_sparse", params)?;
        let m = params.m.ok_or(ZooError::MissingParameter {
            kind: "random_sparse",
            param: "m",
        })?;
        random_sparse(n, m, params.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real;
    use crate::separability::{classify, factorize_fully, FamilyLabel};

    #[test]
    fn c4_literal() {
        let s = c4();
        assert_eq!(s.labels().collect::<Vec<_>>(), vec![0b0000, 0b0101, 0b1010, 0b1111]);
        let signs: Vec<_> = s.terms().iter().map(|(_, c)| c.clone()).collect();
        assert_eq!(signs, vec![real(1, 2), real(1, 2), real(1, 2), real(-1, 2)]);
    }

    #[test]
    fn ghz_and_bell() {
        assert_eq!(ghz(3).unwrap().labels().collect::<Vec<_>>(), vec![0, 7]);
        assert_eq!(bell(), ghz(2).unwrap());
        assert!(ghz(1).is_err());
    }

    #[test]
    fn dicke_counts() {
        assert_eq!(dicke(4, 2).unwrap().term_count(), 6);
        assert_eq!(dicke(5, 2).unwrap().term_count(), 10);
        assert_eq!(w(6).unwrap().term_count(), 6);
        assert_eq!(w(4).unwrap(), dicke(4, 1).unwrap());
        assert!(dicke(4, 0).is_err());
        assert!(dicke(4, 4).is_err());
    }

    #[test]
    fn linear_cluster_two_qubits_matches_c2_support() {
        let s = linear_cluster(2).unwrap();
        assert_eq!(s.term_count(), 4);
        let signs: Vec<i64> = s
            .terms()
            .iter()
            .map(|(_, c)| if c == &real(1, 1) { 1 } else { -1 })
            .collect();
        assert_eq!(signs, vec![1, 1, 1, -1]);
    }

    #[test]
    fn seeded_generators_are_reproducible() {
        assert_eq!(
            random_sparse(6, 9, 42).unwrap(),
            random_sparse(6, 9, 42).unwrap()
        );
        assert_eq!(
            random_product(&[2, 3], 7).unwrap(),
            random_product(&[2, 3], 7).unwrap()
        );
    }

    #[test]
    fn random_sparse_shapes() {
        let s = random_sparse(5, 12, 3).unwrap();
        assert_eq!(s.qubit_count(), 5);
        assert_eq!(s.term_count(), 12);
        assert!(random_sparse(2, 5, 0).is_err()); // m > 2^n
    }

    #[test]
    fn random_products_are_separable() {
        for seed in 0..20 {
            let s = random_product(&[2, 2], seed).unwrap();
            let family = classify(&s).family;
            assert!(
                matches!(family, FamilyLabel::Family1 | FamilyLabel::Family2),
                "seed {seed} produced {family}"
            );
        }
    }

    #[test]
    fn random_product_round_trips_through_factorization() {
        let s = random_product(&[2, 2], 42).unwrap();
        let tree = factorize_fully(&s);
        assert!(tree.factors.len() >= 2);
        assert_eq!(tree.product(), s);
    }

    #[test]
    fn registry_lookup_and_dispatch() {
        let names: Vec<&str> = registry().iter().map(|g| g.name()).collect();
        assert_eq!(
            names,
            vec![
                "bell",
                "c2",
                "c4",
                "dicke",
                "ghz",
                "linear_cluster",
                "random_product",
                "random_sparse",
                "w"
            ]
        );
        let spec = GeneratorSpec {
            kind: "ghz".into(),
            params: GenParams {
                n: Some(4),
                ..Default::default()
            },
        };
        assert_eq!(generate(&spec).unwrap(), ghz(4).unwrap());
        let missing = GeneratorSpec {
            kind: "ghz".into(),
            params: GenParams::default(),
        };
        assert!(matches!(
            generate(&missing),
            Err(ZooError::MissingParameter { .. })
        ));
        let unknown = GeneratorSpec {
            kind: "nope".into(),
            params: GenParams::default(),
        };
        assert_eq!(generate(&unknown), Err(ZooError::UnknownKind("nope".into())));
    }

    #[test]
    fn random_product_validation() {
        assert!(random_product(&[4], 0).is_err());
        assert!(random_product(&[0, 2], 0).is_err());
        assert!(random_product(&[32, 32], 0).is_err());
    }
}
