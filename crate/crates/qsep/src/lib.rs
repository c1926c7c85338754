//! Exact separability analysis for sparse pure states of *n* qubits.
//!
//! A pure state enters as its support — basis bitstrings with nonzero
//! exact coefficients. The toolkit decides whether the state factors
//! across some bipartition of the qubits, produces the tensor factors
//! when it does, and sorts every state into one of four families:
//!
//! 1. a qubit is constant across the support (trivially a product),
//! 2. separable through a rank-1 coefficient matrix on a canonical
//!    support split,
//! 3. genuinely entangled by support structure alone (no split exists,
//!    whatever the coefficients),
//! 4. genuinely entangled through the coefficients (splits of the
//!    support exist, but no coefficient matrix is rank-1).
//!
//! All verdicts use exact Gaussian-rational arithmetic; an independent
//! dense Schmidt-rank oracle cross-checks them on small registers.
//!
//! ```
//! use qsep::state::parse_state;
//! use qsep::separability::{classify, FamilyLabel};
//!
//! let ghz = parse_state("000 1\n111 1").unwrap();
//! assert_eq!(classify(&ghz).family, FamilyLabel::Family3);
//!
//! let product = parse_state("000 1/2\n010 1/2\n101 1/2\n111 1/2").unwrap();
//! let report = classify(&product);
//! assert_eq!(report.family, FamilyLabel::Family2);
//! assert_eq!(report.witness.unwrap().subset.to_string(), "{2}");
//! ```

pub mod bsm;
pub mod cli;
pub mod coeff;
pub mod oracle;
pub mod scalar;
pub mod separability;
pub mod state;
pub mod zoo;

pub use scalar::{ExactComplex, Rational};
pub use separability::{classify, factorize_fully, ClassificationReport, FamilyLabel};
pub use state::{parse_state, serialize_state, BasisLabel, PureState, QubitSubset};
