//! Random and free dichotomic observables for Bell-type experiments.
//!
//! The crate has two halves that check each other. The numeric half builds
//! observables as dense complex matrices (Haar-conjugated sign diagonals,
//! truncated free permutations, Clifford families) and evaluates CHSH norms,
//! steering bounds and fine-grained uncertainty on them. The exact half works
//! in the group algebra of the free product of copies of Z/2 with its trace
//! state and produces the limiting moment sequences as big integers.
//!
//! Modules:
//! - [`matkit`]: dense complex kernel (products, Kronecker, eigenvalues, norms)
//! - [`observables`]: constructors for every observable family
//! - [`freealg`]: reduced words, algebra elements, the trace state, walk counts
//! - [`moments`]: exact moment formulas and root-limit estimates
//! - [`bell`]: CHSH, steering, uncertainty, Følner states, complex CHSH, freeness test

pub mod bell;
pub mod error;
pub mod freealg;
pub mod matkit;
pub mod moments;
pub mod observables;

pub use error::{Error, Result};
pub use matkit::{ComplexMatrix, HermitianSpectrum, C64};
pub use observables::{Observable, ObservableFamily, RngStream};
