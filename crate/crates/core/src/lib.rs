//! Zero-sum laboratory for the cyclic group `Z_n`.
//!
//! The crate decides whether a sequence in `Z_n` avoids zero sums of length
//! `n`, splits long such sequences into the two-part normal form
//! `α ∪ β` with `L(α) < n` and `L(1 − β) < n` (up to an affine map),
//! builds the known extremal families, and runs exhaustive verification
//! sweeps over canonical orbit representatives.
//!
//! ```
//! use zslab::{engine, separability, ZnSeq};
//!
//! let seq: ZnSeq = "n=5: 0^2 1^4 4".parse().unwrap();
//! assert!(engine::is_n_zero_free(&seq));
//! let d = separability::is_separable(&seq).expect("long n-zero-free sequences split");
//! assert!(d.alpha.lpr_sum() < 5);
//! assert!(d.beta.one_minus().lpr_sum() < 5);
//! ```

pub mod cli;
pub mod engine;
pub mod enumeration;
mod error;
pub mod extremal;
pub mod report;
pub mod separability;
pub mod zn;

pub use error::{Error, Result};
pub use zn::{AffineMap, ZnSeq};
