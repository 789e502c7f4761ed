//! Korobov and Hua–Wang p-sets.
//!
//! The crate builds the three classical p-set families exactly (integer
//! numerators over a common modulus), computes their exact star and weighted
//! star discrepancy, evaluates the exponential sums that control them, and
//! turns the explicit discrepancy bounds into concrete point counts.
//!
//! - [`numtheory`]: primality, prime search, modular polynomial evaluation.
//! - [`pointset`]: the `P`, `Q` and `R` constructions and coordinate projection.
//! - [`weights`]: product and general weights, tail sums, the weight-file format.
//! - [`discrepancy`]: exact critical-corner enumeration and sampled lower bounds.
//! - [`expsum`]: Korobov and Hua–Wang sums, bound verification, Niederreiter sums.
//! - [`bounds`]: closed-form bounds, dimension-free constants, inversion to `N`.
//! - [`qmc`]: integration harness checking Koksma–Hlawka consistency.
//! - [`cli`]: the `psetdisc` command line front end.

pub mod bounds;
pub mod cli;
pub mod discrepancy;
mod error;
pub mod expsum;
mod limits;
pub mod numtheory;
pub mod pointset;
pub mod qmc;
mod subset;
pub mod weights;

pub use error::{Error, Result};
pub use limits::Limits;
pub use numtheory::Prime;
pub use pointset::{PSetKind, RationalPointSet};
pub use subset::Subset;
pub use weights::Weights;
