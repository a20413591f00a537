//! Certified upper and lower bounds on the `d log_3 2`-dimensional Hausdorff
//! measure of `C^d`, the `d`-fold Cartesian power of the middle-thirds
//! Cantor set.
//!
//! * [`lattice`]: exact integer geometry of level-`k` basic cubes.
//! * [`numeric`]: direction-certified powers and quotients.
//! * [`bounds`]: dimension, naive bound and the shared result type.
//! * [`upper`]: centred-ball sweep giving upper bounds.
//! * [`matching`], [`lower`]: repulsive-pair graphs, maximum matchings and
//!   the diameter refinement giving lower bounds.
//! * [`record`]: on-disk run records, result cache and report emitters.
//! * [`commands`]: the subcommands of the `cantor-bounds` binary.

pub mod bounds;
pub mod commands;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod lower;
pub mod matching;
pub mod numeric;
pub mod record;
pub mod upper;

pub use error::{Error, Result};

/// Arbitrary-precision rational used wherever a value must stay exact.
pub type Rational = num_rational::BigRational;
