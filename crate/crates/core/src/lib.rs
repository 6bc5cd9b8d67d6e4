//! Cycle structure of random elements of wreath products `Γⁿ ⋊ Sₙ`.
//!
//! The crate covers exact cycle-index polynomials, samplers that produce
//! cycle types without building the permutation, compound Poisson limit
//! laws, permutation statistics, the commuting-graph chain on partitions,
//! and total-variation checks tying these together.

pub mod arith;
pub mod chain;
pub mod coupling;
pub mod cycle_index;
pub mod error;
pub mod harness;
pub mod limit_laws;
pub mod mc;
pub mod partition;
pub mod perm;
pub mod poly;
pub mod stats;
pub mod wreath;

pub use cycle_index::CycleIndex;
pub use error::{Error, Result};
pub use partition::Partition;
pub use perm::Permutation;
pub use wreath::{GroupSpec, WreathElement};
