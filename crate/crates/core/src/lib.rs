//! Opacity verification for nondeterministic finite transition systems.
//!
//! The crate decides initial-state, current-state, K-step and infinite-step
//! opacity with a two-way observer, checks opacity-preserving (bi)simulation
//! relations, and builds quotient abstractions from state partitions. The
//! [`oracle`] module is a deliberately naive second implementation used for
//! cross-validation.

pub mod fixtures;
pub mod observer;
pub mod oracle;
pub mod quotient;
pub mod relations;
pub mod stateset;
pub mod system;

pub use observer::{Notion, Verdict};
pub use quotient::Partition;
pub use relations::{RelationDiagnosis, StatePairRelation};
pub use stateset::StateSet;
pub use system::{augment, is_total, reachable, validate, SystemDef, TransitionSystem, PHI};
