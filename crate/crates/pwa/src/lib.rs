//! Exact-rational region abstraction of a planar piecewise-linear system and
//! the nine-state quotient it induces.

pub mod dynamics;
pub mod geometry;
pub mod regions;
pub mod verify;

pub use dynamics::{apply_dynamics, branch_of, branches, Branch, SwapMap};
pub use geometry::{Bound, Interval, Point, RationalBox, Q};
pub use regions::{classify_point, Region, RegionLayout};
pub use verify::{
    build_pwa_quotient, region_image, sampling_consistency, verify_region_transitions, PwaError,
    SamplingReport, TransitionDiagnosis,
};
