//! Integer Minkowski programming for survivable network design.
//!
//! The crate enumerates the atomic fibers (irreducible networks) of a
//! multicommodity-flow constraint matrix, evaluates Minkowski-additive
//! survivability functionals on them, and reformulates the design problem as
//! an integer linear program over atom multiplicities, which is then solved
//! exactly by branch-and-bound on a rational simplex.

pub mod fibers;
pub mod gallery;
pub mod intcore;
pub mod netmodel;
pub mod refsolve;
pub mod surviv;
