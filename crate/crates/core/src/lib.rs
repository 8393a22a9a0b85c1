//! Interval-valued fuzzy answer set programming.
//!
//! Programs are parsed and grounded ([`program`]), rewritten into one rule
//! per atom ([`transform`]), evaluated by a monotonic fixpoint ([`mi`]), and
//! whatever remains cyclic is split into strongly connected components
//! ([`depgraph`]) and solved one component at a time ([`nmi`], [`solver`]).
//! [`semantics`] holds the declarative definitions used to verify results.

pub mod interval;
pub mod program;
pub mod transform;
pub mod semantics;
pub mod mi;
pub mod depgraph;
pub mod nmi;
pub mod solver;
