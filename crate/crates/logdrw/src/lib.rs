//! Exact arithmetic for truncated Witt vectors, affine monoids, and log
//! de Rham-Witt complexes over monoid algebras.
//!
//! The crate is organized bottom-up:
//! - [`snf`]: Smith normal form over the integers with transform tracking.
//! - [`witt`]: truncated Witt vectors over small base rings, with the ghost
//!   map as the correctness oracle.
//! - [`monoid`]: affine (fine, saturated) monoids given by a lattice and cone
//!   facets, monoid homomorphisms, ideals, and windowed predicate checks.
//! - [`drw_basis`]: basic differentials over Laurent monoid algebras in
//!   canonical normal form, with the rewriting engine (d, V, F, wedge by
//!   dlog, word normalization) and the phantom-components oracle.
//! - [`log_drw`]: elements of the de Rham-Witt complex in absolute, relative,
//!   and ideal-quotient contexts, with weight decomposition and the
//!   monoid-side/group-side change-of-presentation maps.
//! - [`compare`]: the de Rham side, weight-graded finite complexes, homology
//!   over Z/p^m, and the comparison verification engine.

pub mod compare;
pub mod drw_basis;
pub mod log_drw;
pub mod monoid;
pub mod snf;
pub mod witt;
