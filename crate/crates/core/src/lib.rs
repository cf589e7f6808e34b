//! Uniserial representations of finite-dimensional algebras given by a
//! quiver with relations.
//!
//! The crate builds the affine varieties that parametrize uniserial modules
//! with a fixed mast, classifies their coordinates as slack or tight, checks
//! the structural conditions that govern finite uniserial type, and decides
//! finite type with a certificate attached to every verdict.
//!
//! Paths are stored in application order (first-applied arrow first) and
//! rendered in composition order, so `g b a` means "a, then b, then g".
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod criteria;
pub mod decide;
pub mod fibers;
pub mod generators;
pub mod poly;
pub mod presentation;
pub mod quiver;
pub mod variety;

pub use poly::{Polynomial, Scalar, VarKey};
pub use presentation::{Presentation, Relation};
pub use quiver::{Arrow, ArrowId, Path, Quiver, VertexId};
