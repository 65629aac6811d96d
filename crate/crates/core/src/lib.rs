//! Jet-space differential algebra for conservation laws of scaling-invariant
//! PDE systems.
//!
//! The crate generates conserved currents from adjoint-symmetries through
//! the scaling-symmetry boundary current, computes scaling weights,
//! reconstructs canonical densities, and verifies everything both
//! symbolically (exact canonical forms) and numerically (random sampling).
//!
//! Modules:
//! - [`expr`]: exact symbolic expressions over jet coordinates.
//! - [`jet`]: total derivatives, (adjoint) linearization, the bilinear
//!   boundary current, Euler operator, antiderivative extraction.
//! - [`system`]: field systems, scaling specs and catalog entries.
//! - [`scaling`]: scaling symmetries, weights, the conservation-law formula
//!   and density reconstruction.
//! - [`recursion`]: recursion operators and soliton hierarchies.
//! - [`models`]: built-in systems (KdV, sine-Gordon, vector mKdV,
//!   incompressible Euler, power-law nonlinear wave).
//! - [`verify`]: on-shell reduction, conservation/symmetry/multiplier
//!   checks, numeric spot checks.
//! - [`parse`], [`printer`]: the expression grammar and pretty-printers.
//! - [`report`]: structured output for the command-line interface.

pub mod expr;
pub mod jet;
pub mod models;
pub mod parse;
pub mod printer;
pub mod recursion;
pub mod report;
pub mod scaling;
pub mod system;
pub mod verify;

pub use expr::{Expr, JetCoord, MultiIndex, Rat};
pub use system::{CatalogEntry, EntryClass, EntryKind, FieldSystem, ScalingSpec, SymbolTable};
