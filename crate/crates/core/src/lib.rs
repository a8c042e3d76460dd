//! Typed string diagrams for a dagger compact process calculus, evaluated
//! into finite-dimensional complex tensors.
//!
//! The crate is organised like a small compiler:
//!
//! - [`dsl`] parses `.sd` sources into a [`dsl::Program`];
//! - [`diagram`] is the typed IR with validation, dagger and normalization;
//! - [`axioms`] checks the categorical equations on a wire;
//! - [`tensor`] lowers diagrams to dense matrices;
//! - [`cpm`] doubles diagrams into CP maps (channels, density matrices);
//! - [`smatrix`] decomposes unitaries into connected cluster terms;
//! - [`bell`] covers CHSH bounds for joint measures and quantum states;
//! - [`entropy`] audits Shannon and von Neumann entropies under channels;
//! - [`cli`] wires everything into JSON-reporting subcommands.

pub mod axioms;
pub mod bell;
pub mod cli;
pub mod cpm;
pub mod diagram;
pub mod dsl;
pub mod entropy;
pub mod linalg;
pub mod smatrix;
pub mod tensor;

/// Default absolute tolerance for numerical comparisons.
pub const DEFAULT_ATOL: f64 = 1e-9;

pub use diagram::{Diagram, DiagramError, Generator, ObjectWord, WireKind, WireType};
pub use tensor::{evaluate, tensors_close, ComplexTensor};
