//! Constrained mechanics over split-complex (paracomplex) coordinates.
//!
//! The crate is layered bottom-up:
//!
//! * [`para`]: the split-complex scalar and its null decomposition.
//! * [`expr`]: expression trees, parser, symbolic differentiation.
//! * [`calculus`]: Wirtinger-style derivatives and jets.
//! * [`forms`]: the almost product structure, vertical differential,
//!   exterior derivative, interior product, canonical Liouville pair.
//! * [`lagrangian`] / [`hamiltonian`]: constrained dynamics and integrators.
//! * [`constraints`]: residuals, distribution rank, holonomy classifier.
//! * [`scenario`]: scenario files, builtins, runs, and output emission.

pub mod calculus;
pub mod constraints;
pub mod coords;
pub mod expr;
pub mod forms;
pub mod hamiltonian;
pub mod integrate;
pub mod lagrangian;
mod linalg;
pub mod para;
pub mod scenario;

pub use calculus::DerivativeConvention;
pub use coords::{Chart, Part, RealCoord, Slot, SlotKind, Which};
pub use expr::{EvalEnvironment, Expr, ExprError};
pub use para::{NullPair, ParaError, ParaNumber};
