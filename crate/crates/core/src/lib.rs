//! Quantum Markov chains on Cayley trees generated by open quantum random
//! walks, their boundary conditions and phase diagnostics.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phase;
pub mod qmc;
pub mod tree;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerance, C64};
pub use model::{OqrwModel, TwoStateParams, ValidationReport, Violation};
pub use tree::{TreeShape, Vertex};
