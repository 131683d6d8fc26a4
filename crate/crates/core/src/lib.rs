//! Sufficient conditions for genuine multipartite entanglement of qudit and
//! truncated bosonic states.
//!
//! The witnesses in [`witness`] evaluate inequalities whose violation certifies
//! that a three- or four-party state is genuinely multipartite entangled.
//! Satisfying an inequality says nothing either way.

pub mod cli;
pub mod downconv;
pub mod error;
pub mod local_ops;
pub mod optimizer;
pub mod state_file;
pub mod states;
pub mod tensor;
pub mod witness;

pub use error::{GmeError, Result};
pub use local_ops::{CompositeObservable, LocalOperator};
pub use states::{Bipartition, DensityMatrix, HilbertDims, PureState, QuantumState};
pub use tensor::ComplexMatrix;
pub use witness::{Condition, Evaluator, Witness, WitnessReport};
