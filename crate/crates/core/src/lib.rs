//! Ground-state energy minimization for one-dimensional spin chains by
//! dynamic programming over ε-nets: exact classical chains, mean-field
//! product states and fixed bond dimension matrix product states, with
//! oracles and verifiers for the accompanying error bounds.

pub mod classical;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod meanfield;
pub mod mps;
pub mod nets;
pub mod oracles;

pub use error::{Error, ErrorCategory, Result};
