//! Tristochastic tensors, the convolutions they define on the probability
//! simplex, and quantum channels whose dynamical matrices lift them.
//!
//! - [`numkit`]: complex linear algebra, partial traces, entropies.
//! - [`classical`]: stochastic tensors, convolution, reducing sets, fixed points.
//! - [`qchannel`]: dynamical matrices, Kraus and Stinespring forms, multi-input channels.
//! - [`coherify`]: coherent lifts of tensors and their coherence measures.
//! - [`qubitconv`]: the two-qubit convolution family, circuits, metrics, noise mitigation.

pub mod classical;
pub mod cli;
pub mod coherify;
pub mod error;
pub mod io;
pub mod numkit;
pub mod qchannel;
pub mod qubitconv;
pub mod sample;

pub use error::{Error, Result};
