//! Decoherence of a two-spin central system coupled to a spin-1/2 bath.
//!
//! The model Hamiltonian is
//!
//! ```text
//! H = J0 (S1 + S2)^2 + sum_n J_n I_n . (S1 + S2)
//! ```
//!
//! and the time-dependent Schrödinger equation is solved with exact
//! diagonalization, four Suzuki product formulas (pair and XYZ splittings at
//! second and fourth order), a Chebyshev expansion and the short iterative
//! Lanczos method. The [`oracle`] module provides the closed-form large-bath
//! magnetization, and [`bench`] drives trajectories and algorithm
//! comparisons from flat `key=value` configuration files.

pub mod bench;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod oracle;
pub mod propagators;

pub use error::{Error, Result};
pub use hamiltonian::{build_model, ModelParams, PairTerm, TermSet};
pub use hilbert::{dimension, prepare_initial_state, SpinIndex, StateVector};
pub use propagators::{propagate, Decomposition, EdCache, PropagatorKind, PropagatorSpec, Trajectory};

pub use num_complex::Complex64 as C64;
