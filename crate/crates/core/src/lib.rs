//! Numerical laboratory for the massive Schwinger model on a momentum-space
//! lattice.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice_basis`]: fermion mode configurations, the large gauge
//!   transformation `U_1`, translation and parity, and symmetrized
//!   gauge-invariant sector bases.
//! - [`hamiltonian`]: sector Hamiltonian matrices, the strong-coupling closed
//!   forms for `L = 2, 3, 4`, and low-dimensional truncations.
//! - [`criticality`]: mass gaps, scaled gap ratios, pseudo-critical points and
//!   the weighted extrapolation to the continuum.
//! - [`vqe_engine`]: a small statevector simulator, the three-qubit ansatz
//!   circuits and a simplex optimizer.
//! - [`noise_mitigation`]: a synthetic device noise model, readout
//!   calibration, CNOT folding and Richardson extrapolation.

pub mod criticality;
pub mod hamiltonian;
pub mod lattice_basis;
pub mod noise_mitigation;
pub mod seeds;
pub mod vqe_engine;

pub use nalgebra::{Complex, DMatrix, DVector};

/// Complex amplitude type used throughout.
pub type C64 = Complex<f64>;
