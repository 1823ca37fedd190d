//! A small statevector simulator, the three-qubit ansatz circuits, Pauli
//! energy measurement and the variational search for pseudo-critical points.

mod ansatz;
mod circuit;
mod measure;
mod optimizer;
mod pipeline;

use thiserror::Error;

use crate::criticality::CriticalityError;
use crate::hamiltonian::HamiltonianError;
use crate::lattice_basis::Parity;

pub use ansatz::{search_layout, AnsatzKind, LayoutSearch, RegisterLayout, ANSATZ_QUBITS};
pub use circuit::{apply_circuit, Angle, Circuit, Gate, Statevector, MAX_QUBITS};
pub use measure::{
    measure_energy, parity_statistics, pauli_decompose, sample_counts, EnergyEstimate, MeasurementMode,
    PauliDecomposition, PauliString, PauliTerm, Shots, COEFF_CUTOFF,
};
pub use optimizer::{vqe_minimize, vqe_minimize_with, Minimum, NelderMead, VqeResult, DEFAULT_BUDGET};
pub use pipeline::{
    extrapolate_scans, mass_grid, quantum_critical_sweep, scan_coupling, MassReference, quantum_pseudo_critical, r4_from_energies, r4_stderr, QuantumModel,
    QuantumRow, QuantumScan, QuantumSectors, VqeSetup, VqeTarget, TARGETS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VqeError {
    #[error("parameter theta{index} is unbound ({bound} angles given)")]
    UnboundParameter { index: usize, bound: usize },
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("register of {0} qubits is not supported")]
    TooManyQubits(usize),
    #[error("matrix dimension {0} is not a supported power of two")]
    BadDimension(usize),
    #[error("circuit parse error: {0}")]
    Parse(String),
    #[error("no ansatz for L = {l}, parity {parity}")]
    UnsupportedTarget { l: usize, parity: Parity },
    #[error("evaluation budget must be positive")]
    InvalidBudget,
    #[error("mass grid is empty")]
    EmptyGrid,
    #[error("no grid point gives a finite gap ratio")]
    NoFiniteRatio,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Criticality(#[from] CriticalityError),
}
