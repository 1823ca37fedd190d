//! Synthetic device noise, readout calibration and correction, CNOT
//! folding and Richardson zero-noise extrapolation.

mod channel;
mod extrapolate;
mod protocol;
mod readout;

use thiserror::Error;

use crate::vqe_engine::VqeError;

pub use channel::{
    basis_state_circuit, evolve, fold_cnots, noisy_sample, observed_distribution, DensityMatrix, FoldedCircuitSet,
    NoiseModel, DEFAULT_FOLDS, DEFAULT_P2, DEFAULT_RO_FLIP,
};
pub use extrapolate::{poly_extrapolate, richardson};
pub use protocol::{
    mitigate_energy, mixed_extrapolation, multi_run_protocol, noisy_energy, summarize_runs, Estimator, FoldEnergy,
    MitigationReport, MitigationTarget, PointRuns, Protocol, R4Estimate, RunSummary, REPORT_CSV_HEADER,
};
pub use readout::{
    calibrate_readout, correct_readout, project_to_simplex, CalibrationMatrix, CorrectedDistribution,
    CONDITION_LIMIT, STOCHASTIC_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MitigationError {
    #[error("probabilities must lie in [0, 1]")]
    InvalidProbability,
    #[error("expected {expected} qubits, found {found}")]
    QubitMismatch { expected: usize, found: usize },
    #[error("fold {0} is even; folds must be odd")]
    EvenFold(usize),
    #[error("need at least {needed} fold points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("fold {0} appears twice")]
    DuplicateFold(f64),
    #[error("no report for the unfolded circuit")]
    MissingBaseFold,
    #[error("calibration is singular (condition number {0:e})")]
    SingularCalibration(f64),
    #[error("calibration column {0} is not a probability distribution")]
    NotStochastic(usize),
    #[error("distribution of length {0} does not match the register")]
    BadDistribution(usize),
    #[error("shot count must be positive")]
    NoShots,
    #[error("{runs} runs cannot be split into groups of {group_size}")]
    BadGrouping { runs: usize, group_size: usize },
    #[error(transparent)]
    Circuit(#[from] VqeError),
}
