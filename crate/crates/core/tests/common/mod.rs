//! Helpers shared by the integration tests.

#![allow(dead_code)]

pub mod position_space;

use schwinger_core::criticality::eigenvalues;
use schwinger_core::hamiltonian::SectorOperator;
use schwinger_core::lattice_basis::Parity;

/// Two lowest eigenvalues of the unsplit momentum-space sector.
pub fn momentum_lowest(l: usize, k: i32, n_max: i32, e: f64, m: f64) -> Vec<f64> {
    let op = SectorOperator::for_sector(l, k, n_max, Parity::Unsplit).expect("sector builds");
    eigenvalues(&op.matrix(e, m), 2).expect("two levels")
}
