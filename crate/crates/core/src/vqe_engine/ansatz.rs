//! The three-qubit ansatz circuits and the signed register layouts that map
//! truncated basis states onto computational basis states.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice_basis::Parity;

use super::circuit::{Angle, Circuit, Gate};
use super::VqeError;

/// Qubits of every ansatz register.
pub const ANSATZ_QUBITS: usize = 3;

/// Which ansatz prepares the trial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzKind {
    /// `L = 3`, either parity: a six-dimensional real trial space.
    L3,
    /// `L = 4` even sector: four real amplitudes times `|+>` on qubit 0.
    L4Ground,
    /// `L = 4` odd sector: a product of a qubit-2 state and a qubit-(1,0) state.
    L4Excited,
}

impl AnsatzKind {
    pub fn for_target(l: usize, parity: Parity) -> Result<Self, VqeError> {
        match (l, parity) {
            (3, Parity::Even | Parity::Odd) => Ok(AnsatzKind::L3),
            (4, Parity::Even) => Ok(AnsatzKind::L4Ground),
            (4, Parity::Odd) => Ok(AnsatzKind::L4Excited),
            _ => Err(VqeError::UnsupportedTarget { l, parity }),
        }
    }

    /// Number of truncated basis states the ansatz is built for.
    pub fn truncation_dim(&self) -> usize {
        match self {
            AnsatzKind::L3 => 6,
            _ => 8,
        }
    }

    pub fn circuit(&self) -> Circuit {
        let ry = |target, angle| Gate::Ry { target, angle };
        let cx = |control, target| Gate::Cx { control, target };
        let (t0, t1, t2) = (Angle::param(0), Angle::param(1), Angle::param(2));
        let half_pi = Angle::Const(FRAC_PI_2);
        let gates = match self {
            AnsatzKind::L3 => vec![
                ry(0, half_pi),
                ry(0, t2),
                ry(1, t0),
                ry(2, t1),
                Gate::X { target: 1 },
                cx(1, 2),
                Gate::X { target: 1 },
                ry(2, Angle::neg_param(1)),
                cx(2, 0),
                ry(0, Angle::neg_param(2)),
            ],
            AnsatzKind::L4Ground => vec![
                ry(0, half_pi),
                ry(2, t1),
                ry(1, t0),
                ry(1, t2),
                cx(2, 1),
                ry(1, Angle::neg_param(2)),
            ],
            AnsatzKind::L4Excited => vec![
                ry(2, t1),
                ry(1, t0),
                ry(0, half_pi),
                ry(0, t2),
                cx(1, 0),
                ry(0, Angle::neg_param(2)),
            ],
        };
        Circuit::new(ANSATZ_QUBITS, gates).expect("static ansatz is valid")
    }

    /// Register indices the ansatz can populate.
    pub fn support(&self) -> Vec<usize> {
        match self {
            AnsatzKind::L3 => (0..6).collect(),
            _ => (0..8).collect(),
        }
    }

    /// Orthonormal columns spanning the reachable states of a linear ansatz.
    pub fn linear_span(&self) -> Option<DMatrix<f64>> {
        let pair = |m: &mut DMatrix<f64>, col: usize, a: usize, b: usize| {
            m[(a, col)] = FRAC_1_SQRT_2;
            m[(b, col)] = FRAC_1_SQRT_2;
        };
        match self {
            AnsatzKind::L3 => {
                let mut v = DMatrix::zeros(8, 4);
                pair(&mut v, 0, 0, 1);
                pair(&mut v, 1, 2, 3);
                v[(4, 2)] = 1.0;
                v[(5, 3)] = 1.0;
                Some(v)
            }
            AnsatzKind::L4Ground => {
                let mut v = DMatrix::zeros(8, 4);
                for k in 0..4 {
                    pair(&mut v, k, 2 * k, 2 * k + 1);
                }
                Some(v)
            }
            AnsatzKind::L4Excited => None,
        }
    }

    /// Lowest energy of `h` (register basis) over the ansatz manifold.
    ///
    /// Exact for the linear ansätze. The product ansatz is minimized by
    /// alternating eigensolves from two starting points.
    pub fn manifold_min(&self, h: &DMatrix<f64>) -> f64 {
        if let Some(v) = self.linear_span() {
            return SymmetricEigen::new(v.transpose() * h * &v).eigenvalues.min();
        }
        product_min(h)
    }
}

// Columns for the qubit-(1,0) factor of the excited ansatz when qubit 2 is `u`.
fn product_block(u: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(8, 3);
    b[(4 * u, 0)] = FRAC_1_SQRT_2;
    b[(4 * u + 1, 0)] = FRAC_1_SQRT_2;
    b[(4 * u + 2, 1)] = 1.0;
    b[(4 * u + 3, 2)] = 1.0;
    b
}

fn lowest_pair(m: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m);
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

fn product_min(h: &DMatrix<f64>) -> f64 {
    let blocks = [product_block(0), product_block(1)];
    let mut best = f64::INFINITY;
    for start in [[1.0, 0.3], [0.3, 1.0], [1.0, -0.3]] {
        let mut u = DVector::from_row_slice(&start).normalize();
        let mut energy = f64::INFINITY;
        for _ in 0..500 {
            let vw = &blocks[0] * u[0] + &blocks[1] * u[1];
            let (_, w) = lowest_pair(vw.transpose() * h * &vw);
            let vu = DMatrix::from_columns(&[&blocks[0] * &w, &blocks[1] * &w]);
            let (eu, nu) = lowest_pair(vu.transpose() * h * &vu);
            u = nu;
            let done = (energy - eu).abs() < 1e-15;
            energy = eu;
            if done {
                break;
            }
        }
        best = best.min(energy);
    }
    best
}

/// Signed placement of truncated basis states on register indices.
///
/// Truncated state `i` sits at register index `slots[i]` with sign
/// `signs[i]`. Register indices not listed are padding.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterLayout {
    pub slots: Vec<usize>,
    pub signs: Vec<f64>,
    pub register_dim: usize,
}

impl RegisterLayout {
    pub fn identity(dim: usize, register_dim: usize) -> Self {
        Self {
            slots: (0..dim).collect(),
            signs: vec![1.0; dim],
            register_dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    /// Embeds a truncated matrix into the register, with `pad` on the
    /// diagonal of unused indices.
    pub fn embed(&self, h: &DMatrix<f64>, pad: f64) -> DMatrix<f64> {
        let mut r = DMatrix::zeros(self.register_dim, self.register_dim);
        for k in 0..self.register_dim {
            r[(k, k)] = pad;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                r[(self.slots[i], self.slots[j])] = self.signs[i] * self.signs[j] * h[(i, j)];
            }
        }
        r
    }

    /// Maps a register vector back to truncated-state amplitudes.
    pub fn pull_back(&self, register: &[f64]) -> Vec<f64> {
        self.slots
            .iter()
            .zip(&self.signs)
            .map(|(&s, &g)| g * register[s])
            .collect()
    }

    fn energy(&self, ansatz: AnsatzKind, h: &DMatrix<f64>) -> f64 {
        ansatz.manifold_min(&self.embed(h, 0.0))
    }
}

/// One line per truncated state: `state -> index (sign)`.
impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, g)) in self.slots.iter().zip(&self.signs).enumerate() {
            writeln!(f, "{i} -> {s:03b} ({})", if *g > 0.0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Search effort for [`search_layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutSearch {
    pub restarts: usize,
}

impl Default for LayoutSearch {
    fn default() -> Self {
        Self { restarts: 100 }
    }
}

/// Finds the signed layout whose ansatz manifold reaches the lowest energy
/// of the truncated matrix `h`.
///
/// Hill climbing over transpositions of register slots and sign flips,
/// started from the contribution ordering and from random layouts. Padding
/// stays on the register indices outside the ansatz support.
pub fn search_layout<R: Rng + ?Sized>(
    ansatz: AnsatzKind,
    h: &DMatrix<f64>,
    search: LayoutSearch,
    rng: &mut R,
) -> Result<(RegisterLayout, f64), VqeError> {
    let dim = ansatz.truncation_dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(VqeError::BadDimension(h.nrows()));
    }
    let support = ansatz.support();
    let register_dim = 1 << ANSATZ_QUBITS;
    let mut best = RegisterLayout::identity(dim, register_dim);
    let mut best_e = climb(&mut best, ansatz, h);
    for _ in 0..search.restarts {
        let mut slots = support.clone();
        slots.shuffle(rng);
        let signs = (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut cand = RegisterLayout {
            slots,
            signs,
            register_dim,
        };
        let e = climb(&mut cand, ansatz, h);
        if e < best_e - 1e-13 {
            best = cand;
            best_e = e;
        }
    }
    canonicalize_signs(&mut best, ansatz, h, best_e);
    Ok((best, best_e))
}

fn climb(layout: &mut RegisterLayout, ansatz: AnsatzKind, h: &DMatrix<f64>) -> f64 {
    let mut current = layout.energy(ansatz, h);
    let n = layout.dim();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                layout.slots.swap(i, j);
                let e = layout.energy(ansatz, h);
                if e < current - 1e-13 {
                    current = e;
                    improved = true;
                } else {
                    layout.slots.swap(i, j);
                }
            }
            layout.signs[i] = -layout.signs[i];
            let e = layout.energy(ansatz, h);
            if e < current - 1e-13 {
                current = e;
                improved = true;
            } else {
                layout.signs[i] = -layout.signs[i];
            }
        }
        if !improved {
            return current;
        }
    }
}

// Makes signs positive wherever flipping does not change the manifold minimum.
fn canonicalize_signs(layout: &mut RegisterLayout, ansatz: AnsatzKind, h: &DMatrix<f64>, e: f64) {
    for i in 0..layout.dim() {
        if layout.signs[i] < 0.0 {
            layout.signs[i] = 1.0;
            if (layout.energy(ansatz, h) - e).abs() > 1e-12 {
                layout.signs[i] = -1.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vqe_engine::circuit::apply_circuit;

    fn in_span(v: &DMatrix<f64>, x: &[f64]) -> f64 {
        let x = DVector::from_row_slice(x);
        let proj = v * (v.transpose() * &x);
        (x - proj).norm()
    }

    #[test]
    fn linear_ansatz_states_lie_in_their_span() {
        for kind in [AnsatzKind::L3, AnsatzKind::L4Ground] {
            let span = kind.linear_span().unwrap();
            for angles in [[0.3, -1.2, 2.0], [1.7, 0.4, -0.9]] {
                let psi = apply_circuit(&kind.circuit(), &angles).unwrap();
                assert!(in_span(&span, &psi.real_amplitudes()) < 1e-12);
            }
        }
    }

    #[test]
    fn l3_never_touches_padding() {
        let psi = apply_circuit(&AnsatzKind::L3.circuit(), &[0.9, 2.1, -0.4]).unwrap();
        assert!(psi.amplitudes()[6].norm() < 1e-15 && psi.amplitudes()[7].norm() < 1e-15);
    }

    #[test]
    fn excited_ansatz_is_a_product_state() {
        let psi = apply_circuit(&AnsatzKind::L4Excited.circuit(), &[0.7, 1.1, -0.3]).unwrap();
        let a = psi.real_amplitudes();
        // rows: qubit 2, columns: qubits (1, 0)
        let m = DMatrix::from_fn(2, 4, |u, w| a[4 * u + w]);
        let sv = m.singular_values();
        assert!(sv[1] < 1e-12);
        assert!((a[0] - a[1]).abs() < 1e-12 && (a[4] - a[5]).abs() < 1e-12);
    }

    #[test]
    fn product_min_bounds_the_ground_energy() {
        let h = DMatrix::from_fn(8, 8, |i, j| ((i * 7 + j * 7 + i * j) % 5) as f64 - 2.0);
        let h = (&h + h.transpose()) * 0.5;
        let ground = SymmetricEigen::new(h.clone()).eigenvalues.min();
        assert!(AnsatzKind::L4Excited.manifold_min(&h) >= ground - 1e-12);
    }
}
