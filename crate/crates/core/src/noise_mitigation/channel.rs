//! Density-matrix simulation with depolarizing CNOTs and readout flips.

use nalgebra::DMatrix;
use rand::Rng;

use crate::vqe_engine::{sample_counts, Circuit, Gate, PauliString, MAX_QUBITS};
use crate::C64;

use super::MitigationError;

/// Synthetic device: two-qubit depolarizing after every CNOT and classical
/// bit flips at readout.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Depolarizing probability per CNOT.
    pub p2: f64,
    /// Per qubit `(p(0 -> 1), p(1 -> 0))`.
    pub ro_flip: Vec<(f64, f64)>,
    pub seed: u64,
}

/// Default CNOT depolarizing probability.
pub const DEFAULT_P2: f64 = 0.01;
/// Default readout flip probabilities `(p(0 -> 1), p(1 -> 0))`.
pub const DEFAULT_RO_FLIP: (f64, f64) = (0.02, 0.04);

impl NoiseModel {
    pub fn new(p2: f64, ro_flip: Vec<(f64, f64)>, seed: u64) -> Result<Self, MitigationError> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(p2) || ro_flip.iter().any(|&(a, b)| !ok(a) || !ok(b)) {
            return Err(MitigationError::InvalidProbability);
        }
        if ro_flip.is_empty() || ro_flip.len() > MAX_QUBITS {
            return Err(MitigationError::QubitMismatch {
                expected: MAX_QUBITS,
                found: ro_flip.len(),
            });
        }
        Ok(Self { p2, ro_flip, seed })
    }

    /// Same flip pair on every qubit.
    pub fn uniform(n_qubits: usize, p2: f64, flip: (f64, f64), seed: u64) -> Result<Self, MitigationError> {
        Self::new(p2, vec![flip; n_qubits], seed)
    }

    pub fn noiseless(n_qubits: usize) -> Self {
        Self {
            p2: 0.0,
            ro_flip: vec![(0.0, 0.0); n_qubits],
            seed: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.ro_flip.len()
    }

    /// Column-stochastic readout channel `A[observed, true]`.
    pub fn readout_matrix(&self) -> DMatrix<f64> {
        let n = self.n_qubits();
        let d = 1 << n;
        DMatrix::from_fn(d, d, |obs, truth| {
            (0..n)
                .map(|q| {
                    let (p01, p10) = self.ro_flip[q];
                    match ((truth >> q) & 1, (obs >> q) & 1) {
                        (0, 0) => 1.0 - p01,
                        (0, _) => p01,
                        (_, 0) => p10,
                        _ => 1.0 - p10,
                    }
                })
                .product()
        })
    }
}

/// Mixed state of a small register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        let mut rho = DMatrix::zeros(d, d);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        Self { n_qubits, rho }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re.max(0.0)).collect()
    }

    /// `rho -> U rho U^dagger` for a single-qubit `U` on `target`.
    pub fn apply_1q(&mut self, target: usize, u: [[C64; 2]; 2]) {
        let bit = 1 << target;
        let d = self.rho.nrows();
        for col in 0..d {
            for i in 0..d {
                if i & bit == 0 {
                    let (x, y) = (self.rho[(i, col)], self.rho[(i | bit, col)]);
                    self.rho[(i, col)] = u[0][0] * x + u[0][1] * y;
                    self.rho[(i | bit, col)] = u[1][0] * x + u[1][1] * y;
                }
            }
        }
        for row in 0..d {
            for j in 0..d {
                if j & bit == 0 {
                    let (x, y) = (self.rho[(row, j)], self.rho[(row, j | bit)]);
                    self.rho[(row, j)] = x * u[0][0].conj() + y * u[0][1].conj();
                    self.rho[(row, j | bit)] = x * u[1][0].conj() + y * u[1][1].conj();
                }
            }
        }
    }

    // Conjugation by a basis permutation.
    fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let d = self.rho.nrows();
        let old = self.rho.clone();
        for i in 0..d {
            for j in 0..d {
                self.rho[(f(i), f(j))] = old[(i, j)];
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate, angles: &[f64]) -> Result<(), MitigationError> {
        match *gate {
            Gate::Ry { target, angle } => {
                let a = angle.bind(angles)?;
                let (s, c) = (0.5 * a).sin_cos();
                let r = |v: f64| C64::new(v, 0.0);
                self.apply_1q(target, [[r(c), r(-s)], [r(s), r(c)]]);
            }
            Gate::X { target } => self.permute(|i| i ^ (1 << target)),
            Gate::Cx { control, target } => {
                self.permute(|i| if i & (1 << control) != 0 { i ^ (1 << target) } else { i })
            }
        }
        Ok(())
    }

    /// `(1 - p) rho + p (Tr_{a,b} rho) ⊗ I/4`, the uniform two-qubit Pauli channel.
    pub fn depolarize_pair(&mut self, a: usize, b: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let mask = (1 << a) | (1 << b);
        let d = self.rho.nrows();
        let old = self.rho.clone();
        for i in 0..d {
            for j in 0..d {
                let mixed = if i & mask == j & mask {
                    let (bi, bj) = (i & !mask, j & !mask);
                    [0, 1 << a, 1 << b, mask]
                        .iter()
                        .map(|&s| old[(bi | s, bj | s)])
                        .sum::<C64>()
                        * 0.25
                } else {
                    C64::new(0.0, 0.0)
                };
                self.rho[(i, j)] = old[(i, j)] * (1.0 - p) + mixed * p;
            }
        }
    }

    /// Measurement-basis change for a Pauli string, applied noiselessly.
    pub fn rotate_into_eigenbasis(&mut self, pauli: &PauliString) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hm = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
        let sdg = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, -1.0)]];
        for q in 0..self.n_qubits {
            let bit = 1 << q;
            if pauli.x_mask & bit != 0 {
                if pauli.z_mask & bit != 0 {
                    self.apply_1q(q, sdg);
                }
                self.apply_1q(q, hm);
            }
        }
    }
}

/// Final density matrix of `circuit` under the gate noise of `noise`.
pub fn evolve(circuit: &Circuit, angles: &[f64], noise: &NoiseModel) -> Result<DensityMatrix, MitigationError> {
    if noise.n_qubits() != circuit.n_qubits() {
        return Err(MitigationError::QubitMismatch {
            expected: circuit.n_qubits(),
            found: noise.n_qubits(),
        });
    }
    let mut rho = DensityMatrix::zero(circuit.n_qubits());
    for g in circuit.gates() {
        rho.apply_gate(g, angles)?;
        if let Gate::Cx { control, target } = *g {
            rho.depolarize_pair(control, target, noise.p2);
        }
    }
    Ok(rho)
}

/// Observed-outcome distribution for measuring `term` on `rho`,
/// including readout flips.
pub fn observed_distribution(rho: &DensityMatrix, term: &PauliString, noise: &NoiseModel) -> Vec<f64> {
    let mut r = rho.clone();
    r.rotate_into_eigenbasis(term);
    let p = nalgebra::DVector::from_vec(r.probabilities());
    (noise.readout_matrix() * p).as_slice().to_vec()
}

/// Counts from `shots` noisy measurements of `term` after `circuit`.
pub fn noisy_sample<R: Rng + ?Sized>(
    circuit: &Circuit,
    angles: &[f64],
    noise: &NoiseModel,
    shots: u64,
    term: &PauliString,
    rng: &mut R,
) -> Result<Vec<u64>, MitigationError> {
    if shots == 0 {
        return Err(MitigationError::NoShots);
    }
    let rho = evolve(circuit, angles, noise)?;
    Ok(sample_counts(&observed_distribution(&rho, term, noise), shots, rng))
}

/// Replaces every CNOT by `fold` consecutive copies.
pub fn fold_cnots(circuit: &Circuit, fold: usize) -> Result<Circuit, MitigationError> {
    if fold % 2 == 0 {
        return Err(MitigationError::EvenFold(fold));
    }
    let gates = circuit
        .gates()
        .iter()
        .flat_map(|g| match g {
            Gate::Cx { .. } => vec![*g; fold],
            _ => vec![*g],
        })
        .collect();
    Ok(Circuit::new(circuit.n_qubits(), gates)?)
}

/// A circuit with its CNOT-folded replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedCircuitSet {
    pub base: Circuit,
    pub replicas: Vec<(usize, Circuit)>,
}

/// The folding levels used for extrapolation.
pub const DEFAULT_FOLDS: [usize; 4] = [1, 3, 5, 7];

impl FoldedCircuitSet {
    pub fn new(base: &Circuit, folds: &[usize]) -> Result<Self, MitigationError> {
        let replicas = folds
            .iter()
            .map(|&f| Ok((f, fold_cnots(base, f)?)))
            .collect::<Result<_, MitigationError>>()?;
        Ok(Self {
            base: base.clone(),
            replicas,
        })
    }
}

/// Circuit preparing the computational basis state `index`.
pub fn basis_state_circuit(n_qubits: usize, index: usize) -> Circuit {
    let gates = (0..n_qubits)
        .filter(|q| index >> q & 1 == 1)
        .map(|q| Gate::X { target: q })
        .collect();
    Circuit::new(n_qubits, gates).expect("valid register")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vqe_engine::{apply_circuit, Angle};

    fn bell() -> Circuit {
        Circuit::new(
            2,
            vec![
                Gate::Ry {
                    target: 0,
                    angle: Angle::Const(std::f64::consts::FRAC_PI_2),
                },
                Gate::Cx { control: 0, target: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn noiseless_evolution_matches_statevector() {
        let c = bell();
        let rho = evolve(&c, &[], &NoiseModel::noiseless(2)).unwrap();
        let psi = apply_circuit(&c, &[]).unwrap();
        for (p, q) in rho.probabilities().iter().zip(psi.probabilities()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn full_depolarizing_gives_uniform_marginal() {
        let noise = NoiseModel::uniform(2, 1.0, (0.0, 0.0), 0).unwrap();
        let rho = evolve(&bell(), &[], &noise).unwrap();
        for p in rho.probabilities() {
            assert!((p - 0.25).abs() < 1e-14);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn readout_matrix_is_column_stochastic() {
        let noise = NoiseModel::new(0.0, vec![(0.02, 0.04), (0.1, 0.0), (0.3, 0.2)], 0).unwrap();
        let a = noise.readout_matrix();
        for c in 0..8 {
            assert!((a.column(c).sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn even_folds_are_rejected() {
        assert_eq!(fold_cnots(&bell(), 2), Err(MitigationError::EvenFold(2)));
        assert_eq!(fold_cnots(&bell(), 3).unwrap().cnot_count(), 3);
    }
}
