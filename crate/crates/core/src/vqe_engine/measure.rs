//! Pauli decomposition of register Hamiltonians and energy estimation.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::C64;

use super::circuit::{Statevector, MAX_QUBITS};
use super::VqeError;

/// Coefficients below this magnitude are dropped from a decomposition.
pub const COEFF_CUTOFF: f64 = 1e-15;

/// A tensor product of single-qubit Paulis.
///
/// Bit `q` of `x_mask` is set for `X` or `Y` on qubit `q`, bit `q` of
/// `z_mask` for `Z` or `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x_mask: usize,
    pub z_mask: usize,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Qubits on which the string acts nontrivially.
    pub fn support(&self) -> usize {
        self.x_mask | self.z_mask
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// `P|j> = phase(j) |j ^ x_mask>`.
    fn phase(&self, j: usize) -> C64 {
        let sign = if (j & self.z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let iy = match self.y_count() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        iy * sign
    }

    /// Dense matrix of the string.
    pub fn matrix(&self) -> DMatrix<C64> {
        let d = 1 << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            m[(j ^ self.x_mask, j)] = self.phase(j);
        }
        m
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, psi: &Statevector) -> f64 {
        let a = psi.amplitudes();
        (0..a.len())
            .map(|j| a[j ^ self.x_mask].conj() * self.phase(j) * a[j])
            .sum::<C64>()
            .re
    }

    /// Rotates `psi` so that measuring in the computational basis measures
    /// this string: `H` on `X` qubits, `S^dagger` then `H` on `Y` qubits.
    pub fn rotate_into_eigenbasis(&self, psi: &mut Statevector) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hm = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
        let sdg = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, -1.0)]];
        for q in 0..self.n_qubits {
            let bit = 1 << q;
            if self.x_mask & bit != 0 {
                if self.z_mask & bit != 0 {
                    psi.apply_1q(q, sdg);
                }
                psi.apply_1q(q, hm);
            }
        }
    }

    /// Eigenvalue `±1` of the string for a measured bitstring in its eigenbasis.
    pub fn outcome_sign(&self, bits: usize) -> f64 {
        if (bits & self.support()).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Written most significant qubit first, e.g. `IXZ` has `Z` on qubit 0.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits).rev() {
            let bit = 1 << q;
            let c = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// `H = sum_P c_P P` over the strings with nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
    /// The decomposed matrix, kept for exact expectation values.
    pub matrix: DMatrix<f64>,
}

impl PauliDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = 1 << self.n_qubits;
        let mut m = DMatrix::<C64>::zeros(d, d);
        for t in &self.terms {
            m += t.pauli.matrix() * C64::new(t.coeff, 0.0);
        }
        m.map(|z| z.re)
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.pauli.support() == 0)
            .map_or(0.0, |t| t.coeff)
    }

    /// `<psi|H|psi>` from the dense matrix.
    pub fn exact_expectation(&self, psi: &Statevector) -> f64 {
        let a = psi.amplitudes();
        let mut acc = 0.0;
        for i in 0..a.len() {
            for j in 0..a.len() {
                acc += (a[i].conj() * a[j]).re * self.matrix[(i, j)];
            }
        }
        acc
    }
}

/// Decomposes a real symmetric `2^k x 2^k` matrix into Pauli strings,
/// `c_P = Tr(P H) / 2^k`.
pub fn pauli_decompose(h: &DMatrix<f64>) -> Result<PauliDecomposition, VqeError> {
    let d = h.nrows();
    if h.ncols() != d || d < 2 || !d.is_power_of_two() || d > 1 << MAX_QUBITS {
        return Err(VqeError::BadDimension(d));
    }
    let n = d.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for x_mask in 0..d {
        for z_mask in 0..d {
            let p = PauliString { n_qubits: n, x_mask, z_mask };
            let tr: C64 = (0..d).map(|k| p.phase(k) * h[(k, k ^ x_mask)]).sum();
            let coeff = tr.re / d as f64;
            if coeff.abs() > COEFF_CUTOFF {
                terms.push(PauliTerm { coeff, pauli: p });
            }
        }
    }
    Ok(PauliDecomposition {
        n_qubits: n,
        terms,
        matrix: h.clone(),
    })
}

/// Number of measurement repetitions per Pauli term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    PerTerm(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    Exact,
    Sampled,
}

/// An energy with its statistical error.
///
/// `stderr` is zero in exact mode. In sampled mode it vanishes only when
/// every measured term has a deterministic outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Shots per term, zero in exact mode.
    pub shots: u64,
    pub mode: MeasurementMode,
}

impl EnergyEstimate {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            stderr: 0.0,
            shots: 0,
            mode: MeasurementMode::Exact,
        }
    }
}

/// Multinomial sample of `shots` outcomes from `probs`, drawn as a chain of
/// conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut left = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p.max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).map_or(0, |b| b.sample(rng));
        counts[i] = k;
        left -= k;
        mass -= p.max(0.0);
    }
    counts
}

/// Mean and standard error of one `±1` observable from measured counts.
pub fn parity_statistics(counts: &[u64], pauli: &PauliString) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let s: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| pauli.outcome_sign(b) * c as f64)
        .sum();
    let nf = n as f64;
    let mean = s / nf;
    let var = if n > 1 { (1.0 - mean * mean).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
    (mean, (var / nf).sqrt())
}

/// `<psi|H|psi>`, exactly or from `shots` samples of every Pauli term.
///
/// Each nonidentity term is measured independently in its own eigenbasis.
pub fn measure_energy<R: Rng + ?Sized>(
    psi: &Statevector,
    decomp: &PauliDecomposition,
    shots: Shots,
    rng: &mut R,
) -> EnergyEstimate {
    let n = match shots {
        Shots::Exact | Shots::PerTerm(0) => return EnergyEstimate::exact(decomp.exact_expectation(psi)),
        Shots::PerTerm(n) => n,
    };
    let mut mean = 0.0;
    let mut var = 0.0;
    for t in &decomp.terms {
        if t.pauli.support() == 0 {
            mean += t.coeff;
            continue;
        }
        let mut rotated = psi.clone();
        t.pauli.rotate_into_eigenbasis(&mut rotated);
        let counts = sample_counts(&rotated.probabilities(), n, rng);
        let (m, se) = parity_statistics(&counts, &t.pauli);
        mean += t.coeff * m;
        var += (t.coeff * se).powi(2);
    }
    EnergyEstimate {
        mean,
        stderr: var.sqrt(),
        shots: n,
        mode: MeasurementMode::Sampled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_decomposes_to_single_term() {
        let d = pauli_decompose(&DMatrix::identity(8, 8)).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].pauli.to_string(), "III");
        assert!((d.terms[0].coeff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_sign_pattern_gives_z_strings() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| if i & 1 == 0 { 1.0 } else { -1.0 }));
        let d = pauli_decompose(&h).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].pauli.to_string(), "IZ");
    }

    #[test]
    fn y_strings_match_their_matrices() {
        let p = PauliString {
            n_qubits: 1,
            x_mask: 1,
            z_mask: 1,
        };
        let m = p.matrix();
        assert_eq!(m[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(pauli_decompose(&DMatrix::zeros(6, 6)), Err(VqeError::BadDimension(6))));
    }

    #[test]
    fn multinomial_counts_sum_to_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_counts(&[0.1, 0.0, 0.6, 0.3], 1000, &mut rng);
        assert_eq!(c.iter().sum::<u64>(), 1000);
        assert_eq!(c[1], 0);
    }
}
