//! Truncated VQE targets at θ = π and the quantum pseudo-critical search.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::criticality::{
    extrapolate_critical, CriticalContext, CriticalPointEstimate, PseudoCriticalPoint, ScanWindow,
    MIN_DENOMINATOR_GAP, REFERENCE_N_MAX,
};
use crate::hamiltonian::{truncate, SectorOperator, TruncatedHamiltonian};
use crate::lattice_basis::Parity;
use crate::seeds;

use super::ansatz::{search_layout, AnsatzKind, LayoutSearch, RegisterLayout};
use super::circuit::Circuit;
use super::measure::{pauli_decompose, EnergyEstimate, PauliDecomposition, Shots};
use super::optimizer::{vqe_minimize_with, NelderMead, DEFAULT_BUDGET};
use super::VqeError;

/// Mass at which the truncated basis states and layouts are selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassReference {
    /// `m = ratio * e`.
    Ratio(f64),
    /// The exact `L = 4` pseudo-critical mass at the reference cutoff.
    PseudoCritical,
}

/// Knobs shared by every target of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeSetup {
    pub reference: MassReference,
    /// Gauge cutoff of the parent sectors; `None` means `2L`.
    pub n_max: Option<i32>,
    /// Padding sits at `lambda_max + pad_factor * (lambda_max - lambda_min)`.
    pub pad_factor: f64,
    pub layout: LayoutSearch,
    /// Evaluations per minimization.
    pub budget: usize,
    /// Extra random starts per exact-mode minimization.
    pub restarts: usize,
    pub optimizer: NelderMead,
}

impl Default for VqeSetup {
    fn default() -> Self {
        Self {
            reference: MassReference::PseudoCritical,
            n_max: None,
            pad_factor: 1.0,
            layout: LayoutSearch::default(),
            budget: DEFAULT_BUDGET,
            restarts: 2,
            optimizer: NelderMead::default(),
        }
    }
}

fn extremes(h: &DMatrix<f64>) -> (f64, f64) {
    let ev = SymmetricEigen::new(h.clone()).eigenvalues;
    (ev.min(), ev.max())
}

/// One parity sector of one lattice, truncated and laid out on three qubits.
#[derive(Debug, Clone)]
pub struct VqeTarget {
    pub l: usize,
    pub parity: Parity,
    pub e: f64,
    pub ansatz: AnsatzKind,
    pub operator: Arc<SectorOperator>,
    pub truncation: TruncatedHamiltonian,
    pub layout: RegisterLayout,
    pub pad_factor: f64,
    /// Manifold minimum at the reference point after the layout search.
    pub reference_energy: f64,
}

impl VqeTarget {
    pub fn prepare<R: Rng + ?Sized>(
        operator: Arc<SectorOperator>,
        e: f64,
        m_ref: f64,
        setup: &VqeSetup,
        rng: &mut R,
    ) -> Result<Self, VqeError> {
        let l = operator.basis.params.l;
        let parity = operator.basis.parity;
        let ansatz = AnsatzKind::for_target(l, parity)?;
        let truncation = truncate(&operator, ansatz.truncation_dim(), (e, m_ref))?;
        let (layout, reference_energy) = search_layout(ansatz, &truncation.entries, setup.layout, rng)?;
        Ok(Self {
            l,
            parity,
            e,
            ansatz,
            operator,
            truncation,
            layout,
            pad_factor: setup.pad_factor,
            reference_energy,
        })
    }

    pub fn circuit(&self) -> Circuit {
        self.ansatz.circuit()
    }

    pub fn truncated_matrix(&self, m: f64) -> DMatrix<f64> {
        self.truncation.restrict(&self.operator.matrix(self.e, m))
    }

    /// Lowest eigenvalue of the truncated sector Hamiltonian.
    pub fn truncated_ground(&self, m: f64) -> f64 {
        extremes(&self.truncated_matrix(m)).0
    }

    /// Register-basis Hamiltonian, padded to eight dimensions if needed.
    pub fn register_matrix(&self, m: f64) -> DMatrix<f64> {
        let h = self.truncated_matrix(m);
        let (lo, hi) = extremes(&h);
        self.layout.embed(&h, hi + self.pad_factor * (hi - lo))
    }

    pub fn decomposition(&self, m: f64) -> Result<PauliDecomposition, VqeError> {
        pauli_decompose(&self.register_matrix(m))
    }

    /// Lowest energy reachable by the ansatz at mass `m`.
    pub fn manifold_min(&self, m: f64) -> f64 {
        self.ansatz.manifold_min(&self.register_matrix(m))
    }
}

/// Target order inside a [`QuantumModel`].
pub const TARGETS: [(usize, Parity); 4] = [(3, Parity::Even), (3, Parity::Odd), (4, Parity::Even), (4, Parity::Odd)];

/// Parent θ = π sector operators of `L = 3` and `L = 4`, shared across couplings.
#[derive(Debug, Clone)]
pub struct QuantumSectors {
    pub operators: [Arc<SectorOperator>; 4],
    critical: Option<CriticalContext>,
}

impl QuantumSectors {
    /// `reference` decides whether the exact `L = 4` crossing is needed.
    pub fn new(n_max: Option<i32>, reference: MassReference) -> Result<Self, VqeError> {
        let build = |(l, p): (usize, Parity)| -> Result<Arc<SectorOperator>, VqeError> {
            let cut = n_max.unwrap_or(2 * l as i32);
            Ok(Arc::new(SectorOperator::for_sector(l, l as i32, cut, p)?))
        };
        Ok(Self {
            operators: [build(TARGETS[0])?, build(TARGETS[1])?, build(TARGETS[2])?, build(TARGETS[3])?],
            critical: match reference {
                MassReference::PseudoCritical => Some(CriticalContext::new(4, REFERENCE_N_MAX)?),
                MassReference::Ratio(_) => None,
            },
        })
    }

    /// Reference mass for coupling `e`.
    pub fn reference_mass(&self, e: f64, reference: MassReference) -> Result<f64, VqeError> {
        match reference {
            MassReference::Ratio(r) => Ok(r * e),
            MassReference::PseudoCritical => {
                let ctx = match &self.critical {
                    Some(c) => c.clone(),
                    None => CriticalContext::new(4, REFERENCE_N_MAX)?,
                };
                Ok(ctx.upper_point(e, &ScanWindow::default())?)
            }
        }
    }

    /// Targets for coupling `e`; layout searches draw from `stream(seed, [t])`.
    pub fn model(&self, e: f64, setup: &VqeSetup, seed: u64) -> Result<QuantumModel, VqeError> {
        let m_ref = self.reference_mass(e, setup.reference)?;
        let mut targets = Vec::with_capacity(4);
        for (t, op) in self.operators.iter().enumerate() {
            let mut rng = seeds::stream(seed, &[t as u64]);
            targets.push(VqeTarget::prepare(op.clone(), e, m_ref, setup, &mut rng)?);
        }
        Ok(QuantumModel { e, m_ref, targets })
    }
}

/// The four targets entering `R_4` at one coupling.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    pub e: f64,
    pub m_ref: f64,
    pub targets: Vec<VqeTarget>,
}

/// Scaled gap ratio `R_4 = 4 Δ_4 / (3 Δ_3)` from the four sector energies.
pub fn r4_from_energies(e: &[f64; 4]) -> f64 {
    let g3 = e[1] - e[0];
    let g4 = e[3] - e[2];
    if g3.abs() < MIN_DENOMINATOR_GAP {
        return f64::NAN;
    }
    4.0 * g4 / (3.0 * g3)
}

/// First-order standard error of `R_4` for independent energy errors.
pub fn r4_stderr(e: &[f64; 4], s: &[f64; 4]) -> f64 {
    let g3 = e[1] - e[0];
    let g4 = e[3] - e[2];
    let r = 4.0 * g4 / (3.0 * g3);
    let dg4 = (s[2] * s[2] + s[3] * s[3]).sqrt();
    let dg3 = (s[0] * s[0] + s[1] * s[1]).sqrt();
    ((4.0 * dg4 / (3.0 * g3)).powi(2) + (r * dg3 / g3).powi(2)).sqrt()
}

/// Results of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRow {
    pub m: f64,
    /// Exact-mode VQE energies, [`TARGETS`] order.
    pub exact: [f64; 4],
    /// Optimal exact-mode angles.
    pub exact_angles: [Vec<f64>; 4],
    /// Energies used for the ratio (exact or sampled).
    pub energies: [EnergyEstimate; 4],
    pub angles: [Vec<f64>; 4],
    /// Lowest eigenvalues of the truncated sector Hamiltonians.
    pub truncated: [f64; 4],
    /// Ansatz-manifold minima.
    pub manifold: [f64; 4],
    pub r4: f64,
    pub r4_stderr: f64,
    /// Set when any minimization ran out of budget.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumScan {
    pub point: PseudoCriticalPoint,
    pub rows: Vec<QuantumRow>,
    /// Index of the selected row.
    pub selected: usize,
}

impl QuantumScan {
    /// Largest `E_vqe - E_truncated` over the grid, per target.
    pub fn truncation_reach(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for r in &self.rows {
            for t in 0..4 {
                out[t] = f64::max(out[t], r.exact[t] - r.truncated[t]);
            }
        }
        out
    }

    /// Largest `|E_vqe - E_manifold|` over the grid, per target.
    pub fn manifold_reach(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for r in &self.rows {
            for t in 0..4 {
                out[t] = f64::max(out[t], (r.exact[t] - r.manifold[t]).abs());
            }
        }
        out
    }
}

/// The mass grid `lo, lo + step, ...` up to `hi` inclusive.
pub fn mass_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, VqeError> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(VqeError::EmptyGrid);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Locates the grid mass whose VQE ratio `R_4` lies closest to one.
///
/// Exact mode sweeps the grid with warm starts; `Shots::PerTerm` then reruns
/// every point with sampled energies, starting from the exact optimum.
/// Random streams are `stream(seed, [target, grid index])`.
pub fn quantum_pseudo_critical(
    model: &QuantumModel,
    grid: &[f64],
    shots: Shots,
    setup: &VqeSetup,
    seed: u64,
) -> Result<QuantumScan, VqeError> {
    if grid.is_empty() {
        return Err(VqeError::EmptyGrid);
    }
    if setup.budget == 0 {
        return Err(VqeError::InvalidBudget);
    }
    let mut warm: Vec<Vec<f64>> = vec![vec![0.0; 3]; 4];
    let mut rows = Vec::with_capacity(grid.len());
    for (gi, &m) in grid.iter().enumerate() {
        let mut exact = [0.0; 4];
        let mut exact_angles: [Vec<f64>; 4] = Default::default();
        let mut energies = [EnergyEstimate::exact(0.0); 4];
        let mut angles: [Vec<f64>; 4] = Default::default();
        let mut truncated = [0.0; 4];
        let mut manifold = [0.0; 4];
        let mut exhausted = false;
        for (t, target) in model.targets.iter().enumerate() {
            let decomp = target.decomposition(m)?;
            let circuit = target.circuit();
            let mut rng = seeds::stream(seed, &[t as u64, gi as u64, 0]);
            let mut starts = vec![warm[t].clone()];
            for _ in 0..setup.restarts {
                starts.push((0..3).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect());
            }
            let mut best: Option<super::optimizer::VqeResult> = None;
            for s in &starts {
                let r = vqe_minimize_with(&setup.optimizer, &circuit, &decomp, s, setup.budget, Shots::Exact, &mut rng)?;
                if best.as_ref().map_or(true, |b| r.energy.mean < b.energy.mean) {
                    best = Some(r);
                }
            }
            let best = best.expect("at least one start");
            exhausted |= best.budget_exhausted;
            warm[t] = best.angles.clone();
            exact[t] = best.energy.mean;
            exact_angles[t] = best.angles.clone();
            truncated[t] = target.truncated_ground(m);
            manifold[t] = target.ansatz.manifold_min(&decomp.matrix);
            match shots {
                Shots::Exact | Shots::PerTerm(0) => {
                    energies[t] = best.energy;
                    angles[t] = best.angles;
                }
                Shots::PerTerm(_) => {
                    let mut srng = seeds::stream(seed, &[t as u64, gi as u64, 1]);
                    let r = vqe_minimize_with(
                        &setup.optimizer,
                        &circuit,
                        &decomp,
                        &best.angles,
                        setup.budget,
                        shots,
                        &mut srng,
                    )?;
                    exhausted |= r.budget_exhausted;
                    energies[t] = r.energy;
                    angles[t] = r.angles;
                }
            }
        }
        let means = energies.map(|x| x.mean);
        let errs = energies.map(|x| x.stderr);
        rows.push(QuantumRow {
            m,
            exact,
            exact_angles,
            energies,
            angles,
            truncated,
            manifold,
            r4: r4_from_energies(&means),
            r4_stderr: r4_stderr(&means, &errs),
            budget_exhausted: exhausted,
        });
    }
    let selected = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.r4.is_finite())
        .min_by(|a, b| (a.1.r4 - 1.0).abs().total_cmp(&(b.1.r4 - 1.0).abs()))
        .map(|(i, _)| i)
        .ok_or(VqeError::NoFiniteRatio)?;
    Ok(QuantumScan {
        point: PseudoCriticalPoint {
            l: 4,
            e: model.e,
            m_star: rows[selected].m,
            sigma: 0.0,
        },
        rows,
        selected,
    })
}

/// Scan of the `index`-th coupling of a sweep seeded with `seed`.
pub fn scan_coupling(
    sectors: &QuantumSectors,
    index: usize,
    e: f64,
    grid: &[f64],
    shots: Shots,
    setup: &VqeSetup,
    seed: u64,
) -> Result<QuantumScan, VqeError> {
    let model = sectors.model(e, setup, seeds::derive_seed(seed, &[index as u64, 0]))?;
    quantum_pseudo_critical(&model, grid, shots, setup, seeds::derive_seed(seed, &[index as u64, 1]))
}

/// Pseudo-critical points for each coupling and their unweighted
/// extrapolation to `e = 0`. `grid(e)` gives the mass grid per coupling.
pub fn quantum_critical_sweep<G: Fn(f64) -> Vec<f64>>(
    sectors: &QuantumSectors,
    couplings: &[f64],
    grid: G,
    shots: Shots,
    setup: &VqeSetup,
    seed: u64,
) -> Result<(Vec<QuantumScan>, CriticalPointEstimate), VqeError> {
    let scans = couplings
        .iter()
        .enumerate()
        .map(|(i, &e)| scan_coupling(sectors, i, e, &grid(e), shots, setup, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = extrapolate_scans(&scans)?;
    Ok((scans, fit))
}

/// Unweighted regression of the scans' `m*/e` against `e`.
pub fn extrapolate_scans(scans: &[QuantumScan]) -> Result<CriticalPointEstimate, VqeError> {
    let points: Vec<PseudoCriticalPoint> = scans.iter().map(|s| s.point).collect();
    Ok(extrapolate_critical(&points)?)
}
