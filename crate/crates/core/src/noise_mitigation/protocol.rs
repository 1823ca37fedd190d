//! Per-run mitigation reports, the grouped multi-run protocol and the mixed
//! extrapolation of `R_4`.

use rand::Rng;

use crate::seeds;
use crate::vqe_engine::{
    parity_statistics, r4_from_energies, r4_stderr, Circuit, EnergyEstimate, MeasurementMode, PauliDecomposition,
};

use super::channel::{evolve, fold_cnots, observed_distribution, NoiseModel, DEFAULT_FOLDS};
use super::extrapolate::{poly_extrapolate, richardson};
use super::readout::{calibrate_readout, correct_readout, CalibrationMatrix};
use super::MitigationError;

/// Raw and readout-corrected energies at one folding level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldEnergy {
    pub fold: usize,
    pub raw: EnergyEstimate,
    pub corrected: EnergyEstimate,
}

/// Energies of one run: unfolded raw and readout-corrected values, and the
/// Richardson extrapolations of the corrected per-fold energies.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationReport {
    pub raw: EnergyEstimate,
    pub ro_corrected: EnergyEstimate,
    pub linear: EnergyEstimate,
    pub quadratic: EnergyEstimate,
    pub per_fold: Vec<FoldEnergy>,
}

/// Header of [`MitigationReport::csv_rows`].
pub const REPORT_CSV_HEADER: &str = "point,target,fold,run,group,raw,ro_corrected,linear,quadratic";

impl MitigationReport {
    pub fn from_folds(per_fold: Vec<FoldEnergy>) -> Result<Self, MitigationError> {
        let base = per_fold
            .iter()
            .find(|f| f.fold == 1)
            .copied()
            .ok_or(MitigationError::MissingBaseFold)?;
        let (linear, quadratic) = richardson(&fold_points(&per_fold))?;
        Ok(Self {
            raw: base.raw,
            ro_corrected: base.corrected,
            linear,
            quadratic,
            per_fold,
        })
    }

    /// Estimate selected by `which`.
    pub fn get(&self, which: Estimator) -> EnergyEstimate {
        match which {
            Estimator::Raw => self.raw,
            Estimator::ReadoutCorrected => self.ro_corrected,
            Estimator::Linear => self.linear,
            Estimator::Quadratic => self.quadratic,
        }
    }

    /// One row per fold; the extrapolated columns repeat on every row.
    pub fn csv_rows(&self, point: &str, target: &str, run: usize, group: usize) -> Vec<String> {
        self.per_fold
            .iter()
            .map(|f| {
                format!(
                    "{point},{target},{},{run},{group},{:.12e},{:.12e},{:.12e},{:.12e}",
                    f.fold, f.raw.mean, f.corrected.mean, self.linear.mean, self.quadratic.mean
                )
            })
            .collect()
    }
}

fn fold_points(per_fold: &[FoldEnergy]) -> Vec<(f64, EnergyEstimate)> {
    per_fold.iter().map(|f| (f.fold as f64, f.corrected)).collect()
}

/// Which energy estimate of a report to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Raw,
    ReadoutCorrected,
    Linear,
    Quadratic,
}

/// Raw and readout-corrected energy of `circuit` under `noise`.
///
/// Every nonidentity term gets `shots` noisy samples in its eigenbasis. The
/// corrected mean comes from the constrained correction of those counts.
pub fn noisy_energy<R: Rng + ?Sized>(
    circuit: &Circuit,
    angles: &[f64],
    decomp: &PauliDecomposition,
    noise: &NoiseModel,
    shots: u64,
    cal: &CalibrationMatrix,
    rng: &mut R,
) -> Result<(EnergyEstimate, EnergyEstimate), MitigationError> {
    if shots == 0 {
        return Err(MitigationError::NoShots);
    }
    let rho = evolve(circuit, angles, noise)?;
    let (mut raw, mut cor, mut var_raw, mut var_cor) = (0.0, 0.0, 0.0, 0.0);
    let n = shots as f64;
    for t in &decomp.terms {
        if t.pauli.support() == 0 {
            raw += t.coeff;
            cor += t.coeff;
            continue;
        }
        let probs = observed_distribution(&rho, &t.pauli, noise);
        let counts = crate::vqe_engine::sample_counts(&probs, shots, rng);
        let (m, se) = parity_statistics(&counts, &t.pauli);
        raw += t.coeff * m;
        var_raw += (t.coeff * se).powi(2);
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let x = correct_readout(&freq, cal)?.probabilities;
        let mc: f64 = x.iter().enumerate().map(|(b, p)| t.pauli.outcome_sign(b) * p).sum();
        cor += t.coeff * mc;
        var_cor += t.coeff * t.coeff * (1.0 - mc * mc).max(0.0) / n;
    }
    let est = |mean: f64, var: f64| EnergyEstimate {
        mean,
        stderr: var.sqrt(),
        shots,
        mode: MeasurementMode::Sampled,
    };
    Ok((est(raw, var_raw), est(cor, var_cor)))
}

/// Measures `circuit` at every folding level and extrapolates.
#[allow(clippy::too_many_arguments)]
pub fn mitigate_energy<R: Rng + ?Sized>(
    circuit: &Circuit,
    angles: &[f64],
    decomp: &PauliDecomposition,
    noise: &NoiseModel,
    shots: u64,
    folds: &[usize],
    cal: &CalibrationMatrix,
    rng: &mut R,
) -> Result<MitigationReport, MitigationError> {
    let mut per_fold = Vec::with_capacity(folds.len());
    for &f in folds {
        let c = fold_cnots(circuit, f)?;
        let (raw, corrected) = noisy_energy(&c, angles, decomp, noise, shots, cal, rng)?;
        per_fold.push(FoldEnergy { fold: f, raw, corrected });
    }
    MitigationReport::from_folds(per_fold)
}

/// Mean and standard error of the mean, overall and per group.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub values: Vec<f64>,
    pub all: EnergyEstimate,
    pub groups: Vec<EnergyEstimate>,
    /// Group with the lowest mean.
    pub best_group: usize,
}

impl RunSummary {
    pub fn best(&self) -> EnergyEstimate {
        self.groups[self.best_group]
    }
}

fn mean_sem(v: &[f64]) -> EnergyEstimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sem = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    EnergyEstimate {
        mean,
        stderr: sem,
        shots: 0,
        mode: MeasurementMode::Sampled,
    }
}

/// Summarizes consecutive groups of `group_size` runs.
pub fn summarize_runs(values: &[f64], group_size: usize) -> Result<RunSummary, MitigationError> {
    if values.is_empty() || group_size == 0 || values.len() % group_size != 0 {
        return Err(MitigationError::BadGrouping {
            runs: values.len(),
            group_size,
        });
    }
    let groups: Vec<EnergyEstimate> = values.chunks(group_size).map(mean_sem).collect();
    let best_group = (0..groups.len())
        .min_by(|&a, &b| groups[a].mean.total_cmp(&groups[b].mean))
        .expect("nonempty");
    Ok(RunSummary {
        values: values.to_vec(),
        all: mean_sem(values),
        groups,
        best_group,
    })
}

/// Run counts and measurement settings of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub n_runs: usize,
    pub group_size: usize,
    pub shots: u64,
    pub calibration_shots: u64,
    pub folds: Vec<usize>,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            n_runs: 10,
            group_size: 5,
            shots: 8192,
            calibration_shots: 8192,
            folds: DEFAULT_FOLDS.to_vec(),
        }
    }
}

/// A prepared trial state and its Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationTarget {
    pub circuit: Circuit,
    pub angles: Vec<f64>,
    pub decomp: PauliDecomposition,
}

/// All reports of one parameter point, indexed `[run][target]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRuns {
    pub reports: Vec<Vec<MitigationReport>>,
    pub calibrations: Vec<CalibrationMatrix>,
    pub group_size: usize,
}

/// `R_4` with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R4Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl R4Estimate {
    pub fn from_energies(e: &[EnergyEstimate; 4]) -> Self {
        let m = e.map(|x| x.mean);
        let s = e.map(|x| x.stderr);
        Self {
            value: r4_from_energies(&m),
            stderr: r4_stderr(&m, &s),
        }
    }

    /// Whether `value ± k * stderr` contains one.
    pub fn contains_one(&self, k: f64) -> bool {
        (self.value - 1.0).abs() <= k * self.stderr
    }
}

impl PointRuns {
    pub fn summary(&self, target: usize, which: Estimator) -> Result<RunSummary, MitigationError> {
        let v: Vec<f64> = self.reports.iter().map(|r| r[target].get(which).mean).collect();
        summarize_runs(&v, self.group_size)
    }

    /// `R_4` from run-averaged energies, `L = 3` targets (0, 1) with
    /// `l3` and `L = 4` targets (2, 3) with `l4`.
    pub fn r4(&self, l3: Estimator, l4: Estimator, best_group: bool) -> Result<R4Estimate, MitigationError> {
        let mut e = [EnergyEstimate::exact(0.0); 4];
        for (t, slot) in e.iter_mut().enumerate() {
            let s = self.summary(t, if t < 2 { l3 } else { l4 })?;
            *slot = if best_group { s.best() } else { s.all };
        }
        Ok(R4Estimate::from_energies(&e))
    }
}

/// Runs `protocol.n_runs` noisy measurements of every target.
///
/// One calibration is drawn per group before that group's runs. Streams
/// are `stream(noise.seed, [group, 0])` for calibrations and
/// `stream(noise.seed, [run, 1 + target])` for measurements.
pub fn multi_run_protocol(
    targets: &[MitigationTarget],
    noise: &NoiseModel,
    protocol: &Protocol,
) -> Result<PointRuns, MitigationError> {
    if protocol.group_size == 0 || protocol.n_runs == 0 || protocol.n_runs % protocol.group_size != 0 {
        return Err(MitigationError::BadGrouping {
            runs: protocol.n_runs,
            group_size: protocol.group_size,
        });
    }
    let n_groups = protocol.n_runs / protocol.group_size;
    let mut calibrations = Vec::with_capacity(n_groups);
    let mut reports = Vec::with_capacity(protocol.n_runs);
    for g in 0..n_groups {
        let mut crng = seeds::stream(noise.seed, &[g as u64, 0]);
        let cal = calibrate_readout(noise, protocol.calibration_shots, &mut crng)?;
        for r in g * protocol.group_size..(g + 1) * protocol.group_size {
            let mut run = Vec::with_capacity(targets.len());
            for (t, tg) in targets.iter().enumerate() {
                let mut rng = seeds::stream(noise.seed, &[r as u64, 1 + t as u64]);
                run.push(mitigate_energy(
                    &tg.circuit,
                    &tg.angles,
                    &tg.decomp,
                    noise,
                    protocol.shots,
                    &protocol.folds,
                    &cal,
                    &mut rng,
                )?);
            }
            reports.push(run);
        }
        calibrations.push(cal);
    }
    Ok(PointRuns {
        reports,
        calibrations,
        group_size: protocol.group_size,
    })
}

/// `R_4` from linear extrapolation of the `L = 3` reports (even, odd) and
/// quadratic extrapolation of the `L = 4` reports, recomputed from the
/// per-fold energies.
pub fn mixed_extrapolation(
    reports_l3: &[MitigationReport; 2],
    reports_l4: &[MitigationReport; 2],
) -> Result<R4Estimate, MitigationError> {
    let mut e = [EnergyEstimate::exact(0.0); 4];
    for (i, r) in reports_l3.iter().enumerate() {
        e[i] = poly_extrapolate(&fold_points(&r.per_fold), 1)?;
    }
    for (i, r) in reports_l4.iter().enumerate() {
        e[2 + i] = poly_extrapolate(&fold_points(&r.per_fold), 2)?;
    }
    Ok(R4Estimate::from_energies(&e))
}
