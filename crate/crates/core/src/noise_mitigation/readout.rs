//! Readout calibration and constrained least-squares correction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::vqe_engine::sample_counts;

use super::channel::NoiseModel;
use super::MitigationError;

/// Condition number above which a calibration is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e8;
/// Tolerance on calibration column sums.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// Empirical readout channel, `matrix[observed, prepared]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    pub n_qubits: usize,
    pub matrix: DMatrix<f64>,
}

impl CalibrationMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, MitigationError> {
        let d = matrix.nrows();
        if d < 2 || !d.is_power_of_two() || matrix.ncols() != d {
            return Err(MitigationError::BadDistribution(d));
        }
        for c in 0..d {
            let col = matrix.column(c);
            if col.iter().any(|&x| x < 0.0 || !x.is_finite()) || (col.sum() - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(MitigationError::NotStochastic(c));
            }
        }
        Ok(Self {
            n_qubits: d.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }
}

/// Prepares every basis state under readout noise only and records the
/// observed frequencies, `shots_per_state` samples per column.
pub fn calibrate_readout<R: Rng + ?Sized>(
    noise: &NoiseModel,
    shots_per_state: u64,
    rng: &mut R,
) -> Result<CalibrationMatrix, MitigationError> {
    if shots_per_state == 0 {
        return Err(MitigationError::NoShots);
    }
    let a = noise.readout_matrix();
    let d = a.nrows();
    let mut m = DMatrix::zeros(d, d);
    for prepared in 0..d {
        let probs: Vec<f64> = a.column(prepared).iter().copied().collect();
        let counts = sample_counts(&probs, shots_per_state, rng);
        for (obs, &c) in counts.iter().enumerate() {
            m[(obs, prepared)] = c as f64 / shots_per_state as f64;
        }
    }
    CalibrationMatrix::new(m)
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Result of a readout correction.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedDistribution {
    pub probabilities: Vec<f64>,
    /// Condition number of the calibration.
    pub condition: f64,
    /// Set when the condition number exceeded [`CONDITION_LIMIT`] and the
    /// pseudo-inverse was used for the starting point.
    pub singular: bool,
}

/// Solves `min |C x - p|^2` over the probability simplex.
///
/// `raw` may be counts or frequencies; it is normalized first. The
/// unconstrained solution is returned when it already lies in the simplex,
/// otherwise accelerated projected gradient descent refines its projection.
/// [`MitigationError::SingularCalibration`] is returned only when no usable
/// pseudo-inverse exists.
pub fn correct_readout(raw: &[f64], cal: &CalibrationMatrix) -> Result<CorrectedDistribution, MitigationError> {
    let d = cal.matrix.nrows();
    if raw.len() != d {
        return Err(MitigationError::BadDistribution(raw.len()));
    }
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || raw.iter().any(|&x| x < 0.0) {
        return Err(MitigationError::BadDistribution(raw.len()));
    }
    let p = DVector::from_iterator(d, raw.iter().map(|&x| x / total));
    let c = &cal.matrix;
    let condition = cal.condition_number();
    let singular = !(condition <= CONDITION_LIMIT);
    let x0 = if singular {
        c.clone()
            .pseudo_inverse(1e-12)
            .map_err(|_| MitigationError::SingularCalibration(condition))?
            * &p
    } else {
        c.clone()
            .lu()
            .solve(&p)
            .ok_or(MitigationError::SingularCalibration(condition))?
    };
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(MitigationError::SingularCalibration(condition));
    }
    if !singular && x0.iter().all(|&x| x >= 0.0) {
        let s = x0.sum();
        return Ok(CorrectedDistribution {
            probabilities: x0.iter().map(|x| x / s).collect(),
            condition,
            singular,
        });
    }
    let ctc = c.transpose() * c;
    let ctp = c.transpose() * &p;
    let lip = ctc.symmetric_eigenvalues().max().max(1e-300);
    let step = 1.0 / lip;
    let mut x = DVector::from_vec(project_to_simplex(x0.as_slice()));
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..100_000 {
        let grad = &ctc * &y - &ctp;
        let xn = DVector::from_vec(project_to_simplex((&y - grad * step).as_slice()));
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let delta = (&xn - &x).amax();
        y = &xn + (&xn - &x) * ((t - 1.0) / tn);
        x = xn;
        t = tn;
        if delta < 1e-15 {
            break;
        }
    }
    Ok(CorrectedDistribution {
        probabilities: x.as_slice().to_vec(),
        condition,
        singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_basics() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[1.5, -0.5]);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let q = project_to_simplex(&[0.0, 0.0, 0.0]);
        assert!(q.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn identity_calibration_leaves_counts_unchanged() {
        let cal = CalibrationMatrix::identity(2);
        let out = correct_readout(&[10.0, 20.0, 30.0, 40.0], &cal).unwrap();
        for (a, b) in out.probabilities.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn infeasible_input_lands_on_the_simplex() {
        let cal = CalibrationMatrix::new(DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.2, 0.7])).unwrap();
        // 0.95 lies outside the image [0.3, 0.8] of the first row
        let out = correct_readout(&[0.95, 0.05], &cal).unwrap();
        assert!(out.probabilities.iter().all(|&x| x >= 0.0));
        assert!((out.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((out.probabilities[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_calibration_is_flagged() {
        let cal = CalibrationMatrix::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        let out = correct_readout(&[0.5, 0.5], &cal).unwrap();
        assert!(out.singular);
        assert!((out.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
