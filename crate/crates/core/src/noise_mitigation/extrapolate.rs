//! Least-squares Richardson extrapolation to zero CNOT count.

use nalgebra::{DMatrix, DVector};

use crate::vqe_engine::{EnergyEstimate, MeasurementMode};

use super::MitigationError;

/// Evaluates at `fold = 0` the least-squares polynomial of `degree` through
/// `(fold, energy)` points, propagating the point errors linearly.
pub fn poly_extrapolate(points: &[(f64, EnergyEstimate)], degree: usize) -> Result<EnergyEstimate, MitigationError> {
    let needed = degree + 1;
    if points.len() < needed {
        return Err(MitigationError::InsufficientPoints {
            needed,
            got: points.len(),
        });
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(MitigationError::DuplicateFold(a.0));
        }
    }
    let x = DMatrix::from_fn(points.len(), needed, |r, c| points[r].0.powi(c as i32));
    let normal = x.transpose() * &x;
    let inv = normal.try_inverse().ok_or(MitigationError::InsufficientPoints {
        needed,
        got: points.len(),
    })?;
    // weights a with value(0) = a . y
    let a: DVector<f64> = (inv * x.transpose()).row(0).transpose();
    let mean = points.iter().zip(a.iter()).map(|(p, w)| w * p.1.mean).sum();
    let var: f64 = points.iter().zip(a.iter()).map(|(p, w)| (w * p.1.stderr).powi(2)).sum();
    let sampled = points.iter().any(|p| p.1.mode == MeasurementMode::Sampled);
    Ok(EnergyEstimate {
        mean,
        stderr: var.sqrt(),
        shots: points.iter().map(|p| p.1.shots).max().unwrap_or(0),
        mode: if sampled {
            MeasurementMode::Sampled
        } else {
            MeasurementMode::Exact
        },
    })
}

/// Linear and quadratic extrapolations to `fold = 0`.
pub fn richardson(points: &[(f64, EnergyEstimate)]) -> Result<(EnergyEstimate, EnergyEstimate), MitigationError> {
    Ok((poly_extrapolate(points, 1)?, poly_extrapolate(points, 2)?))
}
