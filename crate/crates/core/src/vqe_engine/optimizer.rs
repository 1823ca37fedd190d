//! Derivative-free simplex minimization and the VQE loop built on it.

use rand::Rng;

use super::circuit::{apply_circuit, Circuit};
use super::measure::{measure_energy, EnergyEstimate, PauliDecomposition, Shots};
use super::VqeError;

/// Default number of objective evaluations per minimization.
pub const DEFAULT_BUDGET: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Convergence threshold on the simplex diameter.
    pub xtol: f64,
    /// Convergence threshold on the spread of simplex values.
    pub ftol: f64,
    /// Restarts from the best vertex after convergence.
    pub max_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.5,
            xtol: 1e-9,
            ftol: 1e-13,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<f64>,
    pub f: f64,
    /// Extra data returned by the objective at `x`.
    pub payload: T,
    pub evaluations: usize,
    pub converged: bool,
}

struct Budgeted<'a, T, F: FnMut(&[f64]) -> (f64, T)> {
    f: &'a mut F,
    left: usize,
    used: usize,
    best: Option<(Vec<f64>, f64, T)>,
}

impl<T: Clone, F: FnMut(&[f64]) -> (f64, T)> Budgeted<'_, T, F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        self.used += 1;
        let (v, payload) = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.best.as_ref().map_or(true, |b| v < b.1) {
            self.best = Some((x.to_vec(), v, payload));
        }
        Some(v)
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` within `budget` evaluations and returns the
    /// best point seen. `f` returns the value and a payload stored with it.
    pub fn minimize<T: Clone, F>(&self, mut f: F, x0: &[f64], budget: usize) -> Minimum<T>
    where
        F: FnMut(&[f64]) -> (f64, T),
    {
        let mut b = Budgeted {
            f: &mut f,
            left: budget.max(1),
            used: 0,
            best: None,
        };
        let mut converged = false;
        let mut start = x0.to_vec();
        let mut step = self.step;
        for round in 0..=self.max_restarts {
            let before = b.best.as_ref().map(|v| v.1);
            if self.run(&mut b, &start, step).is_none() {
                converged = false;
                break;
            }
            converged = true;
            let (bx, bf) = {
                let best = b.best.as_ref().expect("at least one evaluation");
                (best.0.clone(), best.1)
            };
            if round > 0 && before.is_some_and(|p| p - bf <= self.ftol) {
                break;
            }
            start = bx;
            step *= 0.5;
        }
        let used = b.used;
        let (x, fx, payload) = b.best.expect("at least one evaluation");
        Minimum {
            x,
            f: fx,
            payload,
            evaluations: used,
            converged,
        }
    }

    // None when the budget runs out before the simplex collapses.
    fn run<T: Clone, F: FnMut(&[f64]) -> (f64, T)>(
        &self,
        b: &mut Budgeted<'_, T, F>,
        x0: &[f64],
        step: f64,
    ) -> Option<()> {
        let n = x0.len();
        if n == 0 {
            b.eval(x0)?;
            return Some(());
        }
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), b.eval(x0)?));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = b.eval(&x)?;
            simplex.push((x, v));
        }
        loop {
            simplex.sort_by(|a, c| a.1.total_cmp(&c.1));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, c)| (a - c).abs()))
                .fold(0.0, f64::max);
            if spread <= self.ftol && diameter <= self.xtol || diameter <= self.xtol * 1e-3 {
                return Some(());
            }
            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = b.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = b.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let x = along(-0.5);
                    let v = b.eval(&x)?;
                    (x, v)
                } else {
                    let x = along(0.5);
                    let v = b.eval(&x)?;
                    (x, v)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = best.iter().zip(&v.0).map(|(a, c)| a + 0.5 * (c - a)).collect();
                        let fx = b.eval(&x)?;
                        *v = (x, fx);
                    }
                }
            }
        }
    }
}

/// Outcome of one variational minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub angles: Vec<f64>,
    pub energy: EnergyEstimate,
    pub evaluations: usize,
    pub converged: bool,
    /// Set when the evaluation budget ran out before convergence.
    pub budget_exhausted: bool,
}

/// Minimizes the measured energy of `circuit` over its free angles.
///
/// Returns the best angles seen and the estimate measured there. In sampled
/// mode every evaluation draws fresh shots from `rng`.
pub fn vqe_minimize<R: Rng + ?Sized>(
    circuit: &Circuit,
    decomp: &PauliDecomposition,
    initial: &[f64],
    budget: usize,
    shots: Shots,
    rng: &mut R,
) -> Result<VqeResult, VqeError> {
    vqe_minimize_with(&NelderMead::default(), circuit, decomp, initial, budget, shots, rng)
}

pub fn vqe_minimize_with<R: Rng + ?Sized>(
    opts: &NelderMead,
    circuit: &Circuit,
    decomp: &PauliDecomposition,
    initial: &[f64],
    budget: usize,
    shots: Shots,
    rng: &mut R,
) -> Result<VqeResult, VqeError> {
    if budget == 0 {
        return Err(VqeError::InvalidBudget);
    }
    if circuit.n_qubits() != decomp.n_qubits {
        return Err(VqeError::BadDimension(1 << circuit.n_qubits()));
    }
    apply_circuit(circuit, initial)?;
    let objective = |x: &[f64]| {
        let psi = apply_circuit(circuit, x).expect("angles validated above");
        let est = measure_energy(&psi, decomp, shots, rng);
        (est.mean, est)
    };
    let res = opts.minimize(objective, initial, budget);
    Ok(VqeResult {
        angles: res.x,
        energy: res.payload,
        evaluations: res.evaluations,
        converged: res.converged,
        budget_exhausted: !res.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic_bowl() {
        let f = |x: &[f64]| ((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), ());
        let m = NelderMead::default().minimize(f, &[0.0, 0.0], 2000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_returns_best_seen() {
        let mut calls = 0;
        let f = |x: &[f64]| {
            calls += 1;
            (x[0] * x[0], ())
        };
        let m = NelderMead::default().minimize(f, &[3.0], 5);
        assert_eq!(m.evaluations, 5);
        assert!(!m.converged);
        assert!(m.f <= 9.0);
        assert_eq!(calls, 5);
    }
}
