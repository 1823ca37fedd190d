//! Mass gaps, scaled gap ratios, pseudo-critical points and the weighted
//! extrapolation of the θ = π critical point to the continuum.
//!
//! For θ ∈ {0, π} the ground and first excited states are the ground states
//! of the even and odd parity sectors, so a gap needs two small symmetric
//! eigenproblems. Other θ sectors are diagonalised without a parity split.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use thiserror::Error;

use crate::hamiltonian::{truncate, HamiltonianError, SectorOperator};
use crate::lattice_basis::{normalize_sector, LatticeParams, Parity};

/// Root tolerance on the bare mass for pseudo-critical points.
pub const ROOT_TOLERANCE: f64 = 1e-6;

/// Relative asymmetry above which a matrix is rejected by [`eigenvalues`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Gaps smaller than this make a gap ratio undefined.
pub const MIN_DENOMINATOR_GAP: f64 = 1e-12;

/// Cutoff used for the classical reference curves.
pub const REFERENCE_N_MAX: i32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriticalityError {
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("requested {k} eigenvalues of a {dim}-dimensional matrix")]
    InvalidCount { k: usize, dim: usize },
    #[error("parity split requires theta = 0 or pi")]
    ParityUnavailable,
    #[error("gap of the smaller lattice vanishes")]
    ZeroDenominator,
    #[error("R - 1 does not change sign on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("all couplings coincide, the regression is degenerate")]
    DegenerateFit,
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("weights must be all positive or all zero")]
    InvalidWeights,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The `k` smallest eigenvalues in ascending order.
pub fn eigenvalues(h: &DMatrix<f64>, k: usize) -> Result<Vec<f64>, CriticalityError> {
    let dim = h.nrows();
    if k == 0 || k > dim || h.ncols() != dim {
        return Err(CriticalityError::InvalidCount { k, dim });
    }
    let asym = (h - h.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * h.amax().max(1.0) {
        return Err(CriticalityError::NonSymmetric(asym));
    }
    let mut vals = SymmetricEigen::new(h.clone()).eigenvalues.as_slice().to_vec();
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    Ok(vals)
}

/// Lowest eigenvalue and its eigenvector.
pub fn ground_state(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

fn lowest(h: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h).eigenvalues.min()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult {
    pub params: LatticeParams,
    /// Ground energy (even sector for θ ∈ {0, π}).
    pub e0: f64,
    /// First excited energy (odd sector for θ ∈ {0, π}).
    pub e1: f64,
    pub gap: f64,
}

/// Even and odd sector operators of one lattice at θ ∈ {0, π}.
#[derive(Debug, Clone)]
pub struct ParitySectors {
    pub l: usize,
    pub theta_k: i32,
    pub n_max: i32,
    pub even: SectorOperator,
    pub odd: SectorOperator,
}

impl ParitySectors {
    pub fn new(l: usize, theta_k: i32, n_max: i32) -> Result<Self, CriticalityError> {
        let k = normalize_sector(l, theta_k);
        if k != 0 && k != l as i32 {
            return Err(CriticalityError::ParityUnavailable);
        }
        Ok(Self {
            l,
            theta_k: k,
            n_max,
            even: SectorOperator::for_sector(l, k, n_max, Parity::Even)?,
            odd: SectorOperator::for_sector(l, k, n_max, Parity::Odd)?,
        })
    }

    /// The θ = π sectors used for the phase transition.
    pub fn theta_pi(l: usize, n_max: i32) -> Result<Self, CriticalityError> {
        Self::new(l, l as i32, n_max)
    }

    pub fn gap(&self, e: f64, m: f64) -> GapResult {
        let e0 = lowest(self.even.matrix(e, m));
        let e1 = lowest(self.odd.matrix(e, m));
        GapResult {
            params: LatticeParams {
                l: self.l,
                e,
                m,
                theta_k: self.theta_k,
                n_max: self.n_max,
            },
            e0,
            e1,
            gap: e1 - e0,
        }
    }
}

/// Gap from the parity sectors; θ must be 0 or π.
pub fn mass_gap(params: &LatticeParams) -> Result<GapResult, CriticalityError> {
    if !params.has_parity() {
        return Err(CriticalityError::ParityUnavailable);
    }
    Ok(ParitySectors::new(params.l, params.theta_k, params.n_max)?.gap(params.e, params.m))
}

/// `R_L = L Δ_L / ((L−1) Δ_{L−1})`.
pub fn scaled_gap_ratio(l: usize, gap_l: f64, gap_lower: f64) -> Result<f64, CriticalityError> {
    if l < 2 {
        return Err(CriticalityError::InvalidInput("R_L needs L >= 2".into()));
    }
    if gap_lower.abs() < MIN_DENOMINATOR_GAP {
        return Err(CriticalityError::ZeroDenominator);
    }
    Ok(l as f64 * gap_l / ((l - 1) as f64 * gap_lower))
}

/// Gap ratio `R_L` at θ = π for a single point.
pub fn gap_ratio(l: usize, e: f64, m: f64, n_max: i32) -> Result<f64, CriticalityError> {
    GapRatio::new(l, n_max)?.ratio(e, m)
}

/// Cached sectors for evaluating `R_L(e, m)` repeatedly at θ = π.
#[derive(Debug, Clone)]
pub struct GapRatio {
    pub upper: ParitySectors,
    pub lower: ParitySectors,
}

impl GapRatio {
    pub fn new(l: usize, n_max: i32) -> Result<Self, CriticalityError> {
        if l < 2 {
            return Err(CriticalityError::InvalidInput("R_L needs L >= 2".into()));
        }
        Ok(Self {
            upper: ParitySectors::theta_pi(l, n_max)?,
            lower: ParitySectors::theta_pi(l - 1, n_max)?,
        })
    }

    pub fn from_sectors(upper: ParitySectors, lower: ParitySectors) -> Self {
        Self { upper, lower }
    }

    pub fn l(&self) -> usize {
        self.upper.l
    }

    pub fn ratio(&self, e: f64, m: f64) -> Result<f64, CriticalityError> {
        scaled_gap_ratio(self.l(), self.upper.gap(e, m).gap, self.lower.gap(e, m).gap)
    }
}

/// First sign change of `f` on an evenly spaced scan of `[lo, hi]`.
pub fn scan_bracket<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<Option<(f64, f64)>, CriticalityError>
where
    F: FnMut(f64) -> Result<f64, CriticalityError>,
{
    let points = points.max(2);
    let mut prev = (lo, f(lo)?);
    for i in 1..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let fx = f(x)?;
        if prev.1 == 0.0 {
            return Ok(Some((prev.0, prev.0)));
        }
        if prev.1.signum() != fx.signum() {
            return Ok(Some((prev.0, x)));
        }
        prev = (x, fx);
    }
    Ok(None)
}

/// Root of `f` on a sign-changing bracket: bisection steps interleaved with
/// secant (false-position) steps, stopping once the bracket is narrower than `tol`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, CriticalityError>
where
    F: FnMut(f64) -> Result<f64, CriticalityError>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(CriticalityError::NoBracket { lo: a, hi: b });
    }
    let mut use_secant = false;
    for _ in 0..200 {
        let width = b - a;
        if width < tol {
            break;
        }
        let x = if use_secant {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                s
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        use_secant = b - a < 0.5 * width;
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Solution of `R_L(m) = 1` at fixed coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoCriticalPoint {
    pub l: usize,
    pub e: f64,
    pub m_star: f64,
    /// Regression weight scale `|m*_L/e − m*_{L−1}/e|`; zero when unavailable.
    pub sigma: f64,
}

/// Root of `R_L = 1` inside `bracket`.
pub fn pseudo_critical(model: &GapRatio, e: f64, bracket: (f64, f64)) -> Result<f64, CriticalityError> {
    find_root(|m| Ok(model.ratio(e, m)? - 1.0), bracket.0, bracket.1, ROOT_TOLERANCE)
}

/// Scan window for locating the `R_L = 1` crossing, in units of `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWindow {
    pub lo_over_e: f64,
    pub hi_over_e: f64,
    pub points: usize,
}

impl Default for ScanWindow {
    fn default() -> Self {
        Self {
            lo_over_e: -0.2,
            hi_over_e: 1.0,
            points: 60,
        }
    }
}

/// Sectors for `L`, `L−1` and (when it exists) `L−2`, enough for `m*_L` and its weight.
#[derive(Debug, Clone)]
pub struct CriticalContext {
    pub upper: GapRatio,
    pub lower: Option<GapRatio>,
}

impl CriticalContext {
    pub fn new(l: usize, n_max: i32) -> Result<Self, CriticalityError> {
        let upper = GapRatio::new(l, n_max)?;
        let lower = if l >= 3 {
            Some(GapRatio::from_sectors(
                upper.lower.clone(),
                ParitySectors::theta_pi(l - 2, n_max)?,
            ))
        } else {
            None
        };
        Ok(Self { upper, lower })
    }

    fn crossing(model: &GapRatio, e: f64, window: &ScanWindow) -> Result<f64, CriticalityError> {
        let (lo, hi) = (window.lo_over_e * e, window.hi_over_e * e);
        let bracket = scan_bracket(|m| Ok(model.ratio(e, m)? - 1.0), lo, hi, window.points)?
            .ok_or(CriticalityError::NoBracket { lo, hi })?;
        if bracket.0 == bracket.1 {
            return Ok(bracket.0);
        }
        pseudo_critical(model, e, bracket)
    }

    /// `m*_L` alone, without the weight.
    pub fn upper_point(&self, e: f64, window: &ScanWindow) -> Result<f64, CriticalityError> {
        Self::crossing(&self.upper, e, window)
    }

    /// `m*_L` at coupling `e` with its weight from the `L−1` crossing.
    pub fn point(&self, e: f64, window: &ScanWindow) -> Result<PseudoCriticalPoint, CriticalityError> {
        let m_star = Self::crossing(&self.upper, e, window)?;
        let sigma = match &self.lower {
            Some(lower) => (m_star - Self::crossing(lower, e, window)?).abs() / e,
            None => 0.0,
        };
        Ok(PseudoCriticalPoint {
            l: self.upper.l(),
            e,
            m_star,
            sigma,
        })
    }
}

/// Weighted linear fit of `m*/e` against `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPointEstimate {
    pub intercept: f64,
    pub slope: f64,
    /// Covariance of `(intercept, slope)`.
    pub covariance: Matrix2<f64>,
}

impl CriticalPointEstimate {
    pub fn intercept_stderr(&self) -> f64 {
        self.covariance[(0, 0)].max(0.0).sqrt()
    }
}

/// Weighted least squares of `y_i` on `x_i` with weights `w_i`.
///
/// The covariance is `(XᵀWX)⁻¹` scaled by the weighted residual variance when
/// more than two points are available.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<CriticalPointEstimate, CriticalityError> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return Err(CriticalityError::InsufficientPoints { needed: 2, got: n });
    }
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        s += w[i];
        sx += w[i] * x[i];
        sxx += w[i] * x[i] * x[i];
        sy += w[i] * y[i];
        sxy += w[i] * x[i] * y[i];
    }
    let normal = Matrix2::new(s, sx, sx, sxx);
    let det = normal.determinant();
    if det.abs() <= 1e-14 * (s * sxx).abs().max(f64::MIN_POSITIVE) {
        return Err(CriticalityError::DegenerateFit);
    }
    let inv = normal.try_inverse().ok_or(CriticalityError::DegenerateFit)?;
    let beta: Vector2<f64> = inv * Vector2::new(sy, sxy);
    let scale = if n > 2 {
        let rss: f64 = (0..n)
            .map(|i| w[i] * (y[i] - beta[0] - beta[1] * x[i]).powi(2))
            .sum();
        rss / (n - 2) as f64
    } else {
        1.0
    };
    Ok(CriticalPointEstimate {
        intercept: beta[0],
        slope: beta[1],
        covariance: inv * scale,
    })
}

/// Extrapolates `m*/e` to `e = 0` with weights `1/σ²` (unweighted when every σ is zero).
pub fn extrapolate_critical(points: &[PseudoCriticalPoint]) -> Result<CriticalPointEstimate, CriticalityError> {
    if points.len() < 2 {
        return Err(CriticalityError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let first_e = points[0].e;
    if points.iter().all(|p| (p.e - first_e).abs() < 1e-15) {
        return Err(CriticalityError::DegenerateFit);
    }
    let all_zero = points.iter().all(|p| p.sigma == 0.0);
    let all_positive = points.iter().all(|p| p.sigma > 0.0 && p.sigma.is_finite());
    if !all_zero && !all_positive {
        return Err(CriticalityError::InvalidWeights);
    }
    let x: Vec<f64> = points.iter().map(|p| p.e).collect();
    let y: Vec<f64> = points.iter().map(|p| p.m_star / p.e).collect();
    let w: Vec<f64> = points
        .iter()
        .map(|p| if all_zero { 1.0 } else { 1.0 / (p.sigma * p.sigma) })
        .collect();
    weighted_line_fit(&x, &y, &w)
}

/// Image of `m` under the reflection about `m = −e²/8` that maps θ = 0 onto θ = π.
pub fn reflect_mass(m: f64, e: f64) -> f64 {
    -0.25 * e * e - m
}

/// Gap curve in one θ sector; θ ∉ {0, π} uses the two lowest unsplit eigenvalues.
pub fn theta_scan(
    l: usize,
    e: f64,
    theta_k: i32,
    m_values: &[f64],
    n_max: i32,
) -> Result<Vec<GapResult>, CriticalityError> {
    let k = normalize_sector(l, theta_k);
    if k == 0 || k == l as i32 {
        let sectors = ParitySectors::new(l, k, n_max)?;
        return Ok(m_values.iter().map(|&m| sectors.gap(e, m)).collect());
    }
    let op = SectorOperator::for_sector(l, k, n_max, Parity::Unsplit)?;
    if op.dim() < 2 {
        return Err(CriticalityError::InvalidCount { k: 2, dim: op.dim() });
    }
    m_values
        .iter()
        .map(|&m| {
            let v = eigenvalues(&op.matrix(e, m), 2)?;
            Ok(GapResult {
                params: LatticeParams {
                    l,
                    e,
                    m,
                    theta_k: k,
                    n_max,
                },
                e0: v[0],
                e1: v[1],
                gap: v[1] - v[0],
            })
        })
        .collect()
}

/// One mass value of a cutoff study.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub m: f64,
    pub reference_gap: f64,
    /// Gap per cutoff, in the order of the requested cutoffs.
    pub gaps: Vec<f64>,
    /// `|Δ_cutoff − Δ_ref| / Δ_ref` per cutoff.
    pub rel_errors: Vec<f64>,
}

/// θ = π gap curves at several cutoffs against a reference cutoff.
pub fn truncation_study(
    l: usize,
    e: f64,
    m_values: &[f64],
    cutoffs: &[i32],
    reference_n_max: i32,
) -> Result<Vec<TruncationRow>, CriticalityError> {
    if cutoffs.windows(2).any(|w| w[0] > w[1]) {
        return Err(CriticalityError::InvalidInput("cutoffs must be ascending".into()));
    }
    let reference = ParitySectors::theta_pi(l, reference_n_max)?;
    let sectors: Vec<ParitySectors> = cutoffs
        .iter()
        .map(|&c| ParitySectors::theta_pi(l, c))
        .collect::<Result<_, _>>()?;
    Ok(m_values
        .iter()
        .map(|&m| {
            let reference_gap = reference.gap(e, m).gap;
            let gaps: Vec<f64> = sectors.iter().map(|s| s.gap(e, m).gap).collect();
            let rel_errors = gaps
                .iter()
                .map(|g| (g - reference_gap).abs() / reference_gap.abs())
                .collect();
            TruncationRow {
                m,
                reference_gap,
                gaps,
                rel_errors,
            }
        })
        .collect())
}

/// Gap of the full parity sectors against the gap of their `dim`-state truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGapRow {
    pub m: f64,
    pub full_gap: f64,
    pub truncated_gap: f64,
}

/// Gap curve from fixed `dim`-state truncations of both θ = π parity sectors,
/// selected once at `reference = (e, m_ref)`.
pub fn truncated_gap_curve(
    l: usize,
    e: f64,
    m_values: &[f64],
    dim: usize,
    m_ref: f64,
    n_max: i32,
) -> Result<Vec<TruncatedGapRow>, CriticalityError> {
    let sectors = ParitySectors::theta_pi(l, n_max)?;
    let te = truncate(&sectors.even, dim.min(sectors.even.dim()), (e, m_ref))?;
    let to = truncate(&sectors.odd, dim.min(sectors.odd.dim()), (e, m_ref))?;
    Ok(m_values
        .iter()
        .map(|&m| {
            let full = sectors.gap(e, m);
            let e0 = lowest(te.restrict(&sectors.even.matrix(e, m)));
            let e1 = lowest(to.restrict(&sectors.odd.matrix(e, m)));
            TruncatedGapRow {
                m,
                full_gap: full.gap,
                truncated_gap: e1 - e0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_small_matrices() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let v = eigenvalues(&h, 2).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(eigenvalues(&d, 3).unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigenvalues_reject_asymmetric_input() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(eigenvalues(&h, 1), Err(CriticalityError::NonSymmetric(_))));
    }

    #[test]
    fn synthetic_scaling_ratios() {
        let c = 0.7;
        assert!((scaled_gap_ratio(4, c / 4.0, c / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((scaled_gap_ratio(4, c, c).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(scaled_gap_ratio(3, 1.0, 0.0), Err(CriticalityError::ZeroDenominator));
    }

    #[test]
    fn planted_root_is_recovered() {
        let r = find_root(|m| Ok(1.0 / (1.0 + m) - 1.0 / 1.2), 0.0, 1.0, ROOT_TOLERANCE).unwrap();
        assert!((r - 0.2).abs() < ROOT_TOLERANCE);
    }

    #[test]
    fn root_without_bracket_fails() {
        assert!(matches!(
            find_root(|m| Ok(m * m + 1.0), -1.0, 1.0, 1e-6),
            Err(CriticalityError::NoBracket { .. })
        ));
    }

    #[test]
    fn exact_line_is_recovered() {
        let pts: Vec<PseudoCriticalPoint> = [0.2, 0.5, 0.9]
            .iter()
            .map(|&e| PseudoCriticalPoint {
                l: 4,
                e,
                m_star: e * (0.3 + 0.1 * e),
                sigma: 0.01,
            })
            .collect();
        let fit = extrapolate_critical(&pts).unwrap();
        assert!((fit.intercept - 0.3).abs() < 1e-12 && (fit.slope - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_coupling_is_degenerate() {
        let p = PseudoCriticalPoint {
            l: 4,
            e: 0.5,
            m_star: 0.1,
            sigma: 0.0,
        };
        assert_eq!(extrapolate_critical(&[p, p]), Err(CriticalityError::DegenerateFit));
    }
}
