//! Command configurations: TOML files with defaults, validated before any
//! computation starts.

use std::f64::consts::PI;
use std::path::Path;

use schwinger_core::lattice_basis::sector_index;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A list of values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Count { start: f64, stop: f64, count: usize },
    Step { start: f64, stop: f64, step: f64 },
}

// Removes accumulated floating-point noise from generated grid values.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Count { start, stop, count } => match count {
                0 => vec![],
                1 => vec![start],
                _ => (0..count)
                    .map(|i| tidy(start + (stop - start) * i as f64 / (count - 1) as f64))
                    .collect(),
            },
            Grid::Step { start, stop, step } => {
                if !(step > 0.0) || stop < start {
                    return vec![];
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| tidy(start + i as f64 * step)).collect()
            }
        }
    }

    pub fn validate(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = self.values();
        if v.is_empty() {
            return Err(CliError::validation(format!("grid `{name}` is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation(format!("grid `{name}` has non-finite values")));
        }
        Ok(v)
    }

    pub fn validate_positive(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = self.validate(name)?;
        if v.iter().any(|&x| x <= 0.0) {
            return Err(CliError::validation(format!("grid `{name}` must be positive")));
        }
        Ok(v)
    }
}

/// A θ value: a number or text such as `pi`, `-pi/2`, `2pi/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    Number(f64),
    Text(String),
}

impl Theta {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Theta::Number(x) => Ok(*x),
            Theta::Text(s) => parse_theta(s).ok_or_else(|| CliError::validation(format!("cannot parse theta `{s}`"))),
        }
    }

    /// Sector index `k` with `θ = kπ/L`.
    pub fn sector(&self, l: usize) -> Result<i32, CliError> {
        let v = self.value()?;
        sector_index(l, v).map_err(|e| CliError::validation(format!("theta {} for L = {l}: {e}", self.label())))
    }

    pub fn label(&self) -> String {
        match self {
            Theta::Number(x) => x.to_string(),
            Theta::Text(s) => s.clone(),
        }
    }
}

fn parse_theta(s: &str) -> Option<f64> {
    let t = s.trim().replace(' ', "");
    if let Ok(x) = t.parse::<f64>() {
        return Some(x);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.as_str()),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let coeff = num.strip_suffix("pi")?;
    let c = if coeff.is_empty() { 1.0 } else { coeff.parse::<f64>().ok()? };
    Some(sign * c * PI / den)
}

fn default_n_max() -> i32 {
    20
}

fn check_l(l: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if l < lo || l > hi {
        return Err(CliError::validation(format!("L = {l} outside the supported range {lo}..={hi}")));
    }
    Ok(())
}

fn check_n_max(n: i32) -> Result<(), CliError> {
    if n < 1 {
        return Err(CliError::validation(format!("n_max = {n} must be at least 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_spectrum_l")]
    pub l: usize,
    #[serde(default = "default_n_max")]
    pub n_max: i32,
    #[serde(default = "default_spectrum_thetas")]
    pub thetas: Vec<Theta>,
    #[serde(default = "default_spectrum_e")]
    pub e: Grid,
    #[serde(default = "default_spectrum_m")]
    pub m: Grid,
}

fn default_spectrum_l() -> usize {
    2
}
fn default_spectrum_e() -> Grid {
    Grid::Step {
        start: 0.25,
        stop: 2.0,
        step: 0.25,
    }
}
fn default_spectrum_m() -> Grid {
    Grid::Step {
        start: -1.0,
        stop: 2.0,
        step: 0.05,
    }
}

fn default_spectrum_thetas() -> Vec<Theta> {
    vec![Theta::Text("0".into()), Theta::Text("pi".into())]
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_l(self.l, 2, 6)?;
        check_n_max(self.n_max)?;
        self.e.validate_positive("e")?;
        self.m.validate("m")?;
        if self.thetas.is_empty() {
            return Err(CliError::validation("no theta sectors requested"));
        }
        for t in &self.thetas {
            t.sector(self.l)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lo_over_e: f64,
    pub hi_over_e: f64,
    pub points: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        let w = schwinger_core::criticality::ScanWindow::default();
        Self {
            lo_over_e: w.lo_over_e,
            hi_over_e: w.hi_over_e,
            points: w.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalConfig {
    #[serde(default = "default_critical_l")]
    pub l: Vec<usize>,
    #[serde(default = "default_n_max")]
    pub n_max: i32,
    #[serde(default = "default_critical_e")]
    pub e: Grid,
    #[serde(default)]
    pub window: WindowConfig,
}

fn default_critical_l() -> Vec<usize> {
    vec![4, 5]
}

fn default_critical_e() -> Grid {
    Grid::Step {
        start: 0.1,
        stop: 1.0,
        step: 0.1,
    }
}

fn distinct_count(v: &[f64]) -> usize {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    s.len()
}

impl CriticalConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.l.is_empty() {
            return Err(CliError::validation("no lattice sizes requested"));
        }
        for &l in &self.l {
            check_l(l, 3, 6)?;
        }
        check_n_max(self.n_max)?;
        let e = self.e.validate_positive("e")?;
        if distinct_count(&e) < 2 {
            return Err(CliError::validation(
                "the regression needs at least two distinct couplings (degenerate fit)",
            ));
        }
        let w = &self.window;
        if !(w.hi_over_e > w.lo_over_e) || w.points < 2 {
            return Err(CliError::validation("scan window must have hi > lo and at least 2 points"));
        }
        Ok(())
    }
}

/// Truncation reference: `"pseudo-critical"` or a ratio `m/e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceSpec {
    Ratio(f64),
    Named(String),
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec::Named("pseudo-critical".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_p2")]
    pub p2: f64,
    #[serde(default = "default_ro_flip")]
    pub ro_flip: (f64, f64),
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default = "default_group")]
    pub group_size: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_shots")]
    pub calibration_shots: u64,
    #[serde(default = "default_folds")]
    pub folds: Vec<usize>,
}

fn default_true() -> bool {
    true
}
fn default_p2() -> f64 {
    schwinger_core::noise_mitigation::DEFAULT_P2
}
fn default_ro_flip() -> (f64, f64) {
    schwinger_core::noise_mitigation::DEFAULT_RO_FLIP
}
fn default_runs() -> usize {
    10
}
fn default_group() -> usize {
    5
}
fn default_shots() -> u64 {
    8192
}
fn default_folds() -> Vec<usize> {
    schwinger_core::noise_mitigation::DEFAULT_FOLDS.to_vec()
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            p2: default_p2(),
            ro_flip: default_ro_flip(),
            n_runs: default_runs(),
            group_size: default_group(),
            shots: default_shots(),
            calibration_shots: default_shots(),
            folds: default_folds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeConfig {
    #[serde(default = "default_vqe_e")]
    pub e: Grid,
    #[serde(default = "default_m_grid")]
    pub m: Grid,
    #[serde(default)]
    pub reference: ReferenceSpec,
    /// Parent cutoff; absent means `2L`.
    #[serde(default)]
    pub n_max: Option<i32>,
    #[serde(default = "default_pad")]
    pub pad_factor: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_layout_restarts")]
    pub layout_restarts: usize,
    /// Shots per Pauli term for the shot-noise sweep; 0 skips it.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub mitigation: MitigationConfig,
}

fn default_vqe_e() -> Grid {
    Grid::Step {
        start: 0.5,
        stop: 1.0,
        step: 0.1,
    }
}
fn default_m_grid() -> Grid {
    Grid::Step {
        start: 0.05,
        stop: 0.5,
        step: 0.01,
    }
}
fn default_pad() -> f64 {
    1.0
}
fn default_budget() -> usize {
    schwinger_core::vqe_engine::DEFAULT_BUDGET
}
fn default_restarts() -> usize {
    2
}
fn default_layout_restarts() -> usize {
    100
}

impl VqeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let e = self.e.validate_positive("e")?;
        if distinct_count(&e) < 2 {
            return Err(CliError::validation(
                "the regression needs at least two distinct couplings (degenerate fit)",
            ));
        }
        self.m.validate("m")?;
        self.reference()?;
        if let Some(n) = self.n_max {
            check_n_max(n)?;
        }
        if !(self.pad_factor >= 0.0) {
            return Err(CliError::validation("pad_factor must be non-negative"));
        }
        if self.budget == 0 {
            return Err(CliError::validation("budget must be positive"));
        }
        let mc = &self.mitigation;
        if mc.enabled {
            let ok = |p: f64| (0.0..=1.0).contains(&p);
            if !ok(mc.p2) || !ok(mc.ro_flip.0) || !ok(mc.ro_flip.1) {
                return Err(CliError::validation("noise probabilities must lie in [0, 1]"));
            }
            if mc.group_size == 0 || mc.n_runs == 0 || mc.n_runs % mc.group_size != 0 {
                return Err(CliError::validation("n_runs must be a positive multiple of group_size"));
            }
            if mc.shots == 0 || mc.calibration_shots == 0 {
                return Err(CliError::validation("mitigation shot counts must be positive"));
            }
            if mc.folds.iter().any(|f| f % 2 == 0) || !mc.folds.contains(&1) || mc.folds.len() < 3 {
                return Err(CliError::validation("folds must be odd, include 1, and number at least 3"));
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> Result<schwinger_core::vqe_engine::MassReference, CliError> {
        use schwinger_core::vqe_engine::MassReference;
        match &self.reference {
            ReferenceSpec::Ratio(r) if r.is_finite() => Ok(MassReference::Ratio(*r)),
            ReferenceSpec::Named(s) if s == "pseudo-critical" => Ok(MassReference::PseudoCritical),
            other => Err(CliError::validation(format!("unknown truncation reference {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedCurveConfig {
    pub l: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default = "default_trunc_l")]
    pub l: Vec<usize>,
    #[serde(default = "default_trunc_e")]
    pub e: Grid,
    #[serde(default = "default_trunc_m")]
    pub m: Grid,
    /// Cutoffs to compare; absent means `2L` only.
    #[serde(default)]
    pub cutoffs: Option<Vec<i32>>,
    #[serde(default = "default_n_max")]
    pub reference_n_max: i32,
    /// Three-qubit truncations at `e_truncated`.
    #[serde(default = "default_curves")]
    pub truncated: Vec<TruncatedCurveConfig>,
    #[serde(default = "default_e_truncated")]
    pub e_truncated: f64,
    #[serde(default)]
    pub reference: ReferenceSpec,
}

fn default_trunc_l() -> Vec<usize> {
    vec![2, 3, 4]
}
fn default_trunc_e() -> Grid {
    Grid::List(vec![0.5, 1.0])
}
fn default_trunc_m() -> Grid {
    Grid::Step {
        start: 0.0,
        stop: 0.5,
        step: 0.02,
    }
}
fn default_curves() -> Vec<TruncatedCurveConfig> {
    vec![TruncatedCurveConfig { l: 3, dim: 6 }, TruncatedCurveConfig { l: 4, dim: 8 }]
}
fn default_e_truncated() -> f64 {
    0.75
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.l.is_empty() {
            return Err(CliError::validation("no lattice sizes requested"));
        }
        for &l in &self.l {
            check_l(l, 2, 6)?;
        }
        self.e.validate_positive("e")?;
        self.m.validate("m")?;
        check_n_max(self.reference_n_max)?;
        if let Some(c) = &self.cutoffs {
            if c.is_empty() {
                return Err(CliError::validation("cutoff list is empty"));
            }
            for &n in c {
                check_n_max(n)?;
            }
        }
        for t in &self.truncated {
            check_l(t.l, 2, 6)?;
            if t.dim == 0 {
                return Err(CliError::validation("truncation dimension must be positive"));
            }
        }
        if !(self.e_truncated > 0.0) {
            return Err(CliError::validation("e_truncated must be positive"));
        }
        match &self.reference {
            ReferenceSpec::Ratio(r) if r.is_finite() => {}
            ReferenceSpec::Named(s) if s == "pseudo-critical" => {}
            other => return Err(CliError::validation(format!("unknown truncation reference {other:?}"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub l: usize,
    pub theta: Theta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    #[serde(default = "default_theta_e")]
    pub e: f64,
    #[serde(default = "default_n_max")]
    pub n_max: i32,
    #[serde(default = "default_theta_m")]
    pub m: Grid,
    #[serde(default = "default_theta_sectors")]
    pub sectors: Vec<SectorSpec>,
}

fn default_theta_sectors() -> Vec<SectorSpec> {
    let mut out = Vec::new();
    for l in 2..=5 {
        out.push(SectorSpec {
            l,
            theta: Theta::Text("0".into()),
        });
    }
    for (l, t) in [(2, "pi/2"), (4, "pi/2"), (3, "pi/3"), (3, "2pi/3")] {
        out.push(SectorSpec {
            l,
            theta: Theta::Text(t.into()),
        });
    }
    out
}

fn default_theta_e() -> f64 {
    0.5
}
fn default_theta_m() -> Grid {
    Grid::Step {
        start: -0.5,
        stop: 1.0,
        step: 0.05,
    }
}

impl ThetaConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.e > 0.0) {
            return Err(CliError::validation("e must be positive"));
        }
        check_n_max(self.n_max)?;
        self.m.validate("m")?;
        if self.sectors.is_empty() {
            return Err(CliError::validation("no sectors requested"));
        }
        for s in &self.sectors {
            check_l(s.l, 2, 6)?;
            s.theta.sector(s.l)?;
        }
        Ok(())
    }
}

/// Reads and parses a TOML config; a missing path yields the default text.
pub fn load<T: for<'de> Deserialize<'de>>(path: Option<&Path>, default_text: &str) -> Result<T, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", p.display())))?,
        None => default_text.to_string(),
    };
    toml::from_str(&text).map_err(|e| CliError::validation(format!("invalid config: {}", e.message())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_grids_are_tidy() {
        let g = Grid::Step {
            start: 0.1,
            stop: 1.0,
            step: 0.1,
        };
        let v = g.values();
        assert_eq!(v.len(), 10);
        assert_eq!(v[2], 0.3);
        assert_eq!(v[9], 1.0);
    }

    #[test]
    fn theta_text_forms() {
        assert_eq!(parse_theta("pi"), Some(PI));
        assert_eq!(parse_theta("-pi/2"), Some(-PI / 2.0));
        assert!((parse_theta("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_theta("0"), Some(0.0));
        assert_eq!(parse_theta("tau"), None);
    }

    #[test]
    fn off_sector_theta_is_rejected() {
        assert!(Theta::Number(0.1234).sector(2).is_err());
        assert_eq!(Theta::Text("pi/2".into()).sector(2).unwrap(), 1);
    }
}
