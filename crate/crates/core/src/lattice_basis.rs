//! Fermion mode configurations, the symmetry operators `U_1`, `T` and `Π`,
//! and symmetrized gauge-invariant sector bases.
//!
//! Mode `l` of a [`FermionConfig`] is bit `l` of its occupation mask and is
//! printed first, so `"0011"` has modes 2 and 3 occupied. A configuration
//! stands for `b†_{i1} ⋯ b†_{ik} |Ω⟩` with the creation operators in
//! increasing mode order; every operator action below reports its sign
//! relative to that ordering. A [`ProductState`] pairs a configuration with
//! the gauge zero-mode momentum `p = n e`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::C64;

/// Accumulated norm below which a gauge-invariant state counts as vanishing.
pub const VANISHING_NORM: f64 = 1e-10;

/// Tolerance for matching a real θ against the allowed sector values.
const THETA_MATCH: f64 = 1e-9;

/// Largest supported number of spatial sites (2L modes must fit in a `u64`).
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("invalid lattice parameters: {0}")]
    InvalidParams(String),
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("configuration {0} is not half filled")]
    NotHalfFilled(String),
    #[error("configuration {config} has {found} modes, expected {expected}")]
    ModeMismatch {
        config: String,
        found: usize,
        expected: usize,
    },
    #[error("cannot parse configuration {0:?}")]
    Parse(String),
    #[error("every candidate state vanishes")]
    EmptyBasis,
    #[error("the U_1 orbit of {0} has no parity-invariant member")]
    NoSymmetricRepresentative(String),
}

/// Physical and truncation parameters of one lattice system.
///
/// `theta_k` labels the sector `θ = k π / L` with `k` normalised into
/// `-(L-1) ..= L`. `L = 1` is accepted because the gap ratio `R_2` needs it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub l: usize,
    pub e: f64,
    pub m: f64,
    pub theta_k: i32,
    pub n_max: i32,
}

impl LatticeParams {
    /// Builds parameters from a real θ, which must be one of the `2L` sector values.
    pub fn new(l: usize, e: f64, m: f64, theta: f64, n_max: i32) -> Result<Self, BasisError> {
        check_sites(l)?;
        let k = sector_index(l, theta)?;
        Self::with_sector(l, e, m, k, n_max)
    }

    /// Builds parameters from the integer sector label `k` of `θ = k π / L`.
    pub fn with_sector(l: usize, e: f64, m: f64, theta_k: i32, n_max: i32) -> Result<Self, BasisError> {
        check_sites(l)?;
        if !(e > 0.0) || !e.is_finite() {
            return Err(BasisError::InvalidParams(format!("coupling e must be positive, got {e}")));
        }
        if !m.is_finite() {
            return Err(BasisError::InvalidParams(format!("mass must be finite, got {m}")));
        }
        if n_max < 1 {
            return Err(BasisError::InvalidParams(format!("n_max must be at least 1, got {n_max}")));
        }
        Ok(Self {
            l,
            e,
            m,
            theta_k: normalize_sector(l, theta_k),
            n_max,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta_k as f64 * PI / self.l as f64
    }

    pub fn modes(&self) -> usize {
        2 * self.l
    }

    /// Whether `Π` is gauge invariant in this sector (θ = 0 or π).
    pub fn has_parity(&self) -> bool {
        self.theta_k == 0 || self.theta_k == self.l as i32
    }
}

fn check_sites(l: usize) -> Result<(), BasisError> {
    if l == 0 || l > MAX_SITES {
        return Err(BasisError::InvalidParams(format!(
            "number of sites must be in 1..={MAX_SITES}, got {l}"
        )));
    }
    Ok(())
}

/// Maps `k` onto the representative range `-(L-1) ..= L`.
pub fn normalize_sector(l: usize, k: i32) -> i32 {
    let two_l = 2 * l as i32;
    let r = k.rem_euclid(two_l);
    if r > l as i32 {
        r - two_l
    } else {
        r
    }
}

/// Returns `k` such that `theta = k π / L` (mod 2π), or `InvalidSector`.
pub fn sector_index(l: usize, theta: f64) -> Result<i32, BasisError> {
    check_sites(l)?;
    if !theta.is_finite() {
        return Err(BasisError::InvalidSector(format!("theta = {theta}")));
    }
    let x = theta * l as f64 / PI;
    let k = x.round();
    if (x - k).abs() > THETA_MATCH {
        return Err(BasisError::InvalidSector(format!(
            "theta = {theta} is not a multiple of pi/{l}"
        )));
    }
    Ok(normalize_sector(l, k as i32))
}

/// Occupation numbers of the `2L` fermion momentum modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FermionConfig {
    bits: u64,
    modes: u8,
}

impl FermionConfig {
    /// Panics if `modes > 64` or `bits` has bits at or above `modes`.
    pub fn new(bits: u64, modes: usize) -> Self {
        assert!(modes <= 64, "at most 64 modes are supported");
        assert!(modes == 64 || bits >> modes == 0, "occupation beyond the mode count");
        Self {
            bits,
            modes: modes as u8,
        }
    }

    pub fn from_occupied(occupied: &[usize], modes: usize) -> Self {
        let bits = occupied.iter().fold(0u64, |acc, &i| {
            assert!(i < modes, "mode index out of range");
            acc | 1 << i
        });
        Self::new(bits, modes)
    }

    /// The Dirac-sea reference configuration `0…01…1` (modes `L..2L` filled).
    pub fn dirac_sea(l: usize) -> Self {
        Self::from_occupied(&(l..2 * l).collect::<Vec<_>>(), 2 * l)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn modes(&self) -> usize {
        self.modes as usize
    }

    pub fn is_occupied(&self, mode: usize) -> bool {
        self.bits >> mode & 1 == 1
    }

    /// Occupied modes in increasing order.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.modes()).filter(move |&i| self.is_occupied(i))
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_half_filled(&self) -> bool {
        2 * self.count() == self.modes()
    }
}

impl fmt::Display for FermionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.modes() {
            f.write_str(if self.is_occupied(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for FermionConfig {
    type Err = BasisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 {
            return Err(BasisError::Parse(s.to_string()));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(BasisError::Parse(s.to_string())),
            }
        }
        Ok(Self::new(bits, s.len()))
    }
}

fn parity_sign(k: usize) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign picked up by `b_i` or `b†_i` when moved past the lower occupied modes.
pub(crate) fn mode_sign(bits: u64, i: usize) -> i32 {
    parity_sign((bits & ((1u64 << i) - 1)).count_ones() as usize)
}

/// Applies `b†_to b_from` to a mask, returning the new mask and sign.
pub(crate) fn hop(bits: u64, to: usize, from: usize) -> Option<(u64, i32)> {
    if bits >> from & 1 == 0 {
        return None;
    }
    let s1 = mode_sign(bits, from);
    let mid = bits & !(1u64 << from);
    if mid >> to & 1 == 1 {
        return None;
    }
    let s2 = mode_sign(mid, to);
    Some((mid | 1u64 << to, s1 * s2))
}

/// Mask and reordering sign of `b†_{t_1} ⋯ b†_{t_k} |Ω⟩` for distinct targets in the given order.
fn reorder(targets: &[usize]) -> (u64, i32) {
    let mut inversions = 0;
    for a in 0..targets.len() {
        for b in a + 1..targets.len() {
            if targets[a] > targets[b] {
                inversions += 1;
            }
        }
    }
    let bits = targets.iter().fold(0u64, |acc, &t| acc | 1 << t);
    (bits, parity_sign(inversions))
}

fn lgt_step(config: FermionConfig) -> (FermionConfig, i32) {
    let m = config.modes();
    let l = m / 2;
    let targets: Vec<usize> = config.occupied().map(|i| (i + 1) % m).collect();
    let (bits, sign) = reorder(&targets);
    (FermionConfig::new(bits, m), sign * parity_sign(l))
}

/// Large gauge transformation `U_1^w` on a configuration: `b_l → b_{l+w}`
/// (indices mod 2L) together with the vacuum phase `(−1)^L` per step.
///
/// Returns the image and the accumulated sign. The gauge zero mode is left to
/// [`apply_u1_state`], which adds its phase.
pub fn apply_lgt(config: FermionConfig, winding: i64) -> (FermionConfig, i32) {
    let m = config.modes() as i64;
    let steps = winding.rem_euclid(m.max(1));
    let mut c = config;
    let mut sign = 1;
    for _ in 0..steps {
        let (next, s) = lgt_step(c);
        c = next;
        sign *= s;
    }
    (c, sign)
}

/// Lattice parity `Π b_l Π = −b_{L−l−1}` (mod 2L) with vacuum phase `(−1)^{L(L+1)/2}`.
pub fn apply_parity(config: FermionConfig) -> (FermionConfig, i32) {
    let m = config.modes();
    let l = m / 2;
    let targets: Vec<usize> = config.occupied().map(|i| (l + m - 1 - i) % m).collect();
    let (bits, sign) = reorder(&targets);
    let vacuum = parity_sign(l * (l + 1) / 2);
    let per_mode = parity_sign(targets.len());
    (FermionConfig::new(bits, m), sign * vacuum * per_mode)
}

/// Momentum `(2l+1)π/(2L)` of mode `l`.
pub fn mode_momentum(mode: usize, l: usize) -> f64 {
    (2 * mode + 1) as f64 * PI / (2 * l) as f64
}

/// Eigenvalue of the lattice translation `T = (−1)^L exp(2i Σ_occupied k_l)`.
pub fn translation_eigenvalue(config: FermionConfig) -> C64 {
    let l = config.modes() / 2;
    let phase: f64 = config.occupied().map(|i| 2.0 * mode_momentum(i, l)).sum();
    C64::from_polar(parity_sign(l) as f64, phase)
}

/// The translation eigenvalue as ±1 when it is real, `None` otherwise.
pub fn translation_sign(config: FermionConfig) -> Option<i32> {
    let t = translation_eigenvalue(config);
    if (t.re - 1.0).abs() < 1e-9 {
        Some(1)
    } else if (t.re + 1.0).abs() < 1e-9 {
        Some(-1)
    } else {
        None
    }
}

/// All half-filled configurations of `2L` modes in increasing mask order.
pub fn half_filled_configs(l: usize) -> Vec<FermionConfig> {
    let m = 2 * l;
    (0u64..1 << m)
        .filter(|b| b.count_ones() as usize == l)
        .map(|b| FermionConfig::new(b, m))
        .collect()
}

/// The distinct configurations reached by repeated `U_1`, starting from `config`.
pub fn lgt_orbit(config: FermionConfig) -> Vec<FermionConfig> {
    let mut out = vec![config];
    let mut c = lgt_step(config).0;
    while c != config {
        out.push(c);
        c = lgt_step(c).0;
    }
    out
}

/// Partition of the half-filled configurations into `U_1` orbits, ordered by
/// their smallest mask.
pub fn lgt_orbits(l: usize) -> Vec<Vec<FermionConfig>> {
    let mut seen = std::collections::HashSet::new();
    let mut orbits = Vec::new();
    for c in half_filled_configs(l) {
        if seen.contains(&c) {
            continue;
        }
        let orbit = lgt_orbit(c);
        seen.extend(orbit.iter().copied());
        orbits.push(orbit);
    }
    orbits
}

/// Orbits whose translation eigenvalue equals `t` (±1).
pub fn translation_orbits(l: usize, t: i32) -> Vec<Vec<FermionConfig>> {
    lgt_orbits(l)
        .into_iter()
        .filter(|o| translation_sign(o[0]) == Some(t))
        .collect()
}

/// Picks the parity-invariant orbit member with the smallest `Σ_occupied sin k_l`
/// (ties broken by mask). This choice makes every θ sector real.
pub fn canonical_representative(orbit: &[FermionConfig]) -> Result<FermionConfig, BasisError> {
    let l = orbit[0].modes() / 2;
    let key = |c: &FermionConfig| {
        let s: f64 = c.occupied().map(|i| mode_momentum(i, l).sin()).sum();
        ((s * 1e9).round() as i64, c.bits())
    };
    orbit
        .iter()
        .filter(|c| apply_parity(**c).0 == **c)
        .min_by_key(|c| key(c))
        .copied()
        .ok_or_else(|| BasisError::NoSymmetricRepresentative(orbit[0].to_string()))
}

/// Canonical representatives of all `T = +1` orbits.
pub fn canonical_representatives(l: usize) -> Result<Vec<FermionConfig>, BasisError> {
    check_sites(l)?;
    translation_orbits(l, 1)
        .iter()
        .map(|o| canonical_representative(o))
        .collect()
}

/// Canonical representatives of every orbit regardless of translation eigenvalue.
pub fn all_canonical_representatives(l: usize) -> Result<Vec<FermionConfig>, BasisError> {
    check_sites(l)?;
    lgt_orbits(l).iter().map(|o| canonical_representative(o)).collect()
}

/// A gauge zero-mode momentum `n` together with a fermion configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub n: i32,
    pub config: FermionConfig,
}

/// A state expanded over product states, with deterministic term order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseState {
    terms: BTreeMap<ProductState, C64>,
}

impl SparseState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: ProductState, amp: C64) {
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += amp;
    }

    pub fn get(&self, key: &ProductState) -> C64 {
        self.terms.get(key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProductState, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> C64 {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (k, a) in small.iter() {
            if let Some(b) = large.terms.get(k) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: C64, other: &SparseState) {
        for (k, a) in other.iter() {
            self.add(*k, alpha * a);
        }
    }

    pub fn scale(&mut self, s: C64) {
        for a in self.terms.values_mut() {
            *a *= s;
        }
    }

    /// Drops terms with magnitude at or below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, a| a.norm() > tol);
    }
}

/// `U_1` on a state: configurations shifted by one mode with their signs, and
/// the zero-mode phase `U_1 |p = ne⟩ = e^{−iπn/L} |p = ne⟩`.
pub fn apply_u1_state(state: &SparseState) -> SparseState {
    let mut out = SparseState::new();
    for (k, a) in state.iter() {
        let l = k.config.modes() / 2;
        let (c, s) = apply_lgt(k.config, 1);
        let phase = C64::from_polar(s as f64, -PI * k.n as f64 / l as f64);
        out.add(ProductState { n: k.n, config: c }, phase * a);
    }
    out
}

/// `Π` on a state: `n → −n` and the reflected configuration with its sign.
pub fn apply_parity_state(state: &SparseState) -> SparseState {
    let mut out = SparseState::new();
    for (k, a) in state.iter() {
        let (c, s) = apply_parity(k.config);
        out.add(ProductState { n: -k.n, config: c }, a * s as f64);
    }
    out
}

/// The θ-sector state `Σ_{l=0}^{2L−1} e^{ilθ} U_1^l (|n⟩ ⊗ |rep⟩)` before normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeInvariantState {
    pub n: i32,
    pub rep: FermionConfig,
    pub theta_k: i32,
    /// Accumulated `(phase, config)` terms after merging repeated configurations.
    pub orbit: Vec<(C64, FermionConfig)>,
    pub norm: f64,
}

impl GaugeInvariantState {
    /// Returns `None` when the orbit sum vanishes.
    pub fn new(theta_k: i32, n: i32, rep: FermionConfig) -> Option<Self> {
        let m = rep.modes();
        let l = m / 2;
        let theta = theta_k as f64 * PI / l as f64;
        let mut acc: BTreeMap<FermionConfig, C64> = BTreeMap::new();
        let mut config = rep;
        let mut sign = 1;
        for step in 0..m {
            let phase = step as f64 * (theta - PI * n as f64 / l as f64);
            *acc.entry(config).or_insert(C64::new(0.0, 0.0)) += C64::from_polar(sign as f64, phase);
            let (next, s) = lgt_step(config);
            config = next;
            sign *= s;
        }
        let orbit: Vec<(C64, FermionConfig)> = acc
            .into_iter()
            .filter(|(_, a)| a.norm() > VANISHING_NORM)
            .map(|(c, a)| (a, c))
            .collect();
        let norm = orbit.iter().map(|(a, _)| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < VANISHING_NORM {
            return None;
        }
        Some(Self {
            n,
            rep,
            theta_k,
            orbit,
            norm,
        })
    }

    /// The unit-norm expansion over product states.
    pub fn vector(&self) -> SparseState {
        let mut v = SparseState::new();
        for (a, c) in &self.orbit {
            v.add(ProductState { n: self.n, config: *c }, a / self.norm);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    /// No parity projection (any θ sector).
    Unsplit,
}

impl Parity {
    pub fn sign(&self) -> Option<i32> {
        match self {
            Parity::Even => Some(1),
            Parity::Odd => Some(-1),
            Parity::Unsplit => None,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Unsplit => "none",
        })
    }
}

impl FromStr for Parity {
    type Err = BasisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            "none" | "unsplit" => Ok(Parity::Unsplit),
            other => Err(BasisError::Parse(other.to_string())),
        }
    }
}

/// Quantum numbers identifying a basis vector: `n` (non-negative for parity
/// combinations), the orbit representative and the parity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLabel {
    pub n: i32,
    pub rep: FermionConfig,
    pub parity: Parity,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{};{}>", self.n, self.rep, self.parity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisState {
    pub l: usize,
    pub theta_k: i32,
    pub label: StateLabel,
    pub vector: SparseState,
}

/// Ordered orthonormal basis of one (θ, parity) sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub params: LatticeParams,
    pub parity: Parity,
    pub states: Vec<BasisState>,
    /// Common translation eigenvalue of the representatives, if they share one.
    pub translation_eigenvalue: Option<i32>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn labels(&self) -> Vec<StateLabel> {
        self.states.iter().map(|s| s.label).collect()
    }
}

fn order_key(n: i32, rep: &FermionConfig) -> (i32, bool, String) {
    (n.abs(), n < 0, rep.to_string())
}

/// Builds the sector basis spanned by `rep_configs` for `|n| ≤ n_max`.
///
/// Vanishing orbit sums are dropped. With a parity split each `n ≥ 0` state
/// is combined with its `Π` image and Gram–Schmidt orthonormalised, so the
/// self-conjugate `n = 0` states appear once with unit norm.
pub fn build_sector_basis(
    params: &LatticeParams,
    parity: Parity,
    rep_configs: &[FermionConfig],
) -> Result<SectorBasis, BasisError> {
    if parity != Parity::Unsplit && !params.has_parity() {
        return Err(BasisError::InvalidSector(format!(
            "parity split requires theta = 0 or pi, got theta = {}",
            params.theta()
        )));
    }
    let m = params.modes();
    for r in rep_configs {
        if r.modes() != m {
            return Err(BasisError::ModeMismatch {
                config: r.to_string(),
                found: r.modes(),
                expected: m,
            });
        }
        if !r.is_half_filled() {
            return Err(BasisError::NotHalfFilled(r.to_string()));
        }
    }

    let mut candidates: Vec<(i32, FermionConfig)> = Vec::new();
    for n in -params.n_max..=params.n_max {
        for r in rep_configs {
            candidates.push((n, *r));
        }
    }
    candidates.sort_by_key(|(n, r)| order_key(*n, r));

    let mut states: Vec<BasisState> = Vec::new();
    for (n, rep) in candidates {
        if parity != Parity::Unsplit && n < 0 {
            continue;
        }
        let Some(g) = GaugeInvariantState::new(params.theta_k, n, rep) else {
            continue;
        };
        let mut v = g.vector();
        if let Some(s) = parity.sign() {
            let image = apply_parity_state(&v);
            v.axpy(C64::new(s as f64, 0.0), &image);
        }
        for _ in 0..2 {
            for s in &states {
                let c = s.vector.inner(&v);
                v.axpy(-c, &s.vector);
            }
        }
        let norm = v.norm();
        if norm < VANISHING_NORM {
            continue;
        }
        v.scale(C64::new(1.0 / norm, 0.0));
        v.prune(1e-14);
        states.push(BasisState {
            l: params.l,
            theta_k: params.theta_k,
            label: StateLabel { n, rep, parity },
            vector: v,
        });
    }
    if states.is_empty() {
        return Err(BasisError::EmptyBasis);
    }
    let signs: Vec<Option<i32>> = rep_configs.iter().map(|r| translation_sign(*r)).collect();
    let translation_eigenvalue = match signs.first() {
        Some(&first) if signs.iter().all(|s| *s == first) => first,
        _ => None,
    };
    Ok(SectorBasis {
        params: *params,
        parity,
        states,
        translation_eigenvalue,
    })
}

/// Sector basis over the canonical `T = +1` representatives.
pub fn default_sector_basis(params: &LatticeParams, parity: Parity) -> Result<SectorBasis, BasisError> {
    let reps = canonical_representatives(params.l)?;
    build_sector_basis(params, parity, &reps)
}
