//! Sector Hamiltonians of the momentum-space lattice Schwinger model.
//!
//! With `j_l = Σ_s b†_{s+l} b_s` (indices mod 2L) the Hamiltonian is
//!
//! ```text
//! H = p²/(4L) + e²/(8L) Σ_{l=1}^{L-1} csc²(πl/2L) j_l† j_l + e²/(16L) (j_L + L)²
//!     + m j_L + Σ_l b†_l b_l sin(k_l − e q),      k_l = (2l+1)π/(2L)
//! ```
//!
//! and is linear in `e²` and `m`. A [`SectorOperator`] therefore stores the
//! electric, mass and hopping matrices of a basis once and evaluates
//! `H(e, m) = e² E + m M + K` on demand. The hopping term `K` is the `H^(1)`
//! of the strong-coupling expansion; `H^(0) = e² E + m M`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::lattice_basis::{
    build_sector_basis, canonical_representatives, hop, mode_momentum, BasisError, BasisState, FermionConfig,
    LatticeParams, Parity, ProductState, SectorBasis, SparseState, StateLabel,
};
use crate::C64;

/// Largest imaginary part tolerated when reading off a real matrix element.
pub const REALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("states belong to different sectors")]
    BasisMismatch,
    #[error("basis is empty")]
    EmptyBasis,
    #[error("matrix element ({row}, {col}) has imaginary part {imag:e}")]
    NonReal { row: usize, col: usize, imag: f64 },
    #[error("closed forms exist only for L = 2, 3, 4, got L = {0}")]
    UnsupportedL(usize),
    #[error("truncation dimension {dim} exceeds basis size {size}")]
    DimTooLarge { dim: usize, size: usize },
    #[error("truncation dimension must be positive")]
    ZeroDim,
}

type FermionVec = BTreeMap<u64, f64>;

/// `j_shift` applied to a fermion vector of `modes` modes.
fn apply_j(shift: usize, v: &FermionVec, modes: usize) -> FermionVec {
    let mut out = FermionVec::new();
    for (&bits, &a) in v {
        for s in 0..modes {
            if let Some((b, sign)) = hop(bits, (s + shift) % modes, s) {
                *out.entry(b).or_insert(0.0) += a * sign as f64;
            }
        }
    }
    out
}

fn axpy_f(acc: &mut FermionVec, alpha: f64, v: &FermionVec) {
    for (&k, &a) in v {
        *acc.entry(k).or_insert(0.0) += alpha * a;
    }
}

/// Fermionic parts of the three Hamiltonian components acting on one configuration.
#[derive(Debug, Clone)]
struct ConfigAction {
    /// Coefficient of `e²` apart from the zero-mode `n²/(4L)`.
    electric: FermionVec,
    /// Coefficient of `m`.
    mass: FermionVec,
    /// `Σ_occupied e^{i k_l}`.
    hopping: C64,
}

fn config_action(config: FermionConfig) -> ConfigAction {
    let modes = config.modes();
    let l = modes / 2;
    let x: FermionVec = [(config.bits(), 1.0)].into_iter().collect();
    let mut electric = FermionVec::new();
    for shift in 1..l {
        let c = 1.0 / (8.0 * l as f64 * (PI * shift as f64 / (2 * l) as f64).sin().powi(2));
        let jx = apply_j(shift, &x, modes);
        let jdj = apply_j(modes - shift, &jx, modes);
        axpy_f(&mut electric, c, &jdj);
    }
    let jl = apply_j(l, &x, modes);
    let mut shifted = jl.clone();
    axpy_f(&mut shifted, l as f64, &x);
    let mut sq = apply_j(l, &shifted, modes);
    axpy_f(&mut sq, l as f64, &shifted);
    axpy_f(&mut electric, 1.0 / (16.0 * l as f64), &sq);
    let hopping = config
        .occupied()
        .map(|i| C64::from_polar(1.0, mode_momentum(i, l)))
        .sum();
    ConfigAction {
        electric,
        mass: jl,
        hopping,
    }
}

/// Images of a state under the electric, mass and hopping components.
fn apply_components(
    state: &SparseState,
    cache: &mut BTreeMap<FermionConfig, ConfigAction>,
) -> [SparseState; 3] {
    let mut out = [SparseState::new(), SparseState::new(), SparseState::new()];
    let two_i = C64::new(0.0, 2.0);
    for (k, &a) in state.iter() {
        let modes = k.config.modes();
        let l = modes / 2;
        let act = cache.entry(k.config).or_insert_with(|| config_action(k.config));
        out[0].add(*k, a * (k.n as f64).powi(2) / (4.0 * l as f64));
        for (&b, &v) in &act.electric {
            out[0].add(
                ProductState {
                    n: k.n,
                    config: FermionConfig::new(b, modes),
                },
                a * v,
            );
        }
        for (&b, &v) in &act.mass {
            out[1].add(
                ProductState {
                    n: k.n,
                    config: FermionConfig::new(b, modes),
                },
                a * v,
            );
        }
        // sin(k − eq) = (e^{ik} e^{−ieq} − e^{−ik} e^{ieq}) / 2i, and e^{±ieq} raises/lowers n.
        out[2].add(ProductState { n: k.n - 1, config: k.config }, a * act.hopping / two_i);
        out[2].add(
            ProductState { n: k.n + 1, config: k.config },
            -a * act.hopping.conj() / two_i,
        );
    }
    out
}

fn real_part(z: C64, row: usize, col: usize) -> Result<f64, HamiltonianError> {
    if z.im.abs() > REALITY_TOLERANCE * z.re.abs().max(1.0) {
        return Err(HamiltonianError::NonReal { row, col, imag: z.im });
    }
    Ok(z.re)
}

fn same_sector(a: &BasisState, b: &BasisState) -> bool {
    a.l == b.l && a.theta_k == b.theta_k && a.label.parity == b.label.parity
}

/// `⟨i|H^(0)|j⟩ = ⟨i|e² E + m M|j⟩`.
pub fn matrix_element_h0(
    state_i: &BasisState,
    state_j: &BasisState,
    params: &LatticeParams,
) -> Result<f64, HamiltonianError> {
    if !same_sector(state_i, state_j) || state_i.l != params.l {
        return Err(HamiltonianError::BasisMismatch);
    }
    let mut cache = BTreeMap::new();
    let [el, ms, _] = apply_components(&state_j.vector, &mut cache);
    let z = state_i.vector.inner(&el) * params.e * params.e + state_i.vector.inner(&ms) * params.m;
    real_part(z, 0, 0)
}

/// `⟨i|H^(1)|j⟩` for the hopping part `Σ_l b†_l b_l sin(k_l − e q)`.
pub fn matrix_element_h1(
    state_i: &BasisState,
    state_j: &BasisState,
    params: &LatticeParams,
) -> Result<f64, HamiltonianError> {
    if !same_sector(state_i, state_j) || state_i.l != params.l {
        return Err(HamiltonianError::BasisMismatch);
    }
    let mut cache = BTreeMap::new();
    let [_, _, kin] = apply_components(&state_j.vector, &mut cache);
    real_part(state_i.vector.inner(&kin), 0, 0)
}

/// Dense real symmetric Hamiltonian with its strong-coupling split.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub params: LatticeParams,
    pub parity: Parity,
    pub labels: Vec<StateLabel>,
    pub entries: DMatrix<f64>,
    /// Strong-coupling part `H^(0)`.
    pub h0: DMatrix<f64>,
    /// Hopping part `H^(1)`.
    pub h1: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest absolute asymmetry `|H_ij − H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let h = &self.entries;
        (h - h.transpose()).amax()
    }

    fn header(&self) -> String {
        format!(
            "L={} theta={} e={} m={} n_max={} parity={} dim={}",
            self.params.l,
            self.params.theta(),
            self.params.e,
            self.params.m,
            self.params.n_max,
            self.parity,
            self.dim()
        )
    }

    /// Plain-text dump: a header, the labelled basis, then one matrix row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.header());
        for (i, lab) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "# {i}: n={} config={} parity={}", lab.n, lab.rep, lab.parity);
        }
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{:e}", self.entries[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// CSV dump of every entry with the labels of its row and column state.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.header());
        s.push_str("row,col,n_row,config_row,parity_row,n_col,config_col,parity_col,value\n");
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let (a, b) = (&self.labels[i], &self.labels[j]);
                let _ = writeln!(
                    s,
                    "{i},{j},{},{},{},{},{},{},{:e}",
                    a.n,
                    a.rep,
                    a.parity,
                    b.n,
                    b.rep,
                    b.parity,
                    self.entries[(i, j)]
                );
            }
        }
        s
    }
}

/// The electric, mass and hopping matrices of one sector basis.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub basis: Arc<SectorBasis>,
    pub electric: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub hopping: DMatrix<f64>,
}

impl SectorOperator {
    pub fn build(basis: SectorBasis) -> Result<Self, HamiltonianError> {
        let n = basis.len();
        if n == 0 {
            return Err(HamiltonianError::EmptyBasis);
        }
        let mut cache = BTreeMap::new();
        let mut mats = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for j in 0..n {
            let images = apply_components(&basis.states[j].vector, &mut cache);
            for i in 0..n {
                for (c, img) in images.iter().enumerate() {
                    let z = basis.states[i].vector.inner(img);
                    mats[c][(i, j)] = real_part(z, i, j)?;
                }
            }
        }
        let [electric, mass, hopping] = mats;
        Ok(Self {
            basis: Arc::new(basis),
            electric,
            mass,
            hopping,
        })
    }

    /// Convenience constructor over the canonical representatives.
    pub fn for_sector(l: usize, theta_k: i32, n_max: i32, parity: Parity) -> Result<Self, HamiltonianError> {
        let params = LatticeParams::with_sector(l, 1.0, 0.0, theta_k, n_max)?;
        let reps = canonical_representatives(l)?;
        Self::build(build_sector_basis(&params, parity, &reps)?)
    }

    pub fn dim(&self) -> usize {
        self.electric.nrows()
    }

    /// `H(e, m)` as a bare matrix.
    pub fn matrix(&self, e: f64, m: f64) -> DMatrix<f64> {
        &self.electric * (e * e) + &self.mass * m + &self.hopping
    }

    /// `H(e, m)` with labels and the `H^(0)`/`H^(1)` split.
    pub fn at(&self, e: f64, m: f64) -> HamiltonianMatrix {
        let mut params = self.basis.params;
        params.e = e;
        params.m = m;
        let h0 = &self.electric * (e * e) + &self.mass * m;
        HamiltonianMatrix {
            params,
            parity: self.basis.parity,
            labels: self.basis.labels(),
            entries: &h0 + &self.hopping,
            h0,
            h1: self.hopping.clone(),
        }
    }
}

/// Generic operator-algebra Hamiltonian at the basis' own `(e, m)`.
pub fn build_hamiltonian(basis: &SectorBasis) -> Result<HamiltonianMatrix, HamiltonianError> {
    let (e, m) = (basis.params.e, basis.params.m);
    Ok(SectorOperator::build(basis.clone())?.at(e, m))
}

fn family_exists(l: usize, rep: &str, q: i32) -> bool {
    match (l, rep) {
        (3, "101010") => q.rem_euclid(3) == 0,
        (4, "01100110") => q.rem_euclid(2) == 0,
        _ => true,
    }
}

fn families(l: usize) -> &'static [&'static str] {
    match l {
        2 => &["0011"],
        3 => &["000111", "101010"],
        4 => &["00001111", "10010110", "01100110"],
        _ => &[],
    }
}

/// Strong-coupling block `(electric, mass)` between two families at effective
/// angle `φ = θ − nπ/L`, excluding the zero-mode `n²e²/(4L)`.
fn closed_form_block(l: usize, a: usize, b: usize, phi: f64) -> (f64, f64) {
    let (c1, c2, c3, c4) = (phi.cos(), (2.0 * phi).cos(), (3.0 * phi).cos(), (4.0 * phi).cos());
    let r2 = 2f64.sqrt();
    match l {
        2 => {
            let h = phi / 2.0;
            (0.5 * h.sin().powi(2) * (1.0 + h.cos().powi(2)), -2.0 * c1)
        }
        3 => {
            if a == 0 && b == 0 && family_count_at(3, phi) == 1 {
                return (4.0 / 12.0 + (3.0 - 2.0 * c1).powi(2) / 48.0, -2.0 * c1);
            }
            // α = (√3 x − y)/2 and β = (x + √3 y)/2 diagonalise the n ≡ 3θ/π block.
            let alpha = [3f64.sqrt() / 2.0, -0.5];
            let beta = [0.5, 3f64.sqrt() / 2.0];
            let ea = 0.75 * (phi / 2.0).sin().powi(4);
            let eb = 8.0 / 12.0 + (3.0 + c1).powi(2) / 48.0;
            let (ma, mb) = (-3.0 * c1, c1);
            (
                ea * alpha[a] * alpha[b] + eb * beta[a] * beta[b],
                ma * alpha[a] * alpha[b] + mb * beta[a] * beta[b],
            )
        }
        4 => {
            let el = match (a.min(b), a.max(b)) {
                (0, 0) => (60.0 - 8.0 * r2) - 16.0 * c1 - (12.0 - 8.0 * r2) * c2,
                (0, 1) => -(6.0 + 4.0 * r2) - 16.0 * c1 - 4.0 * c2 - (6.0 - 4.0 * r2) * c4,
                (1, 1) => (60.0 + 8.0 * r2) - (12.0 + 8.0 * r2) * c2 - 16.0 * c3,
                (0, 2) => -(8.0 - 4.0 * r2) * (1.0 - c2),
                (1, 2) => (8.0 + 4.0 * r2) * (1.0 - c2),
                _ => 64.0,
            } / 64.0;
            let ms = match (a.min(b), a.max(b)) {
                (0, 0) | (0, 1) => -2.0 * c1,
                (1, 1) => -2.0 * c3,
                _ => 0.0,
            };
            (el, ms)
        }
        _ => unreachable!(),
    }
}

fn family_count_at(l: usize, phi: f64) -> usize {
    let q = (phi * l as f64 / PI).round() as i32;
    families(l).iter().filter(|f| family_exists(l, f, q)).count()
}

/// Hopping matrix element between neighbouring `n` within one family.
fn closed_form_hopping(l: usize, family: usize) -> f64 {
    match (l, family) {
        (2, 0) => -1.0 / 2f64.sqrt(),
        (3, 0) => -1.0,
        (4, 0) => -(2f64.sqrt()) * (PI / 8.0).cos(),
        (4, 1) => -(2f64.sqrt()) * (PI / 8.0).sin(),
        _ => 0.0,
    }
}

/// Unsplit sector Hamiltonian for `L ∈ {2, 3, 4}` assembled only from the
/// strong-coupling closed forms and the hopping matrix elements, with the
/// same state ordering as the generic builder.
pub fn closed_form_oracle(params: &LatticeParams) -> Result<HamiltonianMatrix, HamiltonianError> {
    let l = params.l;
    if !(2..=4).contains(&l) {
        return Err(HamiltonianError::UnsupportedL(l));
    }
    let fam = families(l);
    let mut keys: Vec<(i32, usize)> = Vec::new();
    for n in -params.n_max..=params.n_max {
        for (f, name) in fam.iter().enumerate() {
            if family_exists(l, name, params.theta_k - n) {
                keys.push((n, f));
            }
        }
    }
    keys.sort_by_key(|&(n, f)| (n.abs(), n < 0, fam[f].to_string()));
    let index: BTreeMap<(i32, usize), usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let dim = keys.len();
    let mut h0 = DMatrix::zeros(dim, dim);
    let mut h1 = DMatrix::zeros(dim, dim);
    let e2 = params.e * params.e;
    for (i, &(n, a)) in keys.iter().enumerate() {
        let phi = params.theta() - n as f64 * PI / l as f64;
        for (j, &(n2, b)) in keys.iter().enumerate() {
            if n2 == n {
                let (el, ms) = closed_form_block(l, a, b, phi);
                h0[(i, j)] = e2 * el + params.m * ms;
            }
        }
        h0[(i, i)] += e2 * (n * n) as f64 / (4 * l) as f64;
        if let Some(&j) = index.get(&(n + 1, a)) {
            let t = closed_form_hopping(l, a);
            h1[(i, j)] = t;
            h1[(j, i)] = t;
        }
    }
    let labels = keys
        .iter()
        .map(|&(n, f)| StateLabel {
            n,
            rep: fam[f].parse().expect("static configuration"),
            parity: Parity::Unsplit,
        })
        .collect();
    Ok(HamiltonianMatrix {
        params: *params,
        parity: Parity::Unsplit,
        labels,
        entries: &h0 + &h1,
        h0,
        h1,
    })
}

/// A low-dimensional restriction of a sector Hamiltonian to its most
/// significant basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    pub dim: usize,
    /// Parent basis indices, most significant first.
    pub selected_states: Vec<usize>,
    /// Every parent index ordered by descending contribution.
    pub permutation: Vec<usize>,
    /// Contribution weights of the selected states, same order.
    pub weights: Vec<f64>,
    pub labels: Vec<StateLabel>,
    /// Reference point `(e, m)` of the selection.
    pub reference: (f64, f64),
    /// Restricted matrix at the reference point.
    pub entries: DMatrix<f64>,
}

impl TruncatedHamiltonian {
    /// Restricts another parent matrix (same basis) to the selected states.
    pub fn restrict(&self, parent: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            parent[(self.selected_states[i], self.selected_states[j])]
        })
    }
}

/// Selects the `dim` basis states with the largest amplitude magnitude in the
/// low-lying states at `reference = (e, m)`.
///
/// In a parity sector the relevant state is the sector ground state (the
/// first excited state of the system lives in the opposite sector). In an
/// unsplit basis the ground and first excited amplitudes are summed.
pub fn truncate(
    op: &SectorOperator,
    dim: usize,
    reference: (f64, f64),
) -> Result<TruncatedHamiltonian, HamiltonianError> {
    let size = op.dim();
    if dim == 0 {
        return Err(HamiltonianError::ZeroDim);
    }
    if dim > size {
        return Err(HamiltonianError::DimTooLarge { dim, size });
    }
    let full = op.matrix(reference.0, reference.1);
    let eig = SymmetricEigen::new(full.clone());
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let used = if op.basis.parity == Parity::Unsplit && size > 1 { 2 } else { 1 };
    let weight: Vec<f64> = (0..size)
        .map(|i| order[..used].iter().map(|&c| eig.eigenvectors[(i, c)].abs()).sum())
        .collect();
    let mut permutation: Vec<usize> = (0..size).collect();
    permutation.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]).then(a.cmp(&b)));
    let selected_states = permutation[..dim].to_vec();
    let labels = selected_states.iter().map(|&i| op.basis.states[i].label).collect();
    let weights = selected_states.iter().map(|&i| weight[i]).collect();
    let mut t = TruncatedHamiltonian {
        dim,
        selected_states,
        permutation,
        weights,
        labels,
        reference,
        entries: DMatrix::zeros(0, 0),
    };
    t.entries = t.restrict(&full);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_basis::default_sector_basis;

    #[test]
    fn hamiltonian_is_symmetric() {
        let p = LatticeParams::with_sector(3, 0.7, 0.2, 3, 4).unwrap();
        let h = build_hamiltonian(&default_sector_basis(&p, Parity::Even).unwrap()).unwrap();
        assert!(h.asymmetry() < 1e-12);
    }

    #[test]
    fn l2_hopping_element() {
        let op = SectorOperator::for_sector(2, 2, 3, Parity::Unsplit).unwrap();
        let b = &op.basis;
        let i = b.labels().iter().position(|s| s.n == 1).unwrap();
        let j = b.labels().iter().position(|s| s.n == 2).unwrap();
        assert!((op.hopping[(i, j)] + 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn truncation_to_full_size_keeps_spectrum() {
        let op = SectorOperator::for_sector(2, 2, 3, Parity::Even).unwrap();
        let t = truncate(&op, op.dim(), (0.8, 0.1)).unwrap();
        let a = SymmetricEigen::new(op.matrix(0.8, 0.1)).eigenvalues;
        let b = SymmetricEigen::new(t.entries.clone()).eigenvalues;
        let (mut a, mut b) = (a.as_slice().to_vec(), b.as_slice().to_vec());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_rejects_oversized_dim() {
        let op = SectorOperator::for_sector(2, 2, 2, Parity::Even).unwrap();
        assert!(matches!(
            truncate(&op, 99, (1.0, 0.0)),
            Err(HamiltonianError::DimTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_rejects_large_l() {
        let p = LatticeParams::with_sector(5, 1.0, 0.0, 5, 2).unwrap();
        assert_eq!(closed_form_oracle(&p), Err(HamiltonianError::UnsupportedL(5)));
    }

    #[test]
    fn export_formats_carry_labels() {
        let op = SectorOperator::for_sector(2, 2, 1, Parity::Even).unwrap();
        let h = op.at(1.0, 0.5);
        assert!(h.to_csv().lines().nth(1).unwrap().starts_with("row,col"));
        assert!(h.to_text().contains("config=0011"));
    }
}
