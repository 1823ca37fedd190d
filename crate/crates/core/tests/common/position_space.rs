//! Staggered-fermion Hamiltonian in position space with explicit link
//! variables, projected onto Gauss-law states.
//!
//! Sites `r = 0..2L` hold Jordan–Wigner fermions ordered by site; link `r`
//! joins `r` and `r + 1` and carries an integer flux `l(r)`, with electric
//! field `E(r) = e (l(r) + phi)`. The fermions are antiperiodic, so the
//! hopping across the last link carries a minus sign. Gauss's law
//! `l(r) − l(r−1) = n(r) − (r mod 2)` fixes every flux from `l(0)`.
//!
//! The background offset `phi = k / 2L` reproduces the `θ = kπ/L` sector.
//! The two-site translation `c†_r → c†_{r+2}` (with a sign on wrapping) is
//! diagonalized alongside, and the spectrum is reported in its `+1` space.

use nalgebra::{DMatrix, SymmetricEigen};
use schwinger_core::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct State {
    occ: u32,
    l0: i32,
}

pub struct PositionSpace {
    l: usize,
    states: Vec<State>,
    index: std::collections::HashMap<State, usize>,
}

fn occupied(occ: u32, r: usize) -> bool {
    occ >> r & 1 == 1
}

// Sign of moving an operator past the occupied sites below `r`.
fn jw_sign(occ: u32, r: usize) -> f64 {
    if (occ & ((1u32 << r) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl PositionSpace {
    /// Gauss-law states at half filling with every `|l(r)| ≤ flux_max`.
    pub fn new(l: usize, flux_max: i32) -> Self {
        let sites = 2 * l;
        let mut states = Vec::new();
        for occ in 0..(1u32 << sites) {
            if occ.count_ones() as usize != l {
                continue;
            }
            for l0 in -flux_max..=flux_max {
                let s = State { occ, l0 };
                if Self::fluxes(l, s).iter().all(|f| f.abs() <= flux_max) {
                    states.push(s);
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { l, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    fn fluxes(l: usize, s: State) -> Vec<i32> {
        let mut f = vec![s.l0];
        for r in 1..2 * l {
            let q = occupied(s.occ, r) as i32 - (r % 2) as i32;
            f.push(f[r - 1] + q);
        }
        f
    }

    fn hamiltonian(&self, e: f64, m: f64, phi: f64) -> DMatrix<C64> {
        let sites = 2 * self.l;
        let dim = self.dim();
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for (i, s) in self.states.iter().enumerate() {
            let flux = Self::fluxes(self.l, *s);
            let electric: f64 = flux.iter().map(|&f| 0.5 * (e * (f as f64 + phi)).powi(2)).sum();
            let mass: f64 = (0..sites)
                .filter(|&r| occupied(s.occ, r))
                .map(|r| if r % 2 == 0 { m } else { -m })
                .sum();
            h[(i, i)] += C64::new(electric + mass, 0.0);
            // (i/2) ψ†(r) U(r) ψ(r+1) and its conjugate; U(r) raises l(r).
            for r in 0..sites {
                let rp = (r + 1) % sites;
                if !occupied(s.occ, rp) || occupied(s.occ, r) {
                    continue;
                }
                let mut sign = jw_sign(s.occ, rp);
                let mid = s.occ & !(1 << rp);
                sign *= jw_sign(mid, r);
                let occ = mid | (1 << r);
                if r == sites - 1 {
                    sign = -sign;
                }
                let l0 = if r == 0 { s.l0 + 1 } else { s.l0 };
                let Some(&j) = self.index.get(&State { occ, l0 }) else {
                    continue;
                };
                let amp = C64::new(0.0, 0.5 * sign);
                h[(j, i)] += amp;
                h[(i, j)] += amp.conj();
            }
        }
        h
    }

    fn translation(&self) -> DMatrix<f64> {
        let sites = 2 * self.l;
        let dim = self.dim();
        let mut t = DMatrix::zeros(dim, dim);
        for (i, s) in self.states.iter().enumerate() {
            // Rebuild c†_{r1+2} c†_{r2+2} ... |0⟩ in site order.
            let mut occ = 0u32;
            let mut sign = 1.0;
            for r in (0..sites).rev().filter(|&r| occupied(s.occ, r)) {
                let target = (r + 2) % sites;
                if r + 2 >= sites {
                    sign = -sign;
                }
                sign *= jw_sign(occ, target);
                occ |= 1 << target;
            }
            let flux = Self::fluxes(self.l, *s);
            let l0 = flux[(sites - 2) % sites];
            let j = self.index[&State { occ, l0 }];
            t[(j, i)] = sign;
        }
        t
    }

    /// Lowest `k` eigenvalues in the `θ = kπ/L`, translation `+1` sector.
    pub fn lowest(&self, e: f64, m: f64, theta_k: i32, count: usize) -> Vec<f64> {
        let phi = theta_k as f64 / (2 * self.l) as f64;
        let t = self.translation();
        let mut proj = DMatrix::<f64>::identity(self.dim(), self.dim());
        let mut power = t.clone();
        for _ in 1..self.l {
            proj += &power;
            power = &power * &t;
        }
        proj /= self.l as f64;
        let sym = (&proj + proj.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let cols: Vec<_> = (0..self.dim())
            .filter(|&c| eig.eigenvalues[c] > 0.5)
            .map(|c| eig.eigenvectors.column(c).map(|x| C64::new(x, 0.0)))
            .collect();
        let q = DMatrix::from_columns(&cols);
        let h = q.adjoint() * self.hamiltonian(e, m, phi) * &q;
        let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    /// Largest `|[H, T]|` entry, zero when the flux cutoff respects translation.
    pub fn commutator_norm(&self, e: f64, m: f64, theta_k: i32) -> f64 {
        let phi = theta_k as f64 / (2 * self.l) as f64;
        let h = self.hamiltonian(e, m, phi);
        let t = self.translation().map(|x| C64::new(x, 0.0));
        (&h * &t - &t * &h).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
