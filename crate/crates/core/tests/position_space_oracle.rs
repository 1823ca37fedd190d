mod common;

use common::position_space::PositionSpace;
use common::momentum_lowest;

#[test]
fn translation_commutes_with_the_gauss_law_hamiltonian() {
    let ps = PositionSpace::new(2, 6);
    for k in [0, 1, 2, 3] {
        assert!(ps.commutator_norm(0.8, 0.3, k) < 1e-13);
    }
}

#[test]
fn two_site_lattice_matches_the_momentum_construction() {
    let ps = PositionSpace::new(2, 12);
    for (e, m) in [(0.7, 0.3), (1.3, -0.4), (0.5, 1.1)] {
        for k in -1..=2 {
            let a = ps.lowest(e, m, k, 2);
            let b = momentum_lowest(2, k, 20, e, m);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8, "e={e} m={m} k={k}: {a:?} vs {b:?}");
            }
        }
    }
}
