//! Fixed inputs for the criterion benches, so every run times the same work.

use opext::completion::DualPair;
use opext::random::{contraction, psd, rng};
use opext::verify::{random_symmetric_pair, shmulyan_instance};
use opext::{CMatrix, Tolerances};

pub const SEED: u64 = 7;

pub fn square_contraction(n: usize) -> CMatrix {
    contraction(&mut rng(SEED), n, n, 0.9)
}

pub fn psd_matrix(n: usize) -> CMatrix {
    psd(&mut rng(SEED), n, 0.05, 2.0)
}

/// A symmetric pair whose blocks all have exactly `n` rows and columns.
pub fn symmetric_pair(n: usize) -> DualPair {
    let tol = Tolerances::default();
    let mut g = rng(SEED);
    loop {
        let pair = random_symmetric_pair(&mut g, n, &tol).expect("generator yields valid pairs");
        if pair.t11.nrows() == n && pair.u.ncols() == n {
            return pair;
        }
    }
}

pub fn triangular_instance(n: usize) -> (opext::triangular::TriPair, CMatrix) {
    let tol = Tolerances::default();
    let mut g = rng(SEED);
    loop {
        let (tp, k) = shmulyan_instance(&mut g, n, &tol).expect("generator yields valid instances");
        if tp.t11.nrows() == n && tp.t22.nrows() == n {
            return (tp, k);
        }
    }
}
