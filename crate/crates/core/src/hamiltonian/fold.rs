//! Folding a periodic ring into an open chain of half the length.
//!
//! Folded site `j` (0-based) carries original sites `(j, N−1−j)` with the
//! tensor order `left ⊗ mirrored`. A folded coupling between `j` and `j+1`
//! therefore acts on four original sites ordered
//! `[j, N−1−j, j+1, N−2−j]`.

use super::{Boundary, ChainHamiltonian, LocalTerm};
use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};

/// Embed a two-site operator acting on factors `positions` (in the
/// operator's own factor order) into a product of `factors` sites of
/// dimension `d`.
fn embed_pair(op: &CMat, d: usize, positions: [usize; 2], factors: usize) -> CMat {
    let dim = d.pow(factors as u32);
    let digit = |index: usize, pos: usize| (index / d.pow((factors - 1 - pos) as u32)) % d;
    let mut out = CMat::from_element(dim, dim, ZERO);
    for r in 0..dim {
        for c in 0..dim {
            let spectator_match = (0..factors)
                .filter(|p| !positions.contains(p))
                .all(|p| digit(r, p) == digit(c, p));
            if !spectator_match {
                continue;
            }
            let sub_r = digit(r, positions[0]) * d + digit(r, positions[1]);
            let sub_c = digit(c, positions[0]) * d + digit(c, positions[1]);
            out[(r, c)] = op[(sub_r, sub_c)];
        }
    }
    out
}

/// Fold a periodic chain of even length `N ≥ 4` into an open chain of
/// length `N/2` with local dimension `d²`.
///
/// The middle coupling `H_{N/2, N/2+1}` becomes an on-site operator of the
/// last folded site and the wrap coupling `H_{N,1}` an on-site operator of
/// the first folded site; both are absorbed into the adjacent folded
/// coupling. The result is rescaled to unit maximal norm and the factor is
/// multiplied into the recorded scale.
pub fn fold_pbc(h: &ChainHamiltonian) -> Result<ChainHamiltonian> {
    if h.boundary() != Boundary::Periodic {
        return Err(Error::NotPeriodic);
    }
    let n = h.n();
    if !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    if n < 4 {
        return Err(Error::Validation(format!(
            "folding needs N >= 4 so that the folded chain has two sites, got {n}"
        )));
    }
    let d = h.d();
    let half = n / 2;
    let fd = d * d;
    let mut couplings = vec![CMat::from_element(fd * fd, fd * fd, ZERO); half - 1];

    for (j, coupling) in couplings.iter_mut().enumerate() {
        // original bond j couples (j, j+1): the left halves of folded j, j+1
        if let Some(t) = h.term(j) {
            *coupling += embed_pair(t, d, [0, 2], 4);
        }
        // original bond N−2−j couples (N−2−j, N−1−j): mirrored halves of
        // folded j+1 and folded j, in that order
        if let Some(t) = h.term(n - 2 - j) {
            *coupling += embed_pair(t, d, [3, 1], 4);
        }
    }
    // middle bond (half−1, half) lives entirely on folded site half−1
    if let Some(t) = h.term(half - 1) {
        couplings[half - 2] += embed_pair(t, d, [2, 3], 4);
    }
    // wrap bond (N−1, 0): mirrored then left half of folded site 0
    if let Some(t) = h.term(n - 1) {
        couplings[0] += embed_pair(t, d, [1, 0], 4);
    }

    let terms = couplings
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.iter().any(|z| *z != ZERO))
        .map(|(bond, matrix)| LocalTerm { bond, matrix })
        .collect();
    ChainHamiltonian::normalized(fd, half, Boundary::Open, terms, h.scale())
}

/// Map a ring basis index to the folded-chain basis index.
pub fn fold_basis_index(index: usize, d: usize, n: usize) -> usize {
    let digit = |site: usize| (index / d.pow((n - 1 - site) as u32)) % d;
    let half = n / 2;
    let mut out = 0;
    for j in 0..half {
        out = out * d + digit(j);
        out = out * d + digit(n - 1 - j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Preset;

    #[test]
    fn fold_requires_even_periodic() {
        let open = ChainHamiltonian::from_preset(Preset::IsingZz, 4, Boundary::Open).unwrap();
        assert!(matches!(fold_pbc(&open), Err(Error::NotPeriodic)));
        let odd = ChainHamiltonian::from_preset(Preset::IsingZz, 5, Boundary::Periodic).unwrap();
        assert!(matches!(fold_pbc(&odd), Err(Error::OddLength(5))));
    }

    #[test]
    fn zero_ring_folds_to_zero_chain() {
        let h = ChainHamiltonian::zero(2, 6, Boundary::Periodic).unwrap();
        let f = fold_pbc(&h).unwrap();
        assert_eq!(f.n(), 3);
        assert_eq!(f.d(), 4);
        assert_eq!(f.terms().count(), 0);
    }

    #[test]
    fn folded_index_is_a_permutation() {
        let (d, n) = (2, 6);
        let mut seen = [false; 64];
        for i in 0..64 {
            let j = fold_basis_index(i, d, n);
            assert!(!seen[j]);
            seen[j] = true;
        }
    }
}
