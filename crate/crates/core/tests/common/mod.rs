#![allow(dead_code)]

use chaindp::hamiltonian::{Boundary, ChainHamiltonian, ClassicalChain, LocalTerm};
use chaindp::linalg::{op_norm, random_gaussian, symmetrize, CMat};
use rand::Rng;

/// Hermitian `d² × d²` coupling with operator norm `norm`.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, d: usize, norm: f64) -> CMat {
    let g = random_gaussian(rng, d * d, d * d);
    let h = symmetrize(&(&g + g.adjoint()));
    h.scale(norm / op_norm(&h))
}

/// Chain with an independent random coupling on every bond.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, boundary: Boundary) -> ChainHamiltonian {
    let bonds = match boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    let terms = (0..bonds)
        .map(|bond| {
            let norm = rng.random_range(0.3..1.0);
            LocalTerm {
                bond,
                matrix: random_term(rng, d, norm),
            }
        })
        .collect();
    ChainHamiltonian::new(d, n, boundary, terms).unwrap()
}

pub fn random_classical<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n: usize,
    boundary: Boundary,
    integer: bool,
) -> ClassicalChain {
    let bonds = match boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    let tables = (0..bonds)
        .map(|_| {
            (0..d * d)
                .map(|_| {
                    if integer {
                        rng.random_range(-5i32..=5) as f64
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    ClassicalChain::new(d, n, boundary, tables).unwrap()
}
