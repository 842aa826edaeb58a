//! Best product state by coordinate descent from many starts: each site in
//! turn takes the ground vector of its mean-field operator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::linalg::{hermitian_eigen, random_unit_vector, symmetrize, CMat, C64, ZERO};
use crate::meanfield::{evaluate_product_energy, ProductState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductOptimum {
    pub energy: f64,
    pub state: ProductState,
    /// Number of starts in the final round.
    pub starts: usize,
    /// Change of the best energy between the last two rounds.
    pub resolution: f64,
    /// Whether `resolution` fell below the requested target.
    pub certified: bool,
}

/// Best product energy from rounds of doubling start counts, stopping when
/// a round improves the best energy by less than `target`.
pub fn product_state_optimum(h: &ChainHamiltonian, target: f64, seed: u64) -> Result<ProductOptimum> {
    if target.is_nan() || target <= 0.0 {
        return Err(Error::Validation("resolution target must be positive".into()));
    }
    let d = h.d();
    let mut starts = grid_starts(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<Vec<C64>>)> = None;
    let mut resolution = f64::INFINITY;
    let mut last_round = 0;
    for round in 0..8 {
        let mut round_starts: Vec<Vec<Vec<C64>>> = starts
            .iter()
            .map(|v| vec![v.clone(); h.n()])
            .collect();
        for _ in 0..(8 << round) {
            round_starts.push((0..h.n()).map(|_| random_unit_vector(&mut rng, d)).collect());
        }
        last_round = round_starts.len();
        let found = round_starts
            .into_par_iter()
            .map(|s| descend(h, s))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("starts are never empty");
        let improvement = match &best {
            Some((e, _)) => (e - found.0).max(0.0),
            None => f64::INFINITY,
        };
        if best.as_ref().is_none_or(|(e, _)| found.0 < *e) {
            best = Some(found);
        }
        resolution = improvement;
        if improvement < target {
            break;
        }
        starts.clear();
    }
    let (energy, vectors) = best.expect("at least one round");
    let state = ProductState::new(vectors)?;
    let energy = evaluate_product_energy(h, &state)?.min(energy);
    Ok(ProductOptimum {
        energy,
        state,
        starts: last_round,
        resolution,
        certified: resolution < target,
    })
}

/// Identical-site starts on a grid: basis vectors and, for qubits, a
/// Bloch-sphere grid.
fn grid_starts(d: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { C64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();
    if d == 2 {
        for t in 1..8 {
            let theta = std::f64::consts::PI * t as f64 / 8.0;
            for p in 0..8 {
                let phi = std::f64::consts::TAU * p as f64 / 8.0;
                out.push(vec![
                    C64::new((theta / 2.0).cos(), 0.0),
                    C64::from_polar((theta / 2.0).sin(), phi),
                ]);
            }
        }
    }
    out
}

fn descend(h: &ChainHamiltonian, mut vectors: Vec<Vec<C64>>) -> (f64, Vec<Vec<C64>>) {
    let mut energy = f64::INFINITY;
    for _ in 0..500 {
        for k in 0..h.n() {
            let op = site_operator(h, &vectors, k);
            let (_, vecs) = hermitian_eigen(&op);
            vectors[k] = vecs.column(0).iter().copied().collect();
        }
        let state = ProductState::new(vectors.clone()).expect("eigenvectors are normalized");
        let e = evaluate_product_energy(h, &state).expect("dimensions match");
        let settled = (energy - e).abs() < 1e-13 * (1.0 + e.abs());
        energy = energy.min(e);
        if settled {
            break;
        }
    }
    (energy, vectors)
}

/// Operator on site `k` obtained by contracting every coupling touching it
/// with the other sites' vectors.
fn site_operator(h: &ChainHamiltonian, vectors: &[Vec<C64>], k: usize) -> CMat {
    let d = h.d();
    let mut op = CMat::zeros(d, d);
    for (bond, term) in h.terms() {
        let (s1, s2) = h.bond_sites(bond);
        if s1 != k && s2 != k {
            continue;
        }
        let other = if s1 == k { &vectors[s2] } else { &vectors[s1] };
        for a in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for b in 0..d {
                    for e in 0..d {
                        // ⟨a b|H|c e⟩ with k first, or ⟨b a|H|e c⟩ with k second
                        let h_entry = if s1 == k {
                            term[(a * d + b, c * d + e)]
                        } else {
                            term[(b * d + a, e * d + c)]
                        };
                        acc += other[b].conj() * h_entry * other[e];
                    }
                }
                op[(a, c)] += acc;
            }
        }
    }
    symmetrize(&op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Boundary, Preset};

    #[test]
    fn ising_optimum_is_classical() {
        let h = ChainHamiltonian::from_preset(Preset::IsingZz, 3, Boundary::Open).unwrap();
        let r = product_state_optimum(&h, 1e-6, 1).unwrap();
        assert!((r.energy + 2.0).abs() < 1e-12);
        assert!(r.certified);
    }

    #[test]
    fn strong_field_aligns_spins() {
        let h = ChainHamiltonian::from_preset(Preset::Tfim { g: 2.0 }, 4, Boundary::Open).unwrap();
        let r = product_state_optimum(&h, 1e-8, 2).unwrap();
        let s = 0.5f64.sqrt();
        let plus = ProductState::new(vec![vec![C64::new(s, 0.0), C64::new(s, 0.0)]; 4]).unwrap();
        assert!(r.energy <= evaluate_product_energy(&h, &plus).unwrap() + 1e-12);
    }
}
